//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` and blank lines are ignored. Keys are resolved into
//! typed sections on demand so each subcommand only requires what it uses.
//! Every value the run relied on, defaults included, is written back by
//! [`Settings::manifest_body`], and that text parses to the same run.

use std::collections::BTreeMap;
use std::str::FromStr;

use qread_core::baselines::{BaselineKind, PcExponent};
use qread_core::codes::{bch_build, rm_build, rs_build, CodeSpec};
use qread_core::experiment::{AdaptiveStop, EnergyMode, ExperimentConfig, Metric, ReceiverConfig, ThresholdOptions};
use qread_core::field::FieldSpec;
use qread_core::photonics::{DolinarConfig, GuessPolicy, MemoryCellPair};
use thiserror::Error;

/// Every key the parser accepts.
pub const KNOWN_KEYS: &[&str] = &[
    "code.family",
    "code.n",
    "code.k",
    "code.delta",
    "code.b",
    "code.r",
    "code.m",
    "cells.kappa0",
    "cells.kappa1",
    "cells.p0",
    "receiver.kind",
    "receiver.efficiency",
    "receiver.rounds",
    "receiver.guess",
    "grid.start",
    "grid.stop",
    "grid.points",
    "trials",
    "seed",
    "metric",
    "baseline",
    "energy.mode",
    "threshold.pc_exponent",
    "threshold.max_bracket",
    "adaptive.min_errors",
    "adaptive.max_trials",
];

/// Environment variable that replaces the configured seed.
pub const SEED_ENV: &str = "QREAD_SEED";

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given twice")]
    Duplicate(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        reason: reason.into(),
    }
}

/// Raw key/value pairs, validated against [`KNOWN_KEYS`].
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses config text. Unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut out = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: raw.to_string(),
                });
            };
            let key = key.trim();
            if out.values.contains_key(key) {
                return Err(ConfigError::Duplicate(key.to_string()));
            }
            out.set(key, value.trim())?;
        }
        Ok(out)
    }

    /// Sets or replaces one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Parses `key=value` as given on the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let Some((key, value)) = pair.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: 0,
                text: pair.to_string(),
            });
        };
        self.set(key.trim(), value.trim())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn raw(&self, key: &'static str) -> Result<&str, ConfigError> {
        self.get(key).ok_or(ConfigError::Missing(key))
    }

    fn typed<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| invalid(key, format!("{v:?}: {e}"))))
            .transpose()
    }

    fn required<T: FromStr>(&self, key: &'static str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.typed(key)?.ok_or(ConfigError::Missing(key))
    }

    fn or<T: FromStr>(&self, key: &'static str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.typed(key)?.unwrap_or(default))
    }

    /// The code described by `code.*`.
    pub fn code(&self) -> Result<CodeSpec, ConfigError> {
        let family = self.raw("code.family")?;
        let code_err = |key: &'static str| move |e: qread_core::codes::CodeError| invalid(key, e.to_string());
        match family {
            "rs" | "bch" => {
                let n: usize = self.or("code.n", 15)?;
                let b: usize = self.or("code.b", 1)?;
                if n < 1 || !(n + 1).is_power_of_two() || n + 1 > 1 << 16 {
                    return Err(invalid("code.n", format!("{n} is not 2^s - 1 for s in 1..=16")));
                }
                let field = FieldSpec::shared((n + 1).trailing_zeros()).map_err(|e| invalid("code.n", e.to_string()))?;
                if family == "rs" {
                    let k: usize = self.required("code.k")?;
                    rs_build(field, k, b).map_err(code_err("code.k"))
                } else {
                    let delta: usize = self.required("code.delta")?;
                    let code = bch_build(field, delta, b).map_err(code_err("code.delta"))?;
                    if let Some(k) = self.typed::<usize>("code.k")? {
                        if k != code.k() {
                            return Err(invalid(
                                "code.k",
                                format!("delta = {delta} gives k = {}, not {k}", code.k()),
                            ));
                        }
                    }
                    Ok(code)
                }
            }
            "rm" => {
                let r: usize = self.required("code.r")?;
                let m: usize = self.required("code.m")?;
                rm_build(r, m, FieldSpec::shared(1).expect("GF(2) exists")).map_err(code_err("code.r"))
            }
            other => Err(invalid("code.family", format!("expected rs, bch or rm, got {other:?}"))),
        }
    }

    pub fn cells(&self) -> Result<MemoryCellPair, ConfigError> {
        let k0: f64 = self.required("cells.kappa0")?;
        let k1: f64 = self.required("cells.kappa1")?;
        let p0: f64 = self.or("cells.p0", 0.5)?;
        for (key, v) in [("cells.kappa0", k0), ("cells.kappa1", k1)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(key, format!("{v} outside [0, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&p0) {
            return Err(invalid("cells.p0", format!("{p0} outside [0, 1]")));
        }
        MemoryCellPair::with_priors(k0, k1, p0).map_err(|e| invalid("cells.p0", e.to_string()))
    }

    pub fn dolinar(&self) -> Result<DolinarConfig, ConfigError> {
        let efficiency: f64 = self.or("receiver.efficiency", 0.9)?;
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(invalid("receiver.efficiency", format!("{efficiency} outside [0, 1]")));
        }
        let rounds: usize = self.or("receiver.rounds", 2)?;
        let guess = match self.get("receiver.guess") {
            None => GuessPolicy::MostLikelyPrior,
            Some(name) => GuessPolicy::from_name(name).ok_or_else(|| {
                invalid(
                    "receiver.guess",
                    format!("expected most-likely-prior, fixed-zero or random, got {name:?}"),
                )
            })?,
        };
        DolinarConfig::with_efficiency(rounds, efficiency, guess).map_err(|e| invalid("receiver.rounds", e.to_string()))
    }

    pub fn receiver(&self) -> Result<ReceiverConfig, ConfigError> {
        match self.raw("receiver.kind")? {
            "heterodyne" => Ok(ReceiverConfig::Heterodyne),
            "dolinar" => Ok(ReceiverConfig::Dolinar(self.dolinar()?)),
            other => Err(invalid("receiver.kind", format!("expected heterodyne or dolinar, got {other:?}"))),
        }
    }

    /// `grid.points` evenly spaced values from `grid.start` to `grid.stop`.
    pub fn grid(&self) -> Result<Vec<f64>, ConfigError> {
        let start: f64 = self.required("grid.start")?;
        let stop: f64 = self.required("grid.stop")?;
        let points: usize = self.required("grid.points")?;
        if !start.is_finite() || start < 0.0 {
            return Err(invalid("grid.start", format!("{start} must be finite and >= 0")));
        }
        if !stop.is_finite() {
            return Err(invalid("grid.stop", format!("{stop} must be finite")));
        }
        match points {
            0 => Err(invalid("grid.points", "need at least 1 point")),
            1 if stop != start => Err(invalid("grid.stop", "a 1-point grid needs grid.stop = grid.start")),
            1 => Ok(vec![start]),
            _ if stop <= start => Err(invalid("grid.stop", format!("{stop} must exceed grid.start = {start}"))),
            _ => {
                let step = (stop - start) / (points - 1) as f64;
                Ok((0..points)
                    .map(|i| if i + 1 == points { stop } else { start + i as f64 * step })
                    .collect())
            }
        }
    }

    /// The configured seed, unless [`SEED_ENV`] holds one.
    pub fn seed(&self, env_seed: Option<&str>) -> Result<u64, ConfigError> {
        match env_seed {
            Some(v) => v.trim().parse().map_err(|e| invalid("seed", format!("{SEED_ENV}={v:?}: {e}"))),
            None => self.or("seed", 0),
        }
    }

    /// `trials`, default 10 000.
    pub fn experiment_trials(&self) -> Result<u64, ConfigError> {
        let trials: u64 = self.or("trials", 10_000)?;
        if trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        Ok(trials)
    }

    pub fn experiment(&self, env_seed: Option<&str>) -> Result<ExperimentConfig, ConfigError> {
        let trials = self.experiment_trials()?;
        let metric: Metric = self.or("metric", Metric::default())?;
        let energy: EnergyMode = self.or("energy.mode", EnergyMode::default())?;
        let adaptive = match (self.typed::<u64>("adaptive.min_errors")?, self.typed::<u64>("adaptive.max_trials")?) {
            (None, None) => None,
            (Some(min_errors), max) => {
                let max_trials = max.unwrap_or(trials * 100);
                if min_errors == 0 {
                    return Err(invalid("adaptive.min_errors", "must be at least 1"));
                }
                if max_trials < trials {
                    return Err(invalid("adaptive.max_trials", format!("{max_trials} is below trials = {trials}")));
                }
                Some(AdaptiveStop { min_errors, max_trials })
            }
            (None, Some(_)) => return Err(ConfigError::Missing("adaptive.min_errors")),
        };
        let mut cfg = ExperimentConfig::new(
            self.code()?,
            self.receiver()?,
            self.cells()?,
            self.grid()?,
            trials,
            self.seed(env_seed)?,
        )
        .map_err(|e| invalid("grid.start", e.to_string()))?;
        cfg.metric = metric;
        cfg.energy = energy;
        cfg.adaptive = adaptive;
        Ok(cfg)
    }

    pub fn baseline(&self) -> Result<BaselineKind, ConfigError> {
        self.or("baseline", BaselineKind::default())
    }

    pub fn pc_exponent(&self) -> Result<PcExponent, ConfigError> {
        self.or("threshold.pc_exponent", PcExponent::default())
    }

    pub fn threshold_options(&self) -> Result<ThresholdOptions, ConfigError> {
        let max_bracket: f64 = self.or("threshold.max_bracket", 0.5)?;
        if max_bracket.is_nan() || max_bracket <= 0.0 {
            return Err(invalid("threshold.max_bracket", format!("{max_bracket} must be positive")));
        }
        Ok(ThresholdOptions {
            max_bracket,
            pc_exponent: self.pc_exponent()?,
        })
    }

    /// Canonical key/value text for a validated experiment, all defaults
    /// written out. `extra` adds threshold keys when relevant.
    pub fn manifest_body(cfg: &ExperimentConfig, grid: (f64, f64, usize), extra: &[(&str, String)]) -> String {
        let mut keys: Vec<(&str, String)> = Vec::new();
        match &cfg.code {
            CodeSpec::Rs(c) => {
                keys.push(("code.family", "rs".into()));
                keys.push(("code.n", c.n().to_string()));
                keys.push(("code.k", c.k().to_string()));
                keys.push(("code.b", c.b().to_string()));
            }
            CodeSpec::Bch(c) => {
                keys.push(("code.family", "bch".into()));
                keys.push(("code.n", c.n().to_string()));
                keys.push(("code.k", c.k().to_string()));
                keys.push(("code.delta", c.delta().to_string()));
                keys.push(("code.b", c.b().to_string()));
            }
            CodeSpec::Rm(c) => {
                keys.push(("code.family", "rm".into()));
                keys.push(("code.r", c.r().to_string()));
                keys.push(("code.m", c.m().to_string()));
            }
        }
        keys.push(("cells.kappa0", fmt_f64(cfg.cells.kappa0)));
        keys.push(("cells.kappa1", fmt_f64(cfg.cells.kappa1)));
        keys.push(("cells.p0", fmt_f64(cfg.cells.p0)));
        keys.push(("receiver.kind", cfg.receiver.name().into()));
        if let ReceiverConfig::Dolinar(d) = &cfg.receiver {
            keys.push(("receiver.efficiency", fmt_f64(d.efficiency())));
            keys.push(("receiver.rounds", d.rounds.to_string()));
            keys.push(("receiver.guess", d.initial_guess.name().into()));
        }
        keys.push(("grid.start", fmt_f64(grid.0)));
        keys.push(("grid.stop", fmt_f64(grid.1)));
        keys.push(("grid.points", grid.2.to_string()));
        keys.push(("trials", cfg.trials.to_string()));
        keys.push(("seed", cfg.seed.to_string()));
        keys.push(("metric", cfg.metric.name().into()));
        keys.push(("energy.mode", cfg.energy.name().into()));
        if let Some(a) = cfg.adaptive {
            keys.push(("adaptive.min_errors", a.min_errors.to_string()));
            keys.push(("adaptive.max_trials", a.max_trials.to_string()));
        }
        keys.extend(extra.iter().cloned());
        keys.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Shortest text that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
