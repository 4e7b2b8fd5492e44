//! Monte Carlo harness: encode, write to cells, probe, read, decode, score.
//!
//! Every trial draws from its own ChaCha8 substream keyed by the master seed,
//! selected by the grid-point index (stream id) and trial index (word
//! position). Results therefore do not depend on how trials are scheduled.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::baselines::{BaselineKind, PcExponent};
use crate::codes::{CodeError, CodeSpec, Decoded};
use crate::photonics::{
    dolinar_bit_error_analytic, heterodyne_bit_error_with_priors, heterodyne_sample, CoherentState, DolinarConfig,
    DolinarReader, HeterodyneDecider, MemoryCellPair,
};

/// z for a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("n_bar grid is empty")]
    EmptyGrid,
    #[error("n_bar grid value {0} is negative or not finite")]
    BadGridValue(f64),
    #[error("n_bar grid must be strictly ascending ({prev} then {next})")]
    GridOrder { prev: f64, next: f64 },
    #[error("adaptive stop needs min_errors >= 1 and max_trials >= trials")]
    Adaptive,
    #[error("threshold search needs at least 2 curve points, got {0}")]
    ShortCurve(usize),
    #[error("could not start worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Code(#[from] CodeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReceiverConfig {
    /// Heterodyne detection with the likelihood-ratio decision; priors come
    /// from the cell pair.
    Heterodyne,
    Dolinar(DolinarConfig),
}

impl ReceiverConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ReceiverConfig::Heterodyne => "heterodyne",
            ReceiverConfig::Dolinar(_) => "dolinar",
        }
    }

    /// Closed-form per-cell error for this receiver.
    pub fn cell_error_analytic(&self, cells: &MemoryCellPair, n_bar: f64) -> f64 {
        match self {
            ReceiverConfig::Heterodyne => heterodyne_bit_error_with_priors(cells, n_bar),
            ReceiverConfig::Dolinar(cfg) => dolinar_bit_error_analytic(cells, n_bar, cfg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Metric {
    /// Wrong information bits over all information bits sent.
    #[default]
    InfoBitErrorRate,
    /// Blocks with at least one wrong information bit over blocks sent.
    BlockErrorRate,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::InfoBitErrorRate => "info-bit-error-rate",
            Metric::BlockErrorRate => "block-error-rate",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "info-bit-error-rate" | "bit" => Ok(Metric::InfoBitErrorRate),
            "block-error-rate" | "block" => Ok(Metric::BlockErrorRate),
            other => Err(format!("expected info-bit-error-rate or block-error-rate, got {other:?}")),
        }
    }
}

/// What the n̄ axis measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EnergyMode {
    /// Mean photons per probe, one probe per cell.
    #[default]
    PerCell,
    /// Mean photons per information bit; each probe gets n̄·K/N.
    PerInfoBit,
}

impl EnergyMode {
    pub fn name(&self) -> &'static str {
        match self {
            EnergyMode::PerCell => "per-cell",
            EnergyMode::PerInfoBit => "per-info-bit",
        }
    }
}

impl FromStr for EnergyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-cell" => Ok(EnergyMode::PerCell),
            "per-info-bit" => Ok(EnergyMode::PerInfoBit),
            other => Err(format!("expected per-cell or per-info-bit, got {other:?}")),
        }
    }
}

/// Keep adding batches of `trials` until `min_errors` error events are seen
/// or `max_trials` is reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaptiveStop {
    pub min_errors: u64,
    pub max_trials: u64,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub code: CodeSpec,
    pub receiver: ReceiverConfig,
    pub cells: MemoryCellPair,
    pub n_bar_grid: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub metric: Metric,
    pub energy: EnergyMode,
    pub adaptive: Option<AdaptiveStop>,
}

impl ExperimentConfig {
    pub fn new(
        code: CodeSpec,
        receiver: ReceiverConfig,
        cells: MemoryCellPair,
        n_bar_grid: Vec<f64>,
        trials: u64,
        seed: u64,
    ) -> Result<Self, ExperimentError> {
        let cfg = Self {
            code,
            receiver,
            cells,
            n_bar_grid,
            trials,
            seed,
            metric: Metric::default(),
            energy: EnergyMode::default(),
            adaptive: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::NoTrials);
        }
        if self.n_bar_grid.is_empty() {
            return Err(ExperimentError::EmptyGrid);
        }
        if let Some(&bad) = self.n_bar_grid.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(ExperimentError::BadGridValue(bad));
        }
        if let Some(w) = self.n_bar_grid.windows(2).find(|w| w[1] <= w[0]) {
            return Err(ExperimentError::GridOrder { prev: w[0], next: w[1] });
        }
        if let Some(a) = self.adaptive {
            if a.min_errors == 0 || a.max_trials < self.trials {
                return Err(ExperimentError::Adaptive);
            }
        }
        Ok(())
    }

    /// R = K/N.
    pub fn rate(&self) -> f64 {
        self.code.rate()
    }

    /// Mean photons per probe at grid value `n_bar`.
    pub fn probe_photons(&self, n_bar: f64) -> f64 {
        match self.energy {
            EnergyMode::PerCell => n_bar,
            EnergyMode::PerInfoBit => n_bar * self.code.rate(),
        }
    }

    /// Error events a single trial can contribute to the metric.
    pub fn units_per_trial(&self) -> u64 {
        match self.metric {
            Metric::InfoBitErrorRate => self.code.info_bits() as u64,
            Metric::BlockErrorRate => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub info_bit_errors: u64,
    pub block_error: bool,
    pub decode_failure: bool,
}

/// Per-cell reader prepared for one probe energy.
#[derive(Debug, Clone, Copy)]
enum CellReader {
    Heterodyne {
        decider: HeterodyneDecider,
        outputs: [CoherentState; 2],
    },
    Dolinar(DolinarReader),
}

impl CellReader {
    fn new(receiver: &ReceiverConfig, cells: &MemoryCellPair, photons: f64) -> Self {
        let probe = CoherentState::from_mean_photons(photons);
        match receiver {
            ReceiverConfig::Heterodyne => {
                let decider = HeterodyneDecider::new(cells, &probe);
                let (mu0, mu1) = decider.means();
                CellReader::Heterodyne {
                    decider,
                    outputs: [CoherentState::new(mu0), CoherentState::new(mu1)],
                }
            }
            ReceiverConfig::Dolinar(cfg) => CellReader::Dolinar(DolinarReader::new(&probe, cells, *cfg)),
        }
    }

    fn read<R: Rng + ?Sized>(&self, bit: u8, rng: &mut R) -> u8 {
        match self {
            CellReader::Heterodyne { decider, outputs } => {
                let beta = heterodyne_sample(&outputs[bit as usize], rng).beta;
                decider.decide(beta).bit
            }
            CellReader::Dolinar(reader) => reader.read(bit, rng),
        }
    }
}

/// The random stream for one trial.
pub fn trial_rng(seed: u64, point_index: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(point_index);
    // 2^32 words (16 GiB) of room per trial
    rng.set_word_pos(u128::from(trial_index) << 32);
    rng
}

fn simulate(
    cfg: &ExperimentConfig,
    reader: &CellReader,
    point_index: u64,
    trial_index: u64,
) -> Result<TrialOutcome, CodeError> {
    let mut rng = trial_rng(cfg.seed, point_index, trial_index);
    let k = cfg.code.info_bits();
    let mut info = Vec::with_capacity(k);
    while info.len() < k {
        let word: u64 = rng.random();
        let take = (k - info.len()).min(64);
        info.extend((0..take).map(|j| ((word >> j) & 1) as u8));
    }
    let written = cfg.code.encode_bits(&info)?;
    let read: Vec<u8> = written.iter().map(|&bit| reader.read(bit, &mut rng)).collect();
    let decoded = cfg.code.decode_bits(&read)?;
    let decode_failure = decoded.is_failure();
    let estimate = match decoded {
        Decoded::Corrected { info, .. } | Decoded::Failure { fallback: info } => info,
    };
    let info_bit_errors = estimate.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
    Ok(TrialOutcome {
        info_bit_errors,
        block_error: info_bit_errors > 0,
        decode_failure,
    })
}

/// One full trial at grid value `n_bar`. A decoder failure is scored by
/// comparing its fallback estimate against the truth.
pub fn run_trial(
    cfg: &ExperimentConfig,
    point_index: usize,
    n_bar: f64,
    trial_index: u64,
) -> Result<TrialOutcome, ExperimentError> {
    let reader = CellReader::new(&cfg.receiver, &cfg.cells, cfg.probe_photons(n_bar));
    Ok(simulate(cfg, &reader, point_index as u64, trial_index)?)
}

/// 95% Wilson score interval for `errors` successes out of `trials`.
pub fn wilson_ci(errors: u64, trials: u64) -> (f64, f64) {
    assert!(trials >= 1 && errors <= trials, "need 0 <= errors <= trials, trials >= 1");
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if errors == trials { 1.0 } else { (centre + half).min(1.0) };
    (low.min(p), high.max(p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub n_bar: f64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Error events under the chosen metric.
    pub errors: u64,
    /// Blocks simulated.
    pub trials: u64,
}

impl CurvePoint {
    /// `units` is the number of error events one trial can contribute.
    pub fn from_counts(n_bar: f64, errors: u64, trials: u64, units: u64) -> Self {
        let total = trials * units;
        let (ci_low, ci_high) = wilson_ci(errors, total);
        Self {
            n_bar,
            p_hat: errors as f64 / total as f64,
            ci_low,
            ci_high,
            errors,
            trials,
        }
    }
}

/// Tallies behind one curve point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSummary {
    pub point: CurvePoint,
    pub info_bit_errors: u64,
    pub block_errors: u64,
    pub decode_failures: u64,
    pub probe_photons: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    bits: u64,
    blocks: u64,
    failures: u64,
    trials: u64,
}

impl Tally {
    fn add(self, other: Tally) -> Tally {
        Tally {
            bits: self.bits + other.bits,
            blocks: self.blocks + other.blocks,
            failures: self.failures + other.failures,
            trials: self.trials + other.trials,
        }
    }

    fn metric_errors(&self, metric: Metric) -> u64 {
        match metric {
            Metric::InfoBitErrorRate => self.bits,
            Metric::BlockErrorRate => self.blocks,
        }
    }
}

fn run_batch(
    cfg: &ExperimentConfig,
    reader: &CellReader,
    point_index: u64,
    range: std::ops::Range<u64>,
) -> Result<Tally, CodeError> {
    range
        .into_par_iter()
        .map(|t| {
            simulate(cfg, reader, point_index, t).map(|o| Tally {
                bits: o.info_bit_errors,
                blocks: u64::from(o.block_error),
                failures: u64::from(o.decode_failure),
                trials: 1,
            })
        })
        .try_reduce(Tally::default, |a, b| Ok(a.add(b)))
}

/// Runs every grid point on a pool of `workers` threads (0 = rayon default).
/// Integer tallies make the result independent of the worker count.
pub fn run_curve_detailed(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<PointSummary>, ExperimentError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let units = cfg.units_per_trial();
    pool.install(|| {
        cfg.n_bar_grid
            .iter()
            .enumerate()
            .map(|(idx, &n_bar)| {
                let photons = cfg.probe_photons(n_bar);
                let reader = CellReader::new(&cfg.receiver, &cfg.cells, photons);
                let mut tally = run_batch(cfg, &reader, idx as u64, 0..cfg.trials)?;
                if let Some(stop) = cfg.adaptive {
                    while tally.metric_errors(cfg.metric) < stop.min_errors && tally.trials < stop.max_trials {
                        let end = (tally.trials + cfg.trials).min(stop.max_trials);
                        tally = tally.add(run_batch(cfg, &reader, idx as u64, tally.trials..end)?);
                    }
                }
                Ok(PointSummary {
                    point: CurvePoint::from_counts(n_bar, tally.metric_errors(cfg.metric), tally.trials, units),
                    info_bit_errors: tally.bits,
                    block_errors: tally.blocks,
                    decode_failures: tally.failures,
                    probe_photons: photons,
                })
            })
            .collect()
    })
}

pub fn run_curve(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<CurvePoint>, ExperimentError> {
    Ok(run_curve_detailed(cfg, workers)?.into_iter().map(|s| s.point).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptions {
    /// Brackets wider than this are flagged as low resolution.
    pub max_bracket: f64,
    pub pc_exponent: PcExponent,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            max_bracket: 0.5,
            pc_exponent: PcExponent::Squared,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub baseline: BaselineKind,
    pub threshold_n_bar: Option<f64>,
    /// Grid points on either side of the crossing.
    pub bracket: Option<(f64, f64)>,
    /// The coded curve is already below the baseline at the first grid point.
    pub left_censored: bool,
    pub low_resolution: bool,
    pub method: String,
    /// Why no threshold was found.
    pub reason: Option<String>,
}

/// ln p̂ interpolated linearly in n̄ between two points. A zero endpoint has
/// no logarithm, so that segment falls back to interpolating p̂ itself.
fn interpolate_log(a: &CurvePoint, b: &CurvePoint, x: f64) -> f64 {
    let w = (x - a.n_bar) / (b.n_bar - a.n_bar);
    if a.p_hat > 0.0 && b.p_hat > 0.0 {
        (1.0 - w) * a.p_hat.ln() + w * b.p_hat.ln()
    } else {
        ((1.0 - w) * a.p_hat + w * b.p_hat).ln()
    }
}

/// Smallest n̄ at which the interpolated coded curve drops below the baseline.
pub fn threshold_find(
    curve: &[CurvePoint],
    cells: &MemoryCellPair,
    baseline: BaselineKind,
    opts: &ThresholdOptions,
) -> Result<ThresholdReport, ExperimentError> {
    if curve.len() < 2 {
        return Err(ExperimentError::ShortCurve(curve.len()));
    }
    let log_base = |x: f64| baseline.evaluate_with(cells, x, opts.pc_exponent).ln();
    let method = format!(
        "piecewise-linear ln(p_hat) in n_bar against closed-form {} baseline, bisection within the bracket",
        baseline.name()
    );
    let mut report = ThresholdReport {
        baseline,
        threshold_n_bar: None,
        bracket: None,
        left_censored: false,
        low_resolution: false,
        method,
        reason: None,
    };
    if curve.iter().any(|p| log_base(p.n_bar).is_nan()) {
        report.reason = Some("baseline undefined on this grid".into());
        return Ok(report);
    }
    let gap_at = |p: &CurvePoint| {
        let lp = if p.p_hat > 0.0 { p.p_hat.ln() } else { f64::NEG_INFINITY };
        lp - log_base(p.n_bar)
    };
    if gap_at(&curve[0]) < 0.0 {
        report.threshold_n_bar = Some(curve[0].n_bar);
        report.bracket = Some((curve[0].n_bar, curve[0].n_bar));
        report.left_censored = true;
        return Ok(report);
    }
    for pair in curve.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if gap_at(b) >= 0.0 {
            continue;
        }
        let gap = |x: f64| interpolate_log(a, b, x) - log_base(x);
        let (mut lo, mut hi) = (a.n_bar, b.n_bar);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        report.threshold_n_bar = Some(hi);
        report.bracket = Some((a.n_bar, b.n_bar));
        report.low_resolution = b.n_bar - a.n_bar > opts.max_bracket;
        return Ok(report);
    }
    report.reason = Some(format!(
        "coded curve stays at or above the {} baseline on [{}, {}]",
        baseline.name(),
        curve[0].n_bar,
        curve[curve.len() - 1].n_bar
    ));
    Ok(report)
}
