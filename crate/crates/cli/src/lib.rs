//! `qread`: command-line front end for the simulator.

pub mod config;
pub mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use qread_core::baselines::{optimal_coherent_error_with, optimal_squeezed_error};
use qread_core::codes::{bch_build, CodeSpec, Decoded};
use qread_core::experiment::{run_curve, run_curve_detailed, threshold_find, trial_rng, ExperimentConfig, ExperimentError, ReceiverConfig};
use qread_core::field::FieldSpec;
use rand::Rng;
use thiserror::Error;

use config::{fmt_f64, ConfigError, Settings, SEED_ENV};
use output::{fmt_sig17, manifest_text, write_curve_csv, write_threshold_json, ThresholdJson};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Check(String),
}

impl CliError {
    /// 1 for anything wrong with the request, 2 for file system trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &str) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_string(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "qread", version, about = "Coded quantum reading of binary optical memories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal uncoded error probabilities P_c and P_s over a grid.
    Baseline(RunArgs),
    /// Uncoded per-cell error of both receivers, closed form and Monte Carlo.
    CellError(RunArgs),
    /// Encode, corrupt and decode round trips checking the correction capability.
    CodecTest(RunArgs),
    /// Monte Carlo error curve for a code and receiver.
    Curve(RunArgs),
    /// Error curve plus the crossing point against an uncoded baseline.
    Threshold(RunArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// key = value configuration file (a stored manifest works too).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Extra configuration entries, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub kappa0: Option<String>,
    #[arg(long)]
    pub kappa1: Option<String>,
    #[arg(long)]
    pub p0: Option<String>,
    /// heterodyne or dolinar.
    #[arg(long)]
    pub receiver: Option<String>,
    /// Photodetector efficiency for the Dolinar receiver.
    #[arg(long)]
    pub efficiency: Option<String>,
    #[arg(long)]
    pub rounds: Option<String>,
    /// most-likely-prior, fixed-zero or random.
    #[arg(long)]
    pub guess: Option<String>,
    /// START:STOP:POINTS.
    #[arg(long, value_name = "START:STOP:POINTS")]
    pub grid: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// info-bit-error-rate or block-error-rate.
    #[arg(long)]
    pub metric: Option<String>,
    /// optimal-coherent, optimal-squeezed or min-of-both.
    #[arg(long)]
    pub baseline: Option<String>,
    /// Read the grid as photons per information bit.
    #[arg(long)]
    pub energy_per_info_bit: bool,
    /// squared or paper.
    #[arg(long)]
    pub pc_exponent: Option<String>,
    /// Output file; standard output when absent or `-`.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Where to store the run manifest (defaults to OUT.manifest).
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    /// Also write the curve CSV (threshold only).
    #[arg(long, value_name = "FILE")]
    pub curve_out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

impl RunArgs {
    /// File keys, then `--set`, then dedicated flags; `QREAD_SEED` beats the
    /// file but not `--seed`.
    pub fn settings(&self) -> Result<(Settings, Option<String>), CliError> {
        let mut s = match &self.config {
            Some(path) => {
                let p = path.display().to_string();
                let text = std::fs::read_to_string(path).map_err(io_err(&p))?;
                Settings::parse(&text)?
            }
            None => Settings::new(),
        };
        for pair in &self.set {
            s.set_pair(pair)?;
        }
        let flags = [
            ("code.family", &self.family),
            ("code.n", &self.n),
            ("code.k", &self.k),
            ("code.delta", &self.delta),
            ("code.b", &self.b),
            ("code.r", &self.r),
            ("code.m", &self.m),
            ("cells.kappa0", &self.kappa0),
            ("cells.kappa1", &self.kappa1),
            ("cells.p0", &self.p0),
            ("receiver.kind", &self.receiver),
            ("receiver.efficiency", &self.efficiency),
            ("receiver.rounds", &self.rounds),
            ("receiver.guess", &self.guess),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("metric", &self.metric),
            ("baseline", &self.baseline),
            ("threshold.pc_exponent", &self.pc_exponent),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
        if let Some(grid) = &self.grid {
            let parts: Vec<&str> = grid.split(':').collect();
            let [start, stop, points] = parts[..] else {
                return Err(ConfigError::Invalid {
                    key: "grid.start",
                    reason: format!("--grid expects START:STOP:POINTS, got {grid:?}"),
                }
                .into());
            };
            s.set("grid.start", start)?;
            s.set("grid.stop", stop)?;
            s.set("grid.points", points)?;
        }
        if self.energy_per_info_bit {
            s.set("energy.mode", "per-info-bit")?;
        }
        let env_seed = if self.seed.is_some() {
            None
        } else {
            std::env::var(SEED_ENV).ok()
        };
        Ok((s, env_seed))
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) if p != Path::new("-") => {
            let name = p.display().to_string();
            let f = File::create(p).map_err(io_err(&name))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn out_name(path: Option<&Path>) -> String {
    path.map_or_else(|| "<stdout>".to_string(), |p| p.display().to_string())
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn grid_triple(s: &Settings) -> Result<(f64, f64, usize), CliError> {
    let g = s.grid()?;
    Ok((g[0], g[g.len() - 1], g.len()))
}

/// Writes the manifest next to the output unless told otherwise.
fn store_manifest(args: &RunArgs, text: &str) -> Result<(), CliError> {
    let path = match (&args.manifest, &args.out) {
        (Some(p), _) => p.clone(),
        (None, Some(out)) if out != Path::new("-") => {
            let mut p = out.clone().into_os_string();
            p.push(".manifest");
            PathBuf::from(p)
        }
        _ => return Ok(()),
    };
    let name = path.display().to_string();
    std::fs::write(&path, text).map_err(io_err(&name))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Baseline(a) => cmd_baseline(a),
        Command::CellError(a) => cmd_cell_error(a),
        Command::CodecTest(a) => cmd_codec_test(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Threshold(a) => cmd_threshold(a),
    }
}

fn cmd_baseline(args: &RunArgs) -> Result<(), CliError> {
    let (s, _) = args.settings()?;
    let cells = s.cells()?;
    let grid = s.grid()?;
    let exponent = s.pc_exponent()?;
    let name = out_name(args.out.as_deref());
    let mut out = open_out(args.out.as_deref())?;
    let write = |out: &mut Box<dyn Write>| -> io::Result<()> {
        writeln!(out, "n_bar,p_c,p_s")?;
        for &x in &grid {
            let pc = optimal_coherent_error_with(&cells, x, exponent);
            let ps = optimal_squeezed_error(&cells, x);
            writeln!(out, "{},{},{}", fmt_sig17(x), fmt_sig17(pc), fmt_sig17(ps))?;
        }
        out.flush()
    };
    write(&mut out).map_err(io_err(&name))
}

fn cmd_cell_error(args: &RunArgs) -> Result<(), CliError> {
    let (s, env_seed) = args.settings()?;
    let cells = s.cells()?;
    let grid = s.grid()?;
    let dolinar = ReceiverConfig::Dolinar(s.dolinar()?);
    let trials = s.experiment_trials()?;
    let seed = s.seed(env_seed.as_deref())?;
    // one cell per block
    let identity = bch_build(FieldSpec::shared(1).expect("GF(2) exists"), 1, 1).expect("length-1 identity code");
    let mut columns = Vec::new();
    for rx in [ReceiverConfig::Heterodyne, dolinar] {
        let cfg = ExperimentConfig::new(identity.clone(), rx, cells, grid.clone(), trials, seed)?;
        columns.push(run_curve(&cfg, args.workers)?);
    }
    let name = out_name(args.out.as_deref());
    let mut out = open_out(args.out.as_deref())?;
    let write = |out: &mut Box<dyn Write>| -> io::Result<()> {
        writeln!(out, "n_bar,heterodyne_analytic,heterodyne_mc,dolinar_analytic,dolinar_mc")?;
        for (i, &x) in grid.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_sig17(x),
                fmt_sig17(ReceiverConfig::Heterodyne.cell_error_analytic(&cells, x)),
                fmt_sig17(columns[0][i].p_hat),
                fmt_sig17(dolinar.cell_error_analytic(&cells, x)),
                fmt_sig17(columns[1][i].p_hat),
            )?;
        }
        out.flush()
    };
    write(&mut out).map_err(io_err(&name))
}

/// Calls `visit` on every `weight`-subset of `0..n`, in lexicographic order.
fn for_each_subset(n: usize, weight: usize, mut visit: impl FnMut(&[usize])) {
    if weight > n {
        return;
    }
    let mut idx: Vec<usize> = (0..weight).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..weight).rev().find(|&i| idx[i] != i + n - weight) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..weight {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k as u128).fold(1, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// Flips the chosen positions of a cell-bit word, one symbol at a time for
/// codes over larger fields.
fn corrupt(code: &CodeSpec, word: &mut [u8], positions: &[usize], rng: &mut impl Rng) {
    let s = code.symbol_bits();
    for &p in positions {
        let pattern: u32 = if s == 1 { 1 } else { rng.random_range(1..1u32 << s) };
        for v in 0..s {
            word[p * s + v] ^= ((pattern >> v) & 1) as u8;
        }
    }
}

fn cmd_codec_test(args: &RunArgs) -> Result<(), CliError> {
    let (s, env_seed) = args.settings()?;
    let code = s.code()?;
    let trials = s.experiment_trials()?;
    let seed = s.seed(env_seed.as_deref())?;
    let t = code.correction_capability();
    let n = code.n();
    let mut rng = trial_rng(seed, 0, 0);
    let mut lines = vec![format!(
        "{}: N = {} cells, K = {} info bits, corrects {t} {}",
        code.label(),
        code.cell_bits(),
        code.info_bits(),
        if code.symbol_bits() == 1 { "bit errors" } else { "symbol errors" }
    )];
    let mut all_ok = true;
    let round_trip = |word: &[u8], info: &[u8]| -> Result<bool, CliError> {
        let d = code.decode_bits(word).map_err(|e| CliError::Check(e.to_string()))?;
        Ok(matches!(d, Decoded::Corrected { info: ref got, .. } if got == info))
    };
    let info: Vec<u8> = (0..code.info_bits()).map(|_| rng.random_range(0..2)).collect();
    let clean = code.encode_bits(&info).map_err(|e| CliError::Check(e.to_string()))?;

    if code.symbol_bits() == 1 && binomial(n, t) <= 2_000_000 {
        let (mut ok, mut total) = (0u64, 0u64);
        let mut failure = None;
        for_each_subset(n, t, |pos| {
            let mut w = clean.clone();
            corrupt(&code, &mut w, pos, &mut rng);
            total += 1;
            match round_trip(&w, &info) {
                Ok(true) => ok += 1,
                Ok(false) => {}
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        all_ok &= ok == total;
        lines.push(format!("{ok}/{total} weight-{t} patterns corrected"));
    }

    let mut ok = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, 1, trial);
        let info: Vec<u8> = (0..code.info_bits()).map(|_| rng.random_range(0..2)).collect();
        let mut w = code.encode_bits(&info).map_err(|e| CliError::Check(e.to_string()))?;
        let weight = rng.random_range(0..=t);
        let positions = rand::seq::index::sample(&mut rng, n, weight).into_vec();
        corrupt(&code, &mut w, &positions, &mut rng);
        ok += u64::from(round_trip(&w, &info)?);
    }
    all_ok &= ok == trials;
    lines.push(format!("{ok}/{trials} random round trips with up to {t} errors corrected"));

    let name = out_name(args.out.as_deref());
    let mut out = open_out(args.out.as_deref())?;
    let text: String = lines.iter().map(|l| format!("{l}\n")).collect();
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(io_err(&name))?;
    if !all_ok {
        return Err(CliError::Check("correction capability check failed".into()));
    }
    Ok(())
}

fn prepare(args: &RunArgs, extra: &[(&str, String)]) -> Result<(ExperimentConfig, String), CliError> {
    let (s, env_seed) = args.settings()?;
    let cfg = s.experiment(env_seed.as_deref())?;
    let body = Settings::manifest_body(&cfg, grid_triple(&s)?, extra);
    Ok((cfg, manifest_text(&body, unix_now())))
}

fn cmd_curve(args: &RunArgs) -> Result<(), CliError> {
    let (cfg, manifest) = prepare(args, &[])?;
    let points = run_curve(&cfg, args.workers)?;
    let name = out_name(args.out.as_deref());
    let out = open_out(args.out.as_deref())?;
    write_curve_csv(out, &points).map_err(|e| CliError::Io {
        path: name,
        source: e.into(),
    })?;
    store_manifest(args, &manifest)
}

fn cmd_threshold(args: &RunArgs) -> Result<(), CliError> {
    let (s, _) = args.settings()?;
    let baseline = s.baseline()?;
    let opts = s.threshold_options()?;
    let extra = [
        ("baseline", baseline.name().to_string()),
        ("threshold.pc_exponent", opts.pc_exponent.name().to_string()),
        ("threshold.max_bracket", fmt_f64(opts.max_bracket)),
    ];
    let (cfg, manifest) = prepare(args, &extra)?;
    let summary = run_curve_detailed(&cfg, args.workers)?;
    let points: Vec<_> = summary.iter().map(|p| p.point).collect();
    let report = threshold_find(&points, &cfg.cells, baseline, &opts)?;
    if let Some(path) = &args.curve_out {
        let name = path.display().to_string();
        let f = File::create(path).map_err(io_err(&name))?;
        write_curve_csv(BufWriter::new(f), &points).map_err(|e| CliError::Io {
            path: name,
            source: e.into(),
        })?;
    }
    let json = ThresholdJson::new(
        &report,
        cfg.metric.name(),
        cfg.receiver.name(),
        cfg.code.label(),
        cfg.rate(),
        &manifest,
    );
    let name = out_name(args.out.as_deref());
    write_threshold_json(open_out(args.out.as_deref())?, &json).map_err(io_err(&name))?;
    store_manifest(args, &manifest)
}
