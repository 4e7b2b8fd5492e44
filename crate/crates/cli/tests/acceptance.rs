//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! `cargo test -p qread-cli --test acceptance`

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qread_core::baselines::{optimal_coherent_error, optimal_squeezed_error, squeezed_mu, BaselineKind};
use qread_core::codes::{bch_build, rm_build, rs_build, CodeSpec, Decoded};
use qread_core::experiment::{run_curve, threshold_find, CurvePoint, ExperimentConfig, ReceiverConfig, ThresholdOptions};
use qread_core::field::FieldSpec;
use qread_core::photonics::{
    click_probability, dolinar_bit_error_analytic, fock_amplitudes, heterodyne_sample, wigner, CoherentState,
    DolinarConfig, GuessPolicy, MemoryCellPair,
};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn cells() -> MemoryCellPair {
    MemoryCellPair::new(0.1, 0.95).unwrap()
}

fn dolinar() -> ReceiverConfig {
    ReceiverConfig::Dolinar(DolinarConfig::with_efficiency(2, 0.9, GuessPolicy::MostLikelyPrior).unwrap())
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, started: Instant) -> Result<String, String> {
    let took = started.elapsed();
    if took <= limit {
        Ok(format!("{:.1}s", took.as_secs_f64()))
    } else {
        Err(format!("took {:.1}s, limit {}s", took.as_secs_f64(), limit.as_secs()))
    }
}

fn exhaustive(code: &CodeSpec, t: usize) -> (usize, usize) {
    let n = code.cell_bits();
    let mut patterns: Vec<Vec<usize>> = vec![vec![]];
    let mut frontier = patterns.clone();
    for _ in 0..t {
        frontier = frontier
            .iter()
            .flat_map(|p| {
                let start = p.last().map_or(0, |&l| l + 1);
                (start..n).map(move |i| [p.as_slice(), &[i]].concat())
            })
            .collect();
        patterns.extend(frontier.iter().cloned());
    }
    let (mut ok, mut total) = (0, 0);
    for m in 0..1u32 << code.info_bits() {
        let info: Vec<u8> = (0..code.info_bits()).map(|i| ((m >> i) & 1) as u8).collect();
        let clean = code.encode_bits(&info).unwrap();
        for p in &patterns {
            let mut w = clean.clone();
            p.iter().for_each(|&i| w[i] ^= 1);
            total += 1;
            if matches!(code.decode_bits(&w).unwrap(), Decoded::Corrected { info: ref got, .. } if *got == info) {
                ok += 1;
            }
        }
    }
    (ok, total)
}

fn codec_exhaustive() -> Outcome {
    let started = Instant::now();
    let bch = bch_build(FieldSpec::shared(4).unwrap(), 7, 1).unwrap();
    let rm = rm_build(1, 3, FieldSpec::shared(1).unwrap()).unwrap();
    let (b_ok, b_total) = exhaustive(&bch, 3);
    let (r_ok, r_total) = exhaustive(&rm, 1);
    let time = within(Duration::from_secs(10), started)?;
    check(
        b_ok == b_total && b_total == 32 * (1 + 15 + 105 + 455) && r_ok == r_total && r_total == 16 * 9,
        format!("BCH[15,5] {b_ok}/{b_total}, RM(1,3) {r_ok}/{r_total}, {time}"),
    )
}

fn codec_random_rs() -> Outcome {
    let started = Instant::now();
    let code = rs_build(FieldSpec::shared(8).unwrap(), 25, 1).unwrap();
    let t = code.correction_capability();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ok = 0;
    for _ in 0..1000 {
        let info: Vec<u8> = (0..code.info_bits()).map(|_| rng.random_range(0..2)).collect();
        let mut w = code.encode_bits(&info).unwrap();
        for pos in sample(&mut rng, code.n(), t) {
            let e: u32 = rng.random_range(1..256);
            (0..8).for_each(|v| w[pos * 8 + v] ^= ((e >> v) & 1) as u8);
        }
        if matches!(code.decode_bits(&w).unwrap(), Decoded::Corrected { info: ref got, .. } if *got == info) {
            ok += 1;
        }
    }
    let time = within(Duration::from_secs(60), started)?;
    check(t == 115 && ok == 1000, format!("t = {t}, {ok}/1000 weight-{t} patterns corrected, {time}"))
}

fn receiver_oracles() -> Outcome {
    let started = Instant::now();
    let identity = bch_build(FieldSpec::shared(1).unwrap(), 1, 1).unwrap();
    let trials = 100_000;
    let mut worst: f64 = 0.0;
    for rx in [ReceiverConfig::Heterodyne, dolinar()] {
        let cfg = ExperimentConfig::new(identity.clone(), rx, cells(), vec![1.0, 2.0, 4.0], trials, 3).unwrap();
        for p in run_curve(&cfg, 0).unwrap() {
            let exact = rx.cell_error_analytic(&cells(), p.n_bar);
            let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
            worst = worst.max((p.p_hat - exact).abs() / sigma);
        }
    }
    let time = within(Duration::from_secs(30), started)?;
    check(worst < 4.0, format!("largest deviation {worst:.2} sigma over 6 points, {time}"))
}

fn baseline_spots() -> Outcome {
    let c = cells();
    let mu = squeezed_mu(&c);
    let ps1 = optimal_squeezed_error(&c, 1.0);
    let (pc0, ps0) = (optimal_coherent_error(&c, 0.0), optimal_squeezed_error(&c, 0.0));
    check(
        (mu - 0.69643).abs() <= 1e-4 && (ps1 - 0.24918).abs() <= 1e-4 && pc0 == 0.5 && ps0 == 0.5,
        format!("mu = {mu:.6}, P_s(1) = {ps1:.6}, P_c(0) = {pc0}, P_s(0) = {ps0}"),
    )
}

fn threshold_of(code: CodeSpec, rx: ReceiverConfig, grid: &[f64], trials: u64, seed: u64) -> (Option<f64>, Vec<CurvePoint>) {
    let cfg = ExperimentConfig::new(code, rx, cells(), grid.to_vec(), trials, seed).unwrap();
    let curve = run_curve(&cfg, 0).unwrap();
    let report = threshold_find(&curve, &cells(), BaselineKind::MinOfBoth, &ThresholdOptions::default()).unwrap();
    (report.threshold_n_bar, curve)
}

fn show(t: Option<f64>) -> String {
    t.map_or_else(|| "none".into(), |v| format!("{v:.3}"))
}

fn step_grid(start: f64, stop: f64) -> Vec<f64> {
    let points = ((stop - start) / 0.25).round() as usize + 1;
    (0..points).map(|i| start + 0.25 * i as f64).collect()
}

fn reference_thresholds() -> Outcome {
    let started = Instant::now();
    let rs = rs_build(FieldSpec::shared(8).unwrap(), 25, 1).unwrap();
    let (rs_t, rs_curve) = threshold_of(rs, dolinar(), &step_grid(1.0, 5.0), 100_000, 5);
    let lowest = rs_curve.iter().map(|p| p.p_hat).fold(f64::INFINITY, f64::min);

    let bch = bch_build(FieldSpec::shared(7).unwrap(), 63, 1).unwrap();
    let grid = step_grid(1.0, 6.0);
    let (het, _) = threshold_of(bch.clone(), ReceiverConfig::Heterodyne, &grid, 100_000, 5);
    let (dol, _) = threshold_of(bch.clone(), dolinar(), &grid, 100_000, 5);
    let time = within(Duration::from_secs(600), started)?;

    let rs_ok = rs_t.is_some_and(|t| (2.0..=5.0).contains(&t));
    let order_ok = dol.unwrap_or(f64::INFINITY) < het.unwrap_or(f64::INFINITY);
    check(
        rs_ok && order_ok,
        format!(
            "RS[255,25]+Dolinar threshold {} on [1,5] (lowest p_hat {lowest:.3}, need [2,5]); {} R={:.3}: Dolinar {} vs heterodyne {}; {time}",
            show(rs_t),
            bch.label(),
            bch.rate(),
            show(dol),
            show(het)
        ),
    )
}

fn rate_monotone() -> Outcome {
    let field = FieldSpec::shared(7).unwrap();
    let grid = step_grid(1.0, 6.0);
    let low = bch_build(field.clone(), 63, 1).unwrap();
    let high = bch_build(field, 55, 1).unwrap();
    let (t_low, _) = threshold_of(low.clone(), ReceiverConfig::Heterodyne, &grid, 100_000, 6);
    let (t_high, _) = threshold_of(high.clone(), ReceiverConfig::Heterodyne, &grid, 100_000, 6);
    let a = t_low.unwrap_or(f64::INFINITY);
    let b = t_high.unwrap_or(f64::INFINITY);
    check(
        low.rate() < high.rate() && t_low.is_some() && a <= b + 0.25,
        format!(
            "heterodyne: R={:.3} -> {}, R={:.3} -> {}",
            low.rate(),
            show(t_low),
            high.rate(),
            show(t_high)
        ),
    )
}

fn dolinar_floor() -> Outcome {
    let cfg = DolinarConfig::with_efficiency(2, 0.9, GuessPolicy::MostLikelyPrior).unwrap();
    let f = |n: f64| dolinar_bit_error_analytic(&cells(), n, &cfg);
    let (mut best_n, mut best) = (0.0, f64::INFINITY);
    for i in 1..=100_000 {
        let n = i as f64 * 1e-3;
        let v = f(n);
        if v < best {
            (best_n, best) = (n, v);
        }
    }
    let ratio = best / 0.0012;
    check(
        best > 0.0,
        format!("minimum {best:.6} at n_bar = {best_n:.3}, {ratio:.1} times the 0.12% quoted floor"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let qread = |args: &[&str]| {
        let o = Command::new(env!("CARGO_BIN_EXE_qread")).args(args).env_remove("QREAD_SEED").output().unwrap();
        if !o.status.success() {
            panic!("qread failed: {}", String::from_utf8_lossy(&o.stderr));
        }
    };
    let (seed_csv, manifest) = (path("seed.csv"), path("run.manifest"));
    qread(&[
        "curve", "--family", "bch", "--n", "127", "--delta", "55", "--receiver", "dolinar", "--kappa0", "0.1",
        "--kappa1", "0.95", "--grid", "1:5:9", "--trials", "20000", "--seed", "8", "--out", &seed_csv, "--manifest",
        &manifest,
    ]);
    let mut outputs = Vec::new();
    for workers in ["1", "8"] {
        let out = path(&format!("w{workers}.csv"));
        qread(&["curve", "--config", &manifest, "--workers", workers, "--out", &out]);
        outputs.push(std::fs::read(&out).unwrap());
    }
    check(
        outputs[0] == outputs[1],
        format!("1 vs 8 workers from one manifest: {} bytes each, identical = {}", outputs[0].len(), outputs[0] == outputs[1]),
    )
}

fn physics() -> Outcome {
    let state = CoherentState::from_mean_photons(2.5);
    let fock: f64 = fock_amplitudes(&state, 60).iter().map(|a| a.norm_sqr()).sum();
    let h = 0.02;
    let mut integral = 0.0;
    for i in -500..=500 {
        for j in -500..=500 {
            integral += wigner(&state, [i as f64 * h, j as f64 * h]);
        }
    }
    integral *= h * h;
    let mean = CoherentState::new(Complex64::new(-0.7, 1.1));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 400_000;
    let draws: Vec<Complex64> = (0..n).map(|_| heterodyne_sample(&mean, &mut rng).beta).collect();
    let m = draws.iter().sum::<Complex64>() / n as f64;
    let var = |f: fn(&Complex64) -> f64, c: f64| draws.iter().map(|d| (f(d) - c).powi(2)).sum::<f64>() / n as f64;
    let (vr, vi) = (var(|d| d.re, m.re), var(|d| d.im, m.im));
    let click0 = click_probability(Complex64::new(0.0, 0.0), 0.1);
    check(
        (fock - 1.0).abs() < 1e-12
            && (integral - 1.0).abs() <= 1e-6
            && (m - mean.amplitude).norm() < 0.01
            && (vr - 0.5).abs() < 0.01
            && (vi - 0.5).abs() < 0.01
            && click0 == 0.0,
        format!(
            "Fock sum {fock:.15}, Wigner integral {integral:.9}, sample mean error {:.4}, variances {vr:.4}/{vi:.4}, click(0) = {click0}",
            (m - mean.amplitude).norm()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("codec capability, exhaustive", codec_exhaustive),
        ("codec capability, randomized RS[255,25]", codec_random_rs),
        ("receiver-oracle equivalence", receiver_oracles),
        ("baseline spot values", baseline_spots),
        ("reference threshold reproduction", reference_thresholds),
        ("rate-monotone thresholds", rate_monotone),
        ("uncoded Dolinar floor", dolinar_floor),
        ("determinism across worker counts", determinism),
        ("physics sanity", physics),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1)
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
