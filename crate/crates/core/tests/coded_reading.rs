use num_complex::Complex64;
use qread_core::baselines::{optimal_coherent_error, optimal_squeezed_error, squeezed_mu, BaselineKind};
use qread_core::codes::{bch_build, rm_build};
use qread_core::experiment::{run_curve, threshold_find, ExperimentConfig, Metric, ReceiverConfig, ThresholdOptions};
use qread_core::field::FieldSpec;
use qread_core::photonics::{
    click_probability, dolinar_bit_error_analytic, fock_amplitudes, heterodyne_bit_error_analytic, heterodyne_sample,
    wigner, CoherentState, DolinarConfig, GuessPolicy, MemoryCellPair,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cells() -> MemoryCellPair {
    MemoryCellPair::new(0.1, 0.95).unwrap()
}

/// Probe energy at which the uncoded heterodyne reader errs with probability `p`.
fn heterodyne_energy_for(p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 100.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if heterodyne_bit_error_analytic(&cells(), mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[test]
fn bch_15_5_beats_the_raw_channel() {
    let n_bar = heterodyne_energy_for(0.05);
    let code = bch_build(FieldSpec::shared(4).unwrap(), 7, 1).unwrap();
    let cfg = ExperimentConfig::new(code, ReceiverConfig::Heterodyne, cells(), vec![n_bar], 20_000, 11).unwrap();
    let p = &run_curve(&cfg, 0).unwrap()[0];
    assert!(p.ci_high < 0.05, "{p:?}");
}

#[test]
fn curves_fall_with_energy() {
    let code = bch_build(FieldSpec::shared(5).unwrap(), 7, 1).unwrap();
    let grid: Vec<f64> = (0..8).map(|i| 0.5 + i as f64).collect();
    for rx in [ReceiverConfig::Heterodyne, ReceiverConfig::Dolinar(DolinarConfig::default())] {
        for metric in [Metric::InfoBitErrorRate, Metric::BlockErrorRate] {
            let mut cfg = ExperimentConfig::new(code.clone(), rx, cells(), grid.clone(), 4000, 5).unwrap();
            cfg.metric = metric;
            let curve = run_curve(&cfg, 0).unwrap();
            for w in curve.windows(2) {
                assert!(w[1].ci_low <= w[0].ci_high, "{rx:?} {metric:?}: {w:?}");
            }
        }
    }
}

#[test]
fn lower_rate_reaches_baseline_no_later() {
    let field = FieldSpec::shared(5).unwrap();
    let grid: Vec<f64> = (0..=24).map(|i| 1.0 + 0.5 * i as f64).collect();
    let mut thresholds = Vec::new();
    for delta in [15, 7] {
        let code = bch_build(field.clone(), delta, 1).unwrap();
        let cfg = ExperimentConfig::new(code, ReceiverConfig::Heterodyne, cells(), grid.clone(), 4000, 2).unwrap();
        let curve = run_curve(&cfg, 0).unwrap();
        let report = threshold_find(&curve, &cells(), BaselineKind::MinOfBoth, &ThresholdOptions::default()).unwrap();
        thresholds.push((cfg.rate(), report.threshold_n_bar.unwrap_or(f64::INFINITY)));
    }
    assert!(thresholds[0].0 < thresholds[1].0);
    assert!(thresholds[0].1.is_finite(), "{thresholds:?}");
    assert!(thresholds[0].1 <= thresholds[1].1 + 0.5, "{thresholds:?}");
}

#[test]
fn repetition_code_block_error_matches_majority_vote() {
    let n_bar = heterodyne_energy_for(0.1);
    let code = rm_build(0, 3, FieldSpec::shared(1).unwrap()).unwrap();
    let mut cfg = ExperimentConfig::new(code, ReceiverConfig::Heterodyne, cells(), vec![n_bar], 50_000, 4).unwrap();
    cfg.metric = Metric::BlockErrorRate;
    let got = run_curve(&cfg, 0).unwrap()[0];
    // ties vote 0, so a tie is an error exactly when the stored bit was 1
    let p: f64 = 0.1;
    let binom = |j: i32| {
        let c = (0..j).fold(1.0, |a, i| a * (8 - i) as f64 / (i + 1) as f64);
        c * p.powi(j) * (1.0 - p).powi(8 - j)
    };
    let expected = (5..=8).map(binom).sum::<f64>() + 0.5 * binom(4);
    let sigma = (expected * (1.0 - expected) / 50_000.0).sqrt();
    assert!((got.p_hat - expected).abs() < 4.0 * sigma, "{} vs {expected}", got.p_hat);
}

#[test]
fn baseline_spot_values() {
    let c = cells();
    assert!((squeezed_mu(&c) - 0.69643).abs() < 1e-4);
    assert!((optimal_squeezed_error(&c, 1.0) - 0.24918).abs() < 1e-4);
    assert_eq!(optimal_coherent_error(&c, 0.0), 0.5);
    assert_eq!(optimal_squeezed_error(&c, 0.0), 0.5);
}

#[test]
fn dolinar_floor_is_positive() {
    let cfg = DolinarConfig::with_efficiency(2, 0.9, GuessPolicy::MostLikelyPrior).unwrap();
    let floor = (1..=100_000)
        .map(|i| dolinar_bit_error_analytic(&cells(), i as f64 * 1e-3, &cfg))
        .fold(f64::INFINITY, f64::min);
    assert!(floor > 0.0);
    assert!(floor > 0.0012, "{floor}");
}

#[test]
fn physics_sanity() {
    let state = CoherentState::from_mean_photons(3.0);
    let total: f64 = fock_amplitudes(&state, 60).iter().map(|a| a.norm_sqr()).sum();
    assert!((total - 1.0).abs() < 1e-12);

    let h = 0.02;
    let mut integral = 0.0;
    for i in -500..=500 {
        for j in -500..=500 {
            integral += wigner(&state, [i as f64 * h, j as f64 * h]);
        }
    }
    assert!((integral * h * h - 1.0).abs() < 1e-6);

    let mean = CoherentState::new(Complex64::new(1.5, -0.5));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 200_000;
    let samples: Vec<Complex64> = (0..n).map(|_| heterodyne_sample(&mean, &mut rng).beta).collect();
    let m = samples.iter().sum::<Complex64>() / n as f64;
    let var_re = samples.iter().map(|s| (s.re - m.re).powi(2)).sum::<f64>() / n as f64;
    let var_im = samples.iter().map(|s| (s.im - m.im).powi(2)).sum::<f64>() / n as f64;
    assert!((m - mean.amplitude).norm() < 0.01);
    assert!((var_re - 0.5).abs() < 0.01 && (var_im - 0.5).abs() < 0.01);

    assert_eq!(click_probability(Complex64::new(0.0, 0.0), 0.1), 0.0);
}
