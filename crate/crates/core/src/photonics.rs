//! Coherent-state probes, pure-loss memory cells, and the two receivers.
//!
//! Amplitudes are dimensionless: a coherent state |α⟩ has mean photon number
//! |α|². A pure-loss channel of transmissivity κ maps |α⟩ to |√κ α⟩, so a cell
//! storing bit x returns |√κ_x α⟩.
//!
//! The heterodyne receiver samples β from (1/π) exp(−|β − μ|²) and applies the
//! likelihood-ratio test Λ(β) ≥ p₀/p₁. The Dolinar receiver splits the probe
//! into `rounds` equal slices, nulls its current hypothesis on each slice, and
//! flips the hypothesis whenever the photodetector clicks. The detector is the
//! operator Q₁ = Σ_{n≥1} (1−η)ⁿ |n⟩⟨n|, whose click probability on |δ⟩ is
//! e^(−η|δ|²) − e^(−|δ|²). There are no dark counts.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhotonicsError {
    #[error("transmissivity {name} = {value} outside [0, 1]")]
    Transmissivity { name: &'static str, value: f64 },
    #[error("priors must be in [0, 1] and sum to 1, got ({p0}, {p1})")]
    Priors { p0: f64, p1: f64 },
    #[error("detector parameter eta = {0} outside [0, 1]")]
    Eta(f64),
    #[error("Dolinar receiver needs 1..=32 rounds, got {0}")]
    Rounds(usize),
}

/// A single-mode coherent state |α⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentState {
    pub amplitude: Complex64,
}

impl CoherentState {
    pub fn new(amplitude: Complex64) -> Self {
        Self { amplitude }
    }

    pub fn vacuum() -> Self {
        Self::new(Complex64::new(0.0, 0.0))
    }

    /// Real positive amplitude √n̄.
    pub fn from_mean_photons(n_bar: f64) -> Self {
        Self::new(Complex64::new(n_bar.max(0.0).sqrt(), 0.0))
    }

    /// n̄ = |α|².
    pub fn mean_photons(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

/// The binary ensemble of pure-loss channels {κ₀, κ₁} with priors {p₀, p₁}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryCellPair {
    pub kappa0: f64,
    pub kappa1: f64,
    pub p0: f64,
    pub p1: f64,
}

impl MemoryCellPair {
    /// Equal priors.
    pub fn new(kappa0: f64, kappa1: f64) -> Result<Self, PhotonicsError> {
        Self::with_priors(kappa0, kappa1, 0.5)
    }

    pub fn with_priors(kappa0: f64, kappa1: f64, p0: f64) -> Result<Self, PhotonicsError> {
        check_kappa("kappa0", kappa0)?;
        check_kappa("kappa1", kappa1)?;
        if !(0.0..=1.0).contains(&p0) {
            return Err(PhotonicsError::Priors { p0, p1: 1.0 - p0 });
        }
        Ok(Self {
            kappa0,
            kappa1,
            p0,
            p1: 1.0 - p0,
        })
    }

    pub fn kappa(&self, bit: u8) -> f64 {
        if bit == 0 {
            self.kappa0
        } else {
            self.kappa1
        }
    }

    pub fn prior(&self, bit: u8) -> f64 {
        if bit == 0 {
            self.p0
        } else {
            self.p1
        }
    }

    /// Swapped roles of the two channels (and their priors).
    pub fn swapped(&self) -> Self {
        Self {
            kappa0: self.kappa1,
            kappa1: self.kappa0,
            p0: self.p1,
            p1: self.p0,
        }
    }

    /// (√κ₁ − √κ₀)², the squared amplitude separation per unit photon.
    pub fn separation_sq(&self) -> f64 {
        let d = self.kappa1.sqrt() - self.kappa0.sqrt();
        d * d
    }

    /// The bit with the larger prior; ties go to 0.
    pub fn likelier_bit(&self) -> u8 {
        u8::from(self.p1 > self.p0)
    }
}

fn check_kappa(name: &'static str, value: f64) -> Result<(), PhotonicsError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(PhotonicsError::Transmissivity { name, value });
    }
    Ok(())
}

/// Fock-basis coefficients c_n = e^(−|α|²/2) αⁿ / √(n!), n = 0..=n_max.
pub fn fock_amplitudes(state: &CoherentState, n_max: usize) -> Vec<Complex64> {
    let alpha = state.amplitude;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-state.mean_photons() / 2.0).exp(), 0.0);
    out.push(c);
    for n in 1..=n_max {
        c = c * alpha / (n as f64).sqrt();
        out.push(c);
    }
    out
}

/// W_α(r) = (1/π) exp(−|r − r̄|²), r̄ = √2 (Re α, Im α).
///
/// With quadratures scaled so that r̄ = √2 α each has vacuum variance ½, which
/// fixes the prefactor at 1/π for unit total weight.
pub fn wigner(state: &CoherentState, r: [f64; 2]) -> f64 {
    let dx = r[0] - SQRT_2 * state.amplitude.re;
    let dy = r[1] - SQRT_2 * state.amplitude.im;
    (-(dx * dx + dy * dy)).exp() / PI
}

/// Output of a pure-loss channel: amplitude scaled by √κ.
pub fn lossy_output(state: &CoherentState, kappa: f64) -> Result<CoherentState, PhotonicsError> {
    check_kappa("kappa", kappa)?;
    Ok(CoherentState::new(state.amplitude * kappa.sqrt()))
}

/// A heterodyne outcome β ∈ ℂ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeterodyneSample {
    pub beta: Complex64,
}

/// Draws β with density (1/π) exp(−|β − μ|²), μ the (already attenuated)
/// state amplitude: each quadrature is normal with variance 1/2.
pub fn heterodyne_sample<R: Rng + ?Sized>(mean: &CoherentState, rng: &mut R) -> HeterodyneSample {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    HeterodyneSample {
        beta: mean.amplitude + Complex64::new(re, im) * FRAC_1_SQRT_2,
    }
}

/// A hard decision plus whether the two hypotheses were indistinguishable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub bit: u8,
    pub degenerate: bool,
}

/// Likelihood-ratio test for one probe, with the means precomputed.
#[derive(Debug, Clone, Copy)]
pub struct HeterodyneDecider {
    mu0: Complex64,
    mu1: Complex64,
    // ln p(β|1) − ln p(β|0) = 2 Re(β̄ (μ₁ − μ₀)) − |μ₁|² + |μ₀|²
    offset: f64,
    log_threshold: f64,
    degenerate: bool,
}

impl HeterodyneDecider {
    pub fn new(cells: &MemoryCellPair, probe: &CoherentState) -> Self {
        let mu0 = probe.amplitude * cells.kappa0.sqrt();
        let mu1 = probe.amplitude * cells.kappa1.sqrt();
        Self {
            mu0,
            mu1,
            offset: mu0.norm_sqr() - mu1.norm_sqr(),
            log_threshold: (cells.p0 / cells.p1).ln(),
            degenerate: mu0 == mu1,
        }
    }

    /// Means (√κ₀ α, √κ₁ α) of the two outcome distributions.
    pub fn means(&self) -> (Complex64, Complex64) {
        (self.mu0, self.mu1)
    }

    /// ln Λ(β).
    pub fn log_likelihood_ratio(&self, beta: Complex64) -> f64 {
        let diff = self.mu1 - self.mu0;
        2.0 * (beta.re * diff.re + beta.im * diff.im) + self.offset
    }

    /// 1 iff Λ(β) ≥ p₀/p₁. With coinciding means Λ ≡ 1, which picks the
    /// likelier bit (1 on equal priors, by the same ≥).
    pub fn decide(&self, beta: Complex64) -> Decision {
        Decision {
            bit: u8::from(self.log_likelihood_ratio(beta) >= self.log_threshold),
            degenerate: self.degenerate,
        }
    }
}

/// Maximum-likelihood decision for a heterodyne outcome.
pub fn mle_decide(beta: &HeterodyneSample, cells: &MemoryCellPair, probe: &CoherentState) -> Decision {
    HeterodyneDecider::new(cells, probe).decide(beta.beta)
}

/// Standard normal upper tail Q(x).
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Heterodyne + ML bit error for equal priors: Q(Δ/√2), Δ = |√κ₁ − √κ₀| √n̄.
pub fn heterodyne_bit_error_analytic(cells: &MemoryCellPair, n_bar: f64) -> f64 {
    let delta = cells.separation_sq().sqrt() * n_bar.max(0.0).sqrt();
    gaussian_tail(delta / SQRT_2)
}

/// Heterodyne + ML bit error for the cells' own priors.
///
/// Projected on the line through the means, each outcome is normal with
/// standard deviation 1/√2 and the boundary sits at d/2 + ln(p₀/p₁)/(2d)
/// from μ₀, d the distance between the means.
pub fn heterodyne_bit_error_with_priors(cells: &MemoryCellPair, n_bar: f64) -> f64 {
    let d = cells.separation_sq().sqrt() * n_bar.max(0.0).sqrt();
    if d == 0.0 {
        return cells.p0.min(cells.p1);
    }
    let boundary = d / 2.0 + (cells.p0 / cells.p1).ln() / (2.0 * d);
    let sigma = FRAC_1_SQRT_2;
    // bit 0 read as 1: beyond the boundary; bit 1 read as 0: short of it
    cells.p0 * gaussian_tail(boundary / sigma) + cells.p1 * gaussian_tail((d - boundary) / sigma)
}

/// P(click) for a coherent state of amplitude δ: e^(−η|δ|²) − e^(−|δ|²).
pub fn click_probability(displaced_amplitude: Complex64, eta_det: f64) -> f64 {
    let x = displaced_amplitude.norm_sqr();
    // -expm1 keeps precision when both exponentials are near 1
    (-(-x * (1.0 - eta_det)).exp_m1() * (-eta_det * x).exp()).max(0.0)
}

/// How the Dolinar receiver picks its first hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuessPolicy {
    /// The bit with the larger prior, ties to 0.
    MostLikelyPrior,
    FixedZero,
    /// Uniformly random.
    Random,
}

impl GuessPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            GuessPolicy::MostLikelyPrior => "most-likely-prior",
            GuessPolicy::FixedZero => "fixed-zero",
            GuessPolicy::Random => "random",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "most-likely-prior" | "prior" => Some(GuessPolicy::MostLikelyPrior),
            "fixed-zero" | "zero" => Some(GuessPolicy::FixedZero),
            "random" => Some(GuessPolicy::Random),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DolinarConfig {
    pub rounds: usize,
    /// η in Q₁; the detection efficiency is 1 − η.
    pub eta_det: f64,
    pub initial_guess: GuessPolicy,
}

impl Default for DolinarConfig {
    fn default() -> Self {
        Self {
            rounds: 2,
            eta_det: 0.1,
            initial_guess: GuessPolicy::MostLikelyPrior,
        }
    }
}

impl DolinarConfig {
    pub fn new(rounds: usize, eta_det: f64, initial_guess: GuessPolicy) -> Result<Self, PhotonicsError> {
        if !(1..=32).contains(&rounds) {
            return Err(PhotonicsError::Rounds(rounds));
        }
        if !(0.0..=1.0).contains(&eta_det) {
            return Err(PhotonicsError::Eta(eta_det));
        }
        Ok(Self {
            rounds,
            eta_det,
            initial_guess,
        })
    }

    /// From detection efficiency 1 − η.
    pub fn with_efficiency(rounds: usize, efficiency: f64, initial_guess: GuessPolicy) -> Result<Self, PhotonicsError> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(PhotonicsError::Eta(1.0 - efficiency));
        }
        Self::new(rounds, 1.0 - efficiency, initial_guess)
    }

    pub fn efficiency(&self) -> f64 {
        1.0 - self.eta_det
    }
}

/// Dolinar receiver for one probe energy, with the per-round click
/// probability on a wrong hypothesis precomputed.
#[derive(Debug, Clone, Copy)]
pub struct DolinarReader {
    cfg: DolinarConfig,
    likelier: u8,
    // P(click) in one round when the hypothesis is wrong; a right hypothesis
    // leaves vacuum, which never clicks.
    wrong_click: f64,
}

impl DolinarReader {
    pub fn new(probe: &CoherentState, cells: &MemoryCellPair, cfg: DolinarConfig) -> Self {
        let slice = probe.amplitude / (cfg.rounds as f64).sqrt();
        let residual = slice * (cells.kappa1.sqrt() - cells.kappa0.sqrt());
        Self {
            cfg,
            likelier: cells.likelier_bit(),
            wrong_click: click_probability(residual, cfg.eta_det),
        }
    }

    pub fn wrong_hypothesis_click(&self) -> f64 {
        self.wrong_click
    }

    pub fn initial_guess<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        match self.cfg.initial_guess {
            GuessPolicy::MostLikelyPrior => self.likelier,
            GuessPolicy::FixedZero => 0,
            GuessPolicy::Random => rng.random_range(0..2u8),
        }
    }

    /// Runs the rounds for a cell holding `true_bit` and returns the declared bit.
    pub fn read<R: Rng + ?Sized>(&self, true_bit: u8, rng: &mut R) -> u8 {
        let mut guess = self.initial_guess(rng);
        for _ in 0..self.cfg.rounds {
            // The residual (√κ_x − √κ_g) α/√l vanishes for a right guess, and
            // vacuum never clicks, so only a wrong guess needs a draw.
            if guess != true_bit && rng.random::<f64>() < self.wrong_click {
                guess ^= 1;
            }
        }
        guess
    }
}

/// Simulates the l-round Dolinar receiver on one cell.
pub fn dolinar_read<R: Rng + ?Sized>(
    true_bit: u8,
    probe: &CoherentState,
    cells: &MemoryCellPair,
    cfg: &DolinarConfig,
    rng: &mut R,
) -> u8 {
    DolinarReader::new(probe, cells, *cfg).read(true_bit, rng)
}

/// Exact Dolinar error probability by enumerating all click/no-click paths.
pub fn dolinar_bit_error_analytic(cells: &MemoryCellPair, n_bar: f64, cfg: &DolinarConfig) -> f64 {
    let probe = CoherentState::from_mean_photons(n_bar);
    let reader = DolinarReader::new(&probe, cells, *cfg);
    let p_wrong = reader.wrong_hypothesis_click();
    let mut total = 0.0;
    for truth in [0u8, 1] {
        let prior = cells.prior(truth);
        let guesses: Vec<(u8, f64)> = match cfg.initial_guess {
            GuessPolicy::MostLikelyPrior => vec![(cells.likelier_bit(), 1.0)],
            GuessPolicy::FixedZero => vec![(0, 1.0)],
            GuessPolicy::Random => vec![(0, 0.5), (1, 0.5)],
        };
        for (g0, pg) in guesses {
            for path in 0..1u32 << cfg.rounds {
                let mut guess = g0;
                let mut prob = pg;
                for round in 0..cfg.rounds {
                    let click = (path >> round) & 1 == 1;
                    let p = if guess == truth { 0.0 } else { p_wrong };
                    prob *= if click { p } else { 1.0 - p };
                    if click {
                        guess ^= 1;
                    }
                }
                if guess != truth {
                    total += prior * prob;
                }
            }
        }
    }
    total
}
