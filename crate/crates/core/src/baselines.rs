//! Closed-form optimal uncoded error probabilities.

use std::fmt;
use std::str::FromStr;

use crate::photonics::MemoryCellPair;

/// Exponent convention for the coherent-probe bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PcExponent {
    /// −n̄ (√κ₀ − √κ₁)², the coherent-state fidelity exponent.
    #[default]
    Squared,
    /// −n̄ (√κ₀ − √κ₁) as printed in the original derivation. Only meaningful
    /// when √κ₀ ≥ √κ₁; otherwise the result is NaN.
    Paper,
}

impl PcExponent {
    pub fn name(&self) -> &'static str {
        match self {
            PcExponent::Squared => "squared",
            PcExponent::Paper => "paper",
        }
    }
}

impl FromStr for PcExponent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "squared" => Ok(PcExponent::Squared),
            "paper" => Ok(PcExponent::Paper),
            other => Err(format!("expected squared or paper, got {other:?}")),
        }
    }
}

/// Helstrom bound for coherent probes: [1 − √(1 − e^(−n̄(√κ₀ − √κ₁)²))]/2.
pub fn optimal_coherent_error(cells: &MemoryCellPair, n_bar: f64) -> f64 {
    optimal_coherent_error_with(cells, n_bar, PcExponent::Squared)
}

pub fn optimal_coherent_error_with(cells: &MemoryCellPair, n_bar: f64, exponent: PcExponent) -> f64 {
    let diff = cells.kappa0.sqrt() - cells.kappa1.sqrt();
    let rate = match exponent {
        PcExponent::Squared => diff * diff,
        PcExponent::Paper => diff,
    };
    let overlap = (-n_bar * rate).exp();
    if overlap > 1.0 {
        return f64::NAN;
    }
    // 1 − √(1 − F) loses everything to cancellation when F is tiny
    let s = (1.0 - overlap).sqrt();
    0.5 * overlap / (1.0 + s)
}

/// μ = (κ₀ + κ₁ + 2)/2 − 2√(κ₀κ₁) − √((1 − κ₀)(1 − κ₁)).
pub fn squeezed_mu(cells: &MemoryCellPair) -> f64 {
    let (k0, k1) = (cells.kappa0, cells.kappa1);
    (k0 + k1 + 2.0) / 2.0 - 2.0 * (k0 * k1).sqrt() - ((1.0 - k0) * (1.0 - k1)).sqrt()
}

/// e^(−μ n̄)/2.
pub fn optimal_squeezed_error(cells: &MemoryCellPair, n_bar: f64) -> f64 {
    // μ ≥ 0 exactly; rounding can push it a hair below
    0.5 * (-squeezed_mu(cells).max(0.0) * n_bar).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BaselineKind {
    OptimalCoherent,
    OptimalSqueezed,
    #[default]
    MinOfBoth,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [
        BaselineKind::OptimalCoherent,
        BaselineKind::OptimalSqueezed,
        BaselineKind::MinOfBoth,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::OptimalCoherent => "optimal-coherent",
            BaselineKind::OptimalSqueezed => "optimal-squeezed",
            BaselineKind::MinOfBoth => "min-of-both",
        }
    }

    pub fn evaluate(&self, cells: &MemoryCellPair, n_bar: f64) -> f64 {
        self.evaluate_with(cells, n_bar, PcExponent::Squared)
    }

    pub fn evaluate_with(&self, cells: &MemoryCellPair, n_bar: f64, exponent: PcExponent) -> f64 {
        match self {
            BaselineKind::OptimalCoherent => optimal_coherent_error_with(cells, n_bar, exponent),
            BaselineKind::OptimalSqueezed => optimal_squeezed_error(cells, n_bar),
            BaselineKind::MinOfBoth => {
                optimal_coherent_error_with(cells, n_bar, exponent).min(optimal_squeezed_error(cells, n_bar))
            }
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BaselineKind::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("expected optimal-coherent, optimal-squeezed or min-of-both, got {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cells() -> MemoryCellPair {
        MemoryCellPair::new(0.1, 0.95).unwrap()
    }

    /// Helstrom error ½(1 − √(1 − |⟨a|b⟩|²)) for coherent states a, b with
    /// |⟨a|b⟩|² = e^(−|a − b|²), written out without the stable rearrangement.
    fn helstrom_oracle(a: f64, b: f64) -> f64 {
        let fidelity = (-(a - b).powi(2)).exp();
        0.5 * (1.0 - (1.0 - fidelity).sqrt())
    }

    #[test]
    fn coherent_examples() {
        assert_eq!(optimal_coherent_error(&cells(), 0.0), 0.5);
        let same = MemoryCellPair::new(0.3, 0.3).unwrap();
        assert_eq!(optimal_coherent_error(&same, 12.0), 0.5);
        let n_bar: f64 = 2.0;
        let oracle = helstrom_oracle(0.1f64.sqrt() * n_bar.sqrt(), 0.95f64.sqrt() * n_bar.sqrt());
        let p = optimal_coherent_error(&cells(), n_bar);
        assert!((p - oracle).abs() < 1e-14);
        assert!((p - 0.119264).abs() < 1e-6, "{p}");
    }

    #[test]
    fn coherent_tail_is_accurate() {
        // F/4 to first order once the overlap is tiny
        let n_bar = 80.0;
        let f = (-n_bar * cells().separation_sq()).exp();
        let p = optimal_coherent_error(&cells(), n_bar);
        assert!((p / (f / 4.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn paper_exponent_domain() {
        let p = optimal_coherent_error_with(&cells(), 2.0, PcExponent::Paper);
        assert!(p.is_nan());
        let p = optimal_coherent_error_with(&cells().swapped(), 2.0, PcExponent::Paper);
        let f = (-2.0 * (0.95f64.sqrt() - 0.1f64.sqrt())).exp();
        assert!((p - 0.5 * (1.0 - (1.0 - f).sqrt())).abs() < 1e-14);
    }

    #[test]
    fn mu_examples() {
        assert!(squeezed_mu(&MemoryCellPair::new(0.4, 0.4).unwrap()).abs() < 1e-15);
        assert!((squeezed_mu(&MemoryCellPair::new(0.0, 1.0).unwrap()) - 1.5).abs() < 1e-15);
        let mu = squeezed_mu(&cells());
        let by_hand = 1.525 - 2.0 * 0.095f64.sqrt() - 0.045f64.sqrt();
        assert!((mu - by_hand).abs() < 1e-15);
        assert!((mu - 0.69643).abs() < 1e-4);
    }

    #[test]
    fn squeezed_examples() {
        assert_eq!(optimal_squeezed_error(&cells(), 0.0), 0.5);
        assert!((optimal_squeezed_error(&cells(), 1.0) - 0.24918).abs() < 1e-4);
        let same = MemoryCellPair::new(0.7, 0.7).unwrap();
        assert!((optimal_squeezed_error(&same, 30.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn squeezed_beats_coherent_past_crossover() {
        // Near zero P_c falls like √n̄ and P_s only linearly, so the coherent
        // bound is lower at first. Bisect the crossing as an oracle.
        let c = cells();
        let gap = |n: f64| optimal_squeezed_error(&c, n) - optimal_coherent_error(&c, n);
        let (mut lo, mut hi) = (0.5, 5.0);
        assert!(gap(lo) > 0.0 && gap(hi) < 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 2.2028).abs() < 1e-3, "{lo}");
        for i in 1..=5000 {
            let n = i as f64 * 0.01;
            assert_eq!(gap(n) <= 0.0, n > lo, "n={n}");
        }
    }

    #[test]
    fn min_of_both() {
        for n in [0.0, 0.5, 3.0, 10.0] {
            let b = BaselineKind::MinOfBoth.evaluate(&cells(), n);
            assert_eq!(
                b,
                optimal_coherent_error(&cells(), n).min(optimal_squeezed_error(&cells(), n))
            );
        }
    }

    #[test]
    fn names_round_trip() {
        for b in BaselineKind::ALL {
            assert_eq!(b.name().parse::<BaselineKind>().unwrap(), b);
        }
        assert!("helstrom".parse::<BaselineKind>().is_err());
        assert_eq!("paper".parse::<PcExponent>().unwrap(), PcExponent::Paper);
    }

    proptest! {
        #[test]
        fn monotone_and_symmetric(k0 in 0.0f64..=1.0, k1 in 0.0f64..=1.0, n in 0.0f64..50.0, dn in 0.0f64..5.0) {
            let c = MemoryCellPair::new(k0, k1).unwrap();
            let s = c.swapped();
            for b in BaselineKind::ALL {
                let here = b.evaluate(&c, n);
                prop_assert!(here > 0.0 || n > 0.0);
                prop_assert!(here <= 0.5);
                prop_assert!(b.evaluate(&c, n + dn) <= here + 1e-15);
                prop_assert!((b.evaluate(&s, n) - here).abs() < 1e-15);
            }
        }
    }
}
