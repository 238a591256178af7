//! Transition amplitudes.
//!
//! An amplitude is stored as its exact squared modulus plus a floating phase.
//! Path probabilities only ever depend on the squared moduli, so every
//! probability the checker computes is exact; the phase is kept for the
//! orthogonality diagnostics.

use std::f64::consts::TAU;

use num::complex::Complex64;
use num::{One, Signed, ToPrimitive};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AmplitudeError {
    #[error("squared modulus must be non-negative, got {0}")]
    NegativeModulus(Rational),
    #[error("phase must be finite, got {0}")]
    NonFinitePhase(f64),
}

/// Squared modulus `mod2` and phase in `(0, 2π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Amplitude {
    mod2: Rational,
    phase: f64,
}

/// Reduces a phase into `(0, 2π]`; multiples of 2π map to 2π.
pub fn canonical_phase(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    if p <= 0.0 || p >= TAU {
        TAU
    } else {
        p
    }
}

impl Amplitude {
    pub fn new(mod2: Rational, phase: f64) -> Result<Self, AmplitudeError> {
        if mod2.is_negative() {
            return Err(AmplitudeError::NegativeModulus(mod2));
        }
        if !phase.is_finite() {
            return Err(AmplitudeError::NonFinitePhase(phase));
        }
        Ok(Self {
            mod2,
            phase: canonical_phase(phase),
        })
    }

    /// Amplitude with the identity phase 2π.
    pub fn real(mod2: Rational) -> Result<Self, AmplitudeError> {
        Self::new(mod2, TAU)
    }

    /// The multiplicative identity: modulus 1, phase 2π.
    pub fn identity() -> Self {
        Self {
            mod2: Rational::one(),
            phase: TAU,
        }
    }

    pub fn mod2(&self) -> &Rational {
        &self.mod2
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn with_phase(&self, phase: f64) -> Result<Self, AmplitudeError> {
        Self::new(self.mod2.clone(), phase)
    }

    /// Floating-point complex value `sqrt(mod2) * e^{i phase}`.
    pub fn to_complex(&self) -> Complex64 {
        let magnitude = self.mod2.to_f64().unwrap_or(f64::NAN).sqrt();
        Complex64::from_polar(magnitude, self.phase)
    }

    pub fn mul(&self, other: &Amplitude) -> Amplitude {
        Amplitude {
            mod2: &self.mod2 * &other.mod2,
            phase: canonical_phase(self.phase + other.phase),
        }
    }
}

/// Product of a sequence of amplitudes: moduli multiply exactly, phases add.
pub fn amp_product<'a, I>(factors: I) -> Amplitude
where
    I: IntoIterator<Item = &'a Amplitude>,
{
    factors
        .into_iter()
        .fold(Amplitude::identity(), |acc, a| acc.mul(a))
}

/// Probability of the cylinder spanned by a path whose transitions carry `amps`.
pub fn path_probability(amps: &[Amplitude]) -> Rational {
    amp_product(amps).mod2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn amp(n: i64, d: i64, phase: f64) -> Amplitude {
        Amplitude::new(ratio(n, d), phase).unwrap()
    }

    #[test]
    fn empty_product_is_identity() {
        let p = amp_product(&[]);
        assert_eq!(p.mod2(), &int(1));
        assert_eq!(p.phase(), TAU);
    }

    #[test]
    fn product_multiplies_moduli_and_adds_phases() {
        let p = amp_product(&[amp(1, 2, PI), amp(1, 2, PI / 2.0)]);
        assert_eq!(p.mod2(), &ratio(1, 4));
        assert!((p.phase() - 3.0 * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn guess_chain_keeps_the_branching_weight() {
        // one 1/n branch followed by unit-modulus pushes
        let n = 3;
        let mut chain = vec![amp(1, n, 0.7)];
        chain.extend((0..5).map(|i| amp(1, 1, 0.3 * i as f64)));
        let oracle: Rational = chain.iter().map(|a| a.mod2().clone()).product();
        assert_eq!(amp_product(&chain).mod2(), &oracle);
        assert_eq!(oracle, ratio(1, n));
    }

    #[test]
    fn path_probability_of_single_state_prefix_is_one() {
        assert_eq!(path_probability(&[]), int(1));
    }

    #[test]
    fn verification_pop_has_probability_one_half() {
        // (x,y) -> X_(x,y) at 1/2, then X_(x,y) -> eps at 1
        let p = path_probability(&[amp(1, 2, 1.1), amp(1, 1, 4.0)]);
        assert_eq!(p, ratio(1, 2));
    }

    #[test]
    fn phase_is_canonicalised_into_half_open_range() {
        assert_eq!(canonical_phase(0.0), TAU);
        assert_eq!(canonical_phase(TAU), TAU);
        assert_eq!(canonical_phase(-TAU), TAU);
        assert!((canonical_phase(-PI) - PI).abs() < 1e-12);
        assert!((canonical_phase(5.0 * PI) - PI).abs() < 1e-9);
    }

    #[test]
    fn rejects_negative_modulus_and_nan_phase() {
        assert!(Amplitude::new(ratio(-1, 2), 1.0).is_err());
        assert!(Amplitude::new(ratio(1, 2), f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn probability_matches_complex_modulus(
            factors in proptest::collection::vec((1i64..=8, 1i64..=8, 0.0f64..7.0), 0..6)
        ) {
            let amps: Vec<Amplitude> = factors
                .iter()
                .map(|&(n, d, ph)| amp(n.min(d), d, ph))
                .collect();
            let exact = path_probability(&amps);
            let complex = amps
                .iter()
                .fold(Complex64::new(1.0, 0.0), |acc, a| acc * a.to_complex());
            let exact_f = exact.to_f64().unwrap();
            prop_assert!((complex.norm_sqr() - exact_f).abs() < 1e-9);
        }

        #[test]
        fn probability_ignores_phases(
            factors in proptest::collection::vec((1i64..=8, 1i64..=8, 0.0f64..7.0, 0.0f64..7.0), 0..8)
        ) {
            let a: Vec<Amplitude> = factors.iter().map(|&(n, d, p, _)| amp(n.min(d), d, p)).collect();
            let b: Vec<Amplitude> = factors.iter().map(|&(n, d, _, q)| amp(n.min(d), d, q)).collect();
            prop_assert_eq!(path_probability(&a), path_probability(&b));
        }

        #[test]
        fn product_is_associative(
            xs in proptest::collection::vec((1i64..=6, 1i64..=6, 0.0f64..7.0), 3)
        ) {
            let a: Vec<Amplitude> = xs.iter().map(|&(n, d, p)| amp(n.min(d), d, p)).collect();
            let left = a[0].mul(&a[1]).mul(&a[2]);
            let right = a[0].mul(&a[1].mul(&a[2]));
            prop_assert_eq!(left.mod2(), right.mod2());
            let diff = (left.phase() - right.phase()).abs();
            prop_assert!(diff < 1e-9 || (diff - TAU).abs() < 1e-9);
        }
    }
}
