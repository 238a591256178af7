//! Finite quantum Markov chains, cylinder probabilities and well-formedness
//! diagnostics.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;

use num::{One, Signed, Zero};
use num::complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::amplitude::{path_probability, Amplitude};
use crate::rational::{format_rational, Rational};

/// Default tolerance for orthogonality diagnostics.
pub const DEFAULT_ORTHOGONALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("chain has no states")]
    Empty,
    #[error("state `{0}` has no outgoing transition")]
    NoSuccessor(String),
    #[error("state `{state}` has a transition to unknown index {target}")]
    UnknownTarget { state: String, target: usize },
    #[error("state `{state}` lists target `{target}` twice")]
    DuplicateTarget { state: String, target: String },
    #[error("expected {expected} {what}, got {got}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("path is empty")]
    EmptyPath,
    #[error("no transition from `{from}` to `{to}`")]
    NotAPath { from: String, to: String },
    #[error("interval bounds must satisfy 0 <= lo <= hi <= 1, got [{lo}, {hi}]")]
    BadInterval { lo: String, hi: String },
}

/// Closed probability interval with exact endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProbInterval {
    lo: Rational,
    hi: Rational,
}

impl ProbInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, ChainError> {
        if lo.is_negative() || hi < lo || hi > Rational::one() {
            return Err(ChainError::BadInterval {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn point(p: Rational) -> Self {
        debug_assert!(!p.is_negative() && p <= Rational::one());
        Self { lo: p.clone(), hi: p }
    }

    pub fn zero() -> Self {
        Self::point(Rational::zero())
    }

    pub fn one() -> Self {
        Self::point(Rational::one())
    }

    pub fn unknown() -> Self {
        Self {
            lo: Rational::zero(),
            hi: Rational::one(),
        }
    }

    pub(crate) fn from_bounds_unchecked(lo: Rational, hi: Rational) -> Self {
        debug_assert!(!lo.is_negative() && lo <= hi && hi <= Rational::one(), "[{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, r: &Rational) -> bool {
        &self.lo <= r && r <= &self.hi
    }

    /// `self` lies inside `other`.
    pub fn within(&self, other: &ProbInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }
}

impl fmt::Display for ProbInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{}", format_rational(&self.lo))
        } else {
            write!(f, "[{}, {}]", format_rational(&self.lo), format_rational(&self.hi))
        }
    }
}

/// A finite quantum Markov chain with per-state labels.
#[derive(Debug, Clone)]
pub struct FiniteQmc {
    states: Vec<String>,
    transitions: Vec<Vec<(usize, Amplitude)>>,
    labels: Vec<BTreeSet<String>>,
}

impl FiniteQmc {
    /// Builds a chain. Every state needs at least one transition; targets must
    /// be distinct within a row. Normalization is reported, not enforced: see
    /// [`validate_normalization`].
    pub fn new(
        states: Vec<String>,
        transitions: Vec<Vec<(usize, Amplitude)>>,
        labels: Vec<BTreeSet<String>>,
    ) -> Result<Self, ChainError> {
        if states.is_empty() {
            return Err(ChainError::Empty);
        }
        if transitions.len() != states.len() {
            return Err(ChainError::Shape {
                what: "transition rows",
                expected: states.len(),
                got: transitions.len(),
            });
        }
        if labels.len() != states.len() {
            return Err(ChainError::Shape {
                what: "label sets",
                expected: states.len(),
                got: labels.len(),
            });
        }
        for (i, row) in transitions.iter().enumerate() {
            if row.is_empty() {
                return Err(ChainError::NoSuccessor(states[i].clone()));
            }
            let mut seen = BTreeSet::new();
            for (t, _) in row {
                if *t >= states.len() {
                    return Err(ChainError::UnknownTarget {
                        state: states[i].clone(),
                        target: *t,
                    });
                }
                if !seen.insert(*t) {
                    return Err(ChainError::DuplicateTarget {
                        state: states[i].clone(),
                        target: states[*t].clone(),
                    });
                }
            }
        }
        Ok(Self {
            states,
            transitions,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn row(&self, s: usize) -> &[(usize, Amplitude)] {
        &self.transitions[s]
    }

    pub fn labels_of(&self, s: usize) -> &BTreeSet<String> {
        &self.labels[s]
    }

    pub fn all_labels(&self) -> BTreeSet<String> {
        self.labels.iter().flatten().cloned().collect()
    }

    /// Amplitude of the transition `from -> to`, if present.
    pub fn amplitude(&self, from: usize, to: usize) -> Option<&Amplitude> {
        self.transitions[from]
            .iter()
            .find(|(t, _)| *t == to)
            .map(|(_, a)| a)
    }

    /// Same chain with every transition phase replaced by `phase(source, target)`.
    pub fn rephased(&self, mut phase: impl FnMut(usize, usize) -> f64) -> Self {
        let transitions = self
            .transitions
            .iter()
            .enumerate()
            .map(|(s, row)| {
                row.iter()
                    .map(|(t, a)| (*t, a.with_phase(phase(s, *t)).expect("finite phase")))
                    .collect()
            })
            .collect();
        Self {
            states: self.states.clone(),
            transitions,
            labels: self.labels.clone(),
        }
    }
}

/// A finite path through a chain; consecutive states are linked by transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathPrefix {
    states: Vec<usize>,
}

impl PathPrefix {
    pub fn new(chain: &FiniteQmc, states: Vec<usize>) -> Result<Self, ChainError> {
        if states.is_empty() {
            return Err(ChainError::EmptyPath);
        }
        for s in &states {
            if *s >= chain.len() {
                return Err(ChainError::UnknownTarget {
                    state: "<path>".into(),
                    target: *s,
                });
            }
        }
        for w in states.windows(2) {
            if chain.amplitude(w[0], w[1]).is_none() {
                return Err(ChainError::NotAPath {
                    from: chain.state_name(w[0]).into(),
                    to: chain.state_name(w[1]).into(),
                });
            }
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn amplitudes<'a>(&self, chain: &'a FiniteQmc) -> Vec<&'a Amplitude> {
        self.states
            .windows(2)
            .map(|w| chain.amplitude(w[0], w[1]).expect("validated path"))
            .collect()
    }

    /// Probability of the cylinder of runs extending this prefix.
    pub fn cylinder_probability(&self, chain: &FiniteQmc) -> Rational {
        let amps: Vec<Amplitude> = self.amplitudes(chain).into_iter().cloned().collect();
        path_probability(&amps)
    }
}

/// One source whose outgoing squared moduli do not sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowViolation {
    pub source: String,
    #[serde(serialize_with = "crate::rational::serde_rational")]
    pub sum: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NormalizationReport {
    pub violations: Vec<RowViolation>,
}

impl NormalizationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every row of `chain` sums to 1 exactly in squared modulus.
pub fn validate_normalization(chain: &FiniteQmc) -> NormalizationReport {
    let violations = (0..chain.len())
        .filter_map(|s| {
            let sum: Rational = chain.row(s).iter().map(|(_, a)| a.mod2().clone()).sum();
            (!sum.is_one()).then(|| RowViolation {
                source: chain.state_name(s).to_string(),
                sum,
            })
        })
        .collect();
    NormalizationReport { violations }
}

/// Modulus of the complex inner product of two rows over a shared index space.
pub fn row_inner_product<T: Eq + Hash>(row_i: &[(T, Amplitude)], row_j: &[(T, Amplitude)]) -> f64 {
    let mut lookup: HashMap<&T, Complex64> = HashMap::new();
    for (t, a) in row_j {
        *lookup.entry(t).or_default() += a.to_complex();
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, a) in row_i {
        if let Some(b) = lookup.get(t) {
            acc += a.to_complex() * b.conj();
        }
    }
    acc.norm()
}

/// True iff the two rows are orthogonal up to `tol`.
pub fn check_orthogonality<T: Eq + Hash>(
    row_i: &[(T, Amplitude)],
    row_j: &[(T, Amplitude)],
    tol: f64,
) -> bool {
    row_inner_product(row_i, row_j) <= tol
}

/// A pair of rows that failed the orthogonality diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthogonalityIssue {
    pub row_a: String,
    pub row_b: String,
    pub inner_product: f64,
}

/// Pairwise orthogonality over all rows of a finite chain.
pub fn orthogonality_issues(chain: &FiniteQmc, tol: f64) -> Vec<OrthogonalityIssue> {
    let mut out = Vec::new();
    for i in 0..chain.len() {
        for j in (i + 1)..chain.len() {
            let ip = row_inner_product(chain.row(i), chain.row(j));
            if ip > tol {
                out.push(OrthogonalityIssue {
                    row_a: chain.state_name(i).into(),
                    row_b: chain.state_name(j).into(),
                    inner_product: ip,
                });
            }
        }
    }
    out
}
