//! Exact-probability model checking for quantum pushdown systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`amplitude`] and [`chain`]: amplitudes with an exact squared modulus,
//!   finite quantum Markov chains, cylinder probabilities and the
//!   normalization / orthogonality diagnostics.
//! * [`qpds`]: quantum pushdown systems (and the stateless special case),
//!   their text format and the induced infinite chain.
//! * [`logic`]: PCTL / bounded PCTL syntax, parser, renderer and horizon
//!   analysis.
//! * [`checker`]: a memoized three-valued evaluator over any [`checker::Model`].
//! * [`pcp`]: Post Correspondence instances, padding, the dyadic word
//!   weights and a brute-force bounded solver.
//! * [`reduction`]: the PCP to stateless-qPDS encodings, the end-to-end
//!   decision pipeline and the per-instance lemma suite.

pub mod amplitude;
pub mod chain;
pub mod checker;
pub mod logic;
pub mod pcp;
pub mod qpds;
pub mod rational;
pub mod reduction;

pub use amplitude::{amp_product, path_probability, Amplitude};
pub use chain::{FiniteQmc, PathPrefix, ProbInterval};
pub use checker::{Checker, Model, Truth, Verdict};
pub use logic::{parse_formula, render_formula, required_horizon, Horizon, PathFormula, StateFormula};
pub use pcp::{PaddedInstance, PcpInstance, Witness};
pub use qpds::{Configuration, Qpds};
