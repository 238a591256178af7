//! Encodings of (bounded) Post Correspondence instances as stateless quantum
//! pushdown systems plus an acceptance formula, and the pipeline that decides
//! an instance through the model checker.
//!
//! Both encodings first guess a sequence of padded pairs, pushing one
//! `p(x,y)` symbol per letter position, then verify it: from `N α Zp` the run
//! branches to `F` (checks upper words) or `S` (checks lower words), and
//! the two branch probabilities add up to 1 exactly when the trimmed words
//! agree.

mod decide;
mod lemmas;

use std::f64::consts::TAU;
use std::fmt;

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::amplitude::Amplitude;
use crate::logic::{required_horizon, Comparison, Horizon, PathFormula, StateFormula};
use crate::pcp::{Letter, PaddedInstance, PcpError};
use crate::qpds::{Qpds, QpdsBuilder};
use crate::rational::{format_rational, ratio, Rational};

pub use decide::{
    branch_probabilities, decide_pcp, guessed_configuration, reachable_check_configurations,
    stack_projection, BranchProbabilities, ConfigurationReport, DecideOptions, DecisionMode,
    DecisionReport,
};
pub use lemmas::{run_lemmas, LemmaCheck, LemmaReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Instance(#[from] PcpError),
    #[error("t must lie strictly between 0 and 1, got {0}")]
    InvalidT(String),
    #[error("bounded encoding needs a bound K")]
    MissingBound,
    #[error("bound K = {k} outside 1..={n}")]
    BoundOutOfRange { k: usize, n: usize },
}

/// How rule phases are chosen. Probabilities never depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseAssignment {
    /// Every phase is 2π.
    #[default]
    Unit,
    /// Reproducible pseudo-random phases in (0, 2π].
    Seeded(u64),
}

impl fmt::Display for PhaseAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseAssignment::Unit => f.write_str("unit"),
            PhaseAssignment::Seeded(s) => write!(f, "seeded({s})"),
        }
    }
}

struct PhaseSource(Option<ChaCha8Rng>);

impl PhaseSource {
    fn new(p: PhaseAssignment) -> Self {
        match p {
            PhaseAssignment::Unit => PhaseSource(None),
            PhaseAssignment::Seeded(seed) => PhaseSource(Some(ChaCha8Rng::seed_from_u64(seed))),
        }
    }

    fn amp(&mut self, mod2: Rational) -> Amplitude {
        let phase = match &mut self.0 {
            None => TAU,
            // gen() is in [0, 1), so this lands in (0, 2π]
            Some(rng) => TAU * (1.0 - rng.gen::<f64>()),
        };
        Amplitude::new(mod2, phase).expect("non-negative modulus, finite phase")
    }
}

/// Which step bound the bounded formula uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundPolicy {
    /// `2nm`, as printed in the construction.
    TwoNm,
    /// `max(guess + verify, 2nm)`; always enough for the encoded runs.
    #[default]
    Sufficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingMode {
    Unbounded,
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodeOptions {
    #[serde(skip)]
    pub phases: PhaseAssignment,
    #[serde(serialize_with = "crate::rational::serde_rational")]
    pub t: Rational,
    pub policy: BoundPolicy,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        Self {
            phases: PhaseAssignment::Unit,
            t: ratio(1, 2),
            policy: BoundPolicy::Sufficient,
        }
    }
}

/// Step counts behind the bounded formula's `U<=B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StepBounds {
    pub policy: BoundPolicy,
    /// `2nm`
    pub two_nm: u32,
    /// Steps from `Z` to the last reachable `C` configuration: `K(m+1) + 2`.
    pub guess: u32,
    /// Steps that always resolve both branch formulas from `N`: `2(Km+1) + 3`.
    pub verify: u32,
    pub used: u32,
    pub two_nm_sufficient: bool,
}

impl StepBounds {
    pub fn compute(n: usize, m: usize, k: usize, policy: BoundPolicy) -> Self {
        let (n, m, k) = (n as u32, m as u32, k as u32);
        let two_nm = 2 * n * m;
        let guess = k * (m + 1) + 2;
        let verify = 2 * (k * m + 1) + 3;
        let used = match policy {
            BoundPolicy::TwoNm => two_nm,
            BoundPolicy::Sufficient => (guess + verify).max(two_nm),
        };
        StepBounds {
            policy,
            two_nm,
            guess,
            verify,
            used,
            two_nm_sufficient: two_nm >= guess && two_nm >= verify,
        }
    }
}

/// Symbol counts of the stack alphabet, by family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AlphabetReport {
    pub total: usize,
    /// `Z`, `Zp`, `C`, `F`, `S`, `N`
    pub fixed: usize,
    /// Guessed-bound symbols `1..K` (bounded mode only).
    pub bound_symbols: usize,
    pub pair_symbols: usize,
    pub check_symbols: usize,
    pub guess_symbols: usize,
}

#[derive(Debug, Clone)]
pub struct EncodingArtifacts {
    pub mode: EncodingMode,
    pub system: Qpds,
    pub formula: StateFormula,
    /// Upper- and lower-word branch formulas used inside `formula`.
    pub branch_formulas: (PathFormula, PathFormula),
    pub t: Rational,
    /// `U<=B` bound of the bounded formula.
    pub step_bounds: Option<StepBounds>,
    pub horizon_hint: Horizon,
    pub alphabet_report: AlphabetReport,
    pub warnings: Vec<String>,
}

pub const START: &str = "Z";
pub const BOTTOM: &str = "Zp";
pub const CHECK: &str = "C";
pub const UPPER: &str = "F";
pub const LOWER: &str = "S";
pub const BRANCH: &str = "N";

pub fn pair_symbol(x: Letter, y: Letter) -> String {
    format!("p({},{})", x.as_char(), y.as_char())
}

pub fn check_symbol(x: Letter, y: Letter) -> String {
    format!("X({},{})", x.as_char(), y.as_char())
}

/// Inverse of [`pair_symbol`].
pub fn parse_pair_symbol(name: &str) -> Option<(Letter, Letter)> {
    let inner = name.strip_prefix("p(")?.strip_suffix(')')?;
    let mut it = inner.chars();
    let x = Letter::from_char(it.next()?)?;
    if it.next()? != ',' {
        return None;
    }
    let y = Letter::from_char(it.next()?)?;
    it.next().is_none().then_some((x, y))
}

fn unbounded_guess_symbol(i: usize, j: usize) -> String {
    format!("G{i}_{j}")
}

fn bounded_guess_symbol(l: usize, k: usize, j: usize) -> String {
    format!("G{l}_{k}_{j}")
}

fn check_t(t: &Rational) -> Result<(), ReductionError> {
    if t <= &Rational::zero() || t >= &Rational::one() {
        return Err(ReductionError::InvalidT(format_rational(t)));
    }
    Ok(())
}

/// The upper-word and lower-word branch formulas, with `U<=bound` when given.
///
/// Upper: `(!S & !X(B,z)...) U (X(A,z) | ...)`; lower: `(!F & !X(z,A)...) U (X(z,B) | ...)`.
pub fn build_branch_formulas(bound: Option<u32>) -> (PathFormula, PathFormula) {
    let atom = |s: String| StateFormula::atom(s);
    let not = |s: String| StateFormula::not(atom(s));
    let upper_safe = StateFormula::conj(
        std::iter::once(StateFormula::not(StateFormula::atom(LOWER)))
            .chain(Letter::ALL.iter().map(|&z| not(check_symbol(Letter::B, z)))),
    );
    let upper_goal = StateFormula::disj(Letter::ALL.iter().map(|&z| atom(check_symbol(Letter::A, z))));
    let lower_safe = StateFormula::conj(
        std::iter::once(StateFormula::not(StateFormula::atom(UPPER)))
            .chain(Letter::ALL.iter().map(|&z| not(check_symbol(z, Letter::A)))),
    );
    let lower_goal = StateFormula::disj(Letter::ALL.iter().map(|&z| atom(check_symbol(z, Letter::B))));
    let until = |a, b| match bound {
        Some(k) => PathFormula::bounded_until(a, b, k),
        None => PathFormula::until(a, b),
    };
    (until(upper_safe, upper_goal), until(lower_safe, lower_goal))
}

/// `P>0 [ true U(<=B) (C & P=1 [ X (P=t/2 [upper] & P=(1-t)/2 [lower]) ]) ]`
pub fn acceptance_formula(branches: &(PathFormula, PathFormula), t: &Rational, bound: Option<u32>) -> StateFormula {
    let half = ratio(1, 2);
    let inner = StateFormula::and(
        StateFormula::prob(Comparison::Equal, t * &half, branches.0.clone()),
        StateFormula::prob(Comparison::Equal, (Rational::one() - t) * &half, branches.1.clone()),
    );
    let at_check = StateFormula::and(
        StateFormula::atom(CHECK),
        StateFormula::prob(Comparison::Equal, Rational::one(), PathFormula::next(inner)),
    );
    let reach = match bound {
        Some(b) => PathFormula::bounded_until(StateFormula::True, at_check, b),
        None => PathFormula::until(StateFormula::True, at_check),
    };
    StateFormula::prob(Comparison::Greater, Rational::zero(), reach)
}

/// Formula file with the branch formulas bound to names.
pub fn formula_file(art: &EncodingArtifacts) -> String {
    let half = ratio(1, 2);
    let until = match art.step_bounds {
        Some(b) => format!("U<={}", b.used),
        None => "U".to_string(),
    };
    format!(
        "# acceptance formula ({mode} encoding, t = {t})\nlet upper_branch = {u}\nlet lower_branch = {v}\nP>0 [ true {until} (C & P=1 [ X (P={a} [ upper_branch ] & P={b} [ lower_branch ]) ]) ]\n",
        mode = match art.mode {
            EncodingMode::Unbounded => "unbounded",
            EncodingMode::Bounded => "bounded",
        },
        t = art.t,
        u = art.branch_formulas.0,
        v = art.branch_formulas.1,
        a = &art.t * &half,
        b = (Rational::one() - &art.t) * &half,
    )
}

/// Verification rules shared by both encodings.
fn add_verification(b: &mut QpdsBuilder, phases: &mut PhaseSource) {
    let one = Rational::one();
    let half = ratio(1, 2);
    let mut rule = |b: &mut QpdsBuilder, lhs: &str, rhs: &[&str], p: &Rational| {
        b.rule(lhs, rhs, phases.amp(p.clone())).expect("encoder symbols are valid");
    };
    rule(b, CHECK, &[BRANCH], &one);
    rule(b, BRANCH, &[UPPER], &half);
    rule(b, BRANCH, &[LOWER], &half);
    rule(b, UPPER, &[], &one);
    rule(b, LOWER, &[], &one);
    for x in Letter::ALL {
        for y in Letter::ALL {
            let p = pair_symbol(x, y);
            let c = check_symbol(x, y);
            rule(b, &p, &[&c], &half);
            rule(b, &p, &[], &half);
        }
    }
    rule(b, BOTTOM, &[&check_symbol(Letter::A, Letter::B)], &half);
    rule(b, BOTTOM, &[&check_symbol(Letter::B, Letter::A)], &half);
    for x in Letter::ALL {
        for y in Letter::ALL {
            rule(b, &check_symbol(x, y), &[], &one);
        }
    }
}

fn declare_pairs(b: &mut QpdsBuilder) {
    for x in Letter::ALL {
        for y in Letter::ALL {
            b.symbol(&pair_symbol(x, y)).expect("fresh symbol");
        }
    }
    for x in Letter::ALL {
        for y in Letter::ALL {
            b.symbol(&check_symbol(x, y)).expect("fresh symbol");
        }
    }
}

/// Unbounded-guess encoding: any number of pairs, then the unbounded formula.
///
/// Termination of checks on this system is not guaranteed in general.
pub fn encode_unbounded(p: &PaddedInstance, opts: &EncodeOptions) -> Result<EncodingArtifacts, ReductionError> {
    check_t(&opts.t)?;
    let (n, m) = (p.n(), p.m());
    let mut phases = PhaseSource::new(opts.phases);
    let mut b = QpdsBuilder::stateless();
    for s in [START, BOTTOM, CHECK, UPPER, LOWER, BRANCH] {
        b.symbol(s).expect("fresh symbol");
    }
    declare_pairs(&mut b);
    for i in 1..=n {
        for j in 1..=m + 1 {
            b.symbol(&unbounded_guess_symbol(i, j)).expect("fresh symbol");
        }
    }
    for i in 1..=n {
        b.rule(START, &[&unbounded_guess_symbol(i, 1), BOTTOM], phases.amp(ratio(1, n as i64)))
            .expect("valid rule");
    }
    for (i, (u, v)) in p.padded_pairs().iter().enumerate() {
        let i = i + 1;
        for j in 1..=m {
            b.rule(
                &unbounded_guess_symbol(i, j),
                &[&unbounded_guess_symbol(i, j + 1), &pair_symbol(u[j - 1], v[j - 1])],
                phases.amp(Rational::one()),
            )
            .expect("valid rule");
        }
        let last = unbounded_guess_symbol(i, m + 1);
        let w = ratio(1, n as i64 + 1);
        b.rule(&last, &[CHECK], phases.amp(w.clone())).expect("valid rule");
        for l in 1..=n {
            b.rule(&last, &[&unbounded_guess_symbol(l, 1)], phases.amp(w.clone()))
                .expect("valid rule");
        }
    }
    add_verification(&mut b, &mut phases);
    b.start(None, &[START]).expect("declared");
    let system = b.build();
    let branch_formulas = build_branch_formulas(None);
    let formula = acceptance_formula(&branch_formulas, &opts.t, None);
    Ok(EncodingArtifacts {
        mode: EncodingMode::Unbounded,
        alphabet_report: AlphabetReport {
            total: system.stack_alphabet().len(),
            fixed: 6,
            bound_symbols: 0,
            pair_symbols: 9,
            check_symbols: 9,
            guess_symbols: n * (m + 1),
        },
        system,
        horizon_hint: required_horizon(&formula),
        formula,
        branch_formulas,
        t: opts.t.clone(),
        step_bounds: None,
        warnings: vec!["unbounded encoding: checks may not terminate; use iterative deepening".into()],
    })
}

/// Bounded-guess encoding: first guesses `k <= K`, then exactly `k` pairs.
pub fn encode_bounded(p: &PaddedInstance, opts: &EncodeOptions) -> Result<EncodingArtifacts, ReductionError> {
    check_t(&opts.t)?;
    let (n, m) = (p.n(), p.m());
    let k_max = p.bound().ok_or(ReductionError::MissingBound)?;
    if k_max == 0 || k_max > n {
        return Err(ReductionError::BoundOutOfRange { k: k_max, n });
    }
    let mut phases = PhaseSource::new(opts.phases);
    let mut b = QpdsBuilder::stateless();
    b.symbol(START).expect("fresh symbol");
    for k in 1..=k_max {
        b.symbol(&k.to_string()).expect("fresh symbol");
    }
    for s in [BOTTOM, CHECK, UPPER, LOWER, BRANCH] {
        b.symbol(s).expect("fresh symbol");
    }
    declare_pairs(&mut b);
    for k in 1..=k_max {
        for l in 1..=n {
            for j in 1..=m + 1 {
                b.symbol(&bounded_guess_symbol(l, k, j)).expect("fresh symbol");
            }
        }
    }
    let choose_k = ratio(1, k_max as i64);
    let choose_pair = ratio(1, n as i64);
    for k in 1..=k_max {
        b.rule(START, &[&k.to_string(), BOTTOM], phases.amp(choose_k.clone()))
            .expect("valid rule");
    }
    for k in 1..=k_max {
        for l in 1..=n {
            b.rule(&k.to_string(), &[&bounded_guess_symbol(l, k, 1)], phases.amp(choose_pair.clone()))
                .expect("valid rule");
        }
    }
    for k in 1..=k_max {
        for (l, (u, v)) in p.padded_pairs().iter().enumerate() {
            let l = l + 1;
            for j in 1..=m {
                b.rule(
                    &bounded_guess_symbol(l, k, j),
                    &[&bounded_guess_symbol(l, k, j + 1), &pair_symbol(u[j - 1], v[j - 1])],
                    phases.amp(Rational::one()),
                )
                .expect("valid rule");
            }
            let last = bounded_guess_symbol(l, k, m + 1);
            if k == 1 {
                b.rule(&last, &[CHECK], phases.amp(Rational::one())).expect("valid rule");
            } else {
                for next in 1..=n {
                    b.rule(&last, &[&bounded_guess_symbol(next, k - 1, 1)], phases.amp(choose_pair.clone()))
                        .expect("valid rule");
                }
            }
        }
    }
    add_verification(&mut b, &mut phases);
    b.start(None, &[START]).expect("declared");
    let system = b.build();
    let bounds = StepBounds::compute(n, m, k_max, opts.policy);
    let branch_formulas = build_branch_formulas(Some(bounds.used));
    let formula = acceptance_formula(&branch_formulas, &opts.t, Some(bounds.used));
    let mut warnings = Vec::new();
    if !bounds.two_nm_sufficient {
        warnings.push(format!(
            "step bound 2nm = {} is below the guess ({}) or verification ({}) length",
            bounds.two_nm, bounds.guess, bounds.verify
        ));
    }
    Ok(EncodingArtifacts {
        mode: EncodingMode::Bounded,
        alphabet_report: AlphabetReport {
            total: system.stack_alphabet().len(),
            fixed: 6,
            bound_symbols: k_max,
            pair_symbols: 9,
            check_symbols: 9,
            guess_symbols: n * k_max * (m + 1),
        },
        system,
        horizon_hint: required_horizon(&formula),
        formula,
        branch_formulas,
        t: opts.t.clone(),
        step_bounds: Some(bounds),
        warnings,
    })
}
