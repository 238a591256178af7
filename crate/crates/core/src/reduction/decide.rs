use std::collections::{BTreeMap, HashSet, VecDeque};

use num::One;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    encode_bounded, parse_pair_symbol, BoundPolicy, EncodeOptions, EncodingArtifacts, PhaseAssignment,
    ReductionError, StepBounds, BOTTOM, CHECK, LOWER, START, UPPER,
};
use crate::chain::ProbInterval;
use crate::checker::{Checker, Truth};
use crate::logic::PathFormula;
use crate::pcp::{a_weight, b_weight, solve_bounded, trim, word_to_string, Letter, PaddedInstance, Witness, Word};
use crate::qpds::{Configuration, Qpds};
use crate::rational::{ratio, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DecisionMode {
    /// Some reachable check configuration has branch probabilities summing to 1.
    #[default]
    Sum,
    /// The acceptance formula itself, with the given `t`.
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecideOptions {
    pub t: Rational,
    pub phases: PhaseAssignment,
    pub mode: DecisionMode,
    pub policy: BoundPolicy,
}

impl Default for DecideOptions {
    fn default() -> Self {
        Self {
            t: ratio(1, 2),
            phases: PhaseAssignment::Unit,
            mode: DecisionMode::Sum,
            policy: BoundPolicy::Sufficient,
        }
    }
}

/// Branch probabilities of one check configuration `C α Zp`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchProbabilities {
    /// Upper-word formula from `F α Zp`.
    pub upper: ProbInterval,
    /// Lower-word formula from `S α Zp`.
    pub lower: ProbInterval,
}

impl BranchProbabilities {
    pub fn is_exact(&self) -> bool {
        self.upper.is_point() && self.lower.is_point()
    }

    /// Bounds of the sum. Not a probability: it can reach 2.
    pub fn sum(&self) -> (Rational, Rational) {
        (self.upper.lo() + self.lower.lo(), self.upper.hi() + self.lower.hi())
    }

    /// `p/q` when exact, `[lo, hi]` otherwise.
    pub fn sum_text(&self) -> String {
        let (lo, hi) = self.sum();
        if lo == hi {
            lo.to_string()
        } else {
            format!("[{lo}, {hi}]")
        }
    }

    pub fn sums_to_one(&self) -> bool {
        self.is_exact() && self.upper.lo() + self.lower.lo() == Rational::one()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigurationReport {
    pub configuration: String,
    /// Trimmed upper / lower projection of the stack, top first.
    pub upper_word: String,
    pub lower_word: String,
    pub upper_probability: String,
    pub lower_probability: String,
    pub sum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionReport {
    pub digest: String,
    pub mode: DecisionMode,
    pub t: String,
    pub horizon: u64,
    pub step_bounds: StepBounds,
    pub verdict: Truth,
    /// Interval of the acceptance formula (literal mode only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula_interval: Option<String>,
    pub configurations: Vec<ConfigurationReport>,
    pub witness: Option<Witness>,
    /// `None` when the checker side was inconclusive.
    pub agreement: Option<bool>,
    pub warnings: Vec<String>,
}

/// Upper and lower letters of the `p(x,y)` symbols on the stack, top first.
pub fn stack_projection(sys: &Qpds, c: &Configuration) -> (Word, Word) {
    c.stack
        .iter()
        .filter_map(|s| parse_pair_symbol(sys.symbol_name(*s)))
        .unzip()
}

/// The check configuration reached after guessing `pushed` (first pushed pair first).
pub fn guessed_configuration(
    sys: &Qpds,
    p: &PaddedInstance,
    pushed: &[usize],
) -> Result<Configuration, crate::qpds::QpdsError> {
    let mut names: Vec<String> = vec![CHECK.to_string()];
    for &l in pushed.iter().rev() {
        let (u, v) = &p.padded_pairs()[l - 1];
        for j in (0..p.m()).rev() {
            names.push(super::pair_symbol(u[j], v[j]));
        }
    }
    names.push(BOTTOM.to_string());
    sys.parse_configuration(&names.join(" "))
}

/// Every configuration with top `C` reachable from the start within `depth` steps.
pub fn reachable_check_configurations(sys: &Qpds, depth: u32) -> Vec<Configuration> {
    let check = sys.symbol(CHECK).ok();
    let mut seen: HashSet<Configuration> = HashSet::new();
    let mut found = Vec::new();
    let mut queue = VecDeque::new();
    let start = sys.start().clone();
    seen.insert(start.clone());
    queue.push_back((start, 0u32));
    while let Some((c, d)) = queue.pop_front() {
        if c.top().is_some() && c.top() == check {
            found.push(c);
            continue;
        }
        if d == depth {
            continue;
        }
        for (next, _) in sys.successors(&c).expect("configurations come from the system") {
            if seen.insert(next.clone()) {
                queue.push_back((next, d + 1));
            }
        }
    }
    found.sort_by_key(|c| sys.render_configuration(c));
    found
}

fn with_top(sys: &Qpds, c: &Configuration, top: &str) -> Configuration {
    let mut out = c.clone();
    out.stack[0] = sys.symbol(top).expect("encoder symbol");
    out
}

/// Probabilities of the branch formulas from `F α Zp` and `S α Zp`.
pub fn branch_probabilities(
    sys: &Qpds,
    check_config: &Configuration,
    branch_formulas: &(PathFormula, PathFormula),
    horizon: u64,
) -> BranchProbabilities {
    let mut checker = Checker::new(sys);
    let upper = checker
        .prob_path(&with_top(sys, check_config, UPPER), &branch_formulas.0, horizon)
        .expect("encoder formulas use encoder symbols")
        .0;
    let lower = checker
        .prob_path(&with_top(sys, check_config, LOWER), &branch_formulas.1, horizon)
        .expect("encoder formulas use encoder symbols")
        .0;
    BranchProbabilities { upper, lower }
}

/// Runs the bounded encoding through the checker and the brute-force solver
/// side by side and reports both.
pub fn decide_pcp(p: &PaddedInstance, opts: &DecideOptions) -> Result<DecisionReport, ReductionError> {
    let k = p.bound().ok_or(ReductionError::MissingBound)?;
    let art = encode_bounded(
        p,
        &EncodeOptions {
            phases: opts.phases,
            t: opts.t.clone(),
            policy: opts.policy,
        },
    )?;
    let (witness, (verdict, configurations, formula_interval)) =
        rayon::join(|| solve_bounded(p.base(), k), || evaluate(&art, opts.mode));
    let agreement = match verdict {
        Truth::Unknown => None,
        v => Some((v == Truth::Holds) == witness.is_some()),
    };
    let mut warnings = art.warnings.clone();
    if verdict == Truth::Unknown {
        warnings.push("checker inconclusive at the encoding horizon".into());
    }
    if opts.mode == DecisionMode::Literal && !configurations.is_empty() {
        warnings.push(format!(
            "literal mode holds only where the upper-branch probability equals t = {}",
            art.t
        ));
    }
    Ok(DecisionReport {
        digest: p.base().digest(),
        mode: opts.mode,
        t: art.t.to_string(),
        horizon: art.horizon_hint.as_bounded().expect("bounded encoding"),
        step_bounds: art.step_bounds.expect("bounded encoding"),
        verdict,
        formula_interval,
        configurations,
        witness,
        agreement,
        warnings,
    })
}

fn render_word(w: &[Letter]) -> String {
    if w.is_empty() {
        "-".into()
    } else {
        word_to_string(w)
    }
}

fn evaluate(art: &EncodingArtifacts, mode: DecisionMode) -> (Truth, Vec<ConfigurationReport>, Option<String>) {
    let bound = art.step_bounds.expect("bounded encoding").used;
    let sys = &art.system;
    let configs = reachable_check_configurations(sys, bound);
    let results: Vec<(ConfigurationReport, BranchProbabilities)> = configs
        .par_iter()
        .map(|c| {
            let probs = branch_probabilities(sys, c, &art.branch_formulas, u64::from(bound));
            let (u, v) = stack_projection(sys, c);
            let report = ConfigurationReport {
                configuration: sys.render_configuration(c),
                upper_word: render_word(&trim(&u)),
                lower_word: render_word(&trim(&v)),
                upper_probability: probs.upper.to_string(),
                lower_probability: probs.lower.to_string(),
                sum: probs.sum_text(),
            };
            (report, probs)
        })
        .collect();
    let (verdict, interval) = match mode {
        DecisionMode::Sum => {
            let verdict = if results.iter().any(|(_, p)| p.sums_to_one()) {
                Truth::Holds
            } else if results.iter().all(|(_, p)| p.is_exact()) {
                Truth::Fails
            } else {
                Truth::Unknown
            };
            (verdict, None)
        }
        DecisionMode::Literal => {
            let horizon = art.horizon_hint.as_bounded().expect("bounded encoding");
            let start = sys.parse_configuration(START).expect("start symbol");
            let v = Checker::new(sys)
                .check_state(&start, &art.formula, horizon)
                .expect("encoder formula uses encoder symbols");
            (v.truth, v.interval.map(|iv| iv.to_string()))
        }
    };
    (verdict, results.into_iter().map(|(r, _)| r).collect(), interval)
}

/// Weights the trimmed projections should produce, per configuration.
pub(crate) fn expected_weights(sys: &Qpds, c: &Configuration) -> (Rational, Rational) {
    let (u, v) = stack_projection(sys, c);
    (
        a_weight(&trim(&u)).expect("trimmed"),
        b_weight(&trim(&v)).expect("trimmed"),
    )
}

/// Reachable check configurations grouped by the trimmed words they spell.
pub(crate) fn projections_by_configuration(sys: &Qpds, configs: &[Configuration]) -> BTreeMap<String, (Word, Word)> {
    configs
        .iter()
        .map(|c| {
            let (u, v) = stack_projection(sys, c);
            (sys.render_configuration(c), (trim(&u), trim(&v)))
        })
        .collect()
}
