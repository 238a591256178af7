use std::collections::BTreeSet;

use num::One;
use serde::Serialize;

use super::decide::{expected_weights, projections_by_configuration};
use super::{
    branch_probabilities, decide_pcp, encode_bounded, guessed_configuration, reachable_check_configurations,
    DecideOptions, EncodeOptions, PhaseAssignment, ReductionError,
};
use crate::pcp::{concat, a_weight, b_weight, word_to_string, PaddedInstance};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub digest: String,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn sequences(n: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .into_iter()
            .flat_map(|s| {
                (1..=n).map(move |i| {
                    let mut t = s.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn word(w: &[crate::pcp::Letter]) -> String {
    if w.is_empty() {
        "ε".into()
    } else {
        word_to_string(w)
    }
}

/// Runs the per-instance checks of the encoding's supporting facts.
pub fn run_lemmas(p: &PaddedInstance, seeds: &[u64]) -> Result<LemmaReport, ReductionError> {
    let k = p.bound().ok_or(ReductionError::MissingBound)?;
    let art = encode_bounded(p, &EncodeOptions::default())?;
    let bound = art.step_bounds.expect("bounded encoding").used;
    let sys = &art.system;
    let mut checks = Vec::new();

    // dyadic weights: equal words iff the weights sum to 1
    let mut details = Vec::new();
    let mut ok = true;
    let seqs = sequences(p.n(), k);
    for s in &seqs {
        let (u, v) = concat(p.base(), s)?;
        let sum = a_weight(&u)? + b_weight(&v)?;
        let equal = u == v;
        if equal != sum.is_one() {
            ok = false;
            details.push(format!("{s:?}: words equal = {equal}, weight sum = {sum}"));
        }
    }
    details.push(format!("{} index sequences checked", seqs.len()));
    checks.push(LemmaCheck {
        name: "a_weight-equivalence",
        passed: ok,
        details,
    });

    // phases never change the decision
    let base = decide_pcp(p, &DecideOptions::default())?;
    let mut details = Vec::new();
    let mut ok = true;
    for &seed in seeds {
        let other = decide_pcp(
            p,
            &DecideOptions {
                phases: PhaseAssignment::Seeded(seed),
                ..DecideOptions::default()
            },
        )?;
        if other != base {
            ok = false;
            details.push(format!("seed {seed}: report differs"));
        }
    }
    details.push(format!("{} seeded phase assignments compared with unit phases", seeds.len()));
    checks.push(LemmaCheck {
        name: "phase-invariance",
        passed: ok,
        details,
    });

    // reachable check configurations are exactly the guessed pair sequences
    let reached: BTreeSet<String> = reachable_check_configurations(sys, bound)
        .iter()
        .map(|c| sys.render_configuration(c))
        .collect();
    let expected: BTreeSet<String> = seqs
        .iter()
        .map(|s| sys.render_configuration(&guessed_configuration(sys, p, s).expect("encoder symbols")))
        .collect();
    let mut details: Vec<String> = reached
        .symmetric_difference(&expected)
        .map(|c| format!("mismatch: {c}"))
        .collect();
    details.push(format!("{} configurations reachable within {bound} steps", reached.len()));
    checks.push(LemmaCheck {
        name: "reachability",
        passed: reached == expected,
        details,
    });

    // engine branch probabilities equal the dyadic weights of the trimmed words
    let configs = reachable_check_configurations(sys, bound);
    let words = projections_by_configuration(sys, &configs);
    let mut branch = LemmaCheck {
        name: "branch-probability",
        passed: true,
        details: Vec::new(),
    };
    let mut sum = LemmaCheck {
        name: "sum-criterion",
        passed: true,
        details: Vec::new(),
    };
    let mut any_one = false;
    for c in &configs {
        let name = sys.render_configuration(c);
        let probs = branch_probabilities(sys, c, &art.branch_formulas, u64::from(bound));
        let (want_u, want_v) = expected_weights(sys, c);
        let exact = probs.is_exact();
        let (got_u, got_v) = (probs.upper.lo().clone(), probs.lower.lo().clone());
        let branch_ok = exact && got_u == want_u && got_v == want_v;
        branch.passed &= branch_ok;
        branch.details.push(format!(
            "{name}: upper {} (expected {want_u}), lower {} (expected {want_v}){}",
            probs.upper,
            probs.lower,
            if branch_ok { "" } else { "  MISMATCH" }
        ));
        let (u, v) = &words[&name];
        let total: Rational = &got_u + &got_v;
        let one = probs.sums_to_one();
        any_one |= one;
        sum.passed &= exact && one == (u == v);
        sum.details.push(format!(
            "{name}: {got_u} + {got_v} {} 1 (upper {}, lower {})",
            if total.is_one() { "=" } else { "≠" },
            word(u),
            word(v)
        ));
    }
    if !any_one {
        sum.details.push("no reachable configuration sums to 1".into());
    }
    checks.push(branch);
    checks.push(sum);

    Ok(LemmaReport {
        digest: p.base().digest(),
        checks,
    })
}
