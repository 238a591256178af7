use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::rational::{int, ratio};

const VERIFY_RULES: &str = "qpds v1
stack: C N F S Zp p(A,B) X(A,B) X(B,A)
start: C p(A,B) Zp
rule: C -> N @ 1
rule: N -> F @ 1/2 % 1.5
rule: N -> S @ 1/2
rule: F -> - @ 1
rule: S -> - @ 1
rule: p(A,B) -> X(A,B) @ 1/2
rule: p(A,B) -> - @ 1/2
rule: Zp -> X(A,B) @ 1/2
rule: Zp -> X(B,A) @ 1/2
rule: X(A,B) -> - @ 1
rule: X(B,A) -> - @ 1
";

fn verify_system() -> Qpds {
    parse_system(VERIFY_RULES).unwrap()
}

fn names(sys: &Qpds, succ: &[(Configuration, Amplitude)]) -> Vec<(String, Rational)> {
    succ.iter()
        .map(|(c, a)| (sys.render_configuration(c), a.mod2().clone()))
        .collect()
}

#[test]
fn verification_rules_validate() {
    let sys = verify_system();
    let report = validate_system(&sys, true);
    assert!(report.passed(), "{:?}", report.violations);
}

#[test]
fn under_normalized_row_is_reported() {
    let sys = parse_system("qpds v1\nstack: Q\nstart: Q\nrule: Q -> Q @ 1/2\n").unwrap();
    let report = validate_system(&sys, true);
    assert_eq!(
        report.violations,
        vec![Violation::Normalization {
            head: "Q".into(),
            sum: "1/2".into()
        }]
    );
}

#[test]
fn other_violations_are_reported() {
    let text = "qpds v1\nstack: Q Y\nstart: Q\nrule: Q -> Q Y Y @ 1\nrule: Q -> Q Y Y @ 3/2\nrule: Y -> W @ 1\n";
    let sys = parse_system(text).unwrap();
    let kinds: BTreeSet<String> = validate_system(&sys, true)
        .violations
        .iter()
        .map(|v| format!("{v}"))
        .collect();
    assert!(kinds.contains("symbol W is not declared"), "{kinds:?}");
    assert!(kinds.contains("no rule for W"));
    assert!(kinds.contains("rule #0 pushes 3 symbols (limit 2)"));
    assert!(kinds.contains("rule #1 duplicates rule #0"));
    assert!(kinds.contains("rule #1 has squared modulus 3/2 > 1"));
    assert!(kinds.contains("rules for Q sum to 5/2, not 1"));
    // the length bound only applies in strict mode
    assert!(!validate_system(&sys, false)
        .violations
        .iter()
        .any(|v| matches!(v, Violation::RhsTooLong { .. })));
}

#[test]
fn successor_examples() {
    let sys = verify_system();
    let c = sys.parse_configuration("N p(A,B) Zp").unwrap();
    assert_eq!(
        names(&sys, &sys.successors(&c).unwrap()),
        vec![
            ("F p(A,B) Zp".to_string(), ratio(1, 2)),
            ("S p(A,B) Zp".to_string(), ratio(1, 2))
        ]
    );
    let c = sys.parse_configuration("C p(A,B) Zp").unwrap();
    assert_eq!(
        names(&sys, &sys.successors(&c).unwrap()),
        vec![("N p(A,B) Zp".to_string(), int(1))]
    );
    let empty = sys.parse_configuration("-").unwrap();
    assert_eq!(names(&sys, &sys.successors(&empty).unwrap()), vec![("-".to_string(), int(1))]);
    assert!(Model::is_absorbing(&sys, &empty));
}

#[test]
fn successors_reject_foreign_symbols() {
    let sys = verify_system();
    let bad = Configuration {
        control: StateId(0),
        stack: vec![SymbolId(99)],
    };
    assert_eq!(sys.successors(&bad), Err(QpdsError::UnknownSymbolId(99)));
    assert!(sys.parse_configuration("N Q").is_err());
}

#[test]
fn heads_and_identity_labels() {
    let sys = verify_system();
    let c = sys.parse_configuration("C p(A,B) Zp").unwrap();
    assert_eq!(sys.head_of(&c), "C");
    let f = sys.parse_configuration("F p(A,B) Zp").unwrap();
    assert_eq!(sys.labels(&f), ["F".to_string()].into());
    let e = sys.parse_configuration("-").unwrap();
    assert_eq!(sys.labels(&e), [EMPTY_LABEL.to_string()].into());
    assert!(sys.satisfies(&e, EMPTY_LABEL));
    assert!(!sys.satisfies(&f, "C"));
}

#[test]
fn explicit_assignment_overrides_identity() {
    let text = format!("{VERIFY_RULES}label: hot => C N\n");
    let sys = parse_system(&text).unwrap();
    let c = sys.parse_configuration("N Zp").unwrap();
    assert_eq!(sys.labels(&c), ["hot".to_string()].into());
    assert!(sys.satisfies(&c, "hot"));
    // atoms outside the assignment still resolve on the head
    assert!(sys.satisfies(&c, "N"));
    assert!(sys.knows("hot") && sys.knows("N") && !sys.knows("cold"));
}

#[test]
fn stateful_heads() {
    let text = "qpds v1\nstates: q0 q1\nstack: Z\nstart: q1 Z\nrule: q0 Z -> q1 Z Z @ 1\nrule: q1 Z -> q0 - @ 1\nlabel: idle => q0\n";
    let sys = parse_system(text).unwrap();
    assert!(validate_system(&sys, true).passed());
    let c = sys.start().clone();
    assert_eq!(sys.head_of(&c), "q1.Z");
    assert!(sys.satisfies(&c, "q1.Z"));
    let succ = sys.successors(&c).unwrap();
    assert_eq!(sys.render_configuration(&succ[0].0), "q0 -");
    assert!(sys.satisfies(&succ[0].0, "idle"));
    assert!(sys.satisfies(&succ[0].0, EMPTY_LABEL));
    assert_eq!(sys.labels(&succ[0].0), ["empty".to_string(), "idle".to_string()].into());
}

#[test]
fn render_then_parse_is_stable() {
    for text in [
        VERIFY_RULES.to_string(),
        format!("{VERIFY_RULES}label: hot => C N\n"),
        "qpds v1\nstates: q0 q1\nstack: Z\nstart: q1 Z\nrule: q0 Z -> q1 Z Z @ 1 % 0.25\nrule: q1 Z -> q0 - @ 1\nlabel: idle => q0 q1.Z\n".to_string(),
    ] {
        let once = render_system(&parse_system(&text).unwrap());
        let twice = render_system(&parse_system(&once).unwrap());
        assert_eq!(once, twice);
    }
}

#[test]
fn parse_errors_have_positions() {
    let cases = [
        ("", 1),
        ("qpds v2\n", 1),
        ("qpds v1\nstack: Z\nstart: Z\nrule: Z -> Z\n", 4),
        ("qpds v1\nstack: Z\nstart: Z\nrule: Z -> Z @ x\n", 4),
        ("qpds v1\nstack: Z\nstart: Z\nrule: Z -> Z @ 1 % nope\n", 4),
        ("qpds v1\nstack: Z Z\nstart: Z\n", 2),
        ("qpds v1\nstack: Z\n", 2),
        ("qpds v1\nstack: Z\nstart: Z\nbogus: 1\n", 4),
        ("qpds v1\nstack: Z\nstates: q\nstart: Z\n", 3),
        ("qpds v1\nstack: true\nstart: Z\n", 2),
        ("qpds v1\nstack: X\nstart: X\n", 2),
    ];
    for (text, line) in cases {
        let e = parse_system(text).unwrap_err();
        assert_eq!(e.line, line, "{text:?}: {e}");
    }
}

#[test]
fn phases_default_to_identity() {
    let sys = verify_system();
    assert_eq!(sys.rules()[0].amp.phase(), std::f64::consts::TAU);
    assert_eq!(sys.rules()[1].amp.phase(), 1.5);
}

fn arb_config(sys: &Qpds) -> impl Strategy<Value = Configuration> {
    let n = sys.stack_alphabet().len() as u32;
    proptest::collection::vec(0..n, 0..5).prop_map(|s| Configuration {
        control: StateId(0),
        stack: s.into_iter().map(SymbolId).collect(),
    })
}

proptest! {
    #[test]
    fn successor_mass_is_one(c in arb_config(&verify_system())) {
        let sys = verify_system();
        let total: Rational = sys.successors(&c).unwrap().iter().map(|(_, a)| a.mod2().clone()).sum();
        prop_assert_eq!(total, int(1));
    }

    #[test]
    fn labels_depend_only_on_head(a in arb_config(&verify_system()), b in arb_config(&verify_system())) {
        let sys = verify_system();
        if sys.head(&a) == sys.head(&b) {
            prop_assert_eq!(sys.labels(&a), sys.labels(&b));
        }
    }

    #[test]
    fn strict_systems_grow_by_at_most_one(c in arb_config(&verify_system())) {
        let sys = verify_system();
        for (d, _) in sys.successors(&c).unwrap() {
            prop_assert!(d.stack.len() <= c.stack.len() + 1);
        }
    }

    #[test]
    fn successors_are_deterministic(c in arb_config(&verify_system())) {
        let sys = verify_system();
        prop_assert_eq!(sys.successors(&c).unwrap(), sys.successors(&c).unwrap());
    }

    #[test]
    fn system_parser_never_panics(s in "\\PC{0,80}") {
        let _ = parse_system(&s);
        let _ = parse_system(&format!("qpds v1\n{s}"));
    }
}
