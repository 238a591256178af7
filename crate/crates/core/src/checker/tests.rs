use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::chain::PathPrefix;
use crate::logic::parse_formula;
use crate::rational::{int, ratio};

fn labels(ls: &[&[&str]]) -> Vec<BTreeSet<String>> {
    ls.iter().map(|l| l.iter().map(|s| s.to_string()).collect()).collect()
}

fn real(n: i64, d: i64) -> Amplitude {
    Amplitude::real(ratio(n, d)).unwrap()
}

fn two_state() -> FiniteQmc {
    FiniteQmc::new(
        vec!["s0".into(), "s1".into()],
        vec![vec![(1, real(1, 1))], vec![(1, real(1, 1))]],
        labels(&[&[], &["a"]]),
    )
    .unwrap()
}

/// s0 -> s0 | s1 | s2 at 1/2, 1/4, 1/4; s1 labelled goal, s2 labelled trap.
fn gambler() -> FiniteQmc {
    FiniteQmc::new(
        vec!["s0".into(), "s1".into(), "s2".into()],
        vec![
            vec![(0, real(1, 2)), (1, real(1, 4)), (2, real(1, 4))],
            vec![(1, real(1, 1))],
            vec![(2, real(1, 1))],
        ],
        labels(&[&["start"], &["goal"], &["trap"]]),
    )
    .unwrap()
}

#[test]
fn next_on_two_state_chain() {
    let chain = two_state();
    let (iv, q) = prob_path(&chain, &0, &PathFormula::next(StateFormula::atom("a")), 1).unwrap();
    assert_eq!(iv, ProbInterval::point(int(1)));
    assert!(q);
}

#[test]
fn atom_check() {
    let chain = two_state();
    let v = check_state(&chain, &1, &StateFormula::atom("a"), 0).unwrap();
    assert_eq!(v.truth, Truth::Holds);
    assert!(v.quiescent);
    assert_eq!(
        check_state(&chain, &0, &StateFormula::atom("zzz"), 0),
        Err(CheckError::UnknownAtom("zzz".into()))
    );
}

#[test]
fn bounded_until_on_gambler() {
    let chain = gambler();
    let f = PathFormula::bounded_until(StateFormula::True, StateFormula::atom("goal"), 2);
    let (iv, _) = prob_path(&chain, &0, &f, 2).unwrap();
    // 1/4 + 1/2 * 1/4
    assert_eq!(iv, ProbInterval::point(ratio(3, 8)));
}

#[test]
fn unbounded_until_narrows_with_horizon() {
    let chain = gambler();
    let f = PathFormula::until(StateFormula::True, StateFormula::atom("goal"));
    let mut prev = ProbInterval::unknown();
    for h in 1..12 {
        let (iv, q) = prob_path(&chain, &0, &f, h).unwrap();
        assert!(iv.within(&prev), "h={h}: {iv} not within {prev}");
        assert!(!q);
        assert!(iv.contains(&ratio(1, 2)));
        prev = iv;
    }
    // the trap is absorbing and fails the target, so its mass resolves to 0
    let (iv, _) = prob_path(&chain, &0, &f, 1).unwrap();
    assert_eq!(iv, ProbInterval::new(ratio(1, 4), ratio(3, 4)).unwrap());
}

#[test]
fn comparisons_follow_interval_rules() {
    let iv = ProbInterval::new(ratio(1, 4), ratio(3, 4)).unwrap();
    assert_eq!(compare(Comparison::Greater, &ratio(1, 8), &iv), Truth::Holds);
    assert_eq!(compare(Comparison::Greater, &ratio(3, 4), &iv), Truth::Fails);
    assert_eq!(compare(Comparison::Greater, &ratio(1, 2), &iv), Truth::Unknown);
    assert_eq!(compare(Comparison::Equal, &ratio(1, 2), &iv), Truth::Unknown);
    assert_eq!(compare(Comparison::Equal, &ratio(7, 8), &iv), Truth::Fails);
    let p = ProbInterval::point(ratio(1, 2));
    assert_eq!(compare(Comparison::Equal, &ratio(1, 2), &p), Truth::Holds);
}

#[test]
fn check_quiescent_resolves_unbounded_formula() {
    let chain = gambler();
    let reach_trap_or_goal = parse_formula("P>0 [ start U trap ]").unwrap();
    let v = check_quiescent(&chain, &0, &reach_trap_or_goal, 64).unwrap();
    assert_eq!(v.truth, Truth::Holds);
    // never decided exactly: P=1/2 for reaching goal needs infinite unfolding
    let exact = parse_formula("P=1/2 [ true U goal ]").unwrap();
    let v = check_quiescent(&chain, &0, &exact, 64).unwrap();
    assert_eq!(v.truth, Truth::Unknown);
    assert_eq!(v.horizon, 64);
    assert!(!v.quiescent);
    let iv = v.interval.unwrap();
    assert!(iv.lo() < &ratio(1, 2) && iv.hi() > &ratio(1, 2));
}

#[test]
fn check_quiescent_on_bounded_formula_matches_check_state() {
    let chain = gambler();
    let f = parse_formula("P>1/3 [ true U<=3 goal ]").unwrap();
    let a = check_quiescent(&chain, &0, &f, 1000).unwrap();
    let b = check_state(&chain, &0, &f, 3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn memo_cap_does_not_change_results() {
    let chain = gambler();
    let f = parse_formula("P>0 [ X P>1/3 [ true U<=4 goal ] ]").unwrap();
    let full = Checker::new(&chain).check_state(&0, &f, 5).unwrap();
    let mut capped = Checker::new(&chain).with_memo_cap(1);
    assert_eq!(capped.check_state(&0, &f, 5).unwrap(), full);
    assert!(capped.memo_len() <= 1);
}

/// Exhaustive oracle: sum of cylinder probabilities of all length-`k` paths
/// that satisfy `a U<=k b` (operands without probability operators).
fn brute_force_bounded_until(chain: &FiniteQmc, s: usize, a: &StateFormula, b: &StateFormula, k: u32) -> Rational {
    fn sat(chain: &FiniteQmc, s: usize, f: &StateFormula) -> bool {
        reference::check_state(chain, &s, f, 0) == Truth::Holds
    }
    let mut paths = vec![vec![s]];
    for _ in 0..k {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                let last = *p.last().unwrap();
                chain.row(last).iter().map(move |(t, _)| {
                    let mut q = p.clone();
                    q.push(*t);
                    q
                })
            })
            .collect();
    }
    paths
        .into_iter()
        .filter(|p| {
            let hit = p.iter().position(|&x| sat(chain, x, b));
            hit.is_some_and(|i| p[..i].iter().all(|&x| sat(chain, x, a)))
        })
        .map(|p| PathPrefix::new(chain, p).unwrap().cylinder_probability(chain))
        .sum()
}

fn arb_chain() -> impl Strategy<Value = FiniteQmc> {
    (1usize..=4).prop_flat_map(|n| {
        let row = proptest::collection::btree_map(0..n, 1i64..4, 1..=n);
        let label = proptest::collection::btree_set(prop_oneof![Just("a"), Just("b")], 0..=2);
        (
            proptest::collection::vec(row, n),
            proptest::collection::vec(label, n),
            proptest::collection::vec(0.0f64..6.3, n * n),
        )
            .prop_map(move |(rows, labels, phases)| {
                let transitions = rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let total: i64 = r.values().sum();
                        r.iter()
                            .map(|(&t, &w)| (t, Amplitude::new(ratio(w, total), phases[i * n + t]).unwrap()))
                            .collect()
                    })
                    .collect();
                let labels = labels
                    .into_iter()
                    .map(|l| l.into_iter().map(String::from).collect())
                    .collect();
                FiniteQmc::new((0..n).map(|i| format!("s{i}")).collect(), transitions, labels).unwrap()
            })
    })
}

fn arb_prop() -> impl Strategy<Value = StateFormula> {
    let leaf = prop_oneof![
        Just(StateFormula::True),
        Just(StateFormula::atom("a")),
        Just(StateFormula::atom("b")),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(StateFormula::not),
            (inner.clone(), inner).prop_map(|(x, y)| StateFormula::and(x, y)),
        ]
    })
}

fn arb_nested() -> impl Strategy<Value = StateFormula> {
    let bound = (0i64..=4).prop_map(|n| ratio(n, 4));
    let path = prop_oneof![
        arb_prop().prop_map(PathFormula::next),
        (arb_prop(), arb_prop(), 0u32..4).prop_map(|(a, b, k)| PathFormula::bounded_until(a, b, k)),
        (arb_prop(), arb_prop()).prop_map(|(a, b)| PathFormula::until(a, b)),
    ];
    let leaf = (any::<bool>(), bound, path).prop_map(|(g, r, p)| {
        StateFormula::prob(if g { Comparison::Greater } else { Comparison::Equal }, r, p)
    });
    leaf.prop_recursive(2, 8, 2, |inner| {
        let bound = (0i64..=4).prop_map(|n| ratio(n, 4));
        prop_oneof![
            inner.clone().prop_map(StateFormula::not),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| StateFormula::and(x, y)),
            (bound.clone(), inner.clone())
                .prop_map(|(r, f)| StateFormula::prob(Comparison::Greater, r, PathFormula::next(f))),
            (bound, arb_prop(), inner, 0u32..3).prop_map(|(r, a, f, k)| {
                StateFormula::prob(Comparison::Equal, r, PathFormula::bounded_until(a, f, k))
            }),
        ]
    })
}

proptest! {
    #[test]
    fn bounded_until_matches_path_enumeration(
        chain in arb_chain(), a in arb_prop(), b in arb_prop(), k in 0u32..=4, s in 0usize..4
    ) {
        let s = s % chain.len();
        let f = PathFormula::bounded_until(a.clone(), b.clone(), k);
        let (iv, q) = prob_path(&chain, &s, &f, u64::from(k)).unwrap_or((ProbInterval::unknown(), false));
        if chain_knows_all(&chain, &[&a, &b]) {
            prop_assert!(q);
            prop_assert_eq!(iv, ProbInterval::point(brute_force_bounded_until(&chain, s, &a, &b, k)));
        }
    }

    #[test]
    fn memoized_matches_reference(chain in arb_chain(), f in arb_nested(), h in 0u64..6, s in 0usize..4) {
        let s = s % chain.len();
        if let Ok(v) = check_state(&chain, &s, &f, h) {
            prop_assert_eq!(v.truth, reference::check_state(&chain, &s, &f, h));
        }
    }

    #[test]
    fn horizon_increase_never_widens(chain in arb_chain(), a in arb_prop(), b in arb_prop(), s in 0usize..4) {
        let s = s % chain.len();
        if chain_knows_all(&chain, &[&a, &b]) {
            let f = PathFormula::until(a, b);
            let mut prev = ProbInterval::unknown();
            for h in 0..8 {
                let (iv, _) = prob_path(&chain, &s, &f, h).unwrap();
                prop_assert!(iv.within(&prev));
                prev = iv;
            }
        }
    }

    #[test]
    fn phases_do_not_change_verdicts(chain in arb_chain(), f in arb_nested(), seed in 0.0f64..6.0) {
        let rephased = chain.rephased(|i, j| seed + (i * 7 + j) as f64);
        for s in 0..chain.len() {
            let a = check_state(&chain, &s, &f, 4);
            let b = check_state(&rephased, &s, &f, 4);
            prop_assert_eq!(a, b);
        }
    }
}

fn chain_knows_all(chain: &FiniteQmc, fs: &[&StateFormula]) -> bool {
    fs.iter().all(|f| f.atoms().iter().all(|a| chain.knows(a)))
}
