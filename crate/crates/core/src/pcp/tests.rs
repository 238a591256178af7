use proptest::prelude::*;

use super::*;
use crate::rational::{int, ratio};

fn w(s: &str) -> Word {
    word_from_str(s).unwrap()
}

fn e0() -> PcpInstance {
    PcpInstance::from_strs(&[("A", "A")], Some(1)).unwrap()
}

fn e1() -> PcpInstance {
    PcpInstance::from_strs(&[("A", "AA"), ("AA", "A")], Some(2)).unwrap()
}

fn e2() -> PcpInstance {
    PcpInstance::from_strs(&[("A", "B")], Some(1)).unwrap()
}

/// Binary-expansion oracle: `0.b_1 b_2 ... b_k 1` read as a dyadic fraction.
fn dyadic_oracle(word: &[Letter], one: Letter) -> Rational {
    let mut bits: i64 = 0;
    for l in word {
        bits = bits * 2 + i64::from(*l == one);
    }
    bits = bits * 2 + 1;
    ratio(bits, 1i64 << (word.len() + 1))
}

#[test]
fn pads_with_trailing_bullets() {
    let p = pad(&e1()).unwrap();
    assert_eq!(p.m(), 2);
    assert_eq!(p.padded_pairs()[0], (w("A•"), w("AA")));
    assert_eq!(p.padded_pairs()[1], (w("AA"), w("A•")));
    for inst in [e0(), e2()] {
        let p = pad(&inst).unwrap();
        assert_eq!(p.m(), 1);
        assert_eq!(p.padded_pairs(), inst.pairs());
    }
}

#[test]
fn pad_rejects_empty_words() {
    let inst = PcpInstance::from_strs(&[("A", "-")], None).unwrap();
    assert_eq!(pad(&inst), Err(PcpError::EmptyWord { index: 1 }));
}

#[test]
fn trim_examples() {
    assert_eq!(trim(&w("A•B")), w("AB"));
    assert_eq!(trim(&w("••")), Vec::<Letter>::new());
    assert_eq!(trim(&w("AB")), w("AB"));
}

#[test]
fn indicator_tables() {
    assert_eq!((a_indicator(WeightSymbol::A), b_indicator(WeightSymbol::A)), (1, 0));
    assert_eq!((a_indicator(WeightSymbol::B), b_indicator(WeightSymbol::B)), (0, 1));
    assert_eq!((a_indicator(WeightSymbol::Bottom), b_indicator(WeightSymbol::Bottom)), (1, 1));
}

#[test]
fn weight_examples() {
    assert_eq!(a_weight(&[]).unwrap(), ratio(1, 2));
    assert_eq!(b_weight(&[]).unwrap(), ratio(1, 2));
    assert_eq!(a_weight(&w("AB")).unwrap(), ratio(5, 8));
    assert_eq!(b_weight(&w("AB")).unwrap(), ratio(3, 8));
    assert_eq!(a_weight(&w("AAA")).unwrap(), ratio(15, 16));
    assert_eq!(b_weight(&w("AAA")).unwrap(), ratio(1, 16));
    assert_eq!(a_weight(&w("A•")), Err(PcpError::PaddingInWeight));
}

#[test]
fn weights_match_binary_expansion_oracle() {
    for len in 0..=8 {
        for bits in 0..(1u32 << len) {
            let word: Word = (0..len)
                .map(|i| if bits >> i & 1 == 1 { Letter::A } else { Letter::B })
                .collect();
            assert_eq!(a_weight(&word).unwrap(), dyadic_oracle(&word, Letter::A));
            assert_eq!(b_weight(&word).unwrap(), dyadic_oracle(&word, Letter::B));
        }
    }
}

#[test]
fn weights_of_a_word_and_itself_sum_to_one() {
    for len in 0..=10 {
        for bits in 0..(1u32 << len) {
            let word: Word = (0..len)
                .map(|i| if bits >> i & 1 == 1 { Letter::A } else { Letter::B })
                .collect();
            assert_eq!(a_weight(&word).unwrap() + b_weight(&word).unwrap(), int(1));
        }
    }
}

#[test]
fn witness_verification() {
    assert!(verify_witness(&e1(), &Witness::new(vec![1, 2]).unwrap()).unwrap());
    assert!(!verify_witness(&e1(), &Witness::new(vec![1]).unwrap()).unwrap());
    assert!(verify_witness(&e0(), &Witness::new(vec![1]).unwrap()).unwrap());
    assert_eq!(
        verify_witness(&e1(), &Witness::new(vec![3]).unwrap()),
        Err(PcpError::IndexOutOfRange { index: 3, n: 2 })
    );
    assert!(Witness::new(vec![]).is_err());
}

#[test]
fn bounded_solver_examples() {
    assert_eq!(solve_bounded(&e1(), 2).unwrap().indices(), &[1, 2]);
    assert_eq!(solve_bounded(&e2(), 1), None);
    assert_eq!(solve_bounded(&e0(), 1).unwrap().indices(), &[1]);
    assert_eq!(solve_bounded(&e1(), 1), None);
}

fn recursive_solver(inst: &PcpInstance, k: usize) -> Option<Vec<usize>> {
    fn go(inst: &PcpInstance, prefix: &mut Vec<usize>, len: usize) -> Option<Vec<usize>> {
        if prefix.len() == len {
            let (u, v) = concat(inst, prefix).unwrap();
            return (u == v).then(|| prefix.clone());
        }
        for i in 1..=inst.n() {
            prefix.push(i);
            if let Some(found) = go(inst, prefix, len) {
                return Some(found);
            }
            prefix.pop();
        }
        None
    }
    (1..=k).find_map(|len| go(inst, &mut Vec::new(), len))
}

fn arb_word() -> impl Strategy<Value = Word> {
    proptest::collection::vec(prop_oneof![Just(Letter::A), Just(Letter::B)], 1..4)
}

fn arb_instance() -> impl Strategy<Value = PcpInstance> {
    proptest::collection::vec((arb_word(), arb_word()), 1..4)
        .prop_map(|pairs| PcpInstance::new(pairs, None).unwrap())
}

proptest! {
    #[test]
    fn solver_agrees_with_recursive_enumeration(inst in arb_instance(), k in 1usize..4) {
        let got = solve_bounded(&inst, k);
        let expected = recursive_solver(&inst, k);
        prop_assert_eq!(got.as_ref().map(|w| w.indices().to_vec()), expected);
        if let Some(wit) = got {
            prop_assert!(verify_witness(&inst, &wit).unwrap());
            prop_assert!(wit.len() <= k);
        }
    }

    #[test]
    fn trim_inverts_padding(inst in arb_instance()) {
        let p = pad(&inst).unwrap();
        for ((u, v), (pu, pv)) in inst.pairs().iter().zip(p.padded_pairs()) {
            prop_assert_eq!(pu.len(), p.m());
            prop_assert_eq!(pv.len(), p.m());
            prop_assert_eq!(&trim(pu), u);
            prop_assert_eq!(&trim(pv), v);
            prop_assert_eq!(trim(&trim(pu)), trim(pu));
        }
    }

    #[test]
    fn file_round_trip(inst in arb_instance(), k in proptest::option::of(1usize..4)) {
        let inst = inst.with_bound(k).unwrap();
        prop_assert_eq!(parse_pcp(&render_pcp(&inst)).unwrap(), inst);
    }

    #[test]
    fn pcp_parser_never_panics(s in "\\PC{0,60}") {
        let _ = parse_pcp(&s);
    }
}

#[test]
fn parses_the_documented_example() {
    let text = "pcp v1\nalphabet: A B\npair: A AA\npair: AA A\nk: 2            # optional\n";
    assert_eq!(parse_pcp(text).unwrap(), e1());
}

#[test]
fn parse_errors_carry_lines() {
    let e = parse_pcp("pcp v2\n").unwrap_err();
    assert_eq!(e.line, 1);
    let e = parse_pcp("pcp v1\npair: A\n").unwrap_err();
    assert_eq!(e.line, 2);
    let e = parse_pcp("pcp v1\nalphabet: A\npair: A B\n").unwrap_err();
    assert_eq!(e.line, 3);
    let e = parse_pcp("pcp v1\nk: x\n").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(parse_pcp("pcp v1\n").is_err());
    assert!(parse_pcp("").is_err());
    assert!(parse_pcp("pcp v1\npair: A A\nk: 0\n").is_err());
}

#[test]
fn digest_is_stable_for_equal_instances() {
    assert_eq!(e1().digest(), e1().digest());
    assert_ne!(e1().digest(), e0().digest());
    assert_eq!(e1().digest().len(), 64);
}
