use qpmc_core::logic::parse_formula_file;
use qpmc_core::pcp::{pad, parse_pcp, render_pcp};
use qpmc_core::qpds::{parse_system, render_system, validate_system};
use qpmc_core::reduction::{encode_bounded, encode_unbounded, formula_file, EncodeOptions, PhaseAssignment};

const E1: &str = "pcp v1\nalphabet: A B\npair: A AA\npair: AA A\nk: 2\n";

#[test]
fn encoder_output_survives_a_file_round_trip() {
    let inst = parse_pcp(E1).unwrap();
    assert_eq!(parse_pcp(&render_pcp(&inst)).unwrap(), inst);
    let p = pad(&inst).unwrap();
    let seeded = EncodeOptions {
        phases: PhaseAssignment::Seeded(11),
        ..EncodeOptions::default()
    };
    for art in [
        encode_bounded(&p, &EncodeOptions::default()).unwrap(),
        encode_unbounded(&p, &EncodeOptions::default()).unwrap(),
        encode_bounded(&p, &seeded).unwrap(),
    ] {
        let text = render_system(&art.system);
        let back = parse_system(&text).unwrap();
        assert_eq!(render_system(&back), text);
        assert!(validate_system(&back, true).passed());
        let (f, _) = parse_formula_file(&formula_file(&art)).unwrap();
        assert_eq!(f, art.formula);
    }
}

#[test]
fn unit_phases_are_left_implicit() {
    let p = pad(&parse_pcp(E1).unwrap()).unwrap();
    let text = render_system(&encode_bounded(&p, &EncodeOptions::default()).unwrap().system);
    assert!(!text.contains('%'), "{text}");
}
