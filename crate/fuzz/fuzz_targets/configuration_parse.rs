#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use qpmc_core::qpds::{parse_system, Qpds};
use qpmc_core::rational::parse_rational;

const SYSTEM: &str = "qpds v1
states: q0 q1
stack: A B
start: q0 A
rule: q0 A -> q1 A B @ 1/2
rule: q0 A -> q0 - @ 1/2
rule: q1 A -> q0 A @ 1
rule: q0 B -> q0 B @ 1
rule: q1 B -> q1 - @ 1
";

fn system() -> &'static Qpds {
    static SYS: OnceLock<Qpds> = OnceLock::new();
    SYS.get_or_init(|| parse_system(SYSTEM).expect("fixture parses"))
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_rational(text);
    let sys = system();
    if let Ok(c) = sys.parse_configuration(text) {
        assert_eq!(sys.parse_configuration(&sys.render_configuration(&c)).unwrap(), c);
        let _ = sys.successors(&c);
    }
});
