#![no_main]

use libfuzzer_sys::fuzz_target;
use qpmc_core::logic::{parse_formula, parse_formula_file, render_formula};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = parse_formula(text) {
        let again = parse_formula(&render_formula(&f)).expect("rendered formula parses");
        assert_eq!(again, f);
    }
    let _ = parse_formula_file(text);
});
