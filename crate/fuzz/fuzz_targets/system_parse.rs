#![no_main]

use libfuzzer_sys::fuzz_target;
use qpmc_core::qpds::{parse_system, render_system, validate_system};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(sys) = parse_system(text) {
        let _ = validate_system(&sys, true);
        let rendered = render_system(&sys);
        let back = parse_system(&rendered).expect("rendered system parses");
        assert_eq!(render_system(&back), rendered);
    }
});
