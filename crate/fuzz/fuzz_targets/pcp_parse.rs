#![no_main]

use libfuzzer_sys::fuzz_target;
use qpmc_core::pcp::{parse_pcp, render_pcp};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(inst) = parse_pcp(text) {
        assert_eq!(parse_pcp(&render_pcp(&inst)).expect("rendered instance parses"), inst);
    }
});
