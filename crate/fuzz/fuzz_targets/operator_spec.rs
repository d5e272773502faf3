//! Operator spec strings: parsing must never panic, and any accepted
//! operator must round-trip through its own description.

#![no_main]

use fnparab_harness::config::parse_operator_spec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&first, rest)) = data.split_first() else {
        return;
    };
    let dim = 1 + (first as usize) % 3;
    let Ok(spec) = std::str::from_utf8(rest) else {
        return;
    };
    if let Ok(op) = parse_operator_spec(spec, dim) {
        let printed = op.describe();
        let reparsed = parse_operator_spec(&printed, dim)
            .unwrap_or_else(|e| panic!("description {printed:?} does not re-parse: {e}"));
        assert_eq!(
            reparsed.describe(),
            printed,
            "description changed across a parse round trip"
        );
    }
});
