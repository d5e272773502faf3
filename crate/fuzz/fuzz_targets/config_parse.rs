//! Parsing arbitrary text as a run configuration must never panic, and any
//! accepted config must survive validation for every mode without panicking.

#![no_main]

use fnparab_harness::config::{Mode, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = RunConfig::parse(text) {
        for mode in [
            Mode::Evolve,
            Mode::Eigen,
            Mode::Certify,
            Mode::Sweep,
            Mode::Selfcheck,
        ] {
            let _ = cfg.validate_for(mode);
        }
        let _ = cfg.step_control();
    }
});
