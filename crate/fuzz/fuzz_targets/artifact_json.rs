//! Deserializing run artifacts from arbitrary JSON must never panic, and
//! anything accepted must re-serialize.

#![no_main]

use fnparab::barrier::BarrierCertificate;
use fnparab_harness::manifest::Manifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cert) = serde_json::from_slice::<BarrierCertificate>(data) {
        serde_json::to_string(&cert).expect("certificate re-serializes");
    }
    if let Ok(manifest) = serde_json::from_slice::<Manifest>(data) {
        serde_json::to_string(&manifest).expect("manifest re-serializes");
    }
});
