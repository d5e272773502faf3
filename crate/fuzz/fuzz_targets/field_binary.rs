//! Binary field decoding must never panic on arbitrary bytes, and any
//! accepted field must round-trip bitwise through the encoder.

#![no_main]

use fnparab::field_io;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(field) = field_io::decode_binary(data) {
        let encoded = field_io::encode_binary(&field);
        let again = field_io::decode_binary(&encoded).expect("re-encoded field decodes");
        assert_eq!(field.grid(), again.grid());
        let same = field
            .values()
            .iter()
            .zip(again.values())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same, "values changed across an encode round trip");
    }
});
