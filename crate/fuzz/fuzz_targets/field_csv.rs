//! CSV field decoding must never panic on arbitrary text, and any accepted
//! field must round-trip exactly (values print in shortest form).

#![no_main]

use fnparab::field_io;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(field) = field_io::decode_csv(text) {
        let encoded = field_io::encode_csv(&field);
        let again = field_io::decode_csv(&encoded).expect("re-encoded field decodes");
        assert_eq!(field.grid(), again.grid());
        let same = field
            .values()
            .iter()
            .zip(again.values())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same, "values changed across an encode round trip");
    }
});
