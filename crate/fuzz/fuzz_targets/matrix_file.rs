#![no_main]

use decoherence::io::{parse_matrix, write_matrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = parse_matrix(text) {
        assert!(m.is_finite());
        let again = parse_matrix(&write_matrix(&m)).expect("written matrices parse");
        assert_eq!(again, m);
    }
});
