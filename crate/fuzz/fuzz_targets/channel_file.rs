#![no_main]

use decoherence::channel::{channels_equal, choi_to_kraus, inspect_kraus, CANONICAL_TOL};
use decoherence::io::{parse_channel, parse_kraus_ops};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ops) = parse_kraus_ops(text) {
        if ops.len() * ops[0].rows() <= 64 {
            let _ = inspect_kraus(ops);
        }
    }
    if let Ok(ch) = parse_channel(text) {
        if ch.dim() <= 4 && ch.len() <= 16 {
            if let Ok(back) = choi_to_kraus(&ch.choi(), CANONICAL_TOL) {
                assert!(back.len() <= ch.dim() * ch.dim());
                let _ = channels_equal(&ch, &back, 1e-8);
            }
        }
    }
});
