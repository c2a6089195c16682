//! Replays the fuzz corpus and throws generated junk at the file parsers.

use std::fs;
use std::path::Path;

use decoherence::io::{parse_channel, parse_density, parse_kraus_ops, parse_matrix, write_matrix};
use proptest::prelude::*;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn corpus_seeds_behave() {
    for (name, text) in seeds("matrix_file") {
        if let Ok(m) = parse_matrix(&text) {
            assert_eq!(parse_matrix(&write_matrix(&m)).unwrap(), m, "{name}");
        }
    }
    for (name, text) in seeds("density_file") {
        parse_density(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    let mut channels = 0;
    for (_, text) in seeds("channel_file") {
        parse_kraus_ops(&text).unwrap();
        channels += parse_channel(&text).is_ok() as usize;
    }
    assert_eq!(channels, 3);
}

fn junk() -> impl Strategy<Value = String> {
    let token = prop_oneof![
        Just("kraus".to_string()),
        Just("#".to_string()),
        Just("\n".to_string()),
        Just(" ".to_string()),
        Just("nan".to_string()),
        Just("-inf".to_string()),
        Just("1e308".to_string()),
        Just("18446744073709551615".to_string()),
        (0u32..5).prop_map(|n| n.to_string()),
        any::<f64>().prop_map(|x| x.to_string()),
        "[ -~]{0,6}",
    ];
    prop::collection::vec(token, 0..40).prop_map(|t| t.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn parsers_never_panic(text in junk()) {
        let _ = parse_matrix(&text);
        let _ = parse_density(&text);
        let _ = parse_channel(&text);
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
        let _ = parse_matrix(&text);
        let _ = parse_channel(&text);
    }
}
