use std::fs;
use std::path::Path;

use decoherence_cli::config::Config;

#[test]
fn corpus_configs_parse_or_fail_cleanly() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/scenario_config");
    let mut parsed = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let text = fs::read_to_string(entry.unwrap().path()).unwrap();
        if let Ok(cfg) = Config::parse(&text) {
            parsed += 1;
            let rendered: String = cfg
                .keys()
                .map(|k| format!("{k} = {}\n", cfg.raw(k).unwrap()))
                .collect();
            assert_eq!(Config::parse(&rendered).unwrap(), cfg);
        }
    }
    assert_eq!(parsed, 9);
}
