#![no_main]

use decoherence_cli::config::Config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = Config::parse(text) {
        let rendered: String = cfg
            .keys()
            .map(|k| format!("{k} = {}\n", cfg.raw(k).unwrap()))
            .collect();
        assert_eq!(
            Config::parse(&rendered).expect("rendered config parses"),
            cfg
        );
    }
});
