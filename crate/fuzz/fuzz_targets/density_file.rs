#![no_main]

use decoherence::io::parse_density;
use decoherence::lindblad::{build_model, evolve, ModelSpec, Schedule};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(rho) = parse_density(text) else {
        return;
    };
    assert!(rho.min_eigenvalue() >= -1e-9);
    assert!(rho.purity() <= 1.0 + 1e-9);
    // accepted qubit states must survive a short, well-resolved evolution
    if rho.dim() == 2 {
        let l = build_model(&ModelSpec::bloch(1.0, 0.5, 0.5)).unwrap();
        evolve(&l, &rho, &Schedule::new(0.05, 0.01), &[]).expect("valid state evolves");
    }
});
