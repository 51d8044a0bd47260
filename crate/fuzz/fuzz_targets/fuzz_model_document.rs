#![no_main]

use libfuzzer_sys::fuzz_target;
use lindsim::model::load_model;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = load_model(text) {
            // Accepted models must have coherent derived scalars.
            assert!(m.n() >= 1);
            assert!(m.alpha0() >= 0.0);
            assert!(m.alpha().is_finite());
            assert!(m.pauli_norm().is_finite());
        }
    }
});
