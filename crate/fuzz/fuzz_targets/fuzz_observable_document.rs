#![no_main]

use libfuzzer_sys::fuzz_target;
use lindsim::cli::parse_observable_document;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(o) = parse_observable_document(text, None) {
            // Real Pauli sums are Hermitian by construction.
            assert!((&o - o.adjoint()).norm() < 1e-9);
        }
    }
});
