#![no_main]

use libfuzzer_sys::fuzz_target;
use lindsim::pauli::PauliString;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = PauliString::parse(text) {
            // Round trip must be exact for accepted labels.
            assert_eq!(p.label(), text);
            assert_eq!(p.n(), text.len());
        }
    }
});
