#![no_main]

use libfuzzer_sys::fuzz_target;
use qgen_model::squad::{filter_examples, parse_squad, qg_examples};

fuzz_target!(|bytes: &[u8]| {
    if let Ok(file) = parse_squad(bytes) {
        let _ = qg_examples(&file, 64);
        let _ = filter_examples(&file, 64);
    }
});
