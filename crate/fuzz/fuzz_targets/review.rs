#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let len = text.chars().count();
    if let Ok(flags) = qgen_core::review_paragraph(text) {
        for f in flags {
            assert!(f.char_range.0 < f.char_range.1 && f.char_range.1 <= len);
        }
    }
    if let Ok(p) = qgen_core::tokenize(text) {
        assert_eq!(p.tokens.len(), p.token_char_offsets.len());
        for (tok, &(s, e)) in p.tokens.iter().zip(&p.token_char_offsets) {
            assert_eq!(p.slice(s, e), tok);
        }
    }
});
