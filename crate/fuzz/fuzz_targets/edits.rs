#![no_main]

use libfuzzer_sys::fuzz_target;
use qgen_core::{apply_edits, validate_custom_span, TextEdit};

// first line: text; following lines: "start end replacement"
fuzz_target!(|input: &str| {
    let mut lines = input.lines();
    let Some(text) = lines.next() else { return };
    let edits: Vec<TextEdit> = lines
        .filter_map(|l| {
            let mut parts = l.splitn(3, ' ');
            let s = parts.next()?.parse().ok()?;
            let e = parts.next()?.parse().ok()?;
            Some(TextEdit::new(s, e, parts.next().unwrap_or("").to_owned()))
        })
        .collect();
    let _ = apply_edits(text, &edits);
    if let (Ok(p), Some(e)) = (qgen_core::tokenize(text), edits.first()) {
        if let Ok(span) = validate_custom_span(&p, (e.start, e.end)) {
            assert!(span.token_range.0 <= span.token_range.1);
        }
    }
});
