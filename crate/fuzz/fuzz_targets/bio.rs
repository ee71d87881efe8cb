#![no_main]

use libfuzzer_sys::fuzz_target;
use qgen_core::{decode_bio, BioTag, BioTaggedInput};

fuzz_target!(|bytes: &[u8]| {
    let tags: Vec<BioTag> = bytes.iter().map(|b| [BioTag::B, BioTag::I, BioTag::O][(*b % 3) as usize]).collect();
    let tokens = (0..tags.len()).map(|i| i.to_string()).collect();
    let tagged = BioTaggedInput { tokens, tags };
    if let Ok((first, last)) = decode_bio(&tagged) {
        let again = BioTaggedInput::from_token_range(tagged.tokens.clone(), first, last).unwrap();
        assert_eq!(again.tags, tagged.tags);
    }
});
