#![no_main]

use libfuzzer_sys::fuzz_target;
use qgen_model::Checkpoint;

fuzz_target!(|bytes: &[u8]| {
    if let Ok(ckpt) = Checkpoint::from_bytes(bytes) {
        let again = Checkpoint::from_bytes(&ckpt.to_bytes().unwrap()).unwrap();
        assert_eq!(again.params.len(), ckpt.params.len());
    }
});
