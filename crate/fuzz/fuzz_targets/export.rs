#![no_main]

use libfuzzer_sys::fuzz_target;
use qgen_service::export::{export_text, ExportDocument};

fuzz_target!(|bytes: &[u8]| {
    if let Ok(doc) = serde_json::from_slice::<ExportDocument>(bytes) {
        let _ = export_text(&doc);
        let again: ExportDocument = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(again.facets.len(), doc.facets.len());
    }
});
