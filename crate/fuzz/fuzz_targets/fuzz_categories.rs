#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(defs) = scimap_cli::ingest::parse_categories_str(text) {
            let _ = scimap::topics::CategoryConfig::new(defs, Vec::new());
        }
    }
});
