#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rows) = scimap_cli::ingest::parse_tree_str(text) {
            let _ = scimap::topics::TopicTree::from_rows(rows);
        }
    }
});
