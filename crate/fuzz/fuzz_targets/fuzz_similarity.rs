#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rows) = scimap_cli::ingest::parse_similarity_str(text) {
            let docs: Vec<&str> = rows
                .iter()
                .flat_map(|(a, b, _)| [a.as_str(), b.as_str()])
                .collect();
            let _ = scimap::network::build_similarity(
                docs,
                rows.iter().map(|(a, b, s)| (a.as_str(), b.as_str(), *s)),
                20,
            );
        }
    }
});
