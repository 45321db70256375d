#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rows) = scimap_cli::ingest::parse_citations_str(text) {
            let core: Vec<&str> = rows.iter().map(|(a, _)| a.as_str()).collect();
            let _ = scimap::network::build_extended_citation(
                core,
                rows.iter().map(|(a, b)| (a.as_str(), b.as_str())),
            );
        }
    }
});
