#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(links) = scimap_cli::ingest::parse_links_str(text) {
            // Accepted rows must also survive network construction.
            let _ = scimap::network::build_pure(
                links.iter().map(|(e, d)| (e.as_str(), d.as_str())),
            );
        }
    }
});
