#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = scimap_cli::report::parse_topic_profiles(text);
        let _ = scimap_cli::report::parse_category_profiles(text);
        let _ = scimap_cli::report::parse_summary(text);
    }
});
