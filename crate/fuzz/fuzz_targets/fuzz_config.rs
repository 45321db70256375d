#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(partial) = scimap_cli::config::parse_config_str(text) {
            let _ = partial.resolve();
        }
    }
});
