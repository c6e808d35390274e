#![no_main]

use elastica::harness::SceneConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = SceneConfig::from_json(text) {
            let _ = cfg.validate();
            let _ = cfg.to_json();
        }
    }
});
