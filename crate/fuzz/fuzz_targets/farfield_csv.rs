#![no_main]

use elastica::harness::{farfield_from_csv, farfield_to_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(ff) = farfield_from_csv(text) {
            let again = farfield_from_csv(&farfield_to_csv(&ff)).expect("written far field reloads");
            assert_eq!(again.len(), ff.len());
        }
    }
});
