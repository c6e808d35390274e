#![no_main]

use elastica::harness::{grid_from_csv, grid_to_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(grid) = grid_from_csv(text) {
            let _ = grid_from_csv(&grid_to_csv(&grid));
        }
    }
});
