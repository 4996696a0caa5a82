#![no_main]

use dfdg::terrain::{format_grid, parse_grid};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = parse_grid(text) {
        // whatever parses must survive a write/read cycle
        let again = parse_grid(&format_grid(&grid)).expect("formatted grid parses");
        assert_eq!(grid, again);
    }
});
