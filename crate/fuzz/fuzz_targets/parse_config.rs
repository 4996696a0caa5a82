#![no_main]

use dfdg::harness::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        let _ = cfg.echo("fuzz");
        let _ = cfg.h_levels();
        let _ = cfg.validate();
    }
});
