#![no_main]

use coop_harness::ExperimentSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = ExperimentSpec::parse(text, &[]) {
        for i in 0..spec.points() {
            let _ = spec.config_at(i);
        }
    }
});
