#![no_main]

use coop_cdma::signal::codes::format_codes;
use coop_cdma::signal::parse_codes;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(codes) = parse_codes(text) {
        let again = parse_codes(&format_codes(&codes)).expect("formatted codes must parse");
        assert_eq!(again, codes);
    }
});
