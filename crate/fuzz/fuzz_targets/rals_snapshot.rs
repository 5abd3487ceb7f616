#![no_main]

use coop_cdma::adaptive::RalsSnapshot;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(snap) = RalsSnapshot::parse(text) {
        let json = snap.to_json().expect("valid snapshot must serialize");
        assert_eq!(RalsSnapshot::parse(&json).expect("round trip"), snap);
    }
});
