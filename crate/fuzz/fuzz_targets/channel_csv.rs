#![no_main]

use coop_cdma::signal::ChannelState;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(state) = ChannelState::read_csv(data) {
        let mut out = Vec::new();
        state.write_csv(&mut out).expect("parsed channels must serialize");
        ChannelState::read_csv(out.as_slice()).expect("written channels must parse");
    }
});
