use coop_cdma::adaptive::RalsSnapshot;
use coop_cdma::signal::codes::format_codes;
use coop_cdma::signal::{generate_channels, parse_codes, ChannelState, SpreadingCode};
use coop_cdma::NetworkConfig;
use proptest::prelude::*;

proptest! {
    #[test]
    fn codes_round_trip(signs in prop::collection::vec(prop::collection::vec(prop::bool::ANY, 16), 1..8)) {
        let codes: Vec<SpreadingCode> = signs
            .iter()
            .map(|s| SpreadingCode::from_signs(&s.iter().map(|&b| if b { 1 } else { -1 }).collect::<Vec<_>>()).unwrap())
            .collect();
        prop_assert_eq!(parse_codes(&format_codes(&codes)).unwrap(), codes);
    }

    #[test]
    fn channels_round_trip(users in 1usize..5, paths in 1usize..5, relays in 0usize..3, seed in any::<u64>()) {
        let cfg = NetworkConfig { users, paths, relays, group_size: users, ..NetworkConfig::default() };
        let state = generate_channels(&cfg, seed);
        let mut out = Vec::new();
        state.write_csv(&mut out).unwrap();
        prop_assert_eq!(ChannelState::read_csv(out.as_slice()).unwrap(), state);
    }

    #[test]
    fn parsers_reject_garbage_without_panicking(text in "\\PC{0,200}") {
        let _ = parse_codes(&text);
        let _ = ChannelState::read_csv(text.as_bytes());
        let _ = RalsSnapshot::parse(&text);
    }
}

#[test]
fn truncated_channel_file_is_rejected() {
    let cfg = NetworkConfig { users: 2, paths: 3, relays: 1, group_size: 2, ..NetworkConfig::default() };
    let mut out = Vec::new();
    generate_channels(&cfg, 5).write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let cut: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
    assert!(ChannelState::read_csv(cut.as_bytes()).is_err());
}
