use coop_cdma::NetworkConfig;
use coop_harness::experiment::unique_labels;
use coop_harness::packet::scheme_network;
use coop_harness::{run_experiment, run_packet, run_point, Axis, ExperimentSpec, ReceiverKind, Scheme, SimSettings, Sweep, Tally, Variant};

fn small(users: usize, snr_db: f64) -> NetworkConfig {
    let mut cfg = NetworkConfig {
        users,
        packet_len: 400,
        training_len: 150,
        group_size: users.min(2),
        ..NetworkConfig::default()
    };
    cfg.set_snr_db(snr_db);
    cfg.group_power = cfg.nominal_group_power();
    cfg
}

fn small_spec(trials: usize) -> ExperimentSpec {
    let mut spec = ExperimentSpec {
        trials,
        timing: false,
        schemes: vec![Scheme::cis()],
        ..ExperimentSpec::default()
    };
    spec.network.users = 4;
    spec.network.packet_len = 400;
    spec.network.training_len = 150;
    spec.network.group_size = 2;
    spec
}

#[test]
fn same_seed_gives_identical_error_flags() {
    let cfg = small(4, 8.0);
    for scheme in [Scheme::ncis(), Scheme::cis(), Scheme::jpais_gbc(2), Scheme::jpais_mmse()] {
        let a = run_packet(&cfg, &scheme, &SimSettings::default(), 99).unwrap();
        let b = run_packet(&cfg, &scheme, &SimSettings::default(), 99).unwrap();
        assert_eq!(a.bit_errors, b.bit_errors, "{scheme}");
        assert_eq!(a.diagnostics, b.diagnostics, "{scheme}");
    }
}

#[test]
fn noise_free_single_user_oracle_is_error_free() {
    let mut cfg = small(1, 12.0);
    cfg.noise_var = 0.0;
    for variant in [Variant::Ncis, Variant::Cis] {
        let scheme = Scheme::new(variant, ReceiverKind::OracleMmse);
        let out = run_packet(&cfg, &scheme, &SimSettings::default(), 5).unwrap();
        assert_eq!(out.tally().bit_errors, 0, "{scheme}");
        assert_eq!(out.diagnostics.relay_symbol_errors, 0);
    }
    let out = run_packet(&cfg, &Scheme::jpais_mmse(), &SimSettings::default(), 5).unwrap();
    assert_eq!(out.tally().bit_errors, 0);
}

#[test]
fn genie_relays_do_not_hurt() {
    let cfg = NetworkConfig {
        packet_len: 500,
        ..small(8, 15.0)
    };
    let genie = SimSettings {
        genie_relays: true,
        ..SimSettings::default()
    };
    let (mut real, mut ideal) = (Tally::default(), Tally::default());
    for seed in 0..100 {
        real += run_packet(&cfg, &Scheme::cis(), &SimSettings::default(), seed).unwrap().tally();
        ideal += run_packet(&cfg, &Scheme::cis(), &genie, seed).unwrap().tally();
    }
    assert!(ideal.bit_errors <= real.bit_errors, "genie {} real {}", ideal.bit_errors, real.bit_errors);
}

#[test]
fn training_symbols_are_excluded() {
    let cfg = small(3, 10.0);
    let out = run_packet(&cfg, &Scheme::cis(), &SimSettings::default(), 1).unwrap();
    let t = out.tally();
    assert_eq!(t.bits, (400 - 150) * 2 * 3);
    assert_eq!(t.symbols, (400 - 150) * 3);
}

#[test]
fn single_trial_matches_run_packet() {
    let spec = small_spec(1);
    let records = run_point(&spec, &Scheme::cis(), 0).unwrap();
    let out = run_packet(&spec.config_at(0), &Scheme::cis(), &spec.sim, coop_harness::packet_seed(spec.seed, 0, 0)).unwrap();
    let t = out.tally();
    assert_eq!(records.len(), 1);
    assert_eq!((records[0].bit_errors, records[0].bits), (t.bit_errors, t.bits));
    assert_eq!(records[0].packets, 1);
}

#[test]
fn cooperative_schemes_spend_equal_power() {
    let cfg = small(4, 10.0);
    let settings = SimSettings::default();
    for seed in 0..3 {
        let powers: Vec<f64> = [Scheme::cis(), Scheme::jpais_gbc(2), Scheme::jpais_gbc(4), Scheme::jpais_mmse()]
            .iter()
            .map(|s| run_packet(&cfg, s, &settings, seed).unwrap().diagnostics.mean_power)
            .collect();
        for p in &powers[1..] {
            assert!((p - powers[0]).abs() <= 1e-10 * powers[0], "{powers:?}");
        }
    }
}

#[test]
fn ncis_drops_the_relays_only() {
    let cfg = small(4, 10.0);
    let n = scheme_network(&cfg, &Scheme::ncis());
    assert_eq!(n.relays, 0);
    assert_eq!(n.users, cfg.users);
}

#[test]
fn quadrupling_trials_halves_the_interval() {
    let spec = small_spec(10);
    let narrow = ExperimentSpec { trials: 40, ..spec.clone() };
    let w = run_point(&spec, &Scheme::cis(), 0).unwrap()[0].half_width;
    let w4 = run_point(&narrow, &Scheme::cis(), 0).unwrap()[0].half_width;
    let ratio = w / w4;
    assert!((ratio - 2.0).abs() <= 0.5, "ratio {ratio}");
}

#[test]
fn ber_does_not_grow_with_snr() {
    let spec = ExperimentSpec {
        sweep: Sweep {
            axis: Axis::SnrDb,
            values: vec![0.0, 4.0, 8.0, 12.0, 16.0],
        },
        ..small_spec(8)
    };
    let records = run_experiment(&spec, None).unwrap();
    for pair in records.windows(2) {
        assert!(pair[1].ber <= pair[0].ber || pair[1].ber_low <= pair[0].ber_high, "{} then {}", pair[0].ber, pair[1].ber);
    }
}

#[test]
fn repeated_scheme_gives_identical_curves() {
    let spec = ExperimentSpec {
        schemes: vec![Scheme::cis(), Scheme::cis()],
        ..small_spec(3)
    };
    assert_eq!(unique_labels(&spec.schemes), vec!["cis_rls", "cis_rls_2"]);
    let dir = std::env::temp_dir().join(format!("coopsim-repeat-{}", std::process::id()));
    let records = run_experiment(&spec, Some(&dir)).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].bit_errors, records[1].bit_errors);
    let wide = std::fs::read_to_string(dir.join("comparison.csv")).unwrap();
    assert!(wide.lines().next().unwrap().contains("cis_rls_2_ber"));
    let again = std::fs::read_to_string(dir.join("cis_rls.csv")).unwrap();
    run_experiment(&spec, Some(&dir)).unwrap();
    assert_eq!(again, std::fs::read_to_string(dir.join("cis_rls.csv")).unwrap());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn symbol_windows_partition_the_packet() {
    let spec = ExperimentSpec {
        sweep: Sweep {
            axis: Axis::Symbols,
            values: vec![100.0, 250.0, 400.0],
        },
        ..small_spec(2)
    };
    let records = run_experiment(&spec, None).unwrap();
    let bits: u64 = records.iter().map(|r| r.bits).sum();
    assert_eq!(bits, 2 * 400 * 2 * 4);
    assert_eq!(records[1].bits, 2 * 150 * 2 * 4);
}
