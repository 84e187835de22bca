use std::sync::Arc;

use proptest::prelude::*;
use radiolink_core::fading::RicianParameters;
use radiolink_core::linksim::{
    ber_stage, generate_packets, read_records_csv, read_summary_csv, reception_decision,
    run_link_simulation, snr_stage, watts_to_dbm, AntennaConfig, PropagationModel, RadioConfig,
    Scenario, TrafficConfig, Verdict,
};
use radiolink_core::proploss::{
    AtmosphereParameters, GroundParameters, ScenarioLosses, TwoRayForm,
};
use radiolink_core::terrain::{LinkGeometry, Polarization, TerrainProfile};

fn model(choice: u8, length: f64) -> PropagationModel {
    match choice % 4 {
        0 => PropagationModel::FreeSpace,
        1 => PropagationModel::TwoRay(TwoRayForm::Standard),
        2 => PropagationModel::LosTwoRay {
            ground: GroundParameters::AVERAGE,
        },
        _ => PropagationModel::Tirem {
            profile: Arc::new(
                TerrainProfile::from_samples(&[0.0, length / 2.0, length], &[0.0, 120.0, 0.0])
                    .unwrap(),
            ),
            ground: GroundParameters::AVERAGE,
            atmosphere: AtmosphereParameters::default(),
            extra: ScenarioLosses::default(),
        },
    }
}

fn scenario(tx_power_w: f64, distance: f64, choice: u8, fading: bool) -> Scenario {
    Scenario {
        traffic: TrafficConfig::default(),
        radio: RadioConfig {
            tx_power_w,
            ..RadioConfig::default()
        },
        antennas: AntennaConfig::default(),
        geometry: LinkGeometry::new(25.0, 25.0, 905.0, Polarization::Vertical, distance).unwrap(),
        model: model(choice, distance),
        fading: fading.then(RicianParameters::default),
    }
}

#[test]
fn default_traffic_emits_ninety_packets() {
    let t = generate_packets(&TrafficConfig::default());
    assert_eq!(t.len(), 90);
    assert_eq!(t[0], 10.0);
    assert_eq!(t[89], 99.0);
}

#[test]
fn strong_link_delivers_everything() {
    let stats = run_link_simulation(&scenario(1.0, 1000.0, 0, false), 0).unwrap();
    assert_eq!(
        (
            stats.packets_sent,
            stats.packets_received,
            stats.packets_dropped
        ),
        (90, 90, 0)
    );
    assert_eq!(stats.throughput_bps, 921.6);
}

#[test]
fn summary_and_records_round_trip() {
    let stats = run_link_simulation(&scenario(1e-11, 20_000.0, 0, true), 8).unwrap();
    let mut bytes = Vec::new();
    stats.write_records_csv(&mut bytes).unwrap();
    let rows = read_records_csv(bytes.as_slice()).unwrap();
    assert_eq!(rows.len(), stats.records.len());
    for (row, rec) in rows.iter().zip(&stats.records) {
        assert_eq!(row.verdict, rec.verdict);
        assert_eq!(row.ber, rec.ber);
    }
    let mut bytes = Vec::new();
    stats.write_summary_csv(&mut bytes).unwrap();
    assert_eq!(read_summary_csv(bytes.as_slice()).unwrap(), stats.summary());
}

#[test]
fn missing_transmit_power_is_a_config_error() {
    let s = scenario(f64::NAN, 1000.0, 0, false);
    assert!(matches!(
        run_link_simulation(&s, 0),
        Err(radiolink_core::Error::Config(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_packet_is_received_or_dropped(
        log_p in -16.0f64..0.0,
        distance in 100.0f64..50_000.0,
        choice in 0u8..4,
        fading in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let stats = run_link_simulation(&scenario(10f64.powf(log_p), distance, choice, fading), seed).unwrap();
        prop_assert_eq!(stats.packets_sent, 90);
        prop_assert_eq!(stats.packets_sent, stats.packets_received + stats.packets_dropped);
        let want = stats.packets_received as f64 * 1024.0 / 100.0;
        prop_assert!((stats.throughput_bps - want).abs() < 1e-9);
    }

    #[test]
    fn more_power_never_loses_packets(
        log_p in -16.0f64..-1.0,
        boost in 0.0f64..3.0,
        distance in 100.0f64..50_000.0,
        choice in 0u8..4,
        fading in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let weak = run_link_simulation(&scenario(10f64.powf(log_p), distance, choice, fading), seed).unwrap();
        let strong = run_link_simulation(&scenario(10f64.powf(log_p + boost), distance, choice, fading), seed).unwrap();
        prop_assert!(strong.packets_received >= weak.packets_received);
    }

    #[test]
    fn seed_is_irrelevant_without_fading(
        log_p in -16.0f64..0.0,
        distance in 100.0f64..50_000.0,
        choice in 0u8..4,
        s1 in any::<u64>(),
        s2 in any::<u64>(),
    ) {
        let sc = scenario(10f64.powf(log_p), distance, choice, false);
        prop_assert_eq!(run_link_simulation(&sc, s1).unwrap(), run_link_simulation(&sc, s2).unwrap());
    }

    #[test]
    fn records_recompose_from_the_stages(
        log_p in -16.0f64..0.0,
        distance in 100.0f64..50_000.0,
        choice in 0u8..4,
        seed in any::<u64>(),
    ) {
        let sc = scenario(10f64.powf(log_p), distance, choice, true);
        let stats = run_link_simulation(&sc, seed).unwrap();
        for rec in &stats.records {
            let snr = snr_stage(rec.rx_power_w, &sc.radio).unwrap();
            let ber = ber_stage(snr, &sc.radio).unwrap();
            prop_assert_eq!(rec.snr_db, snr);
            prop_assert_eq!(rec.ber, ber);
            prop_assert_eq!(rec.verdict, reception_decision(ber, &sc.radio));
            prop_assert_eq!(rec.rx_power_dbm, watts_to_dbm(rec.rx_power_w));
            prop_assert!(rec.verdict != Verdict::Invalid);
        }
    }
}
