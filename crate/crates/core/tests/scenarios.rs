use vlcsim::mcs::{mcs, FrameSpec};
use vlcsim::scenario::output::{
    AREA_HEADER, CSI_HEADER, HANDOVER_HEADER, MRC_POINT_HEADER, ORACLE_HEADER, SISO_HEADER,
    TIMELINE_HEADER,
};
use vlcsim::scenario::{
    classify_area, presets, run_blockage_timeline, run_scenario, run_siso_sweep, Area, Scenario,
    ScenarioParams,
};
use vlcsim::units::is_no_signal;

fn header_of(csv: &[u8]) -> String {
    String::from_utf8_lossy(csv)
        .lines()
        .next()
        .unwrap_or_default()
        .to_string()
}

fn quick_params(seed: u64) -> ScenarioParams {
    let mut p = ScenarioParams::with_seed(seed);
    p.set("frames", "200").unwrap();
    p
}

#[test]
fn every_scenario_renders_its_documented_header() {
    let headers = [
        (Scenario::SisoSweep, SISO_HEADER),
        (Scenario::BlockageTimeline, TIMELINE_HEADER),
        (Scenario::MrcFsrPoint, MRC_POINT_HEADER),
        (Scenario::HandoverSweep, HANDOVER_HEADER),
        (Scenario::MimoAreaGrid, AREA_HEADER),
        (Scenario::CsiReport, CSI_HEADER),
        (Scenario::OracleCheck, ORACLE_HEADER),
    ];
    for (scenario, header) in headers {
        let scene = presets::preset_scene(scenario.default_preset()).unwrap();
        let mut params = quick_params(1);
        if scenario == Scenario::OracleCheck {
            params.set("frames", "20").unwrap();
        }
        let out = run_scenario(scenario, &scene, &params).unwrap();
        assert_eq!(header_of(&out.csv), header.join(","), "{scenario}");
        assert_eq!(out.summary["scenario"], scenario.name());
        assert_eq!(out.summary["config_hash"].as_str().unwrap().len(), 64);
        let rows = String::from_utf8_lossy(&out.csv).lines().count() - 1;
        assert_eq!(out.summary["aggregates"]["rows"], rows, "{scenario}");
    }
}

#[test]
fn outputs_repeat_byte_for_byte() {
    let scene = presets::mimo_area_scene();
    let a = run_scenario(Scenario::MimoAreaGrid, &scene, &quick_params(4)).unwrap();
    let b = run_scenario(Scenario::MimoAreaGrid, &scene, &quick_params(4)).unwrap();
    assert_eq!(a, b);
    let c = run_scenario(Scenario::MimoAreaGrid, &scene, &quick_params(5)).unwrap();
    assert_ne!(a.summary["config_hash"], c.summary["config_hash"]);
}

#[test]
fn written_files() {
    let dir = tempfile::tempdir().unwrap();
    let scene = presets::blockage_scene();
    let out = run_scenario(
        Scenario::BlockageTimeline,
        &scene,
        &ScenarioParams::with_seed(7),
    )
    .unwrap();
    let paths = out.write_to(dir.path()).unwrap();
    assert_eq!(paths[0].file_name().unwrap(), "blockage-timeline.csv");
    let text = std::fs::read_to_string(&paths[0]).unwrap();
    assert_eq!(text.lines().count(), 351);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&paths[1]).unwrap()).unwrap();
    assert_eq!(summary["aggregates"]["fsr"], 1.0);
}

#[test]
fn blocked_chain_is_written_as_no_signal() {
    let out = run_scenario(
        Scenario::BlockageTimeline,
        &presets::blockage_scene(),
        &ScenarioParams::with_seed(7),
    )
    .unwrap();
    let text = String::from_utf8(out.csv).unwrap();
    let row_150 = text.lines().nth(151).unwrap();
    assert!(row_150.starts_with("150,"));
    assert_eq!(row_150.split(',').nth(2), Some("-inf"));
}

#[test]
fn siso_examples() {
    let scene = presets::siso_scene();
    let rows = run_siso_sweep(
        &scene,
        &(0..=7).collect::<Vec<_>>(),
        &presets::siso_distances(),
        &FrameSpec::default(),
        9,
    )
    .unwrap();
    assert!(rows.windows(2).all(|w| w[0].rssi_dbm <= w[1].rssi_dbm));
    for r in rows
        .iter()
        .filter(|r| r.mcs_index == 0 && r.rssi_dbm >= -55.0)
    {
        assert!(r.fsr_measured >= 0.99, "{r:?}");
    }
    for r in rows.iter().filter(|r| r.snr_db <= 0.0) {
        assert!(r.fsr_measured <= 0.01, "{r:?}");
    }
}

#[test]
fn clear_frames_gain_three_db() {
    let scene = presets::blockage_scene();
    let traces =
        run_blockage_timeline(&scene, 350, mcs(0).unwrap(), &FrameSpec::default(), 7).unwrap();
    for t in &traces[..100] {
        let gain = t.combined_rssi_dbm - t.per_chain_rssi_dbm[0];
        assert!((gain - 3.0103).abs() < 1e-3);
    }
    for t in &traces[100..=180] {
        assert!(is_no_signal(t.per_chain_rssi_dbm[1]));
        assert!((t.combined_rssi_dbm - t.per_chain_rssi_dbm[0]).abs() < 1e-12);
    }
    for t in &traces[181..200] {
        assert!(!t.per_chain_rssi_dbm.iter().any(|&r| is_no_signal(r)));
    }
}

#[test]
fn area_one_and_three_hear_one_transmitter() {
    let scene = presets::mimo_area_scene();
    let single = |id: &str| {
        let s = scene.with_receivers(&[id]).unwrap();
        vlcsim::channel_matrix(&s, 0, &[])
            .unwrap()
            .path_gains()
            .clone()
    };
    assert_eq!(classify_area(&scene, "R1").unwrap(), Area::One);
    let g = single("R1");
    assert!(g[(0, 0)] > 0.0 && g[(0, 1)] == 0.0);
    assert_eq!(classify_area(&scene, "R3").unwrap(), Area::Three);
    let g = single("R3");
    assert!(g[(0, 0)] == 0.0 && g[(0, 1)] > 0.0);
}

#[test]
fn noise_floor_override_applies() {
    let mut params = ScenarioParams::with_seed(7);
    params.set("noise_floor_dbm", "-40").unwrap();
    let out = run_scenario(
        Scenario::BlockageTimeline,
        &presets::blockage_scene(),
        &params,
    )
    .unwrap();
    // -48 dBm paths are now 8 dB below the floor: nothing gets through.
    assert_eq!(out.summary["aggregates"]["fsr"], 0.0);
}
