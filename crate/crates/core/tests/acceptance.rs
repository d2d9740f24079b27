//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails or overruns its time budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vlcsim::channel::{channel_matrix, los_gain, FrontEnd};
use vlcsim::grid::{Bandwidth, SubcarrierGrid};
use vlcsim::mcs::{fsr, mcs, mcs_table, phy_rate, FrameSpec};
use vlcsim::mimo::mrc_combine;
use vlcsim::oracle::Oracle;
use vlcsim::scenario::{
    first_reliable_rssi, handover_grid, oracle_check, presets, report_csi, report_csi_response,
    run_blockage_timeline, run_handover_sweep, run_mimo_area_grid, run_mrc_fsr_point, run_scenario,
    run_siso_sweep, snrs_from_scene, Scenario, ScenarioParams,
};
use vlcsim::ChannelMatrix;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mrc_gain() -> Outcome {
    let snr = 12.5;
    let one = mrc_combine(&[snr]).map_err(|e| e.to_string())?;
    let two = mrc_combine(&[snr, snr]).map_err(|e| e.to_string())?;
    let gain = two.db - one.db;
    check((gain - 3.01).abs() <= 0.01, format!("gain {gain:.4} dB"))
}

fn blockage() -> Outcome {
    let scene = presets::blockage_scene();
    let traces = run_blockage_timeline(
        &scene,
        presets::BLOCKAGE_FRAMES,
        mcs(0).unwrap(),
        &FrameSpec::default(),
        7,
    )
    .map_err(|e| e.to_string())?;
    let ok = traces.iter().filter(|t| t.success).count();
    let mut worst: f64 = 0.0;
    for t in &traces {
        let surviving = match t.frame_index {
            100..=180 => Some(t.per_chain_rssi_dbm[0]),
            200..=280 => Some(t.per_chain_rssi_dbm[1]),
            _ => None,
        };
        if let Some(s) = surviving {
            worst = worst.max((t.combined_rssi_dbm - s).abs());
        }
    }
    check(
        traces.len() == 350 && ok == 350 && worst <= 0.1,
        format!(
            "{ok}/{} frames ok, worst blocked-interval deviation {worst:.3} dB",
            traces.len()
        ),
    )
}

fn mrc_point() -> Outcome {
    let scene = presets::mrc_point_scene();
    let (a, b) = snrs_from_scene(&scene).map_err(|e| e.to_string())?;
    let p = run_mrc_fsr_point(
        a,
        b,
        mcs(presets::MRC_POINT_MCS).unwrap(),
        &FrameSpec::default(),
        11,
    )
    .map_err(|e| e.to_string())?;
    check(
        (p.fsr_a - 0.626).abs() <= 0.05 && (p.fsr_b - 0.365).abs() <= 0.05 && p.fsr_mrc >= 0.90,
        format!(
            "fsr A {:.3}, B {:.3}, MRC {:.3}",
            p.fsr_a, p.fsr_b, p.fsr_mrc
        ),
    )
}

fn siso_ladder() -> Outcome {
    let at_55 = fsr(mcs(0).unwrap(), &[-55.0 - -60.0], &FrameSpec::default()).unwrap();
    let scene = presets::siso_scene();
    let rows = run_siso_sweep(
        &scene,
        &[0, 7],
        &presets::siso_distances(),
        &FrameSpec::default(),
        3,
    )
    .map_err(|e| e.to_string())?;
    let mcs0 = first_reliable_rssi(&rows, 0, 0.99).ok_or("MCS0 never reliable")?;
    let mcs7 = first_reliable_rssi(&rows, 7, 0.99).ok_or("MCS7 never reliable")?;
    let gap = mcs7 - mcs0;
    let sweep_55 = rows
        .iter()
        .filter(|r| r.mcs_index == 0 && r.rssi_dbm >= -55.0)
        .all(|r| r.fsr_measured >= 0.99);
    check(
        at_55 >= 0.99 && sweep_55 && (gap - 30.0).abs() <= 3.0,
        format!(
            "MCS0 FSR at -55 dBm {at_55:.4}; reliable from {mcs0:.2} (MCS0) / {mcs7:.2} (MCS7) dBm, gap {gap:.2} dB"
        ),
    )
}

fn area_grid() -> Outcome {
    let scene = presets::mimo_area_scene();
    let rows = run_mimo_area_grid(
        &scene,
        &presets::mimo_placements(),
        &[8, 9, 10, 11, 12],
        &SubcarrierGrid::default(),
        &FrameSpec::default(),
        5,
    )
    .map_err(|e| e.to_string())?;
    let get = |label: &str, m: u8| {
        rows.iter()
            .find(|r| r.placement == label && r.mcs_index == m)
            .map(|r| r.fsr_measured)
            .unwrap_or(f64::NAN)
    };
    let mut ok = true;
    let mut min_good: f64 = 1.0;
    for label in ["1-3", "2-3", "1-2"] {
        for m in 8..=12 {
            min_good = min_good.min(get(label, m));
            ok &= get(label, m) >= 0.99;
        }
    }
    let mut max_bad: f64 = 0.0;
    for m in 9..=12 {
        max_bad = max_bad.max(get("2-2", m));
        ok &= get("2-2", m) <= 0.05;
    }
    let mcs8 = get("2-2-imbalance", 8);
    ok &= mcs8 > 0.8;
    check(
        ok,
        format!(
            "independent/mixed min FSR {min_good:.3}; proportional MCS9-12 max FSR {max_bad:.3}; imbalanced MCS8 FSR {mcs8:.3}"
        ),
    )
}

fn csi_shape() -> Outcome {
    let siso = presets::csi_siso_scene();
    let cm = channel_matrix(&siso, 0, &SubcarrierGrid::default().freqs()).unwrap();
    let flat = report_csi(&cm, 6).unwrap().magnitude_ripple_db(0, 0);
    let miso = presets::csi_miso_scene();
    let grid = SubcarrierGrid::new(Bandwidth::Mhz40, vlcsim::grid::DEFAULT_CENTER_FREQ_HZ);
    let cm = channel_matrix(&miso, 0, &grid.freqs()).unwrap();
    let selective = report_csi_response(&cm, 6)
        .unwrap()
        .magnitude_ripple_db(0, 0);
    check(
        flat <= 3.0 && selective >= 10.0,
        format!("SISO ripple {flat:.2} dB, MISO ripple {selective:.2} dB"),
    )
}

fn handover() -> Outcome {
    let scene = presets::handover_scene();
    let grid = handover_grid(&scene, 1.0).unwrap();
    let rows = run_handover_sweep(&scene, &grid).map_err(|e| e.to_string())?;
    let spread = |f: &dyn Fn(&vlcsim::scenario::HandoverRow) -> f64| {
        let max = rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let min = rows.iter().map(f).fold(f64::INFINITY, f64::min);
        max - min
    };
    let a = spread(&|r| r.rssi_a_dbm);
    let b = spread(&|r| r.rssi_b_dbm);
    let m = spread(&|r| r.rssi_mrc_dbm);
    check(
        m <= 3.0 && a >= 10.0 && b >= 10.0,
        format!("MRC excursion {m:.2} dB, path A {a:.2} dB, path B {b:.2} dB"),
    )
}

fn rate_table() -> Outcome {
    let top = phy_rate(mcs(15).unwrap(), Bandwidth::Mhz40);
    let doubled = mcs_table().iter().filter(|e| e.n_streams == 2).all(|e| {
        let base = mcs(e.index - 8).unwrap();
        e.data_rate_20mhz_mbps == 2.0 * base.data_rate_20mhz_mbps
            && e.data_rate_40mhz_mbps == 2.0 * base.data_rate_40mhz_mbps
    });
    check(
        top == 300.0 && doubled,
        format!("MCS15 @ 40 MHz = {top} Mbit/s, two-stream doubling {doubled}"),
    )
}

fn random_full_rank(seed: u64) -> ChannelMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = [0.0; 4];
    let mut d = [0.0; 4];
    for k in 0..4 {
        g[k] = rng.random_range(0.1..1.0);
        d[k] = rng.random_range(0.0..10e-9);
    }
    ChannelMatrix::from_paths(
        DMatrix::from_row_slice(2, 2, &[g[0] + 1.0, g[1], g[2], g[3] + 1.0]),
        DMatrix::from_row_slice(2, 2, &d),
        SubcarrierGrid::default().freqs(),
    )
    .unwrap()
}

fn oracle_equivalence() -> Outcome {
    let frame = FrameSpec::default();
    let rows = oracle_check(&[0, 1, 8, 9], &SubcarrierGrid::default(), &frame, 2024)
        .map_err(|e| e.to_string())?;
    let worst = rows
        .iter()
        .map(|r| (r.fsr_model - r.fsr_oracle).abs())
        .fold(0.0, f64::max);

    let oracle = Oracle::uncoded();
    let mut noiseless_errors = 0;
    for seed in 0..20 {
        let cm = random_full_rank(seed);
        for m in [8, 9, 10, 11, 12, 13, 14, 15] {
            let out = oracle
                .simulate_frame(&cm, mcs(m).unwrap(), &frame, f64::INFINITY, seed)
                .map_err(|e| e.to_string())?;
            noiseless_errors += out.bit_errors;
        }
    }

    let rank1 = ChannelMatrix::from_paths(
        DMatrix::from_element(2, 2, 1.0),
        DMatrix::zeros(2, 2),
        SubcarrierGrid::default().freqs(),
    )
    .unwrap();
    let mut rank1_ok = 0;
    for seed in 0..200 {
        for snr in [20.0, 40.0, f64::INFINITY] {
            if oracle
                .simulate_frame(&rank1, mcs(8).unwrap(), &frame, snr, seed)
                .map_err(|e| e.to_string())?
                .frame_ok
            {
                rank1_ok += 1;
            }
        }
    }
    check(
        rows.len() == 20 && worst <= 0.1 && noiseless_errors == 0 && rank1_ok == 0,
        format!(
            "{} points, worst |model - oracle| {worst:.3}; noiseless ZF bit errors {noiseless_errors}; rank-1 successes {rank1_ok}/600",
            rows.len()
        ),
    )
}

fn named<T: std::fmt::Debug>(
    name: &str,
    result: Result<(), proptest::test_runner::TestError<T>>,
) -> Result<(), String> {
    result.map_err(|e| format!("{name}: {e}"))
}

fn property_suites() -> Outcome {
    const CASES: u32 = 1000;
    let config = || Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new(config());

    // MRC dominance and permutation invariance.
    let r = runner.run(
        &(
            prop::collection::vec(0.0f64..1e4, 1..8),
            any::<prop::sample::Index>(),
        ),
        |(snrs, rot)| {
            let c = mrc_combine(&snrs).unwrap();
            let max = snrs.iter().copied().fold(0.0, f64::max);
            prop_assert!(c.linear >= max);
            let mut rotated = snrs.clone();
            rotated.rotate_left(rot.index(snrs.len()));
            rotated.reverse();
            let c2 = mrc_combine(&rotated).unwrap();
            prop_assert!((c.linear - c2.linear).abs() <= 1e-9 * c.linear.max(1.0));
            Ok(())
        },
    );
    named("MRC dominance/permutation", r)?;

    // FSR monotone in SNR.
    let mut runner = TestRunner::new(config());
    let r = runner.run(
        &(0u8..16, -20.0f64..50.0, 0.0f64..10.0, 1u32..4000),
        |(m, snr, delta, bytes)| {
            let e = mcs(m).unwrap();
            let frame = FrameSpec::new(bytes, 1).unwrap();
            let n = e.n_streams as usize;
            let lo = fsr(e, &vec![snr; n], &frame).unwrap();
            let hi = fsr(e, &vec![snr + delta; n], &frame).unwrap();
            prop_assert!(hi >= lo);
            Ok(())
        },
    );
    named("FSR monotonicity", r)?;

    // Gain falls as 1/d² on axis.
    let mut runner = TestRunner::new(config());
    let r = runner.run(&(0.1f64..20.0, 1.0001f64..5.0), |(d, k)| {
        let tx = FrontEnd::tx("T", [0.0, 0.0, 0.0], [0.0, 0.0, -1.0], 60.0, 0.0);
        let rx_at = |z: f64| FrontEnd::rx("R", [0.0, 0.0, -z], [0.0, 0.0, 1.0], 60.0, 1e-4, 0.0);
        let near = los_gain(&tx, &rx_at(d)).unwrap().gain;
        let far = los_gain(&tx, &rx_at(d * k)).unwrap().gain;
        prop_assert!(far < near);
        prop_assert!((near / far - k * k).abs() <= 1e-9 * k * k);
        Ok(())
    });
    named("1/d^2 monotonicity", r)?;

    // Entry phase is -2πfτ.
    let mut runner = TestRunner::new(config());
    let r = runner.run(&(1e-9f64..1e-3, 0.0f64..50e-9), |(g, tau)| {
        let grid = SubcarrierGrid::default();
        let cm = ChannelMatrix::from_paths(
            DMatrix::from_element(1, 1, g),
            DMatrix::from_element(1, 1, tau),
            grid.freqs(),
        )
        .unwrap();
        for (h, f) in cm.entries().iter().zip(grid.freqs()) {
            let expected = Complex64::from_polar(g.sqrt(), -2.0 * std::f64::consts::PI * f * tau);
            prop_assert!((h[(0, 0)] - expected).norm() <= 1e-12 * g.sqrt());
        }
        Ok(())
    });
    named("phase-delay consistency", r)?;

    // Same seed, same output.
    let scene = presets::blockage_scene();
    let mut runner = TestRunner::new(config());
    let r = runner.run(&(any::<u64>(), 1u64..40), |(seed, n)| {
        let e = mcs(0).unwrap();
        let frame = FrameSpec::default();
        let a = run_blockage_timeline(&scene, n, e, &frame, seed).unwrap();
        let b = run_blockage_timeline(&scene, n, e, &frame, seed).unwrap();
        prop_assert_eq!(a, b);
        let p = run_mrc_fsr_point(1.5, 2.5, e, &FrameSpec::new(1000, 50).unwrap(), seed).unwrap();
        let q = run_mrc_fsr_point(1.5, 2.5, e, &FrameSpec::new(1000, 50).unwrap(), seed).unwrap();
        prop_assert_eq!(p, q);
        Ok(())
    });
    named("seed reproducibility", r)?;

    // Whole-scenario outputs are byte-identical under a fixed seed.
    let scene = presets::mrc_point_scene();
    let params = ScenarioParams::with_seed(99);
    let a = run_scenario(Scenario::MrcFsrPoint, &scene, &params).map_err(|e| e.to_string())?;
    let b = run_scenario(Scenario::MrcFsrPoint, &scene, &params).map_err(|e| e.to_string())?;
    if a != b {
        return Err("scenario output differs between identical runs".into());
    }

    Ok(format!("5 suites x {CASES} cases"))
}

struct Criterion {
    number: u8,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            number: 1,
            name: "MRC gain",
            budget: Duration::from_secs(1),
            run: mrc_gain,
        },
        Criterion {
            number: 2,
            name: "blockage resilience",
            budget: Duration::from_secs(1),
            run: blockage,
        },
        Criterion {
            number: 3,
            name: "MRC FSR point",
            budget: Duration::from_secs(5),
            run: mrc_point,
        },
        Criterion {
            number: 4,
            name: "SISO ladder anchors",
            budget: Duration::from_secs(10),
            run: siso_ladder,
        },
        Criterion {
            number: 5,
            name: "MIMO area grid",
            budget: Duration::from_secs(10),
            run: area_grid,
        },
        Criterion {
            number: 6,
            name: "CSI shape",
            budget: Duration::from_secs(1),
            run: csi_shape,
        },
        Criterion {
            number: 7,
            name: "handover flatness",
            budget: Duration::from_secs(1),
            run: handover,
        },
        Criterion {
            number: 8,
            name: "rate table",
            budget: Duration::from_secs(1),
            run: rate_table,
        },
        Criterion {
            number: 9,
            name: "oracle equivalence",
            budget: Duration::from_secs(60),
            run: oracle_equivalence,
        },
        Criterion {
            number: 10,
            name: "property suites",
            budget: Duration::from_secs(30),
            run: property_suites,
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if elapsed <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget")),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {}: {} ({:.3} s, budget {} s)",
            if pass { "PASS" } else { "FAIL" },
            c.number,
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
