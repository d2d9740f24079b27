//! Reference scenes for the scripted scenarios.
//!
//! Geometry is illustrative; the quantities the scenarios depend on (path
//! RSSI, SNR targets, gain imbalances, differential delay) are solved for
//! by inverting the Lambertian model when the preset is built, so they
//! hold exactly regardless of the rounded positions below.

use crate::channel::{
    channel_matrix, rssi_per_chain, FrontEnd, Obstacle, Scene, Vec3, DEFAULT_NOISE_FLOOR_DBM,
    SPEED_OF_LIGHT,
};
use crate::grid::SubcarrierGrid;
use crate::mcs::{mcs, snr_for_fsr};
use crate::mimo::zf_decode;
use crate::units::dbm_to_mw;

use super::area_grid::Placement;
use super::handover::rotate_toward;

pub const PRESET_NAMES: [&str; 7] = [
    "siso",
    "blockage",
    "mrc-point",
    "handover",
    "mimo-area",
    "csi-siso",
    "csi-miso",
];

pub const RX_AREA_M2: f64 = 1e-4;
pub const RX_CONVERSION_GAIN_DB: f64 = 15.0;

/// Per-path RSSI of the blockage scene.
pub const BLOCKAGE_PATH_RSSI_DBM: f64 = -48.0;
/// Blocked intervals `[start, end)` of the blockage scene.
pub const BLOCKAGE_SCHEDULE: [(&str, u64, u64); 2] = [("RB", 100, 181), ("RA", 200, 281)];
pub const BLOCKAGE_FRAMES: u64 = 350;

/// Single-path FSR targets of the MRC point scene, at MCS 0.
pub const MRC_POINT_FSR: (f64, f64) = (0.626, 0.365);
pub const MRC_POINT_MCS: u8 = 0;

/// Angle between the two handover receivers as seen from the TX.
pub const HANDOVER_SWEEP_DEG: f64 = 60.0;
pub const HANDOVER_PEAK_RSSI_DBM: f64 = -48.0;

/// TX A/TX B power ratio seen by the tilted area-2 receiver.
pub const MIMO_IMBALANCE_DB: f64 = 0.5;
/// ZF post-SNR of the imbalanced area-2/area-2 placement.
pub const MIMO_IMBALANCE_POST_SNR_DB: f64 = 3.2;
pub const MIMO_AREA_RECEIVERS: [(&str, u8); 5] =
    [("R1", 1), ("R2", 2), ("R2P", 2), ("R2I", 2), ("R3", 3)];

/// Differential delay and amplitude ratio of the two MISO paths.
pub const CSI_MISO_DELAY_S: f64 = 1e-9;
pub const CSI_MISO_AMPLITUDE_RATIO: f64 = 0.97;
pub const CSI_SISO_DISTANCE_M: f64 = 1.0;

const DOWN: Vec3 = [0.0, 0.0, -1.0];
const UP: Vec3 = [0.0, 0.0, 1.0];

fn receiver(id: &str, position: Vec3, boresight: Vec3, fov_deg: f64) -> FrontEnd {
    FrontEnd::rx(
        id,
        position,
        boresight,
        fov_deg,
        RX_AREA_M2,
        RX_CONVERSION_GAIN_DB,
    )
}

/// `x` in `[lo, hi]` with `f(x) = target`, for `f` monotone on the interval.
fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    let increasing = f(hi) > f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn rssi(scene: &Scene) -> Vec<f64> {
    let cm = channel_matrix(scene, 0, &[]).expect("preset geometry is valid");
    rssi_per_chain(&cm, &scene.tx_powers_dbm()).expect("one power per TX")
}

/// Shifts every TX power so chain `rx` receives `target_dbm`.
fn calibrate_tx_power(scene: &mut Scene, rx: usize, target_dbm: f64) {
    let shift = target_dbm - rssi(scene)[rx];
    let ids: Vec<String> = scene.transmitters().map(|t| t.id.clone()).collect();
    for id in ids {
        let fe = scene.front_end_mut(&id).expect("tx exists");
        let p = fe.tx_power_dbm().expect("is a TX");
        fe.set_tx_power_dbm(p + shift);
    }
}

/// One TX 2.5 m above one RX, both facing each other. The SISO sweep
/// moves the RX along the TX boresight.
pub fn siso_scene() -> Scene {
    Scene::new(
        vec![
            FrontEnd::tx("TA", [0.0, 0.0, 2.5], DOWN, 60.0, 0.0),
            receiver("RA", [0.0, 0.0, 0.0], UP, 60.0),
        ],
        vec![],
        DEFAULT_NOISE_FLOOR_DBM,
    )
}

/// Distances whose RSSI falls in 0.25 dB steps from 0.25 m out to 50 m.
pub fn siso_distances() -> Vec<f64> {
    (0..)
        .map(|k| 0.25 * 10f64.powf(f64::from(k) * 0.25 / 20.0))
        .take_while(|&d| d <= 50.0)
        .collect()
}

/// One ceiling TX, two floor RX placed symmetrically so both paths have
/// equal gain, and the two single-path blockages of the timeline.
pub fn blockage_scene() -> Scene {
    let mut scene = Scene::new(
        vec![
            FrontEnd::tx("TA", [0.0, 0.0, 2.0], DOWN, 60.0, 0.0),
            receiver("RA", [-0.3, 0.0, 0.0], UP, 60.0),
            receiver("RB", [0.3, 0.0, 0.0], UP, 60.0),
        ],
        BLOCKAGE_SCHEDULE
            .iter()
            .map(|&(rx, start, end)| Obstacle::new(vec![("TA".into(), rx.into())], start, end))
            .collect(),
        DEFAULT_NOISE_FLOOR_DBM,
    );
    calibrate_tx_power(&mut scene, 0, BLOCKAGE_PATH_RSSI_DBM);
    scene
}

/// Like the blockage scene without obstacles, with RX B pushed out until
/// the single-path MCS 0 FSRs hit [`MRC_POINT_FSR`].
pub fn mrc_point_scene() -> Scene {
    let entry = mcs(MRC_POINT_MCS).expect("valid MCS");
    let snr_a = snr_for_fsr(entry, MRC_POINT_FSR.0).expect("target in (0, 1)");
    let snr_b = snr_for_fsr(entry, MRC_POINT_FSR.1).expect("target in (0, 1)");
    let build = |xb: f64| {
        Scene::new(
            vec![
                FrontEnd::tx("TA", [0.0, 0.0, 2.0], DOWN, 60.0, 0.0),
                receiver("RA", [-0.3, 0.0, 0.0], UP, 60.0),
                receiver("RB", [xb, 0.0, 0.0], UP, 60.0),
            ],
            vec![],
            DEFAULT_NOISE_FLOOR_DBM,
        )
    };
    let mut scene = build(0.3);
    calibrate_tx_power(&mut scene, 0, DEFAULT_NOISE_FLOOR_DBM + snr_a);
    let power = scene.tx_powers_dbm()[0];
    let with_power = |xb: f64| {
        let mut s = build(xb);
        s.front_end_mut("TA").expect("tx").set_tx_power_dbm(power);
        s
    };
    let xb = bisect(
        |x| rssi(&with_power(x))[1],
        DEFAULT_NOISE_FLOOR_DBM + snr_b,
        0.3,
        3.0,
    );
    with_power(xb)
}

/// TX aimed at RX A, with RX B [`HANDOVER_SWEEP_DEG`] away as seen from the
/// TX. The narrow TX beam makes each path swing by >10 dB over the sweep.
pub fn handover_scene() -> Scene {
    let h = 2.0;
    let x = h * (HANDOVER_SWEEP_DEG / 2.0).to_radians().tan();
    let tx_pos = [0.0, 0.0, h];
    let mut scene = Scene::new(
        vec![
            FrontEnd::tx("TA", tx_pos, DOWN, 30.0, 0.0).aimed_at([-x, 0.0, 0.0]),
            receiver("RA", [-x, 0.0, 0.0], UP, 60.0).aimed_at(tx_pos),
            receiver("RB", [x, 0.0, 0.0], UP, 60.0).aimed_at(tx_pos),
        ],
        vec![],
        DEFAULT_NOISE_FLOOR_DBM,
    );
    calibrate_tx_power(&mut scene, 0, HANDOVER_PEAK_RSSI_DBM);
    scene
}

/// Two ceiling TX 2 m apart, 1 m above the floor, and 55° FOV receivers:
///
/// - `R1` under TX A (area 1), `R3` under TX B (area 3);
/// - `R2`, `R2P` on the bisector, hearing both TX with equal gain and
///   delay, so their rows are proportional;
/// - `R2I` next to `R2P`, tilted toward TX A until it hears A
///   [`MIMO_IMBALANCE_DB`] stronger than B.
///
/// TX power is set so the `R2`/`R2I` pair decodes at
/// [`MIMO_IMBALANCE_POST_SNR_DB`].
pub fn mimo_area_scene() -> Scene {
    let ta = [0.0, 0.0, 1.0];
    let tb = [2.0, 0.0, 1.0];
    let fov = 55.0;
    let tilted = |deg: f64| {
        let pos = [1.0, 0.1, 0.0];
        let to_a = [ta[0] - pos[0], ta[1] - pos[1], ta[2] - pos[2]];
        let b = rotate_toward(UP, to_a, deg).expect("not antiparallel");
        receiver("R2I", pos, b, fov)
    };
    let build = |tilt_deg: f64, power_dbm: f64| {
        Scene::new(
            vec![
                FrontEnd::tx("TA", ta, DOWN, 60.0, power_dbm),
                FrontEnd::tx("TB", tb, DOWN, 60.0, power_dbm),
                receiver("R1", [0.0, 0.0, 0.0], UP, fov),
                receiver("R2", [1.0, -0.1, 0.0], UP, fov),
                receiver("R2P", [1.0, 0.1, 0.0], UP, fov),
                tilted(tilt_deg),
                receiver("R3", [2.0, 0.0, 0.0], UP, fov),
            ],
            vec![],
            DEFAULT_NOISE_FLOOR_DBM,
        )
    };
    let ratio_db = |deg: f64| {
        let s = build(deg, 0.0)
            .with_receivers(&["R2I"])
            .expect("R2I exists");
        let cm = channel_matrix(&s, 0, &[]).expect("valid");
        10.0 * (cm.path_gains()[(0, 0)] / cm.path_gains()[(0, 1)]).log10()
    };
    let tilt = bisect(ratio_db, MIMO_IMBALANCE_DB, 0.0, 8.0);

    let post_snr = |power_dbm: f64| {
        let s = build(tilt, power_dbm)
            .with_receivers(&["R2", "R2I"])
            .expect("exist");
        let cm = channel_matrix(&s, 0, &SubcarrierGrid::default().freqs()).expect("valid");
        zf_decode(&cm, dbm_to_mw(power_dbm), dbm_to_mw(s.noise_floor_dbm))
            .expect("2x2")
            .min_stream_snr_db()
    };
    // ZF post-SNR grows dB for dB with TX power.
    let power = MIMO_IMBALANCE_POST_SNR_DB - post_snr(0.0);
    build(tilt, power)
}

/// Receiver pairs of the 2×2 experiment, one per area combination.
pub fn mimo_placements() -> Vec<Placement> {
    vec![
        Placement::new("1-3", "R1", "R3"),
        Placement::new("2-3", "R2", "R3"),
        Placement::new("1-2", "R1", "R2"),
        Placement::new("2-2", "R2", "R2P"),
        Placement::new("2-2-imbalance", "R2", "R2I"),
    ]
}

/// The SISO scene with the RX [`CSI_SISO_DISTANCE_M`] below the TX.
pub fn csi_siso_scene() -> Scene {
    super::siso::place_receiver(&siso_scene(), CSI_SISO_DISTANCE_M).expect("SISO scene")
}

/// Two TX lighting one RX over paths [`CSI_MISO_DELAY_S`] apart, with TX A
/// turned away until the path amplitudes are [`CSI_MISO_AMPLITUDE_RATIO`]
/// apart.
pub fn csi_miso_scene() -> Scene {
    let rx_pos = [0.0, 0.0, 0.0];
    let da = 2.0;
    let db = da + SPEED_OF_LIGHT * CSI_MISO_DELAY_S;
    let off = 20f64.to_radians();
    let ta = [0.0, 0.0, da];
    let tb = [db * off.sin(), 0.0, db * off.cos()];
    let build = |tilt_deg: f64| {
        let boresight = rotate_toward(DOWN, [1.0, 0.0, 0.0], -tilt_deg).expect("orthogonal");
        Scene::new(
            vec![
                FrontEnd::tx("TA", ta, boresight, 60.0, 0.0),
                FrontEnd::tx("TB", tb, DOWN, 60.0, 0.0).aimed_at(rx_pos),
                receiver("R1", rx_pos, UP, 60.0),
            ],
            vec![],
            DEFAULT_NOISE_FLOOR_DBM,
        )
    };
    let amplitude_ratio = |deg: f64| {
        let cm = channel_matrix(&build(deg), 0, &[]).expect("valid");
        (cm.path_gains()[(0, 1)] / cm.path_gains()[(0, 0)]).sqrt()
    };
    build(bisect(amplitude_ratio, CSI_MISO_AMPLITUDE_RATIO, 0.0, 80.0))
}

pub fn preset_scene(name: &str) -> Option<Scene> {
    Some(match name {
        "siso" => siso_scene(),
        "blockage" => blockage_scene(),
        "mrc-point" => mrc_point_scene(),
        "handover" => handover_scene(),
        "mimo-area" => mimo_area_scene(),
        "csi-siso" => csi_siso_scene(),
        "csi-miso" => csi_miso_scene(),
        _ => return None,
    })
}
