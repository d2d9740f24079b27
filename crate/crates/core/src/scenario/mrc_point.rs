use rand::Rng;

use crate::channel::{channel_matrix, rssi_per_chain, Scene};
use crate::error::{Error, Result};
use crate::mcs::{fsr, FrameSpec, McsEntry};
use crate::mimo::mrc_combine;
use crate::units::{db_to_linear, linear_to_db};

use super::derived_rng;

/// FSR of each branch alone and of their MRC combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrcPoint {
    pub snr_a_db: f64,
    pub snr_b_db: f64,
    pub snr_mrc_db: f64,
    pub fsr_model_a: f64,
    pub fsr_model_b: f64,
    pub fsr_model_mrc: f64,
    pub frames: u32,
    pub fsr_a: f64,
    pub fsr_b: f64,
    pub fsr_mrc: f64,
}

/// Monte-Carlo FSR over `frame.count` frames for path A alone, path B alone
/// and MRC of both. Frame `i` draws its three outcomes from seed `seed + i`.
pub fn run_mrc_fsr_point(
    snr_a_db: f64,
    snr_b_db: f64,
    mcs: &McsEntry,
    frame: &FrameSpec,
    seed: u64,
) -> Result<MrcPoint> {
    if mcs.n_streams != 1 {
        return Err(Error::Contract(format!(
            "MCS {} is not single-stream",
            mcs.index
        )));
    }
    let combined = mrc_combine(&[db_to_linear(snr_a_db), db_to_linear(snr_b_db)])?;
    let snr_mrc_db = linear_to_db(combined.linear);
    let fsr_model_a = fsr(mcs, &[snr_a_db], frame)?;
    let fsr_model_b = fsr(mcs, &[snr_b_db], frame)?;
    let fsr_model_mrc = fsr(mcs, &[snr_mrc_db], frame)?;

    let mut ok = [0u32; 3];
    for i in 0..frame.count {
        let mut rng = derived_rng(seed, u64::from(i));
        for (slot, p) in ok.iter_mut().zip([fsr_model_a, fsr_model_b, fsr_model_mrc]) {
            if rng.random::<f64>() < p {
                *slot += 1;
            }
        }
    }
    let rate = |n: u32| {
        if frame.count == 0 {
            0.0
        } else {
            f64::from(n) / f64::from(frame.count)
        }
    };
    Ok(MrcPoint {
        snr_a_db,
        snr_b_db,
        snr_mrc_db,
        fsr_model_a,
        fsr_model_b,
        fsr_model_mrc,
        frames: frame.count,
        fsr_a: rate(ok[0]),
        fsr_b: rate(ok[1]),
        fsr_mrc: rate(ok[2]),
    })
}

/// Per-chain SNRs (dB) of a 1 TX / 2 RX scene at frame 0.
pub fn snrs_from_scene(scene: &Scene) -> Result<(f64, f64)> {
    scene.ensure_valid()?;
    if scene.transmitters().count() != 1 || scene.receivers().count() != 2 {
        return Err(Error::Contract("MRC point needs 1 TX and 2 RX".into()));
    }
    let cm = channel_matrix(scene, 0, &[])?;
    let rssi = rssi_per_chain(&cm, &scene.tx_powers_dbm())?;
    Ok((
        rssi[0] - scene.noise_floor_dbm,
        rssi[1] - scene.noise_floor_dbm,
    ))
}
