use crate::channel::{channel_matrix, rssi_per_chain, Scene};
use crate::error::{Error, Result};
use crate::mcs::{fsr, FrameSpec, McsEntry};
use crate::mimo::{mrc_combine, mrc_rssi_dbm};
use crate::units::dbm_to_mw;

use super::{derived_rng, FrameTrace, Technique};
use rand::Rng;

/// Per-frame RSSI on both chains of a 1×2 SIMO link with MRC, under the
/// scene's obstacle schedule. Exactly one trace per frame index.
pub fn run_blockage_timeline(
    scene: &Scene,
    n_frames: u64,
    mcs: &McsEntry,
    frame: &FrameSpec,
    seed: u64,
) -> Result<Vec<FrameTrace>> {
    scene.ensure_valid()?;
    let n_tx = scene.transmitters().count();
    let n_rx = scene.receivers().count();
    if n_tx != 1 || n_rx != 2 {
        return Err(Error::Contract(format!(
            "blockage timeline needs 1 TX and 2 RX, scene has {n_tx} and {n_rx}"
        )));
    }
    if mcs.n_streams != 1 {
        return Err(Error::Contract(format!(
            "MCS {} is not single-stream",
            mcs.index
        )));
    }
    let tx_power = scene.tx_powers_dbm();
    let noise_mw = dbm_to_mw(scene.noise_floor_dbm);

    (0..n_frames)
        .map(|idx| {
            let cm = channel_matrix(scene, idx, &[])?;
            let rssi = rssi_per_chain(&cm, &tx_power)?;
            let branch_snr: Vec<f64> = rssi.iter().map(|&p| dbm_to_mw(p) / noise_mw).collect();
            let combined = mrc_combine(&branch_snr)?;
            let p = fsr(mcs, &[combined.db], frame)?;
            let success = derived_rng(seed, idx).random::<f64>() < p;
            Ok(FrameTrace {
                frame_index: idx,
                combined_rssi_dbm: mrc_rssi_dbm(&rssi),
                per_chain_rssi_dbm: rssi,
                technique: Technique::Mrc,
                mcs_index: mcs.index,
                success,
            })
        })
        .collect()
}
