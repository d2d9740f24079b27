use crate::channel::{channel_matrix, rssi_per_chain, FrontEnd, Scene};
use crate::error::{Error, Result};
use crate::mcs::{fsr, mcs, FrameSpec};
use crate::units::is_no_signal;

use super::{bernoulli_count, derived_rng};

#[derive(Debug, Clone, PartialEq)]
pub struct SisoRow {
    pub distance_m: f64,
    pub rssi_dbm: f64,
    pub snr_db: f64,
    pub mcs_index: u8,
    pub fsr_model: f64,
    pub successes: u32,
    pub frames: u32,
    pub fsr_measured: f64,
}

/// The single TX and RX of a SISO scene.
pub(crate) fn siso_pair(scene: &Scene) -> Result<(&FrontEnd, &FrontEnd)> {
    let txs: Vec<_> = scene.transmitters().collect();
    let rxs: Vec<_> = scene.receivers().collect();
    match (txs.as_slice(), rxs.as_slice()) {
        ([tx], [rx]) => Ok((tx, rx)),
        _ => Err(Error::Contract(format!(
            "SISO sweep needs 1 TX and 1 RX, scene has {} and {}",
            txs.len(),
            rxs.len()
        ))),
    }
}

/// Scene with the receiver moved `distance_m` down the TX boresight,
/// facing the transmitter.
pub(crate) fn place_receiver(scene: &Scene, distance_m: f64) -> Result<Scene> {
    let (tx, rx) = siso_pair(scene)?;
    if !(distance_m > 0.0 && distance_m.is_finite()) {
        return Err(Error::Domain(format!(
            "distance must be > 0, got {distance_m}"
        )));
    }
    let b = tx.boresight;
    let pos = [
        tx.position[0] + b[0] * distance_m,
        tx.position[1] + b[1] * distance_m,
        tx.position[2] + b[2] * distance_m,
    ];
    let mut placed = rx.clone();
    placed.position = pos;
    placed = placed.aimed_at(tx.position);
    let mut out = scene.clone();
    *out.front_end_mut(&rx.id).expect("rx exists") = placed;
    Ok(out)
}

/// FSR versus RSSI for every (distance, MCS) pair, sorted by RSSI.
pub fn run_siso_sweep(
    scene: &Scene,
    mcs_list: &[u8],
    distances_m: &[f64],
    frame: &FrameSpec,
    seed: u64,
) -> Result<Vec<SisoRow>> {
    scene.ensure_valid()?;
    siso_pair(scene)?;
    let entries = mcs_list
        .iter()
        .map(|&i| {
            let e = mcs(i)?;
            if e.n_streams != 1 {
                return Err(Error::Contract(format!("MCS {i} is not single-stream")));
            }
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(distances_m.len() * entries.len());
    for (di, &d) in distances_m.iter().enumerate() {
        let placed = place_receiver(scene, d)?;
        let cm = channel_matrix(&placed, 0, &[])?;
        let rssi = rssi_per_chain(&cm, &placed.tx_powers_dbm())?[0];
        let snr = rssi - placed.noise_floor_dbm;
        for (mi, entry) in entries.iter().enumerate() {
            let fsr_model = if is_no_signal(rssi) {
                0.0
            } else {
                fsr(entry, &[snr], frame)?
            };
            let mut rng = derived_rng(seed, (di * entries.len() + mi) as u64);
            let successes = bernoulli_count(fsr_model, frame.count, &mut rng);
            rows.push(SisoRow {
                distance_m: d,
                rssi_dbm: rssi,
                snr_db: snr,
                mcs_index: entry.index,
                fsr_model,
                successes,
                frames: frame.count,
                fsr_measured: if frame.count == 0 {
                    0.0
                } else {
                    f64::from(successes) / f64::from(frame.count)
                },
            });
        }
    }
    rows.sort_by(|a, b| {
        a.rssi_dbm
            .total_cmp(&b.rssi_dbm)
            .then(a.mcs_index.cmp(&b.mcs_index))
    });
    Ok(rows)
}

/// Lowest RSSI from which every row of `mcs_index` reaches `min_fsr`
/// (measured).
pub fn first_reliable_rssi(rows: &[SisoRow], mcs_index: u8, min_fsr: f64) -> Option<f64> {
    let mut selected: Vec<&SisoRow> = rows.iter().filter(|r| r.mcs_index == mcs_index).collect();
    selected.sort_by(|a, b| a.rssi_dbm.total_cmp(&b.rssi_dbm));
    let mut answer = None;
    for row in selected.iter().rev() {
        if row.fsr_measured >= min_fsr {
            answer = Some(row.rssi_dbm);
        } else {
            break;
        }
    }
    answer
}
