use serde::Serialize;

use crate::channel::{channel_matrix, Scene};
use crate::error::{Error, Result};
use crate::grid::SubcarrierGrid;
use crate::mcs::{fsr, mcs, FrameSpec};
use crate::mimo::zf_decode;
use crate::units::dbm_to_mw;

use super::{bernoulli_count, derived_rng};

/// Which transmitters a receiver position hears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Area {
    /// Only TX A.
    One,
    /// Both TX A and TX B.
    Two,
    /// Only TX B.
    Three,
    /// Neither.
    Dark,
}

impl Area {
    pub fn number(self) -> Option<u8> {
        match self {
            Self::One => Some(1),
            Self::Two => Some(2),
            Self::Three => Some(3),
            Self::Dark => None,
        }
    }
}

/// A named pair of receivers, one per spatial stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub label: String,
    pub rx_ids: [String; 2],
}

impl Placement {
    pub fn new(label: impl Into<String>, rx1: impl Into<String>, rx2: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            rx_ids: [rx1.into(), rx2.into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaRow {
    pub placement: String,
    pub area_rx1: Option<u8>,
    pub area_rx2: Option<u8>,
    pub mcs_index: u8,
    pub solvable: bool,
    pub condition_number: f64,
    pub min_stream_snr_db: f64,
    pub fsr_model: f64,
    pub successes: u32,
    pub frames: u32,
    pub fsr_measured: f64,
}

/// Area of receiver `rx_id` in a scene with exactly two transmitters,
/// the first being TX A.
pub fn classify_area(scene: &Scene, rx_id: &str) -> Result<Area> {
    if scene.transmitters().count() != 2 {
        return Err(Error::Contract(
            "area classification needs exactly 2 TX".into(),
        ));
    }
    let single = scene.with_receivers(&[rx_id])?;
    let cm = channel_matrix(&single, 0, &[])?;
    let g = cm.path_gains();
    Ok(match (g[(0, 0)] > 0.0, g[(0, 1)] > 0.0) {
        (true, false) => Area::One,
        (true, true) => Area::Two,
        (false, true) => Area::Three,
        (false, false) => Area::Dark,
    })
}

/// ZF FSR for every (placement, MCS) pair of a 2-TX scene. Each placement
/// keeps only its two receivers; both streams get the scene's TX power.
pub fn run_mimo_area_grid(
    scene: &Scene,
    placements: &[Placement],
    mcs_list: &[u8],
    grid: &SubcarrierGrid,
    frame: &FrameSpec,
    seed: u64,
) -> Result<Vec<AreaRow>> {
    scene.ensure_valid()?;
    let powers = scene.tx_powers_dbm();
    if powers.len() != 2 {
        return Err(Error::Contract(format!(
            "area grid needs 2 TX, scene has {}",
            powers.len()
        )));
    }
    if powers[0] != powers[1] {
        return Err(Error::Contract("streams must share one TX power".into()));
    }
    let entries = mcs_list
        .iter()
        .map(|&i| {
            let e = mcs(i)?;
            if e.n_streams != 2 {
                return Err(Error::Contract(format!("MCS {i} is not two-stream")));
            }
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;

    let freqs = grid.freqs();
    let noise = dbm_to_mw(scene.noise_floor_dbm);
    let p = dbm_to_mw(powers[0]);
    let mut rows = Vec::with_capacity(placements.len() * entries.len());
    for (pi, placement) in placements.iter().enumerate() {
        let ids = [placement.rx_ids[0].as_str(), placement.rx_ids[1].as_str()];
        let sub = scene.with_receivers(&ids)?;
        let areas = [classify_area(scene, ids[0])?, classify_area(scene, ids[1])?];
        let cm = channel_matrix(&sub, 0, &freqs)?;
        let post = zf_decode(&cm, p, noise)?;
        for (mi, entry) in entries.iter().enumerate() {
            let fsr_model = if post.solvable {
                fsr(entry, &post.per_stream_snr_db, frame)?
            } else {
                0.0
            };
            let index = (pi * entries.len() + mi) as u64;
            let successes = bernoulli_count(fsr_model, frame.count, &mut derived_rng(seed, index));
            rows.push(AreaRow {
                placement: placement.label.clone(),
                area_rx1: areas[0].number(),
                area_rx2: areas[1].number(),
                mcs_index: entry.index,
                solvable: post.solvable,
                condition_number: post.condition_number,
                min_stream_snr_db: post.min_stream_snr_db(),
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
    Ok(rows)
}
