//! Scripted reproductions of the SISO, SIMO, handover and 2×2 experiments,
//! plus CSI reporting.
//!
//! Frame outcomes are Bernoulli draws against the analytic FSR. Every draw
//! comes from a ChaCha8 stream seeded with `base_seed + index`, so runs are
//! bit-reproducible for a fixed seed.

mod area_grid;
mod blockage;
mod csi;
mod handover;
mod mrc_point;
pub mod output;
pub mod presets;
mod run;
mod siso;

pub use area_grid::{classify_area, run_mimo_area_grid, Area, AreaRow, Placement};
pub use blockage::run_blockage_timeline;
pub use csi::{report_csi, report_csi_response, CsiReport};
pub use handover::{handover_grid, rotate_toward, run_handover_sweep, HandoverRow};
pub use mrc_point::{run_mrc_fsr_point, snrs_from_scene, MrcPoint};
pub use run::{
    config_hash, oracle_check, run_scenario, Scenario, ScenarioOutput, ScenarioParams,
    OVERRIDE_KEYS,
};
pub use siso::{first_reliable_rssi, run_siso_sweep, SisoRow};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Technique {
    Siso,
    Sc,
    Mrc,
    Zf,
}

impl Technique {
    pub fn name(self) -> &'static str {
        match self {
            Self::Siso => "SISO",
            Self::Sc => "SC",
            Self::Mrc => "MRC",
            Self::Zf => "ZF",
        }
    }
}

/// One received (or lost) frame of a timeline scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameTrace {
    pub frame_index: u64,
    pub per_chain_rssi_dbm: Vec<f64>,
    pub combined_rssi_dbm: f64,
    pub technique: Technique,
    pub mcs_index: u8,
    pub success: bool,
}

pub(crate) fn derived_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index))
}

/// Number of successes among `n` frames that each succeed with probability `p`.
pub(crate) fn bernoulli_count(p: f64, n: u32, rng: &mut impl Rng) -> u32 {
    (0..n).filter(|_| rng.random::<f64>() < p).count() as u32
}
