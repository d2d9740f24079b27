//! Link-level simulator for MIMO visible-light links carrying an 802.11n
//! OFDM PHY.
//!
//! - [`channel`]: Lambertian line-of-sight gains and per-subcarrier
//!   channel matrices.
//! - [`mcs`]: the HT MCS ladder, PHY rates and the analytic frame success
//!   rate model.
//! - [`mimo`]: maximal-ratio and selection combining, zero-forcing
//!   spatial demultiplexing.
//! - [`oracle`]: symbol-level OFDM Monte-Carlo link used to cross-check
//!   the analytic model.
//! - [`scenario`]: scripted experiments producing frame traces, FSR tables
//!   and CSI reports.

pub mod channel;
pub mod error;
pub mod grid;
pub mod mcs;
pub mod mimo;
pub mod oracle;
pub mod scenario;
pub mod scene_config;
pub mod units;

pub use channel::{
    channel_matrix, lambertian_order, los_gain, rssi_per_chain, ChannelMatrix, FrontEnd, LosPath,
    Obstacle, Optics, Role, Scene, Vec3,
};
pub use error::{Diagnostic, Error, Result};
pub use grid::{Bandwidth, SubcarrierGrid};
pub use mcs::{fsr, mcs, mcs_table, phy_rate, FrameSpec, McsEntry, Modulation};
pub use mimo::{
    extra_diversity_gain, mrc_combine, selection_combine, zf_decode, CombinedSnr, MimoConfig,
    PostSnr, Selection,
};
pub use oracle::Oracle;
pub use scenario::{CsiReport, FrameTrace, Scenario, ScenarioOutput, ScenarioParams, Technique};
pub use scene_config::{load_scene, parse_scene, validate_scene_file};
pub use units::NO_SIGNAL_DBM;
