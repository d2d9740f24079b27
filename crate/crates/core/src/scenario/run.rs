use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::channel::{channel_matrix, ChannelMatrix, Scene};
use crate::error::{Error, Result};
use crate::grid::{Bandwidth, SubcarrierGrid, DEFAULT_CENTER_FREQ_HZ};
use crate::mcs::{fsr, mcs, snr_for_fsr, FrameSpec};
use crate::oracle::Oracle;
use crate::scene_config::scene_to_toml;

use super::output::{self, OracleRow};
use super::{
    handover_grid, presets, report_csi, report_csi_response, run_blockage_timeline,
    run_handover_sweep, run_mimo_area_grid, run_mrc_fsr_point, run_siso_sweep, snrs_from_scene,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    SisoSweep,
    BlockageTimeline,
    MrcFsrPoint,
    HandoverSweep,
    MimoAreaGrid,
    CsiReport,
    OracleCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Self::SisoSweep,
        Self::BlockageTimeline,
        Self::MrcFsrPoint,
        Self::HandoverSweep,
        Self::MimoAreaGrid,
        Self::CsiReport,
        Self::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::SisoSweep => "siso-sweep",
            Self::BlockageTimeline => "blockage-timeline",
            Self::MrcFsrPoint => "mrc-fsr-point",
            Self::HandoverSweep => "handover-sweep",
            Self::MimoAreaGrid => "mimo-area-grid",
            Self::CsiReport => "csi-report",
            Self::OracleCheck => "oracle-check",
        }
    }

    /// Preset used when no scene file is given.
    pub fn default_preset(self) -> &'static str {
        match self {
            Self::SisoSweep | Self::OracleCheck => "siso",
            Self::BlockageTimeline => "blockage",
            Self::MrcFsrPoint => "mrc-point",
            Self::HandoverSweep => "handover",
            Self::MimoAreaGrid => "mimo-area",
            Self::CsiReport => "csi-miso",
        }
    }

    fn default_mcs(self) -> Vec<u8> {
        match self {
            Self::SisoSweep => (0..=7).collect(),
            Self::MimoAreaGrid => (8..=12).collect(),
            Self::OracleCheck => vec![0, 1, 8, 9],
            _ => vec![0],
        }
    }

    fn default_bandwidth(self) -> Bandwidth {
        match self {
            Self::CsiReport => Bandwidth::Mhz40,
            _ => Bandwidth::Mhz20,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

/// Tunables shared by the scenarios; each scenario reads the ones it needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioParams {
    pub seed: u64,
    pub mcs: Option<Vec<u8>>,
    pub frame: FrameSpec,
    /// Length of timeline scenarios.
    pub timeline_frames: u64,
    pub step_deg: f64,
    pub bandwidth_mhz: Option<u32>,
    pub center_freq_hz: f64,
    pub csi_bits: u32,
    pub noise_floor_dbm: Option<f64>,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            seed: 0,
            mcs: None,
            frame: FrameSpec::default(),
            timeline_frames: presets::BLOCKAGE_FRAMES,
            step_deg: 1.0,
            bandwidth_mhz: None,
            center_freq_hz: DEFAULT_CENTER_FREQ_HZ,
            csi_bits: 6,
            noise_floor_dbm: None,
        }
    }
}

pub const OVERRIDE_KEYS: [&str; 9] = [
    "mcs",
    "frames",
    "payload_bytes",
    "timeline_frames",
    "step_deg",
    "bandwidth_mhz",
    "center_freq_hz",
    "csi_bits",
    "noise_floor_dbm",
];

impl ScenarioParams {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.trim().parse().map_err(|_| Error::Override {
                key: key.to_string(),
                reason: format!("cannot parse `{value}`"),
            })
        }
        match key {
            "mcs" => {
                let list = value
                    .split(',')
                    .map(|v| parse::<u8>(key, v))
                    .collect::<Result<Vec<_>>>()?;
                for &i in &list {
                    mcs(i).map_err(|e| Error::Override {
                        key: key.into(),
                        reason: e.to_string(),
                    })?;
                }
                self.mcs = Some(list);
            }
            "frames" => self.frame.count = parse(key, value)?,
            "payload_bytes" => {
                let bytes: u32 = parse(key, value)?;
                self.frame =
                    FrameSpec::new(bytes, self.frame.count).map_err(|e| Error::Override {
                        key: key.into(),
                        reason: e.to_string(),
                    })?;
            }
            "timeline_frames" => self.timeline_frames = parse(key, value)?,
            "step_deg" => self.step_deg = parse(key, value)?,
            "bandwidth_mhz" => {
                let mhz: u32 = parse(key, value)?;
                Bandwidth::from_mhz(mhz).map_err(|e| Error::Override {
                    key: key.into(),
                    reason: e.to_string(),
                })?;
                self.bandwidth_mhz = Some(mhz);
            }
            "center_freq_hz" => self.center_freq_hz = parse(key, value)?,
            "csi_bits" => self.csi_bits = parse(key, value)?,
            "noise_floor_dbm" => self.noise_floor_dbm = Some(parse(key, value)?),
            _ => {
                return Err(Error::Override {
                    key: key.into(),
                    reason: format!("unknown key; expected one of {}", OVERRIDE_KEYS.join(", ")),
                })
            }
        }
        Ok(())
    }

    fn grid(&self, scenario: Scenario) -> Result<SubcarrierGrid> {
        let bw = match self.bandwidth_mhz {
            Some(mhz) => Bandwidth::from_mhz(mhz)?,
            None => scenario.default_bandwidth(),
        };
        Ok(SubcarrierGrid::new(bw, self.center_freq_hz))
    }
}

/// A scenario's CSV table and JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub scenario: Scenario,
    pub csv: Vec<u8>,
    pub summary: Value,
}

impl ScenarioOutput {
    pub fn csv_file_name(&self) -> String {
        format!("{}.csv", self.scenario.name())
    }

    /// Writes `<scenario>.csv` and `summary.json` into `dir`, creating it
    /// if needed. Returns the paths written.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(self.csv_file_name());
        fs::write(&csv_path, &self.csv)?;
        let json_path = dir.join("summary.json");
        let mut text = serde_json::to_string_pretty(&self.summary)?;
        text.push('\n');
        fs::write(&json_path, text)?;
        Ok(vec![csv_path, json_path])
    }
}

/// SHA-256 over the scenario name, the scene as TOML and the parameters.
pub fn config_hash(scenario: Scenario, scene: &Scene, params: &ScenarioParams) -> Result<String> {
    let mut h = Sha256::new();
    h.update(scenario.name().as_bytes());
    h.update([0]);
    h.update(scene_to_toml(scene).as_bytes());
    h.update([0]);
    h.update(serde_json::to_vec(params)?);
    Ok(hex::encode(h.finalize()))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn spread(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = values.fold(f64::INFINITY, f64::min);
    max - min
}

fn ideal_channel(n: usize, grid: &SubcarrierGrid) -> Result<ChannelMatrix> {
    ChannelMatrix::from_paths(DMatrix::identity(n, n), DMatrix::zeros(n, n), grid.freqs())
}

/// Analytic FSR against the calibrated waveform oracle on an ideal
/// channel, at the SNRs where the model predicts FSR 0.1, 0.3, 0.5, 0.7
/// and 0.9.
pub fn oracle_check(
    mcs_list: &[u8],
    grid: &SubcarrierGrid,
    frame: &FrameSpec,
    seed: u64,
) -> Result<Vec<OracleRow>> {
    let oracle = Oracle::calibrated();
    let mut rows = Vec::new();
    for (mi, &index) in mcs_list.iter().enumerate() {
        let entry = mcs(index)?;
        let n = entry.n_streams as usize;
        let cm = ideal_channel(n, grid)?;
        for (pi, p) in [0.1, 0.3, 0.5, 0.7, 0.9].into_iter().enumerate() {
            let snr_db = snr_for_fsr(entry, p)?;
            let fsr_model = fsr(entry, &vec![snr_db; n], frame)?;
            let point_seed = seed.wrapping_add(((mi * 5 + pi) as u64) << 32);
            let fsr_oracle =
                oracle.empirical_fsr(&cm, entry, frame, snr_db, frame.count, point_seed)?;
            rows.push(OracleRow {
                mcs_index: index,
                snr_db,
                fsr_model,
                fsr_oracle,
            });
        }
    }
    Ok(rows)
}

/// Runs `scenario` on `scene` and renders its outputs.
pub fn run_scenario(
    scenario: Scenario,
    scene: &Scene,
    params: &ScenarioParams,
) -> Result<ScenarioOutput> {
    let mut scene = scene.clone();
    if let Some(nf) = params.noise_floor_dbm {
        scene.noise_floor_dbm = nf;
    }
    scene.ensure_valid()?;
    let mcs_list = params.mcs.clone().unwrap_or_else(|| scenario.default_mcs());
    let seed = params.seed;
    let frame = &params.frame;
    let mut csv = Vec::new();

    let aggregates = match scenario {
        Scenario::SisoSweep => {
            let rows = run_siso_sweep(&scene, &mcs_list, &presets::siso_distances(), frame, seed)?;
            output::write_siso(&mut csv, &rows)?;
            let per_mcs: Vec<Value> = mcs_list
                .iter()
                .map(|&m| {
                    let subset = rows.iter().filter(|r| r.mcs_index == m);
                    json!({
                        "mcs": m,
                        "fsr": mean(subset.clone().map(|r| r.fsr_measured)),
                        "first_reliable_rssi_dbm": super::first_reliable_rssi(&rows, m, 0.99),
                    })
                })
                .collect();
            json!({ "rows": rows.len(), "per_mcs": per_mcs })
        }
        Scenario::BlockageTimeline => {
            let entry = mcs(mcs_list[0])?;
            let traces = run_blockage_timeline(&scene, params.timeline_frames, entry, frame, seed)?;
            output::write_timeline(&mut csv, &traces)?;
            let ok = traces.iter().filter(|t| t.success).count();
            json!({
                "rows": traces.len(),
                "mcs": entry.index,
                "fsr": if traces.is_empty() { 0.0 } else { ok as f64 / traces.len() as f64 },
            })
        }
        Scenario::MrcFsrPoint => {
            let (a, b) = snrs_from_scene(&scene)?;
            let p = run_mrc_fsr_point(a, b, mcs(mcs_list[0])?, frame, seed)?;
            output::write_mrc_point(&mut csv, &p)?;
            json!({
                "rows": 3,
                "mcs": mcs_list[0],
                "fsr_a": p.fsr_a,
                "fsr_b": p.fsr_b,
                "fsr_mrc": p.fsr_mrc,
            })
        }
        Scenario::HandoverSweep => {
            let grid = handover_grid(&scene, params.step_deg)?;
            let rows = run_handover_sweep(&scene, &grid)?;
            output::write_handover(&mut csv, &rows)?;
            json!({
                "rows": rows.len(),
                "excursion_a_db": spread(rows.iter().map(|r| r.rssi_a_dbm)),
                "excursion_b_db": spread(rows.iter().map(|r| r.rssi_b_dbm)),
                "excursion_mrc_db": spread(rows.iter().map(|r| r.rssi_mrc_dbm)),
            })
        }
        Scenario::MimoAreaGrid => {
            let grid = params.grid(scenario)?;
            let placements = presets::mimo_placements();
            let rows = run_mimo_area_grid(&scene, &placements, &mcs_list, &grid, frame, seed)?;
            output::write_area_grid(&mut csv, &rows)?;
            let per_placement: Vec<Value> = placements
                .iter()
                .map(|p| {
                    let fsr: serde_json::Map<String, Value> = rows
                        .iter()
                        .filter(|r| r.placement == p.label)
                        .map(|r| (format!("mcs{}", r.mcs_index), json!(r.fsr_measured)))
                        .collect();
                    json!({ "placement": p.label, "fsr": fsr })
                })
                .collect();
            json!({ "rows": rows.len(), "per_placement": per_placement })
        }
        Scenario::CsiReport => {
            let grid = params.grid(scenario)?;
            let cm = channel_matrix(&scene, 0, &grid.freqs())?;
            let report = if cm.n_tx() > 1 {
                report_csi_response(&cm, params.csi_bits)?
            } else {
                report_csi(&cm, params.csi_bits)?
            };
            output::write_csi(&mut csv, &report)?;
            let ripple: Vec<f64> = (0..report.rx_ids.len())
                .flat_map(|rx| (0..report.tx_ids.len()).map(move |tx| (rx, tx)))
                .map(|(rx, tx)| report.magnitude_ripple_db(rx, tx))
                .collect();
            json!({
                "rows": report.entries.len(),
                "quantization_bits": report.quantization_bits,
                "scale": report.scale,
                "ripple_db": ripple,
            })
        }
        Scenario::OracleCheck => {
            let grid = params.grid(scenario)?;
            let rows = oracle_check(&mcs_list, &grid, frame, seed)?;
            output::write_oracle(&mut csv, &rows)?;
            json!({
                "rows": rows.len(),
                "max_abs_diff": rows
                    .iter()
                    .map(|r| (r.fsr_model - r.fsr_oracle).abs())
                    .fold(0.0, f64::max),
            })
        }
    };

    let summary = json!({
        "scenario": scenario.name(),
        "config_hash": config_hash(scenario, &scene, params)?,
        "seed": seed,
        "aggregates": aggregates,
    });
    Ok(ScenarioOutput {
        scenario,
        csv,
        summary,
    })
}
