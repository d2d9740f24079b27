//! Lambertian line-of-sight optical channel.
//!
//! Front-ends are point sources/detectors. Each TX→RX pair contributes one
//! path with DC power gain
//!
//! ```text
//! H = (m + 1) A / (2π d²) · cosᵐ(φ) · cos(ψ)    for ψ ≤ FOV, φ < 90°
//! ```
//!
//! and delay `d / c`. The per-subcarrier field response of the pair is
//! `sqrt(H) · exp(-j 2π f τ)`; several transmitters reaching the same
//! receiver add coherently in that response, which is where frequency
//! selectivity comes from. RSSI on the other hand is a wideband power and
//! sums incoherently.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};
use crate::units::{db_to_linear, dbm_to_mw, mw_to_dbm};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Per-chain noise floor of the reference setup.
pub const DEFAULT_NOISE_FLOOR_DBM: f64 = -60.0;

const BORESIGHT_NORM_TOL: f64 = 1e-9;

pub type Vec3 = [f64; 3];

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Unit vector along `a`. Panics on the zero vector.
pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    assert!(n > 0.0, "cannot normalize the zero vector");
    [a[0] / n, a[1] / n, a[2] / n]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Tx,
    Rx,
}

/// Role-specific optical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Optics {
    Tx {
        half_power_semi_angle_deg: f64,
        tx_electrical_power_dbm: f64,
    },
    Rx {
        fov_half_angle_deg: f64,
        active_area_m2: f64,
        /// Responsivity and front-end amplification, lumped.
        conversion_gain_db: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontEnd {
    pub id: String,
    pub position: Vec3,
    pub boresight: Vec3,
    pub optics: Optics,
}

impl FrontEnd {
    pub fn tx(
        id: impl Into<String>,
        position: Vec3,
        boresight: Vec3,
        half_power_semi_angle_deg: f64,
        tx_electrical_power_dbm: f64,
    ) -> Self {
        Self {
            id: id.into(),
            position,
            boresight,
            optics: Optics::Tx {
                half_power_semi_angle_deg,
                tx_electrical_power_dbm,
            },
        }
    }

    pub fn rx(
        id: impl Into<String>,
        position: Vec3,
        boresight: Vec3,
        fov_half_angle_deg: f64,
        active_area_m2: f64,
        conversion_gain_db: f64,
    ) -> Self {
        Self {
            id: id.into(),
            position,
            boresight,
            optics: Optics::Rx {
                fov_half_angle_deg,
                active_area_m2,
                conversion_gain_db,
            },
        }
    }

    pub fn role(&self) -> Role {
        match self.optics {
            Optics::Tx { .. } => Role::Tx,
            Optics::Rx { .. } => Role::Rx,
        }
    }

    /// Points the boresight at `target`.
    pub fn aimed_at(mut self, target: Vec3) -> Self {
        self.boresight = normalize(sub(target, self.position));
        self
    }

    pub fn tx_power_dbm(&self) -> Option<f64> {
        match self.optics {
            Optics::Tx {
                tx_electrical_power_dbm,
                ..
            } => Some(tx_electrical_power_dbm),
            Optics::Rx { .. } => None,
        }
    }

    pub fn set_tx_power_dbm(&mut self, dbm: f64) {
        if let Optics::Tx {
            tx_electrical_power_dbm,
            ..
        } = &mut self.optics
        {
            *tx_electrical_power_dbm = dbm;
        }
    }

    /// Diagnostics for this front-end; `prefix` names it in field paths.
    pub fn validate(&self, prefix: &str) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let field = |name: &str| format!("{prefix}.{name}");

        if self.id.trim().is_empty() {
            diags.push(Diagnostic::new(field("id"), "must be non-empty"));
        }
        if self.position.iter().any(|v| !v.is_finite()) {
            diags.push(Diagnostic::new(
                field("position"),
                "components must be finite",
            ));
        }
        let n = norm(self.boresight);
        if !n.is_finite() || (n - 1.0).abs() > BORESIGHT_NORM_TOL {
            diags.push(Diagnostic::new(
                field("boresight"),
                format!("must have unit norm within {BORESIGHT_NORM_TOL:e} (norm is {n})"),
            ));
        }
        match self.optics {
            Optics::Tx {
                half_power_semi_angle_deg: a,
                tx_electrical_power_dbm: p,
            } => {
                if !(a > 0.0 && a < 90.0) {
                    diags.push(Diagnostic::new(
                        field("half_power_semi_angle_deg"),
                        format!("must satisfy 0 < value < 90 (got {a})"),
                    ));
                }
                if !p.is_finite() {
                    diags.push(Diagnostic::new(
                        field("tx_electrical_power_dbm"),
                        "must be finite",
                    ));
                }
            }
            Optics::Rx {
                fov_half_angle_deg: fov,
                active_area_m2: area,
                conversion_gain_db: g,
            } => {
                if !(fov > 0.0 && fov <= 90.0) {
                    diags.push(Diagnostic::new(
                        field("fov_half_angle_deg"),
                        format!("must satisfy 0 < value <= 90 (got {fov})"),
                    ));
                }
                if !(area > 0.0 && area.is_finite()) {
                    diags.push(Diagnostic::new(
                        field("active_area_m2"),
                        format!("must be > 0 (got {area})"),
                    ));
                }
                if !g.is_finite() {
                    diags.push(Diagnostic::new(
                        field("conversion_gain_db"),
                        "must be finite",
                    ));
                }
            }
        }
        diags
    }
}

/// Full block of a set of TX→RX paths over the frame interval `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Obstacle {
    pub blocked_pairs: Vec<(String, String)>,
    pub start: u64,
    pub end: u64,
}

impl Obstacle {
    pub fn new(blocked_pairs: Vec<(String, String)>, start: u64, end: u64) -> Self {
        Self {
            blocked_pairs,
            start,
            end,
        }
    }

    pub fn is_active(&self, frame_index: u64) -> bool {
        (self.start..self.end).contains(&frame_index)
    }

    pub fn blocks(&self, tx_id: &str, rx_id: &str, frame_index: u64) -> bool {
        self.is_active(frame_index)
            && self
                .blocked_pairs
                .iter()
                .any(|(t, r)| t == tx_id && r == rx_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub front_ends: Vec<FrontEnd>,
    pub obstacles: Vec<Obstacle>,
    pub noise_floor_dbm: f64,
}

impl Scene {
    pub fn new(front_ends: Vec<FrontEnd>, obstacles: Vec<Obstacle>, noise_floor_dbm: f64) -> Self {
        Self {
            front_ends,
            obstacles,
            noise_floor_dbm,
        }
    }

    pub fn transmitters(&self) -> impl Iterator<Item = &FrontEnd> {
        self.front_ends.iter().filter(|fe| fe.role() == Role::Tx)
    }

    pub fn receivers(&self) -> impl Iterator<Item = &FrontEnd> {
        self.front_ends.iter().filter(|fe| fe.role() == Role::Rx)
    }

    pub fn front_end(&self, id: &str) -> Option<&FrontEnd> {
        self.front_ends.iter().find(|fe| fe.id == id)
    }

    pub fn front_end_mut(&mut self, id: &str) -> Option<&mut FrontEnd> {
        self.front_ends.iter_mut().find(|fe| fe.id == id)
    }

    pub fn tx_powers_dbm(&self) -> Vec<f64> {
        self.transmitters()
            .filter_map(FrontEnd::tx_power_dbm)
            .collect()
    }

    /// Copy of the scene keeping every transmitter but only the listed
    /// receivers, in the listed order.
    pub fn with_receivers(&self, rx_ids: &[&str]) -> Result<Scene> {
        let mut front_ends: Vec<FrontEnd> = self.transmitters().cloned().collect();
        for id in rx_ids {
            let fe = self
                .front_end(id)
                .filter(|fe| fe.role() == Role::Rx)
                .ok_or_else(|| Error::Contract(format!("no receiver with id {id:?}")))?;
            front_ends.push(fe.clone());
        }
        Ok(Scene::new(
            front_ends,
            self.obstacles.clone(),
            self.noise_floor_dbm,
        ))
    }

    /// Every violated invariant; empty iff the scene is valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        for (i, fe) in self.front_ends.iter().enumerate() {
            diags.extend(fe.validate(&format!("front_end[{i}]")));
            if self.front_ends[..i].iter().any(|other| other.id == fe.id) {
                diags.push(Diagnostic::new(
                    format!("front_end[{i}].id"),
                    format!("duplicate id {:?}", fe.id),
                ));
            }
        }
        if self.transmitters().next().is_none() {
            diags.push(Diagnostic::new(
                "front_end",
                "scene needs at least one TX front-end",
            ));
        }
        if self.receivers().next().is_none() {
            diags.push(Diagnostic::new(
                "front_end",
                "scene needs at least one RX front-end",
            ));
        }
        if !self.noise_floor_dbm.is_finite() {
            diags.push(Diagnostic::new("noise_floor_dbm", "must be finite"));
        }
        for (i, ob) in self.obstacles.iter().enumerate() {
            if ob.start >= ob.end {
                diags.push(Diagnostic::new(
                    format!("obstacle[{i}].start"),
                    format!("start must be < end (got {} >= {})", ob.start, ob.end),
                ));
            }
            if ob.blocked_pairs.is_empty() {
                diags.push(Diagnostic::new(
                    format!("obstacle[{i}].blocked_pairs"),
                    "must name at least one (tx, rx) pair",
                ));
            }
            for (k, (tx, rx)) in ob.blocked_pairs.iter().enumerate() {
                if !self.transmitters().any(|fe| &fe.id == tx) {
                    diags.push(Diagnostic::new(
                        format!("obstacle[{i}].blocked_pairs[{k}]"),
                        format!("references missing TX id {tx:?}"),
                    ));
                }
                if !self.receivers().any(|fe| &fe.id == rx) {
                    diags.push(Diagnostic::new(
                        format!("obstacle[{i}].blocked_pairs[{k}]"),
                        format!("references missing RX id {rx:?}"),
                    ));
                }
            }
        }
        diags
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let diags = self.validate();
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidScene(diags))
        }
    }

    fn is_blocked(&self, tx_id: &str, rx_id: &str, frame_index: u64) -> bool {
        self.obstacles
            .iter()
            .any(|ob| ob.blocks(tx_id, rx_id, frame_index))
    }
}

/// Lambertian order `m = -ln 2 / ln cos(Φ½)`.
pub fn lambertian_order(half_power_semi_angle_deg: f64) -> Result<f64> {
    if !(half_power_semi_angle_deg > 0.0 && half_power_semi_angle_deg < 90.0) {
        return Err(Error::Domain(format!(
            "half-power semi-angle must lie in (0, 90) degrees, got {half_power_semi_angle_deg}"
        )));
    }
    Ok(-(2f64.ln()) / half_power_semi_angle_deg.to_radians().cos().ln())
}

/// A single line-of-sight path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosPath {
    /// Linear optical power gain.
    pub gain: f64,
    pub delay_s: f64,
}

/// Angles of a TX→RX pair: radiance angle at the TX and incidence angle at
/// the RX, both in degrees, plus the distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry {
    pub distance_m: f64,
    pub radiance_deg: f64,
    pub incidence_deg: f64,
}

pub fn path_geometry(tx: &FrontEnd, rx: &FrontEnd) -> Result<PathGeometry> {
    let d = sub(rx.position, tx.position);
    let distance_m = norm(d);
    if distance_m == 0.0 || !distance_m.is_finite() {
        return Err(Error::DegenerateGeometry(format!(
            "{} and {} share a position",
            tx.id, rx.id
        )));
    }
    let cos_phi = (dot(tx.boresight, d) / distance_m).clamp(-1.0, 1.0);
    let cos_psi = (-dot(rx.boresight, d) / distance_m).clamp(-1.0, 1.0);
    Ok(PathGeometry {
        distance_m,
        radiance_deg: cos_phi.acos().to_degrees(),
        incidence_deg: cos_psi.acos().to_degrees(),
    })
}

/// LOS DC gain and delay of one TX→RX pair.
pub fn los_gain(tx: &FrontEnd, rx: &FrontEnd) -> Result<LosPath> {
    let Optics::Tx {
        half_power_semi_angle_deg,
        ..
    } = tx.optics
    else {
        return Err(Error::Contract(format!("{} is not a transmitter", tx.id)));
    };
    let Optics::Rx {
        fov_half_angle_deg,
        active_area_m2,
        ..
    } = rx.optics
    else {
        return Err(Error::Contract(format!("{} is not a receiver", rx.id)));
    };

    let d = sub(rx.position, tx.position);
    let distance = norm(d);
    if distance == 0.0 || !distance.is_finite() {
        return Err(Error::DegenerateGeometry(format!(
            "{} and {} share a position",
            tx.id, rx.id
        )));
    }
    let delay_s = distance / SPEED_OF_LIGHT;
    let m = lambertian_order(half_power_semi_angle_deg)?;

    let cos_phi = dot(tx.boresight, d) / distance;
    let cos_psi = -dot(rx.boresight, d) / distance;
    if cos_phi <= 0.0 {
        return Ok(LosPath { gain: 0.0, delay_s });
    }
    let psi_deg = cos_psi.clamp(-1.0, 1.0).acos().to_degrees();
    if psi_deg > fov_half_angle_deg || cos_psi <= 0.0 {
        return Ok(LosPath { gain: 0.0, delay_s });
    }

    let gain =
        (m + 1.0) * active_area_m2 / (2.0 * PI * distance * distance) * cos_phi.powf(m) * cos_psi;
    Ok(LosPath { gain, delay_s })
}

/// Per-subcarrier `N_r × N_t` complex response together with its path
/// structure. Entry `(i, j)` at subcarrier `k` is
/// `sqrt(path_gains[i][j]) · exp(-j 2π f_k path_delays[i][j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    tx_ids: Vec<String>,
    rx_ids: Vec<String>,
    subcarrier_freqs: Vec<f64>,
    path_gains: DMatrix<f64>,
    path_delays: DMatrix<f64>,
    entries: Vec<DMatrix<Complex64>>,
}

impl ChannelMatrix {
    /// Builds the matrix from linear power gains and delays (rows = RX).
    pub fn from_paths(
        path_gains: DMatrix<f64>,
        path_delays: DMatrix<f64>,
        subcarrier_freqs: Vec<f64>,
    ) -> Result<Self> {
        let tx_ids = (0..path_gains.ncols()).map(|j| format!("tx{j}")).collect();
        let rx_ids = (0..path_gains.nrows()).map(|i| format!("rx{i}")).collect();
        Self::with_ids(path_gains, path_delays, subcarrier_freqs, tx_ids, rx_ids)
    }

    fn with_ids(
        path_gains: DMatrix<f64>,
        path_delays: DMatrix<f64>,
        subcarrier_freqs: Vec<f64>,
        tx_ids: Vec<String>,
        rx_ids: Vec<String>,
    ) -> Result<Self> {
        if path_gains.shape() != path_delays.shape() {
            return Err(Error::Contract(format!(
                "gain matrix {:?} and delay matrix {:?} differ in shape",
                path_gains.shape(),
                path_delays.shape()
            )));
        }
        if path_gains.is_empty() {
            return Err(Error::Contract("channel needs at least one path".into()));
        }
        if path_gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::Contract("path gains must be finite and >= 0".into()));
        }
        if path_delays.iter().any(|t| !t.is_finite()) {
            return Err(Error::Contract("path delays must be finite".into()));
        }
        let entries = subcarrier_freqs
            .iter()
            .map(|&f| {
                DMatrix::from_fn(path_gains.nrows(), path_gains.ncols(), |i, j| {
                    let phase = -2.0 * PI * f * path_delays[(i, j)];
                    Complex64::from_polar(path_gains[(i, j)].sqrt(), phase)
                })
            })
            .collect();
        Ok(Self {
            tx_ids,
            rx_ids,
            subcarrier_freqs,
            path_gains,
            path_delays,
            entries,
        })
    }

    pub fn n_tx(&self) -> usize {
        self.path_gains.ncols()
    }

    pub fn n_rx(&self) -> usize {
        self.path_gains.nrows()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.subcarrier_freqs.len()
    }

    pub fn tx_ids(&self) -> &[String] {
        &self.tx_ids
    }

    pub fn rx_ids(&self) -> &[String] {
        &self.rx_ids
    }

    pub fn subcarrier_freqs(&self) -> &[f64] {
        &self.subcarrier_freqs
    }

    pub fn path_gains(&self) -> &DMatrix<f64> {
        &self.path_gains
    }

    pub fn path_delays(&self) -> &DMatrix<f64> {
        &self.path_delays
    }

    /// One `N_r × N_t` matrix per subcarrier.
    pub fn entries(&self) -> &[DMatrix<Complex64>] {
        &self.entries
    }

    /// Response seen by a single stream sent from every TX at once:
    /// the coherent sum over TX columns, `N_r × 1` per subcarrier.
    pub fn single_stream_response(&self) -> Vec<DMatrix<Complex64>> {
        self.entries
            .iter()
            .map(|h| DMatrix::from_fn(h.nrows(), 1, |i, _| h.row(i).sum()))
            .collect()
    }

    /// Keeps only the given RX rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_rx()) {
            return Err(Error::Contract(format!("row {bad} out of range")));
        }
        let gains = self.path_gains.select_rows(rows);
        let delays = self.path_delays.select_rows(rows);
        let rx_ids = rows.iter().map(|&r| self.rx_ids[r].clone()).collect();
        Self::with_ids(
            gains,
            delays,
            self.subcarrier_freqs.clone(),
            self.tx_ids.clone(),
            rx_ids,
        )
    }
}

/// Evaluates every TX→RX pair of `scene` at `frame_index`.
///
/// Path gains include the receiver's conversion gain; pairs blocked by an
/// active obstacle get gain exactly zero.
pub fn channel_matrix(
    scene: &Scene,
    frame_index: u64,
    subcarrier_freqs: &[f64],
) -> Result<ChannelMatrix> {
    scene.ensure_valid()?;
    let txs: Vec<&FrontEnd> = scene.transmitters().collect();
    let rxs: Vec<&FrontEnd> = scene.receivers().collect();

    let mut gains = DMatrix::zeros(rxs.len(), txs.len());
    let mut delays = DMatrix::zeros(rxs.len(), txs.len());
    for (i, rx) in rxs.iter().enumerate() {
        let conversion = match rx.optics {
            Optics::Rx {
                conversion_gain_db, ..
            } => db_to_linear(conversion_gain_db),
            Optics::Tx { .. } => unreachable!("filtered to receivers"),
        };
        for (j, tx) in txs.iter().enumerate() {
            let path = los_gain(tx, rx)?;
            delays[(i, j)] = path.delay_s;
            gains[(i, j)] = if scene.is_blocked(&tx.id, &rx.id, frame_index) {
                0.0
            } else {
                path.gain * conversion
            };
        }
    }
    ChannelMatrix::with_ids(
        gains,
        delays,
        subcarrier_freqs.to_vec(),
        txs.iter().map(|fe| fe.id.clone()).collect(),
        rxs.iter().map(|fe| fe.id.clone()).collect(),
    )
}

/// Wideband received power per RX chain: incoherent sum of path gain times
/// TX power. Fully blocked chains report [`crate::units::NO_SIGNAL_DBM`].
pub fn rssi_per_chain(cm: &ChannelMatrix, tx_power_dbm: &[f64]) -> Result<Vec<f64>> {
    if tx_power_dbm.len() != cm.n_tx() {
        return Err(Error::Contract(format!(
            "{} TX powers given for {} transmitters",
            tx_power_dbm.len(),
            cm.n_tx()
        )));
    }
    let powers_mw: Vec<f64> = tx_power_dbm.iter().map(|&p| dbm_to_mw(p)).collect();
    Ok((0..cm.n_rx())
        .map(|i| {
            let total: f64 = powers_mw
                .iter()
                .enumerate()
                .map(|(j, p)| cm.path_gains[(i, j)] * p)
                .sum();
            mw_to_dbm(total)
        })
        .collect())
}
