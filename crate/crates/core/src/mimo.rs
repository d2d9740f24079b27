//! Receiver-side spatial processing: maximal-ratio combining, selection
//! combining and zero-forcing demultiplexing of direct-mapped streams.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::mcs::effective_snr_db;
use crate::units::{dbm_to_mw, is_no_signal, linear_to_db, mw_to_dbm, NO_SIGNAL_DBM};

/// Condition number of `HᴴH` above which a subcarrier counts as unsolvable.
pub const SINGULARITY_CUTOFF: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MimoConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_streams: usize,
}

impl MimoConfig {
    pub fn new(n_tx: usize, n_rx: usize, n_streams: usize) -> Result<Self> {
        if n_tx == 0 || n_rx == 0 || n_streams == 0 {
            return Err(Error::Domain(
                "antenna and stream counts must be >= 1".into(),
            ));
        }
        if n_streams > n_tx.min(n_rx) {
            return Err(Error::Domain(format!(
                "{n_streams} streams exceed min(N_t={n_tx}, N_r={n_rx})"
            )));
        }
        Ok(Self {
            n_tx,
            n_rx,
            n_streams,
        })
    }

    /// Largest spatial multiplexing order a linear receiver supports.
    pub fn max_streams(&self) -> usize {
        self.n_tx.min(self.n_rx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedSnr {
    pub linear: f64,
    pub db: f64,
}

/// Post-combining SNR of MRC: the sum of the branch SNRs.
pub fn mrc_combine(per_chain_snr_linear: &[f64]) -> Result<CombinedSnr> {
    if per_chain_snr_linear.is_empty() {
        return Err(Error::Contract("MRC needs at least one branch".into()));
    }
    if per_chain_snr_linear.iter().any(|s| s.is_nan() || *s < 0.0) {
        return Err(Error::Contract("branch SNRs must be >= 0".into()));
    }
    let linear: f64 = per_chain_snr_linear.iter().sum();
    Ok(CombinedSnr {
        linear,
        db: linear_to_db(linear),
    })
}

/// Combined RSSI of an MRC receiver with equal per-chain noise. Blocked
/// chains contribute nothing.
pub fn mrc_rssi_dbm(per_chain_rssi_dbm: &[f64]) -> f64 {
    mw_to_dbm(per_chain_rssi_dbm.iter().map(|&p| dbm_to_mw(p)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub chain: usize,
    pub rssi_dbm: f64,
}

/// Picks the strongest chain; ties go to the lowest index.
pub fn selection_combine(per_chain_rssi_dbm: &[f64]) -> Result<Selection> {
    if per_chain_rssi_dbm.is_empty() {
        return Err(Error::Contract("selection needs at least one chain".into()));
    }
    if per_chain_rssi_dbm.iter().any(|p| p.is_nan()) {
        return Err(Error::Contract("RSSI must not be NaN".into()));
    }
    let mut best: Option<Selection> = None;
    for (chain, &rssi_dbm) in per_chain_rssi_dbm.iter().enumerate() {
        if is_no_signal(rssi_dbm) {
            continue;
        }
        if best.is_none_or(|b| rssi_dbm > b.rssi_dbm) {
            best = Some(Selection { chain, rssi_dbm });
        }
    }
    best.ok_or(Error::NoLink)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostSnr {
    pub per_stream_snr_db: Vec<f64>,
    pub combined_rssi_dbm: f64,
    pub solvable: bool,
    /// Median over subcarriers of cond(HᴴH).
    pub condition_number: f64,
}

impl PostSnr {
    pub fn min_stream_snr_db(&self) -> f64 {
        self.per_stream_snr_db
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// cond(HᴴH) = (σ_max / σ_min)² of H.
pub fn gram_condition_number(h: &DMatrix<Complex64>) -> f64 {
    let sv = h.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        (max / min).powi(2)
    }
}

/// Diagonal of `(HᴴH)⁻¹` when the subcarrier is solvable.
fn zf_noise_enhancement(h: &DMatrix<Complex64>) -> (f64, Option<Vec<f64>>) {
    let cond = gram_condition_number(h);
    if cond.is_nan() || cond > SINGULARITY_CUTOFF {
        return (cond, None);
    }
    let gram = h.adjoint() * h;
    let diag = gram.try_inverse().and_then(|inv| {
        let d: Vec<f64> = inv.diagonal().iter().map(|z| z.re).collect();
        d.iter().all(|v| v.is_finite() && *v > 0.0).then_some(d)
    });
    (cond, diag)
}

/// Zero-forcing post-processing SNR for direct-mapped streams (stream `k`
/// on TX `k`, so `N_s = N_t`).
///
/// Per subcarrier, stream `k` gets `P / (N · [(HᴴH)⁻¹]_kk)`; per-subcarrier
/// values are collapsed with [`effective_snr_db`]. The result is unsolvable
/// when a majority of subcarriers exceed [`SINGULARITY_CUTOFF`].
pub fn zf_decode(
    cm: &ChannelMatrix,
    tx_power_per_stream: f64,
    noise_per_chain: f64,
) -> Result<PostSnr> {
    let n_streams = cm.n_tx();
    if cm.n_rx() < n_streams {
        return Err(Error::UnderDetermined {
            n_rx: cm.n_rx(),
            n_streams,
        });
    }
    if !(tx_power_per_stream >= 0.0 && noise_per_chain > 0.0) {
        return Err(Error::Contract(
            "TX power must be >= 0 and noise power > 0".into(),
        ));
    }

    let mut conds = Vec::with_capacity(cm.n_subcarriers());
    let mut per_stream: Vec<Vec<f64>> = vec![Vec::new(); n_streams];
    for h in cm.entries() {
        let (cond, diag) = zf_noise_enhancement(h);
        conds.push(cond);
        if let Some(diag) = diag {
            for (k, enh) in diag.iter().enumerate() {
                per_stream[k].push(linear_to_db(tx_power_per_stream / (noise_per_chain * enh)));
            }
        }
    }
    let n_solvable = per_stream.first().map_or(0, Vec::len);
    let solvable = 2 * n_solvable > cm.n_subcarriers();

    let per_stream_snr_db = if solvable {
        per_stream.iter().map(|s| effective_snr_db(s)).collect()
    } else {
        vec![NO_SIGNAL_DBM; n_streams]
    };

    conds.sort_by(f64::total_cmp);
    let condition_number = conds.get(conds.len() / 2).copied().unwrap_or(f64::INFINITY);

    let combined_rssi_dbm = mw_to_dbm(cm.path_gains().iter().sum::<f64>() * tx_power_per_stream);

    Ok(PostSnr {
        per_stream_snr_db,
        combined_rssi_dbm,
        solvable,
        condition_number,
    })
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Improvement (dB) of the weakest ZF stream when every RX row is used,
/// over the best subset of exactly `n_streams` rows.
pub fn extra_diversity_gain(cm: &ChannelMatrix, n_streams: usize) -> Result<f64> {
    if n_streams != cm.n_tx() {
        return Err(Error::Contract(format!(
            "direct mapping needs one stream per TX ({} TX, {n_streams} streams)",
            cm.n_tx()
        )));
    }
    if cm.n_rx() <= n_streams {
        return Err(Error::Contract(format!(
            "need more RX rows ({}) than streams ({n_streams})",
            cm.n_rx()
        )));
    }
    let all = zf_decode(cm, 1.0, 1.0)?.min_stream_snr_db();
    let mut best = f64::NEG_INFINITY;
    for rows in k_subsets(cm.n_rx(), n_streams) {
        let sub = cm.select_rows(&rows)?;
        best = best.max(zf_decode(&sub, 1.0, 1.0)?.min_stream_snr_db());
    }
    Ok(all - best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(gains: &[f64], n_rx: usize, n_tx: usize) -> ChannelMatrix {
        ChannelMatrix::from_paths(
            DMatrix::from_row_slice(n_rx, n_tx, gains),
            DMatrix::zeros(n_rx, n_tx),
            vec![0.0, 1.0e6, 2.0e6],
        )
        .unwrap()
    }

    #[test]
    fn mrc_equal_branches_gain_3db() {
        let c = mrc_combine(&[10.0, 10.0]).unwrap();
        assert_eq!(c.linear, 20.0);
        assert!((c.db - 10.0 - 10.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn mrc_dead_branch_adds_nothing() {
        let c = mrc_combine(&[7.0, 0.0]).unwrap();
        assert_eq!(c.linear, 7.0);
    }

    #[test]
    fn mrc_errors() {
        assert!(mrc_combine(&[]).is_err());
        assert!(mrc_combine(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn mrc_rssi_ignores_blocked_chain() {
        assert_eq!(mrc_rssi_dbm(&[-50.0, NO_SIGNAL_DBM]), -50.0);
        assert!(is_no_signal(mrc_rssi_dbm(&[NO_SIGNAL_DBM, NO_SIGNAL_DBM])));
    }

    #[test]
    fn selection_examples() {
        assert_eq!(selection_combine(&[-50.0, -55.0]).unwrap().chain, 0);
        assert_eq!(selection_combine(&[-55.0, -55.0]).unwrap().chain, 0);
        let s = selection_combine(&[NO_SIGNAL_DBM, -58.0]).unwrap();
        assert_eq!((s.chain, s.rssi_dbm), (1, -58.0));
        assert!(matches!(
            selection_combine(&[NO_SIGNAL_DBM, NO_SIGNAL_DBM]),
            Err(Error::NoLink)
        ));
        assert!(selection_combine(&[]).is_err());
    }

    #[test]
    fn config_limits_streams() {
        assert_eq!(MimoConfig::new(2, 3, 2).unwrap().max_streams(), 2);
        assert!(MimoConfig::new(2, 1, 2).is_err());
    }

    #[test]
    fn zf_diagonal_matches_siso() {
        let g = 1e-5;
        let cm = flat(&[g, 0.0, 0.0, g], 2, 2);
        let post = zf_decode(&cm, 1.0, 1e-9).unwrap();
        assert!(post.solvable);
        let siso = 10.0 * (g / 1e-9).log10();
        for s in &post.per_stream_snr_db {
            assert!((s - siso).abs() < 1e-9, "{s} vs {siso}");
        }
        assert!((post.condition_number - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zf_proportional_rows_unsolvable() {
        let cm = flat(&[1e-5, 1e-5, 2e-5, 2e-5], 2, 2);
        let post = zf_decode(&cm, 1.0, 1e-9).unwrap();
        assert!(!post.solvable);
        assert!(post.per_stream_snr_db.iter().all(|s| is_no_signal(*s)));
    }

    #[test]
    fn zf_under_determined() {
        let cm = flat(&[1.0, 1.0], 1, 2);
        assert!(matches!(
            zf_decode(&cm, 1.0, 1.0),
            Err(Error::UnderDetermined {
                n_rx: 1,
                n_streams: 2
            })
        ));
    }

    // Triangular H = [[a, b], [0, c]]: H⁻¹ rows give the noise enhancement
    // 1/a² + b²/(a²c²) for stream 0 and 1/c² for stream 1.
    #[test]
    fn zf_triangular_closed_form() {
        let (a2, b2, c2) = (0.5, 0.5, 1.0);
        let cm = flat(&[a2, b2, 0.0, c2], 2, 2);
        let post = zf_decode(&cm, 1.0, 1.0).unwrap();
        let s0 = -10.0 * (1.0 / a2 + b2 / (a2 * c2)).log10();
        let s1 = -10.0 * (1.0 / c2).log10();
        assert!((post.per_stream_snr_db[0] - s0).abs() < 1e-9);
        assert!((post.per_stream_snr_db[1] - s1).abs() < 1e-9);
    }

    #[test]
    fn diversity_gain_examples() {
        let g = extra_diversity_gain(&flat(&[1.0, 1.0], 2, 1), 1).unwrap();
        assert!((g - 10.0 * 2f64.log10()).abs() < 1e-9);
        let g = extra_diversity_gain(&flat(&[1.0, 0.0], 2, 1), 1).unwrap();
        assert!(g.abs() < 1e-12);
        assert!(extra_diversity_gain(&flat(&[1.0, 0.0, 0.0, 1.0], 2, 2), 2).is_err());
        assert!(extra_diversity_gain(&flat(&[1.0, 1.0], 2, 1), 2).is_err());
    }

    #[test]
    fn subsets() {
        assert_eq!(k_subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }
}
