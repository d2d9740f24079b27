use num_complex::Complex64;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::units::NO_SIGNAL_DBM;

/// One quantized CSI value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsiEntry {
    pub rx: usize,
    pub tx: usize,
    pub subcarrier: usize,
    pub re: i32,
    pub im: i32,
}

/// Quantized per-subcarrier channel estimates. Stored values are signed
/// `bits`-wide integers; multiply by `scale` to recover the channel.
///
/// An all-zero channel gives an empty report with `scale == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiReport {
    pub rx_ids: Vec<String>,
    pub tx_ids: Vec<String>,
    pub n_subcarriers: usize,
    pub quantization_bits: u32,
    pub scale: f64,
    pub entries: Vec<CsiEntry>,
}

impl CsiReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dequantized(&self, rx: usize, tx: usize) -> Vec<Complex64> {
        self.entries
            .iter()
            .filter(|e| e.rx == rx && e.tx == tx)
            .map(|e| Complex64::new(f64::from(e.re), f64::from(e.im)) * self.scale)
            .collect()
    }

    /// Peak-to-peak dequantized magnitude over subcarriers, in dB.
    /// Infinite if some subcarrier quantizes to zero; the sentinel for an
    /// empty report.
    pub fn magnitude_ripple_db(&self, rx: usize, tx: usize) -> f64 {
        let mags: Vec<f64> = self.dequantized(rx, tx).iter().map(|z| z.norm()).collect();
        if mags.is_empty() {
            return NO_SIGNAL_DBM;
        }
        let max = mags.iter().copied().fold(0.0, f64::max);
        let min = mags.iter().copied().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            20.0 * (max / min).log10()
        }
    }
}

fn quantize(
    values: &[Vec<Complex64>],
    rx_ids: Vec<String>,
    tx_ids: Vec<String>,
    bits: u32,
) -> Result<CsiReport> {
    if !(2..=31).contains(&bits) {
        return Err(Error::Domain(format!("bits must be in 2..=31, got {bits}")));
    }
    let n_subcarriers = values.len();
    let n_tx = tx_ids.len();
    let peak = values
        .iter()
        .flatten()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max);
    let mut report = CsiReport {
        rx_ids,
        tx_ids,
        n_subcarriers,
        quantization_bits: bits,
        scale: 0.0,
        entries: Vec::new(),
    };
    if peak == 0.0 {
        return Ok(report);
    }
    let max_level = (1i32 << (bits - 1)) - 1;
    let min_level = -(1i32 << (bits - 1));
    report.scale = peak / f64::from(max_level);
    let q = |v: f64| ((v / report.scale).round() as i32).clamp(min_level, max_level);
    for (k, h) in values.iter().enumerate() {
        for (idx, z) in h.iter().enumerate() {
            report.entries.push(CsiEntry {
                rx: idx / n_tx,
                tx: idx % n_tx,
                subcarrier: k,
                re: q(z.re),
                im: q(z.im),
            });
        }
    }
    report.entries.sort_by_key(|e| (e.rx, e.tx, e.subcarrier));
    Ok(report)
}

/// Per-(rx, tx) CSI, scaled so the largest real or imaginary part maps to
/// the top quantization level.
pub fn report_csi(cm: &ChannelMatrix, bits: u32) -> Result<CsiReport> {
    let values: Vec<Vec<Complex64>> = cm
        .entries()
        .iter()
        .map(|h| {
            (0..h.nrows())
                .flat_map(|i| (0..h.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| h[(i, j)])
                .collect()
        })
        .collect();
    quantize(
        values.as_slice(),
        cm.rx_ids().to_vec(),
        cm.tx_ids().to_vec(),
        bits,
    )
}

/// CSI of one stream sent from every TX at once, as a receiver sees it.
/// The single TX column is labelled with the TX ids joined by `+`.
pub fn report_csi_response(cm: &ChannelMatrix, bits: u32) -> Result<CsiReport> {
    let values: Vec<Vec<Complex64>> = cm
        .single_stream_response()
        .iter()
        .map(|h| h.iter().copied().collect())
        .collect();
    quantize(
        values.as_slice(),
        cm.rx_ids().to_vec(),
        vec![cm.tx_ids().join("+")],
        bits,
    )
}
