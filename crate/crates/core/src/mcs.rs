//! 802.11n MCS ladder and the SNR → frame-success-rate model.
//!
//! Frame success follows a logistic waterfall in the effective SNR (the
//! weakest stream), centred on each MCS's threshold:
//!
//! ```text
//! FSR_ref = 1 / (1 + exp(-(min_k SNR_k - threshold) / slope))
//! FSR     = FSR_ref ^ (payload_bytes / 1000)
//! ```
//!
//! The slope was fitted once against the uncoded waveform simulator's
//! 1000-byte waterfall (see [`crate::oracle::calibrate_slope_db`]); the
//! thresholds sit [`WATERFALL_OFFSET_DB`] below the SNR at which each MCS
//! decodes essentially error free. Intermediate ladder rungs are
//! calibration values; MCS 0 and MCS 7 are the anchored ones.

use std::io::Write;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Bandwidth;

/// Logistic slope of the FSR waterfall, dB.
pub const FSR_SLOPE_DB: f64 = 0.4;

/// Distance between the error-free SNR of an MCS and its 50 % point, dB.
pub const WATERFALL_OFFSET_DB: f64 = 3.0;

pub const REFERENCE_PAYLOAD_BYTES: u32 = 1000;

/// SNR (dB) at which each single-stream MCS decodes 1000-byte frames
/// essentially error free. MCS 8–15 reuse these per stream.
const ERROR_FREE_SNR_DB: [f64; 8] = [5.0, 8.0, 11.0, 14.0, 18.0, 25.0, 29.0, 35.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Self::Bpsk => 1,
            Self::Qpsk => 2,
            Self::Qam16 => 4,
            Self::Qam64 => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Bpsk => "BPSK",
            Self::Qpsk => "QPSK",
            Self::Qam16 => "16QAM",
            Self::Qam64 => "64QAM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeRate {
    pub num: u32,
    pub den: u32,
}

impl CodeRate {
    pub const HALF: Self = Self { num: 1, den: 2 };
    pub const TWO_THIRDS: Self = Self { num: 2, den: 3 };
    pub const THREE_QUARTERS: Self = Self { num: 3, den: 4 };
    pub const FIVE_SIXTHS: Self = Self { num: 5, den: 6 };

    pub fn value(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

impl std::fmt::Display for CodeRate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuardInterval {
    /// 800 ns, 4.0 µs symbol.
    Long,
    /// 400 ns, 3.6 µs symbol.
    Short,
}

/// HT PHY data rate in Mbit/s:
/// data subcarriers × bits × code rate × streams / symbol duration.
pub fn ht_data_rate_mbps(
    bandwidth: Bandwidth,
    modulation: Modulation,
    code_rate: CodeRate,
    n_streams: u32,
    gi: GuardInterval,
) -> f64 {
    let bits_per_ofdm_symbol = bandwidth.data_subcarriers() as u64
        * u64::from(modulation.bits_per_symbol())
        * u64::from(code_rate.num)
        * u64::from(n_streams);
    // symbol duration in units of 100 ns keeps the division exact
    let symbol_100ns: u64 = match gi {
        GuardInterval::Long => 40,
        GuardInterval::Short => 36,
    };
    (bits_per_ofdm_symbol * 10) as f64 / (u64::from(code_rate.den) * symbol_100ns) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    pub index: u8,
    pub modulation: Modulation,
    pub code_rate: CodeRate,
    pub n_streams: u32,
    /// 20 MHz, 800 ns guard interval.
    pub data_rate_20mhz_mbps: f64,
    /// 40 MHz, 400 ns guard interval (the 802.11n headline rates).
    pub data_rate_40mhz_mbps: f64,
    /// Effective SNR at which the reference frame succeeds half the time.
    pub snr_threshold_db: f64,
}

impl McsEntry {
    /// SNR at which the reference frame is received essentially error free.
    pub fn error_free_snr_db(&self) -> f64 {
        self.snr_threshold_db + WATERFALL_OFFSET_DB
    }
}

static MCS_TABLE: LazyLock<Vec<McsEntry>> = LazyLock::new(|| {
    let per_stream = [
        (Modulation::Bpsk, CodeRate::HALF),
        (Modulation::Qpsk, CodeRate::HALF),
        (Modulation::Qpsk, CodeRate::THREE_QUARTERS),
        (Modulation::Qam16, CodeRate::HALF),
        (Modulation::Qam16, CodeRate::THREE_QUARTERS),
        (Modulation::Qam64, CodeRate::TWO_THIRDS),
        (Modulation::Qam64, CodeRate::THREE_QUARTERS),
        (Modulation::Qam64, CodeRate::FIVE_SIXTHS),
    ];
    (0..16u8)
        .map(|index| {
            let rung = usize::from(index % 8);
            let n_streams = u32::from(index / 8) + 1;
            let (modulation, code_rate) = per_stream[rung];
            McsEntry {
                index,
                modulation,
                code_rate,
                n_streams,
                data_rate_20mhz_mbps: ht_data_rate_mbps(
                    Bandwidth::Mhz20,
                    modulation,
                    code_rate,
                    n_streams,
                    GuardInterval::Long,
                ),
                data_rate_40mhz_mbps: ht_data_rate_mbps(
                    Bandwidth::Mhz40,
                    modulation,
                    code_rate,
                    n_streams,
                    GuardInterval::Short,
                ),
                snr_threshold_db: ERROR_FREE_SNR_DB[rung] - WATERFALL_OFFSET_DB,
            }
        })
        .collect()
});

/// The sixteen single- and dual-stream HT MCSs.
pub fn mcs_table() -> &'static [McsEntry] {
    &MCS_TABLE
}

pub fn mcs(index: u8) -> Result<&'static McsEntry> {
    mcs_table()
        .get(usize::from(index))
        .ok_or_else(|| Error::Domain(format!("MCS index must be 0..=15, got {index}")))
}

pub fn phy_rate(mcs: &McsEntry, bandwidth: Bandwidth) -> f64 {
    match bandwidth {
        Bandwidth::Mhz20 => mcs.data_rate_20mhz_mbps,
        Bandwidth::Mhz40 => mcs.data_rate_40mhz_mbps,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub payload_bytes: u32,
    /// Frames per measurement point.
    pub count: u32,
}

impl FrameSpec {
    pub fn new(payload_bytes: u32, count: u32) -> Result<Self> {
        if payload_bytes == 0 {
            return Err(Error::Domain("payload_bytes must be > 0".into()));
        }
        Ok(Self {
            payload_bytes,
            count,
        })
    }

    pub fn payload_bits(&self) -> usize {
        self.payload_bytes as usize * 8
    }
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self {
            payload_bytes: REFERENCE_PAYLOAD_BYTES,
            count: 1000,
        }
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Frame success probability for the given per-stream SNRs.
pub fn fsr(mcs: &McsEntry, per_stream_snr_db: &[f64], frame: &FrameSpec) -> Result<f64> {
    if per_stream_snr_db.len() != mcs.n_streams as usize {
        return Err(Error::Contract(format!(
            "MCS {} carries {} streams, got {} SNR values",
            mcs.index,
            mcs.n_streams,
            per_stream_snr_db.len()
        )));
    }
    if per_stream_snr_db.iter().any(|s| s.is_nan()) {
        return Err(Error::Contract("SNR must not be NaN".into()));
    }
    if frame.payload_bytes == 0 {
        return Err(Error::Domain("payload_bytes must be > 0".into()));
    }
    let effective = per_stream_snr_db
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let reference = logistic((effective - mcs.snr_threshold_db) / FSR_SLOPE_DB);
    let length_ratio = f64::from(frame.payload_bytes) / f64::from(REFERENCE_PAYLOAD_BYTES);
    Ok(reference.powf(length_ratio))
}

/// SNR at which the reference frame succeeds with probability `p`.
pub fn snr_for_fsr(mcs: &McsEntry, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "target FSR must lie in (0, 1), got {p}"
        )));
    }
    Ok(mcs.snr_threshold_db + FSR_SLOPE_DB * (p / (1.0 - p)).ln())
}

/// Collapses per-subcarrier SNRs (dB) into one value: the arithmetic mean
/// in dB. Any dead subcarrier makes the result the no-signal sentinel.
pub fn effective_snr_db(per_subcarrier_db: &[f64]) -> f64 {
    if per_subcarrier_db.is_empty() {
        return f64::NEG_INFINITY;
    }
    per_subcarrier_db.iter().sum::<f64>() / per_subcarrier_db.len() as f64
}

pub const MCS_CSV_HEADER: [&str; 7] = [
    "index",
    "modulation",
    "code_rate",
    "n_streams",
    "rate_20mhz_mbps",
    "rate_40mhz_mbps",
    "snr_threshold_db",
];

pub fn write_mcs_table_csv<W: Write>(out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MCS_CSV_HEADER)?;
    for e in mcs_table() {
        w.write_record([
            e.index.to_string(),
            e.modulation.name().to_string(),
            e.code_rate.to_string(),
            e.n_streams.to_string(),
            e.data_rate_20mhz_mbps.to_string(),
            e.data_rate_40mhz_mbps.to_string(),
            e.snr_threshold_db.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shape() {
        let t = mcs_table();
        assert_eq!(t.len(), 16);
        for e in t {
            assert_eq!(e.n_streams, if e.index < 8 { 1 } else { 2 });
        }
        assert_eq!(
            (t[0].modulation, t[0].code_rate, t[0].n_streams),
            (Modulation::Bpsk, CodeRate::HALF, 1)
        );
        assert_eq!(
            (t[8].modulation, t[8].code_rate, t[8].n_streams),
            (Modulation::Bpsk, CodeRate::HALF, 2)
        );
        assert_eq!(t[12].modulation, Modulation::Qam16);
        assert_eq!(t[12].code_rate, CodeRate::THREE_QUARTERS);
    }

    #[test]
    fn thresholds_increase_within_group() {
        for group in mcs_table().chunks(8) {
            for w in group.windows(2) {
                assert!(w[1].snr_threshold_db > w[0].snr_threshold_db);
            }
        }
    }

    #[test]
    fn mcs7_sits_30_db_above_mcs0() {
        let t = mcs_table();
        assert_eq!(t[7].snr_threshold_db - t[0].snr_threshold_db, 30.0);
    }

    #[test]
    fn mcs0_error_free_at_5_db() {
        let f = fsr(mcs(0).unwrap(), &[5.0], &FrameSpec::default()).unwrap();
        assert!(f >= 0.999, "{f}");
    }

    #[test]
    fn fsr_is_half_at_threshold() {
        let m = mcs(0).unwrap();
        let f = fsr(m, &[m.snr_threshold_db], &FrameSpec::default()).unwrap();
        assert_eq!(f, 0.5);
    }

    #[test]
    fn fsr_saturates() {
        for m in mcs_table() {
            let snr = vec![m.snr_threshold_db + 60.0; m.n_streams as usize];
            assert!(fsr(m, &snr, &FrameSpec::default()).unwrap() >= 0.9999);
            let snr = vec![f64::NEG_INFINITY; m.n_streams as usize];
            assert_eq!(fsr(m, &snr, &FrameSpec::default()).unwrap(), 0.0);
        }
    }

    #[test]
    fn noise_floor_fails_every_mcs() {
        for m in mcs_table() {
            let snr = vec![0.0; m.n_streams as usize];
            assert!(fsr(m, &snr, &FrameSpec::default()).unwrap() <= 0.01);
        }
    }

    #[test]
    fn stream_count_mismatch() {
        assert!(matches!(
            fsr(mcs(9).unwrap(), &[20.0], &FrameSpec::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn weakest_stream_dominates() {
        let m = mcs(12).unwrap();
        let f = fsr(m, &[60.0, m.snr_threshold_db - 20.0], &FrameSpec::default()).unwrap();
        assert!(f <= 0.01);
    }

    #[test]
    fn longer_frames_fail_more() {
        let m = mcs(3).unwrap();
        let snr = [m.snr_threshold_db + 0.5];
        let short = fsr(m, &snr, &FrameSpec::new(1000, 1).unwrap()).unwrap();
        let long = fsr(m, &snr, &FrameSpec::new(2000, 1).unwrap()).unwrap();
        assert!(long < short);
    }

    #[test]
    fn snr_for_fsr_inverts() {
        let m = mcs(4).unwrap();
        let snr = snr_for_fsr(m, 0.626).unwrap();
        let f = fsr(m, &[snr], &FrameSpec::default()).unwrap();
        assert!((f - 0.626).abs() < 1e-12);
    }

    // Standard 802.11n formula: N_SD · N_BPSCS · R · N_SS / T_SYM.
    #[test]
    fn rate_examples() {
        let t = mcs_table();
        assert_eq!(phy_rate(&t[0], Bandwidth::Mhz20), 52.0 * 1.0 * 0.5 / 4.0);
        assert_eq!(phy_rate(&t[0], Bandwidth::Mhz20), 6.5);
        assert_eq!(phy_rate(&t[7], Bandwidth::Mhz20), 65.0);
        assert_eq!(phy_rate(&t[15], Bandwidth::Mhz40), 300.0);
        assert_eq!(phy_rate(&t[7], Bandwidth::Mhz40), 150.0);
        assert_eq!(
            phy_rate(&t[8], Bandwidth::Mhz20),
            2.0 * phy_rate(&t[0], Bandwidth::Mhz20)
        );
        for k in 0..8 {
            for bw in [Bandwidth::Mhz20, Bandwidth::Mhz40] {
                assert_eq!(phy_rate(&t[k + 8], bw), 2.0 * phy_rate(&t[k], bw));
            }
            assert!(phy_rate(&t[k], Bandwidth::Mhz40) > phy_rate(&t[k], Bandwidth::Mhz20));
        }
        assert_eq!(
            ht_data_rate_mbps(
                Bandwidth::Mhz40,
                Modulation::Qam64,
                CodeRate::FIVE_SIXTHS,
                2,
                GuardInterval::Long
            ),
            270.0
        );
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        write_mcs_table_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 17);
        assert!(text.starts_with("index,modulation,code_rate"));
        assert!(text
            .lines()
            .last()
            .unwrap()
            .starts_with("15,64QAM,5/6,2,130,300,"));
    }
}
