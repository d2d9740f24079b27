//! Symbol-level OFDM Monte-Carlo link, used to cross-check the analytic
//! FSR model and the combining/ZF math.
//!
//! A frame is `payload_bytes · 8` uncoded bits split evenly over the
//! streams, Gray-mapped onto the MCS constellation and spread over the
//! channel's subcarriers. Each RX chain adds circularly-symmetric complex
//! Gaussian noise; the receiver equalizes with genie CSI (MRC or selection
//! for one stream, zero forcing otherwise) and makes hard decisions. The
//! frame succeeds iff every bit is correct.
//!
//! `snr_db` is the per-stream transmit power (unit-energy symbols) over the
//! per-chain noise power; the channel gain applies on top of it.

mod modulation;

pub use modulation::Constellation;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::mcs::{FrameSpec, McsEntry, Modulation, REFERENCE_PAYLOAD_BYTES};
use crate::mimo::{gram_condition_number, SINGULARITY_CUTOFF};

/// Single-stream receive combining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combiner {
    #[default]
    Mrc,
    Selection,
}

/// How the uncoded link is aligned with the coded MCS ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodingGain {
    /// Raw uncoded link.
    None,
    /// SNR shifted per MCS so the 1000-byte waterfall midpoint lands on the
    /// ladder threshold.
    MatchLadder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutcome {
    pub bit_errors: usize,
    pub n_bits: usize,
    pub frame_ok: bool,
    /// Mean noiseless received power per subcarrier use, per RX chain.
    pub rx_signal_power: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oracle {
    pub coding_gain: CodingGain,
}

fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Uncoded Gray-mapped bit error rate at symbol SNR `snr_linear`.
/// Exact for BPSK and QPSK, nearest-neighbour approximation for QAM.
pub fn uncoded_ber(modulation: Modulation, snr_linear: f64) -> f64 {
    match modulation {
        Modulation::Bpsk => q_function((2.0 * snr_linear).sqrt()),
        Modulation::Qpsk => q_function(snr_linear.sqrt()),
        Modulation::Qam16 | Modulation::Qam64 => {
            let m = f64::from(1u32 << modulation.bits_per_symbol());
            let k = f64::from(modulation.bits_per_symbol());
            (4.0 / k) * (1.0 - 1.0 / m.sqrt()) * q_function((3.0 * snr_linear / (m - 1.0)).sqrt())
        }
    }
}

/// Probability that `n_bits` uncoded bits all arrive intact.
pub fn uncoded_frame_success(modulation: Modulation, snr_db: f64, n_bits: usize) -> f64 {
    let ber = uncoded_ber(modulation, 10f64.powf(snr_db / 10.0));
    (n_bits as f64 * (-ber).ln_1p()).exp()
}

/// SNR (dB) at which an uncoded `n_bits` frame succeeds half the time.
pub fn uncoded_midpoint_snr_db(modulation: Modulation, n_bits: usize) -> f64 {
    let (mut lo, mut hi) = (-20.0_f64, 60.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if uncoded_frame_success(modulation, mid, n_bits) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Least-squares logistic slope (dB) of the uncoded frame-success
/// waterfall, with the midpoint pinned at the 50 % point.
pub fn calibrate_slope_db(modulation: Modulation, n_bits: usize) -> f64 {
    let mid = uncoded_midpoint_snr_db(modulation, n_bits);
    let xs: Vec<f64> = (-400..=400).map(|i| mid + f64::from(i) * 0.01).collect();
    let target: Vec<f64> = xs
        .iter()
        .map(|&x| uncoded_frame_success(modulation, x, n_bits))
        .collect();
    let cost = |s: f64| -> f64 {
        xs.iter()
            .zip(&target)
            .map(|(&x, &f)| {
                let model = 1.0 / (1.0 + (-(x - mid) / s).exp());
                (model - f).powi(2)
            })
            .sum()
    };
    // golden-section search
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.05_f64, 3.0_f64);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    for _ in 0..100 {
        if cost(c) < cost(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    0.5 * (a + b)
}

/// Per-subcarrier linear equalizer: `n_streams × n_rx`.
fn equalizers(
    cm: &ChannelMatrix,
    n_streams: usize,
    combiner: Combiner,
) -> Vec<Vec<Vec<Complex64>>> {
    let zero = Complex64::new(0.0, 0.0);
    let selected_chain = (0..cm.n_rx())
        .map(|i| {
            let power: f64 = cm.entries().iter().map(|h| h[(i, 0)].norm_sqr()).sum();
            (i, power)
        })
        .fold((0, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        })
        .0;

    cm.entries()
        .iter()
        .map(|h_full| {
            let h = h_full.columns(0, n_streams).into_owned();
            if n_streams == 1 {
                let mut w = vec![zero; cm.n_rx()];
                match combiner {
                    Combiner::Mrc => {
                        let energy: f64 = h.iter().map(|z| z.norm_sqr()).sum();
                        if energy > 0.0 {
                            for (i, wi) in w.iter_mut().enumerate() {
                                *wi = h[(i, 0)].conj() / energy;
                            }
                        }
                    }
                    Combiner::Selection => {
                        let hc = h[(selected_chain, 0)];
                        if hc.norm_sqr() > 0.0 {
                            w[selected_chain] = hc.inv();
                        }
                    }
                }
                return vec![w];
            }
            let w: DMatrix<Complex64> = if gram_condition_number(&h) <= SINGULARITY_CUTOFF {
                (h.adjoint() * &h)
                    .try_inverse()
                    .map(|g| g * h.adjoint())
                    .unwrap_or_else(|| DMatrix::zeros(n_streams, cm.n_rx()))
            } else {
                // Rank-deficient: best the receiver can do is the
                // least-squares projection, which leaves the streams mixed.
                h.clone()
                    .pseudo_inverse(1e-12)
                    .unwrap_or_else(|_| DMatrix::zeros(n_streams, cm.n_rx()))
            };
            (0..n_streams)
                .map(|s| (0..cm.n_rx()).map(|i| w[(s, i)]).collect())
                .collect()
        })
        .collect()
}

impl Oracle {
    pub fn uncoded() -> Self {
        Self {
            coding_gain: CodingGain::None,
        }
    }

    pub fn calibrated() -> Self {
        Self {
            coding_gain: CodingGain::MatchLadder,
        }
    }

    /// SNR shift (dB) applied before the uncoded link.
    pub fn snr_offset_db(&self, mcs: &McsEntry) -> f64 {
        match self.coding_gain {
            CodingGain::None => 0.0,
            CodingGain::MatchLadder => {
                let reference_bits = REFERENCE_PAYLOAD_BYTES as usize * 8;
                uncoded_midpoint_snr_db(mcs.modulation, reference_bits) - mcs.snr_threshold_db
            }
        }
    }

    fn check(&self, cm: &ChannelMatrix, mcs: &McsEntry, frame: &FrameSpec) -> Result<()> {
        let n_streams = mcs.n_streams as usize;
        if cm.n_rx() < n_streams {
            return Err(Error::UnderDetermined {
                n_rx: cm.n_rx(),
                n_streams,
            });
        }
        if cm.n_tx() < n_streams {
            return Err(Error::Contract(format!(
                "{n_streams} streams need as many transmitters, channel has {}",
                cm.n_tx()
            )));
        }
        if cm.n_subcarriers() == 0 {
            return Err(Error::Contract("channel has no subcarriers".into()));
        }
        if frame.payload_bytes == 0 {
            return Err(Error::Domain("payload_bytes must be > 0".into()));
        }
        Ok(())
    }

    pub fn simulate_frame(
        &self,
        cm: &ChannelMatrix,
        mcs: &McsEntry,
        frame: &FrameSpec,
        snr_db: f64,
        seed: u64,
    ) -> Result<FrameOutcome> {
        self.simulate_frame_with(cm, mcs, frame, snr_db, seed, Combiner::Mrc)
    }

    pub fn simulate_frame_with(
        &self,
        cm: &ChannelMatrix,
        mcs: &McsEntry,
        frame: &FrameSpec,
        snr_db: f64,
        seed: u64,
        combiner: Combiner,
    ) -> Result<FrameOutcome> {
        self.check(cm, mcs, frame)?;
        let eq = equalizers(cm, mcs.n_streams as usize, combiner);
        let effective_snr_db = snr_db + self.snr_offset_db(mcs);
        Ok(run_frame(cm, mcs, frame, effective_snr_db, seed, &eq))
    }
}

fn run_frame(
    cm: &ChannelMatrix,
    mcs: &McsEntry,
    frame: &FrameSpec,
    snr_db: f64,
    seed: u64,
    eq: &[Vec<Vec<Complex64>>],
) -> FrameOutcome {
    let n_streams = mcs.n_streams as usize;
    let n_rx = cm.n_rx();
    let n_sc = cm.n_subcarriers();
    let constellation = Constellation::new(mcs.modulation);
    let bps = constellation.bits_per_symbol();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n_bits = frame.payload_bits();
    let per_stream_bits: Vec<usize> = (0..n_streams)
        .map(|s| n_bits / n_streams + usize::from(s < n_bits % n_streams))
        .collect();
    let n_slots = per_stream_bits[0].div_ceil(bps);

    // Payload bits, zero padded to whole symbols.
    let bits: Vec<Vec<u8>> = per_stream_bits
        .iter()
        .map(|&nb| {
            let mut v: Vec<u8> = (0..nb).map(|_| u8::from(rng.random::<bool>())).collect();
            v.resize(n_slots * bps, 0);
            v
        })
        .collect();

    let noise_sigma = (10f64.powf(-snr_db / 10.0) / 2.0).sqrt();
    let channel: Vec<&DMatrix<Complex64>> = cm.entries().iter().collect();

    let mut tx = vec![Complex64::new(0.0, 0.0); n_streams];
    let mut rx = vec![Complex64::new(0.0, 0.0); n_rx];
    let mut decided = vec![0u8; bps];
    let mut rx_power = vec![0.0; n_rx];
    let mut bit_errors = 0usize;

    for t in 0..n_slots {
        let k = t % n_sc;
        let h = channel[k];
        for (s, x) in tx.iter_mut().enumerate() {
            *x = constellation.map(&bits[s][t * bps..(t + 1) * bps]);
        }
        for (i, y) in rx.iter_mut().enumerate() {
            let mut signal = Complex64::new(0.0, 0.0);
            for (s, x) in tx.iter().enumerate() {
                signal += h[(i, s)] * x;
            }
            rx_power[i] += signal.norm_sqr();
            let n_re: f64 = rng.sample(StandardNormal);
            let n_im: f64 = rng.sample(StandardNormal);
            *y = signal + Complex64::new(n_re, n_im) * noise_sigma;
        }
        for s in 0..n_streams {
            let estimate: Complex64 = eq[k][s].iter().zip(&rx).map(|(w, y)| w * y).sum();
            constellation.demap(estimate, &mut decided);
            let start = t * bps;
            let valid = per_stream_bits[s].saturating_sub(start).min(bps);
            bit_errors += decided[..valid]
                .iter()
                .zip(&bits[s][start..start + valid])
                .filter(|(a, b)| a != b)
                .count();
        }
    }

    for p in &mut rx_power {
        *p /= n_slots as f64;
    }
    FrameOutcome {
        bit_errors,
        n_bits,
        frame_ok: bit_errors == 0,
        rx_signal_power: rx_power,
    }
}

impl Oracle {
    /// Fraction of `n_frames` frames decoded without error; frame `i` uses
    /// seed `seed + i`.
    pub fn empirical_fsr(
        &self,
        cm: &ChannelMatrix,
        mcs: &McsEntry,
        frame: &FrameSpec,
        snr_db: f64,
        n_frames: u32,
        seed: u64,
    ) -> Result<f64> {
        if n_frames == 0 {
            return Err(Error::Contract("n_frames must be >= 1".into()));
        }
        self.check(cm, mcs, frame)?;
        let eq = equalizers(cm, mcs.n_streams as usize, Combiner::Mrc);
        let effective_snr_db = snr_db + self.snr_offset_db(mcs);
        let ok = (0..u64::from(n_frames))
            .into_par_iter()
            .filter(|&i| {
                run_frame(cm, mcs, frame, effective_snr_db, seed.wrapping_add(i), &eq).frame_ok
            })
            .count();
        Ok(ok as f64 / f64::from(n_frames))
    }
}

/// Raw uncoded frame simulation.
pub fn simulate_frame(
    cm: &ChannelMatrix,
    mcs: &McsEntry,
    frame: &FrameSpec,
    snr_db: f64,
    seed: u64,
) -> Result<FrameOutcome> {
    Oracle::uncoded().simulate_frame(cm, mcs, frame, snr_db, seed)
}

/// Empirical FSR of the ladder-calibrated oracle.
pub fn empirical_fsr(
    cm: &ChannelMatrix,
    mcs: &McsEntry,
    frame: &FrameSpec,
    snr_db: f64,
    n_frames: u32,
    seed: u64,
) -> Result<f64> {
    Oracle::calibrated().empirical_fsr(cm, mcs, frame, snr_db, n_frames, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcs::{mcs, FSR_SLOPE_DB};

    fn flat(gains: &[f64], n_rx: usize, n_tx: usize) -> ChannelMatrix {
        ChannelMatrix::from_paths(
            DMatrix::from_row_slice(n_rx, n_tx, gains),
            DMatrix::zeros(n_rx, n_tx),
            crate::grid::SubcarrierGrid::default().freqs(),
        )
        .unwrap()
    }

    #[test]
    fn q_function_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        // Q(sqrt(20)) for BPSK at 10 dB
        assert!((q_function(20f64.sqrt()) - 3.872_108_215_522_05e-6).abs() < 1e-15);
    }

    #[test]
    fn slope_calibration_reproduces_constant() {
        for m in [Modulation::Bpsk, Modulation::Qpsk] {
            let s = calibrate_slope_db(m, 8000);
            assert!((s - FSR_SLOPE_DB).abs() < 0.02, "{m:?}: {s}");
        }
    }

    #[test]
    fn midpoint_is_half() {
        let mid = uncoded_midpoint_snr_db(Modulation::Bpsk, 8000);
        assert!((uncoded_frame_success(Modulation::Bpsk, mid, 8000) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn under_determined_rejected() {
        let cm = flat(&[1.0, 1.0], 1, 2);
        let r = simulate_frame(&cm, mcs(8).unwrap(), &FrameSpec::default(), 30.0, 1);
        assert!(matches!(r, Err(Error::UnderDetermined { .. })));
    }

    #[test]
    fn deterministic_for_seed() {
        let cm = flat(&[1.0, 0.3], 2, 1);
        let m = mcs(1).unwrap();
        let a = simulate_frame(&cm, m, &FrameSpec::default(), 9.0, 42).unwrap();
        let b = simulate_frame(&cm, m, &FrameSpec::default(), 9.0, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_full_rank_any_mcs() {
        let cm = flat(&[1.0, 0.25, 0.16, 0.81], 2, 2);
        for m in crate::mcs::mcs_table() {
            let out = simulate_frame(&cm, m, &FrameSpec::default(), 200.0, 3).unwrap();
            assert_eq!(out.bit_errors, 0, "MCS {}", m.index);
        }
    }

    #[test]
    fn odd_payload_splits_cleanly() {
        let cm = flat(&[1.0, 0.0, 0.0, 1.0], 2, 2);
        let frame = FrameSpec::new(3, 1).unwrap();
        let out = simulate_frame(&cm, mcs(12).unwrap(), &frame, 200.0, 0).unwrap();
        assert_eq!(out.n_bits, 24);
        assert!(out.frame_ok);
    }
}
