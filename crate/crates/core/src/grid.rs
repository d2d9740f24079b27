//! 802.11n OFDM subcarrier layout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SUBCARRIER_SPACING_HZ: f64 = 312_500.0;

/// Default centre of the signal band at the optical front-ends.
pub const DEFAULT_CENTER_FREQ_HZ: f64 = 500.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bandwidth {
    #[serde(rename = "20")]
    Mhz20,
    #[serde(rename = "40")]
    Mhz40,
}

impl Bandwidth {
    pub fn from_mhz(mhz: u32) -> Result<Self> {
        match mhz {
            20 => Ok(Self::Mhz20),
            40 => Ok(Self::Mhz40),
            other => Err(Error::Domain(format!(
                "bandwidth must be 20 or 40 MHz, got {other}"
            ))),
        }
    }

    pub fn mhz(self) -> u32 {
        match self {
            Self::Mhz20 => 20,
            Self::Mhz40 => 40,
        }
    }

    /// Data subcarriers per OFDM symbol (HT mixed format).
    pub fn data_subcarriers(self) -> usize {
        match self {
            Self::Mhz20 => 52,
            Self::Mhz40 => 108,
        }
    }

    /// Signed indices of the data subcarriers, ascending.
    pub fn data_subcarrier_indices(self) -> Vec<i32> {
        let (edge, nulls, pilots): (i32, &[i32], &[i32]) = match self {
            Self::Mhz20 => (28, &[0], &[7, 21]),
            Self::Mhz40 => (58, &[-1, 0, 1], &[11, 25, 53]),
        };
        (-edge..=edge)
            .filter(|k| !nulls.contains(k) && !pilots.contains(&k.abs()))
            .collect()
    }
}

/// Absolute subcarrier frequencies of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubcarrierGrid {
    pub bandwidth: Bandwidth,
    pub center_freq_hz: f64,
}

impl SubcarrierGrid {
    pub fn new(bandwidth: Bandwidth, center_freq_hz: f64) -> Self {
        Self {
            bandwidth,
            center_freq_hz,
        }
    }

    pub fn freqs(&self) -> Vec<f64> {
        self.bandwidth
            .data_subcarrier_indices()
            .into_iter()
            .map(|k| self.center_freq_hz + f64::from(k) * SUBCARRIER_SPACING_HZ)
            .collect()
    }
}

impl Default for SubcarrierGrid {
    fn default() -> Self {
        Self::new(Bandwidth::Mhz20, DEFAULT_CENTER_FREQ_HZ)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_subcarrier_counts() {
        for bw in [Bandwidth::Mhz20, Bandwidth::Mhz40] {
            assert_eq!(bw.data_subcarrier_indices().len(), bw.data_subcarriers());
        }
    }

    #[test]
    fn grid_is_symmetric_about_center() {
        let grid = SubcarrierGrid::new(Bandwidth::Mhz40, 1.0e9);
        let f = grid.freqs();
        assert_eq!(f.len(), 108);
        assert!((f[0] + f[107] - 2.0e9).abs() < 1e-3);
        assert!((f[107] - f[0] - 116.0 * SUBCARRIER_SPACING_HZ).abs() < 1e-3);
    }

    #[test]
    fn rejects_odd_bandwidth() {
        assert!(Bandwidth::from_mhz(80).is_err());
    }
}
