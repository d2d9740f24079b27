//! Gray-mapped square constellations with unit average energy.

use num_complex::Complex64;

use crate::mcs::Modulation;

#[derive(Debug, Clone, Copy)]
pub struct Constellation {
    modulation: Modulation,
    bits_per_axis: u32,
    scale: f64,
}

fn gray_to_index(mut g: u32) -> u32 {
    let mut index = 0;
    while g != 0 {
        index ^= g;
        g >>= 1;
    }
    index
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Self {
        let bits_per_axis = match modulation {
            Modulation::Bpsk | Modulation::Qpsk => 1,
            Modulation::Qam16 => 2,
            Modulation::Qam64 => 3,
        };
        // mean of level² over one PAM axis is (L² - 1) / 3
        let levels = f64::from(1u32 << bits_per_axis);
        let axis_energy = (levels * levels - 1.0) / 3.0;
        let axes = if modulation == Modulation::Bpsk {
            1.0
        } else {
            2.0
        };
        Self {
            modulation,
            bits_per_axis,
            scale: 1.0 / (axes * axis_energy).sqrt(),
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.modulation.bits_per_symbol() as usize
    }

    fn pam(&self, bits: &[u8]) -> f64 {
        let g = bits
            .iter()
            .fold(0u32, |acc, &b| (acc << 1) | u32::from(b & 1));
        let index = gray_to_index(g);
        let levels = 1i64 << self.bits_per_axis;
        (2 * i64::from(index) - (levels - 1)) as f64 * self.scale
    }

    fn pam_decide(&self, x: f64, out: &mut [u8]) {
        let levels = 1i64 << self.bits_per_axis;
        let index = ((x / self.scale + (levels - 1) as f64) / 2.0)
            .round()
            .clamp(0.0, (levels - 1) as f64) as u32;
        let g = index ^ (index >> 1);
        let n = out.len();
        for (k, bit) in out.iter_mut().enumerate() {
            *bit = ((g >> (n - 1 - k)) & 1) as u8;
        }
    }

    /// Maps `bits_per_symbol` bits (MSB first, I axis then Q axis).
    pub fn map(&self, bits: &[u8]) -> Complex64 {
        debug_assert_eq!(bits.len(), self.bits_per_symbol());
        if self.modulation == Modulation::Bpsk {
            return Complex64::new(self.pam(bits), 0.0);
        }
        let k = self.bits_per_axis as usize;
        Complex64::new(self.pam(&bits[..k]), self.pam(&bits[k..]))
    }

    /// Hard decision back to bits.
    pub fn demap(&self, symbol: Complex64, out: &mut [u8]) {
        debug_assert_eq!(out.len(), self.bits_per_symbol());
        if self.modulation == Modulation::Bpsk {
            self.pam_decide(symbol.re, out);
            return;
        }
        let k = self.bits_per_axis as usize;
        let (i_bits, q_bits) = out.split_at_mut(k);
        self.pam_decide(symbol.re, i_bits);
        self.pam_decide(symbol.im, q_bits);
    }

    pub fn points(&self) -> Vec<Complex64> {
        let n = self.bits_per_symbol();
        (0..1u32 << n)
            .map(|v| {
                let bits: Vec<u8> = (0..n).map(|k| ((v >> (n - 1 - k)) & 1) as u8).collect();
                self.map(&bits)
            })
            .collect()
    }
}
