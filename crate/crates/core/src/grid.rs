use core::f64::consts::PI;

use crate::error::{Error, Result};

/// A uniform grid on the `2π`-periodic torus of dimension 2 or 3.
///
/// Samples and Fourier coefficients share one row-major layout: axis 0 (`x₁`)
/// varies slowest. Along each axis index `i` carries the integer frequency
/// `i` for `i < M/2` and `i - M` otherwise, so frequencies cover `[-M/2, M/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    dim: usize,
    points: usize,
}

impl GridSpec {
    pub fn new(dim: usize, points_per_axis: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if points_per_axis < 16 || !points_per_axis.is_power_of_two() {
            return Err(Error::InvalidResolution(points_per_axis));
        }
        Ok(Self {
            dim,
            points: points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis, `M`.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of samples, `M^N`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn domain_length(&self) -> f64 {
        2.0 * PI
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points as f64
    }

    /// Quadrature weight of one sample, `(2π/M)^N`.
    pub fn cell_volume(&self) -> f64 {
        libm::pow(self.spacing(), self.dim as f64)
    }

    /// Volume of the torus, `(2π)^N`.
    pub fn volume(&self) -> f64 {
        libm::pow(2.0 * PI, self.dim as f64)
    }

    /// Largest retained per-axis frequency under the two-thirds rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.points / 3) as i64
    }

    /// Lowest dyadic index: the band holding `|k| = 1`.
    pub fn q_min(&self) -> i32 {
        0
    }

    /// Largest `q` with `8/3 · 2^q <= M/3`, i.e. `2^q <= M/8`.
    pub fn q_max(&self) -> i32 {
        (self.points / 8).trailing_zeros() as i32
    }

    pub fn freq_of_index(&self, i: usize) -> i64 {
        let m = self.points;
        if i < m / 2 {
            i as i64
        } else {
            i as i64 - m as i64
        }
    }

    pub fn index_of_freq(&self, k: i64) -> usize {
        k.rem_euclid(self.points as i64) as usize
    }

    /// Integer wave vector of a flat index; unused trailing entries are 0.
    pub fn wavevector(&self, flat: usize) -> [i64; 3] {
        let mut out = [0i64; 3];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = self.freq_of_index(rest % self.points);
            rest /= self.points;
        }
        out
    }

    pub fn flat_index(&self, k: &[i64]) -> usize {
        k.iter()
            .take(self.dim)
            .fold(0, |acc, &ki| acc * self.points + self.index_of_freq(ki))
    }

    /// Flat index of `-k`.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let k = self.wavevector(flat);
        let neg = [-k[0], -k[1], -k[2]];
        self.flat_index(&neg[..self.dim])
    }

    pub fn coordinates(&self, flat: usize) -> [f64; 3] {
        let h = self.spacing();
        let mut out = [0.0; 3];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = h * (rest % self.points) as f64;
            rest /= self.points;
        }
        out
    }

    pub fn wavenumber_sq(&self, flat: usize) -> f64 {
        let k = self.wavevector(flat);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
    }

    /// `|k|` for every flat index, in storage order.
    pub fn wavenumbers(&self) -> alloc::vec::Vec<f64> {
        (0..self.len())
            .map(|i| libm::sqrt(self.wavenumber_sq(i)))
            .collect()
    }

    /// True when some component sits on the unmatched Nyquist frequency `-M/2`.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let half = (self.points / 2) as i64;
        self.wavevector(flat)[..self.dim].iter().any(|&k| k == -half)
    }

    pub fn is_dealiased_mode(&self, flat: usize) -> bool {
        let cut = self.dealias_cutoff();
        self.wavevector(flat)[..self.dim].iter().all(|&k| k.abs() <= cut)
    }
}
