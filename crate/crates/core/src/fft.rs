//! Iterative radix-2 FFT along every axis of a row-major cube.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::grid::GridSpec;

pub(crate) struct FftPlan {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..n / 2)
            .map(|j| {
                let theta = -2.0 * PI * j as f64 / n as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        Self { n, twiddles, bitrev }
    }

    /// Unnormalized transform with kernel `exp(∓ 2πi jk/n)`.
    fn transform_line(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for j in 0..half {
                    let mut w = self.twiddles[j * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + j];
                    let b = buf[start + j + half] * w;
                    buf[start + j] = a + b;
                    buf[start + j + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

/// In-place multidimensional transform of `data` laid out on `grid`.
pub(crate) fn transform(grid: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let m = grid.points();
    let plan = FftPlan::new(m);
    let total = grid.len();
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..grid.dim() {
        let stride = m.pow((grid.dim() - 1 - axis) as u32);
        let block = stride * m;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + i * stride];
                }
                plan.transform_line(&mut line, inverse);
                for (i, value) in line.iter().enumerate() {
                    data[base + i * stride] = *value;
                }
            }
        }
    }
}
