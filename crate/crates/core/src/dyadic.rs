//! Homogeneous Littlewood-Paley decomposition on the torus.

use alloc::vec::Vec;

use crate::field::SpectralField;
use crate::grid::GridSpec;

/// Radial profile `φ` of the dyadic partition of unity.
///
/// `φ(ρ) = χ(ρ/2) - χ(ρ)` where `χ` is a mollified step equal to 1 on
/// `[0, 3/4]` and 0 on `[1, ∞)`; the telescoping sum gives
/// `Σ_q φ(2^{-q} ρ) = 1` for `ρ > 0`, and the sum is re-normalized pointwise
/// to remove rounding. The support is `[3/4, 2] ⊂ [3/4, 8/3]`.
///
/// With this step window every integer radius `2^j` lies in exactly one block
/// (block `j`), so on the torus the ladder starts at `q = 0` with `|k| = 1`
/// entirely inside it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionProfile {
    pub shell_lo: f64,
    pub shell_hi: f64,
    step_lo: f64,
    step_hi: f64,
}

impl Default for PartitionProfile {
    fn default() -> Self {
        Self::standard()
    }
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        libm::exp(-1.0 / t)
    }
}

impl PartitionProfile {
    pub fn standard() -> Self {
        Self {
            shell_lo: 0.75,
            shell_hi: 8.0 / 3.0,
            step_lo: 0.75,
            step_hi: 1.0,
        }
    }

    /// The smooth step `χ`.
    pub fn cutoff(&self, rho: f64) -> f64 {
        if rho <= self.step_lo {
            1.0
        } else if rho >= self.step_hi {
            0.0
        } else {
            let up = bump(self.step_hi - rho);
            up / (up + bump(rho - self.step_lo))
        }
    }

    fn raw(&self, rho: f64) -> f64 {
        self.cutoff(0.5 * rho) - self.cutoff(rho)
    }

    /// Dyadic indices `q` with `2^{-q} ρ` inside the support.
    fn active_range(&self, rho: f64) -> (i32, i32) {
        let lo = libm::floor(libm::log2(rho / self.shell_hi)) as i32;
        let hi = libm::ceil(libm::log2(rho / self.shell_lo)) as i32;
        (lo, hi)
    }

    /// `φ(ρ)`, normalized so that the dyadic sum is 1 to machine precision.
    pub fn value(&self, rho: f64) -> f64 {
        if !(rho > self.shell_lo && rho < self.shell_hi) {
            return 0.0;
        }
        let raw = self.raw(rho);
        if raw == 0.0 {
            return 0.0;
        }
        let (lo, hi) = self.active_range(rho);
        let total: f64 = (lo..=hi).map(|q| self.raw(libm::ldexp(rho, -q))).sum();
        raw / total
    }

    /// `Σ_{q ∈ ℤ} φ(2^{-q} ρ)`.
    pub fn dyadic_sum(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let (lo, hi) = self.active_range(rho);
        (lo - 1..=hi + 1).map(|q| self.value(libm::ldexp(rho, -q))).sum()
    }

    /// Weight of frequency radius `rho` in block `q`.
    pub fn block_weight(&self, q: i32, rho: f64) -> f64 {
        self.value(libm::ldexp(rho, -q))
    }
}

/// Sparse dyadic weights `φ(2^{-q}|k|)` of a grid for `q ∈ [q_min, q_max]`.
#[derive(Clone, Debug)]
pub struct DyadicLadder {
    grid: GridSpec,
    profile: PartitionProfile,
    q_min: i32,
    q_max: i32,
    blocks: Vec<Vec<(usize, f64)>>,
    coverage: Vec<f64>,
}

impl DyadicLadder {
    pub fn new(grid: &GridSpec) -> Self {
        Self::with_profile(grid, PartitionProfile::standard())
    }

    pub fn with_profile(grid: &GridSpec, profile: PartitionProfile) -> Self {
        let q_min = grid.q_min();
        let q_max = grid.q_max();
        let radii = grid.wavenumbers();
        let mut coverage = alloc::vec![0.0; grid.len()];
        let blocks = (q_min..=q_max)
            .map(|q| {
                let mut entries = Vec::new();
                for (i, &rho) in radii.iter().enumerate() {
                    if i == 0 {
                        continue;
                    }
                    let w = profile.block_weight(q, rho);
                    if w > 0.0 {
                        entries.push((i, w));
                        coverage[i] += w;
                    }
                }
                entries
            })
            .collect();
        Self {
            grid: *grid,
            profile,
            q_min,
            q_max,
            blocks,
            coverage,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn profile(&self) -> &PartitionProfile {
        &self.profile
    }

    pub fn q_min(&self) -> i32 {
        self.q_min
    }

    pub fn q_max(&self) -> i32 {
        self.q_max
    }

    pub fn q_range(&self) -> core::ops::RangeInclusive<i32> {
        self.q_min..=self.q_max
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub(crate) fn entries(&self, q: i32) -> &[(usize, f64)] {
        let idx = q - self.q_min;
        if idx < 0 || idx as usize >= self.blocks.len() {
            &[]
        } else {
            &self.blocks[idx as usize]
        }
    }

    /// `Σ_q φ(2^{-q}|k|)` over the retained range, per flat index.
    pub fn coverage(&self, flat: usize) -> f64 {
        self.coverage[flat]
    }

    /// Nonzero modes fully represented by the retained blocks.
    pub fn is_retained(&self, flat: usize) -> bool {
        flat != 0 && (self.coverage[flat] - 1.0).abs() <= 1e-12
    }

    /// `Δ_q u`; zero outside the retained range.
    pub fn block(&self, field: &SpectralField, q: i32) -> SpectralField {
        let mut out = SpectralField::zeros(field.grid());
        let src = field.coeffs();
        let dst = out.coeffs_mut();
        for &(i, w) in self.entries(q) {
            dst[i] = src[i] * w;
        }
        out
    }

    /// `Σ_q |φ_q(k)|² |û(k)|²` for one block: `(2π)^{-N} ‖Δ_q u‖²_{L²}`.
    pub(crate) fn block_energy(&self, field: &SpectralField, q: i32) -> f64 {
        let c = field.coeffs();
        self.entries(q)
            .iter()
            .map(|&(i, w)| w * w * c[i].norm_sqr())
            .sum()
    }

    /// `S_q u = mean + Σ_{k ≤ q-1} Δ_k u`.
    pub fn low_freq_cutoff(&self, field: &SpectralField, q: i32) -> SpectralField {
        let mut out = SpectralField::constant(field.grid(), field.mean());
        for k in self.q_min..q.min(self.q_max + 1) {
            out += &self.block(field, k);
        }
        out
    }

    pub fn decompose(&self, field: &SpectralField) -> DyadicBlocks {
        DyadicBlocks {
            q_min: self.q_min,
            q_max: self.q_max,
            mean: field.mean(),
            blocks: self.q_range().map(|q| self.block(field, q)).collect(),
        }
    }

    /// Fraction of the mean-free `L²` energy that the retained blocks miss.
    pub fn truncated_fraction(&self, fields: &[SpectralField]) -> f64 {
        let mut total = 0.0;
        let mut lost = 0.0;
        for f in fields {
            for (i, c) in f.coeffs().iter().enumerate().skip(1) {
                let e = c.norm_sqr();
                total += e;
                let miss = 1.0 - self.coverage[i];
                lost += e * miss * miss;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            lost / total
        }
    }
}

/// `Δ_q u` for every retained `q`, plus the separately tracked mean.
#[derive(Clone, Debug)]
pub struct DyadicBlocks {
    pub q_min: i32,
    pub q_max: i32,
    pub mean: f64,
    pub blocks: Vec<SpectralField>,
}

impl DyadicBlocks {
    pub fn get(&self, q: i32) -> Option<&SpectralField> {
        if q < self.q_min || q > self.q_max {
            None
        } else {
            self.blocks.get((q - self.q_min) as usize)
        }
    }

    /// `mean + Σ_q Δ_q u`.
    pub fn reconstruct(&self) -> Option<SpectralField> {
        let first = self.blocks.first()?;
        let mut out = SpectralField::constant(first.grid(), self.mean);
        for b in &self.blocks {
            out += b;
        }
        Some(out)
    }
}

pub fn dyadic_decompose(field: &SpectralField, profile: &PartitionProfile) -> DyadicBlocks {
    DyadicLadder::with_profile(field.grid(), *profile).decompose(field)
}

pub fn low_freq_cutoff(field: &SpectralField, q: i32, profile: &PartitionProfile) -> SpectralField {
    DyadicLadder::with_profile(field.grid(), *profile).low_freq_cutoff(field, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops;
    use crate::random::{random_field, SpectrumSpec};
    use rand::SeedableRng;

    #[test]
    fn profile_support_and_partition() {
        let p = PartitionProfile::standard();
        for i in 0..2000 {
            let rho = 0.01 + i as f64 * 0.005;
            let v = p.value(rho);
            assert!((0.0..=1.0).contains(&v));
            if !(0.75..=8.0 / 3.0).contains(&rho) {
                assert_eq!(v, 0.0, "rho = {rho}");
            }
            assert!((p.dyadic_sum(rho) - 1.0).abs() < 1e-12, "rho = {rho}");
        }
    }

    #[test]
    fn powers_of_two_sit_in_one_block() {
        let p = PartitionProfile::standard();
        assert_eq!(p.value(1.0), 1.0);
        assert_eq!(p.value(2.0), 0.0);
        assert_eq!(p.block_weight(1, 2.0), 1.0);
        assert_eq!(p.block_weight(0, 2.0), 0.0);
    }

    #[test]
    fn single_mode_blocks() {
        let grid = GridSpec::new(2, 64).unwrap();
        let ladder = DyadicLadder::new(&grid);
        let u = SpectralField::cosine(&grid, &[2, 0], 1.0);
        let active: Vec<i32> = ladder
            .q_range()
            .filter(|&q| ladder.block(&u, q).max_abs_coeff() > 0.0)
            .collect();
        assert_eq!(active, [1]);
        // |k| = √10 lies in (3/2, 2)·2, shared by blocks 1 and 2
        let w = SpectralField::from_fn(&grid, |x| libm::cos(x[0] + 3.0 * x[1]));
        let active: Vec<i32> = ladder
            .q_range()
            .filter(|&q| ladder.block(&w, q).max_abs_coeff() > 1e-12)
            .collect();
        assert_eq!(active, [1, 2]);
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let grid = GridSpec::new(2, 64).unwrap();
        let ladder = DyadicLadder::new(&grid);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let spec = SpectrumSpec::retained(&grid);
        let u = &random_field(&grid, &spec, &mut rng) + &SpectralField::constant(&grid, 0.7);
        let blocks = ladder.decompose(&u);
        let back = blocks.reconstruct().unwrap();
        assert!(back.max_abs_difference(&u) <= 1e-10 * u.max_abs_coeff());
        for q in ladder.q_range() {
            for k in ladder.q_range() {
                if (q - k).abs() >= 2 {
                    let qk = ladder.block(&ladder.block(&u, k), q);
                    assert!(qk.is_zero());
                }
            }
        }
        let s2 = ladder.low_freq_cutoff(&u, 2);
        let mut want = SpectralField::constant(&grid, u.mean());
        want += blocks.get(0).unwrap();
        want += blocks.get(1).unwrap();
        assert!(s2.max_abs_difference(&want) < 1e-15);
    }

    #[test]
    fn derivative_commutes_with_blocks() {
        let grid = GridSpec::new(2, 32).unwrap();
        let ladder = DyadicLadder::new(&grid);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let u = random_field(&grid, &SpectrumSpec::retained(&grid), &mut rng);
        for q in ladder.q_range() {
            let a = ladder.block(&ops::partial(&u, 1), q);
            let b = ops::partial(&ladder.block(&u, q), 1);
            assert!(a.max_abs_difference(&b) < 1e-15);
        }
    }

    #[test]
    fn partition_on_every_resolved_frequency() {
        let grid = GridSpec::new(2, 64).unwrap();
        let p = PartitionProfile::standard();
        for (i, rho) in grid.wavenumbers().into_iter().enumerate().skip(1) {
            assert!((p.dyadic_sum(rho) - 1.0).abs() < 1e-12, "flat {i}");
        }
    }
}
