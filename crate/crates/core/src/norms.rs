//! Lebesgue, homogeneous Besov, Chemin-Lerner and hybrid norms.
//!
//! Vector and matrix fields are measured through the pointwise Euclidean
//! (Frobenius) magnitude, so a slice of components is one field here.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::dyadic::DyadicLadder;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;

/// Integrability or summation exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);

    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidParameter(format!("exponent {p} outside [1, ∞)")))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(&self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Exponent::Finite(p) => *p,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

/// Descriptor of `Ḃ^s_{p,r}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub p: Exponent,
    pub r: Exponent,
}

impl BesovSpec {
    pub fn new(s: f64, p: Exponent, r: Exponent) -> Self {
        Self { s, p, r }
    }

    /// `B^s := Ḃ^s_{2,1}`.
    pub fn l2(s: f64) -> Self {
        Self::new(s, Exponent::TWO, Exponent::ONE)
    }
}

/// Descriptor of the hybrid space `B̃^{s,r}_μ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridSpec {
    pub s: f64,
    pub r: Exponent,
    pub weight: f64,
}

impl HybridSpec {
    pub fn new(s: f64, r: Exponent, weight: f64) -> Result<Self> {
        if weight > 0.0 && weight.is_finite() {
            Ok(Self { s, r, weight })
        } else {
            Err(Error::InvalidParameter(format!("hybrid weight {weight} must be positive")))
        }
    }
}

/// Rectangle-rule `L^p` norm of physical samples.
pub fn lp_norm_samples(grid: &GridSpec, samples: &[f64], p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => samples.iter().fold(0.0, |m, x| m.max(x.abs())),
        Exponent::Finite(p) => {
            let sum: f64 = if p == 2.0 {
                samples.iter().map(|x| x * x).sum()
            } else if p == 1.0 {
                samples.iter().map(|x| x.abs()).sum()
            } else {
                samples.iter().map(|x| libm::pow(x.abs(), p)).sum()
            };
            libm::pow(sum * grid.cell_volume(), 1.0 / p)
        }
    }
}

pub fn lp_norm(field: &SpectralField, p: Exponent) -> f64 {
    lp_norm_samples(field.grid(), &field.to_samples(), p)
}

/// `L^p` norm of the pointwise Euclidean magnitude of several components.
pub fn lp_norm_components(fields: &[SpectralField], p: Exponent) -> f64 {
    let Some(first) = fields.first() else {
        return 0.0;
    };
    if fields.len() == 1 {
        return lp_norm(first, p);
    }
    lp_norm_samples(first.grid(), &magnitude_samples(fields), p)
}

fn magnitude_samples(fields: &[SpectralField]) -> Vec<f64> {
    let mut acc: Vec<f64> = alloc::vec![0.0; fields[0].grid().len()];
    for f in fields {
        for (a, x) in acc.iter_mut().zip(f.to_samples()) {
            *a += x * x;
        }
    }
    for a in &mut acc {
        *a = libm::sqrt(*a);
    }
    acc
}

/// `ℓ^r` norm of a finite nonnegative sequence.
pub fn lr_sum(terms: impl IntoIterator<Item = f64>, r: Exponent) -> f64 {
    match r {
        Exponent::Infinity => terms.into_iter().fold(0.0, f64::max),
        Exponent::Finite(1.0) => terms.into_iter().sum(),
        Exponent::Finite(r) => libm::pow(terms.into_iter().map(|t| libm::pow(t, r)).sum::<f64>(), 1.0 / r),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockTerm {
    pub q: i32,
    pub block_lp: f64,
    pub weighted: f64,
}

/// A Besov norm together with its dyadic breakdown.
#[derive(Clone, Debug, PartialEq)]
pub struct BesovReport {
    pub value: f64,
    pub terms: Vec<BlockTerm>,
    /// Share of the mean-free `L²` energy outside the retained blocks.
    pub truncated_fraction: f64,
}

impl BesovReport {
    pub const TRUNCATION_LIMIT: f64 = 0.01;

    pub fn truncation_flagged(&self) -> bool {
        self.truncated_fraction > Self::TRUNCATION_LIMIT
    }
}

impl DyadicLadder {
    /// `‖Δ_q u‖_{L^p}`.
    pub fn block_lp(&self, fields: &[SpectralField], q: i32, p: Exponent) -> f64 {
        if p == Exponent::TWO {
            let energy: f64 = fields.iter().map(|f| self.block_energy(f, q)).sum();
            return libm::sqrt(self.grid().volume() * energy);
        }
        let blocks: Vec<SpectralField> = fields.iter().map(|f| self.block(f, q)).collect();
        lp_norm_components(&blocks, p)
    }

    pub fn block_lps(&self, fields: &[SpectralField], p: Exponent) -> Vec<f64> {
        self.q_range().map(|q| self.block_lp(fields, q, p)).collect()
    }

    pub fn besov(&self, fields: &[SpectralField], spec: &BesovSpec) -> BesovReport {
        let terms: Vec<BlockTerm> = self
            .q_range()
            .map(|q| {
                let block_lp = self.block_lp(fields, q, spec.p);
                BlockTerm {
                    q,
                    block_lp,
                    weighted: libm::exp2(q as f64 * spec.s) * block_lp,
                }
            })
            .collect();
        BesovReport {
            value: lr_sum(terms.iter().map(|t| t.weighted), spec.r),
            terms,
            truncated_fraction: self.truncated_fraction(fields),
        }
    }

    pub fn besov_value(&self, fields: &[SpectralField], spec: &BesovSpec) -> f64 {
        lr_sum(
            self.q_range()
                .map(|q| libm::exp2(q as f64 * spec.s) * self.block_lp(fields, q, spec.p)),
            spec.r,
        )
    }

    /// `Σ_q 2^{qs} max(μ, 2^{-q})^{1-2/r} ‖Δ_q u‖_{L²}`.
    pub fn hybrid(&self, fields: &[SpectralField], spec: &HybridSpec) -> f64 {
        let exponent = 1.0 - 2.0 * spec.r.reciprocal();
        self.q_range()
            .map(|q| {
                let scale = spec.weight.max(libm::exp2(-(q as f64)));
                libm::exp2(q as f64 * spec.s) * libm::pow(scale, exponent) * self.block_lp(fields, q, Exponent::TWO)
            })
            .sum()
    }
}

pub fn besov_norm(field: &SpectralField, spec: &BesovSpec) -> BesovReport {
    DyadicLadder::new(field.grid()).besov(core::slice::from_ref(field), spec)
}

pub fn hybrid_norm(field: &SpectralField, spec: &HybridSpec) -> f64 {
    DyadicLadder::new(field.grid()).hybrid(core::slice::from_ref(field), spec)
}

/// Time samples of `‖Δ_q u(t)‖_{L^p}` for the retained blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct NormSeries {
    p: Exponent,
    q_min: i32,
    times: Vec<f64>,
    per_block: Vec<Vec<f64>>,
}

impl NormSeries {
    pub fn new(p: Exponent, q_min: i32) -> Self {
        Self {
            p,
            q_min,
            times: Vec::new(),
            per_block: Vec::new(),
        }
    }

    pub fn from_parts(p: Exponent, q_min: i32, times: Vec<f64>, per_block: Vec<Vec<f64>>) -> Result<Self> {
        let mut out = Self::new(p, q_min);
        for (t, b) in times.into_iter().zip(per_block) {
            out.push(t, b)?;
        }
        Ok(out)
    }

    pub fn push(&mut self, t: f64, blocks: Vec<f64>) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::InvalidParameter(format!("time {t} not after {last}")));
            }
        }
        if let Some(first) = self.per_block.first() {
            if first.len() != blocks.len() {
                return Err(Error::ComponentMismatch {
                    expected: first.len(),
                    got: blocks.len(),
                });
            }
        }
        if blocks.iter().any(|b| !(*b >= 0.0)) {
            return Err(Error::InvalidParameter("block norms must be nonnegative".into()));
        }
        self.times.push(t);
        self.per_block.push(blocks);
        Ok(())
    }

    pub fn record(&mut self, ladder: &DyadicLadder, t: f64, fields: &[SpectralField]) -> Result<()> {
        self.push(t, ladder.block_lps(fields, self.p))
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn q_min(&self) -> i32 {
        self.q_min
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn blocks_at(&self, index: usize) -> &[f64] {
        &self.per_block[index]
    }

    pub fn block_count(&self) -> usize {
        self.per_block.first().map_or(0, |b| b.len())
    }

    fn check_horizon(&self, t_end: f64) -> Result<()> {
        let last = *self.times.last().ok_or(Error::InvalidParameter("empty norm series".into()))?;
        if t_end > last * (1.0 + 1e-12) + 1e-14 {
            return Err(Error::HorizonBeyondSamples { t: t_end, last });
        }
        Ok(())
    }

    /// `‖u(t)‖_{Ḃ^s_{p,r}}` at every sample.
    pub fn besov_at(&self, index: usize, s: f64, r: Exponent) -> f64 {
        lr_sum(
            self.per_block[index]
                .iter()
                .enumerate()
                .map(|(j, b)| libm::exp2((self.q_min + j as i32) as f64 * s) * b),
            r,
        )
    }
}

/// Trapezoid rule for samples `values[i]` at `times[i]` over `[times[0], t_end]`;
/// the last partial interval is closed by linear interpolation.
pub fn trapezoid(times: &[f64], values: &[f64], t_end: f64) -> f64 {
    let mut total = 0.0;
    for i in 1..times.len() {
        let (t0, t1) = (times[i - 1], times[i]);
        if t0 >= t_end {
            break;
        }
        if t1 <= t_end {
            total += 0.5 * (t1 - t0) * (values[i - 1] + values[i]);
        } else {
            let theta = (t_end - t0) / (t1 - t0);
            let v_end = values[i - 1] + theta * (values[i] - values[i - 1]);
            total += 0.5 * (t_end - t0) * (values[i - 1] + v_end);
            break;
        }
    }
    total
}

/// `sup` of samples on `[times[0], t_end]`, including the interpolated value at `t_end`.
pub fn sampled_sup(times: &[f64], values: &[f64], t_end: f64) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..times.len() {
        if times[i] <= t_end {
            best = best.max(values[i]);
        } else {
            if i > 0 {
                let theta = (t_end - times[i - 1]) / (times[i] - times[i - 1]);
                best = best.max(values[i - 1] + theta * (values[i] - values[i - 1]));
            }
            break;
        }
    }
    best
}

/// `‖g‖_{L^k(0, t_end)}` of a sampled scalar function.
pub fn time_norm(times: &[f64], values: &[f64], k: Exponent, t_end: f64) -> f64 {
    match k {
        Exponent::Infinity => sampled_sup(times, values, t_end),
        Exponent::Finite(k) => {
            let powered: Vec<f64> = values.iter().map(|v| libm::pow(*v, k)).collect();
            libm::pow(trapezoid(times, &powered, t_end), 1.0 / k)
        }
    }
}

/// `‖u‖_{L̃^k_T(Ḃ^s_{p,r})}`: time norm inside the dyadic sum.
pub fn chemin_lerner_norm(series: &NormSeries, k: Exponent, spec: &BesovSpec, t_end: f64) -> Result<f64> {
    if spec.p != series.p {
        return Err(Error::InvalidParameter(format!(
            "series holds L^{} blocks, norm asks for L^{}",
            series.p, spec.p
        )));
    }
    series.check_horizon(t_end)?;
    let mut column = alloc::vec![0.0; series.len()];
    let terms: Vec<f64> = (0..series.block_count())
        .map(|j| {
            for (i, c) in column.iter_mut().enumerate() {
                *c = series.per_block[i][j];
            }
            let q = series.q_min + j as i32;
            libm::exp2(q as f64 * spec.s) * time_norm(&series.times, &column, k, t_end)
        })
        .collect();
    Ok(lr_sum(terms, spec.r))
}

/// `‖u‖_{L^k_T(Ḃ^s_{p,r})}`: time norm of the Besov norm.
pub fn lebesgue_besov_norm(series: &NormSeries, k: Exponent, spec: &BesovSpec, t_end: f64) -> Result<f64> {
    if spec.p != series.p {
        return Err(Error::InvalidParameter("series and norm use different p".into()));
    }
    series.check_horizon(t_end)?;
    let values: Vec<f64> = (0..series.len()).map(|i| series.besov_at(i, spec.s, spec.r)).collect();
    Ok(time_norm(&series.times, &values, k, t_end))
}
