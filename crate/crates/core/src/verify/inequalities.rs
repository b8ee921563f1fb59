use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{E, FRAC_PI_2};

use super::{param, EnsembleSpec, Experiment};
use crate::dyadic::DyadicLadder;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::norms::{chemin_lerner_norm, lp_norm, time_norm, BesovSpec, Exponent, NormSeries};
use crate::ops;
use crate::random::SpectrumSpec;

/// Time-dependent members `f(t) = cos(πt/2) u + sin(πt/2) w` sampled at
/// `samples` equispaced times of `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticTime {
    pub samples: usize,
}

impl SyntheticTime {
    pub const DEFAULT: SyntheticTime = SyntheticTime { samples: 9 };

    fn times(&self) -> Vec<f64> {
        let n = self.samples.max(2);
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    fn at(t: f64, u: &SpectralField, w: &SpectralField) -> SpectralField {
        let mut f = u.scaled(libm::cos(FRAC_PI_2 * t));
        f.axpy(libm::sin(FRAC_PI_2 * t), w);
        f
    }
}

fn series(ladder: &DyadicLadder, p: Exponent, times: &[f64], fields: impl Fn(f64) -> Vec<SpectralField>) -> Result<NormSeries> {
    let mut out = NormSeries::new(p, ladder.q_min());
    for t in times {
        out.record(ladder, *t, &fields(*t))?;
    }
    Ok(out)
}

fn nonzero(den: f64) -> Option<f64> {
    (den > 0.0 && den.is_finite()).then_some(den)
}

fn retained_radius(grid: &GridSpec) -> f64 {
    3.0 * grid.points() as f64 / 16.0
}

/// `‖∇u‖_{Ḃ^{s−1}_{p,r}} / ‖u‖_{Ḃ^s_{p,r}}`; for `p = 2` every ratio lies in `[3/4, 8/3]`.
#[derive(Clone, Copy, Debug)]
pub struct BernsteinExperiment {
    pub grid: GridSpec,
    pub spec: BesovSpec,
}

impl BernsteinExperiment {
    pub fn ratio_of(&self, u: &SpectralField) -> Option<f64> {
        let ladder = DyadicLadder::new(&self.grid);
        let den = nonzero(ladder.besov_value(core::slice::from_ref(u), &self.spec))?;
        let lower = BesovSpec::new(self.spec.s - 1.0, self.spec.p, self.spec.r);
        Some(ladder.besov_value(&ops::gradient(u), &lower) / den)
    }
}

impl Experiment for BernsteinExperiment {
    fn name(&self) -> String {
        "bernstein".into()
    }

    fn params(&self) -> Vec<(String, f64)> {
        alloc::vec![
            param("s", self.spec.s),
            param("p", self.spec.p.as_f64()),
            param("r", self.spec.r.as_f64()),
        ]
    }

    fn hard_bounds(&self) -> Option<(f64, f64)> {
        (self.spec.p == Exponent::TWO).then_some((0.75, 8.0 / 3.0))
    }

    fn sample(&self, ensemble: &EnsembleSpec, index: usize) -> Result<Option<f64>> {
        Ok(self.ratio_of(&ensemble.member_fields(&self.grid, index, 1)[0]))
    }
}

pub fn verify_bernstein(grid: &GridSpec, spec: BesovSpec, ensemble: &EnsembleSpec) -> Result<super::RatioReport> {
    super::run_experiment(&BernsteinExperiment { grid: *grid, spec }, ensemble)
}

/// Which product estimate is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductLaw {
    /// `‖uv‖_{Ḃ^{s₁+s₂−N/p}_{p,1}} ≤ C‖u‖_{Ḃ^{s₁}_{p,1}}‖v‖_{Ḃ^{s₂}_{p,1}}`.
    Summable,
    /// `‖uv‖_{Ḃ^{s₁+s₂−N/p}_{p,∞}} ≤ C‖u‖_{Ḃ^{s₁}_{p,1}}‖v‖_{Ḃ^{s₂}_{p,∞}}`.
    Bounded,
}

/// How the two factors of a member are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    Independent,
    /// `v = u`.
    Diagonal,
    /// `u` on `1 ≤ |k| ≤ 2`, `v` on the highest band the product can reach.
    Separated,
}

#[derive(Clone, Copy, Debug)]
pub struct ProductExperiment {
    pub grid: GridSpec,
    pub law: ProductLaw,
    pub s1: f64,
    pub s2: f64,
    pub p: Exponent,
    pub pairing: Pairing,
    /// Chemin-Lerner variant with time exponents `(q₁, q₂)`; `1/q = 1/q₁ + 1/q₂`.
    pub time: Option<(Exponent, Exponent, SyntheticTime)>,
}

impl ProductExperiment {
    pub fn new(grid: &GridSpec, law: ProductLaw, s1: f64, s2: f64, p: Exponent) -> Result<Self> {
        let exp = Self {
            grid: *grid,
            law,
            s1,
            s2,
            p,
            pairing: Pairing::Independent,
            time: None,
        };
        exp.check_indices()?;
        Ok(exp)
    }

    pub fn with_pairing(mut self, pairing: Pairing) -> Self {
        self.pairing = pairing;
        self
    }

    pub fn in_time(mut self, q1: Exponent, q2: Exponent) -> Result<Self> {
        if q1.reciprocal() + q2.reciprocal() > 1.0 {
            return Err(Error::IndexCondition(format!("1/{q1} + 1/{q2} exceeds 1")));
        }
        self.time = Some((q1, q2, SyntheticTime::DEFAULT));
        Ok(self)
    }

    fn check_indices(&self) -> Result<()> {
        let np = self.grid.dim() as f64 * self.p.reciprocal();
        let floor = self.grid.dim() as f64 * f64::max(0.0, 2.0 * self.p.reciprocal() - 1.0);
        let (s1, s2) = (self.s1, self.s2);
        let ok = match self.law {
            ProductLaw::Summable => s1 <= np && s2 <= np && s1 + s2 > floor,
            ProductLaw::Bounded => s1 <= np && s2 < np && s1 + s2 >= floor,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IndexCondition(format!(
                "s1 = {s1}, s2 = {s2} outside the admissible range for N/p = {np}"
            )))
        }
    }

    fn second_r(&self) -> Exponent {
        match self.law {
            ProductLaw::Summable => Exponent::ONE,
            ProductLaw::Bounded => Exponent::Infinity,
        }
    }

    fn target(&self) -> f64 {
        self.s1 + self.s2 - self.grid.dim() as f64 * self.p.reciprocal()
    }

    fn separated_bands(&self) -> (SpectrumSpec, SpectrumSpec) {
        let k = retained_radius(&self.grid);
        let low = SpectrumSpec {
            k_min: 1.0,
            k_max: 2.0,
            decay: 1.0,
        };
        let high = SpectrumSpec {
            k_min: k / 2.0,
            k_max: k - 2.0,
            decay: 1.0,
        };
        (low, high)
    }

    /// Ratio for the static law and factors `u`, `v`.
    pub fn ratio_of(&self, u: &SpectralField, v: &SpectralField) -> Option<f64> {
        let ladder = DyadicLadder::new(&self.grid);
        let r = self.second_r();
        let norm = |f: &SpectralField, s: f64, r: Exponent| ladder.besov_value(core::slice::from_ref(f), &BesovSpec::new(s, self.p, r));
        let den = nonzero(norm(u, self.s1, Exponent::ONE) * norm(v, self.s2, r))?;
        Some(norm(&ops::product(u, v), self.target(), r) / den)
    }

    /// Ratio for the Chemin-Lerner law with `f(t)` built from `(u₀, u₁)` and `g(t)` from `(v₀, v₁)`.
    pub fn ratio_in_time(&self, u: [&SpectralField; 2], v: [&SpectralField; 2], q1: Exponent, q2: Exponent, time: SyntheticTime) -> Result<Option<f64>> {
        let ladder = DyadicLadder::new(&self.grid);
        let times = time.times();
        let f = |t: f64| SyntheticTime::at(t, u[0], u[1]);
        let g = |t: f64| SyntheticTime::at(t, v[0], v[1]);
        let sf = series(&ladder, self.p, &times, |t| alloc::vec![f(t)])?;
        let sg = series(&ladder, self.p, &times, |t| alloc::vec![g(t)])?;
        let sfg = series(&ladder, self.p, &times, |t| alloc::vec![ops::product(&f(t), &g(t))])?;
        let q_rec = q1.reciprocal() + q2.reciprocal();
        let q = if q_rec == 0.0 { Exponent::Infinity } else { Exponent::finite(1.0 / q_rec)? };
        let r = self.second_r();
        let cl = |s: &NormSeries, k: Exponent, sp: f64, r: Exponent| chemin_lerner_norm(s, k, &BesovSpec::new(sp, self.p, r), 1.0);
        let den = cl(&sf, q1, self.s1, Exponent::ONE)? * cl(&sg, q2, self.s2, r)?;
        Ok(match nonzero(den) {
            Some(den) => Some(cl(&sfg, q, self.target(), r)? / den),
            None => None,
        })
    }
}

impl Experiment for ProductExperiment {
    fn name(&self) -> String {
        let law = match self.law {
            ProductLaw::Summable => "product_summable",
            ProductLaw::Bounded => "product_bounded",
        };
        let pairing = match self.pairing {
            Pairing::Independent => "",
            Pairing::Diagonal => "_diagonal",
            Pairing::Separated => "_separated",
        };
        let time = if self.time.is_some() { "_time" } else { "" };
        format!("{law}{pairing}{time}")
    }

    fn params(&self) -> Vec<(String, f64)> {
        let mut out = alloc::vec![param("s1", self.s1), param("s2", self.s2), param("p", self.p.as_f64())];
        if let Some((q1, q2, _)) = self.time {
            out.push(param("q1", q1.as_f64()));
            out.push(param("q2", q2.as_f64()));
        }
        out
    }

    fn validate(&self, ensemble: &EnsembleSpec) -> Result<()> {
        self.check_indices()?;
        let k = retained_radius(&self.grid);
        let reach = match self.pairing {
            Pairing::Separated => {
                let (low, high) = self.separated_bands();
                if high.k_min > high.k_max {
                    return Err(Error::InvalidParameter("grid too coarse for separated shells".into()));
                }
                low.k_max + high.k_max
            }
            _ => 2.0 * ensemble.spectrum.k_max,
        };
        if reach > k {
            return Err(Error::InvalidParameter(format!(
                "products reach |k| = {reach}, beyond the resolved radius {k}"
            )));
        }
        Ok(())
    }

    fn sample(&self, ensemble: &EnsembleSpec, index: usize) -> Result<Option<f64>> {
        let n = if self.time.is_some() { 4 } else { 2 };
        let mut fields = ensemble.member_fields(&self.grid, index, n);
        match self.pairing {
            Pairing::Independent => {}
            Pairing::Diagonal => {
                fields[1] = fields[0].clone();
                if n == 4 {
                    fields[3] = fields[2].clone();
                }
            }
            Pairing::Separated => {
                let (low, high) = self.separated_bands();
                let mut rng = ensemble.member_rng(index);
                for (j, f) in fields.iter_mut().enumerate() {
                    // factor u: entries 0 and 2 of the time layout, 0 of the static one
                    let band = if j % 2 == 0 { &low } else { &high };
                    *f = crate::random::random_field(&self.grid, band, &mut rng);
                }
            }
        }
        match self.time {
            None => Ok(self.ratio_of(&fields[0], &fields[1])),
            Some((q1, q2, time)) => self.ratio_in_time([&fields[0], &fields[2]], [&fields[1], &fields[3]], q1, q2, time),
        }
    }
}

pub fn verify_product_laws(experiment: &ProductExperiment, ensemble: &EnsembleSpec) -> Result<super::RatioReport> {
    super::run_experiment(experiment, ensemble)
}

/// Empirical constant of the logarithmic interpolation
/// `‖f‖_{L̃^k(Ḃ^s_{p,1})} ≤ C ε^{-1} ‖f‖_{s,∞} log(e + (‖f‖_{s−ε,∞} + ‖f‖_{s+ε,∞}) / ‖f‖_{s,∞})`.
#[derive(Clone, Copy, Debug)]
pub struct LogInterpExperiment {
    pub grid: GridSpec,
    pub s: f64,
    pub eps: f64,
    pub p: Exponent,
    pub k: Exponent,
    pub time: SyntheticTime,
}

impl LogInterpExperiment {
    pub fn new(grid: &GridSpec, s: f64, eps: f64, p: Exponent, k: Exponent) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParameter(format!("ε = {eps} outside (0, 1]")));
        }
        Ok(Self {
            grid: *grid,
            s,
            eps,
            p,
            k,
            time: SyntheticTime::DEFAULT,
        })
    }

    pub fn ratio_of(&self, u: &SpectralField, w: &SpectralField) -> Result<Option<f64>> {
        let ladder = DyadicLadder::new(&self.grid);
        let sf = series(&ladder, self.p, &self.time.times(), |t| alloc::vec![SyntheticTime::at(t, u, w)])?;
        let cl = |s: f64, r: Exponent| chemin_lerner_norm(&sf, self.k, &BesovSpec::new(s, self.p, r), 1.0);
        let Some(mid) = nonzero(cl(self.s, Exponent::Infinity)?) else {
            return Ok(None);
        };
        let spread = cl(self.s - self.eps, Exponent::Infinity)? + cl(self.s + self.eps, Exponent::Infinity)?;
        let bound = mid / self.eps * libm::log(E + spread / mid);
        Ok(Some(cl(self.s, Exponent::ONE)? / bound))
    }
}

impl Experiment for LogInterpExperiment {
    fn name(&self) -> String {
        "log_interpolation".into()
    }

    fn params(&self) -> Vec<(String, f64)> {
        alloc::vec![
            param("s", self.s),
            param("eps", self.eps),
            param("p", self.p.as_f64()),
            param("k", self.k.as_f64()),
        ]
    }

    fn sample(&self, ensemble: &EnsembleSpec, index: usize) -> Result<Option<f64>> {
        let f = ensemble.member_fields(&self.grid, index, 2);
        self.ratio_of(&f[0], &f[1])
    }
}

pub fn verify_log_interpolation(experiment: &LogInterpExperiment, ensemble: &EnsembleSpec) -> Result<super::RatioReport> {
    super::run_experiment(experiment, ensemble)
}

/// `div(A Δ_q∇B) − Δ_q div(A∇B)`, products dealiased.
pub fn commutator_block(ladder: &DyadicLadder, a: &SpectralField, b: &SpectralField, q: i32) -> SpectralField {
    commutator_blocks_in(ladder, a, b, q..=q).pop().expect("one block")
}

/// [`commutator_block`] for every retained `q`, sharing the work that does not depend on `q`.
pub fn commutator_blocks(ladder: &DyadicLadder, a: &SpectralField, b: &SpectralField) -> Vec<SpectralField> {
    commutator_blocks_in(ladder, a, b, ladder.q_range())
}

fn commutator_blocks_in(
    ladder: &DyadicLadder,
    a: &SpectralField,
    b: &SpectralField,
    range: core::ops::RangeInclusive<i32>,
) -> Vec<SpectralField> {
    let grid = *a.grid();
    let a_samples = a.to_samples();
    let times_a = |f: &SpectralField| -> SpectralField {
        let s: Vec<f64> = f.to_samples().iter().zip(&a_samples).map(|(x, y)| x * y).collect();
        ops::from_physical(&grid, &s)
    };
    let grad_b = ops::gradient(b);
    let mut inner = SpectralField::zeros(&grid);
    for (j, db) in grad_b.iter().enumerate() {
        inner += &ops::partial(&times_a(db), j);
    }
    range
        .map(|q| {
            let mut out = SpectralField::zeros(&grid);
            for (j, db) in grad_b.iter().enumerate() {
                out += &ops::partial(&times_a(&ladder.block(db, q)), j);
            }
            out -= &ladder.block(&inner, q);
            out
        })
        .collect()
}

/// Empirical constant of the commutator estimate
/// `‖div[A, Δ_q]∇B‖_{L^{α₁}_T(L^p)} ≤ C c_q 2^{−q(s+t−2−N/p)} ‖∇A‖_{L̃^{α₂'}_T(Ḃ^{s−1}_{p,1})} ‖∇B‖_{L̃^{α₂}_T(Ḃ^{t−1}_{p,1})}`
/// with `Σ c_q ≤ 1`: the ratio is the weighted sum over `q` of the left sides.
#[derive(Clone, Copy, Debug)]
pub struct CommutatorExperiment {
    pub grid: GridSpec,
    pub s: f64,
    pub t: f64,
    pub p: Exponent,
    pub alpha1: Exponent,
    pub alpha2: Exponent,
    pub time: SyntheticTime,
}

impl CommutatorExperiment {
    pub fn new(grid: &GridSpec, s: f64, t: f64, p: Exponent, alpha1: Exponent, alpha2: Exponent) -> Result<Self> {
        let np = grid.dim() as f64 * p.reciprocal();
        if !(t <= np + 1.0 && (1.0..=np + 1.0).contains(&s) && s + t > 1.0) {
            return Err(Error::IndexCondition(format!(
                "need t ≤ N/p + 1, 1 ≤ s ≤ N/p + 1, s + t > 1; got s = {s}, t = {t}, N/p = {np}"
            )));
        }
        if alpha1.reciprocal() < alpha2.reciprocal() {
            return Err(Error::IndexCondition(format!("α₁ = {alpha1} must not exceed α₂ = {alpha2}")));
        }
        Ok(Self {
            grid: *grid,
            s,
            t,
            p,
            alpha1,
            alpha2,
            time: SyntheticTime::DEFAULT,
        })
    }

    /// `α₂'` with `1/α₂ + 1/α₂' = 1/α₁`.
    pub fn alpha2_dual(&self) -> Exponent {
        let rec = self.alpha1.reciprocal() - self.alpha2.reciprocal();
        if rec == 0.0 {
            Exponent::Infinity
        } else {
            Exponent::Finite(1.0 / rec)
        }
    }

    pub fn ratio_of(&self, a: [&SpectralField; 2], b: [&SpectralField; 2]) -> Result<Option<f64>> {
        let ladder = DyadicLadder::new(&self.grid);
        let times = self.time.times();
        let at = |t: f64| (SyntheticTime::at(t, a[0], a[1]), SyntheticTime::at(t, b[0], b[1]));
        let mut per_q = alloc::vec![Vec::with_capacity(times.len()); ladder.block_count()];
        let mut grad_a = NormSeries::new(self.p, ladder.q_min());
        let mut grad_b = grad_a.clone();
        for t in &times {
            let (at_, bt) = at(*t);
            for (j, r) in commutator_blocks(&ladder, &at_, &bt).iter().enumerate() {
                per_q[j].push(lp_norm(r, self.p));
            }
            grad_a.record(&ladder, *t, &ops::gradient(&at_))?;
            grad_b.record(&ladder, *t, &ops::gradient(&bt))?;
        }
        let na = chemin_lerner_norm(&grad_a, self.alpha2_dual(), &BesovSpec::new(self.s - 1.0, self.p, Exponent::ONE), 1.0)?;
        let nb = chemin_lerner_norm(&grad_b, self.alpha2, &BesovSpec::new(self.t - 1.0, self.p, Exponent::ONE), 1.0)?;
        let Some(den) = nonzero(na * nb) else {
            return Ok(None);
        };
        let shift = self.s + self.t - 2.0 - self.grid.dim() as f64 * self.p.reciprocal();
        let total: f64 = ladder
            .q_range()
            .zip(&per_q)
            .map(|(q, values)| libm::exp2(q as f64 * shift) * time_norm(&times, values, self.alpha1, 1.0))
            .sum();
        Ok(Some(total / den))
    }
}

impl Experiment for CommutatorExperiment {
    fn name(&self) -> String {
        "commutator".into()
    }

    fn params(&self) -> Vec<(String, f64)> {
        alloc::vec![
            param("s", self.s),
            param("t", self.t),
            param("p", self.p.as_f64()),
            param("alpha1", self.alpha1.as_f64()),
            param("alpha2", self.alpha2.as_f64()),
        ]
    }

    fn validate(&self, ensemble: &EnsembleSpec) -> Result<()> {
        let k = retained_radius(&self.grid);
        if 2.0 * ensemble.spectrum.k_max > k {
            return Err(Error::InvalidParameter(format!(
                "products reach |k| = {}, beyond the resolved radius {k}",
                2.0 * ensemble.spectrum.k_max
            )));
        }
        Ok(())
    }

    fn sample(&self, ensemble: &EnsembleSpec, index: usize) -> Result<Option<f64>> {
        let f = ensemble.member_fields(&self.grid, index, 4);
        self.ratio_of([&f[0], &f[1]], [&f[2], &f[3]])
    }
}

pub fn verify_commutator(experiment: &CommutatorExperiment, ensemble: &EnsembleSpec) -> Result<super::RatioReport> {
    super::run_experiment(experiment, ensemble)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::run_experiment;

    fn grid() -> GridSpec {
        GridSpec::new(2, 64).unwrap()
    }

    fn ensemble(count: usize, spectrum: SpectrumSpec) -> EnsembleSpec {
        EnsembleSpec::new(count, 3, spectrum).unwrap()
    }

    #[test]
    fn bernstein_single_unit_mode() {
        let exp = BernsteinExperiment {
            grid: grid(),
            spec: BesovSpec::l2(1.0),
        };
        let u = SpectralField::cosine(&grid(), &[1, 0], 1.0);
        assert!((exp.ratio_of(&u).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(exp.ratio_of(&SpectralField::zeros(&grid())), None);
    }

    #[test]
    fn bernstein_bracket_holds() {
        let g = grid();
        for s in [0.0, 1.0, 2.5] {
            for r in [Exponent::ONE, Exponent::Infinity] {
                let exp = BernsteinExperiment {
                    grid: g,
                    spec: BesovSpec::new(s, Exponent::TWO, r),
                };
                let rep = run_experiment(&exp, &ensemble(10, SpectrumSpec::retained(&g))).unwrap();
                assert_eq!(rep.hard_pass, Some(true), "{rep:?}");
            }
        }
    }

    #[test]
    fn product_index_conditions() {
        let g = grid();
        assert!(ProductExperiment::new(&g, ProductLaw::Summable, 1.0, 1.0, Exponent::TWO).is_ok());
        assert!(ProductExperiment::new(&g, ProductLaw::Summable, 1.5, 0.5, Exponent::TWO).is_err());
        assert!(ProductExperiment::new(&g, ProductLaw::Summable, 0.0, 0.0, Exponent::TWO).is_err());
        assert!(ProductExperiment::new(&g, ProductLaw::Bounded, 1.0, 1.0, Exponent::TWO).is_err());
        assert!(ProductExperiment::new(&g, ProductLaw::Bounded, 1.0, 0.0, Exponent::TWO).is_ok());
        let e = ProductExperiment::new(&g, ProductLaw::Summable, 1.0, 1.0, Exponent::TWO).unwrap();
        assert!(e.in_time(Exponent::ONE, Exponent::ONE).is_err());
    }

    #[test]
    fn product_band_is_checked() {
        let g = grid();
        let e = ProductExperiment::new(&g, ProductLaw::Summable, 1.0, 1.0, Exponent::TWO).unwrap();
        assert!(run_experiment(&e, &ensemble(2, SpectrumSpec::retained(&g))).is_err());
        assert!(run_experiment(&e.with_pairing(Pairing::Separated), &ensemble(2, SpectrumSpec::retained(&g))).is_ok());
    }

    #[test]
    fn diagonal_product_is_the_square() {
        let g = grid();
        let e = ProductExperiment::new(&g, ProductLaw::Summable, 1.0, 0.5, Exponent::TWO)
            .unwrap()
            .with_pairing(Pairing::Diagonal);
        let ens = ensemble(1, SpectrumSpec::dyadic(0, 2, 1.0));
        let u = &ens.member_fields(&g, 0, 2)[0];
        let ladder = DyadicLadder::new(&g);
        let n = |f: &SpectralField, s: f64| ladder.besov_value(core::slice::from_ref(f), &BesovSpec::l2(s));
        let want = n(&ops::product(u, u), 0.5) / (n(u, 1.0) * n(u, 0.5));
        assert!((e.sample(&ens, 0).unwrap().unwrap() - want).abs() < 1e-14);
        assert_eq!(e.ratio_of(&SpectralField::zeros(&g), u), None);
    }

    #[test]
    fn log_interpolation_single_block() {
        let g = grid();
        let (s, eps) = (1.0, 0.5);
        let exp = LogInterpExperiment::new(&g, s, eps, Exponent::TWO, Exponent::TWO).unwrap();
        // one mode at |k| = 4 occupies block 2 only
        let u = SpectralField::cosine(&g, &[4, 0], 1.0);
        let w = SpectralField::sine(&g, &[0, 4], 1.0);
        let ratio = exp.ratio_of(&u, &w).unwrap().unwrap();
        let q = 2.0f64;
        let want = eps / libm::log(E + libm::exp2(-q * eps) + libm::exp2(q * eps));
        assert!((ratio - want).abs() < 1e-13, "{ratio} vs {want}");
        assert!(LogInterpExperiment::new(&g, s, 0.0, Exponent::TWO, Exponent::TWO).is_err());
        let zero = SpectralField::zeros(&g);
        assert_eq!(exp.ratio_of(&zero, &zero).unwrap(), None);
    }

    #[test]
    fn commutator_with_constant_coefficient_vanishes() {
        let g = grid();
        let ladder = DyadicLadder::new(&g);
        let a = SpectralField::constant(&g, 1.7);
        let b = &SpectralField::cosine(&g, &[3, 1], 1.0) + &SpectralField::sine(&g, &[1, 5], 0.3);
        for r in commutator_blocks(&ladder, &a, &b) {
            assert!(r.max_abs_coeff() < 1e-13);
        }
    }

    #[test]
    fn commutator_single_modes() {
        // A = cos x₁, B = cos 2x₁: A Δ_q ∂B vs Δ_q(A ∂B) differ only where the
        // output frequencies 1 and 3 leave block q
        let g = grid();
        let ladder = DyadicLadder::new(&g);
        let a = SpectralField::cosine(&g, &[1, 0], 1.0);
        let b = SpectralField::cosine(&g, &[2, 0], 1.0);
        let total = |q: i32| commutator_block(&ladder, &a, &b, q);
        // q = 1 holds B; the commutator keeps the parts of div(A∇B) outside block 1
        let direct = {
            let flux = ops::product(&a, &ops::partial(&b, 0));
            let d = ops::partial(&flux, 0);
            &d - &ladder.block(&d, 1)
        };
        assert!(total(1).max_abs_difference(&direct) < 1e-13);
        // blocks away from B see minus the block of div(A∇B)
        let d = ops::partial(&ops::product(&a, &ops::partial(&b, 0)), 0);
        assert!((&total(3) + &ladder.block(&d, 3)).max_abs_coeff() < 1e-13);
    }

    #[test]
    fn commutator_index_window() {
        let g = grid();
        let two = Exponent::TWO;
        assert!(CommutatorExperiment::new(&g, 1.0, 1.0, two, two, two).is_ok());
        assert!(CommutatorExperiment::new(&g, 0.5, 1.0, two, two, two).is_err());
        assert!(CommutatorExperiment::new(&g, 1.0, 2.5, two, two, two).is_err());
        assert!(CommutatorExperiment::new(&g, 1.0, 0.0, two, two, two).is_err());
        assert!(CommutatorExperiment::new(&g, 1.0, 1.0, two, Exponent::ONE, two).is_ok());
        assert!(CommutatorExperiment::new(&g, 1.0, 1.0, two, two, Exponent::ONE).is_err());
    }
}
