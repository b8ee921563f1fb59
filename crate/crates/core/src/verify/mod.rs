//! Ensemble experiments that measure the constants of the harmonic-analysis
//! inequalities and the small-data bound of the nonlinear system.
//!
//! An inequality `A ≤ C·B` with an unspecified constant is checked as a
//! bounded ratio `A/B` over a random ensemble, together with a stability flag:
//! the largest ratio may move by at most 20% when the ensemble doubles.
//! Member `i` is drawn from seed `seed + i`, so the doubled ensemble contains
//! the original one.

use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::random::{random_field, SpectrumSpec};

mod inequalities;
mod scaling;
mod smallness;
mod suite;

pub use inequalities::{
    commutator_block, commutator_blocks, verify_bernstein, verify_commutator, verify_log_interpolation, verify_product_laws,
    BernsteinExperiment, CommutatorExperiment, LogInterpExperiment, Pairing, ProductExperiment, ProductLaw,
    SyntheticTime,
};
pub use scaling::{band_safe_state, rescale_state, verify_scaling, ScalingEntry, ScalingReport};
pub use smallness::{
    hybrid_data_norm, smallness_experiment, smallness_row, SmallnessRow, SmallnessSettings, SmallnessTable,
};
pub use suite::{default_ratio_experiments, Suite};

/// Ensembles smaller than this are never called stable.
pub const MIN_STABLE_COUNT: usize = 50;
/// Allowed relative drift of the largest ratio when the ensemble doubles.
pub const STABILITY_TOLERANCE: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub count: usize,
    pub seed: u64,
    pub spectrum: SpectrumSpec,
}

impl EnsembleSpec {
    pub fn new(count: usize, seed: u64, spectrum: SpectrumSpec) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter("ensemble count must be at least 1".into()));
        }
        Ok(Self { count, seed, spectrum })
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn member_rng(&self, index: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(index as u64))
    }

    /// `n` independent unit fields of member `index`.
    pub fn member_fields(&self, grid: &GridSpec, index: usize, n: usize) -> Vec<SpectralField> {
        let mut rng = self.member_rng(index);
        (0..n).map(|_| random_field(grid, &self.spectrum, &mut rng)).collect()
    }
}

/// One inequality measured over an ensemble.
pub trait Experiment: Sync {
    fn name(&self) -> String;
    fn params(&self) -> Vec<(String, f64)>;
    /// Bounds every ratio must respect, when the inequality has sharp constants.
    fn hard_bounds(&self) -> Option<(f64, f64)> {
        None
    }
    fn validate(&self, _ensemble: &EnsembleSpec) -> Result<()> {
        Ok(())
    }
    /// Ratio for member `index`; `None` when the member is degenerate (0/0).
    fn sample(&self, ensemble: &EnsembleSpec, index: usize) -> Result<Option<f64>>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub count: usize,
    /// Members with a defined ratio.
    pub evaluated: usize,
    /// Largest ratio over the doubled ensemble.
    pub doubled_max_ratio: f64,
    pub stable: bool,
    /// `Some(ok)` when the experiment has hard bounds.
    pub hard_pass: Option<bool>,
}

impl RatioReport {
    /// Builds the report from the ratios of members `0 .. 2·count`.
    pub fn from_samples(experiment: &dyn Experiment, ensemble: &EnsembleSpec, samples: &[Option<f64>]) -> Self {
        debug_assert_eq!(samples.len(), 2 * ensemble.count);
        let fold = |xs: &[Option<f64>]| {
            xs.iter().flatten().fold((f64::INFINITY, 0.0f64, 0usize), |(lo, hi, n), r| (lo.min(*r), hi.max(*r), n + 1))
        };
        let (lo, hi, n) = fold(&samples[..ensemble.count]);
        let (lo2, hi2, _) = fold(samples);
        let stable = ensemble.count >= MIN_STABLE_COUNT && n > 0 && (hi2 - hi).abs() <= STABILITY_TOLERANCE * hi;
        let hard_pass = experiment
            .hard_bounds()
            .map(|(a, b)| lo2 >= a * (1.0 - 1e-12) && hi2 <= b * (1.0 + 1e-12));
        Self {
            name: experiment.name(),
            params: experiment.params(),
            max_ratio: hi,
            min_ratio: if n == 0 { 0.0 } else { lo },
            count: ensemble.count,
            evaluated: n,
            doubled_max_ratio: hi2,
            stable,
            hard_pass,
        }
    }

    pub fn passed(&self) -> bool {
        self.stable && self.hard_pass != Some(false)
    }
}

/// Runs `experiment` member by member, in order.
pub fn run_experiment(experiment: &dyn Experiment, ensemble: &EnsembleSpec) -> Result<RatioReport> {
    experiment.validate(ensemble)?;
    let samples = (0..2 * ensemble.count)
        .map(|i| experiment.sample(ensemble, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioReport::from_samples(experiment, ensemble, &samples))
}

pub(crate) fn param(name: &str, value: f64) -> (String, f64) {
    (String::from(name), value)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(Vec<Option<f64>>);

    impl Experiment for Fixed {
        fn name(&self) -> String {
            "fixed".into()
        }
        fn params(&self) -> Vec<(String, f64)> {
            Vec::new()
        }
        fn hard_bounds(&self) -> Option<(f64, f64)> {
            Some((0.0, 2.0))
        }
        fn sample(&self, _: &EnsembleSpec, index: usize) -> Result<Option<f64>> {
            Ok(self.0[index % self.0.len()])
        }
    }

    fn ensemble(count: usize) -> EnsembleSpec {
        EnsembleSpec::new(count, 1, SpectrumSpec::dyadic(0, 2, 1.0)).unwrap()
    }

    #[test]
    fn report_statistics() {
        let exp = Fixed(alloc::vec![Some(1.0), None, Some(1.5)]);
        let r = run_experiment(&exp, &ensemble(60)).unwrap();
        assert_eq!((r.min_ratio, r.max_ratio, r.evaluated), (1.0, 1.5, 40));
        assert!(r.stable && r.hard_pass == Some(true) && r.passed());
    }

    #[test]
    fn small_ensembles_are_unstable() {
        let exp = Fixed(alloc::vec![Some(1.0)]);
        assert!(!run_experiment(&exp, &ensemble(2)).unwrap().stable);
    }

    #[test]
    fn drift_and_bounds_are_flagged() {
        let mut values = alloc::vec![Some(1.0); 50];
        values.extend(alloc::vec![Some(3.0); 50]);
        let r = run_experiment(&Fixed(values), &ensemble(50)).unwrap();
        assert!(!r.stable);
        assert_eq!(r.hard_pass, Some(false));
    }

    #[test]
    fn zero_count_rejected() {
        assert!(EnsembleSpec::new(0, 0, SpectrumSpec::dyadic(0, 1, 1.0)).is_err());
    }

    #[test]
    fn doubled_ensemble_extends_the_original() {
        let grid = GridSpec::new(2, 16).unwrap();
        let e = ensemble(3);
        let a = e.member_fields(&grid, 2, 1);
        let b = e.with_count(6).member_fields(&grid, 2, 1);
        assert_eq!(a, b);
    }
}
