//! Parallel evaluation of ensemble experiments.

use oldroyd_core::verify::{EnsembleSpec, Experiment, RatioReport};
use rayon::prelude::*;

/// Evaluates the `2·count` members across the thread pool and assembles the
/// report in member order, so the result matches the serial runner exactly.
pub fn run_parallel(experiment: &dyn Experiment, ensemble: &EnsembleSpec) -> oldroyd_core::Result<RatioReport> {
    experiment.validate(ensemble)?;
    let samples = (0..2 * ensemble.count)
        .into_par_iter()
        .map(|i| experiment.sample(ensemble, i))
        .collect::<oldroyd_core::Result<Vec<_>>>()?;
    Ok(RatioReport::from_samples(experiment, ensemble, &samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use oldroyd_core::verify::{default_ratio_experiments, run_experiment, Suite};
    use oldroyd_core::GridSpec;

    #[test]
    fn matches_the_serial_runner() {
        let grid = GridSpec::new(2, 32).unwrap();
        for (exp, ens) in default_ratio_experiments(Suite::Bernstein, &grid, Some(8), 3).unwrap() {
            assert_eq!(run_parallel(exp.as_ref(), &ens).unwrap(), run_experiment(exp.as_ref(), &ens).unwrap());
        }
    }
}
