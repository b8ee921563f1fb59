use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use super::inequalities::{BernsteinExperiment, CommutatorExperiment, LogInterpExperiment, Pairing, ProductExperiment, ProductLaw};
use super::{EnsembleSpec, Experiment};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::norms::{BesovSpec, Exponent};
use crate::random::SpectrumSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Bernstein,
    Products,
    LogInterp,
    Commutator,
    Scaling,
    Smallness,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["bernstein", "products", "loginterp", "commutator", "scaling", "smallness", "all"];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Bernstein => "bernstein",
            Suite::Products => "products",
            Suite::LogInterp => "loginterp",
            Suite::Commutator => "commutator",
            Suite::Scaling => "scaling",
            Suite::Smallness => "smallness",
            Suite::All => "all",
        }
    }

    pub fn includes(&self, other: Suite) -> bool {
        *self == other || *self == Suite::All
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Suite::Bernstein,
            Suite::Products,
            Suite::LogInterp,
            Suite::Commutator,
            Suite::Scaling,
            Suite::Smallness,
            Suite::All,
        ];
        all.into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(String::from("unknown suite ") + s))
    }
}

pub type Planned = (Box<dyn Experiment>, EnsembleSpec);

/// The shipped ratio experiments of `suite` on `grid`. `count` overrides the
/// default ensemble sizes (100 for the Bernstein bracket, 50 elsewhere).
pub fn default_ratio_experiments(suite: Suite, grid: &GridSpec, count: Option<usize>, seed: u64) -> Result<Vec<Planned>> {
    let n = grid.dim() as f64;
    let critical = n / 2.0;
    let radius = 3.0 * grid.points() as f64 / 16.0;
    let broad = SpectrumSpec::retained(grid);
    let half = SpectrumSpec {
        k_min: 1.0,
        k_max: radius / 2.0,
        decay: 1.0,
    };
    let ens = |default: usize, spectrum: SpectrumSpec| EnsembleSpec::new(count.unwrap_or(default), seed, spectrum);
    let two = Exponent::TWO;
    let mut out: Vec<Planned> = Vec::new();

    if suite.includes(Suite::Bernstein) {
        let mut orders = alloc::vec![0.0, 1.0];
        if critical != 1.0 {
            orders.push(critical);
        }
        for s in orders {
            let exp = BernsteinExperiment {
                grid: *grid,
                spec: BesovSpec::l2(s),
            };
            out.push((Box::new(exp), ens(100, broad)?));
        }
    }
    if suite.includes(Suite::Products) {
        let summable = |s1, s2| ProductExperiment::new(grid, ProductLaw::Summable, s1, s2, two);
        let bounded = |s1, s2| ProductExperiment::new(grid, ProductLaw::Bounded, s1, s2, two);
        let list = [
            summable(critical, critical)?,
            summable(critical, critical - 0.5)?,
            summable(critical - 0.5, critical - 0.5)?,
            summable(critical, critical)?.with_pairing(Pairing::Diagonal),
            summable(critical, critical)?.with_pairing(Pairing::Separated),
            bounded(critical, critical - 1.0)?,
            summable(critical, critical)?.in_time(two, two)?,
            bounded(critical, critical - 1.0)?.in_time(Exponent::ONE, Exponent::Infinity)?,
        ];
        for exp in list {
            out.push((Box::new(exp), ens(50, half)?));
        }
    }
    if suite.includes(Suite::LogInterp) {
        for eps in [0.5, 1.0] {
            let exp = LogInterpExperiment::new(grid, critical, eps, two, two)?;
            out.push((Box::new(exp), ens(50, broad)?));
        }
    }
    if suite.includes(Suite::Commutator) {
        let exp = CommutatorExperiment::new(grid, critical.max(1.0), critical, two, Exponent::ONE, two)?;
        out.push((Box::new(exp), ens(50, half)?));
    }
    Ok(out)
}
