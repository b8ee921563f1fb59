//! Uniform time grids.

use alloc::format;

use crate::error::{Error, Result};

/// `n` uniform steps of size `dt` reaching `t_end`, with snapshots every `stride` steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_end: f64,
    dt: f64,
    steps: usize,
    stride: usize,
}

impl TimeGrid {
    /// Relative tolerance for `t_end / dt` to count as an integer.
    pub const STEP_TOLERANCE: f64 = 1e-9;

    pub fn new(t_end: f64, dt: f64, stride: usize) -> Result<Self> {
        Self::check(t_end, dt, stride)?;
        let ratio = t_end / dt;
        let steps = libm::round(ratio);
        if (ratio - steps).abs() > Self::STEP_TOLERANCE * ratio.max(1.0) || steps < 1.0 {
            return Err(Error::InvalidTimeGrid(format!(
                "horizon {t_end} is not an integer number of steps {dt}"
            )));
        }
        Ok(Self {
            t_end,
            dt: t_end / steps,
            steps: steps as usize,
            stride,
        })
    }

    /// Smallest uniform grid with step at most `max_dt`.
    pub fn fitted(t_end: f64, max_dt: f64, stride: usize) -> Result<Self> {
        Self::check(t_end, max_dt, stride)?;
        let ratio = t_end / max_dt;
        let mut steps = libm::ceil(ratio);
        if ratio - libm::floor(ratio) <= Self::STEP_TOLERANCE * ratio {
            steps = libm::floor(ratio).max(1.0);
        }
        Ok(Self {
            t_end,
            dt: t_end / steps,
            steps: steps as usize,
            stride,
        })
    }

    fn check(t_end: f64, dt: f64, stride: usize) -> Result<()> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidTimeGrid(format!("horizon {t_end} must be positive")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidTimeGrid(format!("step {dt} must be positive")));
        }
        if stride == 0 {
            return Err(Error::InvalidTimeGrid("save stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn time(&self, step: usize) -> f64 {
        if step == self.steps {
            self.t_end
        } else {
            step as f64 * self.dt
        }
    }

    /// Whether a snapshot is taken after `step`; the initial and final states always are.
    pub fn is_snapshot(&self, step: usize) -> bool {
        step.is_multiple_of(self.stride) || step == self.steps
    }

    pub fn snapshot_steps(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.steps).filter(move |s| self.is_snapshot(*s))
    }

    /// Same horizon with the step halved.
    pub fn refined(&self) -> Self {
        Self {
            t_end: self.t_end,
            dt: self.dt / 2.0,
            steps: self.steps * 2,
            stride: self.stride * 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_steps_required() {
        let g = TimeGrid::new(1.0, 0.1, 1).unwrap();
        assert_eq!(g.steps(), 10);
        assert_eq!(g.time(10), 1.0);
        assert!(TimeGrid::new(1.0, 0.3, 1).is_err());
        assert!(TimeGrid::new(1.0, 0.0, 1).is_err());
        assert!(TimeGrid::new(-1.0, 0.1, 1).is_err());
        assert!(TimeGrid::new(1.0, 0.1, 0).is_err());
    }

    #[test]
    fn fitted_grid() {
        let g = TimeGrid::fitted(core::f64::consts::PI, 0.1, 1).unwrap();
        assert_eq!(g.steps(), 32);
        assert!(g.dt() <= 0.1);
        assert_eq!(TimeGrid::fitted(1.0, 0.1, 1).unwrap().steps(), 10);
    }

    #[test]
    fn snapshots_include_ends() {
        let g = TimeGrid::new(1.0, 0.1, 4).unwrap();
        let s: alloc::vec::Vec<usize> = g.snapshot_steps().collect();
        assert_eq!(s, [0, 4, 8, 10]);
        let r = g.refined();
        assert_eq!(r.steps(), 20);
        assert_eq!(r.snapshot_steps().count(), s.len());
    }
}
