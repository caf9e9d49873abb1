//! Monte Carlo estimation of expected acknowledgements and completion
//! time, with normal-approximation confidence intervals.

use std::ops::Range;

use num_traits::{Float, FromPrimitive};
use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::engine::{run, RunOptions, RunResult, SimConfig};
use crate::error::{Error, Result};
use crate::gateway::Ordering;
use crate::topology::Grid;
use crate::variant::Variant;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub mean: T,
    /// Half-width of the 95% confidence interval.
    pub half_width: T,
}

/// Sample mean and `z * s / sqrt(k)` with `s` the sample standard deviation.
pub fn estimate<T: Float + FromPrimitive>(samples: &[T]) -> Result<Estimate<T>> {
    let k = samples.len();
    if k < 2 {
        return Err(Error::TooFewSamples(k));
    }
    let kf = T::from_usize(k).unwrap();
    let mean = samples.iter().fold(T::zero(), |acc, &x| acc + x) / kf;
    let ss = samples
        .iter()
        .fold(T::zero(), |acc, &x| acc + (x - mean) * (x - mean));
    let sd = (ss / (kf - T::one())).sqrt();
    let z = T::from_f64(Z_95).unwrap();
    Ok(Estimate {
        mean,
        half_width: z * sd / kf.sqrt(),
    })
}

/// Exact (Clopper-Pearson) 95% interval for `successes` out of `trials`.
pub fn clopper_pearson(successes: usize, trials: usize) -> (f64, f64) {
    const ALPHA: f64 = 0.05;
    if trials == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (successes as f64, trials as f64);
    let lo = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).map_or(0.0, |b| b.inverse_cdf(ALPHA / 2.0))
    };
    let hi = if successes == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k).map_or(1.0, |b| b.inverse_cdf(1.0 - ALPHA / 2.0))
    };
    (lo, hi)
}

/// One cell of an orderings-by-variants results table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRow {
    pub ordering: Ordering,
    pub variant: Variant,
    pub runs: usize,
    pub mean_acks: f64,
    pub hw_acks: f64,
    pub mean_time: f64,
    pub hw_time: f64,
    pub deadlock_fraction: f64,
}

impl EstimateRow {
    pub fn from_runs(ordering: Ordering, variant: Variant, results: &[RunResult]) -> Result<Self> {
        let acks: Vec<f64> = results.iter().map(|r| r.acks as f64).collect();
        let time: Vec<f64> = results.iter().map(|r| f64::from(r.time)).collect();
        let a = estimate(&acks)?;
        let t = estimate(&time)?;
        let deadlocked = results.iter().filter(|r| r.deadlocked).count();
        Ok(Self {
            ordering,
            variant,
            runs: results.len(),
            mean_acks: a.mean,
            hw_acks: a.half_width,
            mean_time: t.mean,
            hw_time: t.half_width,
            deadlock_fraction: deadlocked as f64 / results.len() as f64,
        })
    }

    pub fn deadlocked_runs(&self) -> usize {
        (self.deadlock_fraction * self.runs as f64).round() as usize
    }

    pub fn deadlock_interval(&self) -> (f64, f64) {
        clopper_pearson(self.deadlocked_runs(), self.runs)
    }

    pub fn has_deadlocks(&self) -> bool {
        self.deadlock_fraction > 0.0
    }
}

/// Seed of run `index` in an experiment started from `base_seed`.
pub fn run_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

/// Runs `indices` of an experiment in parallel; results come back in index
/// order regardless of scheduling.
pub fn sample_runs(
    grid: &Grid,
    cfg: SimConfig,
    base_seed: u64,
    indices: Range<usize>,
) -> Result<Vec<RunResult>> {
    indices
        .into_par_iter()
        .map(|i| run(grid, cfg, run_seed(base_seed, i), RunOptions::default()))
        .collect()
}

pub fn run_experiment(cfg: SimConfig, runs: usize, base_seed: u64) -> Result<EstimateRow> {
    if runs < 2 {
        return Err(Error::TooFewSamples(runs));
    }
    let grid = cfg.grid()?;
    let results = sample_runs(&grid, cfg, base_seed, 0..runs)?;
    EstimateRow::from_runs(cfg.ordering, cfg.variant, &results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_have_zero_width() {
        let e = estimate(&[100.0f64; 1000]).unwrap();
        assert_eq!(e.mean, 100.0);
        assert_eq!(e.half_width, 0.0);
        let e32 = estimate(&[7.0f32; 3]).unwrap();
        assert_eq!((e32.mean, e32.half_width), (7.0, 0.0));
    }

    #[test]
    fn two_point_closed_form() {
        let e = estimate(&[0.0f64, 10.0]).unwrap();
        assert_eq!(e.mean, 5.0);
        let expected = 1.96 * 50.0f64.sqrt() / 2.0f64.sqrt();
        assert!((e.half_width - expected).abs() < 1e-12);
        assert!((e.half_width - 9.80).abs() < 5e-3);
    }

    #[test]
    fn too_few_samples() {
        assert_eq!(estimate::<f64>(&[]), Err(Error::TooFewSamples(0)));
        assert_eq!(estimate(&[1.0f64]), Err(Error::TooFewSamples(1)));
    }

    #[test]
    fn clopper_pearson_bounds() {
        let (lo, hi) = clopper_pearson(0, 1000);
        assert_eq!(lo, 0.0);
        // rule of three: roughly 3/n
        assert!((hi - 0.003682).abs() < 1e-4, "{hi}");
        let (lo, hi) = clopper_pearson(1000, 1000);
        assert_eq!(hi, 1.0);
        assert!((lo - (1.0 - 0.003682)).abs() < 1e-4);
        let (lo, hi) = clopper_pearson(500, 1000);
        assert!(lo < 0.5 && hi > 0.5 && hi - lo < 0.07);
    }
}
