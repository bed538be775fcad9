//! Monte Carlo campaigns: flow constants, lower-tail rate curves, domain
//! flows with cut statistics, ball events, weak-triangle and minimality
//! checks.
//!
//! Replicate `k` of a campaign at scale `n` always draws its field from the
//! seed `replicate_stream(replicate_stream(seed, n), k)`, and replicates are
//! reduced in index order, so results do not depend on the thread count.

mod cylinder;
mod domain;
mod events;
mod minimality;
mod triangle;

use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

pub use cylinder::{
    estimate_flow_constant, estimate_lower_tail_rate, sample_cylinder_flows, CylinderSetup, FlowConstantEstimate,
    CylinderSamples, RateCurve, RateEstimate,
};
pub use domain::{estimate_domain_flow, DomainFlowSeries, DomainReplicate, DomainScale};
pub use events::{
    detect_g_event, detect_gbar_event, BallEventParams, GEventOutcome, GbarOutcome, TriState,
};
pub use minimality::{check_minimality_panel, lambda_min, MinimalityReport, PanelRow};
pub use triangle::{check_weak_triangle, TriangleReport, TriangleSides, TriangleViolation};

use crate::capacity::replicate_stream;
use crate::error::{Error, Result};
use crate::lattice::MemoryBudget;

/// Knobs shared by every campaign.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Test hook: perturb one capacity before verifying each flow, which
    /// must surface as an invariant violation.
    pub corrupt_capacity: bool,
    /// Cap on the size of every lattice built by the campaign.
    pub memory: MemoryBudget,
}

/// Seed of replicate `k` at scale `n`.
pub fn replicate_seed(seed: u64, n: u32, k: usize) -> u64 {
    replicate_stream(replicate_stream(seed, n as u64), k as u64)
}

/// Runs `f(0..count)` on the configured pool and returns results in index
/// order; the first error by index wins.
pub fn run_indexed<T: Send>(
    options: &RunOptions,
    count: usize,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    let collect = || (0..count).into_par_iter().map(&f).collect::<Vec<Result<T>>>();
    let results = match options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(collect),
        None => collect(),
    };
    results.into_iter().collect()
}

/// One row of a convergence experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub n: u32,
    pub mean: f64,
    pub std: f64,
    pub reps: usize,
}

impl SeriesPoint {
    pub fn from_samples(n: u32, samples: &[f64]) -> Self {
        let reps = samples.len();
        let mean = samples.iter().sum::<f64>() / reps.max(1) as f64;
        let var = if reps > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64
        } else {
            0.0
        };
        Self { n, mean, std: var.sqrt(), reps }
    }

    /// Normal-approximation 95% interval on the mean.
    pub fn mean_interval(&self) -> (f64, f64) {
        let half = 1.96 * self.std / (self.reps.max(1) as f64).sqrt();
        (self.mean - half, self.mean + half)
    }
}

/// Exact two-sided 95% Clopper-Pearson interval for `k` successes in `r` trials.
pub fn clopper_pearson(k: usize, r: usize) -> (f64, f64) {
    const ALPHA: f64 = 0.05;
    let (k, r) = (k as f64, r as f64);
    let lo = if k == 0.0 {
        0.0
    } else {
        Beta::new(k, r - k + 1.0).map_or(0.0, |b| b.inverse_cdf(ALPHA / 2.0))
    };
    let hi = if k == r {
        1.0
    } else {
        Beta::new(k + 1.0, r - k).map_or(1.0, |b| b.inverse_cdf(1.0 - ALPHA / 2.0))
    };
    (lo, hi)
}

/// Empirical quantile with linear interpolation, `q ∈ [0, 1]`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clopper_pearson_reference_values() {
        let (lo, hi) = clopper_pearson(0, 100);
        assert_eq!(lo, 0.0);
        // 1 - 0.025^(1/100)
        assert!((hi - 0.036217).abs() < 1e-5);
        let (lo, hi) = clopper_pearson(50, 100);
        assert!((lo - 0.398321).abs() < 1e-5);
        assert!((hi - 0.601679).abs() < 1e-5);
        assert_eq!(clopper_pearson(7, 7).1, 1.0);
    }

    #[test]
    fn series_statistics() {
        let p = SeriesPoint::from_samples(4, &[1.0, 2.0, 3.0]);
        assert_eq!(p.mean, 2.0);
        assert!((p.std - 1.0).abs() < 1e-12);
        let single = SeriesPoint::from_samples(4, &[5.0]);
        assert_eq!(single.std, 0.0);
    }

    #[test]
    fn quantiles_interpolate() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert_eq!(quantile(&xs, 0.5), 2.5);
    }

    #[test]
    fn indexed_runs_preserve_order() {
        let opts = RunOptions { threads: Some(4), ..Default::default() };
        let out = run_indexed(&opts, 100, |i| Ok(i * i)).unwrap();
        assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
        let err = run_indexed(&opts, 10, |i| if i >= 3 { Err(Error::NotACutset) } else { Ok(i) });
        assert!(err.is_err());
    }

    #[test]
    fn replicate_seeds_depend_on_scale() {
        assert_ne!(replicate_seed(1, 4, 0), replicate_seed(1, 8, 0));
        assert_ne!(replicate_seed(1, 4, 0), replicate_seed(1, 4, 1));
    }
}
