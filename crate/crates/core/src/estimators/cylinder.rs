use super::{clopper_pearson, replicate_seed, run_indexed, RunOptions, SeriesPoint};
use crate::capacity::{sample_field, CapacityLaw};
use crate::error::{Error, Result};
use crate::flow::{max_flow, min_cardinality_cut};
use crate::lattice::{build_cylinder_with_budget, CylinderLattice, Hyperrectangle, MemoryBudget};

/// Relative slack when comparing a flow numerator with a real threshold.
const THRESHOLD_SLACK: f64 = 1e-12;

/// A cylinder `cyl(A, h)` with axis `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSetup {
    pub base: Hyperrectangle,
    pub height: f64,
    pub direction: Vec<f64>,
}

impl CylinderSetup {
    /// `A = {0} × [0, side]^{d-1}` normal to `e₁`, height `h`.
    pub fn axis_aligned(d: usize, side: f64, height: f64) -> Result<Self> {
        let mut center = vec![0.5 * side; d];
        center[0] = 0.0;
        let base = Hyperrectangle::axis_aligned(center, 0, vec![side; d - 1])?;
        let mut direction = vec![0.0; d];
        direction[0] = 1.0;
        Ok(Self { base, height, direction })
    }

    pub fn build(&self, n: u32, budget: MemoryBudget) -> Result<CylinderLattice> {
        let cyl = build_cylinder_with_budget(&self.base, self.height, &self.direction, n, budget)?;
        if cyl.top.is_empty() || cyl.bottom.is_empty() {
            return Err(Error::DegenerateDiscretization(format!(
                "cylinder has an empty top or bottom boundary at n = {n}"
            )));
        }
        Ok(cyl)
    }

    pub fn area(&self) -> f64 {
        self.base.area()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }
}

/// Raw cylinder flows at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSamples {
    pub n: u32,
    pub area: f64,
    pub min_cardinality: i64,
    /// `τ_n` numerators over `denominator`, one per replicate.
    pub flows: Vec<i64>,
    pub denominator: i64,
}

impl CylinderSamples {
    /// `H^{d-1}(A) n^{d-1}`.
    pub fn normaliser(&self, d: usize) -> f64 {
        self.area * (self.n as f64).powi(d as i32 - 1)
    }

    pub fn normalised(&self, d: usize) -> Vec<f64> {
        let norm = self.normaliser(d) * self.denominator as f64;
        self.flows.iter().map(|&t| t as f64 / norm).collect()
    }
}

/// Samples `reps` fields on the cylinder and computes `τ_n` for each. Every
/// flow is verified, and checked against the floor `δ_G · mincard`.
pub fn sample_cylinder_flows(
    setup: &CylinderSetup,
    law: &CapacityLaw,
    n: u32,
    reps: usize,
    seed: u64,
    options: &RunOptions,
) -> Result<CylinderSamples> {
    let cyl = setup.build(n, options.memory)?;
    let g = &cyl.graph;
    let min_cardinality = min_cardinality_cut(g, &cyl.top, &cyl.bottom)?;
    let floor = law.atoms()[0].0 * min_cardinality;
    let flows = run_indexed(options, reps, |k| {
        let field = sample_field(g.num_edges(), law, replicate_seed(seed, n, k));
        let flow = max_flow(g, &field.numerators, &cyl.top, &cyl.bottom)?;
        let mut caps = field.numerators;
        if options.corrupt_capacity {
            if let Some(&e) = flow.cut.first() {
                caps[e as usize] += 1;
            }
        }
        flow.verify(g, &caps, &cyl.top, &cyl.bottom)?;
        if flow.value < floor {
            return Err(Error::InvariantViolation(format!(
                "flow {} below the cardinality floor {floor} at n = {n}",
                flow.value
            )));
        }
        Ok(flow.value)
    })?;
    Ok(CylinderSamples { n, area: setup.area(), min_cardinality, flows, denominator: law.denominator() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConstantEstimate {
    pub points: Vec<SeriesPoint>,
    /// Scales that could not be simulated, with the reason.
    pub failures: Vec<(u32, String)>,
    /// Mean normalised flow at the largest simulated scale.
    pub estimate: f64,
    pub interval: (f64, f64),
    /// Raw flows of every simulated scale, in the order of `points`.
    pub samples: Vec<CylinderSamples>,
}

pub fn estimate_flow_constant(
    setup: &CylinderSetup,
    law: &CapacityLaw,
    n_list: &[u32],
    reps: usize,
    seed: u64,
    options: &RunOptions,
) -> Result<FlowConstantEstimate> {
    let d = setup.dim();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    let mut samples = Vec::new();
    for &n in n_list {
        match sample_cylinder_flows(setup, law, n, reps, seed, options) {
            Ok(s) => {
                points.push(SeriesPoint::from_samples(n, &s.normalised(d)));
                samples.push(s);
            }
            Err(e @ (Error::DegenerateDiscretization(_) | Error::InvalidGeometry(_))) => {
                failures.push((n, e.to_string()))
            }
            Err(e) => return Err(e),
        }
    }
    let last = points
        .iter()
        .max_by_key(|p| p.n)
        .ok_or_else(|| Error::DegenerateDiscretization("no scale could be simulated".into()))?;
    Ok(FlowConstantEstimate { estimate: last.mean, interval: last.mean_interval(), points, failures, samples })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub lambda: f64,
    pub n: u32,
    pub reps: usize,
    pub hits: usize,
    pub p_hat: f64,
    pub p_interval: (f64, f64),
    /// `-log p̂ / (H^{d-1}(A) n^{d-1})`, infinite when there are no hits.
    pub rate: f64,
    pub rate_interval: (f64, f64),
    /// The threshold lies below `δ_G · mincard`, so `p = 0` exactly.
    pub structurally_impossible: bool,
}

impl RateEstimate {
    pub fn note(&self) -> String {
        if self.structurally_impossible {
            "structurally impossible".into()
        } else if self.hits == 0 {
            format!("p=0 (<= {:.3e} at 95%)", 3.0 / self.reps as f64)
        } else {
            String::new()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub n: u32,
    pub area: f64,
    pub min_cardinality: i64,
    /// `δ_G · mincard / (H^{d-1}(A) n^{d-1})`: thresholds below are impossible.
    pub floor_lambda: f64,
    pub estimates: Vec<RateEstimate>,
}

/// Lower-tail estimates `P(τ_n ≤ λ H^{d-1}(A) n^{d-1})` on one replicate
/// set shared by every threshold.
pub fn estimate_lower_tail_rate(
    setup: &CylinderSetup,
    law: &CapacityLaw,
    n: u32,
    lambdas: &[f64],
    reps: usize,
    seed: u64,
    options: &RunOptions,
) -> Result<RateCurve> {
    if lambdas.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument("lambda grid must be sorted ascending".into()));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be >= 1".into()));
    }
    let d = setup.dim();
    let cyl = setup.build(n, options.memory)?;
    let min_cardinality = min_cardinality_cut(&cyl.graph, &cyl.top, &cyl.bottom)?;
    let denominator = law.denominator() as f64;
    let floor = (law.atoms()[0].0 * min_cardinality) as f64;
    let normaliser = setup.area() * (n as f64).powi(d as i32 - 1);
    let thresholds: Vec<f64> = lambdas.iter().map(|l| l * normaliser * denominator * (1.0 + THRESHOLD_SLACK)).collect();
    let impossible: Vec<bool> = thresholds.iter().map(|&t| t < floor).collect();
    let flows = if impossible.iter().all(|&b| b) {
        Vec::new()
    } else {
        sample_cylinder_flows(setup, law, n, reps, seed, options)?.flows
    };
    let estimates = lambdas
        .iter()
        .zip(&thresholds)
        .zip(&impossible)
        .map(|((&lambda, &t), &structurally_impossible)| {
            let hits = flows.iter().filter(|&&f| f as f64 <= t).count();
            let p_hat = hits as f64 / reps as f64;
            let p_interval = if structurally_impossible { (0.0, 0.0) } else { clopper_pearson(hits, reps) };
            let to_rate = |p: f64| if p > 0.0 { (-p.ln() / normaliser).max(0.0) } else { f64::INFINITY };
            RateEstimate {
                lambda,
                n,
                reps,
                hits,
                p_hat,
                p_interval,
                rate: to_rate(p_hat),
                rate_interval: (to_rate(p_interval.1), to_rate(p_interval.0)),
                structurally_impossible,
            }
        })
        .collect();
    Ok(RateCurve {
        n,
        area: setup.area(),
        min_cardinality,
        floor_lambda: floor / (normaliser * denominator),
        estimates,
    })
}
