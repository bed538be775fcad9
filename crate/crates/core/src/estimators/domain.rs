use super::{quantile, replicate_seed, run_indexed, RunOptions, SeriesPoint};
use crate::capacity::{sample_field, CapacityLaw};
use crate::cutgeom::{continuous_representation, empirical_measure, reachable_set, voxel_symdiff_to_region};
use crate::error::{Error, Result};
use crate::flow::max_flow;
use crate::geometry::{ConvexRegion, DomainSpec, Rational};
use crate::lattice::build_lattice_with_budget;

/// Statistics of one replicate of `φ_n(Γ¹, Γ², Ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainReplicate {
    /// `φ_n` numerator over the law's denominator.
    pub flow: i64,
    /// `φ_n / n^{d-1}`.
    pub normalised_flow: f64,
    pub cut_cardinality: usize,
    /// `card(cut) / n^{d-1}`.
    pub cut_density: f64,
    /// `L^d(R Δ F)` for each panel member `F`.
    pub panel_distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainScale {
    pub n: u32,
    pub flow: SeriesPoint,
    pub cut_density: SeriesPoint,
    /// 5%, 50% and 95% quantiles of the cut density.
    pub cut_density_quantiles: [f64; 3],
    pub replicates: Vec<DomainReplicate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainFlowSeries {
    pub denominator: i64,
    pub scales: Vec<DomainScale>,
}

/// Samples `φ_n` on `Ω_n` for every `n`. Each replicate is verified against
/// duality, the mass of the empirical measure and the reachable set of its
/// cut; any failure is an invariant violation.
pub fn estimate_domain_flow(
    spec: &DomainSpec,
    law: &CapacityLaw,
    n_list: &[u32],
    reps: usize,
    seed: u64,
    panel: &[ConvexRegion],
    options: &RunOptions,
) -> Result<DomainFlowSeries> {
    if reps == 0 || n_list.is_empty() {
        return Err(Error::InvalidArgument("need at least one scale and one replicate".into()));
    }
    let d = spec.dim();
    let mut scales = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let lattice = build_lattice_with_budget(spec, n, options.memory)?;
        let g = &lattice.graph;
        let surface = (n as f64).powi(d as i32 - 1);
        let replicates = run_indexed(options, reps, |k| {
            let field = sample_field(g.num_edges(), law, replicate_seed(seed, n, k));
            let flow = max_flow(g, &field.numerators, &lattice.gamma1, &lattice.gamma2)?;
            let mut caps = field.numerators.clone();
            if options.corrupt_capacity {
                if let Some(&e) = flow.cut.first() {
                    caps[e as usize] += 1;
                }
            }
            flow.verify(g, &caps, &lattice.gamma1, &lattice.gamma2)?;
            let mu = empirical_measure(g, &flow.cut, &field);
            let expected = Rational::new(flow.value as i128, field.denominator as i128 * (n as i128).pow(d as u32 - 1));
            if mu.total_mass() != expected {
                return Err(Error::InvariantViolation(format!(
                    "empirical measure mass {} differs from flow {expected}",
                    mu.total_mass()
                )));
            }
            let reachable = reachable_set(g, &flow.cut, &lattice.gamma1);
            if reachable != flow.source_side {
                return Err(Error::InvariantViolation("reachable set differs from the source side".into()));
            }
            let voxels = continuous_representation(g, &reachable);
            let panel_distances =
                panel.iter().map(|f| voxel_symdiff_to_region(&voxels, f)).collect::<Result<Vec<_>>>()?;
            Ok(DomainReplicate {
                flow: flow.value,
                normalised_flow: flow.value as f64 / (field.denominator as f64 * surface),
                cut_cardinality: flow.cut.len(),
                cut_density: flow.cut.len() as f64 / surface,
                panel_distances,
            })
        })?;
        let flows: Vec<f64> = replicates.iter().map(|r| r.normalised_flow).collect();
        let mut densities: Vec<f64> = replicates.iter().map(|r| r.cut_density).collect();
        let cut_density = SeriesPoint::from_samples(n, &densities);
        densities.sort_by(f64::total_cmp);
        scales.push(DomainScale {
            n,
            flow: SeriesPoint::from_samples(n, &flows),
            cut_density,
            cut_density_quantiles: [0.05, 0.5, 0.95].map(|q| quantile(&densities, q)),
            replicates,
        });
    }
    Ok(DomainFlowSeries { denominator: law.denominator(), scales })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AxisBox, DomainSpecJson};

    fn unit_square() -> DomainSpec {
        DomainSpecJson::unit_box(2).build().unwrap()
    }

    #[test]
    fn deterministic_unit_box_flow_is_exact() {
        let law = CapacityLaw::deterministic(Rational::from_integer(1)).unwrap();
        let half = AxisBox::new(vec![Rational::from_integer(0); 2], vec![Rational::new(1, 2), Rational::from_integer(1)])
            .unwrap();
        let series =
            estimate_domain_flow(&unit_square(), &law, &[2, 4, 8], 2, 5, &[ConvexRegion::Box(half)], &RunOptions::default())
                .unwrap();
        for s in &series.scales {
            let n = s.n as f64;
            assert_eq!(s.flow.mean, (n + 1.0) / n);
            assert_eq!(s.flow.std, 0.0);
            assert_eq!(s.cut_density.mean, (n + 1.0) / n);
            assert_eq!(s.replicates[0].panel_distances.len(), 1);
        }
    }

    #[test]
    fn two_point_flow_is_between_support_bounds() {
        let law = CapacityLaw::two_point(Rational::from_integer(1), Rational::from_integer(2), 0.5).unwrap();
        let series = estimate_domain_flow(&unit_square(), &law, &[6], 20, 9, &[], &RunOptions::default()).unwrap();
        for r in &series.scales[0].replicates {
            assert!(r.normalised_flow >= 7.0 / 6.0 && r.normalised_flow <= 14.0 / 6.0);
        }
    }

    #[test]
    fn corruption_aborts() {
        let law = CapacityLaw::deterministic(Rational::from_integer(1)).unwrap();
        let opts = RunOptions { corrupt_capacity: true, ..Default::default() };
        let err = estimate_domain_flow(&unit_square(), &law, &[3], 1, 1, &[], &opts);
        assert!(matches!(err, Err(Error::InvariantViolation(_))));
    }
}
