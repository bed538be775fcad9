//! Self-check suites run by the `oracle-check` and `invariants` subcommands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cutlab::capacity::{sample_field, CapacityLaw};
use cutlab::cutgeom::{continuous_representation, empirical_measure, reachable_set};
use cutlab::estimators::{estimate_lower_tail_rate, run_indexed, CylinderSetup, RunOptions};
use cutlab::flow::{brute_force_min_cut, is_cutset, max_flow, min_cardinality_cut, BRUTE_FORCE_EDGE_LIMIT};
use cutlab::geometry::{DomainSpec, DomainSpecJson, JsonRational, PatchJson, Rational, SolidJson};
use cutlab::lattice::{build_lattice, LatticeDomain};

use crate::CliError;

/// Result of one named check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, failures: usize, total: usize) -> Self {
        Self { name: name.into(), passed: failures == 0, detail: format!("{failures} failures in {total} cases") }
    }
}

fn r(v: i128) -> Rational {
    Rational::from_integer(v)
}

/// Laws used by the suites: a constant, two Bernoulli-type laws (one with
/// an atom at zero) and a quantized uniform law.
pub fn suite_laws() -> Vec<CapacityLaw> {
    vec![
        CapacityLaw::deterministic(r(1)).expect("valid law"),
        CapacityLaw::two_point(r(1), r(2), 0.5).expect("valid law"),
        CapacityLaw::two_point(r(0), r(1), 0.6).expect("valid law"),
        CapacityLaw::uniform_quantized(r(0), r(3), 6).expect("valid law"),
    ]
}

/// Box `Π [0, sides_i]` with sources on `x_axis = 0` and sinks on the
/// opposite face.
pub fn box_domain(sides: &[i64], axis: usize) -> Result<DomainSpec, CliError> {
    let json = DomainSpecJson {
        d: sides.len(),
        solid: vec![SolidJson::Box {
            bounds: sides.iter().map(|&s| [JsonRational(r(0)), JsonRational(r(s as i128))]).collect(),
        }],
        gamma1: vec![PatchJson::Face { face: format!("x{axis}-min"), solid: 0, clip: vec![] }],
        gamma2: vec![PatchJson::Face { face: format!("x{axis}-max"), solid: 0, clip: vec![] }],
    };
    Ok(json.build()?)
}

/// A random box lattice with at most `max_edges` edges.
fn random_small_lattice(rng: &mut ChaCha8Rng, max_edges: usize) -> Result<LatticeDomain, CliError> {
    loop {
        let d = if rng.random_bool(0.2) { 3 } else { 2 };
        let sides: Vec<i64> = (0..d).map(|_| rng.random_range(1..=3)).collect();
        let n = rng.random_range(1..=2);
        let axis = rng.random_range(0..d);
        let lattice = build_lattice(&box_domain(&sides, axis)?, n)?;
        if lattice.graph.num_edges() <= max_edges {
            return Ok(lattice);
        }
    }
}

/// Max-flow value against exhaustive minimal cutset enumeration on `count`
/// random instances with at most 20 edges.
pub fn oracle_suite(count: usize, seed: u64) -> Result<Vec<CheckOutcome>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let laws = suite_laws();
    let mut failures = 0;
    for _ in 0..count {
        let lattice = random_small_lattice(&mut rng, BRUTE_FORCE_EDGE_LIMIT.min(20))?;
        let law = &laws[rng.random_range(0..laws.len())];
        let field = sample_field(lattice.graph.num_edges(), law, rng.random());
        let flow = max_flow(&lattice.graph, &field.numerators, &lattice.gamma1, &lattice.gamma2)?;
        let oracle = brute_force_min_cut(&lattice.graph, &field, &lattice.gamma1, &lattice.gamma2)?;
        if flow.value != oracle.capacity || !is_cutset(&lattice.graph, &oracle.edges, &lattice.gamma1, &lattice.gamma2) {
            failures += 1;
        }
    }
    Ok(vec![CheckOutcome::new("max-flow equals brute-force min cut", failures, count)])
}

/// Structural identities on `count` random box instances: duality and cutset
/// property, empirical mass, reachable-set voxels, the cardinality floor and
/// capacity homogeneity; plus coupled monotonicity of a rate curve.
pub fn invariant_suite(count: usize, seed: u64, options: &RunOptions) -> Result<Vec<CheckOutcome>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let laws = suite_laws();
    let cases: Vec<(Vec<i64>, usize, u32, usize, u64)> = (0..count)
        .map(|_| {
            let d = if rng.random_bool(0.3) { 3 } else { 2 };
            let sides: Vec<i64> = (0..d).map(|_| rng.random_range(1..=2)).collect();
            let n = if d == 2 { rng.random_range(2..=10) } else { rng.random_range(2..=4) };
            (sides, rng.random_range(0..d), n, rng.random_range(0..laws.len()), rng.random())
        })
        .collect();
    let results = run_indexed(options, count, |i| {
        let (sides, axis, n, law_index, field_seed) = &cases[i];
        let law = &laws[*law_index];
        let spec = box_domain(sides, *axis).map_err(|e| cutlab::Error::InvalidArgument(e.to_string()))?;
        let lattice = build_lattice(&spec, *n)?;
        let (g, s, t) = (&lattice.graph, &lattice.gamma1, &lattice.gamma2);
        let field = sample_field(g.num_edges(), law, *field_seed);
        let flow = max_flow(g, &field.numerators, s, t)?;
        let cut_value: i64 = flow.cut.iter().map(|&e| field.numerators[e as usize]).sum();
        let duality = flow.verify(g, &field.numerators, s, t).is_ok() && cut_value == flow.value && is_cutset(g, &flow.cut, s, t);
        let d = g.dim() as u32;
        let mass = empirical_measure(g, &flow.cut, &field).total_mass()
            == Rational::new(flow.value as i128, field.denominator as i128 * (*n as i128).pow(d - 1));
        let reachable = reachable_set(g, &flow.cut, s);
        let voxels = continuous_representation(g, &reachable);
        let voxels_match = g
            .vertex_ids()
            .all(|v| voxels.contains_index(g.coord(v)) == reachable.binary_search(&v).is_ok());
        let floor = flow.value >= law.atoms()[0].0 * min_cardinality_cut(g, s, t)?;
        let tripled = law.scaled(r(3))?;
        let scaled_field = sample_field(g.num_edges(), &tripled, *field_seed);
        let scaled = max_flow(g, &scaled_field.numerators, s, t)?;
        let homogeneous = scaled.value * field.denominator == 3 * flow.value * scaled_field.denominator;
        Ok([duality, mass, voxels_match, floor, homogeneous])
    })?;
    let names = [
        "duality and cutset property",
        "empirical measure mass",
        "reachable set voxels",
        "cardinality floor",
        "capacity homogeneity",
    ];
    let mut outcomes: Vec<CheckOutcome> = names
        .iter()
        .enumerate()
        .map(|(j, name)| CheckOutcome::new(name, results.iter().filter(|r| !r[j]).count(), count))
        .collect();

    let setup = CylinderSetup::axis_aligned(2, 1.0, 1.0)?;
    let grid: Vec<f64> = (0..=10).map(|i| 1.0 + 0.1 * i as f64).collect();
    let curve = estimate_lower_tail_rate(&setup, &laws[1], 6, &grid, 200, seed, options)?;
    let violations = curve
        .estimates
        .windows(2)
        .filter(|w| w[0].hits > w[1].hits || w[0].rate < w[1].rate)
        .count();
    outcomes.push(CheckOutcome::new("coupled rate monotonicity", violations, grid.len() - 1));
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_small_runs() {
        assert!(oracle_suite(10, 1).unwrap().iter().all(|o| o.passed));
        assert!(invariant_suite(10, 1, &RunOptions::default()).unwrap().iter().all(|o| o.passed));
    }

    #[test]
    fn small_instances_respect_the_edge_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            assert!(random_small_lattice(&mut rng, 20).unwrap().graph.num_edges() <= 20);
        }
    }
}
