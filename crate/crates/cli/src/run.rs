//! Experiment dispatch: one function per experiment kind, each turning a
//! config into result rows.

use cutlab::capacity::{sample_field, CapacityLaw, LawStatus};
use cutlab::cutgeom::{
    continuous_representation, empirical_measure, measure_pairing, reachable_set, voxel_perimeter_within,
    voxel_symdiff_to_region, ContinuousCutset,
};
use cutlab::estimators::{
    check_minimality_panel, check_weak_triangle, clopper_pearson, detect_g_event, detect_gbar_event,
    estimate_domain_flow, estimate_flow_constant, estimate_lower_tail_rate, lambda_min, replicate_seed,
    run_indexed, sample_cylinder_flows, CylinderSetup, RateCurve, RunOptions, SeriesPoint, TriState,
};
use cutlab::flow::max_flow;
use cutlab::geometry::{l1_norm, ConvexRegion, DomainSpec, Rational};
use cutlab::lattice::{build_lattice_with_budget, Hyperrectangle};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::{ResultRow, RunOutput};
use crate::CliError;

fn options(config: &ExperimentConfig) -> RunOptions {
    RunOptions { threads: config.threads, corrupt_capacity: config.corrupt_capacity(), memory: config.memory() }
}

fn law_for(config: &ExperimentConfig, d: usize, out: &mut RunOutput) -> Result<CapacityLaw, CliError> {
    let (law, report) = config.checked_law(d)?;
    if report.status == LawStatus::Warn {
        out.warnings.extend(report.warnings);
    }
    Ok(law)
}

/// Runs the experiment described by a validated config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    config.validate()?;
    let mut out = RunOutput::default();
    match config.kind()? {
        ExperimentKind::DomainFlow => domain_flow(config, &mut out)?,
        ExperimentKind::CylinderTau => cylinder_tau(config, &mut out)?,
        ExperimentKind::FlowConstant => flow_constant(config, &mut out)?,
        ExperimentKind::RateCurve => rate_curve(config, &mut out)?,
        ExperimentKind::CutGeometry => cut_geometry(config, &mut out)?,
        ExperimentKind::BallEvents => ball_events(config, &mut out)?,
        ExperimentKind::TriangleCheck => triangle_check(config, &mut out)?,
        ExperimentKind::MinimalityPanel => minimality_panel(config, &mut out)?,
    }
    Ok(out)
}

fn mean_row(kind: &'static str, n: u32, metric: &str, samples: &[f64]) -> ResultRow {
    let p = SeriesPoint::from_samples(n, samples);
    ResultRow::new(kind, Some(n), metric, p.mean, p.reps).with_ci(p.mean_interval())
}

fn dump_lattices(config: &ExperimentConfig, spec: &DomainSpec, out: &mut RunOutput) -> Result<(), CliError> {
    if !config.output.as_ref().is_some_and(|o| o.dump_lattice) {
        return Ok(());
    }
    for &n in &config.n_list {
        let lattice = build_lattice_with_budget(spec, n, config.memory())?;
        out.dumps.push((format!("lattice_n{n}.json"), serde_json::to_value(lattice.dump())?));
    }
    Ok(())
}

fn domain_flow(config: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    const KIND: &str = "domain-flow";
    let spec = config.domain()?;
    let law = law_for(config, spec.dim(), out)?;
    let panel = config.panel(spec.dim())?;
    let series = estimate_domain_flow(&spec, &law, &config.n_list, config.reps, config.seed()?, &panel, &options(config))?;
    for s in &series.scales {
        let n = Some(s.n);
        out.rows.push(ResultRow::new(KIND, n, "flow_mean", s.flow.mean, s.flow.reps).with_ci(s.flow.mean_interval()));
        out.rows.push(ResultRow::new(KIND, n, "flow_std", s.flow.std, s.flow.reps));
        out.rows.push(
            ResultRow::new(KIND, n, "cut_density_mean", s.cut_density.mean, s.cut_density.reps)
                .with_ci(s.cut_density.mean_interval()),
        );
        for (q, v) in ["q05", "q50", "q95"].iter().zip(s.cut_density_quantiles) {
            out.rows.push(ResultRow::new(KIND, n, format!("cut_density_{q}"), v, s.cut_density.reps));
        }
        for i in 0..panel.len() {
            let d: Vec<f64> = s.replicates.iter().map(|r| r.panel_distances[i]).collect();
            out.rows.push(mean_row(KIND, s.n, &format!("panel_distance_{i}"), &d));
        }
    }
    dump_lattices(config, &spec, out)
}

fn cylinder_tau(config: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    const KIND: &str = "cylinder-tau";
    let setup = config.cylinder()?;
    let law = law_for(config, setup.dim(), out)?;
    let opts = options(config);
    for &n in &config.n_list {
        let s = match sample_cylinder_flows(&setup, &law, n, config.reps, config.seed()?, &opts) {
            Ok(s) => s,
            Err(e @ cutlab::Error::DegenerateDiscretization(_)) => {
                out.warnings.push(e.to_string());
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let denom = s.denominator as f64;
        let taus: Vec<f64> = s.flows.iter().map(|&t| t as f64 / denom).collect();
        out.rows.push(mean_row(KIND, n, "tau_mean", &taus));
        out.rows.push(ResultRow::new(KIND, Some(n), "tau_min", taus.iter().copied().fold(f64::INFINITY, f64::min), s.flows.len()));
        out.rows.push(ResultRow::new(KIND, Some(n), "tau_max", taus.iter().copied().fold(0.0, f64::max), s.flows.len()));
        out.rows.push(ResultRow::new(KIND, Some(n), "min_cardinality", s.min_cardinality as f64, s.flows.len()));
    }
    Ok(())
}

fn flow_constant(config: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    const KIND: &str = "flow-constant";
    let setup = config.cylinder()?;
    let law = law_for(config, setup.dim(), out)?;
    let est = estimate_flow_constant(&setup, &law, &config.n_list, config.reps, config.seed()?, &options(config))?;
    for (n, reason) in &est.failures {
        out.warnings.push(format!("n = {n}: {reason}"));
    }
    for (p, s) in est.points.iter().zip(&est.samples) {
        let taus: Vec<f64> = s.flows.iter().map(|&t| t as f64 / s.denominator as f64).collect();
        out.rows.push(mean_row(KIND, p.n, "tau_mean", &taus));
        out.rows.push(ResultRow::new(KIND, Some(p.n), "normalised_mean", p.mean, p.reps).with_ci(p.mean_interval()));
        out.rows.push(ResultRow::new(KIND, Some(p.n), "normalised_std", p.std, p.reps));
    }
    let last = est.points.iter().map(|p| p.n).max();
    out.rows.push(ResultRow::new(KIND, last, "nu_hat", est.estimate, config.reps).with_ci(est.interval));
    Ok(())
}

fn rate_rows(kind: &'static str, label: &str, curve: &RateCurve, out: &mut RunOutput) {
    let n = Some(curve.n);
    out.rows.push(ResultRow::new(kind, n, format!("{label}floor_lambda"), curve.floor_lambda, 0));
    for e in &curve.estimates {
        let row = |metric: &str, value: f64| ResultRow::new(kind, n, format!("{label}{metric}"), value, e.reps).with_lambda(e.lambda);
        out.rows.push(row("hits", e.hits as f64));
        out.rows.push(row("p_hat", e.p_hat).with_ci(e.p_interval));
        out.rows.push(row("rate", e.rate).with_ci(e.rate_interval));
        out.rows.push(row("structurally_impossible", if e.structurally_impossible { 1.0 } else { 0.0 }));
    }
}

fn rate_curve(config: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    const KIND: &str = "rate-curve";
    let setup = config.cylinder()?;
    let law = law_for(config, setup.dim(), out)?;
    for &n in &config.n_list {
        let curve = estimate_lower_tail_rate(&setup, &law, n, &config.lambda_grid, config.reps, config.seed()?, &options(config))?;
        rate_rows(KIND, "", &curve, out);
    }
    Ok(())
}

fn single_region(spec: &DomainSpec) -> Option<ConvexRegion> {
    spec.as_single_box()
        .map(|b| ConvexRegion::Box(b.clone()))
        .or_else(|| spec.as_single_polytope().map(ConvexRegion::Polytope))
}

fn cut_geometry(config: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    const KIND: &str = "cut-geometry";
    let spec = config.domain()?;
    let d = spec.dim();
    let law = law_for(config, d, out)?;
    let panel = config.panel(d)?;
    let region = single_region(&spec);
    if region.is_none() {
        out.warnings.push("domain is not a single convex region: perimeter skipped".into());
    }
    let opts = options(config);
    let seed = config.seed()?;
    let mut names = vec!["mass".to_string(), "cut_density".to_string()];
    names.extend((0..d).map(|i| format!("pairing_x{i}")));
    if region.is_some() {
        names.push("perimeter".into());
    }
    names.extend((0..panel.len()).map(|i| format!("panel_distance_{i}")));
    for &n in &config.n_list {
        let lattice = build_lattice_with_budget(&spec, n, config.memory())?;
        let g = &lattice.graph;
        let surface = (n as f64).powi(d as i32 - 1);
        let stats = run_indexed(&opts, config.reps, |k| {
            let field = sample_field(g.num_edges(), &law, replicate_seed(seed, n, k));
            let flow = max_flow(g, &field.numerators, &lattice.gamma1, &lattice.gamma2)?;
            let mut caps = field.numerators.clone();
            if opts.corrupt_capacity {
                if let Some(&e) = flow.cut.first() {
                    caps[e as usize] += 1;
                }
            }
            flow.verify(g, &caps, &lattice.gamma1, &lattice.gamma2)?;
            let mu = empirical_measure(g, &flow.cut, &field);
            let expected = Rational::new(flow.value as i128, field.denominator as i128 * (n as i128).pow(d as u32 - 1));
            if mu.total_mass() != expected {
                return Err(cutlab::Error::InvariantViolation("empirical measure mass differs from the flow".into()));
            }
            let mut row = vec![mu.total_mass_f64(), flow.cut.len() as f64 / surface];
            for i in 0..d {
                row.push(measure_pairing(&mu, |x| Some(x[i]))?);
            }
            let voxels = continuous_representation(g, &reachable_set(g, &flow.cut, &lattice.gamma1));
            if let Some(r) = &region {
                row.push(voxel_perimeter_within(&voxels, r)?);
            }
            for f in &panel {
                row.push(voxel_symdiff_to_region(&voxels, f)?);
            }
            Ok(row)
        })?;
        for (j, name) in names.iter().enumerate() {
            let column: Vec<f64> = stats.iter().map(|r| r[j]).collect();
            out.rows.push(mean_row(KIND, n, name, &column));
        }
    }
    dump_lattices(config, &spec, out)
}

fn ball_events(config: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    const KIND: &str = "ball-events";
    let spec = config.domain()?;
    let law = law_for(config, spec.dim(), out)?;
    let params = config.ball.as_ref().ok_or_else(|| CliError::Config("ball missing".into()))?.params();
    let opts = options(config);
    let seed = config.seed()?;
    for &n in &config.n_list {
        let lattice = build_lattice_with_budget(&spec, n, config.memory())?;
        let outcomes = run_indexed(&opts, config.reps, |k| {
            let field = sample_field(lattice.graph.num_edges(), &law, replicate_seed(seed, n, k));
            let gbar = detect_gbar_event(&params, &lattice, &field)?;
            let g = match detect_g_event(&params, &lattice, &field) {
                Ok(g) => Some(g.state),
                Err(cutlab::Error::InvalidGeometry(_)) => None,
                Err(e) => return Err(e),
            };
            Ok((gbar.holds, g))
        })?;
        let reps = outcomes.len();
        let freq = |k: usize| (k as f64 / reps as f64, clopper_pearson(k, reps));
        let (f, ci) = freq(outcomes.iter().filter(|o| o.0).count());
        out.rows.push(ResultRow::new(KIND, Some(n), "gbar_frequency", f, reps).with_ci(ci));
        if outcomes.iter().any(|o| o.1.is_none()) {
            out.warnings.push(format!("n = {n}: ball leaves the domain lattice, G not evaluated"));
            continue;
        }
        for state in [TriState::True, TriState::False, TriState::Unknown] {
            let (f, ci) = freq(outcomes.iter().filter(|o| o.1 == Some(state)).count());
            out.rows.push(ResultRow::new(KIND, Some(n), format!("g_{}_frequency", state.as_str()), f, reps).with_ci(ci));
        }
    }
    Ok(())
}

/// An orthonormal basis of the hyperplane normal to the unit vector `v`.
pub fn orthonormal_complement(v: &[f64]) -> Vec<Vec<f64>> {
    let d = v.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut axes: Vec<usize> = (0..d).collect();
    // Axes least aligned with `v` first, for conditioning.
    axes.sort_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()));
    for axis in axes {
        let mut u = vec![0.0; d];
        u[axis] = 1.0;
        for w in std::iter::once(v).chain(basis.iter().map(|b| b.as_slice())) {
            let c: f64 = u.iter().zip(w).map(|(a, b)| a * b).sum();
            u.iter_mut().zip(w).for_each(|(a, b)| *a -= c * b);
        }
        let len = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        if len > 1e-9 {
            basis.push(u.iter().map(|a| a / len).collect());
        }
        if basis.len() == d - 1 {
            break;
        }
    }
    basis
}

fn triangle_check(config: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    const KIND: &str = "triangle-check";
    let t = config.triangle.as_ref().ok_or_else(|| CliError::Config("triangle missing".into()))?;
    let d = t.directions[0].len();
    let law = law_for(config, d, out)?;
    let seed = config.seed()?;
    let mut curves = Vec::with_capacity(3);
    for (i, v) in t.directions.iter().enumerate() {
        let base = Hyperrectangle::new(vec![0.0; d], orthonormal_complement(v), vec![t.base_side; d - 1])?;
        let setup = CylinderSetup { base, height: t.height, direction: v.clone() };
        let curve = estimate_lower_tail_rate(
            &setup,
            &law,
            t.n,
            &config.lambda_grid,
            config.reps,
            cutlab::capacity::replicate_stream(seed, i as u64),
            &options(config),
        )?;
        rate_rows(KIND, ["a_", "b_", "c_"][i], &curve, out);
        curves.push(curve);
    }
    let dirs = [t.directions[0].as_slice(), t.directions[1].as_slice(), t.directions[2].as_slice()];
    let report = check_weak_triangle(t.sides.into(), dirs, [&curves[0], &curves[1], &curves[2]])?;
    let n = Some(t.n);
    out.rows.push(ResultRow::new(KIND, n, "pairs_checked", report.pairs_checked as f64, config.reps));
    out.rows.push(ResultRow::new(KIND, n, "pairs_skipped", report.pairs_skipped as f64, config.reps));
    out.rows.push(ResultRow::new(KIND, n, "violations", report.violations.len() as f64, config.reps));
    Ok(())
}

fn minimality_panel(config: &ExperimentConfig, out: &mut RunOutput) -> Result<(), CliError> {
    const KIND: &str = "minimality-panel";
    let spec = config.domain()?;
    let d = spec.dim();
    let m = config.minimality.as_ref().ok_or_else(|| CliError::Config("minimality missing".into()))?;
    let candidate_set = m.candidate.as_ref().map(|c| c.region(d)).transpose()?.map(|r| r.to_polytope());
    let candidate = ContinuousCutset::new(&spec, candidate_set.as_ref())?;
    let panel = config
        .panel(d)?
        .iter()
        .map(|r| ContinuousCutset::new(&spec, Some(&r.to_polytope())))
        .collect::<cutlab::Result<Vec<_>>>()?;
    let nu = |v: &[f64]| m.nu_scale * l1_norm(v);
    let density = match &m.density {
        Some(f) => f.clone(),
        None => candidate.pieces.iter().map(|p| m.density_scale * nu(&p.normal)).collect(),
    };
    let report = check_minimality_panel(&candidate, &density, &panel, nu)?;
    out.rows.push(ResultRow::new(KIND, None, "capa", report.capa, 0));
    out.rows.push(ResultRow::new(KIND, None, "l1_energy", candidate.l1_surface_energy(), 0));
    for row in &report.rows {
        out.rows.push(ResultRow::new(KIND, None, format!("bound_{}", row.index), row.bound, 0));
        out.rows.push(ResultRow::new(
            KIND,
            None,
            format!("certifies_non_minimality_{}", row.index),
            if row.certifies_non_minimality { 1.0 } else { 0.0 },
            0,
        ));
    }
    let flagged = report.rows.iter().filter(|r| r.certifies_non_minimality).count();
    out.rows.push(ResultRow::new(KIND, None, "non_minimal_count", flagged as f64, 0));
    if config.law.is_some() {
        let law = law_for(config, d, out)?;
        out.rows.push(ResultRow::new(KIND, None, "lambda_min", lambda_min(&spec, law.min_value_f64(), &panel)?, 0));
    }
    Ok(())
}

/// Dry run: checks the config and reports discretization sizes and memory
/// estimates. Problems with individual scales are reported, not raised.
pub fn verify_config(config: &ExperimentConfig) -> Result<Vec<String>, CliError> {
    config.validate()?;
    let mut lines = vec![format!("experiment: {}", config.kind()?.as_str()), format!("config hash: {}", config.hash())];
    let memory = config.memory();
    let mut d = None;
    if let Some(json) = &config.domain {
        let spec = json.build()?;
        d = Some(spec.dim());
        for &n in &config.n_list {
            match build_lattice_with_budget(&spec, n, memory) {
                Ok(l) => lines.push(format!(
                    "n = {n}: |Ω_n| = {} vertices, |Π_n| = {} edges, |Γ_n| = {}, |Γ_n¹| = {}, |Γ_n²| = {}",
                    l.graph.num_vertices(),
                    l.graph.num_edges(),
                    l.boundary.len(),
                    l.gamma1.len(),
                    l.gamma2.len()
                )),
                Err(e @ cutlab::Error::Capacity { .. }) => lines.push(format!("n = {n}: capacity warning: {e}")),
                Err(cutlab::Error::DegenerateDiscretization(m)) => lines.push(format!("n = {n}: {m}")),
                Err(e) => return Err(e.into()),
            }
        }
    }
    if config.cylinder.is_some() {
        let setup = config.cylinder()?;
        d = Some(setup.dim());
        for &n in &config.n_list {
            match setup.build(n, memory) {
                Ok(c) => lines.push(format!(
                    "n = {n}: cylinder with {} vertices, {} edges, top {}, bottom {}",
                    c.graph.num_vertices(),
                    c.graph.num_edges(),
                    c.top.len(),
                    c.bottom.len()
                )),
                Err(e @ cutlab::Error::Capacity { .. }) => lines.push(format!("n = {n}: capacity warning: {e}")),
                Err(cutlab::Error::DegenerateDiscretization(m)) => lines.push(format!("n = {n}: {m}")),
                Err(e) => return Err(e.into()),
            }
        }
    }
    if let Some(d) = d.or_else(|| config.triangle.as_ref().map(|t| t.directions[0].len())) {
        if config.law.is_some() {
            let (law, report) = config.checked_law(d)?;
            lines.push(format!("law {}: min value {}, P(t = 0) = {}", law.name(), report.min_value, report.atom_at_zero));
            lines.extend(report.warnings.iter().map(|w| format!("warning: {w}")));
        }
    }
    lines.push(format!("memory budget: {} MiB", memory.megabytes));
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_orthonormal() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for v in [vec![1.0, 0.0], vec![s, s], vec![0.0, 0.0, 1.0], vec![0.6, 0.8, 0.0]] {
            let b = orthonormal_complement(&v);
            assert_eq!(b.len(), v.len() - 1);
            for (i, u) in b.iter().enumerate() {
                let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
                assert!(dot(u, &v).abs() < 1e-12);
                assert!((dot(u, u) - 1.0).abs() < 1e-12);
                for w in &b[i + 1..] {
                    assert!(dot(u, w).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn deterministic_flow_constant_rows() {
        let config = ExperimentConfig::from_json(
            r#"{"experiment": "flow-constant", "seed": 1, "n_list": [2, 4, 8],
                "law": {"kind": "deterministic", "c": 1},
                "cylinder": {"center": [0, 0.5], "sides": [1], "height": 1, "direction": [1, 0]}}"#,
        )
        .unwrap();
        let out = run_experiment(&config).unwrap();
        let taus: Vec<(u32, f64)> =
            out.rows.iter().filter(|r| r.metric == "tau_mean").map(|r| (r.n.unwrap(), r.value)).collect();
        assert_eq!(taus, vec![(2, 3.0), (4, 5.0), (8, 9.0)]);
    }

    #[test]
    fn verify_reports_sizes_and_diagnostics() {
        let config = ExperimentConfig::from_json(
            r#"{"experiment": "domain-flow", "seed": 1, "n_list": [2],
                "domain": {"d": 2, "solid": [{"box": [[0, 1], [0, 1]]}],
                           "gamma1": [{"face": "x0-min"}], "gamma2": [{"face": "x0-max"}]}}"#,
        )
        .unwrap();
        let lines = verify_config(&config).unwrap();
        assert!(lines.iter().any(|l| l.contains("9 vertices") && l.contains("12 edges") && l.contains("|Γ_n¹| = 3")));
        let big = ExperimentConfig::from_json(
            r#"{"experiment": "domain-flow", "seed": 1, "n_list": [64],
                "domain": {"d": 3, "solid": [{"box": [[0, 1], [0, 1], [0, 1]]}],
                           "gamma1": [{"face": "x0-min"}], "gamma2": [{"face": "x0-max"}]}}"#,
        )
        .unwrap();
        assert!(verify_config(&big).unwrap().iter().any(|l| l.contains("capacity warning")));
    }
}
