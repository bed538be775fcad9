//! Discretized environments: the lattice domain `Ω_n` with its boundary
//! patches, cylinders with top/bottom boundary sets, and balls with upper and
//! lower boundary sets.

mod graph;

use std::cmp::Ordering;

use serde::Serialize;

pub use graph::{EdgeId, GraphDump, LatticeGraph, MemoryBudget, VertexId};

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Rational};

/// Tolerance for float predicates on cylinders and balls, in units of length.
pub const REGION_TOLERANCE: f64 = 1e-12;

/// `Ω_n` with `Γ_n`, `Γ_n¹`, `Γ_n²` and the edge set `Π_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeDomain {
    pub graph: LatticeGraph,
    pub boundary: Vec<VertexId>,
    pub gamma1: Vec<VertexId>,
    pub gamma2: Vec<VertexId>,
}

impl LatticeDomain {
    pub fn scale(&self) -> u32 {
        self.graph.scale()
    }

    pub fn dump(&self) -> LatticeDump {
        LatticeDump {
            graph: self.graph.dump(),
            boundary: self.boundary.clone(),
            gamma1: self.gamma1.clone(),
            gamma2: self.gamma2.clone(),
        }
    }
}

/// Diagnostic JSON form of a [`LatticeDomain`].
#[derive(Debug, Clone, Serialize)]
pub struct LatticeDump {
    #[serde(flatten)]
    pub graph: GraphDump,
    pub boundary: Vec<VertexId>,
    pub gamma1: Vec<VertexId>,
    pub gamma2: Vec<VertexId>,
}

/// Integer box `[floor(n·lo) - 1, ceil(n·hi) + 1]` covering a region.
fn scaled_bounds(lo: &[f64], hi: &[f64], n: u32) -> (Vec<i64>, Vec<i64>) {
    let n = n as f64;
    (
        lo.iter().map(|v| (v * n).floor() as i64 - 1).collect(),
        hi.iter().map(|v| (v * n).ceil() as i64 + 1).collect(),
    )
}

fn exact_position(z: &[i64], n: u32) -> Vec<Rational> {
    z.iter().map(|&c| Rational::new(c as i128, n as i128)).collect()
}

pub fn build_lattice(spec: &DomainSpec, n: u32) -> Result<LatticeDomain> {
    build_lattice_with_budget(spec, n, MemoryBudget::default())
}

pub fn build_lattice_with_budget(spec: &DomainSpec, n: u32, budget: MemoryBudget) -> Result<LatticeDomain> {
    if n == 0 {
        return Err(Error::InvalidArgument("scale n must be >= 1".into()));
    }
    let d = spec.dim();
    let (lo, hi) = spec.bounding_box();
    let (lo, hi) = scaled_bounds(&lo, &hi, n);
    let step = Rational::new(1, n as i128);
    let graph = LatticeGraph::from_predicate(d, n, lo, hi, budget, |z| {
        let x = exact_position(z, n);
        Ok(spec.linf_to_solid(&x)?.cmp_threshold(step) == Ordering::Less)
    })?;
    let boundary: Vec<VertexId> = graph.vertex_ids().filter(|&v| graph.has_outside_neighbor(v)).collect();
    let mut gamma1 = Vec::new();
    let mut gamma2 = Vec::new();
    for &v in &boundary {
        let x = graph.position_exact(v);
        let near1 = spec.linf_to_gamma(1, &x)?.cmp_threshold(step) == Ordering::Less;
        let near2 = spec.linf_to_gamma(2, &x)?.cmp_threshold(step) == Ordering::Less;
        if near1 && !near2 {
            gamma1.push(v);
        } else if near2 && !near1 {
            gamma2.push(v);
        }
    }
    if gamma1.is_empty() {
        return Err(Error::DegenerateDiscretization(format!("empty Γ_n¹ at n = {n}")));
    }
    if gamma2.is_empty() {
        return Err(Error::DegenerateDiscretization(format!("empty Γ_n² at n = {n}")));
    }
    Ok(LatticeDomain { graph, boundary, gamma1, gamma2 })
}

/// `𝔡(R(Ω_n), Ω)`: Lebesgue measure of the symmetric difference between the
/// union of voxels centred on `Ω_n` and `Ω`. Exact for a single box; other
/// solids use midpoint quadrature on voxels that straddle the boundary.
pub fn voxelization_error(spec: &DomainSpec, lattice: &LatticeDomain) -> Result<f64> {
    let g = &lattice.graph;
    let n = g.scale();
    let d = g.dim();
    let half = Rational::new(1, 2 * n as i128);
    let cell = 1.0 / (n as f64).powi(d as i32);
    let mut outside = 0.0;
    let mut inside = 0.0;
    if let Some(bx) = spec.as_single_box() {
        let mut inside_exact = Rational::from_integer(0);
        for v in g.vertex_ids() {
            let x = g.position_exact(v);
            let mut vol = Rational::from_integer(1);
            for ((&xi, &lo), &hi) in x.iter().zip(&bx.lo).zip(&bx.hi) {
                let a = (xi - half).max(lo);
                let b = (xi + half).min(hi);
                vol *= (b - a).max(Rational::from_integer(0));
            }
            inside_exact += vol;
        }
        let total = Rational::new(g.num_vertices() as i128, (n as i128).pow(d as u32));
        let sym = (total - inside_exact) + (bx.volume() - inside_exact);
        return Ok(crate::geometry::rational::to_f64(&sym));
    }
    const SUB: usize = 8;
    let h = 1.0 / n as f64;
    for v in g.vertex_ids() {
        let c = g.position(v);
        let corners_inside = spec.solid.iter().any(|s| {
            (0..1u32 << d).all(|mask| {
                let p: Vec<f64> = (0..d)
                    .map(|i| c[i] + if mask >> i & 1 == 1 { 0.5 * h } else { -0.5 * h })
                    .collect();
                s.contains_f64(&p)
            })
        });
        let frac = if corners_inside {
            1.0
        } else {
            let total = SUB.pow(d as u32);
            let mut hits = 0usize;
            let mut p = vec![0.0; d];
            for k in 0..total {
                let mut rest = k;
                for i in 0..d {
                    let j = rest % SUB;
                    rest /= SUB;
                    p[i] = c[i] - 0.5 * h + (j as f64 + 0.5) * h / SUB as f64;
                }
                if spec.contains_f64(&p) {
                    hits += 1;
                }
            }
            hits as f64 / total as f64
        };
        inside += frac * cell;
        outside += (1.0 - frac) * cell;
    }
    Ok(outside + (spec.volume()? - inside).max(0.0))
}

/// A `(d-1)`-dimensional rectangle `{c + Σ t_j u_j : |t_j| ≤ s_j / 2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperrectangle {
    pub center: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
    pub sides: Vec<f64>,
}

impl Hyperrectangle {
    pub fn new(center: Vec<f64>, frame: Vec<Vec<f64>>, sides: Vec<f64>) -> Result<Self> {
        let d = center.len();
        if frame.len() + 1 != d || sides.len() + 1 != d {
            return Err(Error::InvalidGeometry("hyperrectangle needs d-1 frame vectors and sides".into()));
        }
        if sides.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidGeometry("hyperrectangle sides must be positive".into()));
        }
        for (i, u) in frame.iter().enumerate() {
            if u.len() != d {
                return Err(Error::InvalidGeometry("frame vector of the wrong dimension".into()));
            }
            for (j, w) in frame.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot(u, w) - target).abs() > 1e-9 {
                    return Err(Error::InvalidGeometry("frame is not orthonormal".into()));
                }
            }
        }
        Ok(Self { center, frame, sides })
    }

    /// The axis-aligned rectangle normal to `e_axis`.
    pub fn axis_aligned(center: Vec<f64>, normal_axis: usize, sides: Vec<f64>) -> Result<Self> {
        let d = center.len();
        let frame = (0..d)
            .filter(|&i| i != normal_axis)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(center, frame, sides)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `H^{d-1}(A)`.
    pub fn area(&self) -> f64 {
        self.sides.iter().product()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `ℤ_n^d ∩ cyl(A, h)` with the boundary sets `T′` and `B′`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderLattice {
    pub base: Hyperrectangle,
    pub height: f64,
    pub direction: Vec<f64>,
    pub graph: LatticeGraph,
    /// Boundary vertices with `(z - x)·v > 0`.
    pub top: Vec<VertexId>,
    /// Boundary vertices with `(z - x)·v < 0`.
    pub bottom: Vec<VertexId>,
}

impl CylinderLattice {
    pub fn area(&self) -> f64 {
        self.base.area()
    }
}

fn cylinder_contains(base: &Hyperrectangle, h: f64, v: &[f64], x: &[f64]) -> bool {
    let rel: Vec<f64> = x.iter().zip(&base.center).map(|(a, c)| a - c).collect();
    if dot(&rel, v).abs() > h + REGION_TOLERANCE {
        return false;
    }
    base.frame
        .iter()
        .zip(&base.sides)
        .all(|(u, s)| dot(&rel, u).abs() <= 0.5 * s + REGION_TOLERANCE)
}

pub fn build_cylinder(base: &Hyperrectangle, height: f64, direction: &[f64], n: u32) -> Result<CylinderLattice> {
    build_cylinder_with_budget(base, height, direction, n, MemoryBudget::default())
}

pub fn build_cylinder_with_budget(
    base: &Hyperrectangle,
    height: f64,
    direction: &[f64],
    n: u32,
    budget: MemoryBudget,
) -> Result<CylinderLattice> {
    let d = base.dim();
    if direction.len() != d {
        return Err(Error::InvalidGeometry("direction of the wrong dimension".into()));
    }
    if (dot(direction, direction).sqrt() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidGeometry("direction must be a unit vector".into()));
    }
    if base.frame.iter().any(|u| dot(u, direction).abs() > 1e-9) {
        return Err(Error::InvalidGeometry("direction is not normal to the base".into()));
    }
    if !(height > 0.0) {
        return Err(Error::InvalidGeometry(format!("cylinder height {height} must be positive")));
    }
    let reach: Vec<f64> = (0..d)
        .map(|i| {
            height * direction[i].abs()
                + base.frame.iter().zip(&base.sides).map(|(u, s)| 0.5 * s * u[i].abs()).sum::<f64>()
        })
        .collect();
    let lo: Vec<f64> = base.center.iter().zip(&reach).map(|(c, r)| c - r).collect();
    let hi: Vec<f64> = base.center.iter().zip(&reach).map(|(c, r)| c + r).collect();
    let (zlo, zhi) = scaled_bounds(&lo, &hi, n);
    let nf = n as f64;
    let graph = LatticeGraph::from_predicate(d, n, zlo, zhi, budget, |z| {
        let x: Vec<f64> = z.iter().map(|&c| c as f64 / nf).collect();
        Ok(cylinder_contains(base, height, direction, &x))
    })?;
    let mut top = Vec::new();
    let mut bottom = Vec::new();
    for v in graph.vertex_ids() {
        if !graph.has_outside_neighbor(v) {
            continue;
        }
        let x = graph.position(v);
        let rel: Vec<f64> = base.center.iter().zip(&x).map(|(c, a)| c - a).collect();
        let side = dot(&rel, direction);
        if side > REGION_TOLERANCE {
            top.push(v);
        } else if side < -REGION_TOLERANCE {
            bottom.push(v);
        }
    }
    Ok(CylinderLattice { base: base.clone(), height, direction: direction.to_vec(), graph, top, bottom })
}

/// `B(x, r) ∩ ℤ_n^d` with the upper and lower boundary sets.
#[derive(Debug, Clone, PartialEq)]
pub struct BallRegion {
    pub center: Vec<f64>,
    pub radius: f64,
    pub direction: Vec<f64>,
    pub slab_halfheight: Option<f64>,
    pub graph: LatticeGraph,
    pub upper: Vec<VertexId>,
    pub lower: Vec<VertexId>,
    pub warnings: Vec<String>,
}

impl BallRegion {
    /// `|(y - x)·v| ≤ halfheight`.
    pub fn in_slab(&self, y: &[f64], halfheight: f64) -> bool {
        let rel: Vec<f64> = y.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        dot(&rel, &self.direction).abs() <= halfheight + REGION_TOLERANCE
    }

    /// Signed height `(y - x)·v`.
    pub fn height(&self, y: &[f64]) -> f64 {
        let rel: Vec<f64> = y.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        dot(&rel, &self.direction)
    }
}

fn in_ball(center: &[f64], r: f64, y: &[f64]) -> bool {
    crate::geometry::ball::dist2(center, y) <= r + REGION_TOLERANCE
}

pub fn build_ball(center: &[f64], radius: f64, direction: &[f64], n: u32, slab_halfheight: Option<f64>) -> Result<BallRegion> {
    build_ball_within(center, radius, direction, n, slab_halfheight, None)
}

/// Like [`build_ball`], keeping only vertices that are also vertices of
/// `host` (same scale).
pub fn build_ball_within(
    center: &[f64],
    radius: f64,
    direction: &[f64],
    n: u32,
    slab_halfheight: Option<f64>,
    host: Option<&LatticeGraph>,
) -> Result<BallRegion> {
    let d = center.len();
    if !(radius > 0.0) {
        return Err(Error::InvalidGeometry(format!("ball radius {radius} must be positive")));
    }
    if direction.len() != d || (dot(direction, direction).sqrt() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidGeometry("direction must be a unit vector".into()));
    }
    if let Some(h) = host {
        if h.scale() != n {
            return Err(Error::ScaleMismatch(h.scale(), n));
        }
    }
    let lo: Vec<f64> = center.iter().map(|c| c - radius).collect();
    let hi: Vec<f64> = center.iter().map(|c| c + radius).collect();
    let (zlo, zhi) = scaled_bounds(&lo, &hi, n);
    let nf = n as f64;
    let to_real = |z: &[i64]| -> Vec<f64> { z.iter().map(|&c| c as f64 / nf).collect() };
    let height = |y: &[f64]| -> f64 {
        let rel: Vec<f64> = y.iter().zip(center).map(|(a, c)| a - c).collect();
        dot(&rel, direction)
    };
    let graph = LatticeGraph::from_predicate(d, n, zlo, zhi, MemoryBudget::unlimited(), |z| {
        let y = to_real(z);
        if !in_ball(center, radius, &y) {
            return Ok(false);
        }
        if let Some(h) = slab_halfheight {
            if height(&y).abs() > h + REGION_TOLERANCE {
                return Ok(false);
            }
        }
        Ok(host.is_none_or(|g| g.vertex_at(z).is_some()))
    })?;
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for v in graph.vertex_ids() {
        let mut up = false;
        let mut down = false;
        for z in graph.lattice_neighbors(v) {
            let w = to_real(&z);
            if in_ball(center, radius, &w) {
                continue;
            }
            if height(&w) >= -REGION_TOLERANCE {
                up = true;
            } else {
                down = true;
            }
        }
        if up {
            upper.push(v);
        }
        if down {
            lower.push(v);
        }
    }
    let mut warnings = Vec::new();
    if graph.num_vertices() == 0 {
        warnings.push(format!("ball of radius {radius} contains no lattice point at n = {n}"));
    }
    Ok(BallRegion {
        center: center.to_vec(),
        radius,
        direction: direction.to_vec(),
        slab_halfheight,
        graph,
        upper,
        lower,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpecJson;

    fn unit_square() -> DomainSpec {
        DomainSpecJson::unit_box(2).build().unwrap()
    }

    fn coords(g: &LatticeGraph, vs: &[VertexId]) -> Vec<Vec<i64>> {
        vs.iter().map(|&v| g.coord(v).to_vec()).collect()
    }

    #[test]
    fn unit_square_at_scale_two() {
        let lat = build_lattice(&unit_square(), 2).unwrap();
        assert_eq!(lat.graph.num_vertices(), 9);
        assert_eq!(lat.graph.num_edges(), 12);
        assert_eq!(coords(&lat.graph, &lat.gamma1), vec![vec![0, 0], vec![0, 1], vec![0, 2]]);
        assert_eq!(coords(&lat.graph, &lat.gamma2), vec![vec![2, 0], vec![2, 1], vec![2, 2]]);
        assert_eq!(lat.boundary.len(), 8);
        assert!(!lat.boundary.contains(&lat.graph.vertex_at(&[1, 1]).unwrap()));
    }

    #[test]
    fn box_closed_forms() {
        for d in 2..=3usize {
            let spec = DomainSpecJson::unit_box(d).build().unwrap();
            for n in [1u32, 3, 4] {
                let lat = build_lattice(&spec, n).unwrap();
                let n1 = (n + 1) as usize;
                assert_eq!(lat.graph.num_vertices(), n1.pow(d as u32));
                assert_eq!(lat.graph.num_edges(), d * n as usize * n1.pow(d as u32 - 1));
            }
        }
    }

    #[test]
    fn rebuild_is_identical() {
        let a = build_lattice(&unit_square(), 5).unwrap();
        let b = build_lattice(&unit_square(), 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_exceeded() {
        let spec = DomainSpecJson::unit_box(3).build().unwrap();
        let err = build_lattice_with_budget(&spec, 64, MemoryBudget { megabytes: 8 });
        assert!(matches!(err, Err(Error::Capacity { .. })));
    }

    #[test]
    fn box_voxelization_error_is_exact() {
        // voxels overhang the unit square by half a cell on each side
        let lat = build_lattice(&unit_square(), 4).unwrap();
        let err = voxelization_error(&unit_square(), &lat).unwrap();
        let expected = (5.0f64 / 4.0).powi(2) - 1.0;
        assert!((err - expected).abs() < 1e-12);
    }

    #[test]
    fn cylinder_example() {
        let base = Hyperrectangle::axis_aligned(vec![0.5, 0.0], 1, vec![1.0]).unwrap();
        let cyl = build_cylinder(&base, 1.0, &[0.0, 1.0], 2).unwrap();
        assert_eq!(cyl.graph.num_vertices(), 15);
        // centre minus point has positive e2 component below the base
        let top = coords(&cyl.graph, &cyl.top);
        assert!(top.contains(&vec![1, -2]));
        assert!(top.iter().all(|z| z[1] < 0));
        let bottom = coords(&cyl.graph, &cyl.bottom);
        assert!(bottom.contains(&vec![1, 2]));
        assert!(bottom.iter().all(|z| z[1] > 0));
        assert!(cyl.top.iter().all(|v| !cyl.bottom.contains(v)));
    }

    #[test]
    fn cylinder_rejects_bad_input() {
        let base = Hyperrectangle::axis_aligned(vec![0.5, 0.0], 1, vec![1.0]).unwrap();
        assert!(build_cylinder(&base, 0.0, &[0.0, 1.0], 2).is_err());
        let tilted = [0.6, 0.8];
        assert!(build_cylinder(&base, 1.0, &tilted, 2).is_err());
    }

    #[test]
    fn unit_cylinder_at_scale_one() {
        let base = Hyperrectangle::axis_aligned(vec![0.0, 0.0], 0, vec![2.0]).unwrap();
        let cyl = build_cylinder(&base, 1.0, &[1.0, 0.0], 1).unwrap();
        let top = coords(&cyl.graph, &cyl.top);
        let bottom = coords(&cyl.graph, &cyl.bottom);
        assert_eq!(top, vec![vec![-1, -1], vec![-1, 0], vec![-1, 1]]);
        assert_eq!(bottom, vec![vec![1, -1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn ball_boundary_sets() {
        let ball = build_ball(&[0.0, 0.0], 1.0, &[1.0, 0.0], 2, None).unwrap();
        // 13 lattice points of step 1/2 in the closed unit disc
        assert_eq!(ball.graph.num_vertices(), 13);
        let upper = coords(&ball.graph, &ball.upper);
        assert!(upper.contains(&vec![2, 0]));
        assert!(upper.contains(&vec![0, 2]));
        assert!(!upper.contains(&vec![-2, 0]));
        let lower = coords(&ball.graph, &ball.lower);
        assert!(lower.contains(&vec![-2, 0]));
        let any_outside: Vec<VertexId> =
            ball.graph.vertex_ids().filter(|&v| ball.graph.has_outside_neighbor(v)).collect();
        for v in any_outside {
            assert!(ball.upper.contains(&v) || ball.lower.contains(&v));
        }
    }

    #[test]
    fn tiny_ball_warns() {
        let ball = build_ball(&[0.3, 0.3], 0.1, &[1.0, 0.0], 2, None).unwrap();
        assert_eq!(ball.graph.num_vertices(), 0);
        assert_eq!(ball.warnings.len(), 1);
    }

    #[test]
    fn slab_restricts_vertices() {
        let ball = build_ball(&[0.0, 0.0], 1.0, &[1.0, 0.0], 2, Some(0.0)).unwrap();
        assert!(ball.graph.vertex_ids().all(|v| ball.graph.coord(v)[0] == 0));
        assert_eq!(ball.graph.num_vertices(), 5);
    }
}
