//! Geometric objects built from a cutset: the reachable set and its voxel
//! union, the empirical surface measure, and continuous capacities of
//! polyhedral competitors.

use std::collections::VecDeque;

use num_traits::Zero;

use crate::capacity::CapacityField;
use crate::error::{Error, Result};
use crate::geometry::polyhedral::l1_norm;
use crate::geometry::polytope::{measure_in_plane, ConvexPolytope, HalfSpace};
use crate::geometry::rational::to_f64;
use crate::geometry::{AxisBox, ConvexRegion, DomainSpec, Patch, Rational, VoxelSet};
use crate::lattice::{EdgeId, LatticeGraph, VertexId};

/// Vertices joined to `sources` by a path avoiding `cut`, sorted.
pub fn reachable_set(graph: &LatticeGraph, cut: &[EdgeId], sources: &[VertexId]) -> Vec<VertexId> {
    let mut removed = vec![false; graph.num_edges()];
    for &e in cut {
        removed[e as usize] = true;
    }
    let mut seen = vec![false; graph.num_vertices()];
    let mut queue: VecDeque<VertexId> = VecDeque::new();
    for &s in sources {
        if !seen[s as usize] {
            seen[s as usize] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &(w, e) in graph.neighbors(u) {
            if !removed[e as usize] && !seen[w as usize] {
                seen[w as usize] = true;
                queue.push_back(w);
            }
        }
    }
    graph.vertex_ids().filter(|&v| seen[v as usize]).collect()
}

/// Union of the voxels centred on `vertices`.
pub fn continuous_representation(graph: &LatticeGraph, vertices: &[VertexId]) -> VoxelSet {
    VoxelSet::from_points(graph.dim(), graph.scale(), vertices.iter().map(|&v| graph.coord(v).to_vec()))
        .expect("lattice coordinates have the lattice dimension")
}

/// One Dirac mass at an edge midpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    /// Midpoint in doubled integer coordinates, `2n · c(e)`.
    pub center_doubled: Vec<i64>,
    /// Capacity numerator; the weight is `numerator / (D n^{d-1})`.
    pub numerator: i64,
}

/// `(1/n^{d-1}) Σ_{e ∈ cut} t(e) δ_{c(e)}`, kept exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalMeasure {
    pub dim: usize,
    pub scale: u32,
    pub denominator: i64,
    pub atoms: Vec<Atom>,
}

impl EmpiricalMeasure {
    fn normaliser(&self) -> i128 {
        self.denominator as i128 * (self.scale as i128).pow(self.dim as u32 - 1)
    }

    pub fn total_mass(&self) -> Rational {
        let total: i128 = self.atoms.iter().map(|a| a.numerator as i128).sum();
        Rational::new(total, self.normaliser())
    }

    pub fn total_mass_f64(&self) -> f64 {
        to_f64(&self.total_mass())
    }

    pub fn weight(&self, atom: &Atom) -> f64 {
        atom.numerator as f64 / self.normaliser() as f64
    }

    pub fn center(&self, atom: &Atom) -> Vec<f64> {
        let two_n = 2.0 * self.scale as f64;
        atom.center_doubled.iter().map(|&c| c as f64 / two_n).collect()
    }
}

pub fn empirical_measure(graph: &LatticeGraph, cut: &[EdgeId], field: &CapacityField) -> EmpiricalMeasure {
    let atoms = cut
        .iter()
        .map(|&e| Atom { center_doubled: graph.edge_midpoint_doubled(e), numerator: field.numerators[e as usize] })
        .collect();
    EmpiricalMeasure { dim: graph.dim(), scale: graph.scale(), denominator: field.denominator, atoms }
}

/// `Σ w · g(c(e))`. `g` returns `None` where it is undefined.
pub fn measure_pairing(mu: &EmpiricalMeasure, g: impl Fn(&[f64]) -> Option<f64>) -> Result<f64> {
    let mut total = 0.0;
    for atom in &mu.atoms {
        let x = mu.center(atom);
        let value = g(&x).ok_or_else(|| Error::UndefinedTestFunction(x.clone()))?;
        total += mu.weight(atom) * value;
    }
    Ok(total)
}

/// `card(cut) / n^{d-1}`, an upper bound for the perimeter of the voxel
/// union of the reachable set inside the domain.
pub fn discrete_perimeter_bound(cut_len: usize, n: u32, d: usize) -> f64 {
    cut_len as f64 / (n as f64).powi(d as i32 - 1)
}

/// Perimeter of a voxel union inside the open convex region `omega`: the
/// total `(d-1)`-measure of voxel faces between a member and a non-member,
/// intersected with `omega`.
pub fn voxel_perimeter_within(voxels: &VoxelSet, omega: &ConvexRegion) -> Result<f64> {
    let d = voxels.dim();
    let two_n = 2 * voxels.scale() as i128;
    let omega_poly = omega.to_polytope();
    let omega_planes = omega_poly.facets()?;
    let mut total = Rational::from_integer(0);
    let mut total_f64 = 0.0;
    for z in voxels.points() {
        for axis in 0..d {
            for step in [-1i64, 1] {
                let mut w = z.clone();
                w[axis] += step;
                if voxels.contains_index(&w) {
                    continue;
                }
                let lo: Vec<Rational> = (0..d)
                    .map(|j| {
                        let off = if j == axis { step as i128 } else { -1 };
                        Rational::new(2 * z[j] as i128 + off, two_n)
                    })
                    .collect();
                let hi: Vec<Rational> = (0..d)
                    .map(|j| {
                        let off = if j == axis { step as i128 } else { 1 };
                        Rational::new(2 * z[j] as i128 + off, two_n)
                    })
                    .collect();
                match omega {
                    ConvexRegion::Box(b) => {
                        let c = lo[axis];
                        if c <= b.lo[axis] || c >= b.hi[axis] {
                            continue;
                        }
                        let mut area = Rational::from_integer(1);
                        for j in (0..d).filter(|&j| j != axis) {
                            let len = hi[j].min(b.hi[j]) - lo[j].max(b.lo[j]);
                            area *= len.max(Rational::from_integer(0));
                        }
                        total += area;
                    }
                    ConvexRegion::Polytope(p) => {
                        let face = AxisBox { lo, hi };
                        let mut normal = vec![Rational::from_integer(0); d];
                        normal[axis] = Rational::from_integer(step as i128);
                        let plane = HalfSpace::new(normal, face.lo[axis] * Rational::from_integer(step as i128))?;
                        if omega_planes.iter().any(|f| f.plane.same_plane(&plane)) {
                            continue;
                        }
                        let region = face.to_polytope().intersect(p);
                        total_f64 += region_measure(&region, &plane.unit_normal())?;
                    }
                }
            }
        }
    }
    Ok(to_f64(&total) + total_f64)
}

fn region_measure(region: &ConvexPolytope, normal: &[f64]) -> Result<f64> {
    let pts: Vec<Vec<f64>> = region.vertices().iter().map(|v| v.iter().map(to_f64).collect()).collect();
    if pts.len() < region.dim() {
        return Ok(0.0);
    }
    measure_in_plane(&pts, normal)
}

/// Sub-cells per axis when integrating a voxel cut by a polytope face.
const QUADRATURE_SUBDIVISIONS: i128 = 8;

/// `L^d(R Δ F)` between a voxel union and a convex region. Exact for boxes;
/// for polytopes, voxels cut by a face are integrated with a midpoint rule
/// on `8^d` sub-cells.
pub fn voxel_symdiff_to_region(voxels: &VoxelSet, region: &ConvexRegion) -> Result<f64> {
    let d = voxels.dim();
    if region.dim() != d {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let two_n = 2 * voxels.scale() as i128;
    let cube = |z: &[i64]| -> (Vec<Rational>, Vec<Rational>) {
        (
            z.iter().map(|&c| Rational::new(2 * c as i128 - 1, two_n)).collect(),
            z.iter().map(|&c| Rational::new(2 * c as i128 + 1, two_n)).collect(),
        )
    };
    let cell = Rational::new(1, (voxels.scale() as i128).pow(d as u32));
    let (region_volume, shared) = match region {
        ConvexRegion::Box(b) => {
            let mut shared = Rational::zero();
            for z in voxels.points() {
                let (lo, hi) = cube(z);
                shared += b.intersection_volume(&AxisBox::new(lo, hi)?);
            }
            (to_f64(&b.volume()), to_f64(&shared))
        }
        ConvexRegion::Polytope(p) => {
            let sub = QUADRATURE_SUBDIVISIONS;
            let mut shared = 0.0;
            for z in voxels.points() {
                let (lo, hi) = cube(z);
                let corners: Vec<Vec<Rational>> = (0..1usize << d)
                    .map(|mask| (0..d).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect())
                    .collect();
                if corners.iter().all(|c| p.contains(c)) {
                    shared += to_f64(&cell);
                    continue;
                }
                let separated = p
                    .halfspaces()
                    .iter()
                    .any(|h| corners.iter().all(|c| h.slack(c) >= Rational::zero()));
                if separated {
                    continue;
                }
                let mut inside = 0u64;
                let mut idx = vec![0i128; d];
                loop {
                    let x: Vec<Rational> = (0..d)
                        .map(|i| Rational::new(2 * z[i] as i128 * sub - sub + 2 * idx[i] + 1, two_n * sub))
                        .collect();
                    if p.contains(&x) {
                        inside += 1;
                    }
                    let mut k = 0;
                    while k < d {
                        idx[k] += 1;
                        if idx[k] < sub {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                    if k == d {
                        break;
                    }
                }
                shared += to_f64(&cell) * inside as f64 / (sub as f64).powi(d as i32);
            }
            (p.volume()?, shared)
        }
    };
    let own = to_f64(&voxels.lebesgue_measure());
    Ok((own + region_volume - 2.0 * shared).max(0.0))
}

/// Which part of the surface a piece comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceKind {
    /// Boundary of the competitor inside the domain.
    Interior,
    /// Boundary of the competitor lying on the sink patches.
    SinkContact,
    /// Source patches not covered by the competitor's boundary.
    UncoveredSource,
}

/// A flat convex region minus interior-disjoint convex holes, all in one
/// hyperplane.
#[derive(Debug, Clone)]
pub struct SurfacePiece {
    pub kind: PieceKind,
    pub plane: HalfSpace,
    pub normal: Vec<f64>,
    pub region: ConvexPolytope,
    pub holes: Vec<ConvexPolytope>,
    pub area: f64,
}

impl SurfacePiece {
    fn new(kind: PieceKind, plane: HalfSpace, region: ConvexPolytope, holes: Vec<ConvexPolytope>) -> Result<Self> {
        let normal = plane.unit_normal();
        let mut area = region_measure(&region, &normal)?;
        for h in &holes {
            area -= region_measure(&region.intersect(h), &normal)?;
        }
        Ok(Self { kind, plane, normal, region, holes, area: area.max(0.0) })
    }

    /// `(d-1)`-measure of the intersection with `other`; zero unless both
    /// lie in the same hyperplane.
    pub fn overlap(&self, other: &SurfacePiece) -> Result<f64> {
        if !self.plane.same_plane(&other.plane) {
            return Ok(0.0);
        }
        let base = self.region.intersect(&other.region);
        let m = |p: &ConvexPolytope| region_measure(p, &self.normal);
        let mut total = m(&base)?;
        for h in &self.holes {
            total -= m(&base.intersect(h))?;
        }
        for g in &other.holes {
            total -= m(&base.intersect(g))?;
        }
        for h in &self.holes {
            for g in &other.holes {
                total += m(&base.intersect(h).intersect(g))?;
            }
        }
        Ok(total.max(0.0))
    }
}

/// A polyhedral competitor `E ⊂ Ω` with its surface: the boundary of `E`
/// inside `Ω`, the part of `∂E` on the sink patches, and the source patches
/// not covered by `∂E`.
#[derive(Debug, Clone)]
pub struct ContinuousCutset {
    pub dim: usize,
    pub competitor: Option<ConvexPolytope>,
    pub pieces: Vec<SurfacePiece>,
}

fn flat_patches(patches: &[Patch]) -> Result<Vec<(HalfSpace, ConvexPolytope)>> {
    patches
        .iter()
        .map(|p| match p {
            Patch::Flat { region, plane } => Ok((plane.clone(), region.to_polytope())),
            Patch::Cap(_) => Err(Error::InvalidGeometry("continuous capacities need flat patches".into())),
        })
        .collect()
}

impl ContinuousCutset {
    /// `competitor` is intersected with `Ω`; `None` or a set without
    /// interior is the empty competitor.
    pub fn new(spec: &DomainSpec, competitor: Option<&ConvexPolytope>) -> Result<Self> {
        let omega = spec.as_single_polytope().ok_or_else(|| {
            Error::InvalidGeometry("continuous capacities need a single convex polytope domain".into())
        })?;
        let sources = flat_patches(&spec.gamma1)?;
        let sinks = flat_patches(&spec.gamma2)?;
        let omega_facets = omega.facets()?;
        let set = match competitor {
            Some(c) => {
                let e = c.intersect(&omega);
                if e.is_empty() || e.volume()? <= 1e-15 {
                    None
                } else {
                    Some(e)
                }
            }
            None => None,
        };
        let mut pieces = Vec::new();
        let e_facets = match &set {
            Some(e) => e.facets()?,
            None => Vec::new(),
        };
        for f in &e_facets {
            let on_boundary = omega_facets.iter().any(|g| g.plane.same_oriented_plane(&f.plane));
            if !on_boundary {
                pieces.push(SurfacePiece::new(PieceKind::Interior, f.plane.clone(), f.region.clone(), vec![])?);
                continue;
            }
            for (plane, region) in &sinks {
                if plane.same_oriented_plane(&f.plane) {
                    let piece = SurfacePiece::new(
                        PieceKind::SinkContact,
                        f.plane.clone(),
                        f.region.intersect(region),
                        vec![],
                    )?;
                    if piece.area > 0.0 {
                        pieces.push(piece);
                    }
                }
            }
        }
        for (plane, region) in &sources {
            let holes: Vec<ConvexPolytope> = e_facets
                .iter()
                .filter(|f| f.plane.same_oriented_plane(plane))
                .map(|f| f.region.clone())
                .collect();
            let piece = SurfacePiece::new(PieceKind::UncoveredSource, plane.clone(), region.clone(), holes)?;
            if piece.area > 0.0 {
                pieces.push(piece);
            }
        }
        Ok(Self { dim: spec.dim(), competitor: set, pieces })
    }

    /// `Σ area · nu(normal)`.
    pub fn continuous_capacity(&self, nu: impl Fn(&[f64]) -> f64) -> f64 {
        self.pieces.iter().map(|p| p.area * nu(&p.normal)).sum()
    }

    /// The surface energy with the `ℓ¹` norm of the normal as weight.
    pub fn l1_surface_energy(&self) -> f64 {
        self.continuous_capacity(l1_norm)
    }

    /// `Σ area · f` for a per-piece density `f ≥ 0`.
    pub fn capa(&self, density: &[f64]) -> Result<f64> {
        if density.len() != self.pieces.len() {
            return Err(Error::InvalidArgument(format!(
                "{} densities for {} surface pieces",
                density.len(),
                self.pieces.len()
            )));
        }
        if let Some(f) = density.iter().find(|f| !(**f >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative density {f}")));
        }
        Ok(self.pieces.iter().zip(density).map(|(p, f)| p.area * f).sum())
    }

    /// Competitor-side bound for the minimality inequality: each surface
    /// piece of `other` pays the density of `self` where the two surfaces
    /// overlap and `nu(normal)` elsewhere.
    pub fn competitor_bound(&self, density: &[f64], other: &ContinuousCutset, nu: impl Fn(&[f64]) -> f64) -> Result<f64> {
        let mut total = 0.0;
        for q in &other.pieces {
            let mut shared = 0.0;
            for (p, f) in self.pieces.iter().zip(density) {
                let o = p.overlap(q)?;
                shared += o;
                total += f * o;
            }
            total += nu(&q.normal) * (q.area - shared).max(0.0);
        }
        Ok(total)
    }

    /// Membership in the admissible class: `f ≤ nu(normal) + tol` on every
    /// piece and `capa ≤ 10 d² M H^{d-1}(Γ¹)`.
    pub fn is_admissible(&self, density: &[f64], nu: impl Fn(&[f64]) -> f64, bound: f64, source_area: f64, tol: f64) -> Result<bool> {
        let capa = self.capa(density)?;
        let d = self.dim as f64;
        let dominated = self.pieces.iter().zip(density).all(|(p, f)| *f <= nu(&p.normal) + tol);
        Ok(dominated && capa <= 10.0 * d * d * bound * source_area + tol)
    }
}

/// `H^{d-1}(Γ¹)` for flat source patches.
pub fn source_area(spec: &DomainSpec) -> Result<f64> {
    flat_patches(&spec.gamma1)?
        .iter()
        .map(|(plane, region)| region_measure(region, &plane.unit_normal()))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::max_flow;
    use crate::geometry::{DomainSpecJson, PolyhedralSet};
    use crate::lattice::build_lattice;

    fn r(v: i128) -> Rational {
        Rational::from_integer(v)
    }

    fn half(normal: Vec<i128>, offset: Rational) -> HalfSpace {
        HalfSpace::new(normal.into_iter().map(r).collect(), offset).unwrap()
    }

    fn unit_square() -> DomainSpec {
        DomainSpecJson::unit_box(2).build().unwrap()
    }

    #[test]
    fn reachable_set_extremes() {
        let lat = build_lattice(&unit_square(), 2).unwrap();
        let g = &lat.graph;
        assert_eq!(reachable_set(g, &[], &lat.gamma1).len(), 9);
        let all: Vec<EdgeId> = (0..g.num_edges() as u32).collect();
        assert_eq!(reachable_set(g, &all, &lat.gamma1), lat.gamma1);
    }

    #[test]
    fn canonical_cut_on_small_box() {
        let lat = build_lattice(&unit_square(), 2).unwrap();
        let g = &lat.graph;
        let field = CapacityField::constant(g.num_edges(), 1, 1);
        let flow = max_flow(g, &field.numerators, &lat.gamma1, &lat.gamma2).unwrap();
        let reach = reachable_set(g, &flow.cut, &lat.gamma1);
        assert_eq!(reach, lat.gamma1);
        let voxels = continuous_representation(g, &reach);
        assert_eq!(voxels.lebesgue_measure(), Rational::new(3, 4));
        let mu = empirical_measure(g, &flow.cut, &field);
        assert_eq!(mu.atoms.len(), 3);
        assert_eq!(mu.total_mass(), Rational::new(3, 2));
        assert!(mu.atoms.iter().all(|a| mu.weight(a) == 0.5));
        assert_eq!(measure_pairing(&mu, |_| Some(1.0)).unwrap(), 1.5);
        assert_eq!(measure_pairing(&mu, |_| Some(0.0)).unwrap(), 0.0);
        assert_eq!(discrete_perimeter_bound(flow.cut.len(), 2, 2), 1.5);
        let square = unit_square().solid[0].clone();
        let crate::geometry::Solid::Convex(region) = square else { unreachable!() };
        let perimeter = voxel_perimeter_within(&voxels, &region).unwrap();
        assert!((perimeter - 1.0).abs() < 1e-12);
        let poly = ConvexRegion::Polytope(region.to_polytope());
        assert!((voxel_perimeter_within(&voxels, &poly).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pairing_requires_a_defined_function() {
        let lat = build_lattice(&unit_square(), 2).unwrap();
        let field = CapacityField::constant(lat.graph.num_edges(), 1, 1);
        let mu = empirical_measure(&lat.graph, &[0], &field);
        assert!(matches!(measure_pairing(&mu, |_| None), Err(Error::UndefinedTestFunction(_))));
    }

    #[test]
    fn empty_competitor_is_the_source_face() {
        let spec = unit_square();
        let e = ContinuousCutset::new(&spec, None).unwrap();
        assert_eq!(e.pieces.len(), 1);
        assert!((e.l1_surface_energy() - 1.0).abs() < 1e-12);
        assert!((e.continuous_capacity(|n| 0.7 * n[0].abs()) - 0.7).abs() < 1e-12);
        assert!((e.capa(&[2.5]).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(e.capa(&[0.0]).unwrap(), 0.0);
        assert!(e.capa(&[-1.0]).is_err());
    }

    #[test]
    fn left_slab_competitor() {
        let spec = unit_square();
        let slab = ConvexPolytope::new(2, vec![half(vec![1, 0], Rational::new(1, 2))]).unwrap();
        let e = ContinuousCutset::new(&spec, Some(&slab)).unwrap();
        assert_eq!(e.pieces.len(), 1);
        assert_eq!(e.pieces[0].kind, PieceKind::Interior);
        assert!((e.l1_surface_energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_facet_energy() {
        let spec = unit_square();
        let tri = ConvexPolytope::new(2, vec![half(vec![1, 1], r(1))]).unwrap();
        let e = ContinuousCutset::new(&spec, Some(&tri)).unwrap();
        assert!((e.l1_surface_energy() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn full_competitor_touches_the_sink() {
        let spec = unit_square();
        let all = AxisBox::unit(2).to_polytope();
        let e = ContinuousCutset::new(&spec, Some(&all)).unwrap();
        assert_eq!(e.pieces.len(), 1);
        assert_eq!(e.pieces[0].kind, PieceKind::SinkContact);
        assert!((e.l1_surface_energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_under_scaling() {
        let spec = DomainSpecJson::unit_box(3).build().unwrap();
        let mut big = DomainSpecJson::unit_box(3);
        big.solid = vec![crate::geometry::SolidJson::Box {
            bounds: vec![[crate::geometry::JsonRational(r(0)), crate::geometry::JsonRational(r(2))]; 3],
        }];
        let big = big.build().unwrap();
        let cut = ConvexPolytope::new(3, vec![half(vec![1, 1, 0], r(1))]).unwrap();
        let small = ContinuousCutset::new(&spec, Some(&cut)).unwrap().l1_surface_energy();
        let large = ContinuousCutset::new(&big, Some(&cut.scaled(r(2)))).unwrap().l1_surface_energy();
        assert!((large - 4.0 * small).abs() < 1e-9);
        // the same surface measured directly agrees with the polyhedral facet sum
        let cell = cut.intersect(&AxisBox::unit(3).to_polytope());
        let set = PolyhedralSet::new(vec![cell]).unwrap();
        assert!(set.facet_integral(l1_norm) > small);
    }

    #[test]
    fn refinement_does_not_change_capacity() {
        // splitting the source face into two halves leaves the surface unchanged
        let mut json = DomainSpecJson::unit_box(2);
        let whole = ContinuousCutset::new(&json.build().unwrap(), None).unwrap().l1_surface_energy();
        let clip = |a: Vec<i128>, b: Rational| crate::geometry::domain::HalfSpaceJson {
            a: a.into_iter().map(|v| crate::geometry::JsonRational(r(v))).collect(),
            b: crate::geometry::JsonRational(b),
        };
        json.gamma1 = vec![
            crate::geometry::PatchJson::Face { face: "x0-min".into(), solid: 0, clip: vec![clip(vec![0, 1], Rational::new(1, 2))] },
            crate::geometry::PatchJson::Face { face: "x0-min".into(), solid: 0, clip: vec![clip(vec![0, -1], Rational::new(-1, 2))] },
        ];
        let split = ContinuousCutset::new(&json.build().unwrap(), None).unwrap();
        assert_eq!(split.pieces.len(), 2);
        assert!((split.l1_surface_energy() - whole).abs() < 1e-12);
    }

    #[test]
    fn wedge_is_not_minimal_against_the_empty_competitor() {
        let mut json = DomainSpecJson::unit_box(2);
        json.solid = vec![crate::geometry::SolidJson::Box {
            bounds: vec![
                [crate::geometry::JsonRational(r(0)), crate::geometry::JsonRational(r(2))],
                [crate::geometry::JsonRational(r(0)), crate::geometry::JsonRational(r(1))],
            ],
        }];
        let spec = json.build().unwrap();
        let wedge = ConvexPolytope::new(2, vec![half(vec![1, 1], r(1))]).unwrap();
        let e = ContinuousCutset::new(&spec, Some(&wedge)).unwrap();
        let density: Vec<f64> = e.pieces.iter().map(|p| l1_norm(&p.normal)).collect();
        let capa = e.capa(&density).unwrap();
        let empty = ContinuousCutset::new(&spec, None).unwrap();
        let rhs = e.competitor_bound(&density, &empty, l1_norm).unwrap();
        assert!((capa - 2.0).abs() < 1e-12);
        assert!((rhs - 1.0).abs() < 1e-12);
        // against itself the bound is exactly its capacity
        assert!((e.competitor_bound(&density, &e, l1_norm).unwrap() - capa).abs() < 1e-12);
        assert!(e.is_admissible(&density, l1_norm, 1.0, source_area(&spec).unwrap(), 1e-9).unwrap());
    }

    #[test]
    fn symdiff_to_boxes_and_polytopes() {
        let voxels = VoxelSet::from_points(2, 2, [vec![1, 1]]).unwrap();
        let quarter = AxisBox::new(vec![r(0), r(0)], vec![Rational::new(1, 2), Rational::new(1, 2)]).unwrap();
        let exact = voxel_symdiff_to_region(&voxels, &ConvexRegion::Box(quarter.clone())).unwrap();
        assert_eq!(exact, 0.375);
        let as_poly = voxel_symdiff_to_region(&voxels, &ConvexRegion::Polytope(quarter.to_polytope())).unwrap();
        assert!((as_poly - 0.375).abs() < 1e-12);
        let triangle = ConvexPolytope::new(
            2,
            vec![half(vec![1, 1], r(1)), half(vec![-1, 0], r(0)), half(vec![0, -1], r(0))],
        )
        .unwrap();
        let approx = voxel_symdiff_to_region(&voxels, &ConvexRegion::Polytope(triangle)).unwrap();
        // 1/4 + 1/2 - 2 · 1/8, up to one row of sub-cells.
        assert!((approx - 0.5).abs() <= 0.25 / 8.0);
    }
}
