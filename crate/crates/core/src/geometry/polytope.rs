//! Convex polytopes in half-space form with exact rational predicates.

use itertools::Itertools;
use num_traits::{Signed, Zero};

use super::rational::{dot, solve, to_f64, Rational};
use crate::error::{Error, Result};

/// The closed half-space `normal · y <= offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfSpace {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl HalfSpace {
    pub fn new(normal: Vec<Rational>, offset: Rational) -> Result<Self> {
        if normal.iter().all(|c| c.is_zero()) {
            return Err(Error::InvalidGeometry("half-space with zero normal".into()));
        }
        Ok(Self { normal, offset })
    }

    /// `normal · x - offset`; nonpositive inside.
    pub fn slack(&self, x: &[Rational]) -> Rational {
        dot(&self.normal, x) - self.offset
    }

    pub fn flipped(&self) -> Self {
        Self {
            normal: self.normal.iter().map(|c| -c).collect(),
            offset: -self.offset,
        }
    }

    pub fn unit_normal(&self) -> Vec<f64> {
        let v: Vec<f64> = self.normal.iter().map(to_f64).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        v.into_iter().map(|c| c / norm).collect()
    }

    /// Scales so that the first nonzero normal coefficient is +1 or -1,
    /// giving a canonical form for oriented hyperplanes.
    pub fn normalized(&self) -> Self {
        let lead = self
            .normal
            .iter()
            .find(|c| !c.is_zero())
            .copied()
            .unwrap_or_else(|| Rational::from_integer(1))
            .abs();
        Self {
            normal: self.normal.iter().map(|c| c / lead).collect(),
            offset: self.offset / lead,
        }
    }

    /// True when both describe the same hyperplane, ignoring orientation.
    pub fn same_plane(&self, other: &HalfSpace) -> bool {
        let a = self.normalized();
        let b = other.normalized();
        a == b || a == b.flipped()
    }

    /// True when both bound the same oriented hyperplane.
    pub fn same_oriented_plane(&self, other: &HalfSpace) -> bool {
        self.normalized() == other.normalized()
    }
}

/// A convex polytope given as an intersection of closed half-spaces.
/// Operations assume the polytope is bounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexPolytope {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
}

impl ConvexPolytope {
    pub fn new(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGeometry("zero dimension".into()));
        }
        if let Some(h) = halfspaces.iter().find(|h| h.normal.len() != dim) {
            return Err(Error::InvalidGeometry(format!(
                "half-space of dimension {} in a {dim}-dimensional polytope",
                h.normal.len()
            )));
        }
        Ok(Self { dim, halfspaces })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.halfspaces.iter().all(|h| !h.slack(x).is_positive())
    }

    /// Intersection with another polytope (constraint concatenation).
    pub fn intersect(&self, other: &ConvexPolytope) -> ConvexPolytope {
        let mut halfspaces = self.halfspaces.clone();
        halfspaces.extend(other.halfspaces.iter().cloned());
        ConvexPolytope { dim: self.dim, halfspaces }
    }

    /// The face cut out by turning constraint `k` into an equality.
    pub fn face_on(&self, plane: &HalfSpace) -> ConvexPolytope {
        let mut halfspaces = self.halfspaces.clone();
        halfspaces.push(plane.flipped());
        ConvexPolytope { dim: self.dim, halfspaces }
    }

    /// Exact vertex enumeration over all `dim`-subsets of constraints.
    pub fn vertices(&self) -> Vec<Vec<Rational>> {
        let d = self.dim;
        let mut out: Vec<Vec<Rational>> = Vec::new();
        for combo in (0..self.halfspaces.len()).combinations(d) {
            let m: Vec<Vec<Rational>> = combo
                .iter()
                .map(|&k| self.halfspaces[k].normal.clone())
                .collect();
            let rhs: Vec<Rational> = combo.iter().map(|&k| self.halfspaces[k].offset).collect();
            if let Some(x) = solve(m, rhs) {
                if self.contains(&x) {
                    out.push(x);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn is_empty(&self) -> bool {
        self.vertices().is_empty()
    }

    /// Exact `L^∞` distance from `x` to the polytope, by enumerating the
    /// vertices of the epigraph LP `min t : y ∈ P, |y_i - x_i| <= t`.
    pub fn linf_distance(&self, x: &[Rational]) -> Result<Rational> {
        if self.contains(x) {
            return Ok(Rational::zero());
        }
        let d = self.dim;
        let one = Rational::from_integer(1);
        // rows over (y_1..y_d, t)
        let mut rows: Vec<(Vec<Rational>, Rational)> = Vec::new();
        for h in &self.halfspaces {
            let mut a = h.normal.clone();
            a.push(Rational::zero());
            rows.push((a, h.offset));
        }
        for i in 0..d {
            let mut up = vec![Rational::zero(); d + 1];
            up[i] = one;
            up[d] = -one;
            rows.push((up, x[i]));
            let mut down = vec![Rational::zero(); d + 1];
            down[i] = -one;
            down[d] = -one;
            rows.push((down, -x[i]));
        }
        let mut best: Option<Rational> = None;
        for combo in (0..rows.len()).combinations(d + 1) {
            let m: Vec<Vec<Rational>> = combo.iter().map(|&k| rows[k].0.clone()).collect();
            let rhs: Vec<Rational> = combo.iter().map(|&k| rows[k].1).collect();
            let Some(sol) = solve(m, rhs) else { continue };
            let t = sol[d];
            if best.is_some_and(|b| t >= b) {
                continue;
            }
            let feasible = rows.iter().all(|(a, b)| !(dot(a, &sol) - b).is_positive());
            if feasible {
                best = Some(t);
            }
        }
        best.ok_or(Error::EmptyGeometry)
    }

    /// Facets with positive `(dim-1)`-measure; duplicated constraints are
    /// reported once.
    pub fn facets(&self) -> Result<Vec<FacetGeometry>> {
        let mut out: Vec<FacetGeometry> = Vec::new();
        for h in &self.halfspaces {
            if out.iter().any(|f| f.plane.same_oriented_plane(h)) {
                continue;
            }
            let face = self.face_on(h);
            let verts = face.vertices();
            if verts.len() < self.dim {
                continue;
            }
            let normal = h.unit_normal();
            let pts: Vec<Vec<f64>> = verts.iter().map(|v| v.iter().map(to_f64).collect()).collect();
            let measure = measure_in_plane(&pts, &normal)?;
            if measure <= 0.0 {
                continue;
            }
            out.push(FacetGeometry {
                plane: h.clone(),
                region: face,
                support_point: centroid(&pts),
                normal,
                measure,
            });
        }
        Ok(out)
    }

    /// Lebesgue measure through the divergence theorem over the facets.
    pub fn volume(&self) -> Result<f64> {
        let facets = self.facets()?;
        let d = self.dim as f64;
        Ok(facets
            .iter()
            .map(|f| {
                let h: f64 = f.normal.iter().zip(&f.support_point).map(|(a, b)| a * b).sum();
                f.measure * h
            })
            .sum::<f64>()
            / d)
    }

    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let verts = self.vertices();
        if verts.is_empty() {
            return None;
        }
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for v in &verts {
            for i in 0..self.dim {
                let c = to_f64(&v[i]);
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        Some((lo, hi))
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, factor: Rational) -> ConvexPolytope {
        ConvexPolytope {
            dim: self.dim,
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| HalfSpace { normal: h.normal.clone(), offset: h.offset * factor })
                .collect(),
        }
    }
}

/// A facet of a convex polytope: the face region plus cached measure data.
#[derive(Debug, Clone)]
pub struct FacetGeometry {
    pub plane: HalfSpace,
    pub region: ConvexPolytope,
    pub support_point: Vec<f64>,
    pub normal: Vec<f64>,
    pub measure: f64,
}

/// Axis-aligned closed box `[lo_1, hi_1] × … × [lo_d, hi_d]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisBox {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
}

impl AxisBox {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidGeometry("box bounds of mismatched length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::EmptyGeometry);
        }
        Ok(Self { lo, hi })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            lo: vec![Rational::zero(); dim],
            hi: vec![Rational::from_integer(1); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(c, (a, b))| a <= c && c <= b)
    }

    /// Coordinate-wise projection distance.
    pub fn linf_distance(&self, x: &[Rational]) -> Rational {
        let mut best = Rational::zero();
        for (c, (a, b)) in x.iter().zip(self.lo.iter().zip(&self.hi)) {
            let gap = if c < a {
                a - c
            } else if c > b {
                c - b
            } else {
                Rational::zero()
            };
            if gap > best {
                best = gap;
            }
        }
        best
    }

    /// The face `x_axis = lo_axis` (`upper == false`) or `x_axis = hi_axis`.
    pub fn face(&self, axis: usize, upper: bool) -> AxisBox {
        let mut face = self.clone();
        let value = if upper { self.hi[axis] } else { self.lo[axis] };
        face.lo[axis] = value;
        face.hi[axis] = value;
        face
    }

    /// Outward supporting half-space of a face.
    pub fn face_plane(&self, axis: usize, upper: bool) -> HalfSpace {
        let mut normal = vec![Rational::zero(); self.dim()];
        if upper {
            normal[axis] = Rational::from_integer(1);
            HalfSpace { normal, offset: self.hi[axis] }
        } else {
            normal[axis] = Rational::from_integer(-1);
            HalfSpace { normal, offset: -self.lo[axis] }
        }
    }

    pub fn to_polytope(&self) -> ConvexPolytope {
        let d = self.dim();
        let mut hs = Vec::with_capacity(2 * d);
        for axis in 0..d {
            hs.push(self.face_plane(axis, false));
            hs.push(self.face_plane(axis, true));
        }
        ConvexPolytope { dim: d, halfspaces: hs }
    }

    pub fn volume(&self) -> Rational {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    /// Exact volume of the intersection with another box.
    pub fn intersection_volume(&self, other: &AxisBox) -> Rational {
        let mut vol = Rational::from_integer(1);
        for i in 0..self.dim() {
            let lo = self.lo[i].max(other.lo[i]);
            let hi = self.hi[i].min(other.hi[i]);
            if hi <= lo {
                return Rational::zero();
            }
            vol *= hi - lo;
        }
        vol
    }
}

/// A convex region with an exact distance oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConvexRegion {
    Box(AxisBox),
    Polytope(ConvexPolytope),
}

impl ConvexRegion {
    pub fn dim(&self) -> usize {
        match self {
            ConvexRegion::Box(b) => b.dim(),
            ConvexRegion::Polytope(p) => p.dim(),
        }
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        match self {
            ConvexRegion::Box(b) => b.contains(x),
            ConvexRegion::Polytope(p) => p.contains(x),
        }
    }

    pub fn linf_distance(&self, x: &[Rational]) -> Result<Rational> {
        match self {
            ConvexRegion::Box(b) => Ok(b.linf_distance(x)),
            ConvexRegion::Polytope(p) => p.linf_distance(x),
        }
    }

    pub fn to_polytope(&self) -> ConvexPolytope {
        match self {
            ConvexRegion::Box(b) => b.to_polytope(),
            ConvexRegion::Polytope(p) => p.clone(),
        }
    }

    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            ConvexRegion::Box(b) => Some((
                b.lo.iter().map(to_f64).collect(),
                b.hi.iter().map(to_f64).collect(),
            )),
            ConvexRegion::Polytope(p) => p.bounding_box(),
        }
    }
}

pub fn centroid(pts: &[Vec<f64>]) -> Vec<f64> {
    let d = pts.first().map_or(0, |p| p.len());
    let mut c = vec![0.0; d];
    for p in pts {
        for i in 0..d {
            c[i] += p[i];
        }
    }
    for v in &mut c {
        *v /= pts.len() as f64;
    }
    c
}

/// `(d-1)`-dimensional measure of the convex hull of `pts`, which lie in a
/// hyperplane with unit normal `normal`. Supported for `d ∈ {2, 3}`.
pub fn measure_in_plane(pts: &[Vec<f64>], normal: &[f64]) -> Result<f64> {
    let d = normal.len();
    if pts.len() < d {
        return Ok(0.0);
    }
    match d {
        2 => {
            let mut best = 0.0f64;
            for (a, b) in pts.iter().tuple_combinations() {
                let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                best = best.max(len);
            }
            Ok(best)
        }
        3 => {
            let (u, w) = plane_basis(normal);
            let mut flat: Vec<(f64, f64)> = pts
                .iter()
                .map(|p| {
                    (
                        p[0] * u[0] + p[1] * u[1] + p[2] * u[2],
                        p[0] * w[0] + p[1] * w[1] + p[2] * w[2],
                    )
                })
                .collect();
            Ok(convex_hull_area(&mut flat))
        }
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

fn plane_basis(n: &[f64]) -> ([f64; 3], [f64; 3]) {
    let axis = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
        [1.0, 0.0, 0.0]
    } else if n[1].abs() <= n[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let cross = |a: &[f64], b: &[f64]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let mut u = cross(n, &axis);
    let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    for c in &mut u {
        *c /= norm;
    }
    let w = cross(n, &u);
    (u, w)
}

fn convex_hull_area(pts: &mut [(f64, f64)]) -> f64 {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() < 3 {
        return 0.0;
    }
    let mut area = 0.0;
    for i in 0..hull.len() {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        area += a.0 * b.1 - b.0 * a.1;
    }
    area.abs() / 2.0
}
