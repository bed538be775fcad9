//! Domain specifications: the solid `Ω` and the source/sink patches `Γ¹`, `Γ²`.

use std::cmp::Ordering;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::ball::{Ball, Cap, BALL_TOLERANCE};
use super::polytope::{AxisBox, ConvexPolytope, ConvexRegion, HalfSpace};
use super::rational::{rational_from_f64, to_f64, JsonRational, Rational};
use crate::error::{Error, Result};

/// A distance that is either exact or known to [`BALL_TOLERANCE`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinfDistance {
    Exact(Rational),
    Approx(f64),
}

impl LinfDistance {
    pub fn to_f64(self) -> f64 {
        match self {
            LinfDistance::Exact(r) => to_f64(&r),
            LinfDistance::Approx(v) => v,
        }
    }

    /// Compares with a rational threshold. Approximate values within the
    /// ball tolerance of the threshold compare as equal.
    pub fn cmp_threshold(self, threshold: Rational) -> Ordering {
        match self {
            LinfDistance::Exact(r) => r.cmp(&threshold),
            LinfDistance::Approx(v) => {
                let t = to_f64(&threshold);
                if (v - t).abs() <= BALL_TOLERANCE {
                    Ordering::Equal
                } else if v < t {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn min(self, other: LinfDistance) -> LinfDistance {
        match (self, other) {
            (LinfDistance::Exact(a), LinfDistance::Exact(b)) => LinfDistance::Exact(a.min(b)),
            _ => {
                if self.to_f64() <= other.to_f64() {
                    self
                } else {
                    other
                }
            }
        }
    }
}

/// One convex piece of the solid `Ω`.
#[derive(Debug, Clone, PartialEq)]
pub enum Solid {
    Convex(ConvexRegion),
    Ball(Ball),
}

impl Solid {
    pub fn dim(&self) -> usize {
        match self {
            Solid::Convex(c) => c.dim(),
            Solid::Ball(b) => b.dim(),
        }
    }

    pub fn linf_distance(&self, x: &[Rational]) -> Result<LinfDistance> {
        match self {
            Solid::Convex(c) => c.linf_distance(x).map(LinfDistance::Exact),
            Solid::Ball(b) => {
                let p: Vec<f64> = x.iter().map(to_f64).collect();
                Ok(LinfDistance::Approx(b.linf_distance(&p)))
            }
        }
    }

    pub fn contains_f64(&self, x: &[f64]) -> bool {
        match self {
            Solid::Convex(c) => match x.iter().map(|v| rational_from_f64(*v)).collect::<Result<Vec<_>>>() {
                Ok(p) => c.contains(&p),
                Err(_) => false,
            },
            Solid::Ball(b) => b.contains(x),
        }
    }

    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Solid::Convex(c) => c.bounding_box(),
            Solid::Ball(b) => Some(b.bounding_box()),
        }
    }
}

/// A piece of the boundary designated as source or sink.
#[derive(Debug, Clone, PartialEq)]
pub enum Patch {
    /// A flat piece lying in the hyperplane `plane` (outward orientation).
    Flat { region: ConvexRegion, plane: HalfSpace },
    Cap(Cap),
}

impl Patch {
    pub fn linf_distance(&self, x: &[Rational]) -> Result<LinfDistance> {
        match self {
            Patch::Flat { region, .. } => region.linf_distance(x).map(LinfDistance::Exact),
            Patch::Cap(cap) => {
                let p: Vec<f64> = x.iter().map(to_f64).collect();
                Ok(LinfDistance::Approx(cap.linf_distance(&p)))
            }
        }
    }

    fn linf_distance_f64(&self, x: &[f64]) -> Result<f64> {
        match self {
            Patch::Flat { region, .. } => {
                let p = x.iter().map(|v| rational_from_f64(*v)).collect::<Result<Vec<_>>>()?;
                Ok(to_f64(&region.linf_distance(&p)?))
            }
            Patch::Cap(cap) => Ok(cap.linf_distance(x)),
        }
    }

    /// Outward unit normal for flat patches.
    pub fn outward_normal(&self) -> Option<Vec<f64>> {
        match self {
            Patch::Flat { plane, .. } => Some(plane.unit_normal()),
            Patch::Cap(_) => None,
        }
    }

    /// The patch as a polytope (flat patches only).
    pub fn polytope(&self) -> Option<ConvexPolytope> {
        match self {
            Patch::Flat { region, .. } => Some(region.to_polytope()),
            Patch::Cap(_) => None,
        }
    }
}

/// Validated domain: solid `Ω` as a union of convex pieces, plus patches.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    dim: usize,
    pub solid: Vec<Solid>,
    pub gamma1: Vec<Patch>,
    pub gamma2: Vec<Patch>,
}

impl DomainSpec {
    pub fn new(dim: usize, solid: Vec<Solid>, gamma1: Vec<Patch>, gamma2: Vec<Patch>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidGeometry(format!("dimension {dim} < 2")));
        }
        if solid.is_empty() {
            return Err(Error::EmptyGeometry);
        }
        if solid.iter().any(|s| s.dim() != dim) {
            return Err(Error::InvalidGeometry("solid piece of the wrong dimension".into()));
        }
        for s in &solid {
            if let Solid::Convex(ConvexRegion::Polytope(p)) = s {
                check_bounded(p)?;
            }
        }
        if gamma1.is_empty() || gamma2.is_empty() {
            return Err(Error::InvalidGeometry("gamma1 and gamma2 must be nonempty".into()));
        }
        let spec = Self { dim, solid, gamma1, gamma2 };
        spec.check_patch_gap()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `d_∞(x, Ω)`.
    pub fn linf_to_solid(&self, x: &[Rational]) -> Result<LinfDistance> {
        min_distance(self.solid.iter().map(|s| s.linf_distance(x)))
    }

    /// `d_∞(x, Γ^i)` for `i ∈ {1, 2}`.
    pub fn linf_to_gamma(&self, which: usize, x: &[Rational]) -> Result<LinfDistance> {
        let patches = match which {
            1 => &self.gamma1,
            2 => &self.gamma2,
            _ => return Err(Error::InvalidArgument(format!("gamma index {which}"))),
        };
        min_distance(patches.iter().map(|p| p.linf_distance(x)))
    }

    pub fn contains_f64(&self, x: &[f64]) -> bool {
        self.solid.iter().any(|s| s.contains_f64(x))
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for s in &self.solid {
            if let Some((a, b)) = s.bounding_box() {
                for i in 0..self.dim {
                    lo[i] = lo[i].min(a[i]);
                    hi[i] = hi[i].max(b[i]);
                }
            }
        }
        (lo, hi)
    }

    /// The single convex polytope making up `Ω`, when it is one.
    pub fn as_single_polytope(&self) -> Option<ConvexPolytope> {
        match self.solid.as_slice() {
            [Solid::Convex(c)] => Some(c.to_polytope()),
            _ => None,
        }
    }

    pub fn as_single_box(&self) -> Option<&AxisBox> {
        match self.solid.as_slice() {
            [Solid::Convex(ConvexRegion::Box(b))] => Some(b),
            _ => None,
        }
    }

    /// Lebesgue measure of `Ω` (single-piece domains only).
    pub fn volume(&self) -> Result<f64> {
        match self.solid.as_slice() {
            [Solid::Convex(ConvexRegion::Box(b))] => Ok(to_f64(&b.volume())),
            [Solid::Convex(ConvexRegion::Polytope(p))] => p.volume(),
            [Solid::Ball(b)] => Ok(b.volume()),
            _ => Err(Error::InvalidGeometry("volume needs a single-piece solid".into())),
        }
    }

    /// Requires a positive distance between `Γ¹` and `Γ²`. Flat pairs are
    /// tested exactly; pairs involving caps use a sampled lower bound.
    fn check_patch_gap(&self) -> Result<()> {
        for a in &self.gamma1 {
            for b in &self.gamma2 {
                let disjoint = match (a, b) {
                    (Patch::Flat { region: ra, .. }, Patch::Flat { region: rb, .. }) => {
                        ra.to_polytope().intersect(&rb.to_polytope()).is_empty()
                    }
                    (Patch::Cap(cap), other) | (other, Patch::Cap(cap)) => sampled_gap_positive(cap, other)?,
                };
                if !disjoint {
                    return Err(Error::InvalidGeometry(
                        "gamma1 and gamma2 must be at positive distance".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DomainSpecJson = serde_json::from_str(text)?;
        raw.build()
    }
}

fn min_distance(iter: impl Iterator<Item = Result<LinfDistance>>) -> Result<LinfDistance> {
    let mut best: Option<LinfDistance> = None;
    for d in iter {
        let d = d?;
        best = Some(match best {
            None => d,
            Some(b) => b.min(d),
        });
    }
    best.ok_or(Error::EmptyGeometry)
}

fn check_bounded(p: &ConvexPolytope) -> Result<()> {
    let Some((lo, hi)) = p.bounding_box() else {
        return Err(Error::EmptyGeometry);
    };
    // A bounded polytope keeps its vertices when intersected with a strictly
    // larger box; an unbounded one acquires vertices on that box.
    let mut lo_r = Vec::new();
    let mut hi_r = Vec::new();
    for i in 0..p.dim() {
        lo_r.push(rational_from_f64(lo[i].floor() - 1.0)?);
        hi_r.push(rational_from_f64(hi[i].ceil() + 1.0)?);
    }
    let outer = AxisBox::new(lo_r, hi_r)?;
    let clipped = p.intersect(&outer.to_polytope());
    let touches = clipped.vertices().iter().any(|v| {
        v.iter()
            .enumerate()
            .any(|(i, c)| *c == outer.lo[i] || *c == outer.hi[i])
    });
    if touches {
        return Err(Error::InvalidGeometry("solid must be bounded".into()));
    }
    Ok(())
}

fn sampled_gap_positive(cap: &Cap, other: &Patch) -> Result<bool> {
    let d = cap.ball.dim();
    let r = cap.ball.radius;
    let half_angle = cap.min_cos.clamp(-1.0, 1.0).acos();
    for level in [64usize, 256, 1024] {
        let (samples, spacing) = match d {
            2 => sample_arc(cap, half_angle, level),
            3 => sample_cap3(cap, half_angle, level / 4),
            _ => return Err(Error::UnsupportedDimension(d)),
        };
        let mut min_dist = f64::INFINITY;
        for s in &samples {
            min_dist = min_dist.min(other.linf_distance_f64(s)?);
        }
        if min_dist - spacing * r > 0.0 {
            return Ok(true);
        }
        if min_dist <= BALL_TOLERANCE {
            return Ok(false);
        }
    }
    Ok(false)
}

fn sample_arc(cap: &Cap, half_angle: f64, k: usize) -> (Vec<Vec<f64>>, f64) {
    let base = cap.axis[1].atan2(cap.axis[0]);
    let step = 2.0 * half_angle / k as f64;
    let pts = (0..=k)
        .map(|j| {
            let th = base - half_angle + step * j as f64;
            vec![
                cap.ball.center[0] + cap.ball.radius * th.cos(),
                cap.ball.center[1] + cap.ball.radius * th.sin(),
            ]
        })
        .collect();
    (pts, step)
}

fn sample_cap3(cap: &Cap, half_angle: f64, k: usize) -> (Vec<Vec<f64>>, f64) {
    let a = &cap.axis;
    let helper = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dotp = a[0] * helper[0] + a[1] * helper[1] + a[2] * helper[2];
    let mut e1: Vec<f64> = (0..3).map(|i| helper[i] - dotp * a[i]).collect();
    let n1 = e1.iter().map(|c| c * c).sum::<f64>().sqrt();
    e1.iter_mut().for_each(|c| *c /= n1);
    let e2 = [
        a[1] * e1[2] - a[2] * e1[1],
        a[2] * e1[0] - a[0] * e1[2],
        a[0] * e1[1] - a[1] * e1[0],
    ];
    let dphi = half_angle / k as f64;
    let dpsi = 2.0 * std::f64::consts::PI / (4 * k) as f64;
    let mut pts = Vec::new();
    for i in 0..=k {
        let phi = dphi * i as f64;
        for j in 0..(4 * k) {
            let psi = dpsi * j as f64;
            let dir: Vec<f64> = (0..3)
                .map(|m| phi.cos() * a[m] + phi.sin() * (psi.cos() * e1[m] + psi.sin() * e2[m]))
                .collect();
            pts.push((0..3).map(|m| cap.ball.center[m] + cap.ball.radius * dir[m]).collect());
        }
    }
    (pts, dphi + dpsi)
}

// ---------------------------------------------------------------------------
// JSON form

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceJson {
    pub a: Vec<JsonRational>,
    pub b: JsonRational,
}

impl HalfSpaceJson {
    pub fn build(&self) -> Result<HalfSpace> {
        HalfSpace::new(self.a.iter().map(|c| c.0).collect(), self.b.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallJson {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SolidJson {
    Box {
        #[serde(rename = "box")]
        bounds: Vec<[JsonRational; 2]>,
    },
    HalfSpaces {
        halfspaces: Vec<HalfSpaceJson>,
    },
    Ball {
        ball: BallJson,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapJson {
    pub axis: Vec<f64>,
    pub min_cos: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PatchJson {
    /// A box face such as `"x0-min"` or `"x1-max"`.
    Face {
        face: String,
        #[serde(default)]
        solid: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        clip: Vec<HalfSpaceJson>,
    },
    /// The facet carried by half-space `facet` of a half-space solid.
    Facet {
        facet: usize,
        #[serde(default)]
        solid: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        clip: Vec<HalfSpaceJson>,
    },
    Cap {
        cap: CapJson,
        #[serde(default)]
        solid: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpecJson {
    pub d: usize,
    pub solid: Vec<SolidJson>,
    pub gamma1: Vec<PatchJson>,
    pub gamma2: Vec<PatchJson>,
}

impl DomainSpecJson {
    pub fn build(&self) -> Result<DomainSpec> {
        let d = self.d;
        let solids = self
            .solid
            .iter()
            .map(|s| build_solid(d, s))
            .collect::<Result<Vec<_>>>()?;
        let g1 = self
            .gamma1
            .iter()
            .map(|p| build_patch(d, &solids, p))
            .collect::<Result<Vec<_>>>()?;
        let g2 = self
            .gamma2
            .iter()
            .map(|p| build_patch(d, &solids, p))
            .collect::<Result<Vec<_>>>()?;
        DomainSpec::new(d, solids, g1, g2)
    }

    /// Unit box `[0,1]^d` with sources on `x0 = 0` and sinks on `x0 = 1`.
    pub fn unit_box(d: usize) -> Self {
        let one = JsonRational(Rational::from_integer(1));
        let zero = JsonRational(Rational::zero());
        DomainSpecJson {
            d,
            solid: vec![SolidJson::Box { bounds: vec![[zero, one]; d] }],
            gamma1: vec![PatchJson::Face { face: "x0-min".into(), solid: 0, clip: vec![] }],
            gamma2: vec![PatchJson::Face { face: "x0-max".into(), solid: 0, clip: vec![] }],
        }
    }
}

fn build_solid(d: usize, s: &SolidJson) -> Result<Solid> {
    match s {
        SolidJson::Box { bounds } => {
            if bounds.len() != d {
                return Err(Error::InvalidGeometry("box bounds length differs from d".into()));
            }
            let b = AxisBox::new(
                bounds.iter().map(|p| p[0].0).collect(),
                bounds.iter().map(|p| p[1].0).collect(),
            )?;
            Ok(Solid::Convex(ConvexRegion::Box(b)))
        }
        SolidJson::HalfSpaces { halfspaces } => {
            let hs = halfspaces.iter().map(|h| h.build()).collect::<Result<Vec<_>>>()?;
            let p = ConvexPolytope::new(d, hs)?;
            if p.is_empty() {
                return Err(Error::EmptyGeometry);
            }
            Ok(Solid::Convex(ConvexRegion::Polytope(p)))
        }
        SolidJson::Ball { ball } => {
            if ball.center.len() != d {
                return Err(Error::InvalidGeometry("ball center length differs from d".into()));
            }
            Ok(Solid::Ball(Ball::new(ball.center.clone(), ball.radius)?))
        }
    }
}

fn parse_face(face: &str) -> Result<(usize, bool)> {
    let bad = || Error::InvalidGeometry(format!("bad face name {face:?}; expected like \"x0-min\""));
    let rest = face.strip_prefix('x').ok_or_else(bad)?;
    let (axis, side) = rest.split_once('-').ok_or_else(bad)?;
    let axis: usize = axis.parse().map_err(|_| bad())?;
    let upper = match side {
        "min" => false,
        "max" => true,
        _ => return Err(bad()),
    };
    Ok((axis, upper))
}

fn build_patch(d: usize, solids: &[Solid], p: &PatchJson) -> Result<Patch> {
    let solid_at = |i: usize| {
        solids
            .get(i)
            .ok_or_else(|| Error::InvalidGeometry(format!("patch refers to missing solid {i}")))
    };
    let clip_polytope = |base: ConvexPolytope, clip: &[HalfSpaceJson]| -> Result<ConvexPolytope> {
        let hs = clip.iter().map(|h| h.build()).collect::<Result<Vec<_>>>()?;
        Ok(base.intersect(&ConvexPolytope::new(d, hs)?))
    };
    match p {
        PatchJson::Face { face, solid, clip } => {
            let (axis, upper) = parse_face(face)?;
            if axis >= d {
                return Err(Error::InvalidGeometry(format!("face axis {axis} >= d")));
            }
            let region = match solid_at(*solid)? {
                Solid::Convex(ConvexRegion::Box(b)) => b,
                _ => return Err(Error::InvalidGeometry("named faces need a box solid".into())),
            };
            let plane = region.face_plane(axis, upper);
            let face_box = region.face(axis, upper);
            let region = if clip.is_empty() {
                ConvexRegion::Box(face_box)
            } else {
                ConvexRegion::Polytope(clip_polytope(face_box.to_polytope(), clip)?)
            };
            Ok(Patch::Flat { region, plane })
        }
        PatchJson::Facet { facet, solid, clip } => {
            let poly = match solid_at(*solid)? {
                Solid::Convex(c) => c.to_polytope(),
                Solid::Ball(_) => return Err(Error::InvalidGeometry("facet of a ball".into())),
            };
            let plane = poly
                .halfspaces()
                .get(*facet)
                .cloned()
                .ok_or_else(|| Error::InvalidGeometry(format!("no facet {facet}")))?;
            let region = clip_polytope(poly.face_on(&plane), clip)?;
            if region.is_empty() {
                return Err(Error::EmptyGeometry);
            }
            Ok(Patch::Flat { region: ConvexRegion::Polytope(region), plane })
        }
        PatchJson::Cap { cap, solid } => match solid_at(*solid)? {
            Solid::Ball(b) => Ok(Patch::Cap(Cap::new(b.clone(), cap.axis.clone(), cap.min_cos)?)),
            _ => Err(Error::InvalidGeometry("caps need a ball solid".into())),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_reference_box_document() {
        let spec = DomainSpec::from_json(
            r#"{"d":2,"solid":[{"box":[[0,1],[0,1]]}],"gamma1":[{"face":"x0-min"}],"gamma2":[{"face":"x0-max"}]}"#,
        )
        .unwrap();
        assert_eq!(spec.dim(), 2);
        let p = [Rational::new(-1, 2), Rational::new(1, 2)];
        assert_eq!(spec.linf_to_solid(&p).unwrap(), LinfDistance::Exact(Rational::new(1, 2)));
        assert_eq!(spec.linf_to_gamma(1, &p).unwrap(), LinfDistance::Exact(Rational::new(1, 2)));
        assert_eq!(spec.linf_to_gamma(2, &p).unwrap(), LinfDistance::Exact(Rational::new(3, 2)));
    }

    #[test]
    fn halfspace_triangle_with_facets() {
        let spec = DomainSpec::from_json(
            r#"{"d":2,
                "solid":[{"halfspaces":[{"a":[-1,0],"b":0},{"a":[0,-1],"b":0},{"a":[1,1],"b":1}]}],
                "gamma1":[{"facet":0}],
                "gamma2":[{"facet":1, "clip":[{"a":[-1,0],"b":"-1/2"}]}]}"#,
        )
        .unwrap();
        let origin = [Rational::zero(), Rational::zero()];
        assert_eq!(spec.linf_to_gamma(1, &origin).unwrap(), LinfDistance::Exact(Rational::zero()));
        assert_eq!(spec.linf_to_gamma(2, &origin).unwrap(), LinfDistance::Exact(Rational::new(1, 2)));
    }

    #[test]
    fn touching_patches_are_rejected() {
        let err = DomainSpec::from_json(
            r#"{"d":2,"solid":[{"box":[[0,1],[0,1]]}],"gamma1":[{"face":"x0-min"}],"gamma2":[{"face":"x1-min"}]}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn unbounded_polytope_rejected() {
        let err = DomainSpec::from_json(
            r#"{"d":2,"solid":[{"halfspaces":[{"a":[-1,0],"b":0},{"a":[0,-1],"b":0},{"a":[0,1],"b":1}]}],
               "gamma1":[{"facet":0}],"gamma2":[{"facet":1}]}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn ball_domain_with_opposite_caps() {
        let spec = DomainSpec::from_json(
            r#"{"d":2,"solid":[{"ball":{"center":[0,0],"radius":1}}],
               "gamma1":[{"cap":{"axis":[-1,0],"min_cos":0.5}}],
               "gamma2":[{"cap":{"axis":[1,0],"min_cos":0.5}}]}"#,
        )
        .unwrap();
        let d = spec.linf_to_gamma(1, &[Rational::from_integer(-1), Rational::zero()]).unwrap();
        assert!(d.to_f64() < 1e-12);
        let overlapping = DomainSpec::from_json(
            r#"{"d":2,"solid":[{"ball":{"center":[0,0],"radius":1}}],
               "gamma1":[{"cap":{"axis":[-1,0],"min_cos":-0.5}}],
               "gamma2":[{"cap":{"axis":[1,0],"min_cos":-0.5}}]}"#,
        );
        assert!(overlapping.is_err());
    }

    #[test]
    fn empty_solid_list_is_empty_geometry() {
        let err = DomainSpec::new(2, vec![], vec![], vec![]).unwrap_err();
        assert!(matches!(err, Error::EmptyGeometry));
    }

    #[test]
    fn approx_threshold_ties() {
        let t = Rational::new(1, 4);
        assert_eq!(LinfDistance::Approx(0.25 + 1e-14).cmp_threshold(t), Ordering::Equal);
        assert_eq!(LinfDistance::Approx(0.2).cmp_threshold(t), Ordering::Less);
    }
}
