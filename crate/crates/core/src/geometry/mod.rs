//! Geometry for domains, polyhedral surfaces and voxel sets.
//!
//! Boxes and half-space polytopes use exact rational arithmetic; balls and
//! spherical caps are evaluated to an absolute tolerance of `1e-12`.

pub mod ball;
pub mod domain;
pub mod polyhedral;
pub mod polytope;
pub mod rational;
pub mod voxel;

pub use ball::{unit_ball_volume, Ball, Cap};
pub use domain::{DomainSpec, DomainSpecJson, HalfSpaceJson, LinfDistance, Patch, PatchJson, Solid, SolidJson};
pub use polyhedral::{l1_norm, overlap_measure, Facet, PolyhedralSet};
pub use polytope::{AxisBox, ConvexPolytope, ConvexRegion, HalfSpace};
pub use rational::{rational_from_f64, JsonRational, Rational};
pub use voxel::{VoxelRle, VoxelSet};

use crate::error::{Error, Result};

/// Something a point's `L^∞` distance can be measured to.
pub enum LinfTarget<'a> {
    Domain(&'a DomainSpec),
    Solid(&'a Solid),
    Patch(&'a Patch),
    Patches(&'a [Patch]),
}

/// `inf_{y ∈ S} ‖x - y‖_∞`.
pub fn linf_distance_to_set(x: &[Rational], target: LinfTarget<'_>) -> Result<LinfDistance> {
    match target {
        LinfTarget::Domain(spec) => spec.linf_to_solid(x),
        LinfTarget::Solid(s) => s.linf_distance(x),
        LinfTarget::Patch(p) => p.linf_distance(x),
        LinfTarget::Patches(ps) => {
            let mut best: Option<LinfDistance> = None;
            for p in ps {
                let d = p.linf_distance(x)?;
                best = Some(best.map_or(d, |b| b.min(d)));
            }
            best.ok_or(Error::EmptyGeometry)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_to_unit_square() {
        let sq = Solid::Convex(ConvexRegion::Box(AxisBox::unit(2)));
        let p = |a: f64, b: f64| vec![rational_from_f64(a).unwrap(), rational_from_f64(b).unwrap()];
        let d = |x: Vec<Rational>| linf_distance_to_set(&x, LinfTarget::Solid(&sq)).unwrap();
        assert_eq!(d(p(0.5, 0.5)), LinfDistance::Exact(Rational::from_integer(0)));
        assert_eq!(d(p(-0.5, 0.5)), LinfDistance::Exact(Rational::new(1, 2)));
        assert_eq!(d(p(1.5, 1.5)), LinfDistance::Exact(Rational::new(1, 2)));
    }

    #[test]
    fn empty_patch_list_is_an_error() {
        let x = vec![Rational::from_integer(0); 2];
        assert!(matches!(
            linf_distance_to_set(&x, LinfTarget::Patches(&[])),
            Err(Error::EmptyGeometry)
        ));
    }
}
