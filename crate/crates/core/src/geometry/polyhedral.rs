use super::polytope::{measure_in_plane, ConvexPolytope, HalfSpace};
use super::rational::to_f64;
use crate::error::{Error, Result};

/// One facet of a polyhedral surface.
#[derive(Debug, Clone)]
pub struct Facet {
    pub support_point: Vec<f64>,
    pub normal: Vec<f64>,
    pub measure: f64,
    pub plane: HalfSpace,
}

/// A finite union of interior-disjoint convex cells, with a cached list of
/// boundary facets. Facet portions shared by two cells cancel.
#[derive(Debug, Clone)]
pub struct PolyhedralSet {
    dim: usize,
    cells: Vec<ConvexPolytope>,
    facets: Vec<Facet>,
}

impl PolyhedralSet {
    pub fn new(cells: Vec<ConvexPolytope>) -> Result<Self> {
        let dim = cells.first().map(|c| c.dim()).ok_or(Error::EmptyGeometry)?;
        if cells.iter().any(|c| c.dim() != dim) {
            return Err(Error::InvalidGeometry("cells of mixed dimension".into()));
        }
        let per_cell: Vec<_> = cells.iter().map(|c| c.facets()).collect::<Result<_>>()?;
        let mut facets = Vec::new();
        for (i, cell_facets) in per_cell.iter().enumerate() {
            for f in cell_facets {
                let mut measure = f.measure;
                for (j, other) in per_cell.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    for g in other {
                        if f.plane.same_oriented_plane(&g.plane.flipped()) {
                            measure -= overlap_measure(&f.region, &g.region, &f.normal)?;
                        }
                    }
                }
                if measure > 1e-15 {
                    facets.push(Facet {
                        support_point: f.support_point.clone(),
                        normal: f.normal.clone(),
                        measure,
                        plane: f.plane.clone(),
                    });
                }
            }
        }
        Ok(Self { dim, cells, facets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[ConvexPolytope] {
        &self.cells
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// `Σ_facets measure · weight(normal)`.
    pub fn facet_integral(&self, weight: impl Fn(&[f64]) -> f64) -> f64 {
        self.facets.iter().map(|f| f.measure * weight(&f.normal)).sum()
    }
}

/// `(d-1)`-measure of the intersection of two convex regions lying in the
/// same hyperplane with unit normal `normal`.
pub fn overlap_measure(a: &ConvexPolytope, b: &ConvexPolytope, normal: &[f64]) -> Result<f64> {
    let verts = a.intersect(b).vertices();
    let pts: Vec<Vec<f64>> = verts.iter().map(|v| v.iter().map(to_f64).collect()).collect();
    measure_in_plane(&pts, normal)
}

pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::super::polytope::AxisBox;
    use super::super::rational::Rational;
    use super::*;

    fn r(v: i128) -> Rational {
        Rational::from_integer(v)
    }

    #[test]
    fn unit_square_integrals() {
        let sq = PolyhedralSet::new(vec![AxisBox::unit(2).to_polytope()]).unwrap();
        assert_eq!(sq.facet_integral(l1_norm), 4.0);
        assert_eq!(sq.facet_integral(|_| 1.0), 4.0);
    }

    #[test]
    fn right_triangle_l1_integral() {
        let tri = ConvexPolytope::new(
            2,
            vec![
                HalfSpace::new(vec![r(-1), r(0)], r(0)).unwrap(),
                HalfSpace::new(vec![r(0), r(-1)], r(0)).unwrap(),
                HalfSpace::new(vec![r(1), r(1)], r(1)).unwrap(),
            ],
        )
        .unwrap();
        let set = PolyhedralSet::new(vec![tri]).unwrap();
        assert!((set.facet_integral(l1_norm) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn shared_facets_cancel() {
        let left = AxisBox::new(vec![r(0), r(0)], vec![r(1), r(1)]).unwrap().to_polytope();
        let right = AxisBox::new(vec![r(1), r(0)], vec![r(2), r(1)]).unwrap().to_polytope();
        let set = PolyhedralSet::new(vec![left, right]).unwrap();
        assert!((set.facet_integral(|_| 1.0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_multiplies_by_power() {
        let cube = AxisBox::unit(3).to_polytope();
        let base = PolyhedralSet::new(vec![cube.clone()]).unwrap().facet_integral(l1_norm);
        let scaled = PolyhedralSet::new(vec![cube.scaled(Rational::new(3, 2))]).unwrap().facet_integral(l1_norm);
        assert!((scaled - base * 2.25).abs() < 1e-12);
    }
}
