use crate::cutgeom::ContinuousCutset;
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;

/// Slack before a competitor counts as beating the candidate.
const MINIMALITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub index: usize,
    /// Right-hand side of the minimality inequality for this competitor.
    pub bound: f64,
    /// `capa(E, f)` exceeds `bound`, so `(E, f)` is not minimal.
    pub certifies_non_minimality: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityReport {
    pub capa: f64,
    pub rows: Vec<PanelRow>,
}

impl MinimalityReport {
    pub fn is_minimal_on_panel(&self) -> bool {
        self.rows.iter().all(|r| !r.certifies_non_minimality)
    }
}

/// Compares `capa(E, f)` with every competitor `F` of the panel, where `F`
/// pays `f` on the surface it shares with `E` and `nu(normal)` elsewhere.
pub fn check_minimality_panel(
    candidate: &ContinuousCutset,
    density: &[f64],
    panel: &[ContinuousCutset],
    nu: impl Fn(&[f64]) -> f64,
) -> Result<MinimalityReport> {
    let capa = candidate.capa(density)?;
    let rows = panel
        .iter()
        .enumerate()
        .map(|(index, other)| {
            if other.dim != candidate.dim {
                return Err(Error::InvalidArgument("panel member of another dimension".into()));
            }
            let bound = candidate.competitor_bound(density, other, &nu)?;
            Ok(PanelRow { index, bound, certifies_non_minimality: capa > bound + MINIMALITY_TOLERANCE })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MinimalityReport { capa, rows })
}

/// `δ_G · min 𝓘₀(F)` over the panel and the empty competitor: below this
/// flow level the lower deviation has probability zero.
pub fn lambda_min(spec: &DomainSpec, min_capacity: f64, panel: &[ContinuousCutset]) -> Result<f64> {
    let empty = ContinuousCutset::new(spec, None)?;
    let energy = panel.iter().map(|c| c.l1_surface_energy()).fold(empty.l1_surface_energy(), f64::min);
    Ok(min_capacity * energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{l1_norm, ConvexPolytope, DomainSpecJson, HalfSpace, Rational};

    fn r(v: i128) -> Rational {
        Rational::from_integer(v)
    }

    fn left_part(x: Rational) -> ConvexPolytope {
        ConvexPolytope::new(2, vec![HalfSpace::new(vec![r(1), r(0)], x).unwrap()]).unwrap()
    }

    #[test]
    fn flat_cut_against_itself_is_tight() {
        let spec = DomainSpecJson::unit_box(2).build().unwrap();
        let e = ContinuousCutset::new(&spec, Some(&left_part(Rational::new(1, 2)))).unwrap();
        let f: Vec<f64> = e.pieces.iter().map(|p| l1_norm(&p.normal)).collect();
        let report = check_minimality_panel(&e, &f, std::slice::from_ref(&e), l1_norm).unwrap();
        assert_eq!(report.capa, report.rows[0].bound);
        assert!(report.is_minimal_on_panel());
        assert!(check_minimality_panel(&e, &f, &[], l1_norm).unwrap().is_minimal_on_panel());
    }

    #[test]
    fn cheaper_competitor_is_flagged() {
        let spec = DomainSpecJson::unit_box(2).build().unwrap();
        let e = ContinuousCutset::new(&spec, Some(&left_part(Rational::new(1, 2)))).unwrap();
        let other = ContinuousCutset::new(&spec, Some(&left_part(Rational::new(1, 4)))).unwrap();
        let f = vec![2.0; e.pieces.len()];
        let report = check_minimality_panel(&e, &f, &[other], l1_norm).unwrap();
        assert!(!report.is_minimal_on_panel());
    }

    #[test]
    fn lambda_min_of_the_unit_box() {
        let spec = DomainSpecJson::unit_box(2).build().unwrap();
        let panel = [ContinuousCutset::new(&spec, Some(&left_part(Rational::new(1, 2)))).unwrap()];
        assert_eq!(lambda_min(&spec, 1.0, &panel).unwrap(), 1.0);
        assert_eq!(lambda_min(&spec, 2.0, &[]).unwrap(), 2.0);
    }
}
