use super::RateCurve;
use crate::error::{Error, Result};

/// Side lengths of a triangle `(ABC)`; side `X` is opposite vertex `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleSides {
    pub bc: f64,
    pub ac: f64,
    pub ab: f64,
}

impl TriangleSides {
    fn validate(&self) -> Result<()> {
        let [a, b, c] = [self.bc, self.ac, self.ab];
        let ok = a > 0.0 && b > 0.0 && c > 0.0 && a < b + c && b < a + c && c < a + b;
        if !ok {
            return Err(Error::InvalidArgument("degenerate triangle".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleViolation {
    pub lambda: f64,
    pub mu: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleReport {
    pub pairs_checked: usize,
    /// Pairs skipped because a right-hand rate is not finite.
    pub pairs_skipped: usize,
    pub violations: Vec<TriangleViolation>,
}

/// Checks `BC·J_A((λ AC + μ AB)/BC) ≤ AC·J_B(λ) + AB·J_C(μ)` on every pair
/// of grid thresholds. The left side uses the lower confidence limit of
/// `J_A` at the first grid point at or above the argument (zero past the
/// grid), which underestimates it because rates decrease in `λ`; the right
/// side uses upper confidence limits. A reported violation is therefore
/// significant at the level of the intervals.
pub fn check_weak_triangle(
    sides: TriangleSides,
    directions: [&[f64]; 3],
    curves: [&RateCurve; 3],
) -> Result<TriangleReport> {
    sides.validate()?;
    for i in 0..3 {
        for j in i + 1..3 {
            let (u, v) = (directions[i], directions[j]);
            if u.len() != v.len() {
                return Err(Error::InvalidArgument("directions of different dimensions".into()));
            }
            if u.iter().zip(v).all(|(a, b)| (a - b).abs() <= 1e-9) {
                return Err(Error::InvalidArgument("triangle directions must be distinct".into()));
            }
        }
    }
    let [curve_a, curve_b, curve_c] = curves;
    let lhs_rate = |x: f64| -> f64 {
        curve_a
            .estimates
            .iter()
            .find(|e| e.lambda >= x - 1e-12)
            .map_or(0.0, |e| e.rate_interval.0)
    };
    let mut report = TriangleReport { pairs_checked: 0, pairs_skipped: 0, violations: Vec::new() };
    for b in &curve_b.estimates {
        for c in &curve_c.estimates {
            let rhs = sides.ac * b.rate_interval.1 + sides.ab * c.rate_interval.1;
            if !rhs.is_finite() {
                report.pairs_skipped += 1;
                continue;
            }
            report.pairs_checked += 1;
            let arg = (b.lambda * sides.ac + c.lambda * sides.ab) / sides.bc;
            let lhs = sides.bc * lhs_rate(arg);
            if lhs > rhs + 1e-12 {
                report.violations.push(TriangleViolation { lambda: b.lambda, mu: c.lambda, lhs, rhs });
            }
        }
    }
    Ok(report)
}
