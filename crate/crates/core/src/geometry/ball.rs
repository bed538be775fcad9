//! Euclidean balls and spherical caps. Distances here are computed to an
//! absolute tolerance rather than exactly.

use crate::error::{Error, Result};

/// Absolute tolerance for predicates involving balls.
pub const BALL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGeometry(format!("bad ball radius {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dist2(x, &self.center) <= self.radius + BALL_TOLERANCE
    }

    /// `L^∞` distance from `x` to the closed ball: the smallest `t` such that
    /// the cube of half-side `t` around `x` meets the ball.
    pub fn linf_distance(&self, x: &[f64]) -> f64 {
        let r2 = self.radius * self.radius;
        let gap = |t: f64| -> f64 {
            x.iter()
                .zip(&self.center)
                .map(|(a, c)| ((a - c).abs() - t).max(0.0).powi(2))
                .sum()
        };
        if gap(0.0) <= r2 {
            return 0.0;
        }
        let hi = x
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c).abs())
            .fold(0.0, f64::max);
        bisect(0.0, hi, |t| gap(t) <= r2)
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.center.iter().map(|c| c - self.radius).collect(),
            self.center.iter().map(|c| c + self.radius).collect(),
        )
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.radius.powi(self.dim() as i32)
    }
}

/// The part `{ y : |y - c| = r, (y - c)·axis >= min_cos · r }` of a sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Cap {
    pub ball: Ball,
    pub axis: Vec<f64>,
    pub min_cos: f64,
}

impl Cap {
    pub fn new(ball: Ball, axis: Vec<f64>, min_cos: f64) -> Result<Self> {
        let norm = axis.iter().map(|c| c * c).sum::<f64>().sqrt();
        if axis.len() != ball.dim() || !(norm > 0.0) {
            return Err(Error::InvalidGeometry("cap axis must be a nonzero vector".into()));
        }
        if !(-1.0..=1.0).contains(&min_cos) {
            return Err(Error::InvalidGeometry(format!("cap min_cos {min_cos} outside [-1,1]")));
        }
        let axis = axis.into_iter().map(|c| c / norm).collect();
        Ok(Self { ball, axis, min_cos })
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        let c = &self.ball.center;
        let r = self.ball.radius;
        let on_sphere = (dist2(y, c) - r).abs() <= BALL_TOLERANCE;
        let height: f64 = y.iter().zip(c).zip(&self.axis).map(|((a, b), u)| (a - b) * u).sum();
        on_sphere && height >= self.min_cos * r - BALL_TOLERANCE
    }

    /// Smallest `t` such that the cube of half-side `t` around `x` meets the
    /// cap, found by bisection on a monotone feasibility test.
    pub fn linf_distance(&self, x: &[f64]) -> f64 {
        let hi = x
            .iter()
            .zip(&self.ball.center)
            .map(|(a, c)| (a - c).abs())
            .fold(0.0, f64::max)
            + self.ball.radius;
        if self.cube_meets(x, 0.0) {
            return 0.0;
        }
        bisect(0.0, hi, |t| self.cube_meets(x, t))
    }

    fn cube_meets(&self, x: &[f64], t: f64) -> bool {
        let d = x.len();
        let c = &self.ball.center;
        let r = self.ball.radius;
        let u = &self.axis;
        let level = self.min_cos * r;
        let lo: Vec<f64> = x.iter().map(|v| v - t).collect();
        let hi: Vec<f64> = x.iter().map(|v| v + t).collect();
        let clamp = |p: &[f64]| -> Vec<f64> {
            p.iter().enumerate().map(|(i, v)| v.clamp(lo[i], hi[i])).collect()
        };
        let height = |p: &[f64]| -> f64 { p.iter().zip(c).zip(u).map(|((a, b), w)| (a - b) * w).sum() };

        // K = cube ∩ {height >= level}; nonempty?
        let top: Vec<f64> = (0..d).map(|i| if u[i] >= 0.0 { hi[i] } else { lo[i] }).collect();
        if height(&top) < level - BALL_TOLERANCE {
            return false;
        }
        // nearest point of K to the centre
        let mut nearest = clamp(c);
        if height(&nearest) < level {
            let along = |mu: f64| -> Vec<f64> {
                let p: Vec<f64> = c.iter().zip(u).map(|(a, w)| a + mu * w).collect();
                clamp(&p)
            };
            let mut mu_hi = 1.0;
            while height(&along(mu_hi)) < level && mu_hi < 1e12 {
                mu_hi *= 2.0;
            }
            let mu = bisect(0.0, mu_hi, |mu| height(&along(mu)) >= level);
            nearest = along(mu);
        }
        if dist2(&nearest, c) > r + BALL_TOLERANCE {
            return false;
        }
        // farthest point of K: a vertex, i.e. a cube corner in the half-space
        // or a cube edge crossing the bounding hyperplane.
        let mut far = 0.0f64;
        for mask in 0..(1u32 << d) {
            let corner: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect();
            if height(&corner) >= level - BALL_TOLERANCE {
                far = far.max(dist2(&corner, c));
            }
            for axis in 0..d {
                if mask >> axis & 1 == 1 || u[axis].abs() < 1e-300 {
                    continue;
                }
                let mut p = corner.clone();
                let rest: f64 = (0..d).filter(|&j| j != axis).map(|j| (p[j] - c[j]) * u[j]).sum();
                let coord = c[axis] + (level - rest) / u[axis];
                if coord >= lo[axis] && coord <= hi[axis] {
                    p[axis] = coord;
                    far = far.max(dist2(&p, c));
                }
            }
        }
        far >= r - BALL_TOLERANCE
    }
}

fn bisect(mut lo: f64, mut hi: f64, ok: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Volume of the unit ball in dimension `d` (`α_d`).
pub fn unit_ball_volume(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_distance_cases() {
        let b = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(b.linf_distance(&[0.5, 0.0]), 0.0);
        assert!((b.linf_distance(&[2.0, 0.0]) - 1.0).abs() < 1e-12);
        // along the diagonal the nearest sphere point is (1/√2, 1/√2)
        let expected = 2.0 - 1.0 / 2f64.sqrt();
        assert!((b.linf_distance(&[2.0, 2.0]) - expected).abs() < 1e-12);
    }

    #[test]
    fn full_sphere_cap_matches_distance_outside() {
        let b = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        let cap = Cap::new(b.clone(), vec![1.0, 0.0], -1.0).unwrap();
        for p in [[2.0, 0.0], [2.0, 2.0], [-1.5, 0.3]] {
            assert!((cap.linf_distance(&p) - b.linf_distance(&p)).abs() < 1e-9);
        }
        // inside the ball the sphere is at distance > 0
        assert!((cap.linf_distance(&[0.0, 0.0]) - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn half_circle_cap() {
        let b = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        let right = Cap::new(b, vec![1.0, 0.0], 0.0).unwrap();
        assert!(right.contains(&[1.0, 0.0]));
        assert!(!right.contains(&[-1.0, 0.0]));
        assert!(right.linf_distance(&[1.0, 0.0]) < 1e-12);
        // from (-1, 0) the closest points of the right half circle are (0, ±1)
        assert!((right.linf_distance(&[-1.0, 0.0]) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(5) - 8.0 * std::f64::consts::PI.powi(2) / 15.0).abs() < 1e-12);
    }
}
