use std::collections::BTreeSet;

use num_traits::Zero;
use serde::Serialize;

use super::rational::Rational;
use crate::error::{Error, Result};

/// Union of lattice cubes `z/n + [-1/(2n), 1/(2n)]^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoxelSet {
    dim: usize,
    scale: u32,
    points: BTreeSet<Vec<i64>>,
}

impl VoxelSet {
    pub fn new(dim: usize, scale: u32) -> Self {
        Self { dim, scale, points: BTreeSet::new() }
    }

    pub fn from_points(dim: usize, scale: u32, points: impl IntoIterator<Item = Vec<i64>>) -> Result<Self> {
        let points: BTreeSet<Vec<i64>> = points.into_iter().collect();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidArgument("voxel of the wrong dimension".into()));
        }
        Ok(Self { dim, scale, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.points.iter()
    }

    pub fn insert(&mut self, z: Vec<i64>) -> bool {
        self.points.insert(z)
    }

    pub fn contains_index(&self, z: &[i64]) -> bool {
        self.points.contains(z)
    }

    /// Whether the lattice point `x ∈ ℤ_n^d` (given in real coordinates) is
    /// one of the voxel centres.
    pub fn contains_lattice_point(&self, x: &[Rational]) -> bool {
        let n = Rational::from_integer(self.scale as i128);
        let mut z = Vec::with_capacity(x.len());
        for c in x {
            let scaled = c * n;
            if !scaled.is_integer() {
                return false;
            }
            z.push(scaled.to_integer() as i64);
        }
        self.points.contains(&z)
    }

    fn cell_volume(&self) -> Rational {
        Rational::new(1, (self.scale as i128).pow(self.dim as u32))
    }

    /// `card / n^d`.
    pub fn lebesgue_measure(&self) -> Rational {
        if self.points.is_empty() {
            return Rational::zero();
        }
        self.cell_volume() * Rational::from_integer(self.points.len() as i128)
    }

    /// `L^d(A Δ B) = card(A Δ B) / n^d`.
    pub fn symdiff_distance(&self, other: &VoxelSet) -> Result<Rational> {
        if self.scale != other.scale {
            return Err(Error::ScaleMismatch(self.scale, other.scale));
        }
        if self.dim != other.dim {
            return Err(Error::InvalidArgument("dimension mismatch".into()));
        }
        let count = self.points.symmetric_difference(&other.points).count();
        Ok(self.cell_volume() * Rational::from_integer(count as i128))
    }

    /// Run-length encoding along the last coordinate.
    pub fn to_rle(&self) -> VoxelRle {
        let mut runs: Vec<VoxelRun> = Vec::new();
        for p in &self.points {
            let (prefix, last) = p.split_at(self.dim - 1);
            if let Some(run) = runs.last_mut() {
                if run.prefix == prefix && run.start + run.len as i64 == last[0] {
                    run.len += 1;
                    continue;
                }
            }
            runs.push(VoxelRun { prefix: prefix.to_vec(), start: last[0], len: 1 });
        }
        VoxelRle { d: self.dim, n: self.scale, runs }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VoxelRun {
    pub prefix: Vec<i64>,
    pub start: i64,
    pub len: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VoxelRle {
    pub d: usize,
    pub n: u32,
    pub runs: Vec<VoxelRun>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(n: u32, pts: &[[i64; 2]]) -> VoxelSet {
        VoxelSet::from_points(2, n, pts.iter().map(|p| p.to_vec())).unwrap()
    }

    #[test]
    fn measures() {
        assert_eq!(VoxelSet::new(2, 4).lebesgue_measure(), Rational::zero());
        assert_eq!(set(2, &[[0, 0]]).lebesgue_measure(), Rational::new(1, 4));
        assert_eq!(set(2, &[[0, 0], [1, 0], [0, 1]]).lebesgue_measure(), Rational::new(3, 4));
    }

    #[test]
    fn symdiff_cases() {
        let a = set(2, &[[0, 0], [1, 0]]);
        assert_eq!(a.symdiff_distance(&a).unwrap(), Rational::zero());
        assert_eq!(
            set(1, &[[0, 0]]).symdiff_distance(&set(1, &[[5, 5]])).unwrap(),
            Rational::from_integer(2)
        );
        let b = set(2, &[[1, 0], [2, 0]]);
        assert_eq!(a.symdiff_distance(&b).unwrap(), Rational::new(1, 2));
        assert!(matches!(a.symdiff_distance(&set(3, &[])), Err(Error::ScaleMismatch(2, 3))));
    }

    #[test]
    fn lattice_membership() {
        let a = set(2, &[[1, 2]]);
        assert!(a.contains_lattice_point(&[Rational::new(1, 2), Rational::from_integer(1)]));
        assert!(!a.contains_lattice_point(&[Rational::new(1, 3), Rational::from_integer(1)]));
    }

    #[test]
    fn rle_runs() {
        let a = set(2, &[[0, 0], [0, 1], [0, 2], [0, 4], [1, 0]]);
        let rle = a.to_rle();
        assert_eq!(rle.runs.len(), 3);
        assert_eq!(rle.runs[0], VoxelRun { prefix: vec![0], start: 0, len: 3 });
    }

    fn arb_set() -> impl Strategy<Value = VoxelSet> {
        proptest::collection::btree_set(proptest::array::uniform2(-3i64..3), 0..12)
            .prop_map(|s| VoxelSet::from_points(2, 3, s.into_iter().map(|p| p.to_vec())).unwrap())
    }

    proptest! {
        #[test]
        fn symdiff_is_a_pseudometric(a in arb_set(), b in arb_set(), c in arb_set()) {
            let ab = a.symdiff_distance(&b).unwrap();
            prop_assert_eq!(ab, b.symdiff_distance(&a).unwrap());
            prop_assert_eq!(a.symdiff_distance(&a).unwrap(), Rational::zero());
            prop_assert!(a.symdiff_distance(&c).unwrap() <= ab + b.symdiff_distance(&c).unwrap());
        }

        #[test]
        fn measure_is_additive_on_disjoint_sets(a in arb_set(), b in arb_set()) {
            let only_b: Vec<Vec<i64>> = b.points().filter(|p| !a.contains_index(p)).cloned().collect();
            let b2 = VoxelSet::from_points(2, 3, only_b.clone()).unwrap();
            let union = VoxelSet::from_points(2, 3, a.points().cloned().chain(only_b)).unwrap();
            prop_assert_eq!(union.lebesgue_measure(), a.lebesgue_measure() + b2.lebesgue_measure());
        }
    }
}
