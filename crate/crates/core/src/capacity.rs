//! Bounded capacity laws on a fixed rational grid, and i.i.d. capacity fields.
//!
//! Every support value is an integer multiple of `1/D`, so capacities are
//! stored as integer numerators and all flow arithmetic stays exact.

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::rational::{to_f64, JsonRational, Rational};

/// Probabilities must sum to one within this tolerance.
const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// JSON form of a law, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    Deterministic {
        c: JsonRational,
        #[serde(rename = "M", default)]
        bound: Option<JsonRational>,
    },
    /// `a` with probability `1 - p`, `b` with probability `p`.
    TwoPoint {
        a: JsonRational,
        b: JsonRational,
        p: f64,
        #[serde(rename = "M", default)]
        bound: Option<JsonRational>,
    },
    FiniteSupport {
        atoms: Vec<(JsonRational, f64)>,
        #[serde(rename = "M", default)]
        bound: Option<JsonRational>,
    },
    /// Uniform on the `steps + 1` grid points `a + j (b - a) / steps`.
    UniformQuantized {
        a: JsonRational,
        b: JsonRational,
        steps: u32,
        #[serde(rename = "M", default)]
        bound: Option<JsonRational>,
    },
}

impl LawSpec {
    pub fn build(&self) -> Result<CapacityLaw> {
        CapacityLaw::from_spec(self)
    }
}

/// A finitely supported law with values `numerator / denominator`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityLaw {
    name: String,
    /// `(numerator, probability)`, sorted by value, zero-probability atoms dropped.
    atoms: Vec<(i64, f64)>,
    cumulative: Vec<f64>,
    denominator: i64,
    bound: Rational,
}

impl CapacityLaw {
    pub fn deterministic(c: Rational) -> Result<Self> {
        Self::from_atoms("deterministic".into(), vec![(c, 1.0)], None)
    }

    pub fn two_point(a: Rational, b: Rational, p: f64) -> Result<Self> {
        Self::from_atoms("two_point".into(), vec![(a, 1.0 - p), (b, p)], None)
    }

    pub fn finite_support(atoms: Vec<(Rational, f64)>) -> Result<Self> {
        Self::from_atoms("finite_support".into(), atoms, None)
    }

    pub fn uniform_quantized(a: Rational, b: Rational, steps: u32) -> Result<Self> {
        if steps == 0 || b <= a {
            return Err(Error::InvalidLaw("uniform_quantized needs a < b and steps >= 1".into()));
        }
        let width = (b - a) / Rational::from_integer(steps as i128);
        let p = 1.0 / (steps as f64 + 1.0);
        let atoms = (0..=steps)
            .map(|j| (a + width * Rational::from_integer(j as i128), p))
            .collect();
        Self::from_atoms("uniform_quantized".into(), atoms, None)
    }

    pub fn from_spec(spec: &LawSpec) -> Result<Self> {
        let law = match spec {
            LawSpec::Deterministic { c, .. } => Self::deterministic(c.0)?,
            LawSpec::TwoPoint { a, b, p, .. } => Self::two_point(a.0, b.0, *p)?,
            LawSpec::FiniteSupport { atoms, .. } => {
                Self::finite_support(atoms.iter().map(|(v, p)| (v.0, *p)).collect())?
            }
            LawSpec::UniformQuantized { a, b, steps, .. } => Self::uniform_quantized(a.0, b.0, *steps)?,
        };
        let bound = match spec {
            LawSpec::Deterministic { bound, .. }
            | LawSpec::TwoPoint { bound, .. }
            | LawSpec::FiniteSupport { bound, .. }
            | LawSpec::UniformQuantized { bound, .. } => bound.as_ref().map(|b| b.0),
        };
        match bound {
            Some(m) => law.with_bound(m),
            None => Ok(law),
        }
    }

    fn from_atoms(name: String, atoms: Vec<(Rational, f64)>, bound: Option<Rational>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidLaw("law has no atoms".into()));
        }
        let mut total = 0.0;
        for (v, p) in &atoms {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidLaw(format!("probability {p} outside [0,1]")));
            }
            if *v < Rational::from_integer(0) {
                return Err(Error::InvalidLaw(format!("negative capacity value {v}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidLaw(format!("probabilities sum to {total}")));
        }
        let denominator = atoms.iter().fold(1i128, |acc, (v, _)| acc.lcm(v.denom()));
        let denominator = i64::try_from(denominator)
            .map_err(|_| Error::InvalidLaw("common denominator too large".into()))?;
        let mut merged: Vec<(i64, f64)> = Vec::new();
        let mut sorted: Vec<(Rational, f64)> = atoms.into_iter().filter(|(_, p)| *p > 0.0).collect();
        sorted.sort_by_key(|a| a.0);
        for (v, p) in sorted {
            let num = (v * Rational::from_integer(denominator as i128)).to_integer();
            let num = i64::try_from(num).map_err(|_| Error::InvalidLaw("capacity value too large".into()))?;
            match merged.last_mut() {
                Some(last) if last.0 == num => last.1 += p,
                _ => merged.push((num, p)),
            }
        }
        let max = Rational::new(merged.last().map_or(0, |a| a.0) as i128, denominator as i128);
        let mut cumulative = Vec::with_capacity(merged.len());
        let mut acc = 0.0;
        for (_, p) in &merged {
            acc += p;
            cumulative.push(acc);
        }
        let law = Self { name, atoms: merged, cumulative, denominator, bound: max };
        match bound {
            Some(m) => law.with_bound(m),
            None => Ok(law),
        }
    }

    /// Declares the bound `M`; support values above it are a hard error.
    pub fn with_bound(mut self, bound: Rational) -> Result<Self> {
        if self.max_value() > bound {
            return Err(Error::InvalidLaw(format!(
                "support value {} exceeds the bound M = {}",
                self.max_value(),
                bound
            )));
        }
        self.bound = bound;
        Ok(self)
    }

    /// Multiplies every support value by `factor > 0`; probabilities unchanged.
    pub fn scaled(&self, factor: Rational) -> Result<Self> {
        if factor <= Rational::from_integer(0) {
            return Err(Error::InvalidLaw("scale factor must be positive".into()));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|&(num, p)| (Rational::new(num as i128, self.denominator as i128) * factor, p))
            .collect();
        Self::from_atoms(self.name.clone(), atoms, Some(self.bound * factor))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn denominator(&self) -> i64 {
        self.denominator
    }

    /// Support as `(numerator, probability)` pairs, ascending.
    pub fn atoms(&self) -> &[(i64, f64)] {
        &self.atoms
    }

    pub fn bound(&self) -> Rational {
        self.bound
    }

    pub fn max_value(&self) -> Rational {
        Rational::new(self.atoms.last().map_or(0, |a| a.0) as i128, self.denominator as i128)
    }

    /// `δ_G`, the least support value.
    pub fn min_value(&self) -> Rational {
        Rational::new(self.atoms[0].0 as i128, self.denominator as i128)
    }

    pub fn min_value_f64(&self) -> f64 {
        to_f64(&self.min_value())
    }

    /// `G({0})`.
    pub fn atom_at_zero(&self) -> f64 {
        self.atoms.iter().filter(|a| a.0 == 0).map(|a| a.1).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(v, p)| v as f64 * p).sum::<f64>() / self.denominator as f64
    }

    /// Numerator of the value at quantile `u ∈ [0, 1)`.
    pub fn quantile_numerator(&self, u: f64) -> i64 {
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.atoms[idx.min(self.atoms.len() - 1)].0
    }

    pub fn is_deterministic(&self) -> bool {
        self.atoms.len() == 1
    }
}

/// Bond percolation thresholds. Exact for `d = 2`; numerical estimates above.
pub fn default_critical_probability(d: usize) -> Option<f64> {
    match d {
        2 => Some(0.5),
        3 => Some(0.2488),
        4 => Some(0.16013),
        5 => Some(0.11817),
        6 => Some(0.09420),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawStatus {
    Pass,
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawReport {
    pub status: LawStatus,
    pub min_value: f64,
    pub atom_at_zero: f64,
    pub critical_probability: Option<f64>,
    pub warnings: Vec<String>,
}

/// Checks boundedness (hard error) and `G({0}) < 1 - p_c(d)` (warning).
/// `critical_probability` overrides the built-in threshold for `d`.
pub fn validate_law(law: &CapacityLaw, d: usize, critical_probability: Option<f64>) -> Result<LawReport> {
    if law.max_value() > law.bound() {
        return Err(Error::InvalidLaw("support exceeds the declared bound".into()));
    }
    let pc = critical_probability.or_else(|| default_critical_probability(d));
    let atom = law.atom_at_zero();
    let mut warnings = Vec::new();
    match pc {
        Some(pc) if atom >= 1.0 - pc => warnings.push(format!(
            "G({{0}}) = {atom} >= 1 - p_c = {}: flow constant may be null",
            1.0 - pc
        )),
        Some(_) => {}
        None => warnings.push(format!("no percolation threshold configured for d = {d}")),
    }
    Ok(LawReport {
        status: if warnings.is_empty() { LawStatus::Pass } else { LawStatus::Warn },
        min_value: law.min_value_f64(),
        atom_at_zero: atom,
        critical_probability: pc,
        warnings,
    })
}

/// Per-edge capacities as integer numerators over a common denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CapacityField {
    pub numerators: Vec<i64>,
    pub denominator: i64,
    pub seed: u64,
}

impl CapacityField {
    pub fn constant(edges: usize, numerator: i64, denominator: i64) -> Self {
        Self { numerators: vec![numerator; edges], denominator, seed: 0 }
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn value(&self, edge: usize) -> f64 {
        self.numerators[edge] as f64 / self.denominator as f64
    }

    pub fn to_real(&self, numerator: i64) -> f64 {
        numerator as f64 / self.denominator as f64
    }
}

/// One uniform draw per edge, in edge order, from a ChaCha stream keyed by
/// `seed`; the value is the law's quantile at that draw.
pub fn sample_field(edges: usize, law: &CapacityLaw, seed: u64) -> CapacityField {
    let numerators = if law.is_deterministic() {
        vec![law.atoms()[0].0; edges]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..edges).map(|_| law.quantile_numerator(rng.random::<f64>())).collect()
    };
    CapacityField { numerators, denominator: law.denominator(), seed }
}

/// Seed of replicate `k` under master seed `seed`. For a fixed `seed` the map
/// is injective in `k`: an odd-multiplier step followed by a bijective mixer.
pub fn replicate_stream(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
