//! Experiment configuration files.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use cutlab::capacity::{validate_law, CapacityLaw, LawReport, LawSpec};
use cutlab::estimators::{BallEventParams, CylinderSetup, TriangleSides};
use cutlab::geometry::{AxisBox, ConvexPolytope, ConvexRegion, DomainSpec, DomainSpecJson, HalfSpaceJson, JsonRational};
use cutlab::lattice::{Hyperrectangle, MemoryBudget};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DomainFlow,
    CylinderTau,
    FlowConstant,
    RateCurve,
    CutGeometry,
    BallEvents,
    TriangleCheck,
    MinimalityPanel,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::DomainFlow => "domain-flow",
            ExperimentKind::CylinderTau => "cylinder-tau",
            ExperimentKind::FlowConstant => "flow-constant",
            ExperimentKind::RateCurve => "rate-curve",
            ExperimentKind::CutGeometry => "cut-geometry",
            ExperimentKind::BallEvents => "ball-events",
            ExperimentKind::TriangleCheck => "triangle-check",
            ExperimentKind::MinimalityPanel => "minimality-panel",
        }
    }
}

/// Hyperrectangle base and axis of a cylinder. Without `frame` the direction
/// must be a coordinate axis and the base spans the other axes in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderConfig {
    pub center: Vec<f64>,
    pub sides: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<Vec<f64>>>,
    pub height: f64,
    pub direction: Vec<f64>,
}

impl CylinderConfig {
    pub fn setup(&self) -> Result<CylinderSetup, CliError> {
        let base = match &self.frame {
            Some(frame) => Hyperrectangle::new(self.center.clone(), frame.clone(), self.sides.clone())?,
            None => {
                let axis = self
                    .direction
                    .iter()
                    .position(|&c| c.abs() == 1.0)
                    .filter(|_| self.direction.iter().filter(|&&c| c != 0.0).count() == 1)
                    .ok_or_else(|| CliError::Config("a tilted cylinder needs an explicit frame".into()))?;
                Hyperrectangle::axis_aligned(self.center.clone(), axis, self.sides.clone())?
            }
        };
        Ok(CylinderSetup { base, height: self.height, direction: self.direction.clone() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    pub center: Vec<f64>,
    pub radius: f64,
    pub direction: Vec<f64>,
    pub delta: f64,
    pub zeta: f64,
}

impl BallConfig {
    pub fn params(&self) -> BallEventParams {
        BallEventParams {
            center: self.center.clone(),
            radius: self.radius,
            direction: self.direction.clone(),
            delta: self.delta,
            zeta: self.zeta,
        }
    }
}

/// A convex competitor: a box or an intersection of half-spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionConfig {
    Box {
        #[serde(rename = "box")]
        bounds: Vec<[JsonRational; 2]>,
    },
    HalfSpaces { halfspaces: Vec<HalfSpaceJson> },
}

impl RegionConfig {
    pub fn region(&self, d: usize) -> Result<ConvexRegion, CliError> {
        match self {
            RegionConfig::Box { bounds } => {
                if bounds.len() != d {
                    return Err(CliError::Config("panel box of the wrong dimension".into()));
                }
                let lo = bounds.iter().map(|b| b[0].0).collect();
                let hi = bounds.iter().map(|b| b[1].0).collect();
                Ok(ConvexRegion::Box(AxisBox::new(lo, hi)?))
            }
            RegionConfig::HalfSpaces { halfspaces } => {
                let hs = halfspaces.iter().map(|h| h.build()).collect::<cutlab::Result<Vec<_>>>()?;
                Ok(ConvexRegion::Polytope(ConvexPolytope::new(d, hs)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangleConfig {
    pub sides: SidesConfig,
    /// Exterior normals to `[BC]`, `[AC]` and `[AB]`.
    pub directions: [Vec<f64>; 3],
    /// Side length of every cylinder base.
    pub base_side: f64,
    pub height: f64,
    pub n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidesConfig {
    pub bc: f64,
    pub ac: f64,
    pub ab: f64,
}

impl From<SidesConfig> for TriangleSides {
    fn from(s: SidesConfig) -> Self {
        TriangleSides { bc: s.bc, ac: s.ac, ab: s.ab }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimalityConfig {
    /// `None` is the empty competitor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<RegionConfig>,
    /// Flow constant model `nu(v) = nu_scale · ‖v‖₁`, exact for deterministic laws.
    pub nu_scale: f64,
    /// Per-piece density; defaults to `density_scale · nu(normal)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<f64>>,
    #[serde(default = "one_f64")]
    pub density_scale: f64,
}

fn one_f64() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Write the lattice of every scale as JSON.
    #[serde(default)]
    pub dump_lattice: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DebugConfig {
    /// Perturb one capacity before each verification; the run must abort.
    #[serde(default)]
    pub corrupt_capacity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default = "one_usize")]
    pub reps: usize,
    #[serde(default)]
    pub n_list: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<LawSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_budget_mb: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpecJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cylinder: Option<CylinderConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball: Option<BallConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub panel: Vec<RegionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangle: Option<TriangleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimality: Option<MinimalityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub debug: Option<DebugConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config does not parse: {e}")))
    }

    pub fn kind(&self) -> Result<ExperimentKind, CliError> {
        self.experiment.ok_or_else(|| CliError::Config("experiment kind missing".into()))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Config("seed missing: set \"seed\" in the config or pass --seed".into()))
    }

    pub fn memory(&self) -> MemoryBudget {
        self.memory_budget_mb.map_or_else(MemoryBudget::default, |megabytes| MemoryBudget { megabytes })
    }

    pub fn corrupt_capacity(&self) -> bool {
        self.debug.as_ref().is_some_and(|d| d.corrupt_capacity)
    }

    pub fn domain(&self) -> Result<DomainSpec, CliError> {
        let json = self.domain.as_ref().ok_or_else(|| CliError::Config("domain missing".into()))?;
        Ok(json.build()?)
    }

    pub fn law(&self) -> Result<CapacityLaw, CliError> {
        let spec = self.law.as_ref().ok_or_else(|| CliError::Config("law missing".into()))?;
        Ok(spec.build()?)
    }

    /// Validates the law for dimension `d`; warnings are returned, hard
    /// violations are configuration errors.
    pub fn checked_law(&self, d: usize) -> Result<(CapacityLaw, LawReport), CliError> {
        let law = self.law()?;
        let report = validate_law(&law, d, self.critical_probability)?;
        Ok((law, report))
    }

    pub fn cylinder(&self) -> Result<CylinderSetup, CliError> {
        self.cylinder.as_ref().ok_or_else(|| CliError::Config("cylinder missing".into()))?.setup()
    }

    pub fn panel(&self, d: usize) -> Result<Vec<ConvexRegion>, CliError> {
        self.panel.iter().map(|r| r.region(d)).collect()
    }

    /// Structural checks that do not need the geometry.
    pub fn validate(&self) -> Result<(), CliError> {
        let kind = self.kind()?;
        self.seed()?;
        if self.reps == 0 {
            return Err(CliError::Config("reps must be >= 1".into()));
        }
        let needs_scales = !matches!(kind, ExperimentKind::TriangleCheck | ExperimentKind::MinimalityPanel);
        if needs_scales && self.n_list.is_empty() {
            return Err(CliError::Config("n_list must not be empty".into()));
        }
        if self.n_list.contains(&0) {
            return Err(CliError::Config("scales must be >= 1".into()));
        }
        if self.lambda_grid.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(CliError::Config("lambda_grid must be sorted ascending".into()));
        }
        if matches!(kind, ExperimentKind::RateCurve | ExperimentKind::TriangleCheck) && self.lambda_grid.is_empty() {
            return Err(CliError::Config("lambda_grid must not be empty".into()));
        }
        Ok(())
    }

    /// The config as hashed: scheduling and output location excluded.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.threads = None;
        if let Some(o) = c.output.as_mut() {
            o.dir = None;
        }
        serde_json::to_string(&c).expect("config serializes")
    }

    /// SHA-256 over `"config <len>\0<canonical json>"`, in hex.
    pub fn hash(&self) -> String {
        let body = self.canonical();
        let mut h = Sha256::new();
        h.update(format!("config {}\0", body.len()).as_bytes());
        h.update(body.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"experiment": "flow-constant", "seed": 3, "n_list": [2],
        "law": {"kind": "deterministic", "c": 1},
        "cylinder": {"center": [0, 0.5], "sides": [1], "height": 1, "direction": [1, 0]}}"#;

    #[test]
    fn parses_and_validates() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        c.validate().unwrap();
        assert_eq!(c.reps, 1);
        assert_eq!(c.cylinder().unwrap().area(), 1.0);
    }

    #[test]
    fn missing_seed_is_a_config_error() {
        let mut c = ExperimentConfig::from_json(BASE).unwrap();
        c.seed = None;
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn hash_ignores_threads_and_output_dir() {
        let a = ExperimentConfig::from_json(BASE).unwrap();
        let mut b = a.clone();
        b.threads = Some(8);
        b.output = Some(OutputConfig { dir: Some("elsewhere".into()), dump_lattice: false });
        let mut bare = a.clone();
        bare.output = Some(OutputConfig::default());
        assert_eq!(bare.hash(), b.hash());
        let mut c = a.clone();
        c.seed = Some(4);
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"experiment": "flow-constant", "sed": 1}"#).is_err());
    }
}
