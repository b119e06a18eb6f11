//! Experiment configuration in TOML.
//!
//! Unknown keys are rejected at every level. The config hash is the SHA-256
//! of the canonical serialization with the output directory removed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cbc::{pod_weights, select_lambda, PodWeights};
use crate::deformation::{b_sequence, Experiment, ScalarField};
use crate::error::{Error, Result};
use crate::regularity::ModelConstants;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Truncation dimension.
    pub s: usize,
    /// Mesh width.
    pub h: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    /// QMC exponents; `n = 2^m`.
    pub m_list: Vec<u32>,
    /// Number of random shifts `R`.
    pub shifts: usize,
    #[serde(default)]
    pub seed: u64,
    /// Spatial norms whose slopes are reported: `L2`, `H10`.
    #[serde(default = "default_norms")]
    pub norms: Vec<String>,
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default)]
    pub cbc: CbcConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub constants: ModelConstants,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceConfig {
    pub f: ScalarField,
    pub u0: ScalarField,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig {
            f: ScalarField::ONE,
            u0: ScalarField::ZERO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CbcConfig {
    /// Largest lattice size; defaults to `2^max(m_list)`.
    pub n_max: Option<u64>,
    /// Summability exponent; defaults to just above `1/(theta-1)`.
    pub p: Option<f64>,
    pub eps: f64,
    /// Weight scale `C`.
    pub c: f64,
    /// Precomputed generating vector; replaces the construction.
    pub vector: Option<PathBuf>,
}

impl Default for CbcConfig {
    fn default() -> Self {
        CbcConfig {
            n_max: None,
            p: None,
            eps: 0.1,
            c: 1.0,
            vector: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationConfig {
    pub s_ref: usize,
    pub levels: Vec<usize>,
    /// Lattice size exponent used for every level.
    pub m: u32,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            s_ref: 64,
            levels: vec![2, 4, 8, 16],
            m: 10,
        }
    }
}

fn default_dt() -> f64 {
    0.1
}

fn default_t_final() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn default_norms() -> Vec<String> {
    vec!["L2".into(), "H10".into()]
}

/// Names accepted by [`ExperimentConfig::preset`].
pub const PRESETS: [&str; 8] = [
    "desk-e1", "desk-e2", "desk-e3", "desk-e4", "full-e1", "full-e2", "full-e3", "full-e4",
];

impl ExperimentConfig {
    /// Desk-scale defaults for an experiment.
    pub fn desk(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            s: 20,
            h: 0.2,
            dt: 0.1,
            t_final: 1.0,
            m_list: (4..=10).collect(),
            shifts: 8,
            seed: 1,
            norms: default_norms(),
            record_wall_time: true,
            source: SourceConfig::default(),
            cbc: CbcConfig::default(),
            truncation: TruncationConfig::default(),
            constants: ModelConstants::default(),
            output: None,
        }
    }

    /// `desk-eK` or `full-eK`. The full-scale presets (s = 100, h = 0.1,
    /// R = 16, n up to 2^14) are long-running.
    pub fn preset(name: &str) -> Result<Self> {
        let (scale, exp) = name
            .split_once('-')
            .ok_or_else(|| Error::invalid(format!("unknown preset '{name}'")))?;
        let experiment = match exp {
            "e1" => Experiment::E1,
            "e2" => Experiment::E2,
            "e3" => Experiment::E3,
            "e4" => Experiment::E4,
            _ => return Err(Error::invalid(format!("unknown preset '{name}'"))),
        };
        let mut cfg = Self::desk(experiment);
        match scale {
            "desk" => {}
            "full" => {
                cfg.s = 100;
                cfg.h = 0.1;
                cfg.shifts = 16;
                cfg.m_list = (4..=14).collect();
                cfg.truncation.s_ref = 100;
            }
            _ => return Err(Error::invalid(format!("unknown preset '{name}'"))),
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config {
            path: PathBuf::from("<string>"),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        cfg.validate().map_err(|e| Error::Config {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config {
            path: PathBuf::from("<string>"),
            msg: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        if self.s == 0 {
            return bad("s must be >= 1".into());
        }
        if !(self.h > 0.0 && self.h < 1.0) {
            return bad(format!("h must lie in (0,1), got {}", self.h));
        }
        if !(self.dt > 0.0) || !(self.t_final > 0.0) || self.dt > self.t_final {
            return bad("need 0 < dt <= t_final".into());
        }
        if self.m_list.is_empty() || self.m_list.iter().any(|&m| m == 0 || m > 30) {
            return bad("m_list entries must lie in [1, 30]".into());
        }
        if self.shifts < 2 {
            return bad("need at least 2 shifts".into());
        }
        if let Some(n) = self
            .norms
            .iter()
            .find(|n| !matches!(n.as_str(), "L2" | "H10"))
        {
            return bad(format!("unknown norm '{n}' (expected L2 or H10)"));
        }
        let c = &self.cbc;
        if let Some(n_max) = c.n_max {
            let m_max = *self.m_list.iter().max().unwrap_or(&0);
            if !n_max.is_power_of_two() || n_max < 1 << m_max {
                return bad(format!(
                    "n_max = {n_max} must be a power of two >= 2^{m_max}"
                ));
            }
        }
        if let Some(p) = c.p {
            if !(p > 0.0 && p < 1.0) {
                return bad(format!("p must lie in (0,1), got {p}"));
            }
        }
        if !(c.eps > 0.0 && c.eps < 0.5) || !(c.c > 0.0) {
            return bad("need 0 < eps < 1/2 and C > 0".into());
        }
        let t = &self.truncation;
        if t.s_ref == 0 || t.m == 0 || t.m > 30 || t.levels.iter().any(|&l| l == 0 || l > t.s_ref) {
            return bad("truncation levels must lie in [1, s_ref]".into());
        }
        self.constants.validate()
    }

    pub fn m_max(&self) -> u32 {
        self.m_list.iter().copied().max().unwrap_or(0)
    }

    /// SHA-256 of the canonical TOML without the output directory.
    pub fn hash(&self) -> Result<String> {
        let mut canon = self.clone();
        canon.output = None;
        let text = canon.to_toml()?;
        let digest = Sha256::digest(text.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    /// The `# config=<hash> seed=<seed>` line carried by every artifact.
    pub fn provenance(&self) -> Result<String> {
        Ok(format!("config={} seed={}", &self.hash()?[..16], self.seed))
    }

    pub fn default_p(&self) -> f64 {
        (1.0 / (self.experiment.theta() - 1.0) + 0.01).min(0.999)
    }

    /// Weight exponent `lambda` for the configured `p`. When the case split
    /// does not cover `(p, beta)` the `1/(2-2 eps)` branch is used with a
    /// warning.
    pub fn lambda(&self) -> Result<f64> {
        let p = self.cbc.p.unwrap_or_else(|| self.default_p());
        let beta = self.experiment.kind().beta();
        match select_lambda(p, beta, self.cbc.eps) {
            Ok(l) => Ok(l),
            Err(Error::UncoveredRegime { .. }) => {
                let l = 1.0 / (2.0 - 2.0 * self.cbc.eps);
                log::warn!("p = {p} not covered for beta = {beta}; using lambda = {l}");
                Ok(l)
            }
            Err(e) => Err(e),
        }
    }

    /// POD weights for dimension `s`.
    pub fn weights(&self, s: usize) -> Result<PodWeights> {
        let theta = self.experiment.theta();
        let b = b_sequence(theta, s)?;
        pod_weights(
            &b,
            self.cbc.c,
            self.experiment.kind().beta(),
            self.lambda()?,
            s,
        )
    }
}

/// Annotated example configuration.
pub const EXAMPLE_TOML: &str = r#"# Experiment: E1 | E2 | E3 | E4
experiment = "E1"
# truncation dimension of the perturbation field
s = 20
# mesh width of the reference disk
h = 0.2
# heat equation time step and final time
dt = 0.1
t_final = 1.0
# lattice sizes n = 2^m
m_list = [4, 5, 6, 7, 8, 9, 10]
# number of random shifts R
shifts = 8
seed = 1
# spatial norms whose slopes are printed: "L2", "H10"
norms = ["L2", "H10"]
# write per-row wall-clock seconds; off gives byte-identical reruns
record_wall_time = true
# output = "out"

[source]
f = { type = "constant", value = 1.0 }
u0 = { type = "constant", value = 0.0 }
# u0 = { type = "gaussian", amplitude = 1.0, center = [0.0, 0.0], width = 0.3 }

[cbc]
# p = 0.919          # summability exponent, default 1/(theta-1) + 0.01
eps = 0.1
c = 1.0
# n_max = 1024       # optional bound, must cover 2^max(m_list)
# vector = "z.txt"   # use a precomputed generating vector instead

[truncation]
s_ref = 64
levels = [2, 4, 8, 16]
m = 10

[constants]
c = 1.0
beta = 1.0
sigma_min = 1.0
sigma_max = 1.0
d = 2
c_f = 1.0
rho = [0.0, 0.0]
c_u0 = 1.0
c_dref = 1.0
area = 3.141592653589793
m = 1.0
c_delta_max = 1.0
c_delta = 1.0
t_final = 1.0
"#;
