use std::fmt;
use std::path::{Path, PathBuf};

use hardylab_core::curves::CurveTarget;
use hardylab_core::{
    build_domain, CandidateFamily, DomainSpec, Generator, GridDomain, HardyHypotheses, Recipe,
    ScalarField,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A bad or incomplete configuration. Maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Domain given inline or as a path to a JSON spec. Relative paths are
/// resolved against the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainRef {
    Path(PathBuf),
    Inline(DomainSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomTag {
    Random,
}

/// Uniform values on inside cells, zero elsewhere. Drawn from the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomField {
    #[serde(rename = "type")]
    pub tag: RandomTag,
    /// Values in `[-1, 1]` instead of `[0, 1]`.
    #[serde(default)]
    pub signed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Random(RandomField),
    Generator(Generator),
}

impl FieldSpec {
    pub fn build<R: Rng>(&self, d: &GridDomain, rng: &mut R) -> anyhow::Result<ScalarField> {
        Ok(match self {
            FieldSpec::Random(r) => {
                let lo = if r.signed { -1.0 } else { 0.0 };
                ScalarField::from_fn(d, |k, _| {
                    if d.is_inside(k) {
                        rng.gen_range(lo..=1.0)
                    } else {
                        0.0
                    }
                })
            }
            FieldSpec::Generator(g) => g.build(d)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    /// Start point; the containing cell is used.
    pub x: Vec<f64>,
    #[serde(default = "complement")]
    pub target: CurveTarget,
    pub nu: Option<f64>,
}

fn complement() -> CurveTarget {
    CurveTarget::Complement
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoincareConfig {
    pub c1: f64,
    pub d_half: f64,
}

fn default_p() -> Vec<f64> {
    vec![2.0]
}

fn default_samples() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: Option<DomainRef>,
    /// Exponent of the weight `dist^beta`.
    #[serde(default)]
    pub beta: f64,
    /// Weight exponents for `beta-experiment`; defaults to `[beta]`.
    #[serde(default)]
    pub betas: Vec<f64>,
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    /// Exponents for `alpha`; defaults to the `p` grid.
    #[serde(default)]
    pub q: Vec<f64>,
    pub kappa: Option<f64>,
    pub nu: Option<f64>,
    pub lambda: Option<f64>,
    #[serde(default)]
    pub tau: Vec<f64>,
    /// Level-set factors for the `maxfn` checks.
    #[serde(default)]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub corpus: Vec<Recipe>,
    pub family: Option<CandidateFamily>,
    pub field: Option<FieldSpec>,
    pub curve: Option<CurveConfig>,
    pub hypotheses: Option<HardyHypotheses>,
    pub poincare: Option<PoincareConfig>,
    /// Fractions of the certified window at which to sample `C_alpha`.
    #[serde(default)]
    pub q_fractions: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Smallest sampled radius, in cells.
    pub r_min_cells: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| config_err(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.check()?;
        Ok((cfg, base))
    }

    fn check(&self) -> anyhow::Result<()> {
        if self.p.is_empty() {
            return Err(config_err("p grid is empty"));
        }
        if self.samples == 0 {
            return Err(config_err("samples must be positive"));
        }
        Ok(())
    }

    /// The domain spec with file references resolved.
    pub fn domain_spec(&self, base: &Path) -> anyhow::Result<DomainSpec> {
        match &self.domain {
            None => Err(config_err("domain is required")),
            Some(DomainRef::Inline(s)) => Ok(s.clone()),
            Some(DomainRef::Path(p)) => {
                let full = if p.is_absolute() {
                    p.clone()
                } else {
                    base.join(p)
                };
                let text = std::fs::read_to_string(&full).map_err(|e| {
                    config_err(format!("cannot read domain {}: {e}", full.display()))
                })?;
                DomainSpec::from_json(&text)
                    .map_err(|e| config_err(format!("domain {}: {e}", full.display())))
            }
        }
    }

    pub fn domain(&self, base: &Path) -> anyhow::Result<(DomainSpec, GridDomain)> {
        let spec = self.domain_spec(base)?;
        let d = build_domain(&spec)?;
        Ok((spec, d))
    }

    pub fn need(&self, name: &str, v: Option<f64>) -> anyhow::Result<f64> {
        v.ok_or_else(|| config_err(format!("{name} is required")))
    }

    pub fn nonempty<'a>(&self, name: &str, v: &'a [f64]) -> anyhow::Result<&'a [f64]> {
        if v.is_empty() {
            Err(config_err(format!("{name} grid is empty")))
        } else {
            Ok(v)
        }
    }

    pub fn corpus_or_err(&self) -> anyhow::Result<&[Recipe]> {
        if self.corpus.is_empty() {
            Err(config_err("corpus is empty"))
        } else {
            Ok(&self.corpus)
        }
    }
}
