use std::fmt::Write as _;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::domain::GridDomain;
use crate::error::{LabError, Result};

/// Per-cell real values on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        ScalarField { values }
    }

    pub fn constant(domain: &GridDomain, c: f64) -> Self {
        ScalarField::new(vec![c; domain.len()])
    }

    pub fn zeros(domain: &GridDomain) -> Self {
        Self::constant(domain, 0.0)
    }

    /// Evaluate `f(idx, center)` on every cell.
    pub fn from_fn(domain: &GridDomain, mut f: impl FnMut(usize, [f64; 2]) -> f64) -> Self {
        ScalarField::new((0..domain.len()).map(|k| f(k, domain.center(k))).collect())
    }

    /// Indicator of the inside cells satisfying `pred`.
    pub fn indicator(domain: &GridDomain, pred: impl Fn(usize) -> bool) -> Self {
        ScalarField::from_fn(domain, |k, _| {
            if domain.is_inside(k) && pred(k) {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len());
        ScalarField::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn check_len(&self, domain: &GridDomain, what: &str) -> Result<()> {
        if self.len() != domain.len() {
            return Err(LabError::param(format!(
                "{what} has {} values, grid has {} cells",
                self.len(),
                domain.len()
            )));
        }
        Ok(())
    }

    /// CSV with header `x,y,value`.
    pub fn to_csv(&self, domain: &GridDomain) -> String {
        let mut out = String::from("x,y,value\n");
        for (k, v) in self.values.iter().enumerate() {
            let c = domain.center(k);
            let _ = writeln!(out, "{},{},{}", c[0], c[1], v);
        }
        out
    }
}

impl Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.values[k]
    }
}

/// Scalar parameters shared by the experiments. Unset fields are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentParams {
    pub p: Option<f64>,
    pub p0: Option<f64>,
    pub q: Option<f64>,
    pub kappa: Option<f64>,
    pub nu: Option<f64>,
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub level: Option<f64>,
    pub radius_cap: Option<f64>,
    pub beta: Option<f64>,
}

impl ExperimentParams {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: Option<f64>, ok: fn(f64) -> bool, req: &str| match v {
            Some(x) if !ok(x) => Err(LabError::param(format!("{name} = {x} must be {req}"))),
            _ => Ok(()),
        };
        check("p", self.p, |x| x >= 1.0, ">= 1")?;
        check("p0", self.p0, |x| x >= 1.0, ">= 1")?;
        check("q", self.q, |x| x >= 1.0, ">= 1")?;
        check("kappa", self.kappa, |x| x > 0.0, "> 0")?;
        check("nu", self.nu, |x| x >= 1.0, ">= 1")?;
        check("lambda", self.lambda, |x| x >= 1.0, ">= 1")?;
        check("tau", self.tau, |x| x >= 0.0, ">= 0")?;
        check("level", self.level, |x| x >= 0.0, ">= 0")?;
        check("radius_cap", self.radius_cap, |x| x > 0.0, "> 0")?;
        check("beta", self.beta, |x| x >= 0.0, ">= 0")?;
        if let (Some(p0), Some(q), Some(p)) = (self.p0, self.q, self.p) {
            if !(p0 < q && q < p) {
                return Err(LabError::param(format!(
                    "need p0 < q < p, got {p0}, {q}, {p}"
                )));
            }
        }
        Ok(())
    }

    /// `kappa`, additionally required to exceed 1.
    pub fn kappa_gt_one(&self) -> Result<f64> {
        match self.kappa {
            Some(k) if k > 1.0 => Ok(k),
            Some(k) => Err(LabError::param(format!("kappa = {k} must exceed 1"))),
            None => Err(LabError::param("kappa is required")),
        }
    }
}
