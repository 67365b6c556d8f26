//! Test functions vanishing off the domain, paired with upper gradients.
//!
//! Each recipe supplies `g` in closed form, dilated by one stencil reach so
//! that the neighbour-pair inequality
//! `|u(a) - u(b)| <= (g(a) + g(b)) / 2 * |a - b|`
//! holds without a discretization allowance.

use serde::{Deserialize, Serialize};

use crate::domain::GridDomain;
use crate::error::{LabError, Result};
use crate::field::ScalarField;

/// Relative allowance for floating-point rounding in the pair check.
const ROUNDING: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Recipe {
    /// `u = dist`, `g = 1`.
    Dist,
    /// `u = min(dist / eps, 1)`.
    Collar { eps: f64 },
    /// `u = dist^s` for `s >= 1`.
    DistPower { s: f64 },
    /// Product of coordinate tents of half-width `radius` around `center`.
    TentBump { center: Vec<f64>, radius: f64 },
    /// Logarithmic cutoff around `center`: 0 inside radius
    /// `inner_cells * h`, 1 outside `outer`, combined with a linear collar of
    /// width `boundary_eps` along the closed box sides.
    LogCutoff {
        center: Vec<f64>,
        inner_cells: f64,
        outer: f64,
        boundary_eps: f64,
    },
}

impl Recipe {
    pub fn label(&self) -> String {
        match self {
            Recipe::Dist => "dist".into(),
            Recipe::Collar { eps } => format!("collar(eps={eps})"),
            Recipe::DistPower { s } => format!("dist^{s}"),
            Recipe::TentBump { center, radius } => format!("tent({center:?},{radius})"),
            Recipe::LogCutoff {
                inner_cells, outer, ..
            } => format!("logcut(inner={inner_cells}h,outer={outer})"),
        }
    }

    /// Evaluate `(u, g)` on the grid.
    pub fn build(&self, domain: &GridDomain) -> Result<CorpusEntry> {
        let reach = domain.reach();
        let bad = |reason: &str| LabError::InvalidTestFunction {
            label: self.label(),
            reason: reason.into(),
        };
        let (u, g) = match self {
            Recipe::Dist => (
                ScalarField::new(domain.dist_field().to_vec()),
                ScalarField::constant(domain, 1.0),
            ),
            Recipe::Collar { eps } => {
                if !(*eps > 0.0) {
                    return Err(bad("eps must be positive"));
                }
                let e = *eps;
                (
                    ScalarField::from_fn(domain, |k, _| (domain.dist(k) / e).min(1.0)),
                    ScalarField::from_fn(domain, |k, _| {
                        if domain.dist(k) < e + reach {
                            1.0 / e
                        } else {
                            0.0
                        }
                    }),
                )
            }
            Recipe::DistPower { s } => {
                if !(*s >= 1.0) {
                    return Err(bad("exponent must be >= 1"));
                }
                let s = *s;
                (
                    ScalarField::from_fn(domain, |k, _| domain.dist(k).powf(s)),
                    ScalarField::from_fn(domain, |k, _| s * (domain.dist(k) + reach).powf(s - 1.0)),
                )
            }
            Recipe::TentBump { center, radius } => {
                let n = domain.dim();
                if center.len() != n || !(*radius > 0.0) {
                    return Err(bad(
                        "center must match the dimension and radius be positive",
                    ));
                }
                let rho = *radius;
                let slope = (n as f64).sqrt() / rho;
                let u = ScalarField::from_fn(domain, |_, c| {
                    (0..n)
                        .map(|a| (1.0 - (c[a] - center[a]).abs() / rho).max(0.0))
                        .product()
                });
                let g = ScalarField::from_fn(domain, |_, c| {
                    if (0..n).all(|a| (c[a] - center[a]).abs() < rho + reach) {
                        slope
                    } else {
                        0.0
                    }
                });
                (u, g)
            }
            Recipe::LogCutoff {
                center,
                inner_cells,
                outer,
                boundary_eps,
            } => {
                let n = domain.dim();
                let e1 = inner_cells * domain.spacing();
                let (e2, eb) = (*outer, *boundary_eps);
                if center.len() != n || !(e1 > 0.0 && e2 > e1 && eb > 0.0) {
                    return Err(bad("need 0 < inner < outer and a positive boundary width"));
                }
                let p = [center[0], if n == 2 { center[1] } else { 0.0 }];
                let big_l = (e2 / e1).ln();
                let rho = |c: [f64; 2]| ((c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2)).sqrt();
                let box_dist = |k: usize| {
                    domain
                        .closed_side_distances(k)
                        .iter()
                        .map(|s| s.1)
                        .fold(f64::INFINITY, f64::min)
                };
                let u = ScalarField::from_fn(domain, |k, c| {
                    let psi = ((rho(c) / e1).ln() / big_l).clamp(0.0, 1.0);
                    psi.min((box_dist(k) / eb).min(1.0))
                });
                let g = ScalarField::from_fn(domain, |k, c| {
                    let r = rho(c);
                    let g_log = if r < e2 + reach && r > e1 - reach {
                        1.0 / (big_l * (r - reach).max(e1))
                    } else {
                        0.0
                    };
                    let g_box = if box_dist(k) < eb + reach {
                        1.0 / eb
                    } else {
                        0.0
                    };
                    g_log.max(g_box)
                });
                (u, g)
            }
        };
        let u = ScalarField::from_fn(domain, |k, _| if domain.is_inside(k) { u[k] } else { 0.0 });
        Ok(CorpusEntry {
            label: self.label(),
            u,
            g,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub label: String,
    pub u: ScalarField,
    pub g: ScalarField,
}

/// Largest violation of the neighbour-pair inequality, as
/// `|u(a)-u(b)| - (g(a)+g(b))/2 |a-b|` divided by `|a-b|`; `<= 0` means valid.
pub fn pair_violation(domain: &GridDomain, u: &ScalarField, g: &ScalarField) -> f64 {
    let h = domain.spacing();
    let mut worst = f64::NEG_INFINITY;
    for a in 0..domain.len() {
        for m in domain.moves() {
            let Some(b) = domain.neighbor(a, m) else {
                continue;
            };
            if b < a {
                continue;
            }
            let len = m.kind.unit_length() * h;
            let lhs = (u[a] - u[b]).abs();
            let rhs = 0.5 * (g[a] + g[b]) * len;
            worst = worst.max((lhs - rhs - ROUNDING * lhs.max(rhs)) / len);
        }
    }
    worst
}

/// Check vanishing on the complement, `g >= 0`, and the pair inequality
/// with allowance `tol` (per unit length).
pub fn validate_entry(domain: &GridDomain, e: &CorpusEntry, tol: f64) -> Result<()> {
    let bad = |reason: String| LabError::InvalidTestFunction {
        label: e.label.clone(),
        reason,
    };
    e.u.check_len(domain, "u")?;
    e.g.check_len(domain, "g")?;
    for k in 0..domain.len() {
        if !e.u[k].is_finite() {
            return Err(bad(format!("u is not finite at cell {k}")));
        }
        if !domain.is_inside(k) && e.u[k] != 0.0 {
            return Err(bad(format!("u does not vanish at complement cell {k}")));
        }
        if !(e.g[k] >= 0.0 && e.g[k].is_finite()) {
            return Err(bad(format!("g = {} at cell {k}", e.g[k])));
        }
    }
    let v = pair_violation(domain, &e.u, &e.g);
    if v > tol {
        return Err(bad(format!("neighbour-pair inequality fails by {v}")));
    }
    Ok(())
}

/// A validated list of `(u, g)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionCorpus {
    entries: Vec<CorpusEntry>,
}

impl TestFunctionCorpus {
    pub fn from_recipes(domain: &GridDomain, recipes: &[Recipe]) -> Result<Self> {
        let entries = recipes
            .iter()
            .map(|r| r.build(domain))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(domain, entries, 0.0)
    }

    pub fn from_entries(domain: &GridDomain, entries: Vec<CorpusEntry>, tol: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(LabError::param("corpus is empty"));
        }
        for e in &entries {
            validate_entry(domain, e, tol)?;
        }
        Ok(TestFunctionCorpus { entries })
    }

    /// Skip validation, e.g. for hand-written pairs whose gradient is not
    /// dilated.
    pub fn from_entries_unchecked(entries: Vec<CorpusEntry>) -> Self {
        TestFunctionCorpus { entries }
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
