//! Finite candidate families standing in for the class of admissible
//! integrands `{ g : M g(x) <= tau, 0 <= g <= 1 }`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::GridDomain;
use crate::error::{LabError, Result};
use crate::field::ScalarField;
use crate::maximal::maximal_at;
use crate::weights::Weight;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Generator {
    /// `c * 1{dist < t}`.
    Collar {
        t: f64,
        #[serde(default = "one")]
        c: f64,
    },
    /// Indicator of the open ball `B(center, radius)`.
    BallIndicator { center: Vec<f64>, radius: f64 },
    /// Constant `c` on every cell.
    Constant { c: f64 },
    /// Pointwise maximum of the listed generators.
    Max { of: Vec<Generator> },
    /// Uniform `[0, 1]` values, constant on `block x block` cell blocks.
    RandomSteps { block: usize, seed: u64 },
}

fn one() -> f64 {
    1.0
}

impl Generator {
    pub fn label(&self) -> String {
        match self {
            Generator::Collar { t, c } => format!("{c}*collar({t})"),
            Generator::BallIndicator { center, radius } => format!("ball({center:?},{radius})"),
            Generator::Constant { c } => format!("const({c})"),
            Generator::Max { of } => {
                let parts: Vec<String> = of.iter().map(|g| g.label()).collect();
                format!("max[{}]", parts.join(","))
            }
            Generator::RandomSteps { block, seed } => format!("steps(b={block},seed={seed})"),
        }
    }

    pub fn build(&self, domain: &GridDomain) -> Result<ScalarField> {
        let f = match self {
            Generator::Collar { t, c } => {
                if !(*c >= 0.0 && *c <= 1.0) {
                    return Err(LabError::param(format!("collar scale {c} outside [0, 1]")));
                }
                ScalarField::from_fn(domain, |k, _| if domain.dist(k) < *t { *c } else { 0.0 })
            }
            Generator::BallIndicator { center, radius } => {
                if center.len() != domain.dim() {
                    return Err(LabError::param("ball center has the wrong dimension"));
                }
                let p = [center[0], center.get(1).copied().unwrap_or(0.0)];
                ScalarField::from_fn(domain, |_, c| {
                    if (c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2) < radius * radius {
                        1.0
                    } else {
                        0.0
                    }
                })
            }
            Generator::Constant { c } => {
                if !(*c >= 0.0 && *c <= 1.0) {
                    return Err(LabError::param(format!("constant {c} outside [0, 1]")));
                }
                ScalarField::constant(domain, *c)
            }
            Generator::Max { of } => {
                if of.is_empty() {
                    return Err(LabError::param("empty max generator"));
                }
                let mut acc = of[0].build(domain)?;
                for g in &of[1..] {
                    acc = acc.zip_with(&g.build(domain)?, f64::max);
                }
                acc
            }
            Generator::RandomSteps { block, seed } => {
                if *block == 0 {
                    return Err(LabError::param("block size must be positive"));
                }
                let (nx, ny) = domain.shape();
                let bx = nx.div_ceil(*block);
                let by = ny.div_ceil(*block);
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let table: Vec<f64> = (0..bx * by).map(|_| rng.gen::<f64>()).collect();
                ScalarField::from_fn(domain, |k, _| {
                    let (i, j) = domain.coords(k);
                    table[(j / block) * bx + i / block]
                })
            }
        };
        Ok(f)
    }
}

/// Generated candidates, all valued in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFamily {
    pub generators: Vec<Generator>,
    /// Candidates are rescaled at each query point, so the family is closed
    /// under multiplication by scalars in `(0, 1]`.
    #[serde(default = "yes")]
    pub closed_under_division: bool,
}

fn yes() -> bool {
    true
}

impl CandidateFamily {
    pub fn new(generators: Vec<Generator>) -> Self {
        CandidateFamily {
            generators,
            closed_under_division: true,
        }
    }

    /// Unit collars of the given widths plus the maximum of the collars
    /// scaled by `1, 1/2, 1/3, ...`.
    pub fn collars(widths: &[f64]) -> Self {
        let mut g: Vec<Generator> = widths
            .iter()
            .map(|&t| Generator::Collar { t, c: 1.0 })
            .collect();
        if widths.len() > 1 {
            g.push(Generator::Max {
                of: widths
                    .iter()
                    .enumerate()
                    .map(|(i, &t)| Generator::Collar {
                        t,
                        c: 1.0 / (i + 1) as f64,
                    })
                    .collect(),
            });
        }
        Self::new(g)
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Build every candidate, checking the `[0, 1]` range.
    pub fn fields(&self, domain: &GridDomain) -> Result<Vec<(String, ScalarField)>> {
        if self.generators.is_empty() {
            return Err(LabError::param("candidate family is empty"));
        }
        self.generators
            .iter()
            .map(|g| {
                let f = g.build(domain)?;
                if f.values().iter().any(|v| !(*v >= 0.0 && *v <= 1.0)) {
                    return Err(LabError::param(format!("{} leaves [0, 1]", g.label())));
                }
                Ok((g.label(), f))
            })
            .collect()
    }
}

/// Scale factor `s = min(1, tau / M_{p,w,kappa} g(x))`, with `s = 0` when
/// `tau = 0` and `s = 1` when `M g(x) = 0`.
///
/// Admissibility of `s g` rests on the homogeneity of the maximal operator.
/// The rule is monotone in `tau`, and `s(c tau) <= c s(tau)` holds exactly
/// for powers of two `c`.
pub fn admissible_scale(
    domain: &GridDomain,
    w: &Weight,
    p: f64,
    kappa: f64,
    tau: f64,
    g: &ScalarField,
    x: usize,
) -> Result<f64> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(LabError::param(format!(
            "tau must be finite and >= 0, got {tau}"
        )));
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    let mg = maximal_at(domain, g, p, w, kappa, None, x)?;
    if mg == 0.0 {
        return Ok(1.0);
    }
    Ok((tau / mg).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, DomainSpec};
    use crate::weights::distance_power_weight;

    #[test]
    fn generators_stay_in_unit_range() {
        let d = build_domain(&DomainSpec::unit_square(1.0 / 16.0)).unwrap();
        let fam = CandidateFamily::new(vec![
            Generator::Collar { t: 0.2, c: 1.0 },
            Generator::BallIndicator {
                center: vec![0.5, 0.5],
                radius: 0.2,
            },
            Generator::Constant { c: 0.5 },
            Generator::RandomSteps { block: 3, seed: 11 },
            Generator::Max {
                of: vec![
                    Generator::Collar { t: 0.1, c: 0.5 },
                    Generator::RandomSteps { block: 2, seed: 1 },
                ],
            },
        ]);
        let fields = fam.fields(&d).unwrap();
        assert_eq!(fields.len(), 5);
        assert!(Generator::Constant { c: 2.0 }.build(&d).is_err());
    }

    #[test]
    fn rescaling_enforces_tau() {
        let d = build_domain(&DomainSpec::unit_square(1.0 / 16.0)).unwrap();
        let w = distance_power_weight(&d, 1.0).unwrap();
        let g = Generator::RandomSteps { block: 2, seed: 5 }
            .build(&d)
            .unwrap();
        for &x in d.inside_cells().iter().step_by(11) {
            for tau in [0.0, 0.1, 0.3, 0.7, 1.0] {
                let s = admissible_scale(&d, &w, 2.0, 2.0, tau, &g, x).unwrap();
                assert!((0.0..=1.0).contains(&s));
                let m = maximal_at(&d, &g.scaled(s), 2.0, &w, 2.0, None, x).unwrap();
                assert!(m <= tau * (1.0 + 1e-15), "{m} > {tau}");
                let s2 = admissible_scale(&d, &w, 2.0, 2.0, 2.0 * tau, &g, x).unwrap();
                assert!(s2 >= s && s2 <= 2.0 * s);
            }
        }
    }
}
