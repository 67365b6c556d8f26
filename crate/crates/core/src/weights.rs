//! Weights on the grid, ball measures and sampled doubling constants.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::GridDomain;
use crate::error::{LabError, Result};
use crate::util::finite_or_null;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    DistancePower { beta: f64 },
    Constant { value: f64 },
    Custom,
}

/// Nonnegative per-cell weight, positive on inside cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    values: Vec<f64>,
    kind: WeightKind,
}

impl Weight {
    pub fn constant(domain: &GridDomain, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(LabError::param(format!(
                "constant weight must be positive, got {c}"
            )));
        }
        Ok(Weight {
            values: vec![c; domain.len()],
            kind: WeightKind::Constant { value: c },
        })
    }

    pub fn from_values(domain: &GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(LabError::param("weight table size does not match the grid"));
        }
        for (k, &v) in values.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(LabError::param(format!("weight value {v} at cell {k}")));
            }
            if domain.is_inside(k) && v == 0.0 {
                return Err(LabError::param(format!(
                    "weight vanishes at inside cell {k}"
                )));
            }
        }
        Ok(Weight {
            values,
            kind: WeightKind::Custom,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// `h^n` times the sum of all values.
    pub fn total_mass(&self, domain: &GridDomain) -> f64 {
        domain.cell_volume() * self.values.iter().sum::<f64>()
    }

    /// `h^n` times the sum of values over the inside cells.
    pub fn inside_mass(&self, domain: &GridDomain) -> f64 {
        domain.cell_volume()
            * domain
                .inside_cells()
                .iter()
                .map(|&k| self.values[k])
                .sum::<f64>()
    }
}

/// `w = dist^beta`. For `beta = 0` the weight is 1 on every cell.
pub fn distance_power_weight(domain: &GridDomain, beta: f64) -> Result<Weight> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(LabError::param(format!("beta must be >= 0, got {beta}")));
    }
    let values = domain
        .dist_field()
        .iter()
        .map(|&d| {
            if beta == 0.0 {
                1.0
            } else if beta.fract() == 0.0 && beta <= 64.0 {
                d.powi(beta as i32)
            } else {
                d.powf(beta)
            }
        })
        .collect();
    Ok(Weight {
        values,
        kind: WeightKind::DistancePower { beta },
    })
}

/// Cells whose centers lie in the open ball `B(x, r)`, in raster order.
pub fn ball_cells(domain: &GridDomain, x: [f64; 2], r: f64) -> Vec<usize> {
    let h = domain.spacing();
    let o = domain.origin();
    let (nx, ny) = domain.shape();
    let range = |c: f64, o: f64, n: usize| {
        let lo = (((c - r - o) / h) - 1.0).floor().max(0.0) as usize;
        let hi = ((((c + r - o) / h) + 1.0).ceil().max(0.0) as usize).min(n);
        (lo, hi)
    };
    let (i0, i1) = range(x[0], o[0], nx);
    let (j0, j1) = if domain.dim() == 2 {
        range(x[1], o[1], ny)
    } else {
        (0, 1)
    };
    let mut out = Vec::new();
    for j in j0..j1 {
        for i in i0..i1 {
            let k = domain.index(i, j);
            let c = domain.center(k);
            if (c[0] - x[0]).powi(2) + (c[1] - x[1]).powi(2) < r * r {
                out.push(k);
            }
        }
    }
    out
}

/// `w(B(x, r))`, the midpoint-rule mass of the open ball.
pub fn measure(domain: &GridDomain, w: &Weight, x: [f64; 2], r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(LabError::param(format!("radius must be positive, got {r}")));
    }
    let cells = ball_cells(domain, x, r);
    if cells.is_empty() {
        return Err(LabError::EmptyBall {
            center: x,
            radius: r,
        });
    }
    Ok(domain.cell_volume() * cells.iter().map(|&k| w.values[k]).sum::<f64>())
}

/// `h^n` times the weight summed over an explicit cell set.
pub fn measure_cells(domain: &GridDomain, w: &Weight, cells: &[usize]) -> f64 {
    domain.cell_volume() * cells.iter().map(|&k| w.values[k]).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingSample {
    pub x: Vec<f64>,
    pub r: f64,
    #[serde(rename = "wB")]
    pub w_ball: f64,
    #[serde(rename = "wBhalf")]
    pub w_half: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub kappa: f64,
    #[serde(with = "finite_or_null")]
    pub d_hat: f64,
    pub zero_half_ball: bool,
    pub samples: Vec<DoublingSample>,
}

fn point_vec(domain: &GridDomain, p: [f64; 2]) -> Vec<f64> {
    p[..domain.dim()].to_vec()
}

/// Draw `(cell, r)` pairs with `r` uniform in `(r_min, kappa * dist]`.
fn sample_balls<R: Rng + ?Sized>(
    domain: &GridDomain,
    kappa: f64,
    r_min: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<(usize, f64)>> {
    if !(kappa > 0.0) {
        return Err(LabError::param(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    if count == 0 {
        return Err(LabError::param("sample count must be positive"));
    }
    let eligible: Vec<usize> = domain
        .inside_cells()
        .iter()
        .copied()
        .filter(|&k| kappa * domain.dist(k) > r_min)
        .collect();
    if eligible.is_empty() {
        return Err(LabError::NoValidSamples(format!(
            "no inside cell has kappa * dist > {r_min}"
        )));
    }
    Ok((0..count)
        .map(|_| {
            let k = eligible[rng.gen_range(0..eligible.len())];
            let top = kappa * domain.dist(k);
            let u: f64 = rng.gen();
            (k, top - u * (top - r_min))
        })
        .collect())
}

/// Sampled doubling constant with the default minimum radius `2h`.
pub fn doubling_constant<R: Rng + ?Sized>(
    domain: &GridDomain,
    w: &Weight,
    kappa: f64,
    sample_count: usize,
    rng: &mut R,
) -> Result<DoublingReport> {
    doubling_constant_with(domain, w, kappa, sample_count, 2.0 * domain.spacing(), rng)
}

/// Sampled doubling constant with radii drawn from `(r_min, kappa * dist(x)]`.
pub fn doubling_constant_with<R: Rng + ?Sized>(
    domain: &GridDomain,
    w: &Weight,
    kappa: f64,
    sample_count: usize,
    r_min: f64,
    rng: &mut R,
) -> Result<DoublingReport> {
    let balls = sample_balls(domain, kappa, r_min, sample_count, rng)?;
    let samples: Vec<DoublingSample> = balls
        .par_iter()
        .map(|&(k, r)| {
            let x = domain.center(k);
            Ok(DoublingSample {
                x: point_vec(domain, x),
                r,
                w_ball: measure(domain, w, x, r)?,
                w_half: measure(domain, w, x, r / 2.0)?,
            })
        })
        .collect::<Result<_>>()?;
    let zero_half_ball = samples.iter().any(|s| s.w_half <= 0.0);
    let d_hat = samples.iter().fold(1.0f64, |m, s| {
        if s.w_half > 0.0 {
            m.max(s.w_ball / s.w_half)
        } else {
            f64::INFINITY
        }
    });
    Ok(DoublingReport {
        kappa,
        d_hat,
        zero_half_ball,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparabilityReport {
    pub beta: f64,
    pub kappa: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub samples: usize,
}

/// Extremes of `w(B(x,r)) / (r^n dist(x)^beta)` for `w = dist^beta`.
pub fn comparability_check<R: Rng + ?Sized>(
    domain: &GridDomain,
    beta: f64,
    kappa: f64,
    sample_count: usize,
    rng: &mut R,
) -> Result<ComparabilityReport> {
    comparability_check_with(
        domain,
        beta,
        kappa,
        sample_count,
        2.0 * domain.spacing(),
        rng,
    )
}

pub fn comparability_check_with<R: Rng + ?Sized>(
    domain: &GridDomain,
    beta: f64,
    kappa: f64,
    sample_count: usize,
    r_min: f64,
    rng: &mut R,
) -> Result<ComparabilityReport> {
    let w = distance_power_weight(domain, beta)?;
    let balls = sample_balls(domain, kappa, r_min, sample_count, rng)?;
    let n = domain.dim() as i32;
    let ratios: Vec<f64> = balls
        .par_iter()
        .map(|&(k, r)| {
            let wb = measure(domain, &w, domain.center(k), r)?;
            Ok(wb / (r.powi(n) * w.value(k)))
        })
        .collect::<Result<_>>()?;
    Ok(ComparabilityReport {
        beta,
        kappa,
        min_ratio: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        max_ratio: ratios.iter().cloned().fold(0.0, f64::max),
        samples: ratios.len(),
    })
}
