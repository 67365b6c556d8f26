//! Restricted weighted maximal operators on the grid.
//!
//! At an inside cell `x` the admissible radii are `r_j = j h` for `j >= 1`
//! with `r_j < min(kappa * dist(x), R)`. A cell belongs to `B(x, r_j)` iff its
//! integer offset `(di, dj)` from `x` satisfies `di^2 + dj^2 < j^2`. When no
//! radius is admissible the operator returns `|f(x)|`.
//!
//! Ball sums are accumulated over offsets sorted by `(di^2 + dj^2, dj, di)`,
//! so every ball is summed in one fixed order. The weighted `p`-mean is then
//! clamped to the range of `|f|` over the cells of positive weight, which is
//! where the exact mean lies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::GridDomain;
use crate::error::{LabError, Result};
use crate::field::ScalarField;
use crate::weights::{measure_cells, Weight};

#[derive(Debug, Clone, Copy)]
struct Offset {
    di: i64,
    dj: i64,
    d2: i64,
}

/// Offsets with `di^2 + dj^2 < jmax^2` in canonical order.
fn offset_table(dim: usize, jmax: usize) -> Vec<Offset> {
    let r = jmax as i64;
    let jr = if dim == 2 { r } else { 0 };
    let mut out = Vec::new();
    for dj in -jr..=jr {
        for di in -r..=r {
            let d2 = di * di + dj * dj;
            if d2 < r * r {
                out.push(Offset { di, dj, d2 });
            }
        }
    }
    out.sort_by_key(|o| (o.d2, o.dj, o.di));
    out
}

/// Number of admissible radii `j h < min(kappa dist(x), cap)`.
pub fn radius_count(domain: &GridDomain, kappa: f64, cap: Option<f64>, idx: usize) -> usize {
    let limit = (kappa * domain.dist(idx)).min(cap.unwrap_or(f64::INFINITY));
    let h = domain.spacing();
    let mut j = 0usize;
    while ((j + 1) as f64) * h < limit {
        j += 1;
    }
    j
}

#[inline]
fn pow_abs(v: f64, p: f64) -> f64 {
    let a = v.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        a.powf(p)
    }
}

#[inline]
fn root(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v
    } else if p == 2.0 {
        v.sqrt()
    } else {
        v.powf(1.0 / p)
    }
}

fn check_inputs(
    domain: &GridDomain,
    f: &ScalarField,
    p: f64,
    w: &Weight,
    kappa: f64,
) -> Result<()> {
    f.check_len(domain, "field")?;
    if w.values().len() != domain.len() {
        return Err(LabError::param("weight size does not match the grid"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(LabError::param(format!("p must be >= 1, got {p}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(LabError::param(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    Ok(())
}

fn eval_cell(
    domain: &GridDomain,
    f: &[f64],
    p: f64,
    w: &[f64],
    offsets: &[Offset],
    idx: usize,
    jmax: usize,
) -> f64 {
    if jmax == 0 {
        return f[idx].abs();
    }
    let (nx, ny) = domain.shape();
    let (i0, j0) = domain.coords(idx);
    let (mut num, mut den) = (0.0f64, 0.0f64);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut best = 0.0f64;
    let mut j = 1usize;
    let finish = |num: f64, den: f64, lo: f64, hi: f64| -> f64 {
        if den > 0.0 {
            root(num / den, p).clamp(lo, hi)
        } else {
            0.0
        }
    };
    for o in offsets {
        while o.d2 >= (j * j) as i64 {
            best = best.max(finish(num, den, lo, hi));
            j += 1;
            if j > jmax {
                return best;
            }
        }
        let ci = i0 as i64 + o.di;
        let cj = j0 as i64 + o.dj;
        if ci < 0 || cj < 0 || ci >= nx as i64 || cj >= ny as i64 {
            continue;
        }
        let k = cj as usize * nx + ci as usize;
        let wk = w[k];
        if wk > 0.0 {
            let a = f[k].abs();
            num += wk * pow_abs(a, p);
            den += wk;
            lo = lo.min(a);
            hi = hi.max(a);
        }
    }
    while j <= jmax {
        best = best.max(finish(num, den, lo, hi));
        j += 1;
    }
    best
}

fn maximal_impl(
    domain: &GridDomain,
    f: &ScalarField,
    p: f64,
    w: &Weight,
    kappa: f64,
    cap: Option<f64>,
) -> Result<ScalarField> {
    check_inputs(domain, f, p, w, kappa)?;
    let cells = domain.inside_cells();
    let counts: Vec<usize> = cells
        .iter()
        .map(|&k| radius_count(domain, kappa, cap, k))
        .collect();
    let jmax = counts.iter().copied().max().unwrap_or(0);
    let offsets = offset_table(domain.dim(), jmax);
    let vals: Vec<f64> = cells
        .par_iter()
        .zip(counts.par_iter())
        .map(|(&k, &jm)| eval_cell(domain, f.values(), p, w.values(), &offsets, k, jm))
        .collect();
    let mut out = vec![0.0; domain.len()];
    for (&k, v) in cells.iter().zip(vals) {
        out[k] = v;
    }
    Ok(ScalarField::new(out))
}

/// `M_{p,w,kappa} f` on the inside cells; complement cells are 0.
pub fn maximal(
    domain: &GridDomain,
    f: &ScalarField,
    p: f64,
    w: &Weight,
    kappa: f64,
) -> Result<ScalarField> {
    maximal_impl(domain, f, p, w, kappa, None)
}

/// `M^R_{p,w,kappa} f`: radii are additionally required to be `< R`.
pub fn maximal_capped(
    domain: &GridDomain,
    f: &ScalarField,
    p: f64,
    w: &Weight,
    kappa: f64,
    r_cap: f64,
) -> Result<ScalarField> {
    if !(r_cap > 0.0) {
        return Err(LabError::param(format!(
            "radius cap must be positive, got {r_cap}"
        )));
    }
    maximal_impl(domain, f, p, w, kappa, Some(r_cap))
}

/// The maximal function at a single inside cell.
pub fn maximal_at(
    domain: &GridDomain,
    f: &ScalarField,
    p: f64,
    w: &Weight,
    kappa: f64,
    r_cap: Option<f64>,
    idx: usize,
) -> Result<f64> {
    check_inputs(domain, f, p, w, kappa)?;
    if idx >= domain.len() || !domain.is_inside(idx) {
        return Err(LabError::NotInside(idx));
    }
    let jm = radius_count(domain, kappa, r_cap, idx);
    let offsets = offset_table(domain.dim(), jm);
    Ok(eval_cell(
        domain,
        f.values(),
        p,
        w.values(),
        &offsets,
        idx,
        jm,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetReport {
    pub x: usize,
    pub q: f64,
    pub kappa: f64,
    pub level: f64,
    pub tau: f64,
    pub set_size: usize,
    pub value: f64,
    pub d_hat: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Compare `M_{1,w,kappa} 1_E (x)` with `D^4 / level^q`, where
/// `tau = M_{q,w,2kappa} f(x)` and
/// `E = { y : M^{kappa dist(x)}_{q,w,2kappa} f(y) > level * tau }`.
///
/// `d_hat` is a doubling constant of `w` at dilation `10 kappa`.
#[allow(clippy::too_many_arguments)]
pub fn level_set_check(
    domain: &GridDomain,
    f: &ScalarField,
    q: f64,
    w: &Weight,
    kappa: f64,
    x: usize,
    level: f64,
    d_hat: f64,
) -> Result<LevelSetReport> {
    if !(kappa > 1.0) {
        return Err(LabError::param(format!("kappa must exceed 1, got {kappa}")));
    }
    if !(level > 0.0) {
        return Err(LabError::param(format!(
            "level must be positive, got {level}"
        )));
    }
    let tau = maximal_at(domain, f, q, w, 2.0 * kappa, None, x)?;
    let capped = maximal_capped(domain, f, q, w, 2.0 * kappa, kappa * domain.dist(x))?;
    let threshold = level * tau;
    let set = ScalarField::indicator(domain, |k| capped[k] > threshold);
    let set_size = domain
        .inside_cells()
        .iter()
        .filter(|&&k| set[k] > 0.0)
        .count();
    let value = maximal_at(domain, &set, 1.0, w, kappa, None, x)?;
    let bound = d_hat.powi(4) / level.powf(q);
    Ok(LevelSetReport {
        x,
        q,
        kappa,
        level,
        tau,
        set_size,
        value,
        d_hat,
        bound,
        pass: value <= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeReport {
    pub kappa: f64,
    pub tau: f64,
    pub level_mass: f64,
    pub f_mass: f64,
    pub ratio: f64,
    pub d_hat: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Compare `w({M_{1,w,kappa} f > tau}) tau / int |f| w` with `D^3`, where
/// `d_hat` is a doubling constant of `w` at dilation `5 kappa`.
pub fn weak_type_check(
    domain: &GridDomain,
    f: &ScalarField,
    w: &Weight,
    kappa: f64,
    tau: f64,
    d_hat: f64,
) -> Result<WeakTypeReport> {
    if !(tau > 0.0) {
        return Err(LabError::param(format!("tau must be positive, got {tau}")));
    }
    let mf = maximal(domain, f, 1.0, w, kappa)?;
    let level: Vec<usize> = domain
        .inside_cells()
        .iter()
        .copied()
        .filter(|&k| mf[k] > tau)
        .collect();
    let level_mass = measure_cells(domain, w, &level);
    let f_mass = domain.cell_volume()
        * f.values()
            .iter()
            .zip(w.values())
            .map(|(a, b)| a.abs() * b)
            .sum::<f64>();
    let ratio = if f_mass == 0.0 {
        0.0
    } else {
        level_mass * tau / f_mass
    };
    let bound = d_hat.powi(3);
    Ok(WeakTypeReport {
        kappa,
        tau,
        level_mass,
        f_mass,
        ratio,
        d_hat,
        bound,
        pass: ratio <= bound,
    })
}
