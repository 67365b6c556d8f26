//! Measured constants of pointwise, curve-form and integral Hardy
//! inequalities, plus the ball and pointwise Poincaré checks.
//!
//! Every sup is taken over a finite corpus or family and a finite set of
//! points, so every reported constant is a lower bound for the true one.

pub mod corpus;
pub mod family;

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{curve_infimum, unconstrained_minimum, Target};
use crate::domain::stencil::chamfer_max_ratio;
use crate::domain::GridDomain;
use crate::error::{LabError, Result};
use crate::field::ScalarField;
use crate::maximal::{maximal, maximal_at};
use crate::util::finite_or_null;
use crate::weights::{ball_cells, distance_power_weight, Weight};

pub use corpus::{CorpusEntry, Recipe, TestFunctionCorpus};
pub use family::{admissible_scale, CandidateFamily, Generator};

/// One-sided bias of grid curves against continuum curves: lengths are at
/// most `metric_factor` times Euclidean, plus endpoint quantization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBias {
    pub metric_factor: f64,
    pub quantization: f64,
}

pub fn grid_bias_bound(domain: &GridDomain) -> GridBias {
    GridBias {
        metric_factor: chamfer_max_ratio(),
        quantization: domain.reach(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryConstant {
    pub label: String,
    pub constant: f64,
    /// Cell center where the sup was attained.
    pub argmax: Option<Vec<f64>>,
    pub skipped_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyConstantReport {
    pub constant: f64,
    pub p: f64,
    pub kappa: f64,
    pub skipped_cells: usize,
    pub per_entry: Vec<EntryConstant>,
    pub grid_bias_bound: GridBias,
}

fn point_vec(domain: &GridDomain, k: usize) -> Vec<f64> {
    domain.center(k)[..domain.dim()].to_vec()
}

/// Sup over `x` of `|u(x)| / den(x)`, skipping cells with `den = 0`.
fn sup_quotient(
    domain: &GridDomain,
    label: &str,
    u: &ScalarField,
    den: impl Fn(usize) -> f64,
) -> (EntryConstant, usize) {
    let mut best = 0.0f64;
    let mut arg = None;
    let mut skipped = 0;
    let mut counted = 0;
    for &x in domain.inside_cells() {
        let d = den(x);
        if d == 0.0 {
            skipped += 1;
            continue;
        }
        counted += 1;
        let q = u[x].abs() / d;
        if q > best || arg.is_none() {
            best = q;
            arg = Some(x);
        }
    }
    (
        EntryConstant {
            label: label.to_string(),
            constant: best,
            argmax: arg.map(|k| point_vec(domain, k)),
            skipped_cells: skipped,
        },
        counted,
    )
}

/// `sup |u(x)| / (dist(x) M_{p,w,kappa} g(x))` over the corpus and all
/// inside cells.
pub fn pointwise_hardy_constant(
    domain: &GridDomain,
    w: &Weight,
    p: f64,
    kappa: f64,
    corpus: &TestFunctionCorpus,
) -> Result<HardyConstantReport> {
    if corpus.is_empty() {
        return Err(LabError::param("corpus is empty"));
    }
    let mut per_entry = Vec::new();
    let mut counted = 0;
    for e in corpus.entries() {
        let mg = maximal(domain, &e.g, p, w, kappa)?;
        let (ec, c) = sup_quotient(domain, &e.label, &e.u, |x| domain.dist(x) * mg[x]);
        counted += c;
        per_entry.push(ec);
    }
    if counted == 0 {
        return Err(LabError::DegenerateCorpus);
    }
    Ok(HardyConstantReport {
        constant: per_entry.iter().map(|e| e.constant).fold(0.0, f64::max),
        p,
        kappa,
        skipped_cells: per_entry.iter().map(|e| e.skipped_cells).sum(),
        per_entry,
        grid_bias_bound: grid_bias_bound(domain),
    })
}

/// The pointwise constant at each exponent in `ps`.
pub fn hardy_constant_curve(
    domain: &GridDomain,
    w: &Weight,
    ps: &[f64],
    kappa: f64,
    corpus: &TestFunctionCorpus,
) -> Result<Vec<(f64, f64)>> {
    ps.iter()
        .map(|&p| {
            Ok((
                p,
                pointwise_hardy_constant(domain, w, p, kappa, corpus)?.constant,
            ))
        })
        .collect()
}

/// CSV with header `p,constant`.
pub fn p_curve_csv(curve: &[(f64, f64)]) -> String {
    let mut out = String::from("p,constant\n");
    for (p, c) in curve {
        let _ = writeln!(out, "{p},{c}");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateValue {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightConstantReport {
    pub constant: f64,
    pub p: f64,
    pub kappa: f64,
    pub nu: f64,
    pub evaluations: usize,
    pub skipped: usize,
    pub infeasible: usize,
    pub per_candidate: Vec<CandidateValue>,
    pub grid_bias_bound: GridBias,
}

fn check_weight(domain: &GridDomain, w: &Weight) -> Result<()> {
    if w.values().len() != domain.len() {
        return Err(LabError::param(format!(
            "weight has {} values for {} cells",
            w.values().len(),
            domain.len()
        )));
    }
    Ok(())
}

fn check_points(domain: &GridDomain, points: &[usize]) -> Result<()> {
    if points.is_empty() {
        return Err(LabError::param("no query points"));
    }
    for &x in points {
        if x >= domain.len() || !domain.is_inside(x) {
            return Err(LabError::NotInside(x));
        }
    }
    Ok(())
}

enum Eval {
    Skipped,
    Infeasible,
    Value(f64),
}

/// Sup over `points` and the family of
/// `curve_infimum(x, g, nu) / (dist(x) M_{p,w,kappa} g(x))`.
#[allow(clippy::too_many_arguments)]
pub fn hardy_weight_constant(
    domain: &GridDomain,
    w: &Weight,
    p: f64,
    kappa: f64,
    nu: f64,
    family: &CandidateFamily,
    points: &[usize],
) -> Result<WeightConstantReport> {
    check_points(domain, points)?;
    let fields = family.fields(domain)?;
    let mut per_candidate = Vec::new();
    let (mut evaluations, mut skipped, mut infeasible) = (0, 0, 0);
    for (label, g) in &fields {
        let evals: Vec<Eval> = points
            .par_iter()
            .map(|&x| {
                let mg = maximal_at(domain, g, p, w, kappa, None, x)?;
                if mg == 0.0 {
                    return Ok(Eval::Skipped);
                }
                let r = curve_infimum(domain, g, x, nu)?;
                if !r.feasible {
                    return Ok(Eval::Infeasible);
                }
                Ok(Eval::Value(r.integral / (domain.dist(x) * mg)))
            })
            .collect::<Result<_>>()?;
        let mut best = 0.0f64;
        for e in evals {
            match e {
                Eval::Skipped => skipped += 1,
                Eval::Infeasible => infeasible += 1,
                Eval::Value(v) => {
                    evaluations += 1;
                    best = best.max(v);
                }
            }
        }
        per_candidate.push(CandidateValue {
            label: label.clone(),
            value: best,
        });
    }
    if evaluations == 0 && infeasible == 0 {
        return Err(LabError::DegenerateCorpus);
    }
    Ok(WeightConstantReport {
        constant: per_candidate.iter().map(|c| c.value).fold(0.0, f64::max),
        p,
        kappa,
        nu,
        evaluations,
        skipped,
        infeasible,
        per_candidate,
        grid_bias_bound: grid_bias_bound(domain),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub estimate: f64,
    pub p: f64,
    pub nu: f64,
    pub kappa: f64,
    pub tau: f64,
    pub feasible: usize,
    pub infeasible: usize,
    pub warning: Option<String>,
    pub per_candidate: Vec<CandidateValue>,
    pub grid_bias_bound: GridBias,
}

/// Lower bound for the alpha function: the largest
/// `curve_infimum(x, s g, nu) / dist(x)` over `points` and the family, with
/// each candidate rescaled by [`admissible_scale`].
#[allow(clippy::too_many_arguments)]
pub fn alpha_estimate(
    domain: &GridDomain,
    w: &Weight,
    p: f64,
    nu: f64,
    kappa: f64,
    tau: f64,
    family: &CandidateFamily,
    points: &[usize],
) -> Result<AlphaReport> {
    check_points(domain, points)?;
    let fields = family.fields(domain)?;
    let mut per_candidate = Vec::new();
    let (mut feasible, mut infeasible) = (0, 0);
    for (label, g) in &fields {
        let vals: Vec<Option<f64>> = points
            .par_iter()
            .map(|&x| {
                let s = admissible_scale(domain, w, p, kappa, tau, g, x)?;
                let r = curve_infimum(domain, &g.scaled(s), x, nu)?;
                // With s g <= 1 the integral is at most the budget nu dist(x);
                // the cap only absorbs rounding.
                Ok(r.feasible.then(|| (r.integral / domain.dist(x)).min(nu)))
            })
            .collect::<Result<_>>()?;
        let mut best = 0.0f64;
        for v in vals {
            match v {
                Some(v) => {
                    feasible += 1;
                    best = best.max(v);
                }
                None => infeasible += 1,
            }
        }
        per_candidate.push(CandidateValue {
            label: label.clone(),
            value: best,
        });
    }
    let warning = (feasible == 0).then(|| "no feasible curve for any candidate".to_string());
    Ok(AlphaReport {
        estimate: per_candidate.iter().map(|c| c.value).fold(0.0, f64::max),
        p,
        nu,
        kappa,
        tau,
        feasible,
        infeasible,
        warning,
        per_candidate,
        grid_bias_bound: grid_bias_bound(domain),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub x: Vec<f64>,
    pub mg: f64,
    pub delta: f64,
    pub mh: f64,
    pub q_gamma: f64,
    pub q_h: f64,
    pub bound: f64,
    pub length: f64,
    pub budget: f64,
    /// Whether the unconstrained minimizer for `h` fits the length budget.
    pub applicable: bool,
    pub pass: bool,
}

/// Discrete form of the pointwise-to-curve equivalence at one point.
///
/// With `h = g + M g(x) + delta`, the unconstrained `h`-geodesic from `x`
/// gives a test function `u(x) = int h` for which `h` is an upper gradient.
/// When that geodesic fits the budget `nu dist(x)`, the curve quotient of
/// `g` is at most the pointwise quotient of `(u, h)` times `2 + delta / M g(x)`.
#[allow(clippy::too_many_arguments)]
pub fn equivalence_probe(
    domain: &GridDomain,
    w: &Weight,
    p: f64,
    kappa: f64,
    nu: f64,
    g: &ScalarField,
    x: usize,
    delta: f64,
) -> Result<EquivalenceReport> {
    if !(delta > 0.0) {
        return Err(LabError::param(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let mg = maximal_at(domain, g, p, w, kappa, None, x)?;
    if mg == 0.0 {
        return Err(LabError::param(
            "M g(x) vanishes; the quotient is undefined",
        ));
    }
    let hf = g.map(|v| v + mg + delta);
    let mh = maximal_at(domain, &hf, p, w, kappa, None, x)?;
    let geo = unconstrained_minimum(domain, &hf, x, Target::Complement)?;
    let d = domain.dist(x);
    let budget = nu * d;
    let applicable = geo.length <= budget;
    let q_h = geo.integral / (d * mh);
    let bound = q_h * (2.0 + delta / mg);
    let cg = curve_infimum(domain, g, x, nu)?;
    let q_gamma = cg.integral / (d * mg);
    let tol = 1.0 + 1e-12;
    let pass = !applicable || (cg.feasible && q_gamma <= bound * tol);
    Ok(EquivalenceReport {
        x: point_vec(domain, x),
        mg,
        delta,
        mh,
        q_gamma,
        q_h,
        bound,
        length: geo.length,
        budget,
        applicable,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub constant: f64,
    pub p: f64,
    pub lambda: f64,
    pub balls: usize,
    pub skipped: usize,
    pub per_entry: Vec<CandidateValue>,
}

/// `(w-mean over B of |u - u_B|) / (r (w-mean over lambda B of g^p)^(1/p))`
/// for `B = B(center(x), r)`; `None` when the denominator vanishes.
#[allow(clippy::too_many_arguments)]
pub fn poincare_ball_quotient(
    domain: &GridDomain,
    w: &Weight,
    p: f64,
    lambda: f64,
    u: &ScalarField,
    g: &ScalarField,
    x: usize,
    r: f64,
) -> Result<Option<f64>> {
    check_weight(domain, w)?;
    u.check_len(domain, "u")?;
    g.check_len(domain, "g")?;
    let c = domain.center(x);
    let ball = ball_cells(domain, c, r);
    let big = ball_cells(domain, c, lambda * r);
    let wb: f64 = ball.iter().map(|&k| w.value(k)).sum();
    let wbig: f64 = big.iter().map(|&k| w.value(k)).sum();
    if wb == 0.0 || wbig == 0.0 {
        return Ok(None);
    }
    let ub = ball.iter().map(|&k| w.value(k) * u[k]).sum::<f64>() / wb;
    let num = ball
        .iter()
        .map(|&k| w.value(k) * (u[k] - ub).abs())
        .sum::<f64>()
        / wb;
    let gp = big
        .iter()
        .map(|&k| w.value(k) * g[k].abs().powf(p))
        .sum::<f64>()
        / wbig;
    let den = r * gp.powf(1.0 / p);
    if den == 0.0 {
        return Ok(None);
    }
    Ok(Some(num / den))
}

/// Sampled sup of [`poincare_ball_quotient`] over balls `B(x, j h)`,
/// `j >= 2`, with `2 lambda r <= dist(x)`.
#[allow(clippy::too_many_arguments)]
pub fn poincare_ball_constant<R: Rng + ?Sized>(
    domain: &GridDomain,
    w: &Weight,
    p: f64,
    lambda: f64,
    corpus: &TestFunctionCorpus,
    sample_count: usize,
    rng: &mut R,
) -> Result<PoincareReport> {
    if !(lambda >= 1.0) {
        return Err(LabError::param(format!(
            "lambda must be >= 1, got {lambda}"
        )));
    }
    check_weight(domain, w)?;
    let h = domain.spacing();
    let max_j = |x: usize| {
        let mut j = 0usize;
        while 2.0 * lambda * ((j + 1) as f64) * h <= domain.dist(x) {
            j += 1;
        }
        j
    };
    let centers: Vec<(usize, usize)> = domain
        .inside_cells()
        .iter()
        .map(|&x| (x, max_j(x)))
        .filter(|&(_, j)| j >= 2)
        .collect();
    if centers.is_empty() {
        return Err(LabError::NoAdmissibleBall(format!(
            "no ball of radius >= 2h has 2 lambda B inside (lambda = {lambda})"
        )));
    }
    let balls: Vec<(usize, f64)> = (0..sample_count.max(1))
        .map(|_| {
            let (x, jm) = centers[rng.gen_range(0..centers.len())];
            (x, rng.gen_range(2..=jm) as f64 * h)
        })
        .collect();
    let mut per_entry = Vec::new();
    let mut skipped = 0;
    for e in corpus.entries() {
        let qs: Vec<Option<f64>> = balls
            .par_iter()
            .map(|&(x, r)| poincare_ball_quotient(domain, w, p, lambda, &e.u, &e.g, x, r))
            .collect::<Result<_>>()?;
        let mut best = 0.0f64;
        for q in qs {
            match q {
                Some(q) => best = best.max(q),
                None => skipped += 1,
            }
        }
        per_entry.push(CandidateValue {
            label: e.label.clone(),
            value: best,
        });
    }
    Ok(PoincareReport {
        constant: per_entry.iter().map(|c| c.value).fold(0.0, f64::max),
        p,
        lambda,
        balls: balls.len(),
        skipped,
        per_entry,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwisePoincareReport {
    pub c1: f64,
    pub d_half: f64,
    pub c2: f64,
    pub kappa: f64,
    pub pairs: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` over the sampled pairs.
    pub worst_ratio: f64,
    pub pass: bool,
}

/// Check `|u(x) - u(y)| <= C_2 |x-y| (M^R g(x) + M^R g(y))` on sampled
/// pairs with `0 < |x - y| < dist(x) / (9 lambda)`, where `R = kappa |x-y|`,
/// `kappa = 3 lambda` and `C_2 = 6 C_1 D_half^2`.
#[allow(clippy::too_many_arguments)]
pub fn pointwise_poincare_check<R: Rng + ?Sized>(
    domain: &GridDomain,
    w: &Weight,
    p: f64,
    lambda: f64,
    u: &ScalarField,
    g: &ScalarField,
    c1: f64,
    d_half: f64,
    sample_count: usize,
    rng: &mut R,
) -> Result<PointwisePoincareReport> {
    if !(lambda >= 1.0) {
        return Err(LabError::param(format!(
            "lambda must be >= 1, got {lambda}"
        )));
    }
    check_weight(domain, w)?;
    u.check_len(domain, "u")?;
    let kappa = 3.0 * lambda;
    let c2 = 6.0 * c1 * d_half * d_half;
    let h = domain.spacing();
    let sources: Vec<usize> = domain
        .inside_cells()
        .iter()
        .copied()
        .filter(|&x| domain.dist(x) / (9.0 * lambda) > h)
        .collect();
    if sources.is_empty() {
        return Err(LabError::NoAdmissiblePairs(format!(
            "no cell has dist / (9 lambda) > h (lambda = {lambda})"
        )));
    }
    let mut pairs = Vec::new();
    for _ in 0..sample_count.max(1) {
        let x = sources[rng.gen_range(0..sources.len())];
        let near: Vec<usize> =
            ball_cells(domain, domain.center(x), domain.dist(x) / (9.0 * lambda))
                .into_iter()
                .filter(|&y| y != x)
                .collect();
        if near.is_empty() {
            continue;
        }
        pairs.push((x, near[rng.gen_range(0..near.len())]));
    }
    let ratios: Vec<f64> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let r = domain.euclid(x, y);
            let cap = Some(kappa * r);
            let mx = maximal_at(domain, g, p, w, kappa, cap, x)?;
            let my = maximal_at(domain, g, p, w, kappa, cap, y)?;
            let lhs = (u[x] - u[y]).abs();
            let rhs = c2 * r * (mx + my);
            Ok(if lhs == 0.0 {
                0.0
            } else if rhs == 0.0 {
                f64::INFINITY
            } else {
                lhs / rhs
            })
        })
        .collect::<Result<_>>()?;
    let violations = ratios.iter().filter(|&&q| q > 1.0).count();
    Ok(PointwisePoincareReport {
        c1,
        d_half,
        c2,
        kappa,
        pairs: ratios.len(),
        violations,
        worst_ratio: ratios.iter().cloned().fold(0.0, f64::max),
        pass: violations == 0,
    })
}

/// `int |u|^p dist^-p w / int g^p w` over the inside cells; `+inf` when the
/// gradient side vanishes and `u` does not.
pub fn integral_hardy_ratio(
    domain: &GridDomain,
    w: &Weight,
    p: f64,
    u: &ScalarField,
    g: &ScalarField,
) -> Result<f64> {
    check_weight(domain, w)?;
    u.check_len(domain, "u")?;
    g.check_len(domain, "g")?;
    if !(p >= 1.0) {
        return Err(LabError::param(format!("p must be >= 1, got {p}")));
    }
    let pw = |v: f64| if p == 2.0 { v * v } else { v.abs().powf(p) };
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for &k in domain.inside_cells() {
        num += pw(u[k].abs() / domain.dist(k)) * w.value(k);
        den += pw(g[k].abs()) * w.value(k);
    }
    let vol = domain.cell_volume();
    let (num, den) = (num * vol, den * vol);
    Ok(if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaEntry {
    pub label: String,
    pub pointwise: f64,
    #[serde(with = "finite_or_null")]
    pub integral_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaReport {
    pub beta: f64,
    pub p: f64,
    /// `sup |u| / (dist^(1 - beta/p) (M_{2 dist}(g^p dist^beta))^(1/p))`.
    pub pointwise_constant: f64,
    #[serde(with = "finite_or_null")]
    pub integral_ratio: f64,
    /// Pointwise constant with weight `dist^beta` and `kappa = 2`.
    pub weighted_constant: f64,
    /// `pointwise_constant / weighted_constant`.
    pub equivalence_gap: f64,
    /// `integral_ratio / pointwise_constant^p`.
    pub integral_over_pointwise: f64,
    pub skipped_cells: usize,
    pub per_entry: Vec<BetaEntry>,
}

/// Pointwise and integral `(p, beta)` Hardy quotients for `w = dist^beta`.
pub fn beta_hardy_experiment(
    domain: &GridDomain,
    beta: f64,
    p: f64,
    corpus: &TestFunctionCorpus,
) -> Result<BetaReport> {
    if !(p > 1.0) {
        return Err(LabError::param(format!("p must exceed 1, got {p}")));
    }
    let w = distance_power_weight(domain, beta)?;
    let one = Weight::constant(domain, 1.0)?;
    let expo = 1.0 - beta / p;
    let mut per_entry = Vec::new();
    let mut skipped = 0;
    let mut counted = 0;
    for e in corpus.entries() {
        let gp = ScalarField::from_fn(domain, |k, _| {
            let a = e.g[k].abs();
            (if p == 2.0 { a * a } else { a.powf(p) }) * w.value(k)
        });
        let m = maximal(domain, &gp, 1.0, &one, 2.0)?;
        let (ec, c) = sup_quotient(domain, &e.label, &e.u, |x| {
            let root = if p == 2.0 {
                m[x].sqrt()
            } else {
                m[x].powf(1.0 / p)
            };
            domain.dist(x).powf(expo) * root
        });
        skipped += ec.skipped_cells;
        counted += c;
        per_entry.push(BetaEntry {
            label: e.label.clone(),
            pointwise: ec.constant,
            integral_ratio: integral_hardy_ratio(domain, &w, p, &e.u, &e.g)?,
        });
    }
    if counted == 0 {
        return Err(LabError::DegenerateCorpus);
    }
    let pointwise_constant = per_entry.iter().map(|e| e.pointwise).fold(0.0, f64::max);
    let integral_ratio = per_entry
        .iter()
        .map(|e| e.integral_ratio)
        .fold(0.0, f64::max);
    let weighted_constant = pointwise_hardy_constant(domain, &w, p, 2.0, corpus)?.constant;
    Ok(BetaReport {
        beta,
        p,
        pointwise_constant,
        integral_ratio,
        weighted_constant,
        equivalence_gap: pointwise_constant / weighted_constant,
        integral_over_pointwise: integral_ratio / pointwise_constant.powf(p),
        skipped_cells: skipped,
        per_entry,
    })
}

/// `count` inside cells drawn uniformly, sorted and deduplicated.
pub fn sample_points<R: Rng + ?Sized>(
    domain: &GridDomain,
    count: usize,
    rng: &mut R,
) -> Vec<usize> {
    let cells = domain.inside_cells();
    let mut pts: Vec<usize> = (0..count)
        .map(|_| cells[rng.gen_range(0..cells.len())])
        .collect();
    pts.sort_unstable();
    pts.dedup();
    pts
}

#[cfg(test)]
mod tests;
