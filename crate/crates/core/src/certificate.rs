//! Constant pipelines of the self-improvement argument.
//!
//! The exponent `k` is found by exact comparison: rational arithmetic when
//! `p` has a small denominator, otherwise 256-bit floats rounded outward.
//! `S` and `C_alpha` are astronomically large and are kept as natural logs.

use std::cmp::Ordering;

use dashu_float::round::mode::{Down, Up};
use dashu_float::FBig;
use dashu_int::UBig;
use dashu_ratio::RBig;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const M: f64 = 4.0;
pub const DELTA: f64 = 1.0 / 6.0;
/// Working precision of the float path, in bits.
const PRECISION: usize = 256;
/// Largest denominator of `p` handled by the rational path.
const MAX_EXACT_DENOM: u32 = 1024;
const MAX_K: u64 = 1 << 62;

/// A real number stored as a sign and the natural log of its magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogReal {
    pub sign: i8,
    pub ln_abs: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn from_ln(ln_abs: f64) -> Self {
        LogReal { sign: 1, ln_abs }
    }

    pub fn from_f64(x: f64) -> Self {
        match x.partial_cmp(&0.0) {
            Some(Ordering::Greater) => LogReal::from_ln(x.ln()),
            Some(Ordering::Less) => LogReal {
                sign: -1,
                ln_abs: (-x).ln(),
            },
            _ => LogReal::ZERO,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn log10_abs(&self) -> f64 {
        self.ln_abs / std::f64::consts::LN_10
    }

    /// Value as `f64`; overflows to infinity.
    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * self.ln_abs.exp()
    }

    pub fn mul(&self, other: &LogReal) -> LogReal {
        if self.is_zero() || other.is_zero() {
            return LogReal::ZERO;
        }
        LogReal {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.ln_abs.partial_cmp(&other.ln_abs),
                _ => other.ln_abs.partial_cmp(&self.ln_abs),
            },
            o => Some(o),
        }
    }
}

/// Hypotheses of the self-improvement step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyHypotheses {
    pub p0: f64,
    pub p: f64,
    pub c_gamma: f64,
    pub c_a: f64,
    pub nu: f64,
    pub kappa: f64,
    /// Doubling constant `D(w, 10 kappa)`.
    pub d10: f64,
}

impl HardyHypotheses {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.p0,
            self.p,
            self.c_gamma,
            self.c_a,
            self.nu,
            self.kappa,
            self.d10,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Hypotheses("all inputs must be finite".into()));
        }
        if !(1.0 < self.p0 && self.p0 < self.p) {
            return Err(LabError::Hypotheses(format!(
                "need 1 < p0 < p, got p0 = {}, p = {}",
                self.p0, self.p
            )));
        }
        if !(self.p / 2.0 < self.p0) {
            return Err(LabError::Hypotheses(format!(
                "need p/2 < p0, got p0 = {}, p = {}",
                self.p0, self.p
            )));
        }
        if !(self.c_gamma > 0.0 && self.c_a > 0.0 && self.nu > 0.0) {
            return Err(LabError::Hypotheses(
                "C_gamma, C_A and nu must be positive".into(),
            ));
        }
        if !(self.kappa > 1.0) {
            return Err(LabError::Hypotheses(format!(
                "need kappa > 1, got {}",
                self.kappa
            )));
        }
        if !(self.d10 >= 1.0) {
            return Err(LabError::Hypotheses(format!(
                "need D >= 1, got {}",
                self.d10
            )));
        }
        Ok(())
    }
}

/// How the k-condition was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    Rational,
    Float256,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CAlphaSample {
    pub q: f64,
    pub theta: f64,
    pub log10_c_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementCertificate {
    #[serde(rename = "K")]
    pub big_k: f64,
    #[serde(rename = "N")]
    pub big_n: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub delta: f64,
    pub k: u64,
    #[serde(rename = "log10_S")]
    pub log10_s: f64,
    pub q_lower: f64,
    pub p: f64,
    /// Largest admissible `(p - q) / p` from the k-condition alone.
    pub theta_max: f64,
    /// `p - q_lower`, computed without cancellation.
    pub window: f64,
    pub c_alpha_samples: Vec<CAlphaSample>,
    pub arithmetic: Arithmetic,
    pub ln_s: f64,
}

impl ImprovementCertificate {
    /// `ln C_alpha` at `theta = (p - q) / p`.
    pub fn ln_c_alpha_theta(&self, theta: f64) -> Result<f64> {
        if !(theta >= 0.0 && theta * self.p < self.window) {
            return Err(LabError::param(format!(
                "theta = {theta} outside [0, {})",
                self.window / self.p
            )));
        }
        if theta == 0.0 {
            return Ok(self.ln_s + (6.0f64 / 5.0).ln());
        }
        let e = self.k as f64 * theta * M.ln() - (1.0 / DELTA).ln();
        Ok(self.ln_s - (-e.exp_m1()).ln())
    }

    pub fn theta_of(&self, q: f64) -> f64 {
        (self.p - q) / self.p
    }

    /// `ln C_alpha(q)` for `q` in `(q_lower, p]`.
    pub fn ln_c_alpha(&self, q: f64) -> Result<f64> {
        if !(q > self.q_lower && q <= self.p) {
            return Err(LabError::param(format!(
                "q = {q} outside ({}, {}]",
                self.q_lower, self.p
            )));
        }
        self.ln_c_alpha_theta(self.theta_of(q))
    }

    /// Replace the samples by `C_alpha` at the given fractions of the window,
    /// `theta = f * window / p`.
    pub fn sample(&mut self, fractions: &[f64]) -> Result<()> {
        self.c_alpha_samples = fractions
            .iter()
            .map(|&f| {
                if !(0.0..1.0).contains(&f) {
                    return Err(LabError::param(format!(
                        "window fraction {f} outside [0, 1)"
                    )));
                }
                let theta = f * self.window / self.p;
                Ok(CAlphaSample {
                    q: self.p * (1.0 - theta),
                    theta,
                    log10_c_alpha: self.ln_c_alpha_theta(theta)? / std::f64::consts::LN_10,
                })
            })
            .collect::<Result<_>>()?;
        Ok(())
    }
}

/// `C_2 = 6 C_1 D_half^2`, `C_A = 6 C_2`, `kappa = 3 lambda`, `nu_min = 6 C_2`.
pub fn propagate_poincare_constants(
    c1: f64,
    lambda: f64,
    d_half: f64,
) -> Result<(f64, f64, f64, f64)> {
    if !(c1 > 0.0 && lambda >= 1.0 && d_half >= 1.0) {
        return Err(LabError::param("need C_1 > 0, lambda >= 1 and D_half >= 1"));
    }
    let c2 = 6.0 * c1 * d_half * d_half;
    Ok((c2, 6.0 * c2, 3.0 * lambda, 6.0 * c2))
}

/// `C_gamma = 4 C_H`, `kappa = kappa_gamma`, `nu_min = max(C_QC, 4 C_H)`.
pub fn propagate_hardy_constants(c_h: f64, kappa_gamma: f64, c_qc: f64) -> Result<(f64, f64, f64)> {
    if !(c_h > 0.0 && kappa_gamma > 1.0 && c_qc >= 1.0) {
        return Err(LabError::param("need C_H > 0, kappa > 1 and C_QC >= 1"));
    }
    let cg = 4.0 * c_h;
    Ok((cg, kappa_gamma, c_qc.max(cg)))
}

fn rational(x: f64) -> RBig {
    RBig::try_from(x).expect("finite input")
}

/// The k-condition `C^p 2^p D^4 / k^(p-1) < (delta / (3 kappa))^p`, in the
/// equivalent form `k^(p-1) > (36 kappa C)^p D^4`.
#[derive(Debug, Clone)]
enum KCondition {
    /// `p = a / b`: `k^(a-b) > X^a D^(4b)`.
    Rational { a: usize, b: usize, rhs: RBig },
    /// Log-space bounds on the right-hand side.
    Float {
        p_minus_one: f64,
        rhs_lo: FBig<Down>,
        rhs_hi: FBig<Up>,
    },
}

fn widen_down(x: FBig<Down>) -> FBig<Down> {
    let mag = if x.sign() == dashu_int::Sign::Negative {
        -x.clone()
    } else {
        x.clone()
    };
    let slack = mag * FBig::<Down>::from_parts(1.into(), -(PRECISION as isize - 16));
    x - slack - FBig::<Down>::from_parts(1.into(), -(PRECISION as isize))
}

fn widen_up(x: FBig<Up>) -> FBig<Up> {
    let mag = if x.sign() == dashu_int::Sign::Negative {
        -x.clone()
    } else {
        x.clone()
    };
    let slack = mag * FBig::<Up>::from_parts(1.into(), -(PRECISION as isize - 16));
    x + slack + FBig::<Up>::from_parts(1.into(), -(PRECISION as isize))
}

fn fdown(x: f64) -> FBig<Down> {
    FBig::<Down>::try_from(x)
        .expect("finite input")
        .with_precision(PRECISION)
        .value()
}

fn fup(x: f64) -> FBig<Up> {
    FBig::<Up>::try_from(x)
        .expect("finite input")
        .with_precision(PRECISION)
        .value()
}

impl KCondition {
    fn new(h: &HardyHypotheses) -> Self {
        let pr = rational(h.p);
        let (num, den) = (pr.numerator(), pr.denominator());
        let b = usize::try_from(den)
            .ok()
            .filter(|&b| b <= MAX_EXACT_DENOM as usize);
        let a = usize::try_from(num)
            .ok()
            .filter(|&a| a <= 16 * MAX_EXACT_DENOM as usize);
        let x = rational(36.0) * rational(h.kappa) * rational(h.c_gamma);
        if let (Some(a), Some(b)) = (a, b) {
            let rhs = x.pow(a as isize) * rational(h.d10).pow(4 * b as isize);
            return KCondition::Rational { a, b, rhs };
        }
        // ln rhs = p ln(36 kappa C) + 4 ln D; every input factor is >= 0 in
        // the log except possibly ln X, and p > 0 keeps directions.
        let x_lo = fdown(36.0) * fdown(h.kappa) * fdown(h.c_gamma);
        let x_hi = fup(36.0) * fup(h.kappa) * fup(h.c_gamma);
        let rhs_lo = widen_down(
            fdown(h.p) * widen_down(x_lo.ln()) + fdown(4.0) * widen_down(fdown(h.d10).ln()),
        );
        let rhs_hi =
            widen_up(fup(h.p) * widen_up(x_hi.ln()) + fup(4.0) * widen_up(fup(h.d10).ln()));
        KCondition::Float {
            p_minus_one: h.p - 1.0,
            rhs_lo,
            rhs_hi,
        }
    }

    fn arithmetic(&self) -> Arithmetic {
        match self {
            KCondition::Rational { .. } => Arithmetic::Rational,
            KCondition::Float { .. } => Arithmetic::Float256,
        }
    }

    fn holds(&self, k: u64) -> Result<bool> {
        match self {
            KCondition::Rational { a, b, rhs } => {
                let lhs = RBig::from(UBig::from(k).pow(a - b));
                Ok(lhs > *rhs)
            }
            KCondition::Float {
                p_minus_one,
                rhs_lo,
                rhs_hi,
            } => {
                // p - 1 is exact in binary: p is a double above 1.
                let lk_lo = widen_down(fdown(k as f64).ln());
                let lk_hi = widen_up(fup(k as f64).ln());
                let lhs_lo = widen_down(fdown(*p_minus_one) * lk_lo);
                let lhs_hi = widen_up(fup(*p_minus_one) * lk_hi);
                if lhs_lo.with_rounding::<Up>() > *rhs_hi {
                    Ok(true)
                } else if lhs_hi <= rhs_lo.clone().with_rounding::<Up>() {
                    Ok(false)
                } else {
                    Err(LabError::Internal(format!(
                        "k-condition at k = {k} is not decided at {PRECISION}-bit precision"
                    )))
                }
            }
        }
    }
}

/// Exact check of the k-condition at `k`.
pub fn k_condition_holds(h: &HardyHypotheses, k: u64) -> Result<bool> {
    h.validate()?;
    KCondition::new(h).holds(k)
}

fn minimal_k(cond: &KCondition, h: &HardyHypotheses) -> Result<u64> {
    let ln_t = h.p * (36.0 * h.kappa * h.c_gamma).ln() + 4.0 * h.d10.ln();
    let ln_k = ln_t / (h.p - 1.0);
    if !(ln_k < (MAX_K as f64).ln() - 1.0) {
        return Err(LabError::Hypotheses(format!(
            "required k is about e^{ln_k:.1}, beyond the supported range"
        )));
    }
    let est = ln_k.exp().floor().max(1.0) as u64;
    // Bracket: cond(lo) false (or lo = 0), cond(hi) true.
    let mut step = 1u64.max(est >> 20);
    let mut hi = est;
    while !cond.holds(hi)? {
        hi = hi.saturating_add(step).min(MAX_K);
        step = step.saturating_mul(2);
    }
    let mut step = 1u64.max(est >> 20);
    let mut lo = hi;
    loop {
        lo = lo.saturating_sub(step);
        if lo == 0 || !cond.holds(lo)? {
            break;
        }
        step = step.saturating_mul(2);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if cond.holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Default sample points, as fractions of the admissible window.
pub const DEFAULT_FRACTIONS: [f64; 6] = [0.0, 0.25, 0.5, 0.75, 0.9, 0.99];

pub fn improvement_certificate(h: &HardyHypotheses) -> Result<ImprovementCertificate> {
    h.validate()?;
    let cond = KCondition::new(h);
    let k = minimal_k(&cond, h)?;
    let kf = k as f64;
    let ln_m = M.ln();
    let base = h.nu + 3.0 * h.c_a;
    // S = 1 + M^k nu + 3 C_A M^k = M^k (base + M^-k).
    let ln_s = kf * ln_m + base.ln() + ((-kf * ln_m).exp() / base).ln_1p();
    let theta_max = (1.0 / DELTA).ln() / (kf * ln_m);
    let unclamped = h.p * (1.0 - theta_max);
    let (q_lower, window) = if unclamped > h.p0 {
        (unclamped, h.p * theta_max)
    } else {
        (h.p0, h.p - h.p0)
    };
    if !(window > 0.0 && q_lower < h.p) {
        return Err(LabError::Internal("empty q window".into()));
    }
    let mut cert = ImprovementCertificate {
        big_k: 2.0 * h.kappa,
        big_n: 3.0 * h.nu,
        m: M,
        delta: DELTA,
        k,
        log10_s: ln_s / std::f64::consts::LN_10,
        q_lower,
        p: h.p,
        theta_max,
        window,
        c_alpha_samples: Vec::new(),
        arithmetic: cond.arithmetic(),
        ln_s,
    };
    cert.sample(&DEFAULT_FRACTIONS)?;
    Ok(cert)
}

/// `C_alpha(q) tau` in log space; zero when `tau = 0`.
pub fn alpha_bound(cert: &ImprovementCertificate, q: f64, tau: f64) -> Result<LogReal> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(LabError::param(format!(
            "tau must be finite and >= 0, got {tau}"
        )));
    }
    let ln_c = cert.ln_c_alpha(q)?;
    if tau == 0.0 {
        return Ok(LogReal::ZERO);
    }
    Ok(LogReal::from_ln(ln_c + tau.ln()))
}
