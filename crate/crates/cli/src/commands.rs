use std::fmt::{self, Write as _};
use std::path::PathBuf;

use hardylab_core::curves::CurveTarget;
use hardylab_core::hardy::{
    beta_hardy_experiment, p_curve_csv, poincare_ball_constant, pointwise_poincare_check,
    sample_points,
};
use hardylab_core::maximal::{level_set_check, weak_type_check};
use hardylab_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{config_err, FieldSpec, RandomField, RandomTag, RunConfig};
use crate::output::OutDir;

/// A computed check reported `pass = false`. Maps to exit code 3.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn check(ok: bool, what: impl FnOnce() -> String) -> anyhow::Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CheckFailed(what()).into())
    }
}

pub struct Ctx {
    pub cfg: RunConfig,
    pub base: PathBuf,
    pub seed: u64,
}

impl Ctx {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn kappa(&self) -> anyhow::Result<f64> {
        self.cfg.need("kappa", self.cfg.kappa)
    }

    fn r_min(&self, d: &GridDomain) -> f64 {
        self.cfg.r_min_cells.unwrap_or(2.0) * d.spacing()
    }
}

#[derive(Serialize)]
struct DomainSummary<'a> {
    spec: &'a DomainSpec,
    dim: usize,
    shape: [usize; 2],
    h: f64,
    cells: usize,
    inside_cells: usize,
    max_dist: f64,
    qc_factor: f64,
    qc_samples: usize,
}

pub fn make_domain(ctx: &Ctx, out: &mut OutDir) -> anyhow::Result<()> {
    let (spec, d) = ctx.cfg.domain(&ctx.base)?;
    let qc = quasiconvexity_estimate(&d, ctx.cfg.samples, &mut ctx.rng());
    let (nx, ny) = d.shape();
    out.text("dist.csv", &d.dist_csv())?;
    out.json(
        "domain.json",
        &DomainSummary {
            spec: &spec,
            dim: d.dim(),
            shape: [nx, ny],
            h: d.spacing(),
            cells: d.len(),
            inside_cells: d.inside_cells().len(),
            max_dist: d.max_dist(),
            qc_factor: qc,
            qc_samples: ctx.cfg.samples,
        },
    )
}

pub fn doubling(ctx: &Ctx, out: &mut OutDir) -> anyhow::Result<()> {
    let (_, d) = ctx.cfg.domain(&ctx.base)?;
    let w = distance_power_weight(&d, ctx.cfg.beta)?;
    let kappa = ctx.kappa()?;
    let r = doubling_constant_with(
        &d,
        &w,
        kappa,
        ctx.cfg.samples,
        ctx.r_min(&d),
        &mut ctx.rng(),
    )?;
    out.json("doubling.json", &r)?;
    check(!r.zero_half_ball && r.d_hat.is_finite(), || {
        "a sampled half ball has zero weight".into()
    })
}

#[derive(Serialize)]
struct MaxfnChecks {
    d_hat_5kappa: Option<f64>,
    d_hat_10kappa: Option<f64>,
    weak_type: Vec<maximal::WeakTypeReport>,
    level_set: Vec<maximal::LevelSetReport>,
    pass: bool,
}

fn p_tag(p: f64) -> String {
    format!("{p}")
}

pub fn maxfn(ctx: &Ctx, out: &mut OutDir) -> anyhow::Result<()> {
    let (_, d) = ctx.cfg.domain(&ctx.base)?;
    let w = distance_power_weight(&d, ctx.cfg.beta)?;
    let kappa = ctx.kappa()?;
    let mut rng = ctx.rng();
    let spec = ctx
        .cfg
        .field
        .clone()
        .unwrap_or(FieldSpec::Random(RandomField {
            tag: RandomTag::Random,
            signed: false,
        }));
    let f = spec.build(&d, &mut rng)?;
    out.text("field.csv", &f.to_csv(&d))?;
    for &p in &ctx.cfg.p {
        let m = maximal(&d, &f, p, &w, kappa)?;
        out.text(&format!("maxfn_p{}.csv", p_tag(p)), &m.to_csv(&d))?;
    }
    if ctx.cfg.tau.is_empty() && ctx.cfg.levels.is_empty() {
        return Ok(());
    }
    let mut checks = MaxfnChecks {
        d_hat_5kappa: None,
        d_hat_10kappa: None,
        weak_type: Vec::new(),
        level_set: Vec::new(),
        pass: true,
    };
    let r_min = ctx.r_min(&d);
    if !ctx.cfg.tau.is_empty() {
        let dh =
            doubling_constant_with(&d, &w, 5.0 * kappa, ctx.cfg.samples, r_min, &mut rng)?.d_hat;
        checks.d_hat_5kappa = Some(dh);
        for &tau in &ctx.cfg.tau {
            checks
                .weak_type
                .push(weak_type_check(&d, &f, &w, kappa, tau, dh)?);
        }
    }
    if !ctx.cfg.levels.is_empty() {
        let dh =
            doubling_constant_with(&d, &w, 10.0 * kappa, ctx.cfg.samples, r_min, &mut rng)?.d_hat;
        checks.d_hat_10kappa = Some(dh);
        let pts = sample_points(&d, ctx.cfg.samples.min(64), &mut rng);
        for &q in &ctx.cfg.p {
            for &level in &ctx.cfg.levels {
                for &x in &pts {
                    checks
                        .level_set
                        .push(level_set_check(&d, &f, q, &w, kappa, x, level, dh)?);
                }
            }
        }
    }
    checks.pass =
        checks.weak_type.iter().all(|r| r.pass) && checks.level_set.iter().all(|r| r.pass);
    out.json("checks.json", &checks)?;
    check(checks.pass, || "maximal function bound violated".into())
}

pub fn curve(ctx: &Ctx, out: &mut OutDir) -> anyhow::Result<()> {
    let (_, d) = ctx.cfg.domain(&ctx.base)?;
    let cc = ctx
        .cfg
        .curve
        .as_ref()
        .ok_or_else(|| config_err("curve section is required"))?;
    let nu = ctx.cfg.need("nu", cc.nu.or(ctx.cfg.nu))?;
    let locate = |p: &[f64]| -> anyhow::Result<usize> {
        if p.len() != d.dim() {
            return Err(config_err(format!("point {p:?} has the wrong dimension")));
        }
        let pt = [p[0], p.get(1).copied().unwrap_or(0.0)];
        d.locate(pt)
            .ok_or_else(|| config_err(format!("point {p:?} lies outside the grid")))
    };
    let x = locate(&cc.x)?;
    let g = match &ctx.cfg.field {
        Some(spec) => spec.build(&d, &mut ctx.rng())?,
        None => ScalarField::constant(&d, 1.0),
    };
    if g.values().iter().any(|v| !(*v >= 0.0)) {
        return Err(config_err("curve integrand must be nonnegative"));
    }
    let r = match &cc.target {
        CurveTarget::Complement => curve_infimum(&d, &g, x, nu)?,
        CurveTarget::Point(y) => connect_pair(&d, &g, x, locate(y)?, nu)?,
    };
    out.json("curve.json", &r)
}

#[derive(Serialize)]
struct HardyScan {
    beta: f64,
    kappa: f64,
    nonincreasing: bool,
    reports: Vec<hardy::HardyConstantReport>,
}

pub fn hardy_scan(ctx: &Ctx, out: &mut OutDir) -> anyhow::Result<()> {
    let (_, d) = ctx.cfg.domain(&ctx.base)?;
    let w = distance_power_weight(&d, ctx.cfg.beta)?;
    let kappa = ctx.kappa()?;
    let corpus = TestFunctionCorpus::from_recipes(&d, ctx.cfg.corpus_or_err()?)?;
    let mut ps = ctx.cfg.p.clone();
    ps.sort_by(f64::total_cmp);
    let reports: Vec<_> = ps
        .iter()
        .map(|&p| pointwise_hardy_constant(&d, &w, p, kappa, &corpus))
        .collect::<Result<_>>()?;
    let curve: Vec<(f64, f64)> = reports.iter().map(|r| (r.p, r.constant)).collect();
    let nonincreasing = curve.windows(2).all(|c| c[1].1 <= c[0].1);
    out.text("hardy_scan.csv", &p_curve_csv(&curve))?;
    out.json(
        "hardy_scan.json",
        &HardyScan {
            beta: ctx.cfg.beta,
            kappa,
            nonincreasing,
            reports,
        },
    )?;
    check(nonincreasing, || "constant increased with p".into())
}

#[derive(Serialize)]
struct AlphaRow {
    q: f64,
    tau: f64,
    estimate: f64,
    /// `log10` of the certified bound, when `q` lies in the window.
    log10_bound: Option<f64>,
    pass: bool,
}

#[derive(Serialize)]
struct AlphaRun {
    beta: f64,
    qc_factor: f64,
    points: usize,
    certificate_k: Option<u64>,
    rows: Vec<AlphaRow>,
    reports: Vec<hardy::AlphaReport>,
    pass: bool,
}

pub fn alpha(ctx: &Ctx, out: &mut OutDir) -> anyhow::Result<()> {
    let (_, d) = ctx.cfg.domain(&ctx.base)?;
    let w = distance_power_weight(&d, ctx.cfg.beta)?;
    let kappa = ctx.kappa()?;
    let nu = ctx.cfg.need("nu", ctx.cfg.nu)?;
    let family = ctx
        .cfg
        .family
        .as_ref()
        .ok_or_else(|| config_err("family is required"))?;
    let qs = if ctx.cfg.q.is_empty() {
        &ctx.cfg.p
    } else {
        &ctx.cfg.q
    };
    let taus = ctx.cfg.nonempty("tau", &ctx.cfg.tau)?;
    let mut rng = ctx.rng();
    let qc = quasiconvexity_estimate(&d, ctx.cfg.samples, &mut rng);
    let d = d.with_qc_factor(qc);
    let pts = sample_points(&d, ctx.cfg.samples.min(32), &mut rng);
    let cert = ctx
        .cfg
        .hypotheses
        .as_ref()
        .map(improvement_certificate)
        .transpose()?;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut csv = String::from("q,tau,estimate,log10_bound\n");
    for &q in qs {
        for &tau in taus {
            let r = alpha_estimate(&d, &w, q, nu, kappa, tau, family, &pts)?;
            let mut pass = r.estimate <= nu * qc;
            let mut log10_bound = None;
            if let Some(c) = &cert {
                if q > c.q_lower && q <= c.p {
                    let b = alpha_bound(c, q, tau)?;
                    pass &= LogReal::from_f64(r.estimate) <= b;
                    log10_bound = Some(b.log10_abs());
                }
            }
            let b = log10_bound.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(csv, "{q},{tau},{},{b}", r.estimate);
            rows.push(AlphaRow {
                q,
                tau,
                estimate: r.estimate,
                log10_bound,
                pass,
            });
            reports.push(r);
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    out.text("alpha.csv", &csv)?;
    out.json(
        "alpha.json",
        &AlphaRun {
            beta: ctx.cfg.beta,
            qc_factor: qc,
            points: pts.len(),
            certificate_k: cert.map(|c| c.k),
            rows,
            reports,
            pass,
        },
    )?;
    check(pass, || "alpha estimate exceeds its bound".into())
}

#[derive(Serialize)]
struct Propagated {
    c2: f64,
    c_a: f64,
    kappa: f64,
    nu_min: f64,
}

#[derive(Serialize)]
struct PoincareRun {
    beta: f64,
    reports: Vec<hardy::PoincareReport>,
    propagated: Option<Propagated>,
    pointwise: Vec<(String, hardy::PointwisePoincareReport)>,
    pass: bool,
}

pub fn poincare(ctx: &Ctx, out: &mut OutDir) -> anyhow::Result<()> {
    let (_, d) = ctx.cfg.domain(&ctx.base)?;
    let w = distance_power_weight(&d, ctx.cfg.beta)?;
    let lambda = ctx.cfg.need("lambda", ctx.cfg.lambda)?;
    let corpus = TestFunctionCorpus::from_recipes(&d, ctx.cfg.corpus_or_err()?)?;
    let mut rng = ctx.rng();
    let mut reports = Vec::new();
    for &p in &ctx.cfg.p {
        reports.push(poincare_ball_constant(
            &d,
            &w,
            p,
            lambda,
            &corpus,
            ctx.cfg.samples,
            &mut rng,
        )?);
    }
    let mut propagated = None;
    let mut pointwise = Vec::new();
    if let Some(pc) = ctx.cfg.poincare {
        let (c2, c_a, kappa, nu_min) = propagate_poincare_constants(pc.c1, lambda, pc.d_half)?;
        propagated = Some(Propagated {
            c2,
            c_a,
            kappa,
            nu_min,
        });
        for &p in &ctx.cfg.p {
            for e in corpus.entries() {
                let r = pointwise_poincare_check(
                    &d,
                    &w,
                    p,
                    lambda,
                    &e.u,
                    &e.g,
                    pc.c1,
                    pc.d_half,
                    ctx.cfg.samples,
                    &mut rng,
                )?;
                pointwise.push((e.label.clone(), r));
            }
        }
    }
    let pass = pointwise.iter().all(|(_, r)| r.pass);
    out.json(
        "poincare.json",
        &PoincareRun {
            beta: ctx.cfg.beta,
            reports,
            propagated,
            pointwise,
            pass,
        },
    )?;
    check(pass, || "pointwise Poincare inequality violated".into())
}

pub fn improve(ctx: &Ctx, out: &mut OutDir) -> anyhow::Result<()> {
    let h = ctx
        .cfg
        .hypotheses
        .ok_or_else(|| config_err("hypotheses are required"))?;
    let mut cert = improvement_certificate(&h)?;
    if !ctx.cfg.q_fractions.is_empty() {
        cert.sample(&ctx.cfg.q_fractions)?;
    }
    out.json("certificate.json", &cert)
}

pub fn beta_experiment(ctx: &Ctx, out: &mut OutDir) -> anyhow::Result<()> {
    let (_, d) = ctx.cfg.domain(&ctx.base)?;
    let corpus = TestFunctionCorpus::from_recipes(&d, ctx.cfg.corpus_or_err()?)?;
    let betas = if ctx.cfg.betas.is_empty() {
        vec![ctx.cfg.beta]
    } else {
        ctx.cfg.betas.clone()
    };
    let mut reports = Vec::new();
    let mut csv = String::from("beta,p,pointwise_constant,integral_ratio,weighted_constant\n");
    for &beta in &betas {
        for &p in &ctx.cfg.p {
            let r = beta_hardy_experiment(&d, beta, p, &corpus)?;
            let _ = writeln!(
                csv,
                "{beta},{p},{},{},{}",
                r.pointwise_constant, r.integral_ratio, r.weighted_constant
            );
            reports.push(r);
        }
    }
    out.text("beta.csv", &csv)?;
    out.json("beta.json", &reports)
}
