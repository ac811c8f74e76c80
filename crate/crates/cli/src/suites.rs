//! Verification suites. Each returns report rows in a fixed order; samples
//! are evaluated in parallel and collected by index, so the output does not
//! depend on the thread count.

use std::sync::Arc;

use drinfeld_core::carlitz::{carlitz_period, generalized_period, omega_at_theta, omega_series};
use drinfeld_core::cm::{cm_point, generic_samples, CmKind, UpperHalfPoint};
use drinfeld_core::drinfeld::DrinfeldModule;
use drinfeld_core::eisenstein::{eisenstein_eval, EisensteinSpec, EvalBudget};
use drinfeld_core::modular::{
    eisenstein_evaluator, eisenstein_expansion_check, level_change_check, sample_gamma_n, slash_residual, Cusp,
    CuspBudget, ExpansionOptions, SlashContext,
};
use drinfeld_core::periods::{legendre_check, period_matrix, sqrt_theta_cm_module, PeriodOptions};
use drinfeld_core::poly::ThetaPoly;
use drinfeld_core::relations::{
    cm_value_certify, detect_relation, independence_probe, trdeg_predict, CoeffRing, ProbeBounds, RelationBounds,
};
use drinfeld_core::report::CheckRecord;
use drinfeld_core::serial::certificate_to_json;
use drinfeld_core::tseries::TSeries;
use drinfeld_core::{Ctx, Error, RamifiedSeries, EXACT};
use rand::SeedableRng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

pub const SUITES: &[&str] =
    &["exp", "quasi", "omega", "automorphy", "levelchange", "expansion", "legendre", "cm", "independence"];

#[derive(Debug, Default)]
pub struct SuiteOutput {
    pub records: Vec<CheckRecord>,
    /// Certificates and similar artifacts, if any.
    pub artifacts: Option<Value>,
}

/// Budget exhaustion aborts the suite; other sample errors become failed rows.
fn row(k: &Ctx, check: &str, sample: usize, res: drinfeld_core::Result<i64>, thr: i64) -> Result<CheckRecord, CliError> {
    match res {
        Ok(v) => Ok(CheckRecord::new(k, check, sample, v, thr)),
        Err(e @ (Error::Budget(_) | Error::TailBound(_))) => Err(e.into()),
        Err(e) => Ok(CheckRecord::failed(check, sample, &e.to_string())),
    }
}

fn sample_rng(seed: u64, i: usize) -> rand_chacha::ChaCha8Rng {
    rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64))
}

pub fn run_suite(name: &str, cfg: &RunConfig) -> Result<SuiteOutput, CliError> {
    let k = cfg.ctx()?;
    match name {
        "exp" => exp_suite(cfg, &k),
        "quasi" => quasi_suite(cfg, &k),
        "omega" => omega_suite(cfg, &k),
        "automorphy" => automorphy_suite(cfg, &k),
        "levelchange" => level_change_suite(cfg, &k),
        "expansion" => expansion_suite(cfg, &k),
        "legendre" => legendre_suite(cfg, &k),
        "cm" => cm_suite(cfg, &k),
        "independence" => independence_suite(cfg, &k),
        other => Err(CliError::Config(format!("unknown suite `{other}`; expected one of {}", SUITES.join(", ")))),
    }
}

fn random_modules(cfg: &RunConfig, k: &Arc<Ctx>) -> Result<Vec<DrinfeldModule>, CliError> {
    (0..cfg.samples)
        .map(|i| Ok(DrinfeldModule::random(k, 1 + i % 3, 3, &mut sample_rng(cfg.seed, i))?))
        .collect()
}

/// `φ_t(exp X) − exp(θX)` for seeded modules of rank 1–3, plus `exp_C(π̃)`
/// when the Carlitz period is available.
fn exp_suite(cfg: &RunConfig, k: &Arc<Ctx>) -> Result<SuiteOutput, CliError> {
    let prec = cfg.prec_idx();
    let thr = cfg.threshold_for(prec);
    let mods = random_modules(cfg, k)?;
    let mut records: Vec<CheckRecord> = mods
        .par_iter()
        .enumerate()
        .map(|(i, phi)| row(k, "exp_functional_equation", i, phi.exp_functional_residual(cfg.kmax, prec), thr))
        .collect::<Result<_, _>>()?;
    if cfg.require_carlitz().is_ok() {
        let res = carlitz_residual(k, cfg.kmax, prec);
        records.push(row(k, "carlitz_kernel", 0, res, thr)?);
    }
    Ok(SuiteOutput { records, artifacts: None })
}

pub fn carlitz_residual(k: &Arc<Ctx>, kmax: usize, prec: i64) -> drinfeld_core::Result<i64> {
    let m = k.m();
    let pi = carlitz_period(k, prec + 4 * m)?;
    let exp = DrinfeldModule::carlitz(k).exp_coeffs(kmax.min(16), prec + 10 * m)?;
    Ok(exp.eval(&pi, prec)?.0.val_or_prec())
}

fn quasi_suite(cfg: &RunConfig, k: &Arc<Ctx>) -> Result<SuiteOutput, CliError> {
    let prec = cfg.prec_idx();
    let thr = cfg.threshold_for(prec);
    let mods = random_modules(cfg, k)?;
    let jobs: Vec<(usize, usize)> =
        mods.iter().enumerate().flat_map(|(n, phi)| (0..phi.rank()).map(move |i| (n, i))).collect();
    let records = jobs
        .par_iter()
        .map(|&(n, i)| {
            let res = mods[n].quasi_functional_residual(i, cfg.kmax, prec);
            row(k, &format!("quasi_functional_equation_tau{i}"), n, res, thr)
        })
        .collect::<Result<_, _>>()?;
    Ok(SuiteOutput { records, artifacts: None })
}

fn omega_suite(cfg: &RunConfig, k: &Arc<Ctx>) -> Result<SuiteOutput, CliError> {
    cfg.require_carlitz()?;
    let prec = cfg.prec_idx();
    let m = k.m();
    let thr = cfg.threshold_for(prec);
    let twist = (|| {
        let om = omega_series(k, cfg.t_order, k.q() as i64 * prec + 10 * m)?;
        let tw = om.frobenius_twist(-1, EXACT)?;
        let lin = TSeries::new(k, vec![RamifiedSeries::theta(k).neg(), RamifiedSeries::one(k)], cfg.t_order);
        Ok(tw.sub(&lin.mul(&om)).min_val())
    })();
    let special = (|| {
        let pi = carlitz_period(k, prec + 10 * m)?;
        let w = omega_at_theta(k, prec + 10 * m)?;
        Ok(w.mul(&pi).add(&RamifiedSeries::one(k)).val_or_prec())
    })();
    Ok(SuiteOutput {
        records: vec![row(k, "omega_twist", 0, twist, thr)?, row(k, "omega_at_theta_times_pi", 0, special, thr)?],
        artifacts: None,
    })
}

fn eval_budget(cfg: &RunConfig) -> EvalBudget {
    EvalBudget { max_degree: cfg.deg_budget, guard: 24 }
}

/// `sqrt_theta` followed by seeded generic points.
fn sample_points(cfg: &RunConfig, k: &Arc<Ctx>) -> Result<Vec<UpperHalfPoint>, CliError> {
    let mut pts = vec![cm_point(k, &CmKind::SqrtTheta, cfg.prec_idx())?.point];
    pts.extend(generic_samples(k, cfg.points.saturating_sub(1), cfg.seed)?);
    Ok(pts)
}

fn automorphy_suite(cfg: &RunConfig, k: &Arc<Ctx>) -> Result<SuiteOutput, CliError> {
    let target = cfg.prec_idx();
    let thr = cfg.threshold_for(target);
    let theta = ThetaPoly::theta();
    let spec = EisensteinSpec::new(k, theta.clone(), vec![ThetaPoly::one(), ThetaPoly::zero()])?;
    let f = eisenstein_evaluator(&spec, eval_budget(cfg));
    let gammas = sample_gamma_n(k, 2, &theta, cfg.samples, 2, 1, cfg.seed);
    let pts = sample_points(cfg, k)?;
    let sc = SlashContext { weight: 1, type_m: 0 };
    let jobs: Vec<(usize, usize)> = (0..gammas.len()).flat_map(|g| (0..pts.len()).map(move |p| (g, p))).collect();
    let records = jobs
        .par_iter()
        .map(|&(g, p)| {
            let res = slash_residual(&f, sc, &gammas[g], &pts[p], target);
            row(k, "eisenstein_weight_one_slash", g * pts.len() + p, res, thr)
        })
        .collect::<Result<_, _>>()?;
    Ok(SuiteOutput { records, artifacts: None })
}

fn rank_one_cusp(cfg: &RunConfig, k: &Arc<Ctx>, work: i64) -> Result<Cusp, CliError> {
    cfg.require_carlitz()?;
    let tail = UpperHalfPoint::new(vec![RamifiedSeries::one(k)])?;
    Ok(Cusp::new(&tail, work, CuspBudget { kmax: cfg.kmax.min(10), ..CuspBudget::default() })?)
}

fn level_change_suite(cfg: &RunConfig, k: &Arc<Ctx>) -> Result<SuiteOutput, CliError> {
    let work = cfg.prec_idx();
    let thr = cfg.threshold_for(work);
    let cusp = rank_one_cusp(cfg, k, work)?;
    let n1 = ThetaPoly::theta().mul(k, &ThetaPoly::theta());
    let n2 = ThetaPoly::theta();
    let pts = generic_samples(k, cfg.points, cfg.seed)?;
    let records = pts
        .par_iter()
        .enumerate()
        .map(|(i, w)| row(k, "level_change_theta2_to_theta", i, level_change_check(&cusp, &n1, &n2, w).map(|l| l.residual), thr))
        .collect::<Result<_, _>>()?;
    Ok(SuiteOutput { records, artifacts: None })
}

fn expansion_suite(cfg: &RunConfig, k: &Arc<Ctx>) -> Result<SuiteOutput, CliError> {
    let target = cfg.prec_idx();
    let thr = cfg.threshold_for(target);
    let cusp = rank_one_cusp(cfg, k, target + 20 * k.m())?;
    let theta = ThetaPoly::theta();
    let us = [(1, 0), (0, 1), (1, 1)];
    let specs: Vec<EisensteinSpec> = us
        .iter()
        .map(|&(a, b)| {
            let c = |x| if x == 1 { ThetaPoly::one() } else { ThetaPoly::zero() };
            EisensteinSpec::new(k, theta.clone(), vec![c(a), c(b)])
        })
        .collect::<drinfeld_core::Result<_>>()?;
    let pts = sample_points(cfg, k)?;
    let jobs: Vec<(usize, usize)> = (0..pts.len()).flat_map(|p| (0..specs.len()).map(move |u| (p, u))).collect();
    let records = jobs
        .par_iter()
        .map(|&(p, u)| {
            let res = eisenstein_expansion_check(&cusp, &specs[u], &pts[p], target, ExpansionOptions::default(), eval_budget(cfg))
                .map(|e| e.residual);
            let (a, b) = us[u];
            row(k, &format!("expansion_u=({a},{b})/theta"), p, res, thr)
        })
        .collect::<Result<_, _>>()?;
    Ok(SuiteOutput { records, artifacts: None })
}

fn detector_bounds(cfg: &RunConfig, ring: CoeffRing) -> RelationBounds {
    RelationBounds { d: cfg.rel_d, h: cfg.rel_h, v_t: cfg.threshold_for(cfg.prec_idx()), ring }
}

/// Records a certificate search; `stable` is the re-run at `prec + 20`.
fn certificate_rows(
    k: &Ctx,
    name: &str,
    found: drinfeld_core::Result<Option<drinfeld_core::relations::RelationCertificate>>,
    stable: Option<drinfeld_core::Result<Option<drinfeld_core::relations::RelationCertificate>>>,
    thr: i64,
    artifacts: &mut Vec<Value>,
) -> Result<Vec<CheckRecord>, CliError> {
    let mut out = Vec::new();
    let cert = match found {
        Ok(Some(c)) => c,
        Ok(None) => {
            out.push(CheckRecord::failed(name, 0, "no relation within bounds (inconclusive)"));
            return Ok(out);
        }
        Err(e @ Error::Budget(_)) => return Err(e.into()),
        Err(e) => {
            out.push(CheckRecord::failed(name, 0, &e.to_string()));
            return Ok(out);
        }
    };
    out.push(CheckRecord::new(k, name, 0, cert.val, thr));
    artifacts.push(json!({ "check": name, "certificate": certificate_to_json(k, &cert) }));
    if let Some(again) = stable {
        let stable_name = format!("{name}_stable_at_prec_plus_20");
        match again {
            Ok(Some(c2)) if c2.p == cert.p => out.push(CheckRecord::new(k, &stable_name, 0, c2.val, thr)),
            Ok(Some(_)) => out.push(CheckRecord::failed(&stable_name, 0, "different polynomial")),
            Ok(None) => out.push(CheckRecord::failed(&stable_name, 0, "certificate lost")),
            Err(e) => out.push(CheckRecord::failed(&stable_name, 0, &e.to_string())),
        }
    }
    Ok(out)
}

fn legendre_at(cfg: &RunConfig, k: &Arc<Ctx>, prec: i64) -> drinfeld_core::Result<(i64, Option<drinfeld_core::relations::RelationCertificate>)> {
    let opts = PeriodOptions { kmax: cfg.kmax.min(12), prec, threshold: cfg.threshold_for(prec) };
    let (psi, periods, _) = sqrt_theta_cm_module(k, prec)?;
    let p = period_matrix(&psi, &periods, opts)?;
    let pi = carlitz_period(k, prec)?;
    let res = legendre_check(&p, &pi, detector_bounds(cfg, CoeffRing::Extended))?;
    Ok((p.period_residual, res.certificate))
}

fn legendre_suite(cfg: &RunConfig, k: &Arc<Ctx>) -> Result<SuiteOutput, CliError> {
    cfg.require_carlitz()?;
    let prec = cfg.prec_idx();
    let thr = cfg.threshold_for(prec);
    let (a, b) = rayon::join(|| legendre_at(cfg, k, prec), || legendre_at(cfg, k, prec + 20 * k.m()));
    let mut records = Vec::new();
    let mut arts = Vec::new();
    records.push(row(k, "cm_period_check", 0, a.as_ref().map(|x| x.0).map_err(Clone::clone), thr)?);
    records.extend(certificate_rows(k, "legendre_determinant", a.map(|x| x.1), Some(b.map(|x| x.1)), thr, &mut arts)?);
    Ok(SuiteOutput { records, artifacts: Some(Value::Array(arts)) })
}

fn eisenstein_at_sqrt_theta(cfg: &RunConfig, k: &Arc<Ctx>, v: (u8, u8), prec: i64) -> drinfeld_core::Result<RamifiedSeries> {
    let c = |x| if x == 1 { ThetaPoly::one() } else { ThetaPoly::zero() };
    let spec = EisensteinSpec::new(k, ThetaPoly::theta(), vec![c(v.0), c(v.1)])?;
    let w = cm_point(k, &CmKind::SqrtTheta, prec)?.point;
    Ok(eisenstein_eval(&spec, &w, prec, eval_budget(cfg))?.value)
}

fn cm_ratio(cfg: &RunConfig, k: &Arc<Ctx>, prec: i64) -> drinfeld_core::Result<Option<drinfeld_core::relations::RelationCertificate>> {
    let a = eisenstein_at_sqrt_theta(cfg, k, (1, 0), prec)?;
    let b = eisenstein_at_sqrt_theta(cfg, k, (0, 1), prec)?;
    let ratio = a.mul(&b.inv_rel(b.rel_prec())?);
    detect_relation(&ratio, detector_bounds(cfg, CoeffRing::Extended))
}

fn cm_suite(cfg: &RunConfig, k: &Arc<Ctx>) -> Result<SuiteOutput, CliError> {
    let prec = cfg.prec_idx();
    let thr = cfg.threshold_for(prec);
    let (a, b) = rayon::join(|| cm_ratio(cfg, k, prec), || cm_ratio(cfg, k, prec + 20 * k.m()));
    let mut arts = Vec::new();
    let mut records = certificate_rows(k, "eisenstein_ratio_(1,0)/(0,1)", a, Some(b), thr, &mut arts)?;
    // E_u(ω)/λ_ω with λ_ω the period of the CM lattice F_q[θ^{1/2}]
    let m = k.m();
    let y = RamifiedSeries::theta_frac(k, m / 2);
    let values = [(1u8, 0u8), (0, 1)]
        .iter()
        .map(|&v| Ok((format!("eisenstein_({},{})_over_cm_period", v.0, v.1), eisenstein_at_sqrt_theta(cfg, k, v, prec)?)))
        .collect::<drinfeld_core::Result<Vec<_>>>();
    match values.and_then(|vals| {
        let lambda = generalized_period(k, &y, prec)?;
        cm_value_certify(&vals, &lambda, detector_bounds(cfg, CoeffRing::Extended), prec)
    }) {
        Ok(entries) => {
            for e in entries {
                let found = match (e.certificate, e.inconclusive) {
                    (Some(c), _) => Ok(Some(c)),
                    (None, Some(why)) => Err(Error::Precision(why)),
                    (None, None) => Ok(None),
                };
                records.extend(certificate_rows(k, &e.label, found, None, thr, &mut arts)?);
            }
        }
        Err(e @ (Error::Config(_) | Error::Domain(_))) => return Err(e.into()),
        Err(e) => records.push(CheckRecord::failed("eisenstein_over_cm_period", 0, &e.to_string())),
    }
    Ok(SuiteOutput { records, artifacts: Some(Value::Array(arts)) })
}

/// Negative controls; a passing row means no relation was found, which is
/// evidence consistent with transcendence, not a proof.
fn independence_suite(cfg: &RunConfig, k: &Arc<Ctx>) -> Result<SuiteOutput, CliError> {
    cfg.require_carlitz()?;
    if k.p() == 2 {
        return Err(CliError::Config(
            "two non-isogenous quadratic CM rings need odd characteristic in this model".into(),
        ));
    }
    let prec = cfg.prec_idx();
    let m = k.m();
    let v_t = (60 * m).min(prec / 2);
    let mut records = Vec::new();
    let pi = carlitz_period(k, prec)?;
    let b = RelationBounds { d: 3, h: 10, v_t, ring: CoeffRing::Base };
    let pi_rel = detect_relation(&pi, b);
    records.push(negative_row(k, "carlitz_period_no_relation_d3_h10", 0, pi_rel.map(|c| c.map(|c| c.val)), v_t)?);

    let y1 = RamifiedSeries::theta_frac(k, m / 2);
    let y2 = RamifiedSeries::theta(k).add(&RamifiedSeries::one(k)).nth_root(2, prec)?;
    let pinv = pi.inv_rel(prec)?;
    let xs = [y1, y2]
        .iter()
        .map(|y| Ok(generalized_period(k, y, prec)?.mul(&pinv)))
        .collect::<drinfeld_core::Result<Vec<_>>>()?;
    let pb = ProbeBounds { total_degree: 3, h: 8, v_t, ring: CoeffRing::Base };
    let report = independence_probe(&xs, pb);
    let mut art = json!({ "trdeg_prediction": trdeg_predict(&[2, 2], true, true, None)? });
    match report {
        Ok(rep) => {
            for (i, u) in rep.univariate.iter().enumerate() {
                records.push(negative_row(k, "cm_period_ratio_univariate_no_relation", i, Ok(u.as_ref().map(|c| c.val)), v_t)?);
            }
            records.push(negative_row(k, "cm_period_ratios_no_cross_relation", 0, Ok(rep.cross.as_ref().map(|c| c.val)), v_t)?);
            art["probe"] = serde_json::to_value(&rep).expect("report serializes");
        }
        Err(e @ Error::Budget(_)) => return Err(e.into()),
        Err(e) => records.push(CheckRecord::failed("cm_period_ratio_probe", 0, &e.to_string())),
    }
    Ok(SuiteOutput { records, artifacts: Some(art) })
}

/// `found` is the valuation of a discovered relation, if any.
fn negative_row(k: &Ctx, check: &str, sample: usize, found: drinfeld_core::Result<Option<i64>>, v_t: i64) -> Result<CheckRecord, CliError> {
    match found {
        Ok(None) => Ok(CheckRecord {
            check: check.into(),
            sample,
            residual_valuation: format!("none below {}", k.fmt_units(v_t)),
            pass: true,
        }),
        Ok(Some(v)) => Ok(CheckRecord::new(k, check, sample, v, EXACT)),
        Err(e @ Error::Budget(_)) => Err(e.into()),
        Err(e) => Ok(CheckRecord::failed(check, sample, &e.to_string())),
    }
}
