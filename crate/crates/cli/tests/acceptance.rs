//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use drinfeld_cli::config::RunConfig;
use drinfeld_cli::render_report;
use drinfeld_cli::suites::{carlitz_residual, run_suite, SuiteOutput, SUITES};
use drinfeld_core::carlitz::{carlitz_period, omega_at_theta, omega_series};
use drinfeld_core::lattice::{drinfeld_from_lattice, Lattice};
use drinfeld_core::relations::trdeg_predict;
use drinfeld_core::tseries::TSeries;
use drinfeld_core::{Ctx, FieldParams, RamifiedSeries, EXACT};

// pinned tolerances (fractions of the precision) and time limits
const C1_FRAC: f64 = 0.8;
const C1_LIMIT: Duration = Duration::from_secs(5);
const C2_FRAC: f64 = 0.8;
const C2_LIMIT: Duration = Duration::from_secs(60);
const C3_TWIST_FRAC: f64 = 0.8;
const C3_SPECIAL_FRAC: f64 = 0.7;
const C4_CARLITZ_FRAC: f64 = 0.7;
const C4_ROUND_TRIP_FRAC: f64 = 0.6;
const C4_LIMIT: Duration = Duration::from_secs(120);
const C5_FRAC: f64 = 0.6;
const C5_LIMIT: Duration = Duration::from_secs(300);
const C6_FRAC: f64 = 0.5;
const C6_LIMIT: Duration = Duration::from_secs(300);
const C7_FRAC: f64 = 0.5;

fn ctx(p: u32, e: u32, s: u32, m: u32) -> Arc<Ctx> {
    Ctx::new(FieldParams::new(p, e, s, m)).unwrap()
}

fn frac(prec: i64, f: f64) -> i64 {
    (prec as f64 * f).ceil() as i64
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(n: usize, name: &str, o: &Outcome, elapsed: Duration) -> bool {
    let line = format!(
        "criterion {n:>2} [{}] {name}: {} ({:.2}s)\n",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64()
    );
    // bypasses the harness capture so the lines always appear
    std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
    o.pass
}

fn cfg(p: u32, s: u32, m: u32, prec: i64) -> RunConfig {
    RunConfig { p, s, m, prec, ..RunConfig::default() }
}

fn suite_passes(name: &str, c: &RunConfig) -> (bool, String) {
    match run_suite(name, c) {
        Ok(SuiteOutput { records, .. }) => {
            let bad: Vec<_> = records.iter().filter(|r| !r.pass).collect();
            let worst = records.iter().map(|r| r.residual_valuation.clone()).min_by_key(|s| worst_key(s));
            (
                bad.is_empty() && !records.is_empty(),
                format!(
                    "{name} q={}: {}/{} rows pass, worst residual {}",
                    c.q(),
                    records.len() - bad.len(),
                    records.len(),
                    worst.unwrap_or_default()
                ),
            )
        }
        Err(e) => (false, format!("{name} q={}: {e}", c.q())),
    }
}

/// Orders residual strings numerically; errors sort first.
fn worst_key(s: &str) -> i64 {
    let pnum = |t: &str| -> Option<i64> {
        let (a, b) = t.split_once('/').unwrap_or((t, "1"));
        Some(a.parse::<i64>().ok()? * 1000 / b.parse::<i64>().ok()?)
    };
    if s == "inf" {
        i64::MAX
    } else {
        pnum(s).unwrap_or(i64::MIN)
    }
}

fn criterion_1() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [ctx(2, 1, 1, 1), ctx(3, 1, 2, 2)] {
        for prec_theta in [80, 160] {
            let prec = prec_theta * k.m();
            let t = Instant::now();
            let r = carlitz_residual(&k, 24, prec);
            let el = t.elapsed();
            let ok = matches!(r, Ok(v) if v >= frac(prec, C1_FRAC)) && el < C1_LIMIT;
            pass &= ok;
            let shown = r.map(|v| k.fmt_units(v)).unwrap_or_else(|e| e.to_string());
            parts.push(format!("q={} prec={prec_theta}: {shown} in {:.2}s", k.q(), el.as_secs_f64()));
        }
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [2, 3] {
        let c = RunConfig { samples: 20, threshold: C2_FRAC, ..cfg(p, 1, 1, 80) };
        for s in ["exp", "quasi"] {
            let (ok, d) = suite_passes(s, &c);
            pass &= ok;
            parts.push(d);
        }
    }
    pass &= t.elapsed() < C2_LIMIT;
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_3() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [ctx(2, 1, 1, 1), ctx(3, 1, 2, 2)] {
        let m = k.m();
        let prec = 80 * m;
        let q = k.q() as i64;
        let res = (|| -> drinfeld_core::Result<(i64, i64)> {
            let om = omega_series(&k, 12, q * prec + 10 * m)?;
            let tw = om.frobenius_twist(-1, EXACT)?;
            let lin = TSeries::new(&k, vec![RamifiedSeries::theta(&k).neg(), RamifiedSeries::one(&k)], 12);
            let twist = tw.sub(&lin.mul(&om)).min_val();
            let pi = carlitz_period(&k, prec + 10 * m)?;
            let w = omega_at_theta(&k, prec + 10 * m)?;
            Ok((twist, w.mul(&pi).add(&RamifiedSeries::one(&k)).val_or_prec()))
        })();
        match res {
            Ok((a, b)) => {
                pass &= a >= frac(prec, C3_TWIST_FRAC) && b >= frac(prec, C3_SPECIAL_FRAC);
                parts.push(format!("q={}: twist {}, Ω(θ)π̃+1 {}", k.q(), k.fmt_units(a), k.fmt_units(b)));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("q={}: {e}", k.q()));
            }
        }
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [ctx(2, 1, 1, 1), ctx(3, 1, 2, 2)] {
        let m = k.m();
        let prec = 80 * m;
        let res = (|| -> drinfeld_core::Result<i64> {
            let pi = carlitz_period(&k, prec + 20 * m)?;
            let phi = drinfeld_from_lattice(&Lattice::new(&k, vec![pi])?, 6, prec + 20 * m)?;
            Ok(phi.g()[0].sub(&RamifiedSeries::one(&k)).val_or_prec())
        })();
        let ok = matches!(res, Ok(v) if v >= frac(prec, C4_CARLITZ_FRAC));
        pass &= ok;
        parts.push(format!("q={}: g_1 − 1 {}", k.q(), res.map(|v| k.fmt_residual(v)).unwrap_or_else(|e| e.to_string())));
    }
    // rank two, q = 3, D = 4
    let k = ctx(3, 1, 2, 2);
    let m = k.m();
    let prec = 80 * m;
    let rel = prec + 20 * m;
    let res = (|| -> drinfeld_core::Result<i64> {
        let pi = carlitz_period(&k, rel)?;
        let basis = vec![pi.mul(&RamifiedSeries::theta_frac(&k, 1)), pi.clone()];
        let phi = drinfeld_from_lattice(&Lattice::new(&k, basis.clone())?, 4, rel)?;
        let exp = phi.exp_coeffs(10, rel)?;
        let mut worst = EXACT;
        for w in &basis {
            worst = worst.min(exp.eval(w, prec)?.0.val_or_prec());
        }
        Ok(worst)
    })();
    pass &= matches!(res, Ok(v) if v >= frac(prec, C4_ROUND_TRIP_FRAC));
    parts.push(format!("rank 2 round trip {}", res.map(|v| k.fmt_units(v)).unwrap_or_else(|e| e.to_string())));
    pass &= t.elapsed() < C4_LIMIT;
    Outcome { pass, detail: parts.join("; ") }
}

trait FmtResidual {
    fn fmt_residual(&self, v: i64) -> String;
}

impl FmtResidual for Ctx {
    fn fmt_residual(&self, v: i64) -> String {
        drinfeld_core::report::fmt_residual(self, v)
    }
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let c = RunConfig { samples: 10, points: 8, threshold: C5_FRAC, ..cfg(3, 2, 2, 80) };
    let (ok, d) = suite_passes("automorphy", &c);
    Outcome { pass: ok && t.elapsed() < C5_LIMIT, detail: d }
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, s) in [(2, 1), (3, 2)] {
        let c = RunConfig { points: 3, threshold: C6_FRAC, ..cfg(p, s, 2, 80) };
        for suite in ["expansion", "levelchange"] {
            let (ok, d) = suite_passes(suite, &c);
            pass &= ok;
            parts.push(d);
        }
    }
    pass &= t.elapsed() < C6_LIMIT;
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_7() -> Outcome {
    // ω = (θ^{1/2}, 1) with q = 3; θ^{1/2} and its Carlitz-type period need m = 4
    let c = RunConfig { threshold: C7_FRAC, rel_d: 4, rel_h: 8, ..cfg(3, 2, 4, 80) };
    let mut pass = true;
    let mut parts = Vec::new();
    for suite in ["cm", "legendre"] {
        let (ok, d) = suite_passes(suite, &c);
        pass &= ok;
        parts.push(d);
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    for n in 1..=8 {
        let p = trdeg_predict(&vec![2; n], true, true, None).unwrap();
        pass &= p.predicted == n + 1;
    }
    let cases: [(&[usize], usize); 4] = [(&[2, 2, 2], 4), (&[2, 3], 4), (&[3, 4, 5], 10), (&[7], 7)];
    for (r, want) in cases {
        pass &= trdeg_predict(r, true, true, None).unwrap().predicted == want;
        pass &= trdeg_predict(r, true, true, None).unwrap().predicted == r.iter().sum::<usize>() - (r.len() - 1);
    }
    pass &= trdeg_predict(&[2], true, true, Some(2)).unwrap().single_module == Some(2);
    Outcome { pass, detail: "n copies of rank 2 give n+1 for n ≤ 8; Σr_i − (n−1) on fixed cases; r²/s = 2".into() }
}

fn criterion_9() -> Outcome {
    let c = cfg(3, 2, 4, 120);
    let (ok, d) = suite_passes("independence", &c);
    Outcome { pass: ok, detail: format!("{d} (bounded negative evidence, not a proof)") }
}

fn criterion_10() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for &suite in SUITES {
        let c = match suite {
            "exp" | "quasi" => RunConfig { samples: 6, ..cfg(3, 1, 1, 40) },
            "legendre" | "cm" => cfg(3, 2, 4, 60),
            "independence" => cfg(3, 2, 4, 120),
            _ => RunConfig { samples: 3, points: 3, ..cfg(3, 2, 2, 30) },
        };
        let runs: Vec<String> = [1usize, 2, 4]
            .iter()
            .map(|&t| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
                pool.install(|| match run_suite(suite, &c) {
                    Ok(o) => render_report(&o.records) + &format!("{:?}", o.artifacts),
                    Err(e) => format!("error {e}"),
                })
            })
            .collect();
        let same = runs.windows(2).all(|w| w[0] == w[1]) && !runs[0].starts_with("error");
        pass &= same;
        parts.push(format!("{suite}:{}", if same { "identical" } else { "DIFFERS" }));
    }
    Outcome { pass, detail: format!("threads 1/2/4: {}", parts.join(" ")) }
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Carlitz kernel", criterion_1),
        ("functional equations", criterion_2),
        ("Ω checks", criterion_3),
        ("lattice ↔ module", criterion_4),
        ("Eisenstein automorphy", criterion_5),
        ("expansion and level-change chains", criterion_6),
        ("CM certification", criterion_7),
        ("transcendence-degree predictor", criterion_8),
        ("negative controls", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        if !report(i + 1, name, &o, t.elapsed()) {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
