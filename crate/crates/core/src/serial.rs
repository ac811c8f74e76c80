//! Text and JSON renderings of series, modules and certificates.
//!
//! Valuations and precisions are written in `θ`-units (`v_∞(θ) = −1`), as
//! reduced rationals with denominator dividing `m`.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::drinfeld::DrinfeldModule;
use crate::error::{Error, Result};
use crate::field::{parse_units, Ctx, Fe};
use crate::relations::RelationCertificate;
use crate::series::{RamifiedSeries, EXACT};

fn units(k: &Ctx, v: i64) -> String {
    if v >= EXACT {
        "inf".into()
    } else {
        k.fmt_units(v)
    }
}

fn parse_units_or_inf(text: &str, m: i64) -> Result<i64> {
    match text.trim() {
        "inf" => Ok(EXACT),
        t => parse_units(t, m),
    }
}

/// Known coefficients from the valuation through the last nonzero one.
fn dense(x: &RamifiedSeries) -> (i64, Vec<Fe>) {
    match x.val() {
        None => (x.prec(), Vec::new()),
        Some(v) => {
            let last = x.terms().last().map(|(i, _)| i).unwrap_or(v);
            (v, (v..=last).map(|i| x.coeff(i)).collect())
        }
    }
}

/// `v=<rational>; prec=<rational|inf>; coeffs=<hex>`.
pub fn series_to_text(x: &RamifiedSeries) -> String {
    let k = x.ctx();
    let w = k.hex_width();
    let (v, c) = dense(x);
    let hex: String = c.iter().map(|e| format!("{:0w$x}", e.0)).collect();
    format!("v={}; prec={}; coeffs={hex}", units(k, v), units(k, x.prec()))
}

pub fn series_from_text(k: &Arc<Ctx>, text: &str) -> Result<RamifiedSeries> {
    let mut v = None;
    let mut prec = None;
    let mut coeffs = None;
    for part in text.trim().split(';') {
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value in `{part}`")))?;
        match key.trim() {
            "v" => v = Some(parse_units_or_inf(val, k.m())?),
            "prec" => prec = Some(parse_units_or_inf(val, k.m())?),
            "coeffs" => coeffs = Some(parse_hex(k, val.trim())?),
            other => return Err(Error::Parse(format!("unknown series field `{other}`"))),
        }
    }
    let (Some(v), Some(prec), Some(coeffs)) = (v, prec, coeffs) else {
        return Err(Error::Parse("series needs v, prec and coeffs".into()));
    };
    if coeffs.is_empty() {
        return Ok(RamifiedSeries::zero_to(k, prec));
    }
    Ok(RamifiedSeries::new(k, v, coeffs, prec))
}

fn parse_hex(k: &Ctx, hex: &str) -> Result<Vec<Fe>> {
    let w = k.hex_width();
    if hex.len() % w != 0 || !hex.is_ascii() {
        return Err(Error::Parse(format!("coefficient string length not a multiple of {w}")));
    }
    (0..hex.len() / w)
        .map(|i| {
            let d = u16::from_str_radix(&hex[i * w..(i + 1) * w], 16)
                .map_err(|_| Error::Parse(format!("bad hex digit group in `{hex}`")))?;
            if d as usize >= k.size() {
                return Err(Error::Parse(format!("element {d} outside F_{}", k.size())));
            }
            Ok(Fe(d))
        })
        .collect()
}

/// `{ "val": "a/m", "prec": "b/m", "coeffs": [...] }`.
pub fn series_to_json(x: &RamifiedSeries) -> Value {
    let k = x.ctx();
    let (v, c) = dense(x);
    json!({
        "val": units(k, v),
        "prec": units(k, x.prec()),
        "coeffs": c.iter().map(|e| e.0).collect::<Vec<_>>(),
    })
}

pub fn series_from_json(k: &Arc<Ctx>, v: &Value) -> Result<RamifiedSeries> {
    let field = |name: &str| {
        v.get(name).ok_or_else(|| Error::Parse(format!("series JSON lacks `{name}`")))
    };
    let as_str = |x: &Value| x.as_str().map(str::to_owned).ok_or_else(|| Error::Parse("expected a string".into()));
    let val = parse_units_or_inf(&as_str(field("val")?)?, k.m())?;
    let prec = parse_units_or_inf(&as_str(field("prec")?)?, k.m())?;
    let coeffs = field("coeffs")?
        .as_array()
        .ok_or_else(|| Error::Parse("coeffs must be an array".into()))?
        .iter()
        .map(|c| {
            c.as_u64()
                .filter(|&d| (d as usize) < k.size())
                .map(|d| Fe(d as u16))
                .ok_or_else(|| Error::Parse(format!("bad coefficient {c}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if coeffs.is_empty() {
        return Ok(RamifiedSeries::zero_to(k, prec));
    }
    Ok(RamifiedSeries::new(k, val, coeffs, prec))
}

/// `{ "r": r, "g": [series…] }`.
pub fn module_to_json(phi: &DrinfeldModule) -> Value {
    json!({ "r": phi.rank(), "g": phi.g().iter().map(series_to_json).collect::<Vec<_>>() })
}

pub fn module_from_json(k: &Arc<Ctx>, v: &Value) -> Result<DrinfeldModule> {
    let g = v
        .get("g")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("module JSON lacks `g`".into()))?
        .iter()
        .map(|s| series_from_json(k, s))
        .collect::<Result<Vec<_>>>()?;
    if let Some(r) = v.get("r").and_then(Value::as_u64) {
        if r as usize != g.len() {
            return Err(Error::Parse(format!("rank {r} but {} coefficients", g.len())));
        }
    }
    DrinfeldModule::new(k, g)
}

/// `{ "P": [[coeffs]…], "val": "a/m", "bounds": {…}, "prec": … }`; row `i`
/// lists the coefficients of `θ^{j/denom} X^i` for `j = 0, 1, …`.
pub fn certificate_to_json(k: &Ctx, c: &RelationCertificate) -> Value {
    json!({
        "P": c.p.coeffs.iter().map(|row| row.iter().map(|e| e.0).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "ring": c.p.ring,
        "denom": c.p.denom,
        "val": units(k, c.val),
        "bounds": {
            "d": c.bounds.d,
            "h": c.bounds.h,
            "v_t": units(k, c.bounds.v_t),
            "ring": c.bounds.ring,
        },
        "prec": units(k, c.prec),
    })
}
