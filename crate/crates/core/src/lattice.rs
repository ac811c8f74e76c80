//! `A`-lattices and their exponentials.
//!
//! `e_Λ` is approached through the finite `F_q`-spaces
//! `V_D = {Σ a_i w_i : deg a_i < D}`. Adjoining one direction `μ` to a space
//! `V` gives
//!
//! ```text
//! e_{V ⊕ F_q μ}(z) = e_V(z) − e_V(μ)^{1−q} · e_V(z)^q
//! ```
//!
//! so `e_{V_D}` is a composition of `rD` two-term maps. Its coefficients,
//! values at points, and the lattice sums `Σ_{λ∈V_D} 1/(x+λ) = 1/e_{V_D}(x)`
//! are all exact consequences of that product, and the first omitted layer
//! gives a precision estimate for the passage to `Λ`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::drinfeld::{DrinfeldModule, EntireSeries};
use crate::error::{Error, Result};
use crate::field::{Ctx, Fe};
use crate::poly::ThetaPoly;
use crate::series::{padd, RamifiedSeries, EXACT};

/// An `A`-lattice given by a basis `w_1, …, w_r`.
#[derive(Clone, Debug)]
pub struct Lattice {
    ctx: Arc<Ctx>,
    basis: Vec<RamifiedSeries>,
}

impl Lattice {
    pub fn new(ctx: &Arc<Ctx>, basis: Vec<RamifiedSeries>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Domain("lattice needs at least one basis vector".into()));
        }
        Ok(Self { ctx: ctx.clone(), basis })
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        &self.ctx
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[RamifiedSeries] {
        &self.basis
    }

    /// The homothetic lattice `cΛ`.
    pub fn scaled(&self, c: &RamifiedSeries) -> Self {
        Self { ctx: self.ctx.clone(), basis: self.basis.iter().map(|w| w.mul(c)).collect() }
    }

    /// `a · w = Σ a_i(θ) w_i`.
    pub fn combine(&self, a: &[ThetaPoly]) -> RamifiedSeries {
        let mut acc = RamifiedSeries::zero(&self.ctx);
        for (ai, wi) in a.iter().zip(&self.basis) {
            if !ai.is_zero() {
                acc = acc.add(&ai.to_series(&self.ctx).mul(wi));
            }
        }
        acc
    }

    /// A basis of the same lattice for which
    /// `|Σ a_i b_i| = max |a_i b_i|` holds pairwise, by repeated Gauss
    /// reduction `b_i ← b_i − [b_i/b_j] b_j`.
    pub fn reduced(&self) -> Result<Self> {
        let mut b = self.basis.clone();
        let r = b.len();
        for _ in 0..10_000 {
            let mut changed = false;
            for i in 0..r {
                for j in 0..r {
                    if i == j || b[j].val_or_prec() < b[i].val_or_prec() {
                        continue;
                    }
                    // digits of the quotient down to θ^0
                    let cap = b[j].val_or_prec() - b[i].val_or_prec() + 1;
                    let x = b[i].div_rel(&b[j], cap)?;
                    let a = polynomial_part(&x)?;
                    if !a.is_zero() {
                        b[i] = b[i].sub(&a.to_series(&self.ctx).mul(&b[j]));
                        if b[i].is_zero() {
                            return Err(Error::NumericallyZero(
                                "basis vector reduced to zero at working precision".into(),
                            ));
                        }
                        changed = true;
                    }
                }
            }
            if !changed {
                return Ok(Self { ctx: self.ctx.clone(), basis: b });
            }
        }
        Err(Error::Budget("lattice reduction did not terminate".into()))
    }

    /// `F_q`-basis `θ^j w_i` of `V_D`, degree-major.
    pub fn directions(&self, d: usize) -> Vec<RamifiedSeries> {
        let m = self.ctx.m();
        let mut out = Vec::with_capacity(d * self.rank());
        for j in 0..d {
            let tj = RamifiedSeries::theta_frac(&self.ctx, j as i64 * m);
            for w in &self.basis {
                out.push(w.mul(&tj));
            }
        }
        out
    }

    /// The product structure of `e_{V_D}` at relative working precision `rel`.
    pub fn subspace_exp(&self, d: usize, rel: i64) -> Result<SubspaceExp> {
        let k = &self.ctx;
        let dirs = self.directions(d);
        let mut sub = SubspaceExp {
            ctx: k.clone(),
            degree: d,
            consts: Vec::with_capacity(dirs.len()),
            next: None,
            rel,
        };
        for (j, mu) in dirs.iter().enumerate() {
            let e = sub.eval_raw(mu)?;
            if e.is_zero() {
                return Err(Error::NumericallyZero(format!(
                    "direction {j} lies in the span of the previous ones"
                )));
            }
            sub.consts.push(layer_constant(k, &e, rel)?);
        }
        // largest constant of the whole next layer, for the truncation
        // estimate (the basis need not be reduced)
        let td = RamifiedSeries::theta_frac(k, d as i64 * k.m());
        let mut probe = sub.clone();
        let mut next: Option<RamifiedSeries> = None;
        for w in &self.basis {
            let e = probe.eval_raw(&w.mul(&td))?;
            if e.is_zero() {
                return Err(Error::NumericallyZero(
                    "next layer lies in the span at working precision".into(),
                ));
            }
            let c = layer_constant(k, &e, rel)?;
            if next.as_ref().map_or(true, |n| c.val_or_prec() < n.val_or_prec()) {
                next = Some(c.clone());
            }
            probe.consts.push(c);
        }
        sub.next = next;
        Ok(sub)
    }

    /// Coefficients `β_0 … β_kmax` of `e_Λ` from the `D`-truncation.
    pub fn exp_product(&self, d: usize, kmax: usize, rel: i64) -> Result<EntireSeries> {
        self.subspace_exp(d, rel)?.coeffs(kmax)
    }

    /// Successive-`D` agreement of the coefficients: for each `k`, the valuation
    /// of `β_k(V_D) − β_k(V_{D−1})`.
    pub fn stabilization(&self, d: usize, kmax: usize, rel: i64) -> Result<Vec<i64>> {
        let a = self.subspace_exp(d - 1, rel)?.coeffs_raw(kmax)?;
        let b = self.subspace_exp(d, rel)?.coeffs_raw(kmax)?;
        Ok(a.iter().zip(&b).map(|(x, y)| x.sub(y).val_or_prec()).collect())
    }
}

/// The largest `a ∈ A` cancelling leading terms of `x`, so that `x − a`
/// has no leading term of the form `cθ^n` with `c ∈ F_q`, `n ≥ 0`.
pub fn polynomial_part(x: &RamifiedSeries) -> Result<ThetaPoly> {
    let k = x.ctx();
    let m = k.m();
    let mut rest = x.clone();
    let mut coeffs = Vec::new();
    while let Some(v) = rest.val() {
        let c = rest.lead().unwrap();
        if v > 0 || v % m != 0 || !k.in_fq(c) {
            break;
        }
        let n = (-v / m) as usize;
        if coeffs.len() <= n {
            coeffs.resize(n + 1, Fe::ZERO);
        }
        coeffs[n] = c;
        rest = rest.sub(&RamifiedSeries::monomial(k, c, v));
    }
    if rest.is_zero() && rest.prec() <= 0 {
        return Err(Error::Precision("quotient known only to its integral part".into()));
    }
    Ok(ThetaPoly::new(coeffs))
}

/// `e^{1−q}` at relative precision `rel`.
fn layer_constant(k: &Arc<Ctx>, e: &RamifiedSeries, rel: i64) -> Result<RamifiedSeries> {
    e.pow(k.q() - 1, rel).inv_rel(rel)
}

/// `e_{V_D}` stored as the sequence of layer constants `e_{V_j}(μ_{j+1})^{1−q}`.
#[derive(Clone, Debug)]
pub struct SubspaceExp {
    ctx: Arc<Ctx>,
    degree: usize,
    consts: Vec<RamifiedSeries>,
    next: Option<RamifiedSeries>,
    rel: i64,
}

/// Summary of a lattice truncation, for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationInfo {
    pub degree: usize,
    pub dim: usize,
    /// Valuation (index) of the first omitted layer constant.
    pub next_layer_val: Option<i64>,
}

impl SubspaceExp {
    pub fn dim(&self) -> usize {
        self.consts.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn info(&self) -> TruncationInfo {
        TruncationInfo {
            degree: self.degree,
            dim: self.dim(),
            next_layer_val: self.next.as_ref().map(|c| c.val_or_prec()),
        }
    }

    /// `e_V(z)` for the span of the constants computed so far, with no
    /// truncation estimate.
    pub fn eval_raw(&self, z: &RamifiedSeries) -> Result<RamifiedSeries> {
        let mut v = z.truncate_rel(self.rel);
        for c in &self.consts {
            let vq = v.frob(1, self.rel)?;
            v = v.sub(&c.mul(&vq)).truncate_rel(self.rel);
        }
        Ok(v)
    }

    /// `e_{V_D}(z)` with precision lowered to the first omitted layer's size.
    pub fn eval(&self, z: &RamifiedSeries) -> Result<RamifiedSeries> {
        let v = self.eval_raw(z)?;
        Ok(match &self.next {
            Some(c) => {
                let q = self.ctx.q() as i64;
                let cap = padd(c.val_or_prec(), v.val_or_prec().saturating_mul(q));
                v.truncate(cap)
            }
            None => v,
        })
    }

    /// Coefficients of `e_{V_D}` itself (no truncation estimate).
    pub fn coeffs_raw(&self, kmax: usize) -> Result<Vec<RamifiedSeries>> {
        let k = &self.ctx;
        let mut beta = vec![RamifiedSeries::one(k)];
        for (j, c) in self.consts.iter().enumerate() {
            let top = (j + 1).min(kmax);
            if beta.len() <= top {
                beta.push(RamifiedSeries::zero(k));
            }
            for n in (1..=top).rev() {
                let t = c.mul(&beta[n - 1].frob(1, self.rel)?);
                beta[n] = beta[n].sub(&t).truncate_rel(self.rel);
            }
        }
        beta.resize(kmax + 1, RamifiedSeries::zero(k));
        Ok(beta)
    }

    /// `β_0 … β_kmax`, each capped by the next-layer estimate
    /// `val(c_next) + q·val(β_{k−1})`.
    pub fn coeffs(&self, kmax: usize) -> Result<EntireSeries> {
        let mut beta = self.coeffs_raw(kmax)?;
        if let Some(c) = &self.next {
            let q = self.ctx.q() as i64;
            // forward, so that a vanishing β_{k−1} passes on its own cap
            for n in 1..beta.len() {
                let cap = padd(c.val_or_prec(), beta[n - 1].val_or_prec().saturating_mul(q));
                beta[n] = beta[n].truncate(cap);
            }
        }
        Ok(EntireSeries::new(&self.ctx, beta))
    }

    /// `Σ_{λ∈V_D} 1/(x+λ) = 1/e_{V_D}(x)`.
    pub fn reciprocal_sum(&self, x: &RamifiedSeries) -> Result<RamifiedSeries> {
        let e = self.eval_raw(x)?;
        if e.is_zero() {
            return Err(Error::NumericallyZero("lattice sum at a lattice point".into()));
        }
        e.inv_rel(self.rel)
    }

    /// Valuation estimate of `1/e_Λ(x) − 1/e_{V_D}(x)` from the next layer.
    pub fn reciprocal_tail(&self, x_image: &RamifiedSeries) -> i64 {
        match &self.next {
            None => EXACT,
            Some(c) => {
                let q = self.ctx.q() as i64;
                // 1/e' = 1/e · (1 − c e^{q−1})^{-1}
                padd(c.val_or_prec(), x_image.val_or_prec().saturating_mul(q - 2))
            }
        }
    }
}

/// Module with exponential `e_Λ`: `g_k = β_kθ^{q^k} − θβ_k − Σ_{0<i<k} g_i β_{k−i}^{q^i}`.
pub fn drinfeld_from_lattice(lat: &Lattice, d: usize, rel: i64) -> Result<DrinfeldModule> {
    let k = lat.ctx();
    let r = lat.rank();
    let beta = lat.exp_product(d, r, rel)?;
    drinfeld_from_exp(k, beta.coeffs(), r, rel)
}

/// Solves the functional equation for `φ_t` given exponential coefficients `β_0..β_r`.
pub fn drinfeld_from_exp(
    k: &Arc<Ctx>,
    beta: &[RamifiedSeries],
    r: usize,
    rel: i64,
) -> Result<DrinfeldModule> {
    let theta = RamifiedSeries::theta(k);
    let mut g: Vec<RamifiedSeries> = Vec::with_capacity(r);
    for n in 1..=r {
        let tq = theta.frob(n as i64, EXACT)?;
        let mut acc = beta[n].mul(&tq).sub(&theta.mul(&beta[n]));
        for (i, gi) in g.iter().enumerate() {
            let i = i + 1;
            acc = acc.sub(&gi.mul(&beta[n - i].frob(i as i64, rel)?));
        }
        g.push(acc);
    }
    DrinfeldModule::new(k, g)
}

/// `|x|_i = inf_{y∈K_∞}|x − y|` as a valuation index: the first term that is
/// not an `F_q`-multiple of an integral power of `θ`. `None` when `x ∈ K_∞` at
/// the available precision.
pub fn imag_abs(x: &RamifiedSeries) -> Option<i64> {
    let k = x.ctx();
    let m = k.m();
    x.terms()
        .find(|&(i, c)| i.rem_euclid(m) != 0 || !k.in_fq(c))
        .map(|(i, _)| i)
}

/// Result of the finite `Ω^r` test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separation {
    /// `min_b log_q(|ℓ_b(ω)| / (max|b_i| · |ω|))`, in units of `1/m`.
    pub iota: i64,
    /// Tested degree bound: all `b ∈ (A_{<D})^r`.
    pub tested_degree: usize,
    pub combos: usize,
}

/// Brute-force separation over all nonzero `b ∈ (A_{<D})^r`. Fails when some
/// `ℓ_b(ω) = Σ b_i w_i` is numerically zero.
pub fn omega_r_check(point: &[RamifiedSeries], d: usize) -> Result<Separation> {
    let k = point
        .first()
        .ok_or_else(|| Error::Domain("empty point".into()))?
        .ctx()
        .clone();
    let m = k.m();
    let r = point.len();
    let log_abs = point
        .iter()
        .map(|w| -w.val_or_prec())
        .max()
        .unwrap_or(0)
        .max(0);
    let polys = ThetaPoly::all_below_degree(&k, d);
    let n = polys.len();
    let total = n.checked_pow(r as u32).ok_or_else(|| Error::Budget("Ω^r test".into()))?;
    if total > 1 << 22 {
        return Err(Error::Budget(format!("{total} combinations in the Ω^r test")));
    }
    // precomputed θ-multiples of each coordinate
    let scaled: Vec<Vec<RamifiedSeries>> = point
        .iter()
        .map(|w| polys.iter().map(|b| b.to_series(&k).mul(w)).collect())
        .collect();
    let mut iota = EXACT;
    for idx in 1..total {
        let mut rest = idx;
        let mut acc = RamifiedSeries::zero(&k);
        let mut maxdeg = 0i64;
        for s in scaled.iter() {
            let j = rest % n;
            rest /= n;
            if j != 0 {
                acc = acc.add(&s[j]);
                maxdeg = maxdeg.max(polys[j].deg().unwrap() as i64);
            }
        }
        let Some(v) = acc.val() else {
            return Err(Error::Domain(format!(
                "combination #{idx} vanishes: point is not in Ω^{r} at degree {d}"
            )));
        };
        iota = iota.min(-v - maxdeg * m - log_abs);
    }
    Ok(Separation { iota, tested_degree: d, combos: total - 1 })
}
