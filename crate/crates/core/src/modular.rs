//! The `GL_r(A)` action on `Ω^r`, slash operators, and the parameter at
//! infinity with the identities it satisfies.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::carlitz::carlitz_period;
use crate::cm::UpperHalfPoint;
use crate::drinfeld::{q_pow, DrinfeldModule, EntireSeries};
use crate::eisenstein::{eisenstein_eval, EisensteinSpec, EvalBudget};
use crate::error::{Error, Result};
use crate::field::{Ctx, Fe};
use crate::lattice::{drinfeld_from_lattice, Lattice, SubspaceExp};
use crate::poly::ThetaPoly;
use crate::series::{RamifiedSeries, EXACT};

/// An invertible `r×r` matrix over `A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlMatrix {
    rows: Vec<Vec<ThetaPoly>>,
}

fn det_rec(k: &Ctx, m: &[Vec<ThetaPoly>]) -> ThetaPoly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = ThetaPoly::zero();
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<ThetaPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != c)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let t = m[0][c].mul(k, &det_rec(k, &minor));
        acc = if c % 2 == 0 { acc.add(k, &t) } else { acc.sub(k, &t) };
    }
    acc
}

impl GlMatrix {
    /// Fails unless the matrix is square over `A` with `det ∈ F_q^×`.
    pub fn new(k: &Ctx, rows: Vec<Vec<ThetaPoly>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 || rows.iter().any(|row| row.len() != r) {
            return Err(Error::Domain("matrix must be square and nonempty".into()));
        }
        if rows.iter().flatten().any(|x| !x.is_over_fq(k)) {
            return Err(Error::Domain("matrix entries must lie in A".into()));
        }
        let g = Self { rows };
        let det = g.det(k);
        if det.deg() != Some(0) {
            return Err(Error::Domain("determinant is not a unit of A".into()));
        }
        Ok(g)
    }

    pub fn identity(r: usize) -> Self {
        let rows = (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| if i == j { ThetaPoly::one() } else { ThetaPoly::zero() })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    /// `I + c·E_{ij}` for `i ≠ j`.
    pub fn elementary(r: usize, i: usize, j: usize, c: ThetaPoly) -> Self {
        assert!(i != j && i < r && j < r);
        let mut g = Self::identity(r);
        g.rows[i][j] = c;
        g
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<ThetaPoly>] {
        &self.rows
    }

    pub fn det(&self, k: &Ctx) -> ThetaPoly {
        det_rec(k, &self.rows)
    }

    /// The determinant as an element of `F_q^×`.
    pub fn det_unit(&self, k: &Ctx) -> Fe {
        self.det(k).coeff(0)
    }

    pub fn mul(&self, k: &Ctx, o: &Self) -> Self {
        let r = self.rank();
        let rows = (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| {
                        (0..r).fold(ThetaPoly::zero(), |acc, l| {
                            acc.add(k, &self.rows[i][l].mul(k, &o.rows[l][j]))
                        })
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    /// Membership in `Γ(N)`: `γ ≡ I mod N`.
    pub fn in_gamma(&self, k: &Ctx, n: &ThetaPoly) -> Result<bool> {
        for (i, row) in self.rows.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let want = if i == j { ThetaPoly::one() } else { ThetaPoly::zero() };
                if !x.sub(k, &want).rem(k, n)?.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The column `γω`.
    pub fn apply(&self, k: &Arc<Ctx>, w: &[RamifiedSeries]) -> Vec<RamifiedSeries> {
        self.rows
            .iter()
            .map(|row| {
                row.iter().zip(w).fold(RamifiedSeries::zero(k), |acc, (a, x)| {
                    if a.is_zero() {
                        acc
                    } else {
                        acc.add(&a.to_series(k).mul(x))
                    }
                })
            })
            .collect()
    }
}

/// `j(γ;ω)`, the last entry of `γω`.
pub fn j_factor(g: &GlMatrix, w: &UpperHalfPoint) -> RamifiedSeries {
    let k = w.ctx();
    let row = &g.rows[g.rank() - 1];
    row.iter().zip(w.coords()).fold(RamifiedSeries::zero(k), |acc, (a, x)| {
        if a.is_zero() {
            acc
        } else {
            acc.add(&a.to_series(k).mul(x))
        }
    })
}

/// Exact inverse for exact monomials, else relative precision `rel`.
fn exact_or_rel_inv(x: &RamifiedSeries, rel: i64) -> Result<RamifiedSeries> {
    if x.is_exact() && x.weight() == 1 {
        x.inv_rel(EXACT)
    } else {
        x.inv_rel(rel)
    }
}

/// `(γ·ω, j(γ;ω))` with `γ·ω = j^{-1}γω`, computed at relative precision `rel`.
pub fn act(g: &GlMatrix, w: &UpperHalfPoint, rel: i64) -> Result<(UpperHalfPoint, RamifiedSeries)> {
    let k = w.ctx();
    if g.rank() != w.rank() {
        return Err(Error::Domain("matrix size and point rank differ".into()));
    }
    let v = g.apply(k, w.coords());
    let j = v[v.len() - 1].clone();
    if j.is_zero() {
        return Err(Error::NumericallyZero("automorphy factor j(γ;ω)".into()));
    }
    let jinv = exact_or_rel_inv(&j, rel)?;
    let mut coords: Vec<RamifiedSeries> =
        v[..v.len() - 1]
            .iter()
            .map(|x| {
                let y = x.mul(&jinv);
                if y.is_exact() {
                    y
                } else {
                    y.truncate_rel(rel)
                }
            })
            .collect();
    coords.push(RamifiedSeries::one(k));
    Ok((UpperHalfPoint::new(coords)?, j))
}

/// Valuation of `j(γδ;ω) − j(γ;δ·ω)·j(δ;ω)`.
pub fn cocycle_residual(
    k: &Ctx,
    g: &GlMatrix,
    d: &GlMatrix,
    w: &UpperHalfPoint,
    rel: i64,
) -> Result<i64> {
    let lhs = j_factor(&g.mul(k, d), w);
    let (dw, jd) = act(d, w, rel)?;
    let rhs = j_factor(g, &dw).mul(&jd);
    Ok(lhs.sub(&rhs).val_or_prec())
}

/// Seeded elements of `Γ(N)`: products of `factors` elementary matrices
/// `I + N·c·E_{ij}` with `c ≠ 0` of degree `< deg`.
pub fn sample_gamma_n(
    k: &Ctx,
    r: usize,
    n: &ThetaPoly,
    count: usize,
    factors: usize,
    deg: usize,
    seed: u64,
) -> Vec<GlMatrix> {
    assert!(r >= 2 && deg >= 1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut g = GlMatrix::identity(r);
            for _ in 0..factors {
                let i = rng.gen_range(0..r);
                let j = (i + rng.gen_range(1..r)) % r;
                let c = loop {
                    let c = ThetaPoly::random_below_degree(k, deg, &mut rng);
                    if !c.is_zero() {
                        break c;
                    }
                };
                g = g.mul(k, &GlMatrix::elementary(r, i, j, n.mul(k, &c)));
            }
            g
        })
        .collect()
}

/// Seeded elements of `GL_r(A)`: elementary products times a diagonal unit.
pub fn sample_gl(k: &Ctx, r: usize, count: usize, factors: usize, deg: usize, seed: u64) -> Vec<GlMatrix> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let fq = k.fq_elements();
    let one = ThetaPoly::one();
    (0..count)
        .map(|_| {
            let sub_seed = rng.gen();
            let g = sample_gamma_n(k, r, &one, 1, factors, deg, sub_seed).remove(0);
            let i = rng.gen_range(0..r);
            let u = fq[rng.gen_range(1..fq.len())];
            let mut diag = GlMatrix::identity(r);
            diag.rows[i][i] = ThetaPoly::constant(u);
            g.mul(k, &diag)
        })
        .collect()
}

/// Weight `k` and type `m ∈ Z/(q−1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlashContext {
    pub weight: i64,
    pub type_m: u64,
}

/// `(f|_{k,m}γ)(ω) = det(γ)^m j(γ;ω)^{−k} f(γ·ω)`, with `f` asked for absolute
/// precision `target` at the translated point.
pub fn slash<F>(f: &F, sc: SlashContext, g: &GlMatrix, w: &UpperHalfPoint, target: i64) -> Result<RamifiedSeries>
where
    F: Fn(&UpperHalfPoint, i64) -> Result<RamifiedSeries>,
{
    let k = w.ctx();
    let mut rel = target + 8 * k.m();
    let (gw, _) = act(g, w, rel)?;
    // reducing the lattice of a large γ·ω cancels about its size in digits
    let size = gw.coords().iter().filter_map(|x| x.val()).min().unwrap_or(0).min(0);
    rel -= 2 * size;
    // near the boundary the lattice of γ·ω is small and costs further digits
    let mut attempt = 0;
    let (val, j) = loop {
        let (gw, j) = act(g, w, rel)?;
        match f(&gw, target) {
            Ok(v) => break (v, j),
            Err(Error::Precision(_)) if attempt < 3 => {
                attempt += 1;
                rel += target / 2;
            }
            Err(e) => return Err(e),
        }
    };
    let jk = j.truncate_rel(rel).pow(sc.weight.unsigned_abs(), rel);
    let jk = if sc.weight >= 0 { jk.inv_rel(rel)? } else { jk };
    let det = k.pow_u64(g.det_unit(k), sc.type_m);
    Ok(val.mul(&jk).scale(det))
}

/// Valuation of `(f|_{k,m}γ)(ω) − f(ω)`.
pub fn slash_residual<F>(f: &F, sc: SlashContext, g: &GlMatrix, w: &UpperHalfPoint, target: i64) -> Result<i64>
where
    F: Fn(&UpperHalfPoint, i64) -> Result<RamifiedSeries>,
{
    let lhs = slash(f, sc, g, w, target)?;
    let rhs = f(w, target)?;
    Ok(lhs.sub(&rhs).val_or_prec())
}

/// The Eisenstein evaluator in the form expected by [`slash_residual`].
pub fn eisenstein_evaluator(
    spec: &EisensteinSpec,
    budget: EvalBudget,
) -> impl Fn(&UpperHalfPoint, i64) -> Result<RamifiedSeries> + '_ {
    move |w, t| eisenstein_eval(spec, w, t, budget).map(|v| v.value)
}

enum InnerExp {
    Carlitz(EntireSeries),
    Lattice(SubspaceExp),
}

/// Data attached to `ω̃ ∈ Ω^{r−1}`: the period `π̃`, the module `φ^{π̃ω̃}` of
/// the lattice `π̃Λ_ω̃`, and its exponential.
pub struct Cusp {
    ctx: Arc<Ctx>,
    tail: UpperHalfPoint,
    pi: RamifiedSeries,
    module: DrinfeldModule,
    exp: InnerExp,
    work: i64,
}

/// How much to compute for a [`Cusp`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspBudget {
    /// Truncation degree for the lattice exponential when `r ≥ 3`.
    pub lattice_degree: usize,
    /// Number of Carlitz exponential coefficients kept.
    pub kmax: usize,
}

impl Default for CuspBudget {
    fn default() -> Self {
        Self { lattice_degree: 4, kmax: 10 }
    }
}

impl Cusp {
    /// `work` is the absolute working precision (indices) of everything built here.
    pub fn new(tail: &UpperHalfPoint, work: i64, budget: CuspBudget) -> Result<Self> {
        let k = tail.ctx().clone();
        let pi = carlitz_period(&k, 2 * work)?;
        let (module, exp) = if tail.rank() == 1 {
            let c = DrinfeldModule::carlitz(&k);
            let e = c.exp_coeffs(budget.kmax, 2 * work)?;
            (c, InnerExp::Carlitz(e))
        } else {
            let lat = tail.lattice().scaled(&pi);
            let module = drinfeld_from_lattice(&lat, budget.lattice_degree, work)?;
            let sub = lat.subspace_exp(budget.lattice_degree, work)?;
            (module, InnerExp::Lattice(sub))
        };
        Ok(Self { ctx: k, tail: tail.clone(), pi, module, exp, work })
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        &self.ctx
    }

    pub fn pi(&self) -> &RamifiedSeries {
        &self.pi
    }

    /// `φ^{π̃ω̃}`.
    pub fn module(&self) -> &DrinfeldModule {
        &self.module
    }

    pub fn work(&self) -> i64 {
        self.work
    }

    /// `e_{π̃Λ_ω̃}(z)` to absolute precision at most `target`.
    pub fn exp_eval(&self, z: &RamifiedSeries, target: i64) -> Result<RamifiedSeries> {
        match &self.exp {
            InnerExp::Lattice(sub) => Ok(sub.eval(z)?.truncate(target)),
            InnerExp::Carlitz(e) => match e.eval(z, target) {
                Ok((v, _)) => Ok(v),
                Err(Error::TailBound(_)) => {
                    // argument too large for the cached coefficients
                    let mut kmax = e.kmax();
                    loop {
                        kmax += 2;
                        let e = self.module.exp_coeffs(kmax, 2 * self.work)?;
                        match e.eval(z, target) {
                            Ok((v, _)) => return Ok(v),
                            Err(Error::TailBound(_)) if kmax < 40 => continue,
                            Err(err) => return Err(err),
                        }
                    }
                }
                Err(err) => Err(err),
            },
        }
    }

    /// `π̃ω̃·ũ`.
    pub fn tail_dot(&self, u: &[RamifiedSeries]) -> RamifiedSeries {
        let acc = self
            .tail
            .coords()
            .iter()
            .zip(u)
            .fold(RamifiedSeries::zero(&self.ctx), |acc, (w, x)| acc.add(&w.mul(x)));
        acc.mul(&self.pi)
    }
}

/// `u_N(ω) = e_{π̃Λ_ω̃}(π̃w_1/N)^{-1}`; `cusp` must belong to `ω̃`.
pub fn u_parameter(cusp: &Cusp, n: &ThetaPoly, w: &UpperHalfPoint) -> Result<RamifiedSeries> {
    let k = cusp.ctx();
    let work = cusp.work();
    if n.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let ninv = n.to_series(k).inv_rel(2 * work)?;
    let z = cusp.pi().mul(&w.coords()[0]).mul(&ninv);
    let e = cusp.exp_eval(&z, work)?;
    if e.is_zero() {
        return Err(Error::NumericallyZero(
            "π̃w_1/N is a lattice point (pole of u_N)".into(),
        ));
    }
    e.inv_rel(work)
}

/// `f_a(X) = X^{q^d} g̃_{d,a}^{-1} φ_a(X^{-1}) = Σ_i (c_i/c_d) X^{q^d−q^i}`
/// for `φ_a = Σ_{i≤d} c_i τ^i`.
#[derive(Clone, Debug)]
pub struct ReciprocalPoly {
    pub d: usize,
    /// `g̃_{d,a}`, the leading coefficient of `φ_a`.
    pub lead: RamifiedSeries,
    /// `(exponent, coefficient)` by increasing exponent; the first is `(0, 1)`.
    pub terms: Vec<(u64, RamifiedSeries)>,
}

impl ReciprocalPoly {
    /// `f(x)`, computed at relative precision `rel`.
    pub fn eval(&self, x: &RamifiedSeries, rel: i64) -> RamifiedSeries {
        self.eval_minus_one(x, rel).add(&RamifiedSeries::one(x.ctx()))
    }

    /// `f(x) − 1`, without the cancellation of adding and removing `1`.
    pub fn eval_minus_one(&self, x: &RamifiedSeries, rel: i64) -> RamifiedSeries {
        let k = x.ctx();
        self.terms[1..].iter().fold(RamifiedSeries::zero(k), |acc, (e, c)| {
            acc.add(&c.mul(&x.pow(*e, rel)))
        })
    }
}

/// The reciprocal polynomial of `φ_a` for `a ∈ F_q[t]`, with `d = rank·deg a`.
pub fn reciprocal_poly(module: &DrinfeldModule, a: &ThetaPoly, rel: i64) -> Result<ReciprocalPoly> {
    let k = module.ctx();
    let Some(deg) = a.deg() else {
        return Err(Error::Domain("a must be nonzero".into()));
    };
    let phi = match module.phi_of_a_exact(a) {
        Some(p) => p.to_series(),
        None => module.phi_of_a(a),
    };
    let d = module.rank() * deg;
    let lead = phi.coeff(d);
    if lead.is_zero() {
        return Err(Error::NumericallyZero("leading coefficient of φ_a".into()));
    }
    let linv = exact_or_rel_inv(&lead, rel)?;
    let qd = q_pow(k, d as u32)? as u64;
    let mut terms = vec![(0u64, RamifiedSeries::one(k))];
    for i in (0..d).rev() {
        let c = phi.coeff(i);
        if c.is_zero() && c.is_exact() {
            continue;
        }
        let qi = q_pow(k, i as u32)? as u64;
        terms.push((qd - qi, c.mul(&linv)));
    }
    Ok(ReciprocalPoly { d, lead, terms })
}

/// Normalizations making forms arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArithKind {
    /// `g^ari_{i,a} = π̃^{1−q^i} g_{i,a}`.
    GForm { i: u32 },
    /// `E^ari = π̃^{-1} E`.
    Eisenstein,
}

pub fn arithmetic_normalize(
    kind: ArithKind,
    value: &RamifiedSeries,
    pi: &RamifiedSeries,
    rel: i64,
) -> Result<RamifiedSeries> {
    let k = value.ctx();
    match kind {
        ArithKind::GForm { i: 0 } => Ok(value.clone()),
        ArithKind::GForm { i } => {
            let e = q_pow(k, i)? as u64 - 1;
            Ok(value.mul(&pi.pow(e, rel).inv_rel(rel)?))
        }
        ArithKind::Eisenstein => Ok(value.mul(&pi.inv_rel(rel)?)),
    }
}

/// Both sides of `u_{N2} = u_{N1}^{q^{d(𝔫)}} / (g̃_{d(𝔫),𝔫} f_𝔫(u_{N1}))`.
#[derive(Clone, Debug)]
pub struct LevelChange {
    pub u1: RamifiedSeries,
    pub u2: RamifiedSeries,
    pub rhs: RamifiedSeries,
    /// Valuation of `u_{N2} − rhs`.
    pub residual: i64,
    /// Residual when the exponent is `q^{d(N1)}` instead of `q^{d(𝔫)}`.
    pub residual_with_n1_exponent: i64,
}

pub fn level_change_check(
    cusp: &Cusp,
    n1: &ThetaPoly,
    n2: &ThetaPoly,
    w: &UpperHalfPoint,
) -> Result<LevelChange> {
    let k = cusp.ctx();
    let work = cusp.work();
    let (nn, rem) = n1.divrem(k, n2)?;
    if !rem.is_zero() {
        return Err(Error::Domain("N2 must divide N1".into()));
    }
    let u1 = u_parameter(cusp, n1, w)?;
    let u2 = u_parameter(cusp, n2, w)?;
    let f = reciprocal_poly(cusp.module(), &nn, work)?;
    let side = |d: usize| -> Result<RamifiedSeries> {
        let qd = q_pow(k, d as u32)? as u64;
        let den = f.lead.mul(&f.eval(&u1, work));
        u1.pow(qd, work).div_rel(&den, work)
    };
    let rhs = side(f.d)?;
    let r1 = cusp.module().rank();
    let d1 = r1 * n1.deg().unwrap_or(0);
    let literal = if d1 == f.d { rhs.clone() } else { side(d1)? };
    Ok(LevelChange {
        residual: u2.sub(&rhs).val_or_prec(),
        residual_with_n1_exponent: u2.sub(&literal).val_or_prec(),
        u1,
        u2,
        rhs,
    })
}

/// Truncation controls for [`eisenstein_expansion_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionOptions {
    /// Largest `deg a_1` allowed before giving up.
    pub max_a1_degree: usize,
    /// Largest power of `−P` allowed in one geometric sum.
    pub max_geometric: usize,
    /// Keep only the `a_1 = 0` summand.
    pub leading_only: bool,
    /// Box degree for the partial-fraction check of `1/e`.
    pub logder_degree: usize,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self { max_a1_degree: 6, max_geometric: 256, leading_only: false, logder_degree: 3 }
    }
}

#[derive(Clone, Debug)]
pub struct ExpansionCheck {
    /// `π̃^{-1}E_{u,N}(ω)` from the lattice sum.
    pub direct: RamifiedSeries,
    /// The same value from the `u_N`-expansion chain.
    pub chain: RamifiedSeries,
    pub residual: i64,
    /// Largest `deg a_1` summed; `None` when only `a_1 = 0` was used.
    pub a1_degree: Option<usize>,
    pub terms: usize,
    /// Largest geometric-series length used.
    pub max_geometric: usize,
    /// Valuation of the `a_1 = 0` summand.
    pub dominant_val: i64,
    /// Valuation of `1/e(z) − Σ_{b} 1/(z − b)` over the truncated box at
    /// `z = π̃u·ω`.
    pub logder_residual: i64,
}

/// `Σ_{b} 1/(z − b)` over `b ∈ π̃Λ_ω̃` with coordinates of degree `< d`.
pub fn logder_partial_sum(cusp: &Cusp, z: &RamifiedSeries, d: usize, rel: i64) -> Result<RamifiedSeries> {
    let k = cusp.ctx();
    let lat: Lattice = cusp.tail.lattice().scaled(cusp.pi());
    let polys = ThetaPoly::all_below_degree(k, d);
    let r = lat.rank();
    let n = polys.len();
    let mut acc = RamifiedSeries::zero(k);
    for idx in 0..n.pow(r as u32) {
        let mut rest = idx;
        let a: Vec<ThetaPoly> = (0..r)
            .map(|_| {
                let p = polys[rest % n].clone();
                rest /= n;
                p
            })
            .collect();
        acc = acc.add(&z.sub(&lat.combine(&a)).inv_rel(rel)?);
    }
    Ok(acc)
}

/// Compares `π̃^{-1}E_{u,N}(ω)` with
/// `Σ_{a_1} u_N^{q^d}/g̃_{d,b} · Σ_i (−P_{a_1})^i`, where `b = a_1N + v_1`,
/// `d = d(b)` and `P = (f_b(u_N) − 1) + C u_N^{q^d}/g̃_{d,b}` with
/// `C = e_{π̃Λ_ω̃}(π̃ω̃·ũ)`. The summand for `b = 0` is `1/C`.
pub fn eisenstein_expansion_check(
    cusp: &Cusp,
    spec: &EisensteinSpec,
    w: &UpperHalfPoint,
    target: i64,
    opts: ExpansionOptions,
    budget: EvalBudget,
) -> Result<ExpansionCheck> {
    let k = cusp.ctx();
    let work = cusp.work();
    if spec.rank() != w.rank() || w.rank() != cusp.tail.rank() + 1 {
        return Err(Error::Domain("rank of u, ω and the cusp disagree".into()));
    }
    let n = &spec.level;
    let v1 = &spec.numerators[0];
    let ninv = n.to_series(k).inv_rel(2 * work)?;
    let ut: Vec<RamifiedSeries> =
        spec.numerators[1..].iter().map(|v| v.to_series(k).mul(&ninv)).collect();
    let c = if spec.numerators[1..].iter().all(|v| v.is_zero()) {
        RamifiedSeries::zero(k)
    } else {
        cusp.exp_eval(&cusp.tail_dot(&ut), work)?
    };
    let u = u_parameter(cusp, n, w)?;

    let mut chain = RamifiedSeries::zero_to(k, target);
    let mut terms = 0usize;
    let mut max_geo = 0usize;
    let mut dominant_val = EXACT;
    let mut a1_degree = None;
    let mut summand = |a1: &ThetaPoly| -> Result<(RamifiedSeries, i64)> {
        let b = a1.mul(k, n).add(k, v1);
        if b.is_zero() {
            let t = c.inv_rel(work)?;
            let v = t.val_or_prec();
            return Ok((t, v));
        }
        let f = reciprocal_poly(cusp.module(), &b, work)?;
        let qd = q_pow(k, f.d as u32)? as u64;
        let lead = u.pow(qd, work).div_rel(&f.lead, work)?;
        let lv = lead.val_or_prec();
        if lv >= target {
            return Ok((RamifiedSeries::zero_to(k, target), lv));
        }
        let p = f.eval_minus_one(&u, work).add(&c.mul(&lead));
        let mut s = RamifiedSeries::one(k);
        if !p.is_zero() {
            let vp = p.val().unwrap();
            if vp <= 0 {
                return Err(Error::Domain(
                    "u_N too large: ω is outside the expansion region".into(),
                ));
            }
            let mp = p.neg();
            let mut pw = RamifiedSeries::one(k);
            let mut i = 0;
            loop {
                i += 1;
                pw = pw.mul(&mp).truncate(target - lv);
                if lv + pw.val_or_prec() >= target {
                    break;
                }
                if i > opts.max_geometric {
                    return Err(Error::Budget("geometric series too long".into()));
                }
                s = s.add(&pw);
            }
            max_geo = max_geo.max(i);
        }
        terms += 1;
        Ok((lead.mul(&s).truncate(target), lv))
    };

    let (t0, v0) = summand(&ThetaPoly::zero())?;
    dominant_val = dominant_val.min(v0);
    chain = chain.add(&t0);
    if !opts.leading_only {
        let mut l = 0usize;
        loop {
            if l > opts.max_a1_degree {
                return Err(Error::Budget(format!(
                    "expansion not below target with deg a_1 ≤ {}",
                    opts.max_a1_degree
                )));
            }
            let mut layer_min = EXACT;
            for a1 in ThetaPoly::all_below_degree(k, l + 1) {
                if a1.deg() != Some(l) {
                    continue;
                }
                let (t, v) = summand(&a1)?;
                layer_min = layer_min.min(v);
                chain = chain.add(&t);
            }
            a1_degree = Some(l);
            if layer_min >= target {
                break;
            }
            l += 1;
        }
    }

    let e = eisenstein_eval(spec, w, target, budget)?;
    let direct = arithmetic_normalize(ArithKind::Eisenstein, &e.value, cusp.pi(), work)?;
    let direct = direct.truncate(target);

    let z = cusp.pi().mul(&v1.to_series(k)).mul(&ninv).mul(&w.coords()[0]).add(&cusp.tail_dot(&ut));
    let full = cusp.exp_eval(&z, work)?.inv_rel(work)?;
    let partial = logder_partial_sum(cusp, &z, opts.logder_degree, work)?;
    Ok(ExpansionCheck {
        residual: direct.sub(&chain).val_or_prec(),
        direct,
        chain,
        a1_degree,
        terms,
        max_geometric: max_geo,
        dominant_val,
        logder_residual: full.sub(&partial).val_or_prec(),
    })
}
