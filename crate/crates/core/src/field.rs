//! Table-driven arithmetic in `F_{q^s}` and the ramified context `F_{q^s}((θ^{-1/m}))`.
//!
//! Elements of `F_{p^n}` (with `n = e·s`) are encoded as integers `Σ d_i p^i`
//! where `d_i` is the coefficient of `x^i` in a fixed polynomial basis. The
//! defining polynomial is the lexicographically least monic primitive
//! polynomial of degree `n`, so `x` generates the multiplicative group and the
//! log/antilog tables are built by repeated multiplication by `x`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest supported field size `q^s`.
pub const MAX_FIELD_SIZE: u64 = 1 << 16;

const ADD_TABLE_LIMIT: usize = 729;

/// Raw parameters of a computation context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FieldParams {
    /// Characteristic.
    pub p: u32,
    /// `q = p^e`.
    pub e: u32,
    /// Residue extension degree: coefficients live in `F_{q^s}`.
    pub s: u32,
    /// Ramification index: series are in `θ^{-1/m}`.
    pub m: u32,
}

impl FieldParams {
    pub fn new(p: u32, e: u32, s: u32, m: u32) -> Self {
        Self { p, e, s, m }
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.e)
    }
}

/// An element of `F_{q^s}` in the polynomial-basis encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(pub u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Arithmetic context: the residue field tables plus the ramification index.
pub struct Ctx {
    params: FieldParams,
    q: u64,
    /// Field size `q^s`.
    size: usize,
    /// Degree of `F_{q^s}` over `F_p`.
    n: u32,
    modulus: Vec<u32>,
    exp: Vec<u16>,
    log: Vec<u32>,
    add_table: Option<Vec<u16>>,
    neg: Vec<u16>,
    frob: Vec<u16>,
    frob_inv: Vec<u16>,
    subfield: Vec<Fe>,
    zeta: Option<Fe>,
}

impl fmt::Debug for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ctx")
            .field("params", &self.params)
            .field("modulus", &self.modulus)
            .field("zeta", &self.zeta)
            .finish()
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_pow(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = (acc as u128 * base as u128 % modulus as u128) as u64;
        }
        base = (base as u128 * base as u128 % modulus as u128) as u64;
        exp >>= 1;
    }
    acc
}

fn to_digits(mut v: usize, p: u32, n: u32) -> Vec<u32> {
    let mut d = Vec::with_capacity(n as usize);
    for _ in 0..n {
        d.push((v % p as usize) as u32);
        v /= p as usize;
    }
    d
}

fn from_digits(d: &[u32], p: u32) -> usize {
    d.iter().rev().fold(0usize, |acc, &x| acc * p as usize + x as usize)
}

/// Multiplies the encoded element `v` by `x` modulo the monic polynomial
/// `x^n + Σ modulus[i] x^i`.
fn times_x(v: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let n = modulus.len();
    let top = v[n - 1];
    let mut out = vec![0u32; n];
    for i in (1..n).rev() {
        out[i] = v[i - 1];
    }
    if top != 0 {
        for i in 0..n {
            out[i] = (out[i] + (p - modulus[i] % p) * top) % p;
        }
    }
    out
}

impl Ctx {
    /// Builds the context; fails on a non-prime characteristic or an
    /// unsupported field size.
    pub fn new(params: FieldParams) -> Result<Arc<Ctx>> {
        let FieldParams { p, e, s, m } = params;
        if !is_prime(p) {
            return Err(Error::Config(format!("characteristic {p} is not prime")));
        }
        if e == 0 || s == 0 || m == 0 {
            return Err(Error::Config("e, s and m must be positive".into()));
        }
        let n = e
            .checked_mul(s)
            .ok_or_else(|| Error::Config("extension degree overflow".into()))?;
        let size = (p as u64)
            .checked_pow(n)
            .filter(|&sz| sz <= MAX_FIELD_SIZE)
            .ok_or_else(|| {
                Error::Config(format!("field size {p}^{n} exceeds the supported 2^16"))
            })? as usize;
        let q = (p as u64).pow(e);
        let order = size - 1;

        // least primitive modulus
        let mut found = None;
        for cand in 0..size {
            let modulus = to_digits(cand, p, n);
            if modulus[0] == 0 {
                continue;
            }
            let one = to_digits(1, p, n);
            let mut cur = one.clone();
            let mut exp = Vec::with_capacity(order);
            let mut ok = true;
            for i in 0..order {
                exp.push(from_digits(&cur, p) as u16);
                cur = times_x(&cur, &modulus, p);
                if cur == one && i + 1 < order {
                    ok = false;
                    break;
                }
            }
            if ok && cur == one {
                found = Some((modulus, exp));
                break;
            }
        }
        let (modulus, mut exp) =
            found.ok_or_else(|| Error::Config("no primitive polynomial found".into()))?;
        let mut log = vec![u32::MAX; size];
        for (i, &v) in exp.iter().enumerate() {
            log[v as usize] = i as u32;
        }
        let doubled: Vec<u16> = exp.iter().copied().collect();
        exp.extend_from_slice(&doubled);

        let add_digits = |a: usize, b: usize| -> u16 {
            let da = to_digits(a, p, n);
            let db = to_digits(b, p, n);
            let ds: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
            from_digits(&ds, p) as u16
        };
        let add_table = if p != 2 && size <= ADD_TABLE_LIMIT {
            let mut t = vec![0u16; size * size];
            for a in 0..size {
                for b in 0..size {
                    t[a * size + b] = add_digits(a, b);
                }
            }
            Some(t)
        } else {
            None
        };
        let neg: Vec<u16> = (0..size)
            .map(|a| {
                let d: Vec<u32> = to_digits(a, p, n).iter().map(|x| (p - x) % p).collect();
                from_digits(&d, p) as u16
            })
            .collect();

        let mut ctx = Ctx {
            params,
            q,
            size,
            n,
            modulus,
            exp,
            log,
            add_table,
            neg,
            frob: Vec::new(),
            frob_inv: Vec::new(),
            subfield: Vec::new(),
            zeta: None,
        };
        ctx.frob = (0..size).map(|a| ctx.pow_u64(Fe(a as u16), q).0).collect();
        let inv_exp = mod_pow(q, s as u64 - 1, order as u64);
        ctx.frob_inv = if order == 0 {
            (0..size).map(|a| a as u16).collect()
        } else {
            (0..size)
                .map(|a| {
                    if a == 0 {
                        0
                    } else {
                        ctx.exp[(ctx.log[a] as u64 * inv_exp % order as u64) as usize]
                    }
                })
                .collect()
        };
        ctx.subfield = (0..size)
            .map(|a| Fe(a as u16))
            .filter(|&a| ctx.frob[a.0 as usize] == a.0)
            .collect();
        let minus_one = ctx.neg(Fe::ONE);
        ctx.zeta = (1..size)
            .map(|a| Fe(a as u16))
            .find(|&z| ctx.pow_u64(z, q - 1) == minus_one);
        Ok(Arc::new(ctx))
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }
    pub fn p(&self) -> u32 {
        self.params.p
    }
    /// `q = p^e`, the size of the constant field of `A`.
    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn m(&self) -> i64 {
        self.params.m as i64
    }
    pub fn s(&self) -> u32 {
        self.params.s
    }
    /// Number of elements of the coefficient field `F_{q^s}`.
    pub fn size(&self) -> usize {
        self.size
    }
    /// Degree of the coefficient field over `F_p`.
    pub fn degree_over_prime(&self) -> u32 {
        self.n
    }
    /// Coefficients of the defining polynomial below the leading term.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The fixed `(q-1)`-st root of `-1`: the least encoding solving `ζ^{q-1} = -1`.
    pub fn zeta(&self) -> Option<Fe> {
        self.zeta
    }

    /// Elements of the constant field `F_q`, sorted by encoding.
    pub fn fq_elements(&self) -> &[Fe] {
        &self.subfield
    }

    pub fn in_fq(&self, a: Fe) -> bool {
        self.frob[a.0 as usize] == a.0
    }

    /// Embeds an integer into the prime field.
    pub fn from_int(&self, v: i64) -> Fe {
        let p = self.params.p as i64;
        Fe(v.rem_euclid(p) as u16)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.params.p == 2 {
            return Fe(a.0 ^ b.0);
        }
        if let Some(t) = &self.add_table {
            return Fe(t[a.0 as usize * self.size + b.0 as usize]);
        }
        let p = self.params.p;
        let (mut x, mut y) = (a.0 as u32, b.0 as u32);
        let mut out = 0u32;
        let mut place = 1u32;
        while x > 0 || y > 0 {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        Fe(out as u16)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        Fe(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        Fe(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    /// Discrete logarithm to base `x`; `None` for zero.
    #[inline]
    pub fn log(&self, a: Fe) -> Option<u32> {
        if a.0 == 0 {
            None
        } else {
            Some(self.log[a.0 as usize])
        }
    }

    /// `x^i` for `0 <= i < 2(size-1)`.
    #[inline]
    pub fn exp(&self, i: u32) -> Fe {
        Fe(self.exp[i as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let order = (self.size - 1) as u32;
        let l = self.log[a.0 as usize];
        Ok(Fe(self.exp[((order - l) % order) as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow_u64(&self, a: Fe, k: u64) -> Fe {
        if k == 0 {
            return Fe::ONE;
        }
        if a.0 == 0 {
            return Fe::ZERO;
        }
        let order = (self.size - 1) as u64;
        if order == 0 {
            return a;
        }
        let l = self.log[a.0 as usize] as u64;
        Fe(self.exp[((l as u128 * (k % order) as u128) % order as u128) as usize])
    }

    /// `a^{q^n}` for any integer `n`, using that Frobenius has order `s`.
    pub fn frob_n(&self, a: Fe, n: i64) -> Fe {
        let s = self.params.s as i64;
        match n.rem_euclid(s) {
            0 => a,
            1 => Fe(self.frob[a.0 as usize]),
            k if k == s - 1 => Fe(self.frob_inv[a.0 as usize]),
            k => {
                let mut out = a;
                for _ in 0..k {
                    out = Fe(self.frob[out.0 as usize]);
                }
                out
            }
        }
    }

    /// Coordinates over `F_p` (little-endian digits of the encoding).
    pub fn digits(&self, a: Fe) -> Vec<u32> {
        to_digits(a.0 as usize, self.params.p, self.n)
    }

    /// Number of hexadecimal characters used to serialise one element.
    pub fn hex_width(&self) -> usize {
        let mut w = 1usize;
        while 16usize.pow(w as u32) < self.size {
            w += 1;
        }
        w
    }

    /// Formats a value counted in units of `1/m` as a reduced rational string.
    pub fn fmt_units(&self, v: i64) -> String {
        fmt_rational(v, self.m())
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Reduced `a/b` rendering; integers print without a denominator.
pub fn fmt_rational(num: i64, den: i64) -> String {
    let g = gcd(num, den).max(1);
    let (n, d) = (num / g, den / g);
    if d == 1 {
        format!("{n}")
    } else {
        format!("{n}/{d}")
    }
}

/// Parses `a` or `a/b` into units of `1/m`; fails unless the value is a
/// multiple of `1/m`.
pub fn parse_units(text: &str, m: i64) -> Result<i64> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text, "1"),
    };
    let num: i64 = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational `{text}`")))?;
    let den: i64 = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational `{text}`")))?;
    if den <= 0 || (num * m) % den != 0 {
        return Err(Error::Parse(format!(
            "`{text}` is not a multiple of 1/{m}"
        )));
    }
    Ok(num * m / den)
}
