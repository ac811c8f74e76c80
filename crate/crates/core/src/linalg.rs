//! Dense Gaussian elimination over a prime field `F_p`.

use crate::error::{Error, Result};

/// Largest number of matrix entries accepted.
pub const MAX_ENTRIES: usize = 1 << 26;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

fn inv_mod(a: u32, p: u32) -> u32 {
    // a^{p−2}
    let mut base = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Result<Self> {
        if rows.saturating_mul(cols) > MAX_ENTRIES {
            return Err(Error::Budget(format!("linear system {rows}×{cols} too large")));
        }
        Ok(Self { p, rows, cols, data: vec![0; rows * cols] })
    }

    /// Builds a matrix from its columns, each of length `rows`.
    pub fn from_columns(p: u32, rows: usize, columns: &[Vec<u32>]) -> Result<Self> {
        let mut m = Self::zeros(p, rows, columns.len())?;
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, &x) in c.iter().enumerate() {
                m.data[i * m.cols + j] = x % p;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn mul_vec(&self, x: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                (row.iter().zip(x).map(|(&a, &b)| a as u64 * b as u64 % p).sum::<u64>() % p) as u32
            })
            .collect()
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let p = self.p as u64;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(piv) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if piv != r {
                for j in 0..self.cols {
                    self.data.swap(piv * self.cols + j, r * self.cols + j);
                }
            }
            let inv = inv_mod(self.get(r, c), self.p) as u64;
            for j in c..self.cols {
                let idx = r * self.cols + j;
                self.data[idx] = (self.data[idx] as u64 * inv % p) as u32;
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c) as u64;
                if f == 0 {
                    continue;
                }
                for j in c..self.cols {
                    let a = self.data[r * self.cols + j] as u64;
                    if a == 0 {
                        continue;
                    }
                    let idx = i * self.cols + j;
                    self.data[idx] = ((self.data[idx] as u64 + (p - f) * a) % p) as u32;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of `{x : Mx = 0}`, one vector per free column in increasing order.
    pub fn kernel(&self) -> Vec<Vec<u32>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let p = self.p;
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut out = Vec::new();
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut x = vec![0u32; self.cols];
            x[f] = 1;
            for (r, &c) in pivots.iter().enumerate() {
                let a = m.get(r, f);
                x[c] = (p - a) % p;
            }
            out.push(x);
        }
        out
    }
}
