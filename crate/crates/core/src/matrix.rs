use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{mod_inverse, mod_mul};

/// Dense matrix over `Z/mZ`, row-major, entries canonical in `[0, m)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ModMatrix {
    rows: usize,
    cols: usize,
    modulus: u64,
    data: Vec<u64>,
}

impl ModMatrix {
    pub fn zeros(rows: usize, cols: usize, modulus: u64) -> Self {
        ModMatrix { rows, cols, modulus, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize, modulus: u64) -> Self {
        let mut m = Self::zeros(n, n, modulus);
        for i in 0..n {
            m.data[i * n + i] = 1 % modulus;
        }
        m
    }

    /// Builds from row vectors, reducing every entry.
    pub fn from_rows(rows: &[Vec<u64>], modulus: u64) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.iter().flatten().map(|&x| x % modulus).collect();
        ModMatrix { rows: r, cols: c, modulus, data }
    }

    pub fn from_fn(rows: usize, cols: usize, modulus: u64, mut f: impl FnMut(usize, usize) -> u64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j) % modulus);
            }
        }
        ModMatrix { rows, cols, modulus, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.modulus;
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(<[u64]>::to_vec).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| self.get(i, j) == u64::from(i == j) % self.modulus))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Same entries reduced into a (dividing) smaller modulus.
    pub fn reduce(&self, modulus: u64) -> Self {
        ModMatrix {
            rows: self.rows,
            cols: self.cols,
            modulus,
            data: self.data.iter().map(|&x| x % modulus).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols, self.modulus), (other.rows, other.cols, other.modulus));
        let m = self.modulus;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| (a + b) % m).collect();
        ModMatrix { data, ..*self }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        assert_eq!(self.modulus, other.modulus, "modulus mismatch");
        let m = self.modulus as u128;
        let mut out = Self::zeros(self.rows, other.cols, self.modulus);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u128;
                for l in 0..self.cols {
                    acc += self.data[i * self.cols + l] as u128 * other.data[l * other.cols + j] as u128;
                }
                out.data[i * other.cols + j] = (acc % m) as u64;
            }
        }
        out
    }

    pub fn pow(&self, mut exp: u64) -> Self {
        assert_eq!(self.rows, self.cols);
        let mut acc = Self::identity(self.rows, self.modulus);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            exp >>= 1;
        }
        acc
    }

    /// Rank over `F_p`, after reducing entries mod the prime `p`.
    pub fn rank_mod_prime(&self, p: u64) -> usize {
        let mut a = self.reduce(p);
        let mut rank = 0;
        for col in 0..a.cols {
            let Some(piv) = (rank..a.rows).find(|&r| a.get(r, col) != 0) else {
                continue;
            };
            a.swap_rows(rank, piv);
            let inv = mod_inverse(a.get(rank, col), p).expect("nonzero in a field");
            for r in 0..a.rows {
                if r != rank && a.get(r, col) != 0 {
                    let factor = mod_mul(a.get(r, col), inv, p);
                    a.sub_row_multiple(r, rank, factor);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Square and invertible modulo the prime `p` (hence over `Z/p^k`).
    pub fn is_unit(&self, p: u64) -> bool {
        self.rows == self.cols && self.rank_mod_prime(p) == self.rows
    }

    /// Inverse over `Z/p^k` (`modulus = p^k`) by Gauss-Jordan elimination with
    /// pivots that are units, i.e. not divisible by `p`.
    pub fn inverse(&self, p: u64) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let m = self.modulus;
        let mut a = self.clone();
        let mut inv = Self::identity(n, m);
        for col in 0..n {
            let piv = (col..n).find(|&r| a.get(r, col) % p != 0)?;
            a.swap_rows(col, piv);
            inv.swap_rows(col, piv);
            let u = mod_inverse(a.get(col, col), m).expect("pivot is a unit");
            a.scale_row(col, u);
            inv.scale_row(col, u);
            for r in 0..n {
                if r != col {
                    let factor = a.get(r, col);
                    if factor != 0 {
                        a.sub_row_multiple(r, col, factor);
                        inv.sub_row_multiple(r, col, factor);
                    }
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn scale_row(&mut self, r: usize, factor: u64) {
        for j in 0..self.cols {
            let idx = r * self.cols + j;
            self.data[idx] = mod_mul(self.data[idx], factor, self.modulus);
        }
    }

    /// row[target] -= factor * row[source]
    fn sub_row_multiple(&mut self, target: usize, source: usize, factor: u64) {
        let m = self.modulus;
        for j in 0..self.cols {
            let s = mod_mul(self.data[source * self.cols + j], factor, m);
            let idx = target * self.cols + j;
            self.data[idx] = (self.data[idx] + m - s) % m;
        }
    }
}

impl PartialOrd for ModMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ModMatrix {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.rows(), self.cols(), self.to_rows()).cmp(&(other.rows(), other.cols(), other.to_rows()))
    }
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} (mod {})", self.to_rows(), self.modulus)
    }
}

impl Serialize for ModMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

/// Deserializes rows only; the modulus has to be attached by the caller.
#[derive(Debug, Clone, Deserialize)]
#[serde(transparent)]
pub struct RawMatrix(pub Vec<Vec<u64>>);

impl<'de> Deserialize<'de> for ModMatrix {
    fn deserialize<D: Deserializer<'de>>(_: D) -> Result<Self, D::Error> {
        Err(serde::de::Error::custom("ModMatrix needs a modulus; deserialize RawMatrix instead"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_over_prime_power() {
        let a = ModMatrix::from_rows(&[vec![6, 5], vec![3, 1]], 25);
        let inv = a.inverse(5).unwrap();
        assert!(a.mul(&inv).is_identity());
        assert!(inv.mul(&a).is_identity());
        let singular = ModMatrix::from_rows(&[vec![5, 0], vec![0, 1]], 25);
        assert!(singular.inverse(5).is_none());
        assert!(!singular.is_unit(5));
    }

    #[test]
    fn rank_over_f3() {
        let a = ModMatrix::from_rows(&[vec![1, 2], vec![2, 1]], 3);
        assert_eq!(a.rank_mod_prime(3), 1);
        assert_eq!(ModMatrix::identity(3, 3).rank_mod_prime(3), 3);
    }

    #[test]
    fn power() {
        let t = ModMatrix::from_rows(&[vec![1, 1], vec![0, 1]], 5);
        assert!(t.pow(5).is_identity());
        assert!(!t.pow(4).is_identity());
    }
}
