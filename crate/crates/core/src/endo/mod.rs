//! Endomorphisms of `G` as constrained block matrices.
//!
//! Convention: column vectors, left action. Cell `(j, k)` is the `r_j × r_k`
//! matrix of the component `G_k → G_j` (row = target block, column = source
//! block). Entries of cell `(j, k)` live mod the target modulus `p^{n_j}` and are
//! divisible by `p^{max(n_j - n_k, 0)}`; that divisibility is exactly what
//! makes a matrix a homomorphism `Z_{p^{n_k}} → Z_{p^{n_j}}`.

mod induced;
mod json;

pub use induced::{corner_mu, embed_tail, restrict_to_pk, truncate_tail};
pub use json::{EndoJson, QElementJson};

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::group::{aut_order_factorization, aut_order, GroupElement, PGroupSpec};
use crate::matrix::ModMatrix;

/// An element of `E(G)`. Stored as one `dim × dim` row-major matrix whose row
/// `i` is reduced mod the modulus of the block containing coordinate `i`.
#[derive(Clone)]
pub struct BlockEndo {
    spec: Arc<PGroupSpec>,
    data: Vec<u64>,
}

impl PartialEq for BlockEndo {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data && (Arc::ptr_eq(&self.spec, &other.spec) || self.spec == other.spec)
    }
}

impl Eq for BlockEndo {}

impl Hash for BlockEndo {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.data.hash(state);
    }
}

impl PartialOrd for BlockEndo {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BlockEndo {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.data.cmp(&other.data)
    }
}

impl fmt::Debug for BlockEndo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlockEndo{:?}{:?}", self.spec, self.cells())
    }
}

/// `p^{max(n_target - n_source, 0)}`: every entry of cell `(target, source)` is a multiple of it.
pub fn hom_divisor(spec: &PGroupSpec, target: usize, source: usize) -> u64 {
    let (nt, ns) = (spec.blocks()[target].n, spec.blocks()[source].n);
    spec.p().pow(nt.saturating_sub(ns))
}

impl BlockEndo {
    pub fn zero(spec: &Arc<PGroupSpec>) -> Self {
        let d = spec.dim();
        BlockEndo { spec: Arc::clone(spec), data: vec![0; d * d] }
    }

    pub fn identity(spec: &Arc<PGroupSpec>) -> Self {
        let mut e = Self::zero(spec);
        let d = spec.dim();
        for i in 0..d {
            e.data[i * d + i] = 1;
        }
        e
    }

    /// Flat constructor: `f(row, col)` over flattened coordinates, reduced mod the
    /// row modulus. Hom constraints are not enforced.
    pub fn from_fn(spec: &Arc<PGroupSpec>, f: impl Fn(usize, usize) -> u64) -> Self {
        let d = spec.dim();
        let moduli = spec.coord_moduli();
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                data.push(f(i, j) % moduli[i]);
            }
        }
        BlockEndo { spec: Arc::clone(spec), data }
    }

    /// Builds from `cells[target][source]` row lists, reducing entries. Hom
    /// constraints are not enforced; see [`BlockEndo::from_cells_checked`].
    pub fn from_cells(spec: &Arc<PGroupSpec>, cells: &[Vec<Vec<Vec<u64>>>]) -> Result<Self> {
        let nb = spec.num_blocks();
        if cells.len() != nb || cells.iter().any(|row| row.len() != nb) {
            return Err(Error::ShapeMismatch(format!("expected a {nb}×{nb} grid of cells")));
        }
        let mut e = Self::zero(spec);
        let d = spec.dim();
        for (j, row) in cells.iter().enumerate() {
            for (k, cell) in row.iter().enumerate() {
                let (rj, rk) = (spec.blocks()[j].r, spec.blocks()[k].r);
                if cell.len() != rj || cell.iter().any(|r| r.len() != rk) {
                    return Err(Error::ShapeMismatch(format!("cell ({j},{k}) must be {rj}×{rk}")));
                }
                let m = spec.modulus(j);
                for (a, r) in cell.iter().enumerate() {
                    for (b, &x) in r.iter().enumerate() {
                        e.data[(spec.offset(j) + a) * d + spec.offset(k) + b] = x % m;
                    }
                }
            }
        }
        Ok(e)
    }

    /// Like [`BlockEndo::from_cells`] but rejects non-canonical entries and Hom
    /// constraint violations, naming the offending cell.
    pub fn from_cells_checked(spec: &Arc<PGroupSpec>, cells: &[Vec<Vec<Vec<u64>>>]) -> Result<Self> {
        let e = Self::from_cells(spec, cells)?;
        for (j, row) in cells.iter().enumerate() {
            let m = spec.modulus(j);
            for (k, cell) in row.iter().enumerate() {
                if let Some(&value) = cell.iter().flatten().find(|&&x| x >= m) {
                    return Err(Error::NonCanonicalEntry { target: j, src: k, value, modulus: m });
                }
            }
        }
        if let Some((target, source)) = e.first_hom_violation() {
            return Err(Error::ConstraintViolation { target, src: source });
        }
        Ok(e)
    }

    /// Block-diagonal endomorphism with the given diagonal cells.
    pub fn block_diagonal(spec: &Arc<PGroupSpec>, diag: &[ModMatrix]) -> Result<Self> {
        if diag.len() != spec.num_blocks() {
            return Err(Error::ShapeMismatch("one diagonal cell per block".into()));
        }
        let mut e = Self::zero(spec);
        for (i, m) in diag.iter().enumerate() {
            e.set_cell(i, i, m)?;
        }
        Ok(e)
    }

    pub fn spec(&self) -> &Arc<PGroupSpec> {
        &self.spec
    }

    /// Flattened row-major entries.
    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn entry(&self, row: usize, col: usize) -> u64 {
        self.data[row * self.spec.dim() + col]
    }

    pub(crate) fn entry_mut(&mut self, row: usize, col: usize) -> &mut u64 {
        let d = self.spec.dim();
        &mut self.data[row * d + col]
    }

    /// Cell `(target, source)` as a matrix mod `p^{n_target}`.
    pub fn cell(&self, target: usize, source: usize) -> ModMatrix {
        let s = &self.spec;
        let (oj, ok) = (s.offset(target), s.offset(source));
        ModMatrix::from_fn(s.blocks()[target].r, s.blocks()[source].r, s.modulus(target), |a, b| {
            self.entry(oj + a, ok + b)
        })
    }

    /// Overwrites cell `(target, source)`, reducing mod `p^{n_target}`.
    pub fn set_cell(&mut self, target: usize, source: usize, m: &ModMatrix) -> Result<()> {
        let s = Arc::clone(&self.spec);
        let (rj, rk) = (s.blocks()[target].r, s.blocks()[source].r);
        if m.rows() != rj || m.cols() != rk {
            return Err(Error::ShapeMismatch(format!("cell ({target},{source}) must be {rj}×{rk}")));
        }
        let modulus = s.modulus(target);
        for a in 0..rj {
            for b in 0..rk {
                *self.entry_mut(s.offset(target) + a, s.offset(source) + b) = m.get(a, b) % modulus;
            }
        }
        Ok(())
    }

    /// All cells as nested row lists, indexed `[target][source]`.
    pub fn cells(&self) -> Vec<Vec<Vec<Vec<u64>>>> {
        let nb = self.spec.num_blocks();
        (0..nb).map(|j| (0..nb).map(|k| self.cell(j, k).to_rows()).collect()).collect()
    }

    fn first_hom_violation(&self) -> Option<(usize, usize)> {
        let s = &self.spec;
        let d = s.dim();
        let nb = s.num_blocks();
        for j in 0..nb {
            for k in 0..nb {
                let div = hom_divisor(s, j, k);
                if div == 1 {
                    continue;
                }
                for row in s.offset(j)..s.offset(j + 1) {
                    let cells = &self.data[row * d + s.offset(k)..row * d + s.offset(k + 1)];
                    if cells.iter().any(|&x| x % div != 0) {
                        return Some((j, k));
                    }
                }
            }
        }
        None
    }

    pub fn check_hom_constraints(&self) -> bool {
        self.first_hom_violation().is_none()
    }

    fn same_spec(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.spec, &other.spec) || self.spec == other.spec {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_spec(other)?;
        let d = self.spec.dim();
        let moduli = self.spec.coord_moduli();
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .enumerate()
            .map(|(idx, (&a, &b))| (a + b) % moduli[idx / d])
            .collect();
        Ok(BlockEndo { spec: Arc::clone(&self.spec), data })
    }

    pub fn neg(&self) -> Self {
        let d = self.spec.dim();
        let moduli = self.spec.coord_moduli();
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(idx, &a)| (moduli[idx / d] - a) % moduli[idx / d])
            .collect();
        BlockEndo { spec: Arc::clone(&self.spec), data }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// `self ∘ other` (apply `other` first). Entry `(i, j)` is `Σ_l a[i][l]·b[l][j]`
    /// over the integers, reduced mod the row modulus. Independent of the
    /// representatives of `b`: changing `b[l][j]` by `p^{n_l}` moves the sum by a
    /// multiple of `a[i][l]·p^{n_l}`, which vanishes mod `p^{n_i}` by the Hom constraint on `a`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_spec(other)?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Self) -> Self {
        let d = self.spec.dim();
        let moduli = self.spec.coord_moduli();
        let mut data = vec![0u64; d * d];
        for i in 0..d {
            let arow = &self.data[i * d..(i + 1) * d];
            let m = moduli[i] as u128;
            for j in 0..d {
                let mut acc = 0u128;
                for (l, &a) in arow.iter().enumerate() {
                    acc += a as u128 * other.data[l * d + j] as u128;
                }
                data[i * d + j] = (acc % m) as u64;
            }
        }
        let out = BlockEndo { spec: Arc::clone(&self.spec), data };
        debug_assert!(
            !self.check_hom_constraints() || !other.check_hom_constraints() || out.check_hom_constraints(),
            "composition left E(G)"
        );
        out
    }

    pub fn apply(&self, v: &GroupElement) -> Result<GroupElement> {
        let d = self.spec.dim();
        if v.coords().len() != d {
            return Err(Error::SpecMismatch);
        }
        let moduli = self.spec.coord_moduli();
        let mut out = Vec::with_capacity(d);
        for i in 0..d {
            let acc: u128 = self.data[i * d..(i + 1) * d]
                .iter()
                .zip(v.coords())
                .map(|(&a, &x)| a as u128 * x as u128)
                .sum();
            out.push((acc % moduli[i] as u128) as u64);
        }
        Ok(GroupElement::from_flat(out))
    }

    /// The reduction `σ`: each diagonal cell mod `p`.
    pub fn sigma(&self) -> QElement {
        let p = self.spec.p();
        let mats = (0..self.spec.num_blocks()).map(|i| self.cell(i, i).reduce(p)).collect();
        QElement { p, mats }
    }

    /// A unit of `E(G)` iff every diagonal cell is invertible mod `p`.
    pub fn is_automorphism(&self) -> Result<bool> {
        if let Some((target, source)) = self.first_hom_violation() {
            return Err(Error::ConstraintViolation { target, src: source });
        }
        Ok(self.is_unit_unchecked())
    }

    fn is_unit_unchecked(&self) -> bool {
        let p = self.spec.p();
        (0..self.spec.num_blocks()).all(|i| self.cell(i, i).is_unit(p))
    }

    /// The exponent-weighted lift `L(e)` over `Z/p^{n_R}`: entry of block
    /// `(j, k)` is `e_{jk}·p^{n_k - n_j}` when `n_k ≥ n_j`, else `e_{jk} / p^{n_j - n_k}`.
    ///
    /// Equivalently `L(e)` is the action of `e` on the copy of `G` inside
    /// `(Z/p^{n_R})^dim` given by `x_k ↦ p^{n_R - n_k}·x_k`. Mod `p` it is block
    /// lower-triangular with diagonal `σ(e)`. Column `k` is meaningful only mod
    /// `p^{n_k}`, so `L(ab) ≡ L(a)L(b)` holds column by column mod `p^{n_k}`.
    pub fn weighted_lift(&self) -> Result<ModMatrix> {
        if let Some((target, source)) = self.first_hom_violation() {
            return Err(Error::ConstraintViolation { target, src: source });
        }
        let s = &self.spec;
        let p = s.p();
        let d = s.dim();
        let top = s.exponent_modulus();
        let ns: Vec<u32> = (0..d).map(|c| s.blocks()[s.block_of(c)].n).collect();
        Ok(ModMatrix::from_fn(d, d, top, |i, j| {
            let x = self.entry(i, j);
            if ns[j] >= ns[i] {
                x * p.pow(ns[j] - ns[i]) % top
            } else {
                x / p.pow(ns[i] - ns[j])
            }
        }))
    }

    /// Inverse automorphism: invert `L(e)` over `Z/p^{n_R}` with unit pivots,
    /// then undo the weighting.
    pub fn invert(&self) -> Result<Self> {
        if !self.is_automorphism()? {
            return Err(Error::NotAUnit);
        }
        let s = Arc::clone(&self.spec);
        let p = s.p();
        let inv = self.weighted_lift()?.inverse(p).ok_or(Error::NotAUnit)?;
        let d = s.dim();
        let ns: Vec<u32> = (0..d).map(|c| s.blocks()[s.block_of(c)].n).collect();
        let moduli = s.coord_moduli();
        let mut out = Self::zero(&s);
        for i in 0..d {
            for j in 0..d {
                let x = inv.get(i, j) % moduli[j];
                let v = if ns[j] > ns[i] {
                    let scale = p.pow(ns[j] - ns[i]);
                    assert_eq!(x % scale, 0, "unscaling must be exact for a unit");
                    x / scale
                } else {
                    x * p.pow(ns[i] - ns[j])
                };
                out.data[i * d + j] = v % moduli[i];
            }
        }
        debug_assert!(self.compose_unchecked(&out).is_identity());
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        let d = self.spec.dim();
        self.data.iter().enumerate().all(|(idx, &x)| x == u64::from(idx / d == idx % d))
    }

    /// Member of `Δ(G) = ker σ = 1 + I`.
    pub fn in_delta(&self) -> bool {
        self.check_hom_constraints() && self.sigma().is_identity()
    }

    pub fn pow(&self, exp: &BigUint) -> Self {
        let mut acc = Self::identity(&self.spec);
        for bit in (0..exp.bits()).rev() {
            acc = acc.compose_unchecked(&acc);
            if exp.bit(bit) {
                acc = acc.compose_unchecked(self);
            }
        }
        acc
    }

    pub fn pow_u64(&self, exp: u64) -> Self {
        self.pow(&BigUint::from(exp))
    }

    /// Order in `Aut(G)`: start from `|Aut(G)|` and strip prime factors while
    /// the power stays trivial.
    pub fn element_order(&self) -> Result<BigUint> {
        if !self.is_automorphism()? {
            return Err(Error::NotAUnit);
        }
        let mut n = aut_order(&self.spec);
        for (q, e) in aut_order_factorization(&self.spec)? {
            let q = BigUint::from(q);
            for _ in 0..e {
                let reduced = &n / &q;
                if self.pow(&reduced).is_identity() {
                    n = reduced;
                } else {
                    break;
                }
            }
        }
        Ok(n)
    }

    /// `element_order` as a machine integer.
    pub fn element_order_u64(&self) -> Result<u64> {
        self.element_order()?
            .to_u64()
            .ok_or_else(|| Error::PreconditionViolation("element order exceeds u64".into()))
    }

    pub(crate) fn with_spec(spec: Arc<PGroupSpec>, data: Vec<u64>) -> Self {
        debug_assert_eq!(data.len(), spec.dim() * spec.dim());
        BlockEndo { spec, data }
    }
}

/// An element of `Π(G) = Π_i GL_{r_i}(F_p)` (or of the surrounding matrix
/// monoid): one square matrix mod `p` per block.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QElement {
    p: u64,
    mats: Vec<ModMatrix>,
}

impl fmt::Debug for QElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<_> = self.mats.iter().map(ModMatrix::to_rows).collect();
        write!(f, "Q{rows:?}")
    }
}

impl QElement {
    pub fn new(p: u64, mats: Vec<ModMatrix>) -> Self {
        let mats = mats.into_iter().map(|m| m.reduce(p)).collect();
        QElement { p, mats }
    }

    pub fn identity(spec: &PGroupSpec) -> Self {
        let p = spec.p();
        QElement { p, mats: spec.blocks().iter().map(|b| ModMatrix::identity(b.r, p)).collect() }
    }

    /// Identity everywhere except `m` in block `block`.
    pub fn embed(spec: &PGroupSpec, block: usize, m: &ModMatrix) -> Self {
        let mut q = Self::identity(spec);
        q.mats[block] = m.reduce(spec.p());
        q
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn mats(&self) -> &[ModMatrix] {
        &self.mats
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.mats.len(), other.mats.len(), "QElement shape mismatch");
        QElement { p: self.p, mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a.mul(b)).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.mats.iter().all(ModMatrix::is_identity)
    }

    pub fn is_invertible(&self) -> bool {
        self.mats.iter().all(|m| m.is_unit(self.p))
    }

    pub fn conforms(&self, spec: &PGroupSpec) -> bool {
        self.p == spec.p()
            && self.mats.len() == spec.num_blocks()
            && self.mats.iter().zip(spec.blocks()).all(|(m, b)| m.rows() == b.r && m.cols() == b.r)
    }

    /// Entrywise integer lift: the block-diagonal endomorphism with the same
    /// entries (in `[0, p)`).
    pub fn naive_lift(&self, spec: &Arc<PGroupSpec>) -> Result<BlockEndo> {
        if !self.conforms(spec) {
            return Err(Error::ShapeMismatch("QElement does not match the group".into()));
        }
        BlockEndo::block_diagonal(spec, &self.mats.iter().enumerate().map(|(i, m)| {
            ModMatrix::from_fn(m.rows(), m.cols(), spec.modulus(i), |a, b| m.get(a, b))
        }).collect::<Vec<_>>())
    }

    /// Order in `Π(G)`, by repeated multiplication; fine for the small groups
    /// this is used on.
    pub fn order(&self) -> u64 {
        let mut x = self.clone();
        let mut k = 1;
        while !x.is_identity() {
            x = x.mul(self);
            k += 1;
        }
        k
    }
}

#[cfg(test)]
mod tests;
