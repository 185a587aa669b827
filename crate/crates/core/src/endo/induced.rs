//! Maps between automorphism groups induced by characteristic subgroups and
//! block projections.

use std::sync::Arc;

use super::BlockEndo;
use crate::error::{Error, Result};
use crate::group::{derive_pk_spec, derive_tail_spec, PGroupSpec};
use crate::matrix::ModMatrix;

/// The automorphism induced on `p^kG`.
///
/// In the coordinates of [`derive_pk_spec`], `p^k x` is represented by `x` mod
/// `p^{n_i - k}`, so the induced map keeps the cells between surviving blocks
/// and reduces cell `(j, l)` mod `p^{n_j - k}`. Blocks with `n_i ≤ k` vanish.
pub fn restrict_to_pk(e: &BlockEndo, k: u32) -> Result<BlockEndo> {
    if !e.is_automorphism()? {
        return Err(Error::NotAUnit);
    }
    let spec = e.spec();
    let target = Arc::new(derive_pk_spec(spec, k)?);
    let survivors: Vec<usize> = (0..spec.dim()).filter(|&c| spec.blocks()[spec.block_of(c)].n > k).collect();
    let moduli = target.coord_moduli();
    let mut data = Vec::with_capacity(survivors.len() * survivors.len());
    for (ni, &i) in survivors.iter().enumerate() {
        for &j in &survivors {
            data.push(e.entry(i, j) % moduli[ni]);
        }
    }
    Ok(BlockEndo::with_spec(target, data))
}

/// Extends an endomorphism of `⊕_{i≥2} G_i` by the identity on `G_1`.
pub fn embed_tail(full: &Arc<PGroupSpec>, tail: &BlockEndo) -> Result<BlockEndo> {
    let expected = derive_tail_spec(full)?;
    if **tail.spec() != expected {
        return Err(Error::SpecMismatch);
    }
    if full.blocks()[0].n != 1 {
        log::warn!("embedding a tail below a first block of exponent {} (> 1)", full.blocks()[0].n);
    }
    let r1 = full.blocks()[0].r;
    let d = full.dim();
    let mut out = BlockEndo::identity(full);
    for i in r1..d {
        for j in r1..d {
            *out.entry_mut(i, j) = tail.entry(i - r1, j - r1);
        }
    }
    Ok(out)
}

/// Deletes the first row and column of cells.
///
/// This is a section of [`embed_tail`] and agrees with the projection of `σ`
/// onto the tail, but it is not multiplicative on `Aut(G)` in general: only
/// modulo `Δ` of the tail.
pub fn truncate_tail(e: &BlockEndo) -> Result<BlockEndo> {
    let spec = e.spec();
    let tail = Arc::new(derive_tail_spec(spec)?);
    let r1 = spec.blocks()[0].r;
    let d = spec.dim();
    let mut data = Vec::with_capacity((d - r1) * (d - r1));
    for i in r1..d {
        for j in r1..d {
            data.push(e.entry(i, j));
        }
    }
    Ok(BlockEndo::with_spec(tail, data))
}

/// The corner cell `e(1,1)` as a matrix over `Z/p^{n_1}`.
///
/// Multiplicative when `n_1 = 2` and `n_i ≥ 4` for `i ≥ 2`: the cross term
/// through block `k` is `a(1,k)·b(k,1)` with `b(k,1)` divisible by
/// `p^{n_k - n_1} ≡ 0 mod p^{n_1}`. Outside that range the corner is still
/// returned, inside [`Error::PreconditionGap`].
pub fn corner_mu(e: &BlockEndo) -> Result<ModMatrix> {
    if !e.is_automorphism()? {
        return Err(Error::NotAUnit);
    }
    let spec = e.spec();
    if spec.num_blocks() < 2 {
        return Err(Error::SingleBlock);
    }
    let corner = e.cell(0, 0);
    let bs = spec.blocks();
    if bs[0].n != 2 || bs[1..].iter().any(|b| b.n < 4) {
        return Err(Error::PreconditionGap { corner });
    }
    Ok(corner)
}
