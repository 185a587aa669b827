//! The order-`p` obstruction to splitting.
//!
//! Let `Ā ∈ Π(G)` be the transvection `1 + E_{1,r_1}` in the first block. A
//! splitting section sends `Ā`, which has order `p`, to an element of order
//! `p` in the coset `A·Δ(G) = 1 + B + I`, where `B` is `E_{1,r_1}` placed in
//! cell `(1,1)`. If no element of that coset has order `p`, the extension
//! cannot split.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::enumerate_delta;
use super::random::random_in_ideal;
use crate::endo::{BlockEndo, EndoJson};
use crate::error::{Error, Result};
use crate::group::PGroupSpec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObstructionVerdict {
    /// No lift of the transvection has order `p`: the extension does not split.
    NoOrderPLift,
    /// Inconclusive for splitting; carries the first order-`p` lift found.
    OrderPLiftExists(BlockEndo),
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    pub spec: PGroupSpec,
    pub coset_size: u64,
    pub orders_histogram: BTreeMap<u64, u64>,
    #[serde(serialize_with = "serialize_verdict")]
    pub verdict: ObstructionVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<EndoJson>,
}

fn serialize_verdict<S: serde::Serializer>(v: &ObstructionVerdict, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(match v {
        ObstructionVerdict::NoOrderPLift => "NoOrderPLift",
        ObstructionVerdict::OrderPLiftExists(_) => "OrderPLiftExists",
    })
}

/// `1 + B` with `B = E_{1,r_1}` in cell `(1,1)`.
fn transvection_lift(spec: &Arc<PGroupSpec>) -> Result<BlockEndo> {
    let r1 = spec.blocks()[0].r;
    if r1 < 2 {
        return Err(Error::RankTooSmall);
    }
    let mut a = BlockEndo::identity(spec);
    *a.entry_mut(0, r1 - 1) = 1;
    Ok(a)
}

/// Order of `x`, known to be a power of `p` because `σ(x)` has order `p`.
fn p_power_order(x: &BlockEndo, p: u64) -> u64 {
    let mut order = p;
    let mut y = x.pow_u64(p);
    while !y.is_identity() {
        y = y.pow_u64(p);
        order *= p;
    }
    order
}

/// Scans the whole coset `(1 + B)·Δ(G)` for elements of order `p`.
pub fn order_p_coset_obstruction(spec: &Arc<PGroupSpec>, delta_budget: u64) -> Result<ObstructionReport> {
    let a = transvection_lift(spec)?;
    let b = a.sub(&BlockEndo::identity(spec))?;
    let p = spec.p();
    let delta: Vec<BlockEndo> = enumerate_delta(spec, delta_budget)?.collect();
    let orders: Vec<u64> = delta
        .par_iter()
        .map(|d| p_power_order(&d.add(&b).expect("same spec"), p))
        .collect();
    let mut orders_histogram = BTreeMap::new();
    for &o in &orders {
        *orders_histogram.entry(o).or_insert(0) += 1;
    }
    let verdict = match orders.iter().position(|&o| o == p) {
        Some(idx) => ObstructionVerdict::OrderPLiftExists(delta[idx].add(&b)?),
        None => ObstructionVerdict::NoOrderPLift,
    };
    let witness = match &verdict {
        ObstructionVerdict::OrderPLiftExists(w) => Some(EndoJson::from(w)),
        ObstructionVerdict::NoOrderPLift => None,
    };
    Ok(ObstructionReport {
        spec: (**spec).clone(),
        coset_size: delta.len() as u64,
        orders_histogram,
        verdict,
        witness,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BinomialReport {
    pub trials: u64,
    pub failures: u64,
    pub seed: u64,
}

/// Entry `(1, r_1)` of cell `(1,1)` of `(1 + B + C)^p`, reduced mod `p^2`.
pub fn binomial_entry(spec: &Arc<PGroupSpec>, c: &BlockEndo) -> Result<u64> {
    let a = transvection_lift(spec)?;
    let m = a.add(c)?.pow_u64(spec.p());
    let p = spec.p();
    Ok(m.entry(0, spec.blocks()[0].r - 1) % (p * p))
}

/// Checks on random `C ∈ I` that the `(1, r_1)` entry of `(1 + B + C)^p` is
/// `≡ p (mod p^2)`, so no such lift can have order `p`.
pub fn binomial_obstruction_check(spec: &Arc<PGroupSpec>, trials: u64, seed: u64) -> Result<BinomialReport> {
    let p = spec.p();
    let first = spec.blocks()[0];
    if p < 5 || first.n != 2 || first.r < 2 {
        return Err(Error::PreconditionViolation(format!(
            "binomial check needs p >= 5, n_1 = 2, r_1 >= 2; got p={p}, n_1={}, r_1={}",
            first.n, first.r
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cs: Vec<BlockEndo> = (0..trials).map(|_| random_in_ideal(spec, &mut rng)).collect();
    let failures = cs
        .par_iter()
        .map(|c| binomial_entry(spec, c).map(|x| u64::from(x != p)))
        .sum::<Result<u64>>()?;
    Ok(BinomialReport { trials, failures, seed })
}
