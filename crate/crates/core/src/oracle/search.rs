//! Complete search for a complement of `Δ(G)` in `Aut(G)`.
//!
//! Fix generators `g_1..g_m` of `Π(G)`. Any section `θ` gives lifts
//! `h_i = θ(g_i) ∈ θ₀(g_i)·Δ(G)` (with `θ₀` the entrywise lift) that generate
//! a subgroup meeting `Δ(G)` trivially. Conversely, if some assignment of lifts
//! generates a subgroup `H` on which `σ` is injective, then `σ|_H` is onto
//! `Π(G)` (it hits every generator) and its inverse is a section. So trying
//! every assignment decides splitting, and exhausting them proves that no
//! complement exists.
//!
//! Pruning, all of which preserves completeness:
//! - a lift `h_i` must satisfy `h_i^{ord(g_i)} = 1`;
//! - one generator's lifts are taken up to `Δ(G)`-conjugacy, because
//!   conjugating a complement by `d ∈ Δ(G)` gives a complement whose lifts lie
//!   in the same cosets;
//! - an assignment is abandoned as soon as its closure contains two elements
//!   with the same image under `σ`.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::dimino::dimino_closure_with;
use super::{enumerate_delta, find_generators_of_q, order_p_coset_obstruction, ObstructionVerdict};
use crate::arith::valuation;
use crate::config::{Budgets, DEFAULT_SEED};
use crate::endo::{BlockEndo, QElement};
use crate::error::{Error, Result};
use crate::group::{delta_order, pi_order, PGroupSpec};
use crate::splitting::SectionCertificate;

/// Upper bound on compositions spent on conjugacy pruning.
const CONJUGACY_WORK: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub seed: u64,
    /// Run the order-`p` coset scan before searching.
    pub obstruction_prepass: bool,
    /// Visit every assignment and report the lexicographically least success,
    /// instead of stopping at the first one.
    pub exhaustive: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { seed: DEFAULT_SEED, obstruction_prepass: true, exhaustive: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NotFoundReason {
    /// Every assignment was tried.
    Exhausted,
    /// The order-`p` coset scan ruled splitting out.
    OrderPObstruction,
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Found { certificate: SectionCertificate, assignments_tried: u64, successes: u64 },
    NotFound { reason: NotFoundReason, assignments_tried: u64 },
}

impl SearchOutcome {
    pub fn verdict(&self) -> &'static str {
        match self {
            SearchOutcome::Found { .. } => "Found",
            SearchOutcome::NotFound { .. } => "NotFound-Exhausted",
        }
    }
}

fn budget_err(what: &'static str, needed: impl ToString, budget: u64) -> Error {
    Error::BudgetExceeded { what, needed: needed.to_string(), budget }
}

/// `σ` is injective on the closure of `hs`.
fn generates_complement(identity: &BlockEndo, hs: &[BlockEndo], pi: usize) -> bool {
    let mut images: HashSet<QElement> = HashSet::with_capacity(pi);
    let res = dimino_closure_with(identity.clone(), hs, pi, |x: &BlockEndo| {
        if images.insert(x.sigma()) {
            Ok(())
        } else {
            Err(())
        }
    });
    matches!(res, Ok(ref all) if all.len() == pi)
}

/// Lifts of `g` in `θ₀(g)·Δ` whose order divides `ord(g)`, in `Δ` enumeration order.
fn candidate_lifts(spec: &Arc<PGroupSpec>, g: &QElement, delta: &[BlockEndo]) -> Result<Vec<BlockEndo>> {
    let base = g.naive_lift(spec)?;
    let ord = g.order();
    Ok(delta
        .par_iter()
        .map(|d| base.compose_unchecked(d))
        .filter(|h| h.pow_u64(ord).is_identity())
        .collect())
}

/// One representative per `Δ`-conjugacy class, earliest first. Stops pruning
/// once the work cap is reached and keeps the remaining candidates unpruned.
fn conjugacy_representatives(cands: Vec<BlockEndo>, delta: &[BlockEndo], inverses: &[BlockEndo]) -> Vec<BlockEndo> {
    let mut seen: HashSet<BlockEndo> = HashSet::new();
    let mut reps = Vec::new();
    let mut work = 0u64;
    for c in cands {
        if seen.contains(&c) {
            continue;
        }
        if work + delta.len() as u64 <= CONJUGACY_WORK {
            work += delta.len() as u64;
            let orbit: Vec<BlockEndo> = delta
                .par_iter()
                .zip(inverses.par_iter())
                .map(|(d, di)| d.compose_unchecked(&c).compose_unchecked(di))
                .collect();
            seen.extend(orbit);
        }
        reps.push(c);
    }
    reps
}

/// Decides whether `Δ(G)` has a complement in `Aut(G)` by exhaustive lift search.
pub fn complement_lift_search(spec: &Arc<PGroupSpec>, budgets: &Budgets, opts: &SearchOptions) -> Result<SearchOutcome> {
    let pi_big = pi_order(spec);
    let pi = match pi_big.to_u64() {
        Some(n) if n <= budgets.elements => n as usize,
        _ => return Err(budget_err("Pi(G) elements", &pi_big, budgets.elements)),
    };
    let delta_big = delta_order(spec);
    if delta_big > BigUint::from(budgets.delta) {
        return Err(budget_err("delta elements", &delta_big, budgets.delta));
    }
    if opts.obstruction_prepass && spec.blocks()[0].r >= 2 {
        let report = order_p_coset_obstruction(spec, budgets.delta)?;
        if report.verdict == ObstructionVerdict::NoOrderPLift {
            log::info!("{spec}: order-p coset obstruction, {} lifts scanned", report.coset_size);
            return Ok(SearchOutcome::NotFound { reason: NotFoundReason::OrderPObstruction, assignments_tried: 0 });
        }
    }
    let gens = find_generators_of_q(spec, opts.seed, budgets)?;
    let delta: Vec<BlockEndo> = enumerate_delta(spec, budgets.delta)?.collect();
    let mut cands: Vec<Vec<BlockEndo>> = Vec::with_capacity(gens.len());
    for g in &gens {
        let c = candidate_lifts(spec, g, &delta)?;
        log::debug!("{spec}: generator of order {} has {} lifts of matching order", g.order(), c.len());
        if c.is_empty() {
            return Ok(SearchOutcome::NotFound { reason: NotFoundReason::Exhausted, assignments_tried: 0 });
        }
        cands.push(c);
    }

    // Prune the generator of order prime to p if there is one (its lifts form
    // few conjugacy classes), else the one with the most lifts; it becomes the
    // outermost loop.
    let p = spec.p();
    let pivot = (0..gens.len()).max_by_key(|&i| {
        let coprime = valuation(gens[i].order(), p) == Some(0);
        (coprime, cands[i].len(), std::cmp::Reverse(i))
    });
    let mut order: Vec<usize> = (0..gens.len()).collect();
    if let Some(t) = pivot {
        let inverses: Vec<BlockEndo> = delta.par_iter().map(|d| d.invert().expect("delta is in Aut")).collect();
        let before = cands[t].len();
        cands[t] = conjugacy_representatives(std::mem::take(&mut cands[t]), &delta, &inverses);
        log::debug!("{spec}: conjugacy pruning {before} -> {}", cands[t].len());
        order.retain(|&i| i != t);
        order.insert(0, t);
    }
    drop(delta);

    let total: BigUint = order.iter().map(|&i| BigUint::from(cands[i].len())).product();
    if total > BigUint::from(budgets.assignments) {
        return Err(budget_err("assignments", &total, budgets.assignments));
    }
    log::info!("{spec}: searching {total} assignments over {} generators", gens.len());

    let identity = BlockEndo::identity(spec);
    let deadline = budgets.wall_clock.map(|d| Instant::now() + d);
    let timed_out = AtomicBool::new(false);
    let tried = AtomicU64::new(0);
    let successes = AtomicU64::new(0);
    let outer: &[BlockEndo] = order.first().map_or(&[][..], |&i| &cands[i][..]);
    let inner: Vec<&[BlockEndo]> = order.iter().skip(1).map(|&i| &cands[i][..]).collect();

    let search_from = |first: Option<&BlockEndo>| -> Option<Vec<BlockEndo>> {
        let mut idx = vec![0usize; inner.len()];
        let mut best = None;
        loop {
            if timed_out.load(Ordering::Relaxed) {
                return None;
            }
            if deadline.is_some_and(|t| Instant::now() > t) {
                timed_out.store(true, Ordering::Relaxed);
                return None;
            }
            let mut hs: Vec<BlockEndo> = first.into_iter().cloned().collect();
            hs.extend(idx.iter().zip(&inner).map(|(&k, c)| c[k].clone()));
            tried.fetch_add(1, Ordering::Relaxed);
            if generates_complement(&identity, &hs, pi) {
                successes.fetch_add(1, Ordering::Relaxed);
                if best.is_none() {
                    best = Some(hs);
                }
                if !opts.exhaustive {
                    return best;
                }
            }
            // odometer, last generator fastest
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    return best;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < inner[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    };

    let found: Option<Vec<BlockEndo>> = if outer.is_empty() {
        search_from(None)
    } else if opts.exhaustive {
        outer.par_iter().map(|h| search_from(Some(h))).collect::<Vec<_>>().into_iter().flatten().next()
    } else {
        outer.par_iter().find_map_first(|h| search_from(Some(h)))
    };
    if timed_out.load(Ordering::Relaxed) {
        return Err(budget_err("wall-clock seconds", "more", budgets.wall_clock.map_or(0, |d| d.as_secs())));
    }
    let assignments_tried = tried.load(Ordering::Relaxed);
    Ok(match found {
        Some(hs) => {
            // Undo the loop ordering so images line up with `gens`.
            let mut images = vec![identity.clone(); gens.len()];
            for (slot, h) in order.iter().zip(hs) {
                images[*slot] = h;
            }
            let certificate = SectionCertificate::new(Arc::clone(spec), gens, images, opts.seed)?;
            SearchOutcome::Found { certificate, assignments_tried, successes: successes.load(Ordering::Relaxed) }
        }
        None => SearchOutcome::NotFound { reason: NotFoundReason::Exhausted, assignments_tried },
    })
}
