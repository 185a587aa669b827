//! Brute-force ground truth: enumeration of `G`, `E(G)` and `Δ(G)`, generating
//! sets of `Π(G)`, subgroup closure, the complete complement search and the
//! order-`p` obstructions.

pub mod dimino;
mod generators;
mod obstruction;
pub mod random;
mod search;

pub use dimino::{dimino_closure, dimino_closure_with, ClosureAbort, FiniteGroupElement};
pub use generators::{find_generators_of_q, generators_of_gl};
pub use obstruction::{
    binomial_entry, binomial_obstruction_check, order_p_coset_obstruction, BinomialReport, ObstructionReport,
    ObstructionVerdict,
};
pub use search::{complement_lift_search, NotFoundReason, SearchOptions, SearchOutcome};

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::endo::{hom_divisor, BlockEndo};
use crate::error::{Error, Result};
use crate::group::{delta_order, endo_exponent, enumerate_elements, group_order, PGroupSpec};

/// Applies `e` to every element of `G` and reports whether two collide.
pub fn brute_force_is_bijective(e: &BlockEndo, budget: u64) -> Result<bool> {
    let spec = e.spec();
    let order = enumerate_elements(spec, budget)?;
    let size = group_order(spec).to_usize().expect("within budget");
    let mut hit = vec![false; size];
    for v in order {
        let idx = e.apply(&v)?.index(spec) as usize;
        if std::mem::replace(&mut hit[idx], true) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Odometer over block matrices `base + step ⊙ t` with `t[idx] < count[idx]`,
/// last entry fastest.
pub struct EndoOdometer {
    spec: Arc<PGroupSpec>,
    base: Vec<u64>,
    steps: Vec<u64>,
    counts: Vec<u64>,
    state: Option<Vec<u64>>,
}

impl Iterator for EndoOdometer {
    type Item = BlockEndo;

    fn next(&mut self) -> Option<BlockEndo> {
        let state = self.state.take()?;
        let d = self.spec.dim();
        let moduli = self.spec.coord_moduli();
        let data: Vec<u64> = (0..d * d)
            .map(|idx| (self.base[idx] + self.steps[idx] * state[idx]) % moduli[idx / d])
            .collect();
        let mut succ = state;
        let mut pos = succ.len();
        while pos > 0 {
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.counts[pos] {
                self.state = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(BlockEndo::with_spec(Arc::clone(&self.spec), data))
    }
}

fn odometer(spec: &Arc<PGroupSpec>, delta: bool) -> EndoOdometer {
    let d = spec.dim();
    let p = spec.p();
    let mut base = vec![0; d * d];
    let mut steps = Vec::with_capacity(d * d);
    let mut counts = Vec::with_capacity(d * d);
    for i in 0..d {
        let bi = spec.block_of(i);
        for j in 0..d {
            let bj = spec.block_of(j);
            let mut step = hom_divisor(spec, bi, bj);
            if delta && bi == bj {
                step *= p;
            }
            if delta && i == j {
                base[i * d + j] = 1;
            }
            steps.push(step);
            counts.push(spec.modulus(bi) / step);
        }
    }
    EndoOdometer { spec: Arc::clone(spec), base, steps, counts, state: Some(vec![0; d * d]) }
}

fn check_budget(what: &'static str, needed: BigUint, budget: u64) -> Result<()> {
    if needed > BigUint::from(budget) {
        Err(Error::BudgetExceeded { what, needed: needed.to_string(), budget })
    } else {
        Ok(())
    }
}

/// Every element of `E(G)` exactly once.
pub fn enumerate_endos(spec: &Arc<PGroupSpec>, budget: u64) -> Result<EndoOdometer> {
    check_budget("endomorphisms", BigUint::from(spec.p()).pow(endo_exponent(spec) as u32), budget)?;
    Ok(odometer(spec, false))
}

/// Every element of `Δ(G) = 1 + I` exactly once: diagonal cells run over
/// multiples of `p`, cell `(j, k)` over multiples of `p^{max(n_j - n_k, 0)}`.
pub fn enumerate_delta(spec: &Arc<PGroupSpec>, budget: u64) -> Result<EndoOdometer> {
    check_budget("delta elements", delta_order(spec), budget)?;
    Ok(odometer(spec, true))
}

/// `|Aut(G)|` by brute force: the endomorphisms that are bijections of `G`.
pub fn count_bijective_endos(spec: &Arc<PGroupSpec>, endo_budget: u64, element_budget: u64) -> Result<u64> {
    let mut count = 0;
    for e in enumerate_endos(spec, endo_budget)? {
        if brute_force_is_bijective(&e, element_budget)? {
            count += 1;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{aut_order, DEFAULT_ELEMENT_BUDGET};

    fn spec(p: u64, blocks: &[(u32, usize)]) -> Arc<PGroupSpec> {
        Arc::new(PGroupSpec::new(p, blocks).unwrap())
    }

    #[test]
    fn bijectivity_basics() {
        let s = spec(2, &[(1, 1), (2, 1)]);
        assert!(brute_force_is_bijective(&BlockEndo::identity(&s), 1 << 10).unwrap());
        assert!(!brute_force_is_bijective(&BlockEndo::zero(&s), 1 << 10).unwrap());
        let mut agree = 0;
        for e in enumerate_endos(&s, 1 << 10).unwrap() {
            assert_eq!(brute_force_is_bijective(&e, 1 << 10).unwrap(), e.is_automorphism().unwrap());
            agree += 1;
        }
        assert_eq!(agree, 32);
    }

    #[test]
    fn delta_enumeration() {
        let s = spec(7, &[(1, 3)]);
        let all: Vec<_> = enumerate_delta(&s, 1 << 16).unwrap().collect();
        assert_eq!(all, vec![BlockEndo::identity(&s)]);

        let s = spec(5, &[(2, 2)]);
        let all: Vec<_> = enumerate_delta(&s, 1 << 16).unwrap().collect();
        assert_eq!(all.len(), 625);
        assert!(all.iter().all(BlockEndo::in_delta));

        let s = spec(2, &[(1, 1), (2, 1)]);
        let all: Vec<_> = enumerate_delta(&s, 1 << 16).unwrap().collect();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|e| e.is_automorphism().unwrap() && e.in_delta()));
        let distinct: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), 8);

        assert!(matches!(enumerate_delta(&spec(2, &[(2, 5)]), 1 << 16), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn aut_count_small() {
        let s = spec(2, &[(1, 1), (2, 1)]);
        assert_eq!(count_bijective_endos(&s, 1 << 20, DEFAULT_ELEMENT_BUDGET).unwrap(), 8);
        let s = spec(3, &[(1, 2)]);
        assert_eq!(BigUint::from(count_bijective_endos(&s, 1 << 20, DEFAULT_ELEMENT_BUDGET).unwrap()), aut_order(&s));
    }
}
