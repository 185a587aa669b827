//! Seeded random elements of `E(G)`, `I` and `Aut(G)`.

use std::sync::Arc;

use rand::Rng;

use crate::endo::{hom_divisor, BlockEndo};
use crate::group::PGroupSpec;

/// Uniform element of `E(G)`.
pub fn random_endo<R: Rng>(spec: &Arc<PGroupSpec>, rng: &mut R) -> BlockEndo {
    random_with(spec, rng, false)
}

/// Uniform element of the ideal `I` (diagonal cells divisible by `p`).
pub fn random_in_ideal<R: Rng>(spec: &Arc<PGroupSpec>, rng: &mut R) -> BlockEndo {
    random_with(spec, rng, true)
}

/// Uniform element of `Aut(G)`, by rejection.
pub fn random_unit<R: Rng>(spec: &Arc<PGroupSpec>, rng: &mut R) -> BlockEndo {
    loop {
        let e = random_endo(spec, rng);
        if e.is_automorphism().expect("random endomorphisms satisfy the constraints") {
            return e;
        }
    }
}

/// Uniform element of `Δ(G) = 1 + I`.
pub fn random_delta<R: Rng>(spec: &Arc<PGroupSpec>, rng: &mut R) -> BlockEndo {
    BlockEndo::identity(spec).add(&random_in_ideal(spec, rng)).expect("same spec")
}

fn random_with<R: Rng>(spec: &Arc<PGroupSpec>, rng: &mut R, ideal: bool) -> BlockEndo {
    let d = spec.dim();
    let p = spec.p();
    let mut vals = Vec::with_capacity(d * d);
    for i in 0..d {
        let bi = spec.block_of(i);
        for j in 0..d {
            let bj = spec.block_of(j);
            let mut step = hom_divisor(spec, bi, bj);
            if ideal && bi == bj {
                step *= p;
            }
            let m = spec.modulus(bi);
            vals.push(step * rng.gen_range(0..m / step));
        }
    }
    BlockEndo::from_fn(spec, |i, j| vals[i * d + j])
}
