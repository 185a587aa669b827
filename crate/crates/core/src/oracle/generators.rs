use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num_traits::ToPrimitive;

use super::dimino::dimino_closure;
use crate::arith::primitive_root;
use crate::config::Budgets;
use crate::endo::QElement;
use crate::error::{Error, Result};
use crate::group::{gl_order, PGroupSpec};
use crate::matrix::ModMatrix;

const RANDOM_ATTEMPTS: usize = 200;

fn random_invertible<R: Rng>(p: u64, r: usize, rng: &mut R) -> ModMatrix {
    loop {
        let m = ModMatrix::from_fn(r, r, p, |_, _| rng.gen_range(0..p));
        if m.is_unit(p) {
            return m;
        }
    }
}

/// Transvections `1 + E_{ij}` (i ≠ j) plus `diag(g, 1, ..., 1)` for a primitive root `g`.
fn elementary_generators(p: u64, r: usize) -> Vec<ModMatrix> {
    let mut out = Vec::new();
    for i in 0..r {
        for j in 0..r {
            if i != j {
                let mut t = ModMatrix::identity(r, p);
                t.set(i, j, 1);
                out.push(t);
            }
        }
    }
    let g = primitive_root(p);
    if g != 1 {
        let mut d = ModMatrix::identity(r, p);
        d.set(0, 0, g);
        out.push(d);
    }
    out
}

/// A generating set of `GL_r(F_p)`, verified by closure: at most two random
/// matrices when the seeded search finds a generating pair, otherwise the
/// elementary generators.
pub fn generators_of_gl(p: u64, r: usize, seed: u64, budget: u64) -> Result<Vec<ModMatrix>> {
    if r == 1 {
        let g = primitive_root(p);
        return Ok(if g == 1 { vec![] } else { vec![ModMatrix::from_rows(&[vec![g]], p)] });
    }
    let order = gl_order(p, r);
    let size = match order.to_u64() {
        Some(n) if n <= budget => n as usize,
        _ => return Err(Error::BudgetExceeded { what: "GL elements", needed: order.to_string(), budget }),
    };
    let id = ModMatrix::identity(r, p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (p << 32) ^ r as u64);
    for _ in 0..RANDOM_ATTEMPTS {
        let pair = vec![random_invertible(p, r, &mut rng), random_invertible(p, r, &mut rng)];
        if let Ok(all) = dimino_closure(id.clone(), &pair, size) {
            if all.len() == size {
                return Ok(pair);
            }
        }
    }
    let fallback = elementary_generators(p, r);
    let all = dimino_closure(id, &fallback, size)?;
    assert_eq!(all.len(), size, "elementary matrices generate GL");
    Ok(fallback)
}

/// Generators of `Π(G)`: each block's `GL` generators embedded with identity elsewhere.
pub fn find_generators_of_q(spec: &PGroupSpec, seed: u64, budgets: &Budgets) -> Result<Vec<QElement>> {
    let mut out = Vec::new();
    for (i, b) in spec.blocks().iter().enumerate() {
        for m in generators_of_gl(spec.p(), b.r, seed.wrapping_add(i as u64), budgets.elements)? {
            out.push(QElement::embed(spec, i, &m));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    use crate::group::pi_order;

    fn closure_size(spec: &PGroupSpec, gens: &[QElement]) -> usize {
        dimino_closure(QElement::identity(spec), gens, 1 << 20).unwrap().len()
    }

    #[test]
    fn cyclic_blocks() {
        let s = PGroupSpec::new(7, &[(1, 1)]).unwrap();
        let g = find_generators_of_q(&s, 1, &Budgets::default()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(closure_size(&s, &g), 6);
        let s = PGroupSpec::new(2, &[(3, 1)]).unwrap();
        assert!(find_generators_of_q(&s, 1, &Budgets::default()).unwrap().is_empty());
    }

    #[test]
    fn small_general_linear_groups() {
        for (p, n, r, order) in [(3, 2, 2, 48usize), (2, 2, 3, 168), (2, 1, 2, 6), (5, 1, 2, 480)] {
            let s = PGroupSpec::new(p, &[(n, r)]).unwrap();
            let g = find_generators_of_q(&s, 7, &Budgets::default()).unwrap();
            assert!(g.len() <= 2, "expected a generating pair for GL_{r}(F_{p})");
            assert_eq!(closure_size(&s, &g), order);
        }
    }

    #[test]
    fn product_of_blocks() {
        let s = PGroupSpec::new(3, &[(1, 2), (2, 1)]).unwrap();
        let g = find_generators_of_q(&s, 3, &Budgets::default()).unwrap();
        assert_eq!(BigUint::from(closure_size(&s, &g)), pi_order(&s));
    }

    #[test]
    fn deterministic_for_seed() {
        let a = generators_of_gl(3, 2, 11, 1 << 20).unwrap();
        let b = generators_of_gl(3, 2, 11, 1 << 20).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn elementary_fallback_generates() {
        let id = ModMatrix::identity(3, 2);
        assert_eq!(dimino_closure(id, &elementary_generators(2, 3), 1000).unwrap().len(), 168);
    }
}
