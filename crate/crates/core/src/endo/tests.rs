use super::*;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::group::{enumerate_elements, multiply_by_pk, Block};
use crate::oracle::random::{random_endo, random_unit};

fn spec(p: u64, blocks: &[(u32, usize)]) -> Arc<PGroupSpec> {
    Arc::new(PGroupSpec::new(p, blocks).unwrap())
}

/// Identity with the listed cells overwritten.
fn with_cells(s: &Arc<PGroupSpec>, cells: &[(usize, usize, &[&[u64]])]) -> BlockEndo {
    let mut e = BlockEndo::identity(s);
    for &(j, k, rows) in cells {
        let rows: Vec<Vec<u64>> = rows.iter().map(|r| r.to_vec()).collect();
        e.set_cell(j, k, &ModMatrix::from_rows(&rows, s.modulus(j))).unwrap();
    }
    e
}

fn z2z4() -> Arc<PGroupSpec> {
    spec(2, &[(1, 1), (2, 1)])
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const SMALL_SPECS: &[(u64, &[(u32, usize)])] = &[
    (2, &[(1, 1), (2, 1)]),
    (2, &[(1, 2), (3, 1)]),
    (3, &[(1, 1), (2, 2)]),
    (3, &[(2, 1), (4, 1)]),
    (5, &[(2, 2)]),
    (2, &[(1, 1), (2, 1), (4, 1)]),
    (7, &[(1, 1), (2, 1)]),
];

#[test]
fn hom_constraint_on_cross_cell() {
    let s = z2z4();
    let mut e = BlockEndo::identity(&s);
    *e.entry_mut(1, 0) = 1;
    assert!(!e.check_hom_constraints());
    assert_eq!(e.is_automorphism(), Err(Error::ConstraintViolation { target: 1, src: 0 }));
    *e.entry_mut(1, 0) = 2;
    assert!(e.check_hom_constraints());
    assert!(BlockEndo::zero(&s).check_hom_constraints());
}

#[test]
fn ring_basics() {
    let s = spec(5, &[(2, 1)]);
    let a = with_cells(&s, &[(0, 0, &[&[7]])]);
    let b = with_cells(&s, &[(0, 0, &[&[18]])]);
    assert!(a.add(&b).unwrap().data().iter().all(|&x| x == 0));
    let id = BlockEndo::identity(&s);
    assert_eq!(id.add(&id.neg()).unwrap(), BlockEndo::zero(&s));
    assert_eq!(a.add(&BlockEndo::zero(&s)).unwrap(), a);
    assert_eq!(a.compose(&BlockEndo::identity(&spec(5, &[(3, 1)]))), Err(Error::SpecMismatch));
}

#[test]
fn composition_of_cross_maps() {
    let s = z2z4();
    let a = with_cells(&s, &[(1, 0, &[&[2]])]);
    let b = with_cells(&s, &[(0, 1, &[&[1]])]);
    let ab = a.compose(&b).unwrap();
    assert_eq!(ab.cell(1, 1).to_rows(), vec![vec![3]]);
    assert_eq!(BlockEndo::identity(&s).compose(&a).unwrap(), a);
    assert_eq!(a.compose(&BlockEndo::zero(&s)).unwrap(), BlockEndo::zero(&s));

    // Read the matrix of a∘b off its action on G.
    for v in enumerate_elements(&s, 1 << 10).unwrap() {
        assert_eq!(ab.apply(&v).unwrap(), a.apply(&b.apply(&v).unwrap()).unwrap());
    }
}

#[test]
fn action_on_elements() {
    let s = z2z4();
    let a = with_cells(&s, &[(1, 0, &[&[2]])]);
    let v = GroupElement::new(&s, &[vec![1], vec![1]]).unwrap();
    assert_eq!(a.apply(&v).unwrap().blocks(&s), vec![vec![1], vec![3]]);
    assert_eq!(BlockEndo::identity(&s).apply(&v).unwrap(), v);
    assert!(BlockEndo::zero(&s).apply(&v).unwrap().is_zero());
}

#[test]
fn reduction_mod_p() {
    let s = spec(5, &[(2, 2)]);
    let e = with_cells(&s, &[(0, 0, &[&[6, 5], &[0, 1]])]);
    assert!(e.sigma().is_identity());
    assert!(e.in_delta());
    assert!(BlockEndo::identity(&s).sigma().is_identity());
    let t = with_cells(&s, &[(0, 0, &[&[1, 1], &[0, 1]])]);
    assert!(!t.in_delta());
}

#[test]
fn unit_criterion_examples() {
    let s = z2z4();
    assert!(BlockEndo::identity(&s).is_automorphism().unwrap());
    assert!(!BlockEndo::zero(&s).is_automorphism().unwrap());
    let a = with_cells(&s, &[(1, 0, &[&[2]]), (0, 1, &[&[1]])]);
    assert!(a.is_automorphism().unwrap());
    assert!(crate::oracle::brute_force_is_bijective(&a, 1 << 10).unwrap());
}

#[test]
fn weighted_lift_entries() {
    let s = z2z4();
    assert!(BlockEndo::identity(&s).weighted_lift().unwrap().is_identity());
    let a = with_cells(&s, &[(0, 1, &[&[1]])]);
    assert_eq!(a.weighted_lift().unwrap().get(0, 1), 2);
    let b = with_cells(&s, &[(1, 0, &[&[2]])]);
    assert_eq!(b.weighted_lift().unwrap().get(1, 0), 1);
}

/// `L(ab) ≡ L(a)L(b)` in column `c` modulo `p^{n_c}`, and mod `p` the lift is
/// block lower-triangular with diagonal `σ`.
#[test]
fn weighted_lift_is_multiplicative_by_column() {
    let mut g = rng(11);
    for &(p, blocks) in SMALL_SPECS {
        let s = spec(p, blocks);
        let moduli = s.coord_moduli().to_vec();
        let d = s.dim();
        for _ in 0..300 {
            let (a, b) = (random_endo(&s, &mut g), random_endo(&s, &mut g));
            let lhs = a.compose(&b).unwrap().weighted_lift().unwrap();
            let rhs = a.weighted_lift().unwrap().mul(&b.weighted_lift().unwrap());
            for i in 0..d {
                for c in 0..d {
                    assert_eq!(lhs.get(i, c) % moduli[c], rhs.get(i, c) % moduli[c], "{s:?} entry ({i},{c})");
                }
            }
            let l = a.weighted_lift().unwrap().reduce(p);
            for i in 0..d {
                for c in 0..d {
                    let (bi, bc) = (s.block_of(i), s.block_of(c));
                    if bc > bi {
                        assert_eq!(l.get(i, c), 0);
                    } else if bc == bi {
                        assert_eq!(l.get(i, c), a.entry(i, c) % p);
                    }
                }
            }
        }
    }
}

#[test]
fn weighted_lift_is_injective() {
    let s = spec(2, &[(1, 1), (2, 1)]);
    let all: Vec<_> = crate::oracle::enumerate_endos(&s, 1 << 10).unwrap().collect();
    let lifts: std::collections::HashSet<_> = all.iter().map(|e| e.weighted_lift().unwrap()).collect();
    assert_eq!(lifts.len(), all.len());
}

#[test]
fn inversion() {
    let s = spec(5, &[(2, 1)]);
    let seven = with_cells(&s, &[(0, 0, &[&[7]])]);
    assert_eq!(seven.invert().unwrap().cell(0, 0).to_rows(), vec![vec![18]]);
    assert_eq!(BlockEndo::identity(&s).invert().unwrap(), BlockEndo::identity(&s));
    assert_eq!(BlockEndo::zero(&s).invert(), Err(Error::NotAUnit));

    let mut g = rng(3);
    for &(p, blocks) in SMALL_SPECS {
        let s = spec(p, blocks);
        for _ in 0..200 {
            let e = random_unit(&s, &mut g);
            let inv = e.invert().unwrap();
            assert!(e.compose(&inv).unwrap().is_identity());
            assert!(inv.compose(&e).unwrap().is_identity());
        }
    }
}

#[test]
fn orders() {
    let s = spec(5, &[(2, 1)]);
    assert_eq!(BlockEndo::identity(&s).element_order_u64().unwrap(), 1);
    assert_eq!(with_cells(&s, &[(0, 0, &[&[7]])]).element_order_u64().unwrap(), 4);
    let s = spec(5, &[(1, 2)]);
    assert_eq!(with_cells(&s, &[(0, 0, &[&[1, 1], &[0, 1]])]).element_order_u64().unwrap(), 5);
    assert_eq!(BlockEndo::zero(&s).element_order(), Err(Error::NotAUnit));

    let mut g = rng(5);
    for &(p, blocks) in SMALL_SPECS {
        let s = spec(p, blocks);
        let aut = crate::group::aut_order(&s);
        for _ in 0..50 {
            let e = random_unit(&s, &mut g);
            let n = e.element_order().unwrap();
            assert!(e.pow(&n).is_identity());
            assert_eq!(&aut % &n, BigUint::from(0u32));
            let naive = (1u64..).find(|&k| e.pow_u64(k).is_identity()).unwrap();
            assert_eq!(n, BigUint::from(naive));
        }
    }
}

/// Moving an entry of `b` to another representative mod `p^{n_l}` of its row
/// leaves `a∘b` unchanged.
#[test]
fn composition_ignores_representatives() {
    let mut g = rng(7);
    for &(p, blocks) in SMALL_SPECS {
        let s = spec(p, blocks);
        let d = s.dim();
        let moduli = s.coord_moduli().to_vec();
        for _ in 0..1500 {
            let (a, b) = (random_endo(&s, &mut g), random_endo(&s, &mut g));
            let shifted: Vec<u64> =
                b.data().iter().enumerate().map(|(idx, &x)| x + moduli[idx / d] * g.gen_range(0..50)).collect();
            let b2 = BlockEndo::with_spec(Arc::clone(&s), shifted);
            assert_eq!(a.compose_unchecked(&b2), a.compose(&b).unwrap());
        }
    }
}

#[test]
fn associativity_and_sigma_homomorphism() {
    let mut g = rng(9);
    for &(p, blocks) in SMALL_SPECS {
        let s = spec(p, blocks);
        let id = BlockEndo::identity(&s);
        for _ in 0..1500 {
            let (a, b, c) = (random_endo(&s, &mut g), random_endo(&s, &mut g), random_endo(&s, &mut g));
            let ab = a.compose(&b).unwrap();
            assert_eq!(ab.compose(&c).unwrap(), a.compose(&b.compose(&c).unwrap()).unwrap());
            assert_eq!(id.compose(&a).unwrap(), a);
            assert_eq!(a.compose(&id).unwrap(), a);
            assert_eq!(ab.sigma(), a.sigma().mul(&b.sigma()));
            assert!(ab.check_hom_constraints());
        }
    }
}

#[test]
fn sigma_hits_all_of_pi_on_small_groups() {
    for (p, blocks) in [(2, &[(1, 1), (2, 1)][..]), (3, &[(1, 2)][..]), (2, &[(1, 2), (2, 1)][..])] {
        let s = spec(p, blocks);
        let images: std::collections::HashSet<QElement> = crate::oracle::enumerate_endos(&s, 1 << 20)
            .unwrap()
            .filter(|e| e.is_automorphism().unwrap())
            .map(|e| e.sigma())
            .collect();
        assert_eq!(BigUint::from(images.len()), crate::group::pi_order(&s));
    }
}

#[test]
fn delta_membership_count() {
    for (p, blocks) in [(2, &[(1, 1), (2, 1)][..]), (3, &[(1, 1), (2, 1)][..]), (2, &[(2, 2)][..])] {
        let s = spec(p, blocks);
        let n = crate::oracle::enumerate_endos(&s, 1 << 20).unwrap().filter(BlockEndo::in_delta).count();
        assert_eq!(BigUint::from(n), crate::group::delta_order(&s));
    }
}

#[test]
fn restriction_to_pk() {
    let s = spec(3, &[(1, 1), (3, 1)]);
    let r = restrict_to_pk(&BlockEndo::identity(&s), 1).unwrap();
    assert!(r.is_identity());
    assert_eq!(r.spec().blocks(), &[Block { n: 2, r: 1 }]);
    assert_eq!(restrict_to_pk(&BlockEndo::identity(&s), 3), Err(Error::TrivialResult { k: 3 }));
    assert_eq!(restrict_to_pk(&BlockEndo::zero(&s), 1), Err(Error::NotAUnit));

    let mut g = rng(13);
    for &(p, blocks) in SMALL_SPECS {
        let s = spec(p, blocks);
        let top = s.blocks().last().unwrap().n;
        let elements: Vec<_> = enumerate_elements(&s, 1 << 12).unwrap().collect();
        for k in 1..top {
            for _ in 0..20 {
                let (a, b) = (random_unit(&s, &mut g), random_unit(&s, &mut g));
                let ra = restrict_to_pk(&a, k).unwrap();
                assert!(ra.is_automorphism().unwrap());
                for v in &elements {
                    let left = multiply_by_pk(&s, k, &a.apply(v).unwrap()).unwrap();
                    let right = ra.apply(&multiply_by_pk(&s, k, v).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
                let rab = restrict_to_pk(&a.compose(&b).unwrap(), k).unwrap();
                assert_eq!(rab, ra.compose(&restrict_to_pk(&b, k).unwrap()).unwrap());
            }
        }
    }
}

#[test]
fn tail_truncation_counterexample() {
    let s = z2z4();
    let a = with_cells(&s, &[(1, 0, &[&[2]])]);
    let b = with_cells(&s, &[(0, 1, &[&[1]])]);
    let lhs = truncate_tail(&a.compose(&b).unwrap()).unwrap();
    let rhs = truncate_tail(&a).unwrap().compose(&truncate_tail(&b).unwrap()).unwrap();
    assert_eq!(lhs.cell(0, 0).to_rows(), vec![vec![3]]);
    assert_eq!(rhs.cell(0, 0).to_rows(), vec![vec![1]]);
    assert_eq!(lhs.sigma(), rhs.sigma());
    assert_eq!(truncate_tail(&BlockEndo::identity(&spec(2, &[(1, 1)]))), Err(Error::SingleBlock));
}

#[test]
fn tail_embedding() {
    let mut g = rng(17);
    for (p, blocks) in [(2, &[(1, 1), (2, 1)][..]), (3, &[(1, 2), (2, 1), (4, 1)][..]), (5, &[(1, 1), (3, 2)][..])] {
        let s = spec(p, blocks);
        let tail = Arc::new(crate::group::derive_tail_spec(&s).unwrap());
        assert!(embed_tail(&s, &BlockEndo::identity(&tail)).unwrap().is_identity());
        for _ in 0..500 {
            let (x, y) = (random_unit(&tail, &mut g), random_unit(&tail, &mut g));
            let ex = embed_tail(&s, &x).unwrap();
            assert_eq!(truncate_tail(&ex).unwrap(), x);
            assert!(ex.is_automorphism().unwrap());
            assert_eq!(ex.compose(&embed_tail(&s, &y).unwrap()).unwrap(), embed_tail(&s, &x.compose(&y).unwrap()).unwrap());

            let (a, b) = (random_unit(&s, &mut g), random_unit(&s, &mut g));
            let t = truncate_tail(&a.compose(&b).unwrap()).unwrap();
            let tt = truncate_tail(&a).unwrap().compose(&truncate_tail(&b).unwrap()).unwrap();
            assert_eq!(t.sigma(), tt.sigma());
            assert_eq!(truncate_tail(&a).unwrap().sigma().mats(), &a.sigma().mats()[1..]);
        }
    }
    let s = z2z4();
    assert_eq!(embed_tail(&s, &BlockEndo::identity(&s)), Err(Error::SpecMismatch));
}

#[test]
fn corner_cell() {
    let mut g = rng(19);
    for (p, blocks) in [(3, &[(2, 1), (4, 1)][..]), (5, &[(2, 2), (4, 1)][..])] {
        let s = spec(p, blocks);
        assert!(corner_mu(&BlockEndo::identity(&s)).unwrap().is_identity());
        for _ in 0..1000 {
            let (a, b) = (random_unit(&s, &mut g), random_unit(&s, &mut g));
            let lhs = corner_mu(&a.compose(&b).unwrap()).unwrap();
            assert_eq!(lhs, corner_mu(&a).unwrap().mul(&corner_mu(&b).unwrap()));
        }
    }
    let s = spec(2, &[(2, 1), (3, 1)]);
    assert!(matches!(corner_mu(&BlockEndo::identity(&s)), Err(Error::PreconditionGap { .. })));
    assert_eq!(corner_mu(&BlockEndo::identity(&spec(3, &[(2, 2)]))), Err(Error::SingleBlock));
}

/// Just outside the gap condition the corner map stops being multiplicative.
#[test]
fn corner_cell_fails_with_small_gap() {
    let s = spec(2, &[(2, 1), (3, 1)]);
    let a = with_cells(&s, &[(0, 1, &[&[1]])]);
    let b = with_cells(&s, &[(1, 0, &[&[2]])]);
    let corner = |e: &BlockEndo| match corner_mu(e) {
        Err(Error::PreconditionGap { corner }) => corner,
        other => panic!("expected PreconditionGap, got {other:?}"),
    };
    assert_ne!(corner(&a.compose(&b).unwrap()), corner(&a).mul(&corner(&b)));
}

#[test]
fn json_round_trip() {
    let mut g = rng(23);
    for &(p, blocks) in SMALL_SPECS {
        let s = spec(p, blocks);
        let e = random_endo(&s, &mut g);
        let text = serde_json::to_string(&EndoJson::from(&e)).unwrap();
        let back: EndoJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_endo(&s).unwrap(), e);
        let q = e.sigma();
        assert_eq!(QElementJson::from(&q).into_qelement(&s).unwrap(), q);
    }
}

fn spec_strategy() -> impl Strategy<Value = Arc<PGroupSpec>> {
    prop::sample::select(SMALL_SPECS.to_vec()).prop_map(|(p, b)| spec(p, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_action_is_compatible_with_composition(s in spec_strategy(), seed in any::<u64>()) {
        let mut g = rng(seed);
        let (a, b) = (random_endo(&s, &mut g), random_endo(&s, &mut g));
        let ab = a.compose(&b).unwrap();
        for v in enumerate_elements(&s, 1 << 12).unwrap() {
            prop_assert_eq!(ab.apply(&v).unwrap(), a.apply(&b.apply(&v).unwrap()).unwrap());
        }
    }

    #[test]
    fn prop_unit_iff_bijective(s in spec_strategy(), seed in any::<u64>()) {
        let mut g = rng(seed);
        let e = random_endo(&s, &mut g);
        prop_assert_eq!(e.is_automorphism().unwrap(), crate::oracle::brute_force_is_bijective(&e, 1 << 12).unwrap());
    }

    #[test]
    fn prop_inverse_is_two_sided(s in spec_strategy(), seed in any::<u64>()) {
        let mut g = rng(seed);
        let e = random_unit(&s, &mut g);
        let inv = e.invert().unwrap();
        prop_assert!(e.compose(&inv).unwrap().is_identity());
        prop_assert!(inv.compose(&e).unwrap().is_identity());
        prop_assert!(inv.sigma().mul(&e.sigma()).is_identity());
    }
}
