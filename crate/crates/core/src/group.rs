//! Finite abelian p-groups `G = ⊕ Z_{p^{n_i}}^{r_i}` given by their homocyclic
//! block decomposition, their elements, and closed-form order counts.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, is_prime};
use crate::error::{Error, Result};

/// Default cap on the number of group elements an enumeration may visit.
pub const DEFAULT_ELEMENT_BUDGET: u64 = 1 << 20;

/// A homocyclic block `Z_{p^n}^r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Block {
    pub n: u32,
    pub r: usize,
}

/// Unvalidated spec, exactly as it appears in JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSpec {
    pub p: u64,
    pub blocks: Vec<Block>,
}

/// A validated group: `p` prime, exponents strictly increasing, ranks positive.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct PGroupSpec {
    p: u64,
    blocks: Vec<Block>,
    moduli: Vec<u64>,
    offsets: Vec<usize>,
    coord_moduli: Vec<u64>,
    dim: usize,
}

impl TryFrom<RawSpec> for PGroupSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        validate_spec(raw)
    }
}

impl From<PGroupSpec> for RawSpec {
    fn from(s: PGroupSpec) -> Self {
        RawSpec { p: s.p, blocks: s.blocks }
    }
}

pub fn validate_spec(raw: RawSpec) -> Result<PGroupSpec> {
    if !is_prime(raw.p) {
        return Err(Error::NonPrime(raw.p));
    }
    if raw.blocks.is_empty() {
        return Err(Error::EmptyBlocks);
    }
    for (i, b) in raw.blocks.iter().enumerate() {
        if b.n == 0 {
            return Err(Error::ZeroExponent(i));
        }
        if b.r == 0 {
            return Err(Error::ZeroRank(i));
        }
        if i > 0 && b.n <= raw.blocks[i - 1].n {
            return Err(Error::NonIncreasingExponents { index: i, n: b.n });
        }
    }
    let mut moduli = Vec::with_capacity(raw.blocks.len());
    for b in &raw.blocks {
        match raw.p.checked_pow(b.n) {
            Some(m) if m <= 1 << 32 => moduli.push(m),
            _ => return Err(Error::ModulusTooLarge { p: raw.p, n: b.n }),
        }
    }
    let mut offsets = Vec::with_capacity(raw.blocks.len() + 1);
    let mut acc = 0;
    for b in &raw.blocks {
        offsets.push(acc);
        acc += b.r;
    }
    offsets.push(acc);
    let coord_moduli = raw
        .blocks
        .iter()
        .zip(&moduli)
        .flat_map(|(b, &m)| std::iter::repeat(m).take(b.r))
        .collect();
    Ok(PGroupSpec { p: raw.p, blocks: raw.blocks, moduli, offsets, coord_moduli, dim: acc })
}

impl PGroupSpec {
    /// Convenience constructor from `(n, r)` pairs.
    pub fn new(p: u64, blocks: &[(u32, usize)]) -> Result<Self> {
        validate_spec(RawSpec {
            p,
            blocks: blocks.iter().map(|&(n, r)| Block { n, r }).collect(),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Total rank `Σ r_i`: the side length of the flattened matrix of an endomorphism.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `p^{n_i}`.
    pub fn modulus(&self, block: usize) -> u64 {
        self.moduli[block]
    }

    /// Exponent of the group, `p^{n_R}`.
    pub fn exponent_modulus(&self) -> u64 {
        *self.moduli.last().expect("nonempty")
    }

    /// First flattened coordinate of `block`.
    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    /// Block index owning flattened coordinate `coord`.
    pub fn block_of(&self, coord: usize) -> usize {
        self.offsets.partition_point(|&o| o <= coord) - 1
    }

    /// Modulus of every flattened coordinate, in order.
    pub fn coord_moduli(&self) -> &[u64] {
        &self.coord_moduli
    }

    /// Every consecutive exponent gap exceeds 1 (vacuous for a single block).
    pub fn gaps_exceed_one(&self) -> bool {
        self.blocks.windows(2).all(|w| w[1].n - w[0].n > 1)
    }

    pub fn to_raw(&self) -> RawSpec {
        RawSpec { p: self.p, blocks: self.blocks.clone() }
    }

    /// Compact textual key such as `p3_2x2_4x2`.
    pub fn key(&self) -> String {
        let mut s = format!("p{}", self.p);
        for b in &self.blocks {
            s.push_str(&format!("_{}x{}", b.n, b.r));
        }
        s
    }
}

impl fmt::Debug for PGroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={},[", self.p)?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({},{})", b.n, b.r)?;
        }
        write!(f, "])")
    }
}

impl fmt::Display for PGroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// An element of `G`, stored as one flat coordinate vector; coordinate `c`
/// lives in block `block_of(c)` and is always reduced mod that block's modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    coords: Vec<u64>,
}

impl GroupElement {
    /// Builds from per-block vectors, reducing entries canonically.
    pub fn new(spec: &PGroupSpec, blocks: &[Vec<u64>]) -> Result<Self> {
        if blocks.len() != spec.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} blocks, got {}",
                spec.num_blocks(),
                blocks.len()
            )));
        }
        let mut coords = Vec::with_capacity(spec.dim());
        for (i, v) in blocks.iter().enumerate() {
            if v.len() != spec.blocks()[i].r {
                return Err(Error::ShapeMismatch(format!(
                    "block {i} has length {}, rank is {}",
                    v.len(),
                    spec.blocks()[i].r
                )));
            }
            coords.extend(v.iter().map(|&x| x % spec.modulus(i)));
        }
        Ok(GroupElement { coords })
    }

    pub fn zero(spec: &PGroupSpec) -> Self {
        GroupElement { coords: vec![0; spec.dim()] }
    }

    /// Flat coordinates, already canonical with respect to `spec`.
    pub(crate) fn from_flat(coords: Vec<u64>) -> Self {
        GroupElement { coords }
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn block(&self, spec: &PGroupSpec, i: usize) -> &[u64] {
        &self.coords[spec.offset(i)..spec.offset(i + 1)]
    }

    pub fn blocks(&self, spec: &PGroupSpec) -> Vec<Vec<u64>> {
        (0..spec.num_blocks()).map(|i| self.block(spec, i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&x| x == 0)
    }

    fn conforms(&self, spec: &PGroupSpec) -> bool {
        self.coords.len() == spec.dim()
            && self.coords.iter().zip(spec.coord_moduli()).all(|(&x, &m)| x < m)
    }

    /// Position in the enumeration order of [`enumerate_elements`].
    pub fn index(&self, spec: &PGroupSpec) -> u64 {
        let moduli = spec.coord_moduli();
        self.coords.iter().zip(moduli).fold(0u64, |acc, (&x, &m)| acc * m + x)
    }
}

pub fn add_elements(spec: &PGroupSpec, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
    if !a.conforms(spec) || !b.conforms(spec) {
        return Err(Error::ShapeMismatch("element does not conform to the group".into()));
    }
    let coords = a
        .coords
        .iter()
        .zip(&b.coords)
        .enumerate()
        .map(|(c, (&x, &y))| (x + y) % spec.coord_moduli()[c])
        .collect();
    Ok(GroupElement { coords })
}

/// `x ↦ p^k x` viewed as a map `G → p^kG`, written in the coordinates of
/// [`derive_pk_spec`]: `p^k x_i` corresponds to `x_i mod p^{n_i - k}` for the
/// surviving blocks.
pub fn multiply_by_pk(spec: &PGroupSpec, k: u32, v: &GroupElement) -> Result<GroupElement> {
    let target = derive_pk_spec(spec, k)?;
    let mut coords = Vec::with_capacity(target.dim());
    for (i, b) in spec.blocks().iter().enumerate() {
        if b.n > k {
            let m = spec.p().pow(b.n - k);
            coords.extend(v.block(spec, i).iter().map(|&x| x % m));
        }
    }
    Ok(GroupElement { coords })
}

pub fn group_order(spec: &PGroupSpec) -> BigUint {
    let e: u64 = spec.blocks().iter().map(|b| u64::from(b.n) * b.r as u64).sum();
    BigUint::from(spec.p()).pow(e as u32)
}

/// `|GL_r(F_p)| = Π_{k<r} (p^r - p^k)`.
pub fn gl_order(p: u64, r: usize) -> BigUint {
    let pr = BigUint::from(p).pow(r as u32);
    (0..r)
        .map(|k| &pr - BigUint::from(p).pow(k as u32))
        .fold(BigUint::one(), |acc, x| acc * x)
}

/// `log_p |Δ(G)|`: diagonal cells range over multiples of `p`, cell `(j,k)`
/// over `p^{min(n_j,n_k)}` values.
pub fn delta_exponent(spec: &PGroupSpec) -> u64 {
    let bs = spec.blocks();
    let mut e = 0u64;
    for (j, bj) in bs.iter().enumerate() {
        for (k, bk) in bs.iter().enumerate() {
            let cells = (bj.r * bk.r) as u64;
            e += cells * u64::from(if j == k { bj.n - 1 } else { bj.n.min(bk.n) });
        }
    }
    e
}

pub fn delta_order(spec: &PGroupSpec) -> BigUint {
    BigUint::from(spec.p()).pow(delta_exponent(spec) as u32)
}

/// `|Π(G)| = Π_i |GL_{r_i}(F_p)|`.
pub fn pi_order(spec: &PGroupSpec) -> BigUint {
    spec.blocks().iter().map(|b| gl_order(spec.p(), b.r)).fold(BigUint::one(), |a, x| a * x)
}

pub fn aut_order(spec: &PGroupSpec) -> BigUint {
    delta_order(spec) * pi_order(spec)
}

/// Prime factorization of `|Aut(G)|`, ascending. The non-`p` part comes from the
/// factors `p^m - 1` of the `GL` orders, which must fit in a `u64`.
pub fn aut_order_factorization(spec: &PGroupSpec) -> Result<Vec<(u64, u32)>> {
    let p = spec.p();
    let mut exps = std::collections::BTreeMap::new();
    let mut p_exp = delta_exponent(spec);
    for b in spec.blocks() {
        p_exp += (b.r * (b.r - 1) / 2) as u64;
        for m in 1..=b.r {
            let pm = p.checked_pow(m as u32).ok_or_else(|| {
                Error::PreconditionViolation(format!("{p}^{m} - 1 too large to factor"))
            })?;
            for (q, e) in factorize(pm - 1) {
                *exps.entry(q).or_insert(0u32) += e;
            }
        }
    }
    if p_exp > 0 {
        *exps.entry(p).or_insert(0) += p_exp as u32;
    }
    Ok(exps.into_iter().collect())
}

/// `log_p |End(G)|`.
pub fn endo_exponent(spec: &PGroupSpec) -> u64 {
    let bs = spec.blocks();
    bs.iter()
        .flat_map(|bj| bs.iter().map(move |bk| (bj.r * bk.r) as u64 * u64::from(bj.n.min(bk.n))))
        .sum()
}

/// Spec of `p^k G`: blocks with `n_i > k` survive with exponent `n_i - k`.
pub fn derive_pk_spec(spec: &PGroupSpec, k: u32) -> Result<PGroupSpec> {
    let top = spec.blocks().last().expect("nonempty").n;
    if k >= top {
        return Err(Error::TrivialResult { k });
    }
    let blocks: Vec<Block> = spec
        .blocks()
        .iter()
        .filter(|b| b.n > k)
        .map(|b| Block { n: b.n - k, r: b.r })
        .collect();
    validate_spec(RawSpec { p: spec.p(), blocks })
}

/// Spec with the first block removed.
pub fn derive_tail_spec(spec: &PGroupSpec) -> Result<PGroupSpec> {
    if spec.num_blocks() < 2 {
        return Err(Error::SingleBlock);
    }
    validate_spec(RawSpec { p: spec.p(), blocks: spec.blocks()[1..].to_vec() })
}

/// Odometer over all elements, last coordinate fastest.
pub struct ElementIter {
    moduli: Vec<u64>,
    next: Option<Vec<u64>>,
}

impl Iterator for ElementIter {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.moduli[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(GroupElement { coords: current })
    }
}

pub fn enumerate_elements(spec: &PGroupSpec, budget: u64) -> Result<ElementIter> {
    let order = group_order(spec);
    if order > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { what: "group elements", needed: order.to_string(), budget });
    }
    Ok(ElementIter { moduli: spec.coord_moduli().to_vec(), next: Some(vec![0; spec.dim()]) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elem(spec: &PGroupSpec, blocks: &[&[u64]]) -> GroupElement {
        GroupElement::new(spec, &blocks.iter().map(|b| b.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn validation_errors() {
        assert!(PGroupSpec::new(5, &[(2, 2)]).is_ok());
        assert_eq!(PGroupSpec::new(4, &[(1, 1)]), Err(Error::NonPrime(4)));
        assert_eq!(
            PGroupSpec::new(3, &[(2, 1), (2, 1)]),
            Err(Error::NonIncreasingExponents { index: 1, n: 2 })
        );
        assert_eq!(PGroupSpec::new(3, &[(2, 0)]), Err(Error::ZeroRank(0)));
        assert_eq!(PGroupSpec::new(3, &[]), Err(Error::EmptyBlocks));
    }

    #[test]
    fn json_parser_rejects_unsorted_blocks() {
        let ok: PGroupSpec = serde_json::from_str(r#"{"p":2,"blocks":[{"n":1,"r":1},{"n":2,"r":1}]}"#).unwrap();
        assert_eq!(ok, PGroupSpec::new(2, &[(1, 1), (2, 1)]).unwrap());
        let bad = serde_json::from_str::<PGroupSpec>(r#"{"p":2,"blocks":[{"n":2,"r":1},{"n":1,"r":1}]}"#);
        assert!(bad.unwrap_err().to_string().contains("NonIncreasingExponents"));
        assert_eq!(serde_json::to_string(&ok).unwrap(), r#"{"p":2,"blocks":[{"n":1,"r":1},{"n":2,"r":1}]}"#);
    }

    #[test]
    fn addition() {
        let s = PGroupSpec::new(2, &[(1, 1), (2, 1)]).unwrap();
        let sum = add_elements(&s, &elem(&s, &[&[1], &[3]]), &elem(&s, &[&[1], &[2]])).unwrap();
        assert_eq!(sum, elem(&s, &[&[0], &[1]]));
        let a = elem(&s, &[&[1], &[2]]);
        assert_eq!(add_elements(&s, &a, &GroupElement::zero(&s)).unwrap(), a);

        let t = PGroupSpec::new(5, &[(2, 2)]).unwrap();
        let z = add_elements(&t, &elem(&t, &[&[24, 1]]), &elem(&t, &[&[1, 24]])).unwrap();
        assert!(z.is_zero());
        let u = PGroupSpec::new(2, &[(1, 3)]).unwrap();
        assert!(add_elements(&t, &z, &GroupElement::zero(&u)).is_err());
    }

    #[test]
    fn orders() {
        let s = PGroupSpec::new(2, &[(1, 1), (2, 1)]).unwrap();
        assert_eq!(group_order(&s), 8u32.into());
        assert_eq!(group_order(&PGroupSpec::new(5, &[(2, 2)]).unwrap()), 625u32.into());
        assert_eq!(group_order(&PGroupSpec::new(3, &[(1, 3)]).unwrap()), 27u32.into());
        assert_eq!(gl_order(7, 1), 6u32.into());
        assert_eq!(gl_order(3, 2), 48u32.into());
        assert_eq!(gl_order(2, 3), 168u32.into());
        assert_eq!(delta_order(&PGroupSpec::new(5, &[(2, 2)]).unwrap()), 625u32.into());
        assert_eq!(delta_order(&s), 8u32.into());
        assert_eq!(delta_order(&PGroupSpec::new(7, &[(1, 4)]).unwrap()), 1u32.into());
        assert_eq!(aut_order(&s), 8u32.into());
        assert_eq!(aut_order(&PGroupSpec::new(5, &[(2, 2)]).unwrap()), 300_000u32.into());
        assert_eq!(aut_order(&PGroupSpec::new(3, &[(1, 1)]).unwrap()), 2u32.into());
    }

    #[test]
    fn derived_specs() {
        let s = PGroupSpec::new(3, &[(1, 2), (3, 1)]).unwrap();
        assert_eq!(derive_pk_spec(&s, 1).unwrap(), PGroupSpec::new(3, &[(2, 1)]).unwrap());
        let s = PGroupSpec::new(5, &[(2, 2), (5, 1)]).unwrap();
        assert_eq!(derive_pk_spec(&s, 3).unwrap(), PGroupSpec::new(5, &[(2, 1)]).unwrap());
        let s = PGroupSpec::new(2, &[(2, 3)]).unwrap();
        assert_eq!(derive_pk_spec(&s, 1).unwrap(), PGroupSpec::new(2, &[(1, 3)]).unwrap());
        assert_eq!(derive_pk_spec(&s, 2), Err(Error::TrivialResult { k: 2 }));

        let s = PGroupSpec::new(2, &[(1, 4), (3, 2)]).unwrap();
        assert_eq!(derive_tail_spec(&s).unwrap(), PGroupSpec::new(2, &[(3, 2)]).unwrap());
        let s = PGroupSpec::new(3, &[(1, 1), (2, 1), (4, 1)]).unwrap();
        assert_eq!(derive_tail_spec(&s).unwrap(), PGroupSpec::new(3, &[(2, 1), (4, 1)]).unwrap());
        assert_eq!(derive_tail_spec(&PGroupSpec::new(5, &[(2, 2)]).unwrap()), Err(Error::SingleBlock));
    }

    #[test]
    fn enumeration() {
        for (p, blocks, n) in [(2, vec![(1, 1)], 2usize), (2, vec![(1, 1), (2, 1)], 8), (5, vec![(2, 2)], 625)] {
            let s = PGroupSpec::new(p, &blocks).unwrap();
            let all: Vec<_> = enumerate_elements(&s, DEFAULT_ELEMENT_BUDGET).unwrap().collect();
            assert_eq!(all.len(), n);
            let mut sorted = all.clone();
            sorted.dedup();
            assert_eq!(sorted.len(), n);
            for (i, e) in all.iter().enumerate() {
                assert_eq!(e.index(&s), i as u64);
            }
        }
        let big = PGroupSpec::new(2, &[(1, 21)]).unwrap();
        assert!(matches!(enumerate_elements(&big, DEFAULT_ELEMENT_BUDGET), Err(Error::BudgetExceeded { .. })));
    }
}
