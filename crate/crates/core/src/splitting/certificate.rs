//! Section certificates: images of a generating set of `Π(G)` under a
//! splitting section, and their machine verification.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::endo::{BlockEndo, EndoJson, QElement, QElementJson};
use crate::error::{Error, Result};
use crate::group::{pi_order, PGroupSpec};
use crate::oracle::{dimino_closure_with, ClosureAbort};

/// Largest `|Π(G)|` for which the full multiplication table is checked.
pub const FULL_TABLE_LIMIT: u64 = 10_000;
/// Largest `|Π(G)|` for which [`VerifyMode::Auto`] picks the full table.
pub const AUTO_FULL_TABLE_LIMIT: u64 = 2_304;
/// Largest `|Π(G)|` for which the generated subgroup is closed explicitly.
pub const RELATIONS_LIMIT: u64 = 1 << 18;
pub const DEFAULT_SAMPLED_PAIRS: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyMode {
    /// Extend `θ` to all of `Π(G)` along words and check every product.
    FullTable,
    /// Close the images and check the closure maps injectively onto `Π(G)`.
    GeneratorRelations,
    /// Random pairs of words: consistency of `θ` and the order relations.
    Sampled,
    /// Full table when small, relations when moderate, sampling otherwise.
    Auto,
}

impl VerifyMode {
    pub fn resolve(self, pi: u64) -> VerifyMode {
        match self {
            VerifyMode::Auto if pi <= AUTO_FULL_TABLE_LIMIT => VerifyMode::FullTable,
            VerifyMode::Auto if pi <= RELATIONS_LIMIT => VerifyMode::GeneratorRelations,
            VerifyMode::Auto => VerifyMode::Sampled,
            m => m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub mode: VerifyMode,
    pub pairs: u64,
    #[serde(default)]
    pub failures: u64,
}

/// Images `θ(g)` of generators `g` of `Π(G)` under a candidate section.
#[derive(Clone, Debug)]
pub struct SectionCertificate {
    pub spec: Arc<PGroupSpec>,
    pub generators: Vec<QElement>,
    pub images: Vec<BlockEndo>,
    pub verification: Option<VerificationRecord>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub spec: PGroupSpec,
    pub generators: Vec<QElementJson>,
    pub images: Vec<EndoJson>,
    pub verification: Option<VerificationRecord>,
    #[serde(default)]
    pub seed: u64,
}

impl SectionCertificate {
    pub fn new(spec: Arc<PGroupSpec>, generators: Vec<QElement>, images: Vec<BlockEndo>, seed: u64) -> Result<Self> {
        if generators.len() != images.len() {
            return Err(Error::ShapeMismatch("one image per generator".into()));
        }
        if generators.iter().any(|g| !g.conforms(&spec)) || images.iter().any(|h| **h.spec() != *spec) {
            return Err(Error::SpecMismatch);
        }
        Ok(SectionCertificate { spec, generators, images, verification: None, seed })
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            spec: (*self.spec).clone(),
            generators: self.generators.iter().map(QElementJson::from).collect(),
            images: self.images.iter().map(EndoJson::from).collect(),
            verification: self.verification.clone(),
            seed: self.seed,
        }
    }

    pub fn from_json(json: &CertificateJson) -> Result<Self> {
        let spec = Arc::new(json.spec.clone());
        let generators = json.generators.iter().map(|g| g.into_qelement(&spec)).collect::<Result<Vec<_>>>()?;
        let images = json.images.iter().map(|h| h.into_endo(&spec)).collect::<Result<Vec<_>>>()?;
        let mut cert = SectionCertificate::new(spec, generators, images, json.seed)?;
        cert.verification = json.verification.clone();
        Ok(cert)
    }

    /// Verifies and records the outcome.
    pub fn verify(&mut self, mode: VerifyMode, seed: u64) -> Result<&VerificationRecord> {
        let record = verify_section(self, mode, seed)?;
        self.verification = Some(record);
        Ok(self.verification.as_ref().expect("just set"))
    }

    /// `θ` on all of `Π(G)`, extended along a breadth-first spanning tree of
    /// the Cayley graph. Errors if the generators do not generate `Π(G)`.
    pub fn extend_to_table(&self, cap: usize) -> Result<(Vec<QElement>, Vec<BlockEndo>, HashMap<QElement, usize>)> {
        let mut qs = vec![QElement::identity(&self.spec)];
        let mut thetas = vec![BlockEndo::identity(&self.spec)];
        let mut index = HashMap::from([(qs[0].clone(), 0usize)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (g, h) in self.generators.iter().zip(&self.images) {
                let q = qs[i].mul(g);
                if !index.contains_key(&q) {
                    if qs.len() >= cap {
                        return Err(Error::Overflow { cap });
                    }
                    index.insert(q.clone(), qs.len());
                    queue.push_back(qs.len());
                    thetas.push(thetas[i].compose_unchecked(h));
                    qs.push(q);
                }
            }
        }
        Ok((qs, thetas, index))
    }
}

fn fail(reason: impl Into<String>, pair: Option<(usize, usize)>) -> Error {
    Error::VerificationFailed { reason: reason.into(), pair }
}

/// Checks that the certificate's images extend to a homomorphic section of `σ`.
pub fn verify_section(cert: &SectionCertificate, mode: VerifyMode, seed: u64) -> Result<VerificationRecord> {
    let spec = &cert.spec;
    for (i, (g, h)) in cert.generators.iter().zip(&cert.images).enumerate() {
        if !g.is_invertible() {
            return Err(fail(format!("generator {i} is not invertible"), None));
        }
        if !h.is_automorphism()? {
            return Err(fail(format!("image {i} is not an automorphism"), None));
        }
        if h.sigma() != *g {
            return Err(fail(format!("sigma(image {i}) differs from generator {i}"), None));
        }
    }
    let pi_big = pi_order(spec);
    let pi = pi_big.to_u64().unwrap_or(u64::MAX);
    match mode.resolve(pi) {
        VerifyMode::FullTable => verify_full_table(cert, pi),
        VerifyMode::GeneratorRelations => verify_relations(cert, pi),
        VerifyMode::Sampled => verify_sampled(cert, DEFAULT_SAMPLED_PAIRS, seed),
        VerifyMode::Auto => unreachable!("resolved above"),
    }
}

fn verify_full_table(cert: &SectionCertificate, pi: u64) -> Result<VerificationRecord> {
    if pi > FULL_TABLE_LIMIT {
        return Err(Error::BudgetExceeded { what: "full-table Pi(G)", needed: pi.to_string(), budget: FULL_TABLE_LIMIT });
    }
    let (qs, thetas, index) = match cert.extend_to_table(pi as usize) {
        Ok(t) => t,
        Err(Error::Overflow { .. }) => return Err(fail("generators produce more than |Pi(G)| elements", None)),
        Err(e) => return Err(e),
    };
    if qs.len() as u64 != pi {
        return Err(fail(format!("generators span {} of {pi} elements of Pi(G)", qs.len()), None));
    }
    let n = qs.len();
    let counterexample = (0..n).into_par_iter().find_map_first(|a| {
        (0..n).find_map(|b| {
            let q = qs[a].mul(&qs[b]);
            let c = index[&q];
            (thetas[a].compose_unchecked(&thetas[b]) != thetas[c]).then_some((a, b))
        })
    });
    if let Some((a, b)) = counterexample {
        return Err(fail(format!("theta({:?})theta({:?}) != theta of the product", qs[a], qs[b]), Some((a, b))));
    }
    Ok(VerificationRecord { mode: VerifyMode::FullTable, pairs: (n * n) as u64, failures: 0 })
}

fn verify_relations(cert: &SectionCertificate, pi: u64) -> Result<VerificationRecord> {
    if pi > RELATIONS_LIMIT {
        return Err(Error::BudgetExceeded { what: "closure of images", needed: pi.to_string(), budget: RELATIONS_LIMIT });
    }
    let mut seen = HashSet::new();
    let closure = dimino_closure_with(BlockEndo::identity(&cert.spec), &cert.images, pi as usize, |h: &BlockEndo| {
        if seen.insert(h.sigma()) {
            Ok(())
        } else {
            Err(h.clone())
        }
    });
    match closure {
        Ok(all) if all.len() as u64 == pi => {
            Ok(VerificationRecord { mode: VerifyMode::GeneratorRelations, pairs: pi, failures: 0 })
        }
        Ok(all) => Err(fail(format!("images generate {} elements, |Pi(G)| = {pi}", all.len()), None)),
        Err(ClosureAbort::Overflow) => Err(fail("closure of images exceeds |Pi(G)|", None)),
        Err(ClosureAbort::Rejected(h)) => {
            Err(fail(format!("closure of images meets Delta(G) nontrivially at sigma = {:?}", h.sigma()), None))
        }
    }
}

/// Random words in the generators. `θ` is well defined on words only if equal
/// `σ`-values always give equal `θ`-values, and it respects orders only if
/// `θ(w)^{ord σ(w)} = 1`.
fn verify_sampled(cert: &SectionCertificate, pairs: u64, seed: u64) -> Result<VerificationRecord> {
    let k = cert.generators.len();
    if k == 0 {
        return Ok(VerificationRecord { mode: VerifyMode::Sampled, pairs, failures: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let word = |rng: &mut ChaCha8Rng| {
        let len = rng.gen_range(1..=24);
        let mut q = QElement::identity(&cert.spec);
        let mut h = BlockEndo::identity(&cert.spec);
        for _ in 0..len {
            let i = rng.gen_range(0..k);
            q = q.mul(&cert.generators[i]);
            h = h.compose_unchecked(&cert.images[i]);
        }
        (q, h)
    };
    let words: Vec<((QElement, BlockEndo), (QElement, BlockEndo))> =
        (0..pairs).map(|_| (word(&mut rng), word(&mut rng))).collect();
    let products: Vec<(QElement, BlockEndo)> = words
        .par_iter()
        .map(|((q1, h1), (q2, h2))| (q1.mul(q2), h1.compose_unchecked(h2)))
        .collect();
    let bad_order = products.par_iter().position_first(|(q, h)| !h.pow_u64(q.order()).is_identity());
    if let Some(i) = bad_order {
        return Err(fail("theta does not respect the order of a sampled product", Some((i, i))));
    }
    let mut table: HashMap<QElement, (usize, BlockEndo)> = HashMap::new();
    for (i, (q, h)) in products.into_iter().enumerate() {
        match table.get(&q) {
            Some((j, h0)) if *h0 != h => {
                return Err(fail("two words with equal sigma have different theta", Some((*j, i))))
            }
            Some(_) => {}
            None => {
                table.insert(q, (i, h));
            }
        }
    }
    Ok(VerificationRecord { mode: VerifyMode::Sampled, pairs, failures: 0 })
}
