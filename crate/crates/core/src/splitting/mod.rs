//! Deciding whether `Aut(G)` splits over `Δ(G)`, and building sections.
//!
//! A single homocyclic block `Z_{p^n}^r` splits exactly when `n = 1` or
//! `r ≤ B(p)`, with `B(p) = 1` for `p ≥ 5`, `B(3) = 2` and `B(2) = 3`. For
//! several blocks, splitting of every block is sufficient (sections assemble
//! block-diagonally); a failing block rules splitting out when `p ≥ 5` or all
//! exponent gaps exceed one. An elementary first block never matters, so it
//! is dropped before giving up; the answer is left open otherwise.

mod cache;
mod certificate;

pub use cache::{CacheEntry, CertCache};
pub use certificate::{
    verify_section, CertificateJson, SectionCertificate, VerificationRecord, VerifyMode, AUTO_FULL_TABLE_LIMIT,
    DEFAULT_SAMPLED_PAIRS, FULL_TABLE_LIMIT, RELATIONS_LIMIT,
};

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::arith::{mod_pow, primitive_root};
use crate::config::Budgets;
use crate::endo::{BlockEndo, QElement};
use crate::error::{Error, Result};
use crate::group::{derive_tail_spec, PGroupSpec};
use crate::matrix::ModMatrix;
use crate::oracle::{complement_lift_search, generators_of_gl, SearchOptions, SearchOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockOutcome {
    Splits,
    DoesNotSplit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplitOutcome {
    Splits,
    DoesNotSplit,
    Unknown,
}

impl std::fmt::Display for SplitOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitOutcome::Splits => "Splits",
            SplitOutcome::DoesNotSplit => "DoesNotSplit",
            SplitOutcome::Unknown => "Unknown",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockVerdict {
    pub n: u32,
    pub r: usize,
    pub outcome: BlockOutcome,
    pub rule: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitVerdict {
    pub outcome: SplitOutcome,
    pub rule: String,
    pub per_block: Vec<BlockVerdict>,
    pub gaps_ok: bool,
}

/// Largest rank of a non-elementary block that still splits.
pub fn rank_bound(p: u64) -> usize {
    match p {
        2 => 3,
        3 => 2,
        _ => 1,
    }
}

pub fn classify_block(p: u64, n: u32, r: usize) -> BlockVerdict {
    let bound = rank_bound(p);
    let (outcome, rule) = if n == 1 {
        (BlockOutcome::Splits, "elementary block".to_string())
    } else if r == 1 {
        (BlockOutcome::Splits, "cyclic block".to_string())
    } else if r <= bound {
        (BlockOutcome::Splits, format!("rank {r} <= {bound} for p = {p}"))
    } else {
        (BlockOutcome::DoesNotSplit, format!("rank {r} > {bound} for p = {p} with n = {n} > 1"))
    };
    BlockVerdict { n, r, outcome, rule }
}

pub fn classify(spec: &PGroupSpec) -> SplitVerdict {
    let p = spec.p();
    let per_block: Vec<BlockVerdict> = spec.blocks().iter().map(|b| classify_block(p, b.n, b.r)).collect();
    let gaps_ok = spec.gaps_exceed_one();
    let failing = per_block.iter().position(|v| v.outcome == BlockOutcome::DoesNotSplit);
    let (outcome, rule) = match failing {
        None => (SplitOutcome::Splits, "every block splits".to_string()),
        Some(i) if p >= 5 => (SplitOutcome::DoesNotSplit, format!("block {} fails, p >= 5", i + 1)),
        Some(i) if gaps_ok => (SplitOutcome::DoesNotSplit, format!("block {} fails, all exponent gaps > 1", i + 1)),
        // An elementary first block can be dropped: G splits iff the rest does.
        Some(_) if spec.blocks()[0].n == 1 && spec.num_blocks() > 1 => {
            let tail = classify(&derive_tail_spec(spec).expect("at least two blocks"));
            (tail.outcome, format!("elementary first block dropped; {}", tail.rule))
        }
        Some(i) => (
            SplitOutcome::Unknown,
            format!("block {} fails, p = {p} and an exponent gap equals 1: undecided", i + 1),
        ),
    };
    SplitVerdict { outcome, rule, per_block, gaps_ok }
}

/// `ω(a) = a^{p^{n-1}} mod p^n`, the multiplicative lift of `F_p^*` into the
/// units of `Z_{p^n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TeichmullerLift {
    p: u64,
    n: u32,
    modulus: u64,
    exponent: u64,
}

impl TeichmullerLift {
    pub fn new(p: u64, n: u32) -> Self {
        assert!(n >= 1, "exponent must be positive");
        TeichmullerLift { p, n, modulus: p.pow(n), exponent: p.pow(n - 1) }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Lift of the residue `a mod p`, which must be nonzero.
    pub fn lift(&self, a: u64) -> u64 {
        let a = a % self.p;
        assert_ne!(a, 0, "0 is not in F_p^*");
        mod_pow(a, self.exponent, self.modulus)
    }
}

pub fn teichmuller_section(p: u64, n: u32) -> TeichmullerLift {
    TeichmullerLift::new(p, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectionKind {
    /// `n = 1`: `Δ` is trivial and `σ` is the identity.
    Identity,
    Teichmuller,
    /// Images found by complement search.
    Search,
}

/// A homomorphic section `GL_r(F_p) → GL_r(Z_{p^n})` of one block, given by
/// the images of a generating set.
#[derive(Clone, Debug)]
pub struct BlockSection {
    pub p: u64,
    pub n: u32,
    pub r: usize,
    pub kind: SectionKind,
    pub generators: Vec<ModMatrix>,
    pub images: Vec<ModMatrix>,
    table: OnceLock<HashMap<ModMatrix, ModMatrix>>,
}

impl BlockSection {
    fn new(p: u64, n: u32, r: usize, kind: SectionKind, generators: Vec<ModMatrix>, images: Vec<ModMatrix>) -> Self {
        BlockSection { p, n, r, kind, generators, images, table: OnceLock::new() }
    }

    /// Reads a single-block certificate.
    pub fn from_certificate(cert: &SectionCertificate) -> Result<Self> {
        let spec = &cert.spec;
        if spec.num_blocks() != 1 {
            return Err(Error::ShapeMismatch("block sections come from single-block certificates".into()));
        }
        let b = spec.blocks()[0];
        let generators = cert.generators.iter().map(|g| g.mats()[0].clone()).collect();
        let images = cert.images.iter().map(|h| h.cell(0, 0)).collect();
        Ok(Self::new(spec.p(), b.n, b.r, SectionKind::Search, generators, images))
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.n)
    }

    /// `θ(m)` for any `m ∈ GL_r(F_p)`.
    pub fn evaluate(&self, m: &ModMatrix) -> Result<ModMatrix> {
        let m = m.reduce(self.p);
        if m.rows() != self.r || m.cols() != self.r || !m.is_unit(self.p) {
            return Err(Error::ShapeMismatch(format!("expected an invertible {0}×{0} matrix mod {1}", self.r, self.p)));
        }
        let q = self.modulus();
        match self.kind {
            SectionKind::Identity => Ok(ModMatrix::from_fn(self.r, self.r, q, |a, b| m.get(a, b))),
            SectionKind::Teichmuller => {
                Ok(ModMatrix::from_rows(&[vec![TeichmullerLift::new(self.p, self.n).lift(m.get(0, 0))]], q))
            }
            SectionKind::Search => {
                let table = self.table.get_or_init(|| self.word_table());
                table.get(&m).cloned().ok_or_else(|| Error::VerificationFailed {
                    reason: "generators do not reach this matrix".into(),
                    pair: None,
                })
            }
        }
    }

    fn word_table(&self) -> HashMap<ModMatrix, ModMatrix> {
        let id = ModMatrix::identity(self.r, self.p);
        let mut table = HashMap::from([(id, ModMatrix::identity(self.r, self.modulus()))]);
        let mut frontier: Vec<ModMatrix> = table.keys().cloned().collect();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for x in frontier {
                let hx = table[&x].clone();
                for (g, h) in self.generators.iter().zip(&self.images) {
                    let y = x.mul(g);
                    if !table.contains_key(&y) {
                        table.insert(y.clone(), hx.mul(h));
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        table
    }
}

fn single_block_spec(p: u64, n: u32, r: usize) -> Result<Arc<PGroupSpec>> {
    Ok(Arc::new(PGroupSpec::new(p, &[(n, r)])?))
}

/// A verified section of the block `Z_{p^n}^r`. Identity for `n = 1`,
/// Teichmüller for `r = 1`, and otherwise a searched certificate, read from
/// `cache` when present and written back after a fresh search.
pub fn block_section(
    p: u64,
    n: u32,
    r: usize,
    budgets: &Budgets,
    seed: u64,
    cache: Option<&CertCache>,
) -> Result<BlockSection> {
    let spec = single_block_spec(p, n, r)?;
    if classify_block(p, n, r).outcome != BlockOutcome::Splits {
        return Err(Error::NotSplitBlock { p, n, r });
    }
    if n == 1 {
        let gens = generators_of_gl(p, r, seed, budgets.elements)?;
        return Ok(BlockSection::new(p, n, r, SectionKind::Identity, gens.clone(), gens));
    }
    if r == 1 {
        let q = spec.modulus(0);
        let g = primitive_root(p);
        let (gens, images) = if g == 1 {
            (vec![], vec![])
        } else {
            let omega = TeichmullerLift::new(p, n).lift(g);
            (vec![ModMatrix::from_rows(&[vec![g]], p)], vec![ModMatrix::from_rows(&[vec![omega]], q)])
        };
        return Ok(BlockSection::new(p, n, r, SectionKind::Teichmuller, gens, images));
    }
    if let Some(cache) = cache {
        if let Some(cert) = cache.load(&spec, seed)? {
            log::info!("{spec}: block section from cache");
            return BlockSection::from_certificate(&cert);
        }
    }
    let search_budgets = Budgets { delta: budgets.section_delta, ..budgets.clone() };
    let opts = SearchOptions { seed, obstruction_prepass: false, exhaustive: false };
    let mut cert = match complement_lift_search(&spec, &search_budgets, &opts)? {
        SearchOutcome::Found { certificate, .. } => certificate,
        SearchOutcome::NotFound { assignments_tried, .. } => {
            return Err(Error::VerificationFailed {
                reason: format!("no section of block {spec} after {assignments_tried} assignments"),
                pair: None,
            })
        }
    };
    cert.verify(VerifyMode::Auto, seed)?;
    if let Some(cache) = cache {
        cache.store(&cert)?;
    }
    BlockSection::from_certificate(&cert)
}

/// Block-diagonal assembly: each block's generators, embedded with identity
/// in the other blocks, mapped to the block-diagonal image.
pub fn assemble_section(spec: &Arc<PGroupSpec>, sections: &[BlockSection], seed: u64) -> Result<SectionCertificate> {
    let p = spec.p();
    for (i, b) in spec.blocks().iter().enumerate() {
        match sections.get(i) {
            Some(s) if s.p == p && s.n == b.n && s.r == b.r => {}
            _ => return Err(Error::MissingBlockSection(i)),
        }
    }
    let identity_cells: Vec<ModMatrix> =
        spec.blocks().iter().enumerate().map(|(i, b)| ModMatrix::identity(b.r, spec.modulus(i))).collect();
    let mut generators = Vec::new();
    let mut images = Vec::new();
    for (i, s) in sections.iter().enumerate().take(spec.num_blocks()) {
        for (g, h) in s.generators.iter().zip(&s.images) {
            generators.push(QElement::embed(spec, i, g));
            let mut cells = identity_cells.clone();
            cells[i] = h.clone();
            images.push(BlockEndo::block_diagonal(spec, &cells)?);
        }
    }
    SectionCertificate::new(Arc::clone(spec), generators, images, seed)
}

/// Classifies, builds every block section, assembles and verifies.
pub fn build_section(
    spec: &Arc<PGroupSpec>,
    budgets: &Budgets,
    seed: u64,
    mode: VerifyMode,
    cache: Option<&CertCache>,
) -> Result<SectionCertificate> {
    let verdict = classify(spec);
    if let Some(v) = verdict.per_block.iter().find(|v| v.outcome != BlockOutcome::Splits) {
        return Err(Error::NotSplitBlock { p: spec.p(), n: v.n, r: v.r });
    }
    let sections = spec
        .blocks()
        .iter()
        .map(|b| block_section(spec.p(), b.n, b.r, budgets, seed, cache))
        .collect::<Result<Vec<_>>>()?;
    let mut cert = assemble_section(spec, &sections, seed)?;
    cert.verify(mode, seed)?;
    Ok(cert)
}
