//! Automorphism groups of finite abelian p-groups `G = ⊕_i Z_{p^{n_i}}^{r_i}`.
//!
//! `Aut(G)` is modelled as the units of a ring of constrained block matrices.
//! The crate decides whether `Aut(G)` splits over the kernel `Δ(G)` of the
//! reduction `σ: Aut(G) → Π_i GL_{r_i}(F_p)`, builds explicit splitting
//! sections where they exist, and checks both answers against brute-force
//! oracles on small groups.

pub mod arith;
pub mod batch;
pub mod config;
pub mod endo;
pub mod error;
pub mod group;
pub mod matrix;
pub mod oracle;
pub mod splitting;

pub use config::Budgets;
pub use endo::{BlockEndo, QElement};
pub use error::{Error, Result};
pub use group::{Block, GroupElement, PGroupSpec, RawSpec};
pub use matrix::ModMatrix;
