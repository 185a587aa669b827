use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{BlockEndo, QElement};
use crate::error::{Error, Result};
use crate::group::PGroupSpec;
use crate::matrix::ModMatrix;

/// Wire form of an endomorphism: `{"cells": [[cell, ...], ...]}` indexed
/// `[target][source]`, each cell a list of rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndoJson {
    pub cells: Vec<Vec<Vec<Vec<u64>>>>,
}

impl From<&BlockEndo> for EndoJson {
    fn from(e: &BlockEndo) -> Self {
        EndoJson { cells: e.cells() }
    }
}

impl EndoJson {
    /// Enforces canonical entries and Hom constraints.
    pub fn into_endo(&self, spec: &Arc<PGroupSpec>) -> Result<BlockEndo> {
        BlockEndo::from_cells_checked(spec, &self.cells)
    }
}

/// Wire form of an element of `Π(G)`: `{"mats": [matrix, ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QElementJson {
    pub mats: Vec<Vec<Vec<u64>>>,
}

impl From<&QElement> for QElementJson {
    fn from(q: &QElement) -> Self {
        QElementJson { mats: q.mats().iter().map(ModMatrix::to_rows).collect() }
    }
}

impl QElementJson {
    pub fn into_qelement(&self, spec: &PGroupSpec) -> Result<QElement> {
        let p = spec.p();
        if self.mats.len() != spec.num_blocks() {
            return Err(Error::ShapeMismatch("one matrix per block".into()));
        }
        let mut mats = Vec::with_capacity(self.mats.len());
        for (rows, b) in self.mats.iter().zip(spec.blocks()) {
            if rows.len() != b.r || rows.iter().any(|r| r.len() != b.r) {
                return Err(Error::ShapeMismatch(format!("matrix must be {0}×{0}", b.r)));
            }
            if rows.iter().flatten().any(|&x| x >= p) {
                return Err(Error::ShapeMismatch(format!("matrix entries must lie in [0, {p})")));
            }
            mats.push(ModMatrix::from_rows(rows, p));
        }
        Ok(QElement::new(p, mats))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reader_reports_offending_cell() {
        let spec = Arc::new(PGroupSpec::new(2, &[(1, 1), (2, 1)]).unwrap());
        let ok: EndoJson = serde_json::from_str(r#"{"cells":[[[[1]],[[1]]],[[[2]],[[3]]]]}"#).unwrap();
        let e = ok.into_endo(&spec).unwrap();
        assert_eq!(EndoJson::from(&e), ok);

        let bad: EndoJson = serde_json::from_str(r#"{"cells":[[[[1]],[[0]]],[[[1]],[[1]]]]}"#).unwrap();
        assert_eq!(bad.into_endo(&spec), Err(Error::ConstraintViolation { target: 1, src: 0 }));

        let noncanon: EndoJson = serde_json::from_str(r#"{"cells":[[[[1]],[[0]]],[[[0]],[[5]]]]}"#).unwrap();
        assert!(matches!(noncanon.into_endo(&spec), Err(Error::NonCanonicalEntry { target: 1, src: 1, .. })));

        let misshapen: EndoJson = serde_json::from_str(r#"{"cells":[[[[1]]]]}"#).unwrap();
        assert!(matches!(misshapen.into_endo(&spec), Err(Error::ShapeMismatch(_))));
    }
}
