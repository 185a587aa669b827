//! On-disk store of section certificates, one JSON file per group.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{CertificateJson, SectionCertificate, VerificationRecord, VerifyMode};
use crate::error::Result;
use crate::group::PGroupSpec;

#[derive(Clone, Debug)]
pub struct CertCache {
    dir: PathBuf,
}

#[derive(Clone, Debug, Serialize)]
pub struct CacheEntry {
    pub path: PathBuf,
    pub spec: PGroupSpec,
    pub verification: Option<VerificationRecord>,
}

impl CertCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CertCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, spec: &PGroupSpec) -> PathBuf {
        self.dir.join(format!("cert_{}.json", spec.key()))
    }

    fn read(path: &Path) -> Result<SectionCertificate> {
        let json: CertificateJson = serde_json::from_str(&fs::read_to_string(path)?)?;
        SectionCertificate::from_json(&json)
    }

    /// The cached certificate for `spec`, re-verified by sampling. A
    /// certificate that fails the check is reported, not silently replaced.
    pub fn load(&self, spec: &PGroupSpec, seed: u64) -> Result<Option<SectionCertificate>> {
        let path = self.path_for(spec);
        if !path.exists() {
            return Ok(None);
        }
        let cert = Self::read(&path)?;
        if *cert.spec != *spec {
            log::warn!("{}: stored group differs from {spec}, ignoring", path.display());
            return Ok(None);
        }
        super::verify_section(&cert, VerifyMode::Sampled, seed)?;
        Ok(Some(cert))
    }

    pub fn store(&self, cert: &SectionCertificate) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(&cert.spec);
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_string_pretty(&cert.to_json())?)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    fn files(&self) -> Result<Vec<PathBuf>> {
        if !self.dir.exists() {
            return Ok(vec![]);
        }
        let mut out: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
                name.starts_with("cert_") && name.ends_with(".json")
            })
            .collect();
        out.sort();
        Ok(out)
    }

    pub fn list(&self) -> Result<Vec<CacheEntry>> {
        self.files()?
            .into_iter()
            .map(|path| {
                let cert = Self::read(&path)?;
                Ok(CacheEntry { path, spec: (*cert.spec).clone(), verification: cert.verification })
            })
            .collect()
    }

    /// Re-verifies every stored certificate in `mode`.
    pub fn verify_all(&self, mode: VerifyMode, seed: u64) -> Result<Vec<(PathBuf, Result<VerificationRecord>)>> {
        Ok(self
            .files()?
            .into_iter()
            .map(|path| {
                let res = Self::read(&path).and_then(|c| super::verify_section(&c, mode, seed));
                (path, res)
            })
            .collect())
    }

    /// Removes every stored certificate; returns how many.
    pub fn clear(&self) -> Result<usize> {
        let files = self.files()?;
        for f in &files {
            fs::remove_file(f)?;
        }
        Ok(files.len())
    }
}
