//! JSON persistence of a stage list and its certificate.
//!
//! Floats are stored as strings in Rust's shortest round-trip form, so a
//! loaded stage is bit-identical to the one that was saved.

use std::path::Path;

use repat_core::circle_maps::{Arc, CirclePoint, MapFamily};
use repat_core::pattern::{ExactRatio, PatternCertificate, Stage};
use repat_core::symbolic::literal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grammar;

pub const STAGE_SCHEMA: &str = "repat-stages/1";

pub fn float(x: f64) -> String {
    format!("{x:?}")
}

fn unfloat(s: &str) -> Result<f64> {
    s.parse().map_err(|_| LabError::StageFile(format!("`{s}` is not a float")))
}

fn opt_unfloat(s: &Option<String>) -> Result<Option<f64>> {
    s.as_deref().map(unfloat).transpose()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageFile {
    pub schema: String,
    /// Map family the stages were built for, as `Debug` strings.
    pub family: Vec<String>,
    pub stages: Vec<StageRecord>,
    pub certificate: Option<CertificateRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub n: usize,
    pub word: String,
    pub pi: u64,
    pub k: Option<u64>,
    pub alpha: Option<String>,
    pub q: String,
    pub j_anchor: String,
    pub j_length: String,
    pub c: String,
    pub log_c: String,
    pub lambda: Option<String>,
    pub rho: Option<String>,
    pub rho_num: Option<u64>,
    pub rho_den: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub valid: bool,
    pub failed_conditions: Vec<u8>,
    pub lambda_hat: Option<String>,
    pub checks: Vec<CheckRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub condition: u8,
    pub stage: Option<usize>,
    pub passed: bool,
    pub value: String,
    pub bound: String,
    pub detail: String,
}

impl CertificateRecord {
    pub fn from_certificate(c: &PatternCertificate) -> Self {
        CertificateRecord {
            valid: c.is_valid(),
            failed_conditions: c.failed_conditions(),
            lambda_hat: c.lambda_hat.map(float),
            checks: c
                .checks
                .iter()
                .map(|r| CheckRow {
                    name: r.name.to_string(),
                    condition: r.condition,
                    stage: r.stage,
                    passed: r.passed,
                    value: float(r.value),
                    bound: float(r.bound),
                    detail: r.detail.clone(),
                })
                .collect(),
        }
    }
}

fn symbols_text(s: &[repat_core::Symbol]) -> String {
    s.iter().map(|c| char::from(b'0' + c.get())).collect()
}

pub fn family_fingerprint(fam: &MapFamily) -> Vec<String> {
    fam.maps().iter().map(|m| format!("{m:?}")).collect()
}

impl StageRecord {
    pub fn from_stage(s: &Stage) -> Self {
        StageRecord {
            n: s.n,
            word: grammar::format(&s.xi),
            pi: s.pi,
            k: s.k,
            alpha: s.alpha.as_deref().map(symbols_text),
            q: float(s.q.value()),
            j_anchor: float(s.j.anchor().value()),
            j_length: float(s.j.length()),
            c: float(s.c),
            log_c: float(s.log_c),
            lambda: s.lambda.map(float),
            rho: s.rho.map(float),
            rho_num: s.rho_exact.map(|r| r.num),
            rho_den: s.rho_exact.map(|r| r.den),
        }
    }

    pub fn to_stage(&self) -> Result<Stage> {
        let xi = grammar::parse(&self.word)?;
        if xi.len() != self.pi {
            return Err(LabError::StageFile(format!(
                "stage {}: word length {} differs from pi {}",
                self.n,
                xi.len(),
                self.pi
            )));
        }
        let rho_exact = match (self.rho_num, self.rho_den) {
            (Some(num), Some(den)) => Some(ExactRatio { num, den }),
            (None, None) => None,
            _ => return Err(LabError::StageFile(format!("stage {}: incomplete exact rho", self.n))),
        };
        Ok(Stage {
            n: self.n,
            xi,
            pi: self.pi,
            k: self.k,
            alpha: self.alpha.as_deref().map(literal).transpose()?,
            q: CirclePoint::new(unfloat(&self.q)?),
            j: Arc::new(unfloat(&self.j_anchor)?, unfloat(&self.j_length)?)?,
            c: unfloat(&self.c)?,
            log_c: unfloat(&self.log_c)?,
            lambda: opt_unfloat(&self.lambda)?,
            rho: opt_unfloat(&self.rho)?,
            rho_exact,
        })
    }
}

impl StageFile {
    pub fn new(fam: &MapFamily, stages: &[Stage], cert: Option<&PatternCertificate>) -> Self {
        StageFile {
            schema: STAGE_SCHEMA.to_string(),
            family: family_fingerprint(fam),
            stages: stages.iter().map(StageRecord::from_stage).collect(),
            certificate: cert.map(CertificateRecord::from_certificate),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: StageFile = serde_json::from_str(text)?;
        if f.schema != STAGE_SCHEMA {
            return Err(LabError::StageFile(format!("unsupported schema `{}`", f.schema)));
        }
        Ok(f)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| LabError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Decoded stages, checked against the family they will be used with.
    pub fn stages_for(&self, fam: &MapFamily) -> Result<Vec<Stage>> {
        if self.family != family_fingerprint(fam) {
            return Err(LabError::StageFile("stages were built for a different map family".into()));
        }
        let stages = self.stages.iter().map(StageRecord::to_stage).collect::<Result<Vec<_>>>()?;
        if stages.iter().enumerate().any(|(i, s)| s.n != i) {
            return Err(LabError::StageFile("stage indices are not 0, 1, 2, ...".into()));
        }
        Ok(stages)
    }
}
