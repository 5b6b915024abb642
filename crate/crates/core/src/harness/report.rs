use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version of the JSON layout of [`LemmaReport`].
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleStatus {
    Ok,
    Violation,
    /// Precondition failed or a resource cap was hit; excluded from the
    /// verdict.
    Skipped,
}

/// One row of a report: what went in, the two sides compared, and the gap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub inputs: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub defect: Option<f64>,
    pub status: SampleStatus,
    pub note: String,
}

impl SampleRecord {
    pub fn new(index: usize, inputs: impl Into<String>) -> Self {
        Self {
            index,
            inputs: inputs.into(),
            lhs: None,
            rhs: None,
            defect: None,
            status: SampleStatus::Ok,
            note: String::new(),
        }
    }

    pub fn sides(mut self, lhs: f64, rhs: f64) -> Self {
        self.lhs = Some(lhs);
        self.rhs = Some(rhs);
        self.defect = Some(lhs - rhs);
        self
    }

    pub fn defect(mut self, defect: f64) -> Self {
        self.defect = Some(defect);
        self
    }

    pub fn status(mut self, status: SampleStatus) -> Self {
        self.status = status;
        self
    }

    pub fn ok_if(self, ok: bool) -> Self {
        self.status(if ok { SampleStatus::Ok } else { SampleStatus::Violation })
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn skipped(index: usize, inputs: impl Into<String>, why: impl Into<String>) -> Self {
        Self::new(index, inputs).status(SampleStatus::Skipped).note(why)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub schema_version: u32,
    pub lemma_id: String,
    /// Samples that entered the verdict.
    pub samples: usize,
    pub skipped: usize,
    /// Largest recorded defect over the counted samples.
    pub observed_max_defect: Option<f64>,
    pub fitted_constants: BTreeMap<String, f64>,
    /// Human-readable statement of the assertion behind `pass`.
    pub assertion: String,
    pub pass: bool,
    pub details: Vec<SampleRecord>,
}

impl LemmaReport {
    /// Builds a report whose verdict is "no counted sample is a violation"
    /// combined with `extra`, the check-specific condition.
    pub fn from_records(
        lemma_id: &str,
        assertion: impl Into<String>,
        details: Vec<SampleRecord>,
        fitted_constants: BTreeMap<String, f64>,
        extra: bool,
    ) -> Self {
        let counted: Vec<&SampleRecord> = details.iter().filter(|r| r.status != SampleStatus::Skipped).collect();
        let observed_max_defect = counted.iter().filter_map(|r| r.defect).filter(|x| x.is_finite()).reduce(f64::max);
        let violations = counted.iter().filter(|r| r.status == SampleStatus::Violation).count();
        let fitted_constants = fitted_constants.into_iter().filter(|(_, v)| v.is_finite()).collect();
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            lemma_id: lemma_id.to_string(),
            samples: counted.len(),
            skipped: details.len() - counted.len(),
            observed_max_defect,
            fitted_constants,
            assertion: assertion.into(),
            pass: violations == 0 && extra && !counted.is_empty(),
            details,
        }
    }

    pub fn violations(&self) -> usize {
        self.details.iter().filter(|r| r.status == SampleStatus::Violation).count()
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.fitted_constants.get(name).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One row per sample.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.details {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    /// A few lines for terminals.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {} ({} samples, {} skipped, {} violations)\n  assertion: {}\n",
            self.lemma_id,
            if self.pass { "PASS" } else { "FAIL" },
            self.samples,
            self.skipped,
            self.violations(),
            self.assertion
        );
        if let Some(m) = self.observed_max_defect {
            s.push_str(&format!("  observed max defect: {m:.6e}\n"));
        }
        for (k, v) in &self.fitted_constants {
            s.push_str(&format!("  {k} = {v:.6e}\n"));
        }
        s
    }
}
