//! Recorded outputs of the seeded experiment runs.
//!
//! Fixtures are only rewritten when asked: by the `regen` argument (the
//! CLI's `--fixtures-regen`) or by setting `HEIGHTLAB_FIXTURES_REGEN=1`.

use std::path::PathBuf;

use super::{check_preimage_proximity, min_height_experiment, pigeonhole_select, LemmaReport, SampleSpec};
use crate::arith::{Place, Rational};
use crate::error::{Error, Result};
use crate::poly::NormalForm;

pub const DIR_ENV: &str = "HEIGHTLAB_FIXTURES_DIR";
pub const REGEN_ENV: &str = "HEIGHTLAB_FIXTURES_REGEN";

/// Names of the recorded runs, in the order [`run`] knows them.
pub const NAMES: &[&str] = &["pigeonhole_c10", "min_height_d2", "preimage_proximity_d2"];

pub fn dir() -> PathBuf {
    std::env::var_os(DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"))
}

pub fn regen_requested() -> bool {
    std::env::var(REGEN_ENV).is_ok_and(|v| v == "1")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixtureOutcome {
    Matched,
    Written,
    Missing,
    Mismatch,
}

/// The spec behind a recorded run.
pub fn spec(name: &str) -> Result<SampleSpec> {
    let base = SampleSpec { degrees: vec![2], ..SampleSpec::default() };
    match name {
        "pigeonhole_c10" => Ok(base),
        "min_height_d2" => Ok(SampleSpec { samples: 500, ..base }),
        "preimage_proximity_d2" => Ok(base),
        other => Err(Error::Domain(format!("unknown fixture {other:?}"))),
    }
}

/// A report without its per-sample rows.
pub fn summary(report: &LemmaReport) -> String {
    let mut r = report.clone();
    r.details.clear();
    r.to_json()
}

/// Recomputes a recorded run; the output is what gets compared.
pub fn run(name: &str) -> Result<String> {
    match name {
        "pigeonhole_c10" => {
            let xs: Vec<usize> = (1..=21).collect();
            let alpha = Rational::new(1.into(), 2.into());
            let r = pigeonhole_select(&NormalForm::from_i64(&[10]), &alpha, &xs, Place::Infinite)?;
            Ok(serde_json::to_string_pretty(&r).expect("serialises"))
        }
        "min_height_d2" => Ok(summary(&min_height_experiment(&spec(name)?)?)),
        "preimage_proximity_d2" => Ok(summary(&check_preimage_proximity(&spec(name)?)?)),
        other => Err(Error::Domain(format!("unknown fixture {other:?}"))),
    }
}

/// Compares `actual` with the stored fixture, or stores it when `regen`.
pub fn compare_or_regen(name: &str, actual: &str, regen: bool) -> Result<FixtureOutcome> {
    let path = dir().join(format!("{name}.json"));
    if regen {
        std::fs::create_dir_all(dir())?;
        std::fs::write(&path, actual)?;
        return Ok(FixtureOutcome::Written);
    }
    match std::fs::read_to_string(&path) {
        Ok(s) if s == actual => Ok(FixtureOutcome::Matched),
        Ok(_) => Ok(FixtureOutcome::Mismatch),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(FixtureOutcome::Missing),
        Err(e) => Err(e.into()),
    }
}
