//! Run configuration: defaults, then the file named by `HEIGHTLAB_CONFIG`,
//! then command-line flags.

use std::path::Path;

use clap::ValueEnum;
use heightlab::harness::SampleSpec;
use heightlab::heights::IterationCaps;
use heightlab::poly::DEFAULT_DEGREE_CAP;
use serde::{Deserialize, Serialize};

pub const CONFIG_ENV: &str = "HEIGHTLAB_CONFIG";

/// The only significand width available.
pub const PRECISION_BITS: u32 = 53;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

/// Overrides applied on top of a harness spec file. Unset fields keep the
/// spec's values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub target_error: Option<f64>,
    pub slope: Option<f64>,
    pub m_threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Significand bits of floating-point work. Default 53, the only
    /// supported value.
    pub precision: u32,
    /// Iteration budgets for single computations (`height`, `green`).
    /// Harness runs use their spec's caps unless `--max-iter` is given.
    pub caps: IterationCaps,
    /// Largest polynomial degree accepted. Default 256.
    pub degree_cap: usize,
    /// Target enclosure radius for single computations. Default 1e-9.
    pub target_error: f64,
    /// Steps of the naive method. Default 40.
    pub naive_steps: usize,
    pub tolerances: Tolerances,
    /// Default `json`.
    pub format: Format,
    /// Replaces the spec's seed when set. At most `i64::MAX`, so that it
    /// survives TOML.
    pub rng_seed: Option<u64>,
    /// Rewrite recorded fixtures instead of comparing. Default false.
    pub fixtures_regen: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            precision: PRECISION_BITS,
            caps: IterationCaps::default(),
            degree_cap: DEFAULT_DEGREE_CAP,
            target_error: 1e-9,
            naive_steps: 40,
            tolerances: Tolerances::default(),
            format: Format::default(),
            rng_seed: None,
            fixtures_regen: false,
        }
    }
}

impl Config {
    pub fn from_toml(s: &str) -> Result<Self, String> {
        toml::from_str(s).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> Result<String, String> {
        toml::to_string(self).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Defaults, or the file named by `HEIGHTLAB_CONFIG`.
    pub fn from_env() -> Result<Self, String> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) => Self::load(Path::new(&path)),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.precision != PRECISION_BITS {
            return Err(format!("only {PRECISION_BITS}-bit precision is available, got {}", self.precision));
        }
        if let Some(seed) = self.rng_seed {
            if seed > i64::MAX as u64 {
                return Err(format!("seed {seed} is larger than {}", i64::MAX));
            }
        }
        if !self.target_error.is_finite() || self.target_error <= 0.0 {
            return Err("target_error must be positive and finite".into());
        }
        if self.naive_steps == 0 {
            return Err("naive_steps must be at least 1".into());
        }
        Ok(())
    }

    /// `spec` with this configuration's overrides applied.
    pub fn apply(&self, mut spec: SampleSpec, caps_override: bool) -> SampleSpec {
        if let Some(seed) = self.rng_seed {
            spec.rng_seed = seed;
        }
        if let Some(x) = self.tolerances.target_error {
            spec.target_error = x;
        }
        if let Some(x) = self.tolerances.slope {
            spec.slope_tolerance = x;
        }
        if let Some(x) = self.tolerances.m_threshold {
            spec.m_threshold = x;
        }
        if caps_override {
            spec.caps = self.caps;
        }
        spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = Config::default();
        let text = c.to_toml().unwrap();
        assert_eq!(Config::from_toml(&text).unwrap(), c);
        c.validate().unwrap();
    }

    #[test]
    fn every_field_round_trips() {
        let c = Config {
            precision: 53,
            caps: IterationCaps { arch: 17, padic: 9, exact_bits: 1 << 20 },
            degree_cap: 12,
            target_error: 3.0e-11,
            naive_steps: 7,
            tolerances: Tolerances { target_error: Some(0.1 + 0.2), slope: Some(0.07), m_threshold: None },
            format: Format::Csv,
            rng_seed: Some(i64::MAX as u64),
            fixtures_regen: true,
        };
        let text = c.to_toml().unwrap();
        assert_eq!(Config::from_toml(&text).unwrap(), c, "{text}");
    }

    #[test]
    fn partial_files_fill_defaults() {
        let c = Config::from_toml("format = \"text\"\n[caps]\narch = 10\n").unwrap();
        assert_eq!(c.format, Format::Text);
        assert_eq!(c.caps.arch, 10);
        assert_eq!(c.caps.padic, IterationCaps::default().padic);
        assert_eq!(c.degree_cap, DEFAULT_DEGREE_CAP);
        assert!(Config::from_toml("colour = 1").is_err());
    }

    #[test]
    fn validation() {
        assert!(Config { precision: 113, ..Config::default() }.validate().is_err());
        assert!(Config { rng_seed: Some(u64::MAX), ..Config::default() }.validate().is_err());
    }

    #[test]
    fn overrides_reach_the_spec() {
        let c = Config {
            rng_seed: Some(9),
            tolerances: Tolerances { slope: Some(0.2), ..Tolerances::default() },
            caps: IterationCaps { arch: 5, ..IterationCaps::default() },
            ..Config::default()
        };
        let s = c.apply(SampleSpec::default(), false);
        assert_eq!((s.rng_seed, s.slope_tolerance), (9, 0.2));
        assert_eq!(s.caps, IterationCaps::default());
        assert_eq!(c.apply(SampleSpec::default(), true).caps.arch, 5);
    }
}
