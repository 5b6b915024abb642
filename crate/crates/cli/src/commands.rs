use std::path::{Path, PathBuf};

use heightlab::arith::{format_rational, parse_rational};
use heightlab::harness::fixtures::{self, FixtureOutcome};
use heightlab::harness::{self, LemmaReport, SampleSpec};
use heightlab::heights::{
    canonical_height_local_breakdown, canonical_height_naive_method, green_arch_with, green_nonarch_exact, BoundedValue,
};
use heightlab::poly::{bad_places, conjugate_to_normal_form};
use heightlab::{Error, NormalForm, Place, PolyQ};
use serde_json::{json, Value};

use crate::config::{Config, Format};
use crate::output::{render, OUTPUT_SCHEMA_VERSION};

/// Residual tolerance for the fixed points and roots used by `normal-form`.
const CONJUGATION_TOL: f64 = 1e-12;

/// What a command produced: the rendered text and whether its assertion held.
pub struct Outcome {
    pub text: String,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Local,
    Naive,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    MinHeight,
    Preimage,
}

impl Experiment {
    fn lemma_id(self) -> &'static str {
        match self {
            Experiment::MinHeight => "min-height",
            Experiment::Preimage => "preimage-proximity",
        }
    }
}

/// Polynomial from coefficient text, or from `--normal-form` when `poly` is
/// absent.
pub fn read_poly(poly: Option<&str>, normal_form: Option<&str>, cfg: &Config) -> Result<PolyQ, Error> {
    let phi = match (poly, normal_form) {
        (Some(p), None) => p.parse::<PolyQ>()?,
        (None, Some(nf)) => nf.parse::<NormalForm>()?.to_poly()?,
        (Some(_), Some(_)) => return Err(Error::Domain("give either a polynomial or --normal-form, not both".into())),
        (None, None) => return Err(Error::Domain("missing polynomial".into())),
    };
    if phi.degree() > cfg.degree_cap {
        return Err(Error::Resource(format!("degree {} exceeds the cap {}", phi.degree(), cfg.degree_cap)));
    }
    Ok(phi)
}

fn bounded(b: &BoundedValue) -> Value {
    json!({"value": b.value, "error": b.error, "lower": b.lower(), "upper": b.upper()})
}

fn header(command: &str) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema_version".into(), json!(OUTPUT_SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m
}

fn done(mut m: serde_json::Map<String, Value>, pass: bool, format: Format) -> Outcome {
    m.insert("pass".into(), json!(pass));
    Outcome { text: render(&Value::Object(m), format), pass }
}

pub fn height(phi: &PolyQ, alpha: &str, method: Method, cfg: &Config) -> Result<Outcome, Error> {
    let alpha = parse_rational(alpha)?;
    let mut m = header("height");
    m.insert("poly".into(), json!(phi.to_string()));
    m.insert("alpha".into(), json!(format_rational(&alpha)));
    m.insert("method".into(), json!(format!("{method:?}").to_lowercase()));
    let mut local = None;
    let mut naive = None;
    if method != Method::Naive {
        let lh = canonical_height_local_breakdown(phi, &alpha, cfg.target_error, &cfg.caps)?;
        m.insert("local".into(), bounded(&lh.total));
        m.insert("places".into(), serde_json::to_value(&lh.places).expect("serialises"));
        local = Some(lh.total);
    }
    if method != Method::Local {
        let b = canonical_height_naive_method(phi, &alpha, cfg.naive_steps)?;
        m.insert("naive".into(), bounded(&b));
        m.insert("naive_steps".into(), json!(cfg.naive_steps));
        naive = Some(b);
    }
    let mut pass = true;
    if let (Some(a), Some(b)) = (local, naive) {
        m.insert("agreement_defect".into(), json!((a.value - b.value).abs()));
        pass = a.intersects(&b);
    }
    Ok(done(m, pass, cfg.format))
}

pub fn green(phi: &PolyQ, z: &str, place: &str, cfg: &Config) -> Result<Outcome, Error> {
    let z = parse_rational(z)?;
    let place: Place = place.parse()?;
    let mut m = header("green");
    m.insert("poly".into(), json!(phi.to_string()));
    m.insert("z".into(), json!(format_rational(&z)));
    m.insert("place".into(), serde_json::to_value(place).expect("serialises"));
    let record = match place {
        Place::Infinite => {
            let (g, rec) = green_arch_with(phi, &z, cfg.target_error, &cfg.caps)?;
            m.insert("value".into(), bounded(&g));
            rec
        }
        Place::Prime(p) => {
            let (enc, rec) = green_nonarch_exact(phi, &z, p, cfg.caps.padic)?;
            m.insert("value".into(), bounded(&enc.to_bounded()));
            m.insert("exact".into(), serde_json::to_value(&enc).expect("serialises"));
            rec
        }
    };
    m.insert("record".into(), serde_json::to_value(&record).expect("serialises"));
    Ok(done(m, true, cfg.format))
}

pub fn normal_form(phi: &PolyQ, cfg: &Config) -> Result<Outcome, Error> {
    let conj = conjugate_to_normal_form(phi, CONJUGATION_TOL)?;
    let mut m = header("normal-form");
    m.insert("poly".into(), json!(phi.to_string()));
    m.insert("normal_form".into(), serde_json::to_value(&conj.normal_form).expect("serialises"));
    m.insert("map".into(), serde_json::to_value(conj.map).expect("serialises"));
    m.insert("exact_poly".into(), json!(conj.exact_poly.as_ref().map(|p| p.to_string())));
    let exact = conj.exact.as_ref().map(|(nf, mu)| json!({"normal_form": nf.to_string(), "map": mu}));
    m.insert("exact".into(), exact.unwrap_or(Value::Null));
    Ok(done(m, true, cfg.format))
}

pub fn bad_places_cmd(phi: &PolyQ, cfg: &Config) -> Result<Outcome, Error> {
    let places = bad_places(phi)?;
    let mut m = header("bad-places");
    m.insert("poly".into(), json!(phi.to_string()));
    m.insert("bad_places".into(), serde_json::to_value(&places).expect("serialises"));
    Ok(done(m, true, cfg.format))
}

/// Spec from a JSON or TOML file (by extension), or the defaults.
pub fn load_spec(path: Option<&Path>) -> Result<SampleSpec, Error> {
    let Some(path) = path else { return Ok(SampleSpec::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| e.to_string())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|message| Error::Parse { input: path.display().to_string(), position: 0, message })
}

fn render_report(report: &LemmaReport, format: Format) -> Result<String, Error> {
    Ok(match format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv()?,
        Format::Text => report.summary(),
    })
}

pub fn verify(lemma_id: &str, spec: &SampleSpec, cfg: &Config) -> Result<Outcome, Error> {
    let report = harness::run_check(lemma_id, spec)?;
    Ok(Outcome { text: render_report(&report, cfg.format)?, pass: report.pass })
}

pub fn experiment(which: Experiment, spec: &SampleSpec, out_dir: &Path, cfg: &Config) -> Result<Outcome, Error> {
    let id = which.lemma_id();
    let report = harness::run_check(id, spec)?;
    std::fs::create_dir_all(out_dir)?;
    let json_path = out_dir.join(format!("{id}.json"));
    let csv_path = out_dir.join(format!("{id}.csv"));
    std::fs::write(&json_path, report.to_json() + "\n")?;
    std::fs::write(&csv_path, report.to_csv()?)?;
    let mut m = header("experiment");
    m.insert("experiment".into(), json!(id));
    m.insert("files".into(), json!([path_str(&json_path), path_str(&csv_path)]));
    m.insert("fitted_constants".into(), serde_json::to_value(&report.fitted_constants).expect("serialises"));
    m.insert("assertion".into(), json!(report.assertion));
    Ok(done(m, report.pass, cfg.format))
}

fn path_str(p: &Path) -> String {
    PathBuf::from(p).display().to_string()
}

/// Recomputes every recorded run and compares it with its fixture, or
/// rewrites the fixtures when regeneration is requested.
pub fn fixtures_cmd(cfg: &Config) -> Result<Outcome, Error> {
    let regen = cfg.fixtures_regen || fixtures::regen_requested();
    let mut m = header("fixtures");
    let mut pass = true;
    let mut rows = serde_json::Map::new();
    for name in fixtures::NAMES {
        let actual = fixtures::run(name)?;
        let outcome = fixtures::compare_or_regen(name, &actual, regen)?;
        pass &= matches!(outcome, FixtureOutcome::Matched | FixtureOutcome::Written);
        rows.insert(name.to_string(), json!(format!("{outcome:?}").to_lowercase()));
    }
    m.insert("dir".into(), json!(path_str(&fixtures::dir())));
    m.insert("fixtures".into(), Value::Object(rows));
    Ok(done(m, pass, cfg.format))
}
