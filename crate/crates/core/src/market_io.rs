//! JSON inputs and CSV outputs.
//!
//! `curves.json`:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "tenor": [0.5, 1.0, 1.5],
//!   "domestic_discounts": [0.99, 0.98, 0.97],
//!   "foreign_discounts": [0.985, 0.97, 0.955],
//!   "spot_fx": 1.1
//! }
//! ```
//!
//! `model.json`:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "regime": "case_i",
//!   "quanto_fixed_fx": 1.0,
//!   "correlation": { "form": "exponential", "beta": 0.5 },
//!   "volatilities": {
//!     "domestic_libor": { "form": "constant", "level": 0.2 },
//!     "foreign": { "form": "rebonato", "a": 0.1, "b": 0.2, "c": 1.0, "d": 0.1 },
//!     "terminal_fx": { "form": "constant", "level": 0.1 }
//!   },
//!   "quadrature": { "rule": "gauss_legendre", "order": 8, "panels": 1 },
//!   "monte_carlo": { "paths": 100000, "steps_per_accrual": 4, "seed": 42 },
//!   "instruments": { "cap_strike": 0.03, "fx_strike": 1.0, "notional": 1.0 }
//! }
//! ```
//!
//! `foreign` is the foreign LIBOR volatility under `case_i` and the foreign
//! bond volatility under `case_ii`. Volatility blocks accept an optional
//! `scales` array with one factor per period. `quadrature`, `monte_carlo` and
//! `instruments` are optional; missing keys take their defaults.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::McConfig;
use crate::modelspec::{validate_config, CorrelationSpec, ModelConfig, Regime, VolSurfaceSpec};
use crate::pricers::PricingResult;
use crate::quadrature::QuadratureConfig;
use crate::termstructure::{CurveSet, Economy, Tenor};

pub const SCHEMA_VERSION: u32 = 1;

pub const RESULTS_HEADER: [&str; 6] = ["instrument", "value", "stderr", "z_score", "diag_key", "diag_value"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub schema_version: u32,
    pub tenor: Vec<f64>,
    pub domestic_discounts: Vec<f64>,
    pub foreign_discounts: Vec<f64>,
    pub spot_fx: f64,
}

impl CurveFile {
    pub fn new(tenor: &Tenor, curves: &CurveSet) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tenor: tenor.dates().to_vec(),
            domestic_discounts: curves.tenor_discounts(Economy::Domestic).to_vec(),
            foreign_discounts: curves.tenor_discounts(Economy::Foreign).to_vec(),
            spot_fx: curves.spot_fx(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Volatilities {
    pub domestic_libor: VolSurfaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub foreign: Option<VolSurfaceSpec>,
    pub terminal_fx: VolSurfaceSpec,
}

/// Default instrument terms used by the command line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstrumentDefaults {
    pub cap_strike: f64,
    pub fx_strike: f64,
    pub notional: f64,
}

impl Default for InstrumentDefaults {
    fn default() -> Self {
        Self {
            cap_strike: 0.03,
            fx_strike: 1.0,
            notional: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub regime: Regime,
    pub quanto_fixed_fx: f64,
    pub correlation: CorrelationSpec,
    pub volatilities: Volatilities,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub monte_carlo: McConfig,
    #[serde(default)]
    pub instruments: InstrumentDefaults,
}

/// A loaded model file: the model itself and its numerical defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSetup {
    pub model: ModelConfig,
    pub quadrature: QuadratureConfig,
    pub monte_carlo: McConfig,
    pub instruments: InstrumentDefaults,
}

impl ModelFile {
    pub fn new(setup: &ModelSetup) -> Self {
        let m = &setup.model;
        Self {
            schema_version: SCHEMA_VERSION,
            regime: m.regime,
            quanto_fixed_fx: m.quanto_fixed_fx,
            correlation: m.correlation,
            volatilities: Volatilities {
                domestic_libor: m.domestic_libor_vol.clone(),
                foreign: m.foreign_vol.clone(),
                terminal_fx: m.terminal_fx_vol.clone(),
            },
            quadrature: setup.quadrature,
            monte_carlo: setup.monte_carlo,
            instruments: setup.instruments,
        }
    }

    pub fn into_setup(self) -> ModelSetup {
        ModelSetup {
            model: ModelConfig {
                regime: self.regime,
                domestic_libor_vol: self.volatilities.domestic_libor,
                foreign_vol: self.volatilities.foreign,
                terminal_fx_vol: self.volatilities.terminal_fx,
                correlation: self.correlation,
                quanto_fixed_fx: self.quanto_fixed_fx,
            },
            quadrature: self.quadrature,
            monte_carlo: self.monte_carlo,
            instruments: self.instruments,
        }
    }
}

/// 1-based line of the first occurrence of `"key"`, or 1.
fn key_line(text: &str, key: &str) -> usize {
    let quoted = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&quoted)).map_or(1, |k| k + 1)
}

fn input_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Input {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn json_error(path: &Path, e: serde_json::Error) -> Error {
    let mut message = e.to_string();
    if let Some(k) = message.rfind(" at line ") {
        message.truncate(k);
    }
    input_error(path, e.line().max(1), message)
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: Option<u32>,
}

/// Parses `text` as `T` after checking the schema version.
fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| json_error(path, e))?;
    match probe.schema_version {
        None => return Err(input_error(path, 1, "missing field `schema_version`")),
        Some(SCHEMA_VERSION) => {}
        Some(found) => {
            return Err(input_error(
                path,
                key_line(text, "schema_version"),
                format!("unsupported schema version {found} (expected {SCHEMA_VERSION})"),
            ))
        }
    }
    serde_json::from_str(text).map_err(|e| json_error(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| input_error(path, 0, e.to_string()))
}

/// Reads and validates a curve file.
pub fn load_curves(path: &Path) -> Result<(Tenor, CurveSet)> {
    let text = read(path)?;
    let file: CurveFile = parse(path, &text)?;
    let tenor = Tenor::new(file.tenor).map_err(|e| input_error(path, key_line(&text, "tenor"), e.to_string()))?;
    let curves = CurveSet::from_tenor(&tenor, file.domestic_discounts, file.foreign_discounts, file.spot_fx)
        .map_err(|e| {
            let message = match e {
                Error::InvalidCurve(m) => m,
                other => other.to_string(),
            };
            let key = if message.starts_with("domestic") {
                "domestic_discounts"
            } else if message.starts_with("foreign") {
                "foreign_discounts"
            } else {
                "spot_fx"
            };
            input_error(path, key_line(&text, key), message)
        })?;
    Ok((tenor, curves))
}

/// File key holding a model field.
fn model_key(field: &str) -> &str {
    let head = field.split('.').next().unwrap_or(field);
    match head {
        "domestic_libor_vol" => "domestic_libor",
        "foreign_vol" => "foreign",
        "terminal_fx_vol" => "terminal_fx",
        "grid" => "correlation",
        other => other,
    }
}

/// Reads a model file and validates it against `tenor`.
pub fn load_model(path: &Path, tenor: &Tenor) -> Result<ModelSetup> {
    let text = read(path)?;
    let file: ModelFile = parse(path, &text)?;
    let setup = file.into_setup();
    let report = validate_config(&setup.model, tenor);
    if let Some(first) = report.violations.first() {
        let line = key_line(&text, model_key(&first.field));
        let message: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(input_error(path, line, message.join("; ")));
    }
    setup
        .quadrature
        .validate()
        .map_err(|e| input_error(path, key_line(&text, "quadrature"), e.to_string()))?;
    setup
        .monte_carlo
        .validate()
        .map_err(|e| input_error(path, key_line(&text, "monte_carlo"), e.to_string()))?;
    Ok(setup)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_curves(path: &Path, tenor: &Tenor, curves: &CurveSet) -> Result<()> {
    write_json(path, &CurveFile::new(tenor, curves))
}

pub fn write_model(path: &Path, setup: &ModelSetup) -> Result<()> {
    write_json(path, &ModelFile::new(setup))
}

/// 17 significant digits; empty for a missing value.
pub fn format_number(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.16e}"))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Renders results as CSV: one row per result with empty diagnostic fields,
/// followed by one row per diagnostic carrying only the instrument name.
pub fn results_csv(results: &[PricingResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULTS_HEADER).map_err(csv_error)?;
    for r in results {
        w.write_record([
            r.instrument.as_str(),
            &format_number(Some(r.value)),
            &format_number(r.stderr),
            &format_number(r.z_score),
            "",
            "",
        ])
        .map_err(csv_error)?;
        for (key, value) in &r.diagnostics {
            w.write_record([r.instrument.as_str(), "", "", "", key, &format_number(Some(*value))])
                .map_err(csv_error)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn write_results(results: &[PricingResult], path: &Path) -> Result<()> {
    write_report(&[], results, path)
}

/// Results preceded by one `run` row per run parameter, key in `diag_key`
/// and value in `diag_value`.
pub fn report_csv(run: &[(String, String)], results: &[PricingResult]) -> Result<String> {
    let body = results_csv(results)?;
    let (header, rest) = body.split_once('\n').unwrap_or((&body, ""));
    let mut w = csv::Writer::from_writer(Vec::new());
    for (key, value) in run {
        w.write_record(["run", "", "", "", key, value]).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let run_rows = String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(format!("{header}\n{run_rows}{rest}"))
}

pub fn write_report(run: &[(String, String)], results: &[PricingResult], path: &Path) -> Result<()> {
    fs::write(path, report_csv(run, results)?)?;
    Ok(())
}

/// One point of a convergence sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergencePoint {
    pub sweep: String,
    pub parameter: f64,
    pub quantity: String,
    pub value: f64,
    pub stderr: Option<f64>,
}

pub fn convergence_csv(points: &[ConvergencePoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sweep", "parameter", "quantity", "value", "stderr"])
        .map_err(csv_error)?;
    for p in points {
        w.write_record([
            p.sweep.as_str(),
            &p.parameter.to_string(),
            &p.quantity,
            &format_number(Some(p.value)),
            &format_number(p.stderr),
        ])
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
}
