//! Deterministic model inputs: the field correlation function, parametric
//! volatility surfaces for each role, the regime selector and the quanto
//! conversion rate, plus validation of a whole configuration.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{McConfig, SimulationGrid};
use crate::termstructure::{Economy, Tenor};

/// Instantaneous correlation `c(u, v)` between field increments at
/// maturities `u` and `v`. One function drives domestic, foreign and
/// cross-economy increments alike.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorrelationSpec {
    /// `exp(-β|u - v|)`
    Exponential { beta: f64 },
    /// `ρ∞ + (1 - ρ∞) exp(-β|u - v|)`
    ExponentialWithFloor { beta: f64, floor: f64 },
}

impl CorrelationSpec {
    #[inline]
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match *self {
            CorrelationSpec::Exponential { beta } => (-beta * (u - v).abs()).exp(),
            CorrelationSpec::ExponentialWithFloor { beta, floor } => {
                floor + (1.0 - floor) * (-beta * (u - v).abs()).exp()
            }
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            CorrelationSpec::Exponential { beta } => beta,
            CorrelationSpec::ExponentialWithFloor { beta, .. } => beta,
        }
    }

    fn violations(&self, out: &mut Vec<Violation>) {
        let beta = self.beta();
        if !(beta.is_finite() && beta >= 0.0) {
            out.push(Violation::new("correlation.beta", format!("decay must be finite and >= 0, got {beta}")));
        }
        if let CorrelationSpec::ExponentialWithFloor { floor, .. } = *self {
            if !(0.0..1.0).contains(&floor) {
                out.push(Violation::new("correlation.floor", format!("floor must lie in [0, 1), got {floor}")));
            }
        }
    }
}

pub fn eval_corr(spec: &CorrelationSpec, u: f64, v: f64) -> f64 {
    spec.eval(u, v)
}

/// Shape `g(τ)` of a volatility surface in time to maturity `τ = u - t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum VolShape {
    Constant { level: f64 },
    /// `(a + bτ) e^{-cτ} + d`
    Rebonato { a: f64, b: f64, c: f64, d: f64 },
}

impl VolShape {
    #[inline]
    pub fn at(&self, tau: f64) -> f64 {
        match *self {
            VolShape::Constant { level } => level,
            VolShape::Rebonato { a, b, c, d } => (a + b * tau) * (-c * tau).exp() + d,
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            VolShape::Constant { level } => vec![level],
            VolShape::Rebonato { a, b, c, d } => vec![a, b, c, d],
        }
    }

    /// Smallest value of the shape on `[0, horizon]`, from a dense sample
    /// plus the stationary point of the hump.
    fn min_on(&self, horizon: f64) -> f64 {
        let mut taus: Vec<f64> = (0..=2000).map(|k| horizon * k as f64 / 2000.0).collect();
        if let VolShape::Rebonato { a, b, c, .. } = *self {
            if b != 0.0 && c > 0.0 {
                let star = 1.0 / c - a / b;
                if star > 0.0 && star < horizon {
                    taus.push(star);
                }
            }
        }
        taus.into_iter().map(|t| self.at(t)).fold(f64::INFINITY, f64::min)
    }
}

/// Volatility `φ_i · g(u - t)` of the rate with tenor index `i` with respect
/// to the field increment at maturity `u`, observed at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolSurfaceSpec {
    #[serde(flatten)]
    pub shape: VolShape,
    /// Per-index scale factors; empty means 1 everywhere.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scales: Vec<f64>,
}

impl VolSurfaceSpec {
    pub fn constant(level: f64) -> Self {
        Self {
            shape: VolShape::Constant { level },
            scales: Vec::new(),
        }
    }

    pub fn rebonato(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self {
            shape: VolShape::Rebonato { a, b, c, d },
            scales: Vec::new(),
        }
    }

    pub fn with_scales(mut self, scales: Vec<f64>) -> Self {
        self.scales = scales;
        self
    }

    /// Multiplies every level parameter by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let shape = match self.shape {
            VolShape::Constant { level } => VolShape::Constant { level: k * level },
            VolShape::Rebonato { a, b, c, d } => VolShape::Rebonato {
                a: k * a,
                b: k * b,
                c,
                d: k * d,
            },
        };
        Self {
            shape,
            scales: self.scales.clone(),
        }
    }

    #[inline]
    pub fn scale(&self, i: usize) -> f64 {
        if self.scales.is_empty() {
            1.0
        } else {
            self.scales.get(i).copied().unwrap_or(1.0)
        }
    }

    /// Unchecked evaluation for callers that already know `t <= u`.
    #[inline]
    pub fn value(&self, i: usize, t: f64, u: f64) -> f64 {
        self.scale(i) * self.shape.at(u - t)
    }

    pub fn eval(&self, i: usize, t: f64, u: f64) -> Result<f64> {
        if t > u {
            return Err(Error::InvalidArgument(format!(
                "volatility observed at t = {t} after maturity u = {u}"
            )));
        }
        if !self.scales.is_empty() && i >= self.scales.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                max: self.scales.len() - 1,
            });
        }
        Ok(self.value(i, t, u))
    }

    fn violations(&self, field: &str, expected_scales: &[usize], horizon: f64, out: &mut Vec<Violation>) {
        if self.shape.params().iter().any(|p| !p.is_finite()) {
            out.push(Violation::new(field, "non-finite parameter"));
            return;
        }
        if let VolShape::Rebonato { c, .. } = self.shape {
            if c < 0.0 {
                out.push(Violation::new(field, format!("decay c must be >= 0, got {c}")));
            }
        }
        let min = self.shape.min_on(horizon);
        if min < 0.0 {
            out.push(Violation::new(
                field,
                format!("negative volatility {min:e} on time-to-maturity range [0, {horizon}]"),
            ));
        }
        if !self.scales.is_empty() && !expected_scales.contains(&self.scales.len()) {
            out.push(Violation::new(
                field,
                format!("{} scale factors, expected {:?}", self.scales.len(), expected_scales),
            ));
        }
        if let Some(bad) = self.scales.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            out.push(Violation::new(field, format!("scale factor {bad} must be finite and >= 0")));
        }
    }
}

pub fn eval_vol(spec: &VolSurfaceSpec, i: usize, t: f64, u: f64) -> Result<f64> {
    spec.eval(i, t, u)
}

/// Which rates are lognormal. Both cannot hold at once for every maturity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Domestic and foreign LIBORs lognormal; only the terminal forward FX
    /// volatility is deterministic.
    #[serde(rename = "case_i")]
    LognormalLibors,
    /// Domestic LIBORs and forward FX lognormal; the foreign bond volatility
    /// `σ_F` is deterministic and foreign LIBOR volatility is `σ_F / A_F`.
    #[serde(rename = "case_ii")]
    LognormalFx,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::LognormalLibors => "case_i",
            Regime::LognormalFx => "case_ii",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [Regime::LognormalLibors, Regime::LognormalFx]
            .into_iter()
            .find(|r| r.label() == s)
            .ok_or_else(|| format!("unknown regime '{s}' (expected one of: case_i, case_ii)"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub regime: Regime,
    /// `λ_i`
    pub domestic_libor_vol: VolSurfaceSpec,
    /// `λ_i^F` in case i, `σ_F` in case ii.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub foreign_vol: Option<VolSurfaceSpec>,
    /// `σ_{X_N}`, volatility of the terminal forward exchange rate.
    pub terminal_fx_vol: VolSurfaceSpec,
    pub correlation: CorrelationSpec,
    /// `X̄`, domestic units paid per unit of foreign rate payoff.
    pub quanto_fixed_fx: f64,
}

impl ModelConfig {
    pub fn foreign(&self) -> Result<&VolSurfaceSpec> {
        self.foreign_vol
            .as_ref()
            .ok_or_else(|| Error::InvalidModel("missing foreign volatility".into()))
    }

    pub fn vol_for(&self, economy: Economy) -> Result<&VolSurfaceSpec> {
        match economy {
            Economy::Domestic => Ok(&self.domestic_libor_vol),
            Economy::Foreign => self.foreign(),
        }
    }

    /// LIBOR-level volatility of period `i`. Only defined on its own strip
    /// `u ∈ [T_i, T_{i+1}]`.
    pub fn libor_vol(&self, economy: Economy, tenor: &Tenor, i: usize, t: f64, u: f64) -> Result<f64> {
        let (lo, hi) = tenor.period(i)?;
        if u < lo || u > hi {
            return Err(Error::InvalidArgument(format!(
                "maturity {u} outside the strip [{lo}, {hi}] of period {i}"
            )));
        }
        self.vol_for(economy)?.eval(i, t, u)
    }

    pub fn require(&self, regime: Regime, operation: &'static str) -> Result<()> {
        if self.regime != regime {
            return Err(Error::RegimeMismatch {
                operation,
                expected: regime.label(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            return Ok(());
        }
        let msg: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        Err(Error::InvalidModel(msg.join("; ")))
    }
}

/// Range, symmetry, unit diagonal and numerical PSD checks on a correlation
/// matrix.
pub fn check_correlation_matrix(c: &DMatrix<f64>) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = c.nrows();
    if c.ncols() != n {
        out.push(Violation::new("correlation", "matrix is not square"));
        return out;
    }
    for j in 0..n {
        for k in 0..n {
            let x = c[(j, k)];
            if !x.is_finite() || x.abs() > 1.0 + 1e-14 {
                out.push(Violation::new(
                    "correlation",
                    format!("entry ({j}, {k}) = {x} outside [-1, 1]"),
                ));
                return out;
            }
            if (x - c[(k, j)]).abs() > 1e-14 {
                out.push(Violation::new("correlation", format!("matrix not symmetric at ({j}, {k})")));
                return out;
            }
        }
        if c[(j, j)] != 1.0 {
            out.push(Violation::new("correlation", format!("diagonal entry {j} is {}", c[(j, j)])));
            return out;
        }
    }
    let min = c.clone().symmetric_eigen().eigenvalues.min();
    if min < -1e-10 {
        out.push(Violation::new(
            "correlation",
            format!("matrix not positive semidefinite, minimum eigenvalue {min:e}"),
        ));
    }
    out
}

pub fn correlation_matrix(spec: &CorrelationSpec, grid: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(grid.len(), grid.len(), |j, k| spec.eval(grid[j], grid[k]))
}

/// Checks every invariant of a configuration against a tenor, including
/// positive semidefiniteness of the correlation on the default Monte Carlo
/// maturity grid.
pub fn validate_config(cfg: &ModelConfig, tenor: &Tenor) -> ValidationReport {
    let mut v = Vec::new();
    let n = tenor.periods();
    let horizon = tenor.last();
    if !(cfg.quanto_fixed_fx.is_finite() && cfg.quanto_fixed_fx > 0.0) {
        v.push(Violation::new(
            "quanto_fixed_fx",
            format!("must be positive, got {}", cfg.quanto_fixed_fx),
        ));
    }
    cfg.correlation.violations(&mut v);
    cfg.domestic_libor_vol
        .violations("domestic_libor_vol", &[n], horizon, &mut v);
    match &cfg.foreign_vol {
        Some(f) => f.violations("foreign_vol", &[n], horizon, &mut v),
        None => v.push(Violation::new("foreign_vol", "missing foreign volatility")),
    }
    cfg.terminal_fx_vol
        .violations("terminal_fx_vol", &[1], horizon, &mut v);

    if v.iter().all(|x| !x.field.starts_with("correlation")) {
        let mc = McConfig::default();
        match SimulationGrid::new(tenor, mc.steps_per_accrual, mc.nodes_per_step()) {
            Ok(grid) => v.extend(check_correlation_matrix(&correlation_matrix(
                &cfg.correlation,
                grid.nodes(),
            ))),
            Err(e) => v.push(Violation::new("grid", e.to_string())),
        }
    }
    ValidationReport { violations: v }
}
