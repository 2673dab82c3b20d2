//! Closed-form prices: quanto caplets and caps in both regimes, the
//! float-for-float cross-currency swap and the FX call on the terminal date.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::analytics::{Analytics, FrozenState};
use crate::error::{Error, Result};
use crate::modelspec::{ModelConfig, Regime};
use crate::quadrature::QuadratureConfig;
use crate::termstructure::{CurveSet, Economy, Tenor};

/// Standard normal distribution function.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Value of the lognormal call expectation together with its `d₁`, `d₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CallTerms {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// `E[(F e^{-a} e^{G - v/2} - k)^+]` with `G ~ N(0, v)`.
pub fn lognormal_call_terms(forward: f64, strike: f64, drift_adj: f64, variance: f64) -> Result<CallTerms> {
    if !(forward.is_finite() && forward > 0.0) {
        return Err(Error::InvalidArgument(format!("forward {forward} must be positive")));
    }
    if !(variance.is_finite() && variance >= 0.0) {
        return Err(Error::InvalidArgument(format!("variance {variance} must be >= 0")));
    }
    if !(strike.is_finite() && drift_adj.is_finite()) {
        return Err(Error::InvalidArgument("non-finite strike or adjustment".into()));
    }
    let adjusted = forward * (-drift_adj).exp();
    if strike <= 0.0 {
        return Ok(CallTerms {
            value: adjusted - strike,
            d1: f64::INFINITY,
            d2: f64::INFINITY,
        });
    }
    if variance == 0.0 {
        let m = adjusted - strike;
        let d = if m > 0.0 {
            f64::INFINITY
        } else if m < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        return Ok(CallTerms {
            value: m.max(0.0),
            d1: d,
            d2: d,
        });
    }
    let sd = variance.sqrt();
    let d1 = ((adjusted / strike).ln() + 0.5 * variance) / sd;
    let d2 = d1 - sd;
    Ok(CallTerms {
        value: adjusted * normal_cdf(d1) - strike * normal_cdf(d2),
        d1,
        d2,
    })
}

pub fn lognormal_call_core(forward: f64, strike: f64, drift_adj: f64, variance: f64) -> Result<f64> {
    Ok(lognormal_call_terms(forward, strike, drift_adj, variance)?.value)
}

/// Observable market at the valuation time: frozen LIBORs, discount factors
/// to every tenor date and the spot exchange rate.
#[derive(Clone, Debug, PartialEq)]
pub struct MarketState {
    pub frozen: FrozenState,
    /// `B(t, T_j)`, `j = 0..=N`; entries for past dates are ignored.
    pub discounts: Vec<f64>,
    /// `B_F(t, T_j)`.
    pub foreign_discounts: Vec<f64>,
    /// `X(t)`, domestic units per foreign unit.
    pub spot_fx: f64,
}

impl MarketState {
    /// Assembles a state from parts. Consistency between the frozen LIBORs
    /// and the discount factors is the caller's responsibility.
    pub fn from_parts(
        frozen: FrozenState,
        tenor: &Tenor,
        discounts: Vec<f64>,
        foreign_discounts: Vec<f64>,
        spot_fx: f64,
    ) -> Result<Self> {
        let n = tenor.periods() + 1;
        if discounts.len() != n || foreign_discounts.len() != n {
            return Err(Error::InvalidArgument(format!(
                "need {n} discount factors per economy, got {} and {}",
                discounts.len(),
                foreign_discounts.len()
            )));
        }
        if discounts.iter().chain(&foreign_discounts).any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::InvalidArgument("discount factors must be positive".into()));
        }
        if !(spot_fx.is_finite() && spot_fx > 0.0) {
            return Err(Error::InvalidArgument(format!("spot FX {spot_fx} must be positive")));
        }
        Ok(Self {
            frozen,
            discounts,
            foreign_discounts,
            spot_fx,
        })
    }

    /// Time-0 state implied by the curves.
    pub fn at_origin(curves: &CurveSet, tenor: &Tenor) -> Result<Self> {
        Self::from_parts(
            FrozenState::at_origin(curves, tenor)?,
            tenor,
            curves.tenor_discounts(Economy::Domestic).to_vec(),
            curves.tenor_discounts(Economy::Foreign).to_vec(),
            curves.spot_fx(),
        )
    }

    pub fn t(&self) -> f64 {
        self.frozen.t
    }

    /// `X(t, T_j) = X(t) B_F(t, T_j) / B(t, T_j)`.
    pub fn forward_fx(&self, j: usize) -> f64 {
        self.spot_fx * self.foreign_discounts[j] / self.discounts[j]
    }
}

/// Everything a pricer needs.
#[derive(Clone, Debug)]
pub struct PricingContext {
    pub tenor: Tenor,
    pub model: ModelConfig,
    pub market: MarketState,
    pub quad: QuadratureConfig,
}

impl PricingContext {
    pub fn new(tenor: Tenor, model: ModelConfig, market: MarketState, quad: QuadratureConfig) -> Self {
        Self {
            tenor,
            model,
            market,
            quad,
        }
    }

    pub fn analytics(&self) -> Result<Analytics<'_>> {
        Analytics::new(&self.tenor, &self.model, self.quad)
    }

    pub fn with_model(&self, model: ModelConfig) -> Self {
        Self {
            model,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantoCapSpec {
    pub strike: f64,
    /// `X̄`
    pub fixed_fx: f64,
    pub notional: f64,
    /// Multiply case-ii caplets by `X̄`; on by default.
    pub apply_fixed_fx: bool,
}

impl QuantoCapSpec {
    pub fn new(strike: f64, fixed_fx: f64) -> Self {
        Self {
            strike,
            fixed_fx,
            notional: 1.0,
            apply_fixed_fx: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.strike.is_finite() && self.strike >= 0.0) {
            return Err(Error::InvalidArgument(format!("cap strike {} must be >= 0", self.strike)));
        }
        if !(self.fixed_fx.is_finite() && self.fixed_fx > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "fixed exchange rate {} must be positive",
                self.fixed_fx
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FxOptionSpec {
    pub expiry: f64,
    pub strike: f64,
    pub notional: f64,
}

/// Instruments with both a closed form and a Monte Carlo payoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Instrument {
    QuantoCap,
    QuantoCapFx,
    Ccs,
    FxOption,
}

impl Instrument {
    pub const ALL: [Instrument; 4] = [
        Instrument::QuantoCap,
        Instrument::QuantoCapFx,
        Instrument::Ccs,
        Instrument::FxOption,
    ];

    pub fn token(&self) -> &'static str {
        match self {
            Instrument::QuantoCap => "quanto-cap",
            Instrument::QuantoCapFx => "quanto-cap-fx",
            Instrument::Ccs => "ccs",
            Instrument::FxOption => "fx-option",
        }
    }
}

impl fmt::Display for Instrument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Instrument {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Instrument::ALL
            .into_iter()
            .find(|i| i.token() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Instrument::ALL.iter().map(|i| i.token()).collect();
                format!("unknown instrument '{s}' (expected one of: {})", names.join(", "))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PricingResult {
    pub instrument: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub z_score: Option<f64>,
    pub diagnostics: Vec<(String, f64)>,
}

impl PricingResult {
    pub fn analytic(instrument: impl Into<String>, value: f64) -> Self {
        Self {
            instrument: instrument.into(),
            value,
            stderr: None,
            z_score: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn diag(&mut self, key: impl Into<String>, value: f64) {
        self.diagnostics.push((key.into(), value));
    }

    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

fn check_live(ctx: &PricingContext, i: usize) -> Result<()> {
    ctx.tenor.check_period(i)?;
    let ti = ctx.tenor.dates()[i];
    if ctx.market.t() > ti {
        return Err(Error::InvalidArgument(format!(
            "period {i} fixed at {ti}, before the valuation time {}",
            ctx.market.t()
        )));
    }
    Ok(())
}

/// One caplet from its adjustments: `δ X̄ B(t,T_{i+1}) · core(L_F, κ, adj, var)`.
fn caplet_from(
    ctx: &PricingContext,
    spec: &QuantoCapSpec,
    i: usize,
    adj: f64,
    var: f64,
    fixed_fx: f64,
) -> Result<(f64, CallTerms)> {
    let lf = ctx.market.frozen.rate(Economy::Foreign, i)?;
    let delta = ctx.tenor.accrual(i)?;
    let terms = lognormal_call_terms(lf, spec.strike, adj, var)?;
    let value = spec.notional * delta * fixed_fx * ctx.market.discounts[i + 1] * terms.value;
    Ok((value, terms))
}

/// Quanto caplet on period `i` when both LIBOR families are lognormal.
pub fn quanto_caplet(i: usize, spec: &QuantoCapSpec, ctx: &PricingContext) -> Result<PricingResult> {
    ctx.model.require(Regime::LognormalLibors, "quanto_caplet")?;
    spec.validate()?;
    check_live(ctx, i)?;
    let an = ctx.analytics()?;
    let alpha = an.alpha_tilde(i, &ctx.market.frozen)?;
    let omega = an.omega_tilde(i, ctx.market.t())?;
    let (value, terms) = caplet_from(ctx, spec, i, alpha, omega, spec.fixed_fx)?;
    let mut out = PricingResult::analytic(format!("quanto_caplet_{i}"), value);
    out.diag("alpha", alpha);
    out.diag("omega", omega);
    out.diag("d1", terms.d1);
    out.diag("d2", terms.d2);
    Ok(out)
}

fn cap_from_report(
    name: &str,
    spec: &QuantoCapSpec,
    ctx: &PricingContext,
    fixed_fx: f64,
    drift_key: &str,
    var_key: &str,
) -> Result<PricingResult> {
    spec.validate()?;
    for i in 0..ctx.tenor.periods() {
        check_live(ctx, i)?;
    }
    let report = ctx.analytics()?.adjustments(&ctx.market.frozen)?;
    let mut out = PricingResult::analytic(name, 0.0);
    let mut total = 0.0;
    for row in &report.rows {
        let i = row.index;
        let (value, terms) = caplet_from(ctx, spec, i, row.drift, row.variance, fixed_fx)?;
        total += value;
        out.diag(format!("caplet_{i}"), value);
        out.diag(format!("{drift_key}_{i}"), row.drift);
        out.diag(format!("{var_key}_{i}"), row.variance);
        out.diag(format!("d1_{i}"), terms.d1);
        out.diag(format!("d2_{i}"), terms.d2);
        out.diag(format!("quad_err_{i}"), row.drift_error.max(row.variance_error));
    }
    out.value = total;
    Ok(out)
}

/// Quanto cap (sum of caplets over every period) in case i.
pub fn quanto_cap(spec: &QuantoCapSpec, ctx: &PricingContext) -> Result<PricingResult> {
    ctx.model.require(Regime::LognormalLibors, "quanto_cap")?;
    cap_from_report("quanto_cap", spec, ctx, spec.fixed_fx, "alpha", "omega")
}

/// Quanto cap in case ii, where the forward FX rates are lognormal and the
/// foreign LIBOR volatility is frozen at `σ_F / A_F`.
pub fn quanto_cap_fx_lognormal(spec: &QuantoCapSpec, ctx: &PricingContext) -> Result<PricingResult> {
    ctx.model.require(Regime::LognormalFx, "quanto_cap_fx_lognormal")?;
    let fixed_fx = if spec.apply_fixed_fx { spec.fixed_fx } else { 1.0 };
    cap_from_report("quanto_cap_fx", spec, ctx, fixed_fx, "beta", "gamma")
}

/// Float-for-float cross-currency swap, both legs paid in domestic currency:
/// receive `δ L_F`, pay `δ L` per period.
pub fn ccs_price(ctx: &PricingContext, notional: f64) -> Result<PricingResult> {
    let t = ctx.market.t();
    if t > ctx.tenor.first() {
        return Err(Error::InvalidArgument(format!(
            "swap starts at {}, before the valuation time {t}",
            ctx.tenor.first()
        )));
    }
    let an = ctx.analytics()?;
    let state = &ctx.market.frozen;
    let mut out = PricingResult::analytic("ccs", 0.0);
    let mut total = 0.0;
    for i in 0..ctx.tenor.periods() {
        let adj = match ctx.model.regime {
            Regime::LognormalLibors => an.alpha_tilde(i, state)?,
            Regime::LognormalFx => an.beta_coeff(i, state)?,
        };
        let lf = state.rate(Economy::Foreign, i)?;
        let l = state.rate(Economy::Domestic, i)?;
        let leg = notional
            * ctx.tenor.accrual(i)?
            * ctx.market.discounts[i + 1]
            * (lf * (-adj).exp() - l);
        total += leg;
        out.diag(format!("period_{i}"), leg);
        out.diag(format!("adjustment_{i}"), adj);
    }
    out.value = total;
    Ok(out)
}

/// Call on the spot exchange rate at the terminal tenor date. Exact: the
/// terminal forward FX is lognormal in both regimes.
pub fn fx_call(spec: &FxOptionSpec, ctx: &PricingContext) -> Result<PricingResult> {
    if !(spec.strike.is_finite() && spec.strike > 0.0) {
        return Err(Error::InvalidArgument(format!("FX strike {} must be positive", spec.strike)));
    }
    let n = ctx.tenor.periods();
    let t = ctx.market.t();
    if (spec.expiry - ctx.tenor.last()).abs() > 1e-12 || spec.expiry <= t {
        return Err(Error::InvalidArgument(format!(
            "FX option expiry {} must be the terminal date {} and after {t}",
            spec.expiry,
            ctx.tenor.last()
        )));
    }
    let gamma = ctx.analytics()?.gamma_fx(t, ctx.tenor.last())?;
    let forward = ctx.market.forward_fx(n);
    let terms = lognormal_call_terms(forward, spec.strike, 0.0, gamma)?;
    let value = spec.notional * ctx.market.discounts[n] * terms.value;
    let mut out = PricingResult::analytic("fx_call", value);
    out.diag("forward_fx", forward);
    out.diag("gamma", gamma);
    out.diag("d1", terms.d1);
    out.diag("d2", terms.d2);
    Ok(out)
}

/// Closed-form price of `instrument` with the given strike (rate strike for
/// caps, FX strike for the option; ignored by the swap).
pub fn price_instrument(
    instrument: Instrument,
    strike: f64,
    notional: f64,
    ctx: &PricingContext,
) -> Result<PricingResult> {
    let cap = QuantoCapSpec {
        notional,
        ..QuantoCapSpec::new(strike, ctx.model.quanto_fixed_fx)
    };
    match instrument {
        Instrument::QuantoCap => quanto_cap(&cap, ctx),
        Instrument::QuantoCapFx => quanto_cap_fx_lognormal(&cap, ctx),
        Instrument::Ccs => ccs_price(ctx, notional),
        Instrument::FxOption => fx_call(
            &FxOptionSpec {
                expiry: ctx.tenor.last(),
                strike,
                notional,
            },
            ctx,
        ),
    }
}
