//! Covariance blocks, the telescoped FX-volatility integral and the frozen
//! drift/variance adjustments used by the closed-form pricers.
//!
//! Every quantity is a sum of terms of the form
//! `∫ ds ∫∫ a(s,u) b(s,v) c(u,v) du dv`, where `a` and `b` are "loadings" of
//! a log-rate on the random field. Loadings of LIBOR rates live on their own
//! accrual strip; the terminal FX loading lives on `[s, T_N]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modelspec::{ModelConfig, Regime};
use crate::quadrature::{integrate_kernel_rect, integrate_split, QuadratureConfig};
use crate::termstructure::{accrual_ratio, CurveSet, Economy, Tenor};

/// LIBORs observed at time `t`, held fixed while integrating drift terms.
#[derive(Clone, Debug, PartialEq)]
pub struct FrozenState {
    pub t: f64,
    domestic: Vec<f64>,
    foreign: Vec<f64>,
    accruals: Vec<f64>,
}

impl FrozenState {
    /// Rates may be shorter than the tenor or contain NaN for indices the
    /// caller does not need; asking for those later yields `MissingRate`.
    pub fn new(t: f64, tenor: &Tenor, domestic: Vec<f64>, foreign: Vec<f64>) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidArgument(format!("freezing time {t} must be >= 0")));
        }
        let accruals = tenor.accruals();
        for rates in [&domestic, &foreign] {
            if rates.len() > accruals.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} rates for {} periods",
                    rates.len(),
                    accruals.len()
                )));
            }
            for (l, d) in rates.iter().zip(&accruals) {
                if l.is_finite() {
                    accrual_ratio(*l, *d)?;
                }
            }
        }
        Ok(Self {
            t,
            domestic,
            foreign,
            accruals,
        })
    }

    /// Forward LIBORs implied by the time-0 curves.
    pub fn at_origin(curves: &CurveSet, tenor: &Tenor) -> Result<Self> {
        Self::new(
            0.0,
            tenor,
            curves.libors(Economy::Domestic, tenor)?,
            curves.libors(Economy::Foreign, tenor)?,
        )
    }

    pub fn rate(&self, economy: Economy, j: usize) -> Result<f64> {
        let rates = match economy {
            Economy::Domestic => &self.domestic,
            Economy::Foreign => &self.foreign,
        };
        rates
            .get(j)
            .copied()
            .filter(|l| l.is_finite())
            .ok_or(Error::MissingRate(j))
    }

    pub fn rates(&self, economy: Economy) -> &[f64] {
        match economy {
            Economy::Domestic => &self.domestic,
            Economy::Foreign => &self.foreign,
        }
    }

    /// `A(t, T_j) = δL / (1 + δL)`.
    pub fn a(&self, economy: Economy, j: usize) -> Result<f64> {
        let l = self.rate(economy, j)?;
        let d = self.accruals[j];
        Ok(d * l / (1.0 + d * l))
    }
}

/// Role pair of a covariance block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovBlock {
    DomDom,
    ForFor,
    ForDom,
}

/// A log-quantity's sensitivity to the field, as a function of `(s, u)`.
#[derive(Clone, Copy, Debug)]
enum Loading {
    /// `λ_j`
    Domestic(usize),
    /// Raw foreign surface: `λ_j^F` in case i, `σ_F` in case ii.
    Foreign(usize),
    /// `σ_{X_N}`
    Fx,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AdjustmentRow {
    pub index: usize,
    /// `Ω̃_i` in case i, `γ_i` in case ii.
    pub variance: f64,
    pub variance_error: f64,
    /// `α̃_i` in case i, `β_i` in case ii.
    pub drift: f64,
    pub drift_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdjustmentReport {
    pub t: f64,
    pub regime: Regime,
    pub rows: Vec<AdjustmentRow>,
    /// `γ(t, T_N)`
    pub fx_variance: f64,
    pub fx_variance_error: f64,
}

/// Evaluator of the analytic quantities for one model on one tenor.
#[derive(Clone, Debug)]
pub struct Analytics<'a> {
    tenor: &'a Tenor,
    model: &'a ModelConfig,
    quad: QuadratureConfig,
    /// `quad` with enough panels that the correlation decays by at most a
    /// factor `e` across any panel of a maturity integral.
    kernel_quad: QuadratureConfig,
}

impl<'a> Analytics<'a> {
    pub fn new(tenor: &'a Tenor, model: &'a ModelConfig, quad: QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        model.foreign()?;
        let dates = tenor.dates();
        let widest = dates.windows(2).map(|w| w[1] - w[0]).fold(dates[0], f64::max);
        let needed = (model.correlation.beta() * widest).ceil();
        let kernel_quad = QuadratureConfig {
            panels: quad.panels.max(needed.min(1e4) as usize),
            ..quad
        };
        Ok(Self {
            tenor,
            model,
            quad,
            kernel_quad,
        })
    }

    pub fn with_quad(&self, quad: QuadratureConfig) -> Result<Self> {
        Self::new(self.tenor, self.model, quad)
    }

    pub fn tenor(&self) -> &Tenor {
        self.tenor
    }

    pub fn model(&self) -> &ModelConfig {
        self.model
    }

    fn load(&self, l: Loading, s: f64, u: f64) -> f64 {
        match l {
            Loading::Domestic(j) => self.model.domestic_libor_vol.value(j, s, u),
            Loading::Foreign(j) => self
                .model
                .foreign_vol
                .as_ref()
                .map_or(0.0, |f| f.value(j, s, u)),
            Loading::Fx => self.model.terminal_fx_vol.value(0, s, u),
        }
    }

    fn support(&self, l: Loading, s: f64) -> (f64, f64) {
        let d = self.tenor.dates();
        match l {
            Loading::Domestic(j) | Loading::Foreign(j) => (d[j], d[j + 1]),
            Loading::Fx => (s, self.tenor.last()),
        }
    }

    /// Instantaneous covariance density `∫∫ a(s,u) b(s,v) c(u,v) du dv`.
    fn density(&self, a: Loading, b: Loading, s: f64) -> f64 {
        let corr = &self.model.correlation;
        let f = |u: f64, v: f64| self.load(a, s, u) * self.load(b, s, v) * corr.eval(u, v);
        let mut breaks = self.tenor.dates().to_vec();
        breaks.push(s);
        integrate_kernel_rect(&f, self.support(a, s), self.support(b, s), &breaks, &self.kernel_quad)
    }

    fn over_time<F: Fn(f64) -> f64>(&self, f: F, t: f64, end: f64) -> Result<f64> {
        let value = integrate_split(&f, t, end, self.tenor.dates(), &self.kernel_quad);
        if !value.is_finite() {
            return Err(Error::NonFiniteIntegrand(vec![t, end]));
        }
        Ok(value)
    }

    fn check_time(&self, t: f64, end: f64) -> Result<()> {
        if !(t.is_finite() && t >= 0.0 && t <= end + 1e-12) {
            return Err(Error::InvalidArgument(format!("time {t} not in [0, {end}]")));
        }
        Ok(())
    }

    /// Instantaneous covariance block between the log-LIBORs of periods `i`
    /// and `j`. The foreign role uses the raw foreign surface.
    pub fn lambda_cov(&self, i: usize, j: usize, t: f64, which: CovBlock) -> Result<f64> {
        self.tenor.check_period(i)?;
        self.tenor.check_period(j)?;
        let (a, b) = match which {
            CovBlock::DomDom => (Loading::Domestic(i), Loading::Domestic(j)),
            CovBlock::ForFor => (Loading::Foreign(i), Loading::Foreign(j)),
            CovBlock::ForDom => (Loading::Foreign(i), Loading::Domestic(j)),
        };
        self.check_time(t, self.tenor.dates()[i.min(j)])?;
        Ok(self.density(a, b, t))
    }

    /// `K_i(t, u)`: the `c`-integral of the FX volatility for delivery `T_i`,
    ///
    /// `Σ_{j=i}^{N-1} [∫ b_j(t,v) c(u,v) dv - A_j ∫ λ_j(t,v) c(u,v) dv] + ∫_t^{T_N} σ_{X_N}(t,v) c(u,v) dv`
    ///
    /// with `b_j = A_F,j λ_j^F` in case i and `b_j = σ_F` in case ii, and the
    /// `A`s frozen in `state`.
    pub fn fx_c_integral(&self, i: usize, t: f64, u: f64, state: &FrozenState) -> Result<f64> {
        let n = self.tenor.periods();
        if i > n {
            return Err(Error::IndexOutOfRange { index: i, max: n });
        }
        let dates = self.tenor.dates();
        self.check_time(t, dates[i])?;
        let corr = &self.model.correlation;
        let breaks = [u];
        let line = |l: Loading, (lo, hi): (f64, f64)| {
            integrate_split(|v| self.load(l, t, v) * corr.eval(u, v), lo, hi, &breaks, &self.kernel_quad)
        };
        let mut acc = line(Loading::Fx, (t, self.tenor.last()));
        for j in i..n {
            let strip = (dates[j], dates[j + 1]);
            let w = match self.model.regime {
                Regime::LognormalLibors => state.a(Economy::Foreign, j)?,
                Regime::LognormalFx => 1.0,
            };
            acc += w * line(Loading::Foreign(j), strip);
            acc -= state.a(Economy::Domestic, j)? * line(Loading::Domestic(j), strip);
        }
        Ok(acc)
    }

    /// `∫_t^{T_i}` of the foreign-foreign diagonal block.
    fn foreign_variance(&self, i: usize, t: f64) -> Result<f64> {
        let ti = self.tenor.date(i)?;
        self.tenor.check_period(i)?;
        self.check_time(t, ti)?;
        let l = Loading::Foreign(i);
        self.over_time(|s| self.density(l, l, s), t, ti)
    }

    /// Foreign cross terms of the frozen drift, before any `1/A_F` factor:
    /// `Σ_{j>i} ∫ (w_j ⟨f_i, f_j⟩ - A_j ⟨f_i, d_j⟩) + ∫∫∫_{v ≥ s} f_i σ_X c`,
    /// integrated over `s ∈ [t, T_i]`.
    fn foreign_cross(&self, i: usize, state: &FrozenState) -> Result<f64> {
        let n = self.tenor.periods();
        self.tenor.check_period(i)?;
        let ti = self.tenor.dates()[i];
        self.check_time(state.t, ti)?;
        let mut weights = Vec::with_capacity(n);
        for j in i + 1..n {
            let wf = match self.model.regime {
                Regime::LognormalLibors => state.a(Economy::Foreign, j)?,
                Regime::LognormalFx => 1.0,
            };
            weights.push((j, wf, state.a(Economy::Domestic, j)?));
        }
        let fi = Loading::Foreign(i);
        self.over_time(
            |s| {
                let mut acc = self.density(fi, Loading::Fx, s);
                for &(j, wf, ad) in &weights {
                    acc += wf * self.density(fi, Loading::Foreign(j), s);
                    acc -= ad * self.density(fi, Loading::Domestic(j), s);
                }
                acc
            },
            state.t,
            ti,
        )
    }

    fn foreign_a(&self, i: usize, state: &FrozenState) -> Result<f64> {
        let a = state.a(Economy::Foreign, i)?;
        if a == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "A_F(t, T_{i}) is zero; foreign LIBOR volatility undefined"
            )));
        }
        Ok(a)
    }

    /// `Ω̃_i(t)`: variance of `ln L_F(T_i, T_i)` given time `t` (case i).
    pub fn omega_tilde(&self, i: usize, t: f64) -> Result<f64> {
        self.model.require(Regime::LognormalLibors, "omega_tilde")?;
        self.foreign_variance(i, t)
    }

    /// `α̃_i(t)`: frozen drift adjustment of the foreign LIBOR under the
    /// domestic `T_{i+1}`-forward measure (case i). The expected fixing is
    /// `L_F(t, T_i) e^{-α̃_i}`.
    pub fn alpha_tilde(&self, i: usize, state: &FrozenState) -> Result<f64> {
        self.model.require(Regime::LognormalLibors, "alpha_tilde")?;
        self.foreign_cross(i, state)
    }

    /// `β_i(t)`, the case-ii counterpart of `α̃_i`, with foreign LIBOR
    /// volatility `σ_F / A_F` frozen at `t`.
    pub fn beta_coeff(&self, i: usize, state: &FrozenState) -> Result<f64> {
        self.model.require(Regime::LognormalFx, "beta_coeff")?;
        let a = self.foreign_a(i, state)?;
        Ok(self.foreign_cross(i, state)? / a)
    }

    /// `γ_i(t)`, the case-ii counterpart of `Ω̃_i`.
    pub fn gamma_i(&self, i: usize, state: &FrozenState) -> Result<f64> {
        self.model.require(Regime::LognormalFx, "gamma_i")?;
        let a = self.foreign_a(i, state)?;
        Ok(self.foreign_variance(i, state.t)? / (a * a))
    }

    /// `γ(t, T)`: variance of `ln X(T, T)` for the terminal delivery date.
    /// Only the terminal forward FX has a deterministic volatility in both
    /// regimes, so `T` must equal `T_N` (or `t`, giving zero).
    pub fn gamma_fx(&self, t: f64, big_t: f64) -> Result<f64> {
        let last = self.tenor.last();
        if !(t >= 0.0 && t <= big_t) {
            return Err(Error::InvalidArgument(format!("need 0 <= t <= T, got t = {t}, T = {big_t}")));
        }
        if t == big_t {
            return Ok(0.0);
        }
        if (big_t - last).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "FX variance is available for the terminal date {last} only, got {big_t}"
            )));
        }
        self.over_time(|s| self.density(Loading::Fx, Loading::Fx, s), t, last)
    }

    /// Factor turning the raw foreign surface into the log-LIBOR loading:
    /// 1 in case i, `1/A_F(t, T_i)` in case ii.
    fn foreign_scale(&self, i: usize, state: &FrozenState) -> Result<f64> {
        match self.model.regime {
            Regime::LognormalLibors => Ok(1.0),
            Regime::LognormalFx => Ok(1.0 / self.foreign_a(i, state)?),
        }
    }

    /// Instantaneous drift of `ln L(s, T_i)` under the domestic terminal
    /// measure, with the `A`s frozen in `state`.
    pub fn domestic_drift(&self, i: usize, s: f64, state: &FrozenState) -> Result<f64> {
        let n = self.tenor.periods();
        self.tenor.check_period(i)?;
        let di = Loading::Domestic(i);
        let mut acc = -0.5 * self.density(di, di, s);
        for j in i + 1..n {
            acc -= state.a(Economy::Domestic, j)? * self.density(di, Loading::Domestic(j), s);
        }
        Ok(acc)
    }

    /// Instantaneous drift of `ln L_F(s, T_i)` under the domestic terminal
    /// measure, from the telescoped FX recursion:
    /// `-½⟨e_i,e_i⟩ - Σ_{j>i} ⟨e_i, b_j⟩ - ⟨e_i, σ_{X_N}⟩`.
    pub fn foreign_drift(&self, i: usize, s: f64, state: &FrozenState) -> Result<f64> {
        let n = self.tenor.periods();
        self.tenor.check_period(i)?;
        let k = self.foreign_scale(i, state)?;
        let fi = Loading::Foreign(i);
        let mut acc = -0.5 * k * k * self.density(fi, fi, s) - k * self.density(fi, Loading::Fx, s);
        for j in i + 1..n {
            let w = match self.model.regime {
                Regime::LognormalLibors => state.a(Economy::Foreign, j)?,
                Regime::LognormalFx => 1.0,
            };
            acc -= k * w * self.density(fi, Loading::Foreign(j), s);
        }
        Ok(acc)
    }

    /// Same drift composed from two measure changes: foreign `T_{i+1}` to
    /// domestic `T_{i+1}` through `K_{i+1}`, then domestic `T_{i+1}` to `T_N`.
    pub fn foreign_drift_via_fx(&self, i: usize, s: f64, state: &FrozenState) -> Result<f64> {
        let n = self.tenor.periods();
        self.tenor.check_period(i)?;
        let k = self.foreign_scale(i, state)?;
        let fi = Loading::Foreign(i);
        let dates = self.tenor.dates();
        let mut acc = -0.5 * k * k * self.density(fi, fi, s);
        for j in i + 1..n {
            acc -= k * state.a(Economy::Domestic, j)? * self.density(fi, Loading::Domestic(j), s);
        }
        // ∫ e_i(s,u) K_{i+1}(s,u) du, K evaluated pointwise
        // surfaces any missing rate before the pointwise integrand needs it
        self.fx_c_integral(i + 1, s, dates[i + 1], state)?;
        let cross = integrate_split(
            |u| {
                let kv = self.fx_c_integral(i + 1, s, u, state).unwrap_or(f64::NAN);
                self.load(fi, s, u) * kv
            },
            dates[i],
            dates[i + 1],
            &[],
            &self.quad,
        );
        Ok(acc - k * cross)
    }

    /// Exact covariance over `[t0, t1]` of the Gaussian increments driving
    /// the simulated state `[D_0..D_{N-1}, F_0..F_{N-1}, X]`, row-major.
    /// Rows not flagged in `alive` are left at zero.
    pub(crate) fn step_covariance(&self, t0: f64, t1: f64, alive: &[bool]) -> Result<Vec<f64>> {
        let n = self.tenor.periods();
        let rows = 2 * n + 1;
        let loading = |r: usize| {
            if r < n {
                Loading::Domestic(r)
            } else if r < 2 * n {
                Loading::Foreign(r - n)
            } else {
                Loading::Fx
            }
        };
        let pairs: Vec<(usize, usize)> = (0..rows)
            .flat_map(|a| (a..rows).map(move |b| (a, b)))
            .filter(|&(a, b)| alive[a] && alive[b])
            .collect();
        let values = pairs
            .par_iter()
            .map(|&(a, b)| self.over_time(|s| self.density(loading(a), loading(b), s), t0, t1))
            .collect::<Result<Vec<_>>>()?;
        let mut m = vec![0.0; rows * rows];
        for (&(a, b), v) in pairs.iter().zip(values) {
            m[a * rows + b] = v;
            m[b * rows + a] = v;
        }
        Ok(m)
    }

    /// Drift and variance adjustments for every period still to fix at
    /// `state.t`, each with a panel-doubling error estimate.
    pub fn adjustments(&self, state: &FrozenState) -> Result<AdjustmentReport> {
        let fine = self.with_quad(self.quad.refined())?;
        let dates = self.tenor.dates();
        let live: Vec<usize> = (0..self.tenor.periods())
            .filter(|&i| dates[i] >= state.t)
            .collect();
        let rows = live
            .par_iter()
            .map(|&i| -> Result<AdjustmentRow> {
                let (v, vf, d, df) = match self.model.regime {
                    Regime::LognormalLibors => (
                        self.omega_tilde(i, state.t)?,
                        fine.omega_tilde(i, state.t)?,
                        self.alpha_tilde(i, state)?,
                        fine.alpha_tilde(i, state)?,
                    ),
                    Regime::LognormalFx => (
                        self.gamma_i(i, state)?,
                        fine.gamma_i(i, state)?,
                        self.beta_coeff(i, state)?,
                        fine.beta_coeff(i, state)?,
                    ),
                };
                Ok(AdjustmentRow {
                    index: i,
                    variance: v,
                    variance_error: (vf - v).abs(),
                    drift: d,
                    drift_error: (df - d).abs(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let last = self.tenor.last();
        let g = self.gamma_fx(state.t, last)?;
        let gf = fine.gamma_fx(state.t, last)?;
        Ok(AdjustmentReport {
            t: state.t,
            regime: self.model.regime,
            rows,
            fx_variance: g,
            fx_variance_error: (gf - g).abs(),
        })
    }
}
