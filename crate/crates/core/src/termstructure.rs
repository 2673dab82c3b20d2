//! Tenor grid, time-0 discount curves and the definitional maps between
//! discount factors, simple forward (LIBOR) rates, forward FX and accrual
//! ratios.
//!
//! All times are year fractions measured from the valuation date; day counts
//! and calendars are the caller's business.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which economy a curve or rate belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Economy {
    Domestic,
    Foreign,
}

/// Reset/payment schedule `T_0 < T_1 < ... < T_N`.
///
/// `T_0` is the first reset. Period `i` runs over `[T_i, T_{i+1}]` and has
/// accrual `δ_{i+1} = T_{i+1} - T_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tenor {
    dates: Vec<f64>,
}

impl Tenor {
    pub fn new(dates: Vec<f64>) -> Result<Self> {
        if dates.len() < 2 {
            return Err(Error::InvalidTenor(format!(
                "need at least two dates, got {}",
                dates.len()
            )));
        }
        if let Some(bad) = dates.iter().find(|d| !d.is_finite()) {
            return Err(Error::InvalidTenor(format!("non-finite date {bad}")));
        }
        if dates[0] < 0.0 {
            return Err(Error::InvalidTenor(format!(
                "first reset {} precedes the valuation date",
                dates[0]
            )));
        }
        for (k, w) in dates.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::InvalidTenor(format!(
                    "dates not strictly increasing at index {}",
                    k + 1
                )));
            }
        }
        Ok(Self { dates })
    }

    /// Evenly spaced schedule `first, first + δ, ..., first + periods·δ`.
    pub fn regular(first: f64, accrual: f64, periods: usize) -> Result<Self> {
        Self::new((0..=periods).map(|k| first + accrual * k as f64).collect())
    }

    /// Number of accrual periods `N`.
    pub fn periods(&self) -> usize {
        self.dates.len() - 1
    }

    pub fn dates(&self) -> &[f64] {
        &self.dates
    }

    pub fn date(&self, i: usize) -> Result<f64> {
        self.dates.get(i).copied().ok_or(Error::IndexOutOfRange {
            index: i,
            max: self.periods(),
        })
    }

    /// `δ_{i+1} = T_{i+1} - T_i`, for period `i` in `0..N`.
    pub fn accrual(&self, i: usize) -> Result<f64> {
        self.check_period(i)?;
        Ok(self.dates[i + 1] - self.dates[i])
    }

    pub fn accruals(&self) -> Vec<f64> {
        self.dates.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Start and end of period `i`.
    pub fn period(&self, i: usize) -> Result<(f64, f64)> {
        self.check_period(i)?;
        Ok((self.dates[i], self.dates[i + 1]))
    }

    pub fn first(&self) -> f64 {
        self.dates[0]
    }

    pub fn last(&self) -> f64 {
        self.dates[self.periods()]
    }

    pub(crate) fn check_period(&self, i: usize) -> Result<()> {
        if i >= self.periods() {
            return Err(Error::IndexOutOfRange {
                index: i,
                max: self.periods() - 1,
            });
        }
        Ok(())
    }
}

/// Discount curve `B(0, T)` with log-linear interpolation between pillars.
///
/// The pillar at `T = 0` (value 1) is always present; beyond the last pillar
/// the last continuously-compounded forward rate is extended flat.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscountCurve {
    times: Vec<f64>,
    log_discounts: Vec<f64>,
}

impl DiscountCurve {
    /// Builds a curve from pillars. A pillar at zero, if given, must equal 1.
    pub fn new(times: &[f64], discounts: &[f64]) -> Result<Self> {
        if times.len() != discounts.len() {
            return Err(Error::InvalidCurve(format!(
                "{} pillar times but {} discount factors",
                times.len(),
                discounts.len()
            )));
        }
        let mut t_out = vec![0.0];
        let mut ln_out = vec![0.0];
        for (k, (&t, &b)) in times.iter().zip(discounts).enumerate() {
            if !(b.is_finite() && b > 0.0 && b <= 1.0) {
                return Err(Error::InvalidCurve(format!(
                    "discount factor {b} at index {k} outside (0, 1]"
                )));
            }
            if t == 0.0 {
                if b != 1.0 {
                    return Err(Error::InvalidCurve(format!(
                        "discount factor at time zero must be 1, got {b}"
                    )));
                }
                continue;
            }
            if !(t > *t_out.last().unwrap()) {
                return Err(Error::InvalidCurve(format!(
                    "pillar times not strictly increasing at index {k}"
                )));
            }
            t_out.push(t);
            ln_out.push(b.ln());
        }
        Ok(Self {
            times: t_out,
            log_discounts: ln_out,
        })
    }

    pub fn discount(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t <= 0.0 {
            return 1.0;
        }
        if n == 1 {
            return 1.0;
        }
        let k = self.times.partition_point(|&x| x <= t);
        if k >= n {
            let (t0, t1) = (self.times[n - 2], self.times[n - 1]);
            let (l0, l1) = (self.log_discounts[n - 2], self.log_discounts[n - 1]);
            return (l1 + (l1 - l0) / (t1 - t0) * (t - t1)).exp();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (l0, l1) = (self.log_discounts[k - 1], self.log_discounts[k]);
        let w = (t - t0) / (t1 - t0);
        (l0 + w * (l1 - l0)).exp()
    }
}

/// Time-0 market: domestic and foreign discount curves plus spot FX
/// (domestic units per unit of foreign currency).
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSet {
    domestic: DiscountCurve,
    foreign: DiscountCurve,
    domestic_at_tenor: Vec<f64>,
    foreign_at_tenor: Vec<f64>,
    spot_fx: f64,
}

impl CurveSet {
    /// Curves sampled at the tenor dates. Discounts must be strictly
    /// decreasing across tenor dates so every initial LIBOR is positive.
    pub fn from_tenor(
        tenor: &Tenor,
        domestic: Vec<f64>,
        foreign: Vec<f64>,
        spot_fx: f64,
    ) -> Result<Self> {
        let n = tenor.dates().len();
        for (name, d) in [("domestic", &domestic), ("foreign", &foreign)] {
            if d.len() != n {
                return Err(Error::InvalidCurve(format!(
                    "{name} curve has {} discounts for {n} tenor dates",
                    d.len()
                )));
            }
            check_strictly_decreasing(name, d)?;
        }
        if !(spot_fx.is_finite() && spot_fx > 0.0) {
            return Err(Error::InvalidCurve(format!(
                "spot FX must be positive, got {spot_fx}"
            )));
        }
        Ok(Self {
            domestic: DiscountCurve::new(tenor.dates(), &domestic)?,
            foreign: DiscountCurve::new(tenor.dates(), &foreign)?,
            domestic_at_tenor: domestic,
            foreign_at_tenor: foreign,
            spot_fx,
        })
    }

    pub fn spot_fx(&self) -> f64 {
        self.spot_fx
    }

    pub fn curve(&self, economy: Economy) -> &DiscountCurve {
        match economy {
            Economy::Domestic => &self.domestic,
            Economy::Foreign => &self.foreign,
        }
    }

    /// Discount factors at the tenor dates, as loaded.
    pub fn tenor_discounts(&self, economy: Economy) -> &[f64] {
        match economy {
            Economy::Domestic => &self.domestic_at_tenor,
            Economy::Foreign => &self.foreign_at_tenor,
        }
    }

    pub fn discount(&self, economy: Economy, t: f64) -> f64 {
        self.curve(economy).discount(t)
    }

    /// Initial LIBOR `L(0, T_i)` (or `L_F(0, T_i)`).
    pub fn libor(&self, economy: Economy, tenor: &Tenor, i: usize) -> Result<f64> {
        tenor.check_period(i)?;
        let b = self.tenor_discounts(economy);
        libor_from_discounts(b[i], b[i + 1], tenor.accrual(i)?)
    }

    pub fn libors(&self, economy: Economy, tenor: &Tenor) -> Result<Vec<f64>> {
        (0..tenor.periods())
            .map(|i| self.libor(economy, tenor, i))
            .collect()
    }

    /// Forward exchange rate `X(0, T_i) = B_F(0, T_i) X(0) / B(0, T_i)`.
    pub fn forward_fx(&self, tenor: &Tenor, i: usize) -> Result<f64> {
        if i > tenor.periods() {
            return Err(Error::IndexOutOfRange {
                index: i,
                max: tenor.periods(),
            });
        }
        Ok(self.foreign_at_tenor[i] * self.spot_fx / self.domestic_at_tenor[i])
    }
}

fn check_strictly_decreasing(name: &str, d: &[f64]) -> Result<()> {
    for (k, w) in d.windows(2).enumerate() {
        if w[1] >= w[0] {
            return Err(Error::InvalidCurve(format!(
                "{name} discounts not strictly decreasing at index {}",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Simple forward rate over an accrual period from the bond prices at its
/// two ends: `1 + δL = B(T_i) / B(T_{i+1})`.
pub fn libor_from_discounts(b_start: f64, b_end: f64, accrual: f64) -> Result<f64> {
    if !(accrual > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "accrual must be positive, got {accrual}"
        )));
    }
    if b_start == b_end {
        return Err(Error::InvalidCurve("flat discount pair".into()));
    }
    if b_end > b_start {
        return Err(Error::InvalidCurve(format!(
            "rising discount pair ({b_start} -> {b_end})"
        )));
    }
    Ok((b_start / b_end - 1.0) / accrual)
}

/// `A = δL / (1 + δL)`, the weight linking LIBOR volatility to bond volatility.
pub fn accrual_ratio(rate: f64, accrual: f64) -> Result<f64> {
    let gross = 1.0 + accrual * rate;
    if !(gross > 0.0) {
        return Err(Error::RateExplosion(gross));
    }
    Ok(accrual * rate / gross)
}
