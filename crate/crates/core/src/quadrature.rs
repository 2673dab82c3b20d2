//! Tensor-product quadrature on boxes and on "moving-limit" prisms.
//!
//! Every adjustment term of the model is a nested integral of volatility
//! products against the field correlation `c(u, v)`. The correlation
//! functions in use have a derivative kink on the diagonal `u = v`, which
//! wrecks the convergence of plain tensor rules; [`integrate_kernel_rect`]
//! splits any square that straddles the diagonal into two triangles so the
//! integrand is smooth on every piece.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    GaussLegendre,
    CompositeTrapezoid,
}

/// Per-axis rule: `order` points on each of `panels` equal panels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rule: Rule,
    pub order: usize,
    pub panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rule: Rule::GaussLegendre,
            order: 8,
            panels: 1,
        }
    }
}

impl QuadratureConfig {
    pub fn gauss(order: usize) -> Self {
        Self {
            rule: Rule::GaussLegendre,
            order,
            panels: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 || self.panels < 1 {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs order >= 2 and panels >= 1, got order {} panels {}",
                self.order, self.panels
            )));
        }
        Ok(())
    }

    /// Same rule with twice the panels.
    pub fn refined(&self) -> Self {
        Self {
            panels: self.panels * 2,
            ..*self
        }
    }

    /// Nodes and weights for `[a, b]`.
    pub fn nodes(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.order * self.panels);
        if b <= a {
            return out;
        }
        let h = (b - a) / self.panels as f64;
        match self.rule {
            Rule::GaussLegendre => {
                let (x, w) = gauss_legendre(self.order);
                for p in 0..self.panels {
                    let lo = a + h * p as f64;
                    for (xi, wi) in x.iter().zip(&w) {
                        out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
                    }
                }
            }
            Rule::CompositeTrapezoid => {
                let m = self.order - 1;
                let dx = h / m as f64;
                for p in 0..self.panels {
                    let lo = a + h * p as f64;
                    for k in 0..=m {
                        let w = if k == 0 || k == m { 0.5 * dx } else { dx };
                        out.push((lo + dx * k as f64, w));
                    }
                }
            }
        }
        out
    }
}

/// Value with an advisory error estimate `|refined - coarse|` from one panel
/// doubling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn checked(v: f64, at: &[f64]) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteIntegrand(at.to_vec()))
    }
}

/// One-dimensional integral, value only.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    let mut acc = 0.0;
    for (x, w) in cfg.nodes(a, b) {
        acc += w * checked(f(x), &[x])?;
    }
    Ok(acc)
}

fn box2_value<F: Fn(f64, f64) -> f64>(
    f: &F,
    u: (f64, f64),
    v: (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let vn = cfg.nodes(v.0, v.1);
    let mut acc = 0.0;
    for (x, wx) in cfg.nodes(u.0, u.1) {
        let mut inner = 0.0;
        for &(y, wy) in &vn {
            inner += wy * checked(f(x, y), &[x, y])?;
        }
        acc += wx * inner;
    }
    Ok(acc)
}

fn box3_value<F: Fn(f64, f64, f64) -> f64>(
    f: &F,
    s: (f64, f64),
    u: (f64, f64),
    v: (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let mut acc = 0.0;
    for (x, wx) in cfg.nodes(s.0, s.1) {
        acc += wx * box2_value(&|a, b| f(x, a, b), u, v, cfg)?;
    }
    Ok(acc)
}

/// Lower limit of the two inner axes of a prism integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InnerLower {
    /// The inner square starts at the current outer point `s`.
    Outer,
    Fixed(f64),
}

fn prism3_value<F: Fn(f64, f64, f64) -> f64>(
    f: &F,
    s: (f64, f64),
    lower: InnerLower,
    inner_upper: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let mut acc = 0.0;
    for (x, wx) in cfg.nodes(s.0, s.1) {
        let lo = match lower {
            InnerLower::Outer => x,
            InnerLower::Fixed(a) => a,
        };
        acc += wx * box2_value(&|a, b| f(x, a, b), (lo, inner_upper), (lo, inner_upper), cfg)?;
    }
    Ok(acc)
}

fn check_bounds(bounds: &[(f64, f64)]) -> Result<()> {
    for &(a, b) in bounds {
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(Error::InvalidArgument(format!(
                "integration bounds [{a}, {b}] are not ordered"
            )));
        }
    }
    Ok(())
}

/// `∫∫ f(u, v) dv du` over `[a₁, b₁] × [a₂, b₂]`.
pub fn integrate_box2<F: Fn(f64, f64) -> f64>(
    f: F,
    u: (f64, f64),
    v: (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    check_bounds(&[u, v])?;
    let value = box2_value(&f, u, v, cfg)?;
    let fine = box2_value(&f, u, v, &cfg.refined())?;
    Ok(Estimate {
        value,
        error: (fine - value).abs(),
    })
}

/// `∫∫∫ f(s, u, v)` over a box.
pub fn integrate_box3<F: Fn(f64, f64, f64) -> f64>(
    f: F,
    s: (f64, f64),
    u: (f64, f64),
    v: (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    check_bounds(&[s, u, v])?;
    let value = box3_value(&f, s, u, v, cfg)?;
    let fine = box3_value(&f, s, u, v, &cfg.refined())?;
    Ok(Estimate {
        value,
        error: (fine - value).abs(),
    })
}

/// `∫_t^T ∫_s^U ∫_s^U f(s, u, v) dv du ds`: with [`InnerLower::Outer`] the
/// inner square shrinks with the outer variable and is re-noded at every
/// outer node.
pub fn integrate_prism3<F: Fn(f64, f64, f64) -> f64>(
    f: F,
    s: (f64, f64),
    inner_lower: InnerLower,
    inner_upper: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    check_bounds(&[s])?;
    let lowest = match inner_lower {
        InnerLower::Outer => s.1,
        InnerLower::Fixed(a) => a,
    };
    if inner_upper < lowest {
        return Err(Error::InvalidArgument(format!(
            "inner upper limit {inner_upper} below inner lower limit {lowest}"
        )));
    }
    let value = prism3_value(&f, s, inner_lower, inner_upper, cfg)?;
    let fine = prism3_value(&f, s, inner_lower, inner_upper, &cfg.refined())?;
    Ok(Estimate {
        value,
        error: (fine - value).abs(),
    })
}

/// Sorted breakpoints of `[a, b]`: the endpoints plus every `breaks` entry
/// strictly inside.
pub(crate) fn partition(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    pts
}

/// 1-D integral split at `breaks`, value only. Used for integrands with a
/// kink at a known point (e.g. `v ↦ c(u, v)` at `v = u`).
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let pts = partition(a, b, breaks);
    let mut acc = 0.0;
    for w in pts.windows(2) {
        for (x, wx) in cfg.nodes(w[0], w[1]) {
            acc += wx * f(x);
        }
    }
    acc
}

/// `∫_{u₀}^{u₁} ∫_{v₀}^{v₁} f(u, v) dv du` for integrands that are smooth
/// except across the diagonal `u = v`.
///
/// Both axes are cut at a common set of breakpoints (`breaks` plus all four
/// limits). Sub-rectangles whose two sides coincide contain the diagonal and
/// are integrated as two triangles through a collapsed (Duffy-type) map;
/// the others only touch the diagonal on their boundary.
pub fn integrate_kernel_rect<F: Fn(f64, f64) -> f64>(
    f: &F,
    u: (f64, f64),
    v: (f64, f64),
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> f64 {
    if u.1 <= u.0 || v.1 <= v.0 {
        return 0.0;
    }
    let mut common: Vec<f64> = breaks.to_vec();
    common.extend([u.0, u.1, v.0, v.1]);
    let pu = partition(u.0, u.1, &common);
    let pv = partition(v.0, v.1, &common);
    let unit = cfg.nodes(0.0, 1.0);
    let mut acc = 0.0;
    for iu in pu.windows(2) {
        let (ua, ub) = (iu[0], iu[1]);
        for iv in pv.windows(2) {
            let (va, vb) = (iv[0], iv[1]);
            if ua == va && ub == vb {
                // lower triangle v ≤ u, then upper triangle u ≤ v
                for (x, wx) in cfg.nodes(ua, ub) {
                    let span = x - ua;
                    let mut lower = 0.0;
                    let mut upper = 0.0;
                    for &(y, wy) in &unit {
                        let inner = ua + span * y;
                        lower += wy * f(x, inner);
                        upper += wy * f(inner, x);
                    }
                    acc += wx * span * (lower + upper);
                }
            } else {
                for (x, wx) in cfg.nodes(ua, ub) {
                    let mut inner = 0.0;
                    for (y, wy) in cfg.nodes(va, vb) {
                        inner += wy * f(x, y);
                    }
                    acc += wx * inner;
                }
            }
        }
    }
    acc
}
