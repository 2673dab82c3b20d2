//! Acceptance criteria A1-A10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rflmm::analytics::{Analytics, FrozenState};
use rflmm::market_io::{write_curves, write_model, InstrumentDefaults, ModelSetup};
use rflmm::mc::{
    build_field_factor, mc_price, simulate, validate_against_analytic, FieldDiscretization, McConfig, Payoff,
    SimulationGrid,
};
use rflmm::modelspec::{CorrelationSpec, ModelConfig, Regime, VolSurfaceSpec};
use rflmm::pricers::{
    fx_call, lognormal_call_core, quanto_cap, quanto_caplet, FxOptionSpec, Instrument, MarketState, PricingContext,
    QuantoCapSpec,
};
use rflmm::quadrature::QuadratureConfig;
use rflmm::termstructure::{CurveSet, Economy, Tenor};
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Check = Result<String, String>;

/// Φ from its everywhere-convergent Taylor series; accurate to rounding for
/// the moderate arguments used here.
fn n_cdf(x: f64) -> f64 {
    if x < -8.0 {
        return 0.0;
    }
    if x > 8.0 {
        return 1.0;
    }
    let (mut term, mut sum, mut k) = (x, x, 1.0);
    while term.abs() > 1e-18 * sum.abs() {
        term *= x * x / (2.0 * k + 1.0);
        sum += term;
        k += 1.0;
    }
    0.5 + sum * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn black(forward: f64, strike: f64, total_var: f64) -> f64 {
    let sd = total_var.sqrt();
    let d1 = ((forward / strike).ln() + 0.5 * total_var) / sd;
    forward * n_cdf(d1) - strike * n_cdf(d1 - sd)
}

fn model(regime: Regime, dom: f64, foreign: f64, fx: f64, beta: f64) -> ModelConfig {
    ModelConfig {
        regime,
        domestic_libor_vol: VolSurfaceSpec::constant(dom),
        foreign_vol: Some(VolSurfaceSpec::constant(foreign)),
        terminal_fx_vol: VolSurfaceSpec::constant(fx),
        correlation: CorrelationSpec::Exponential { beta },
        quanto_fixed_fx: 1.0,
    }
}

fn flat_discounts(tenor: &Tenor, rate: f64) -> Vec<f64> {
    let d = tenor.dates();
    let mut b = vec![1.0 / (1.0 + rate * d[0])];
    for w in d.windows(2) {
        let last = *b.last().unwrap();
        b.push(last / (1.0 + rate * (w[1] - w[0])));
    }
    b
}

fn curves(tenor: &Tenor, l: f64, lf: f64, spot: f64) -> CurveSet {
    CurveSet::from_tenor(tenor, flat_discounts(tenor, l), flat_discounts(tenor, lf), spot).unwrap()
}

fn ctx(tenor: &Tenor, m: ModelConfig, l: f64, lf: f64, spot: f64) -> PricingContext {
    let market = MarketState::at_origin(&curves(tenor, l, lf, spot), tenor).unwrap();
    PricingContext::new(tenor.clone(), m, market, QuadratureConfig::default())
}

/// Four semiannual periods from 0.5, flat 2% / 3%, λ = λ^F = 20%, σ_X = 10%, β = 0.5.
fn reference_tenor() -> Tenor {
    Tenor::regular(0.5, 0.5, 4).unwrap()
}

fn reference_ctx() -> PricingContext {
    ctx(&reference_tenor(), model(Regime::LognormalLibors, 0.2, 0.2, 0.1, 0.5), 0.02, 0.03, 1.0)
}

fn paths(n: usize) -> McConfig {
    McConfig {
        paths: n,
        ..McConfig::default()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

// ∫∫ e^{-β|u-v|} over [a,b]², closed form
fn exp_kernel_square(beta: f64, h: f64) -> f64 {
    if beta == 0.0 {
        h * h
    } else {
        2.0 * h / beta - 2.0 * (1.0 - (-beta * h).exp()) / (beta * beta)
    }
}

// ∫_t^{Ti} ∫_a^b ∫_s^{TN} e^{-β|u-v|} dv du ds with Ti ≤ a
fn exp_kernel_prism(beta: f64, t: f64, ti: f64, (a, b): (f64, f64), tn: f64) -> f64 {
    let width = ti - t;
    let eu = ((-beta * a).exp() - (-beta * b).exp()) / beta;
    let es = ((beta * ti).exp() - (beta * t).exp()) / beta;
    let etail = ((-beta * (tn - b)).exp() - (-beta * (tn - a)).exp()) / beta;
    (2.0 * (b - a) * width - eu * es - width * etail) / beta
}

// ∫_a^b e^{-β|u-v|} dv
fn exp_kernel_line(beta: f64, u: f64, a: f64, b: f64) -> f64 {
    if beta == 0.0 {
        return b - a;
    }
    if u <= a {
        ((-beta * (a - u)).exp() - (-beta * (b - u)).exp()) / beta
    } else if u >= b {
        ((-beta * (u - b)).exp() - (-beta * (u - a)).exp()) / beta
    } else {
        (2.0 - (-beta * (u - a)).exp() - (-beta * (b - u)).exp()) / beta
    }
}

fn a1_black_reduction() -> Check {
    let tenor = reference_tenor();
    let n = tenor.periods();
    let i = n - 1;
    let (ti, delta) = (tenor.dates()[i], tenor.accrual(i).map_err(e)?);
    let mut worst: f64 = 0.0;
    for beta in [0.0, 0.5, 2.0] {
        for strike in [0.015, 0.02, 0.03, 0.04] {
            let c = ctx(&tenor, model(Regime::LognormalLibors, 0.2, 0.25, 0.0, beta), 0.02, 0.03, 1.0);
            let got = quanto_caplet(i, &QuantoCapSpec::new(strike, 1.0), &c).map_err(e)?.value;
            // textbook Black: L_F lognormal with total variance λ²·T_i·∫∫c over the strip
            let var = 0.25 * 0.25 * ti * exp_kernel_square(beta, delta);
            let lf = c.market.frozen.rate(Economy::Foreign, i).map_err(e)?;
            let want = delta * c.market.discounts[i + 1] * black(lf, strike, var);
            worst = worst.max(rel(got, want));
        }
    }
    let detail = format!("max relative error {worst:.2e} (tol 1e-12)");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn z_line(label: &str, analytic: f64, mc: f64, se: f64) -> String {
    format!("{label}: analytic {analytic:.6e} mc {mc:.6e} se {se:.2e} z {:+.2}", (analytic - mc) / se)
}

fn a2_quanto_cap_vs_mc() -> Check {
    let c = reference_ctx();
    let report = validate_against_analytic(Instrument::QuantoCap, &c, &paths(200_000), 0.03, 1.0).map_err(e)?;
    let lines: Vec<String> = report.rows.iter().map(|r| format!("{} z {:+.2}", r.label, r.z)).collect();
    let detail = format!("{}; {}", lines.join(", "), report.commentary);
    if report.passed() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn a3_fx_option() -> Check {
    let c = reference_ctx();
    let n = c.tenor.periods();
    let tn = c.tenor.last();
    let strike = 1.0;
    let spec = FxOptionSpec {
        expiry: tn,
        strike,
        notional: 1.0,
    };
    let analytic = fx_call(&spec, &c).map_err(e)?;
    let gamma = analytic.diagnostic("gamma").ok_or("missing gamma")?;
    let x0 = c.market.forward_fx(n);
    let bn = c.market.discounts[n];

    // E[(X - k)^+] with ln X ~ N(ln X0 - γ/2, γ), composite Simpson in z
    let sd = gamma.sqrt();
    let z0 = ((strike / x0).ln() + 0.5 * gamma) / sd;
    let (hi, m) = (z0.max(0.0) + 12.0, 20_000);
    let h = (hi - z0) / m as f64;
    let f = |z: f64| {
        (x0 * (-0.5 * gamma + sd * z).exp() - strike).max(0.0) * (-0.5 * z * z).exp()
            / (2.0 * std::f64::consts::PI).sqrt()
    };
    let mut acc = f(z0) + f(hi);
    for k in 1..m {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(z0 + h * k as f64);
    }
    let quad = bn * acc * h / 3.0;
    let quad_err = rel(analytic.value, quad);

    let set = simulate(&c, &paths(100_000)).map_err(e)?;
    let m = mc_price(
        &set,
        &Payoff::FxCall {
            expiry: n,
            strike,
            notional: 1.0,
        },
    )
    .map_err(e)?;
    let se = m.stderr.unwrap_or(0.0);
    let z = (analytic.value - m.value) / se;
    let detail = format!(
        "{}; quadrature relative error {quad_err:.2e} (tol 1e-8)",
        z_line("call", analytic.value, m.value, se)
    );
    if z.abs() <= 3.0 && quad_err <= 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn a4_martingales() -> Check {
    let c = reference_ctx();
    let n = c.tenor.periods();
    let set = simulate(&c, &paths(200_000)).map_err(e)?;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for i in 0..n {
        let m = mc_price(&set, &Payoff::ZeroBond { pay: i + 1 }).map_err(e)?;
        let se = m.stderr.unwrap_or(0.0);
        let want = c.market.discounts[i + 1];
        let z = if se > 0.0 { (m.value - want) / se } else if m.value == want { 0.0 } else { f64::INFINITY };
        worst = worst.max(z.abs());
        parts.push(format!("B(0,T_{}) z {z:+.2}", i + 1));
    }
    let (mean, se) = set.estimate(|p| set.libor(Economy::Domestic, p, n - 1, n - 1));
    let l0 = c.market.frozen.rate(Economy::Domestic, n - 1).map_err(e)?;
    let z = (mean - l0) / se;
    worst = worst.max(z.abs());
    parts.push(format!("L(T_{}) z {z:+.2}", n - 1));
    let (mean, se) = set.estimate(|p| set.terminal_fx(p, n));
    let z = (mean - c.market.forward_fx(n)) / se;
    worst = worst.max(z.abs());
    parts.push(format!("X(T_N) z {z:+.2}"));
    let detail = parts.join(", ");
    if worst <= 3.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn a5_quadrature() -> Check {
    let tenor = reference_tenor();
    let dates = tenor.dates().to_vec();
    let n = tenor.periods();
    let tn = tenor.last();
    let (lf_vol, fx_vol) = (0.25, 0.12);
    let mut worst_closed: f64 = 0.0;
    for beta in [0.1, 0.5, 2.0] {
        let m = model(Regime::LognormalLibors, 0.2, lf_vol, fx_vol, beta);
        let an = Analytics::new(&tenor, &m, QuadratureConfig::default()).map_err(e)?;
        for t in [0.0, 0.3] {
            for i in 0..n {
                let want = lf_vol * lf_vol * (dates[i] - t) * exp_kernel_square(beta, dates[i + 1] - dates[i]);
                worst_closed = worst_closed.max(rel(an.omega_tilde(i, t).map_err(e)?, want));
            }
            // the last period has only the FX prism term
            let i = n - 1;
            let state = FrozenState::new(t, &tenor, vec![0.02; n], vec![0.03; n]).map_err(e)?;
            let want = lf_vol * fx_vol * exp_kernel_prism(beta, t, dates[i], (dates[i], tn), tn);
            worst_closed = worst_closed.max(rel(an.alpha_tilde(i, &state).map_err(e)?, want));
            let len = tn - t;
            let want = fx_vol * fx_vol
                * (len * len / beta - 2.0 * len / (beta * beta) + 2.0 * (1.0 - (-beta * len).exp()) / beta.powi(3));
            worst_closed = worst_closed.max(rel(an.gamma_fx(t, tn).map_err(e)?, want));
        }
    }

    // order 8 against 16 on humped surfaces and a floored kernel
    let humped = ModelConfig {
        regime: Regime::LognormalLibors,
        domestic_libor_vol: VolSurfaceSpec::rebonato(0.05, 0.3, 1.2, 0.1),
        foreign_vol: Some(VolSurfaceSpec::rebonato(0.04, 0.25, 0.9, 0.12)),
        terminal_fx_vol: VolSurfaceSpec::rebonato(0.02, 0.1, 0.5, 0.08),
        correlation: CorrelationSpec::ExponentialWithFloor { beta: 0.8, floor: 0.2 },
        quanto_fixed_fx: 1.0,
    };
    let state = FrozenState::new(0.0, &tenor, vec![0.02; n], vec![0.03; n]).map_err(e)?;
    let lo = Analytics::new(&tenor, &humped, QuadratureConfig::gauss(8)).map_err(e)?;
    let hi = Analytics::new(&tenor, &humped, QuadratureConfig::gauss(16)).map_err(e)?;
    let mut worst_order: f64 = 0.0;
    for i in 0..n {
        worst_order = worst_order.max(rel(lo.omega_tilde(i, 0.0).map_err(e)?, hi.omega_tilde(i, 0.0).map_err(e)?));
        worst_order = worst_order.max(rel(lo.alpha_tilde(i, &state).map_err(e)?, hi.alpha_tilde(i, &state).map_err(e)?));
    }
    worst_order = worst_order.max(rel(lo.gamma_fx(0.0, tn).map_err(e)?, hi.gamma_fx(0.0, tn).map_err(e)?));

    let detail = format!(
        "closed forms max relative error {worst_closed:.2e} (tol 1e-12); order 8 vs 16 {worst_order:.2e} (tol 1e-10)"
    );
    if worst_closed <= 1e-12 && worst_order <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn a6_recursion_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let periods = rng.random_range(2..=6);
        let mut dates = vec![rng.random_range(0.0..1.0)];
        for _ in 0..periods {
            let last = *dates.last().unwrap();
            dates.push(last + rng.random_range(0.25..1.0));
        }
        let tenor = Tenor::new(dates.clone()).map_err(e)?;
        let regime = if rng.random_bool(0.5) { Regime::LognormalLibors } else { Regime::LognormalFx };
        let (dom, fgn) = (rng.random_range(0.05..0.4), rng.random_range(0.01..0.4));
        let beta = rng.random_range(0.0..3.0);
        let m = model(regime, dom, fgn, rng.random_range(0.05..0.2), beta);
        let t = rng.random_range(0.0..=dates[0]);
        let l: Vec<f64> = (0..periods).map(|_| rng.random_range(0.005..0.06)).collect();
        let lf: Vec<f64> = (0..periods).map(|_| rng.random_range(0.005..0.06)).collect();
        let state = FrozenState::new(t, &tenor, l, lf).map_err(e)?;
        let an = Analytics::new(&tenor, &m, QuadratureConfig::default()).map_err(e)?;
        let i = rng.random_range(0..periods);
        let u = rng.random_range(t..*dates.last().unwrap());
        let step = an.fx_c_integral(i, t, u, &state).map_err(e)? - an.fx_c_integral(i + 1, t, u, &state).map_err(e)?;
        let line = exp_kernel_line(beta, u, dates[i], dates[i + 1]);
        let weight = match regime {
            Regime::LognormalLibors => state.a(Economy::Foreign, i).map_err(e)?,
            Regime::LognormalFx => 1.0,
        };
        let want = (weight * fgn - state.a(Economy::Domestic, i).map_err(e)? * dom) * line;
        worst = worst.max((step - want).abs());
    }
    let detail = format!("100 random configurations, max |error| {worst:.2e} (tol 1e-12)");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn a7_case_ii() -> Check {
    let tenor = reference_tenor();
    let mut lines = Vec::new();
    let mut low_vol_pass = true;
    // low-vol range is held to 3 SE; the LIBOR-scale run only reports the bias
    for (sigma_f, bounded) in [(0.001, true), (0.003, true), (0.01, true), (0.1, false)] {
        let c = ctx(&tenor, model(Regime::LognormalFx, 0.2, sigma_f, 0.1, 0.5), 0.02, 0.03, 1.0);
        let report =
            validate_against_analytic(Instrument::QuantoCapFx, &c, &paths(200_000), 0.03, 1.0).map_err(e)?;
        let zs: Vec<String> = report.rows.iter().map(|r| format!("{:+.1}", r.z)).collect();
        let t = report.total();
        lines.push(format!(
            "{}sigma_F {sigma_f}: z [{}], total bias {:+.3}%",
            if bounded { "" } else { "reported only, " },
            zs.join(" "),
            100.0 * (t.analytic - t.mc) / t.mc
        ));
        if bounded && !report.passed() {
            low_vol_pass = false;
        }
    }
    let detail = lines.join("; ");
    if low_vol_pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn a8_pricer_properties() -> Check {
    let c = reference_ctx();
    let n = c.tenor.periods();
    let strikes: Vec<f64> = (0..11).map(|k| 0.005 * k as f64 + 0.005).collect();
    let prices: Vec<f64> = strikes
        .iter()
        .map(|&k| quanto_cap(&QuantoCapSpec::new(k, 1.0), &c).map(|r| r.value))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let monotone = prices.windows(2).all(|w| w[1] <= w[0]);
    let convex = prices.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] >= -1e-15);

    let variances: Vec<f64> = (0..20).map(|k| 0.01 * k as f64).collect();
    let calls: Vec<f64> = variances
        .iter()
        .map(|&v| lognormal_call_core(0.03, 0.03, 0.01, v))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let variance_monotone = calls.windows(2).all(|w| w[1] >= w[0]);

    // κ = 0: every caplet is δ X̄ B L_F e^{-α̃}
    let zero_strike = quanto_cap(&QuantoCapSpec::new(0.0, 1.0), &c).map_err(e)?;
    let mut want = 0.0;
    for i in 0..n {
        let alpha = zero_strike.diagnostic(&format!("alpha_{i}")).ok_or("missing alpha")?;
        want += c.tenor.accrual(i).map_err(e)?
            * c.market.discounts[i + 1]
            * c.market.frozen.rate(Economy::Foreign, i).map_err(e)?
            * (-alpha).exp();
    }
    let k0 = rel(zero_strike.value, want);

    // zero vols: intrinsic value
    let flat = c.with_model(model(Regime::LognormalLibors, 0.0, 0.0, 0.0, 0.5));
    let got = quanto_cap(&QuantoCapSpec::new(0.025, 1.0), &flat).map_err(e)?.value;
    let mut intrinsic = 0.0;
    for i in 0..n {
        intrinsic += c.tenor.accrual(i).map_err(e)?
            * c.market.discounts[i + 1]
            * (c.market.frozen.rate(Economy::Foreign, i).map_err(e)? - 0.025).max(0.0);
    }
    let zv = rel(got, intrinsic);

    let detail = format!(
        "strike monotone {monotone}, convex {convex}, variance monotone {variance_monotone}, k=0 error {k0:.1e}, zero-vol error {zv:.1e}"
    );
    if monotone && convex && variance_monotone && k0 <= 1e-14 && zv <= 1e-14 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn a9_field() -> Check {
    let tenor = reference_tenor();
    let mut worst: f64 = 0.0;
    for beta in [0.0, 0.5, 5.0] {
        let grid = SimulationGrid::for_config(&tenor, &McConfig::default()).map_err(e)?;
        let d = FieldDiscretization::for_grid(&CorrelationSpec::Exponential { beta }, &grid).map_err(e)?;
        worst = worst.max(d.reconstruction_error());
    }

    // likelihood-ratio test of the sample covariance against C·h
    let nodes = [0.25, 0.5, 0.75, 1.0, 1.5];
    let p = nodes.len();
    let d = build_field_factor(&CorrelationSpec::Exponential { beta: 1.0 }, &nodes, &[0.25; 5], 1e-12)
        .map_err(e)?;
    let h = 0.125;
    let samples = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut s = nalgebra::DMatrix::<f64>::zeros(p, p);
    for _ in 0..samples {
        let z = d.sample_increment(&mut rng, h);
        s += &z * z.transpose();
    }
    s /= samples as f64;
    let sigma = d.correlation() * h;
    let inv = sigma.clone().try_inverse().ok_or("singular covariance")?;
    let ratio = &inv * &s;
    let stat = samples as f64 * (ratio.trace() - ratio.determinant().ln() - p as f64);
    let df = (p * (p + 1) / 2) as f64;
    let bound = ChiSquared::new(df).map_err(e)?.inverse_cdf(0.99);

    let detail = format!(
        "reconstruction {worst:.2e} (tol 1e-10); covariance statistic {stat:.2} vs 99% bound {bound:.2} (df {df})"
    );
    if worst <= 1e-10 && stat <= bound {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rflmm"))
        .args(args)
        .output()
        .expect("run rflmm")
}

fn a10_cli_io() -> Check {
    let dir = tempfile::tempdir().map_err(e)?;
    let root = dir.path();
    let tenor = reference_tenor();
    let c = reference_ctx();
    write_curves(&root.join("curves.json"), &tenor, &curves(&tenor, 0.02, 0.03, 1.0)).map_err(e)?;
    let setup = ModelSetup {
        model: c.model.clone(),
        quadrature: QuadratureConfig::default(),
        monte_carlo: McConfig {
            paths: 20_000,
            ..McConfig::default()
        },
        instruments: InstrumentDefaults::default(),
    };
    write_model(&root.join("model.json"), &setup).map_err(e)?;
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let (cv, md) = (s(&root.join("curves.json")), s(&root.join("model.json")));

    let mut outputs = Vec::new();
    for run in 0..2 {
        let price = root.join(format!("price{run}.csv"));
        let out = run_cli(&["price", "quanto-cap", "--curves", &cv, "--model", &md, "--out", &s(&price)]);
        if !out.status.success() {
            return Err(format!("price failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
        let val = root.join(format!("validate{run}.csv"));
        let out = run_cli(&[
            "validate", "quanto-cap", "--curves", &cv, "--model", &md, "--seed", "7", "--out", &s(&val),
        ]);
        if out.status.code() == Some(2) {
            return Err(format!("validate failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
        outputs.push((fs::read(&price).map_err(e)?, fs::read(&val).map_err(e)?));
    }
    let identical = outputs[0] == outputs[1];

    let broken = root.join("broken.json");
    fs::write(&broken, "{\"schema_version\": 1, \"tenor\": [0.5, 1.0],\n \"domestic_discounts\": [0.99, 0.995]")
        .map_err(e)?;
    let mut malformed_ok = true;
    for (name, curves_arg) in [("truncated", s(&broken)), ("missing", s(&root.join("absent.json")))] {
        let out_file = root.join(format!("bad_{name}.csv"));
        let out = run_cli(&["price", "ccs", "--curves", &curves_arg, "--model", &md, "--out", &s(&out_file)]);
        malformed_ok &= out.status.code() == Some(2) && !out_file.exists();
    }
    let unknown = run_cli(&["price", "bogus-instrument"]);
    malformed_ok &= unknown.status.code() == Some(2);

    let detail = format!("two runs byte-identical {identical}; malformed inputs exit 2 without output {malformed_ok}");
    if identical && malformed_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let checks: [(&str, &str, Option<Duration>, fn() -> Check); 10] = [
        ("A1", "Black reduction", Some(Duration::from_secs(1)), a1_black_reduction),
        ("A2", "quanto cap vs Monte Carlo", Some(Duration::from_secs(60)), a2_quanto_cap_vs_mc),
        ("A3", "FX option exactness", Some(Duration::from_secs(30)), a3_fx_option),
        ("A4", "martingale suite", Some(Duration::from_secs(60)), a4_martingales),
        ("A5", "quadrature", None, a5_quadrature),
        ("A6", "recursion identity", None, a6_recursion_identity),
        ("A7", "case-ii suite", None, a7_case_ii),
        ("A8", "pricer properties", Some(Duration::from_secs(5)), a8_pricer_properties),
        ("A9", "field discretization", None, a9_field),
        ("A10", "CLI and IO", None, a10_cli_io),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in checks {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let slow = budget.is_some_and(|b| took > b);
        let (pass, detail) = match outcome {
            Ok(d) => (!slow, d),
            Err(d) => (false, d),
        };
        let budget = budget.map_or(String::new(), |b| format!(", budget {}s", b.as_secs()));
        println!(
            "{id:<4} {} {name} [{:.2}s{budget}]: {detail}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
        if !pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
