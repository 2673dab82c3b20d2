//! `rflmm`: price, validate and inspect cross-currency LIBOR instruments from
//! JSON curve and model files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rflmm::analytics::FrozenState;
use rflmm::market_io::{
    convergence_csv, load_curves, load_model, write_report, ConvergencePoint, ModelSetup,
};
use rflmm::mc::{mc_price, simulate, validate_against_analytic, McValidation, Payoff};
use rflmm::modelspec::{validate_config, Regime};
use rflmm::pricers::{price_instrument, Instrument, MarketState, PricingContext, PricingResult};
use rflmm::termstructure::{CurveSet, Tenor};
use rflmm::Error;

#[derive(Parser)]
#[command(name = "rflmm", version, about = "Cross-currency random-field LIBOR market model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form price of an instrument.
    Price {
        #[arg(value_parser = parse_instrument)]
        instrument: Instrument,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Closed form against Monte Carlo, with z-scores per component.
    Validate {
        #[arg(value_parser = parse_instrument)]
        instrument: Instrument,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Print analytic model quantities.
    Inspect {
        #[command(subcommand)]
        what: InspectTarget,
    },
    /// Quadrature-order and path-count sweeps as CSV.
    Converge {
        #[arg(value_parser = parse_instrument)]
        instrument: Instrument,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        mc: McArgs,
    },
}

#[derive(Subcommand)]
enum InspectTarget {
    /// Quanto drift adjustments and variances per period.
    Adjustments {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    curves: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Output CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap strike or FX strike, depending on the instrument.
    #[arg(long)]
    strike: Option<f64>,
    #[arg(long)]
    notional: Option<f64>,
    /// Gauss-Legendre points per panel.
    #[arg(long)]
    quad_order: Option<usize>,
    /// `case_i` or `case_ii`; overrides the model file.
    #[arg(long, value_parser = parse_regime)]
    regime: Option<Regime>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Time steps per accrual period.
    #[arg(long)]
    steps: Option<usize>,
}

fn parse_instrument(s: &str) -> Result<Instrument, String> {
    s.parse()
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    s.parse()
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// Unreadable or invalid input files.
    Input(Error),
    /// Errors raised while pricing or simulating.
    Model(Error),
    /// A validation run exceeded its tolerance; the report was written.
    Validation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Input { .. } => Failure::Input(e),
            other => Failure::Model(other),
        }
    }
}

struct Loaded {
    ctx: PricingContext,
    setup: ModelSetup,
    curves: CurveSet,
    strike: f64,
    notional: f64,
}

impl Loaded {
    fn new(common: &CommonArgs, instrument: Option<Instrument>, mc: Option<&McArgs>) -> Result<Self, Failure> {
        let (tenor, curves) = load_curves(&common.curves)?;
        let mut setup = load_model(&common.model, &tenor)?;
        if let Some(regime) = common.regime {
            setup.model.regime = regime;
            validate_config(&setup.model, &tenor)
                .into_result()
                .map_err(|e| usage(format!("--regime {}: {e}", regime.label())))?;
        }
        if let Some(order) = common.quad_order {
            setup.quadrature.order = order;
            setup
                .quadrature
                .validate()
                .map_err(|e| usage(format!("--quad-order: {e}")))?;
        }
        if let Some(mc) = mc {
            let cfg = &mut setup.monte_carlo;
            if let Some(steps) = mc.steps {
                let per_step = cfg.nodes_per_step();
                cfg.steps_per_accrual = steps;
                cfg.maturity_resolution = steps * per_step;
            }
            if let Some(paths) = mc.paths {
                cfg.paths = paths;
            }
            if let Some(seed) = mc.seed {
                cfg.seed = seed;
            }
            cfg.validate().map_err(|e| usage(e.to_string()))?;
        }
        let strike = common.strike.unwrap_or(match instrument {
            Some(Instrument::FxOption) => setup.instruments.fx_strike,
            _ => setup.instruments.cap_strike,
        });
        let notional = common.notional.unwrap_or(setup.instruments.notional);
        let market = MarketState::at_origin(&curves, &tenor)?;
        let ctx = PricingContext::new(tenor, setup.model.clone(), market, setup.quadrature);
        Ok(Self {
            ctx,
            setup,
            curves,
            strike,
            notional,
        })
    }

    fn tenor(&self) -> &Tenor {
        &self.ctx.tenor
    }

    /// Every effective input, recorded ahead of the results.
    fn run_rows(&self, command: &str, instrument: Option<Instrument>, with_mc: bool) -> Vec<(String, String)> {
        let q = &self.setup.quadrature;
        let mut rows = vec![
            ("command".to_string(), command.to_string()),
            ("regime".into(), self.setup.model.regime.label().into()),
            ("periods".into(), self.tenor().periods().to_string()),
            ("spot_fx".into(), self.curves.spot_fx().to_string()),
            ("quanto_fixed_fx".into(), self.setup.model.quanto_fixed_fx.to_string()),
            ("correlation_beta".into(), self.setup.model.correlation.beta().to_string()),
            ("quad_order".into(), q.order.to_string()),
            ("quad_panels".into(), q.panels.to_string()),
        ];
        if let Some(instrument) = instrument {
            rows.push(("instrument".into(), instrument.token().into()));
            if instrument != Instrument::Ccs {
                rows.push(("strike".into(), self.strike.to_string()));
            }
            rows.push(("notional".into(), self.notional.to_string()));
        }
        if with_mc {
            let mc = &self.setup.monte_carlo;
            rows.push(("paths".into(), mc.paths.to_string()));
            rows.push(("seed".into(), mc.seed.to_string()));
            rows.push(("steps_per_accrual".into(), mc.steps_per_accrual.to_string()));
            rows.push(("maturity_resolution".into(), mc.maturity_resolution.to_string()));
            rows.push(("antithetic".into(), mc.antithetic.to_string()));
        }
        rows
    }
}

fn usage(message: String) -> Failure {
    Failure::Input(Error::InvalidArgument(message))
}

fn out_path(common: &CommonArgs, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn price(instrument: Instrument, common: &CommonArgs) -> Result<(), Failure> {
    let l = Loaded::new(common, Some(instrument), None)?;
    let result = price_instrument(instrument, l.strike, l.notional, &l.ctx)?;
    println!("{} {:.16e}", result.instrument, result.value);
    write_report(&l.run_rows("price", Some(instrument), false), &[result], &out_path(common, "results.csv"))?;
    Ok(())
}

fn validation_results(report: &McValidation) -> Vec<PricingResult> {
    report
        .rows
        .iter()
        .map(|row| {
            let mut r = PricingResult::analytic(row.label.clone(), row.analytic);
            r.stderr = Some(row.stderr);
            r.z_score = Some(row.z);
            r.diag("mc", row.mc);
            r
        })
        .collect()
}

fn validate(instrument: Instrument, common: &CommonArgs, mc: &McArgs) -> Result<(), Failure> {
    let l = Loaded::new(common, Some(instrument), Some(mc))?;
    let report = validate_against_analytic(instrument, &l.ctx, &l.setup.monte_carlo, l.strike, l.notional)?;
    println!("{:<12} {:>24} {:>24} {:>12} {:>8}", "component", "analytic", "mc", "stderr", "z");
    for row in &report.rows {
        println!(
            "{:<12} {:>24.16e} {:>24.16e} {:>12.4e} {:>8.3}",
            row.label, row.analytic, row.mc, row.stderr, row.z
        );
    }
    println!("{}", report.commentary);
    write_report(
        &l.run_rows("validate", Some(instrument), true),
        &validation_results(&report),
        &out_path(common, "results.csv"),
    )?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn inspect_adjustments(common: &CommonArgs) -> Result<(), Failure> {
    let l = Loaded::new(common, None, None)?;
    let state = FrozenState::at_origin(&l.curves, l.tenor())?;
    let report = l.ctx.analytics()?.adjustments(&state)?;
    let (var, drift) = match report.regime {
        Regime::LognormalLibors => ("omega", "alpha"),
        Regime::LognormalFx => ("gamma", "beta"),
    };
    println!(
        "{:>3} {:>8} {:>24} {:>10} {:>24} {:>10}",
        "i", "reset", var, "error", drift, "error"
    );
    let mut results = Vec::new();
    for row in &report.rows {
        let reset = l.tenor().dates()[row.index];
        println!(
            "{:>3} {:>8} {:>24.16e} {:>10.2e} {:>24.16e} {:>10.2e}",
            row.index, reset, row.variance, row.variance_error, row.drift, row.drift_error
        );
        let mut r = PricingResult::analytic(format!("period_{}", row.index), row.drift);
        r.diag("reset", reset);
        r.diag(var, row.variance);
        r.diag(format!("{var}_error"), row.variance_error);
        r.diag(drift, row.drift);
        r.diag(format!("{drift}_error"), row.drift_error);
        results.push(r);
    }
    println!(
        "fx variance to T_N: {:.16e} (error {:.2e})",
        report.fx_variance, report.fx_variance_error
    );
    let mut fx = PricingResult::analytic("fx_variance", report.fx_variance);
    fx.diag("error", report.fx_variance_error);
    results.push(fx);
    write_report(&l.run_rows("inspect adjustments", None, false), &results, &out_path(common, "adjustments.csv"))?;
    Ok(())
}

/// Monte Carlo payoff matching the closed-form total of an instrument.
fn payoff_for(instrument: Instrument, l: &Loaded) -> Payoff {
    match instrument {
        Instrument::QuantoCap | Instrument::QuantoCapFx => Payoff::QuantoCap {
            strike: l.strike,
            fixed_fx: l.setup.model.quanto_fixed_fx,
            notional: l.notional,
        },
        Instrument::Ccs => Payoff::CrossCurrencySwap { notional: l.notional },
        Instrument::FxOption => Payoff::FxCall {
            expiry: l.tenor().periods(),
            strike: l.strike,
            notional: l.notional,
        },
    }
}

const QUAD_ORDERS: [usize; 7] = [2, 3, 4, 6, 8, 12, 16];

fn converge(instrument: Instrument, common: &CommonArgs, mc: &McArgs) -> Result<(), Failure> {
    let l = Loaded::new(common, Some(instrument), Some(mc))?;
    let token = instrument.token();
    let mut points = Vec::new();
    for order in QUAD_ORDERS {
        let mut quad = l.setup.quadrature;
        quad.order = order;
        let ctx = PricingContext::new(l.ctx.tenor.clone(), l.ctx.model.clone(), l.ctx.market.clone(), quad);
        let r = price_instrument(instrument, l.strike, l.notional, &ctx)?;
        points.push(ConvergencePoint {
            sweep: "quad_order".into(),
            parameter: order as f64,
            quantity: token.into(),
            value: r.value,
            stderr: None,
        });
    }
    let analytic = price_instrument(instrument, l.strike, l.notional, &l.ctx)?;
    let payoff = payoff_for(instrument, &l);
    let max_paths = l.setup.monte_carlo.paths;
    let mut paths = 1_000.min(max_paths);
    loop {
        let cfg = rflmm::mc::McConfig {
            paths: paths - paths % 2,
            ..l.setup.monte_carlo
        };
        let set = simulate(&l.ctx, &cfg)?;
        let r = mc_price(&set, &payoff)?;
        points.push(ConvergencePoint {
            sweep: "paths".into(),
            parameter: cfg.paths as f64,
            quantity: "analytic".into(),
            value: analytic.value,
            stderr: None,
        });
        points.push(ConvergencePoint {
            sweep: "paths".into(),
            parameter: cfg.paths as f64,
            quantity: "mc".into(),
            value: r.value,
            stderr: r.stderr,
        });
        if paths >= max_paths {
            break;
        }
        paths = (paths * 4).min(max_paths);
    }
    let text = convergence_csv(&points)?;
    print!("{text}");
    std::fs::write(out_path(common, "convergence.csv"), text).map_err(Error::from)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Price { instrument, common } => price(*instrument, common),
        Command::Validate { instrument, common, mc } => validate(*instrument, common, mc),
        Command::Inspect {
            what: InspectTarget::Adjustments { common },
        } => inspect_adjustments(common),
        Command::Converge { instrument, common, mc } => converge(*instrument, common, mc),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Model(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Validation) => {
            eprintln!("validation failed: analytic and Monte Carlo prices differ by more than 3 standard errors");
            ExitCode::from(1)
        }
    }
}
