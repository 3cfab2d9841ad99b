use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use underlay_cli::sweep::{asymptote, RunOptions};
use underlay_cli::validation::ValidateOptions;
use underlay_cli::{figure_preset, run_sweep, table, validate_mode, SweepSpec};
use underlay_core::analytic::e2e_outage_quadrature;
use underlay_core::model::validate;
use underlay_core::{
    db_to_linear, e2e_outage_robust, estimate_outage, AsymptoticRegime, ConstantVariant,
    DiversityScheme, HopConfig, SystemConfig,
};

#[derive(Parser)]
#[command(
    name = "underlay",
    version,
    about = "Outage analysis of an underlay cognitive dual-hop relay link"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a figure preset sweep.
    Figure {
        #[arg(value_parser = ["fig2", "fig3", "fig4"])]
        name: String,
        /// Print the preset as JSON instead of running it.
        #[arg(long)]
        dump_config: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run the sweep described by a JSON file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Closed form vs. quadrature vs. Monte Carlo over a sweep, with pass/fail gates.
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// Perturb the series weights by this relative amount (negative control).
        #[arg(long, hide = true)]
        corrupt_series: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a single configuration.
    Point(PointArgs),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_mc: bool,
    #[arg(long, value_enum, default_value_t = Variant::Derived)]
    asymptotic_variant: Variant,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Derived,
    Printed,
}

impl From<Variant> for ConstantVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Derived => ConstantVariant::Derived,
            Variant::Printed => ConstantVariant::Printed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Mrc,
    Sc,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, value_enum, default_value_t = Scheme::Mrc)]
    scheme: Scheme,
    /// Source transmit antennas.
    #[arg(long, default_value_t = 2)]
    source: u32,
    /// Relay antennas (receive on hop 1, transmit on hop 2).
    #[arg(long, default_value_t = 2)]
    relay: u32,
    /// Destination receive antennas.
    #[arg(long, default_value_t = 2)]
    destination: u32,
    /// Primary receiver antennas.
    #[arg(long, default_value_t = 1)]
    primary: u32,
    #[arg(long, default_value_t = 0.0)]
    kappa: f64,
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    gamma_db: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pmax_db: f64,
    /// Desired-link mean gain x̄.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    mean_gain_db: f64,
    /// Interference-link mean gain ȳ.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    ybar_db: f64,
    /// Interference threshold w.
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    w_db: f64,
    /// Noise power N₀ (linear).
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    #[command(flatten)]
    common: Common,
}

fn run_options(spec: &SweepSpec, common: &Common) -> RunOptions {
    RunOptions {
        workers: common.workers,
        variant: common.asymptotic_variant.into(),
        mc_enabled: spec.mc.enabled && !common.no_mc,
        trials: common.trials.unwrap_or(spec.mc.trials),
        seed: common.seed.unwrap_or(spec.mc.seed),
    }
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn sweep(spec: &SweepSpec, common: &Common) -> anyhow::Result<ExitCode> {
    let rows = run_sweep(spec, &run_options(spec, common))?;
    table::write_csv(output(&common.out)?, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn point(args: &PointArgs) -> anyhow::Result<ExitCode> {
    let hop = |m_tx, n_rx| HopConfig {
        m_tx,
        n_rx,
        mean_gain: db_to_linear(args.mean_gain_db),
        interference_mean_gain: db_to_linear(args.ybar_db),
        interference_threshold: db_to_linear(args.w_db),
        kappa_t: args.kappa,
        kappa_r: args.kappa,
        noise_psd: args.noise,
    };
    let cfg = SystemConfig {
        hop1: hop(args.source, args.relay),
        hop2: hop(args.relay, args.destination),
        primary_antennas: args.primary,
        p_max: db_to_linear(args.pmax_db),
        scheme: match args.scheme {
            Scheme::Mrc => DiversityScheme::TasMrc,
            Scheme::Sc => DiversityScheme::TasSc,
        },
        gamma_th: db_to_linear(args.gamma_db),
    };
    let report = validate(&cfg);
    if report.has_violations() {
        anyhow::bail!("invalid configuration: {report}");
    }
    let c = &args.common;
    let variant: ConstantVariant = c.asymptotic_variant.into();
    let exact = e2e_outage_robust(cfg.gamma_th, &cfg)?;
    let mut out = output(&c.out)?;
    writeln!(out, "analytic,{}", table::format_real(exact.value))?;
    writeln!(
        out,
        "quadrature,{}",
        table::format_real(e2e_outage_quadrature(cfg.gamma_th, &cfg)?)
    )?;
    for (name, regime) in [
        ("floor", AsymptoticRegime::HighPmax),
        ("high_gain", AsymptoticRegime::HighPmaxAndGain),
    ] {
        let v = asymptote(&cfg, regime, variant)
            .map(table::format_real)
            .unwrap_or_default();
        writeln!(out, "asymptotic_{name},{v}")?;
    }
    if !c.no_mc {
        let trials = c.trials.unwrap_or(1_000_000);
        let seed = c.seed.unwrap_or(42);
        let m = match c.workers {
            Some(w) => {
                underlay_core::montecarlo::estimate_outage_with_workers(&cfg, trials, seed, w)?
            }
            None => estimate_outage(&cfg, trials, seed)?,
        };
        writeln!(out, "mc_estimate,{}", table::format_real(m.estimate))?;
        writeln!(out, "mc_stderr,{}", table::format_real(m.stderr))?;
        writeln!(out, "trials,{trials}")?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Figure {
            name,
            dump_config,
            common,
        } => {
            let spec = figure_preset(&name)?;
            if dump_config {
                writeln!(output(&common.out)?, "{}", spec.to_json())?;
                return Ok(ExitCode::SUCCESS);
            }
            sweep(&spec, &common)
        }
        Command::Sweep { config, common } => sweep(&SweepSpec::load(&config)?, &common),
        Command::Validate {
            config,
            corrupt_series,
            common,
        } => {
            let spec = SweepSpec::load(&config)?;
            let opts = ValidateOptions {
                run: Some(run_options(&spec, &common)),
                corrupt_series,
            };
            let outcome = validate_mode(&spec, &opts)?;
            table::write_csv(output(&common.out)?, &outcome.rows)?;
            if common.out.is_some() {
                print!("{outcome}");
            } else {
                eprint!("{outcome}");
            }
            Ok(if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Point(args) => point(&args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
