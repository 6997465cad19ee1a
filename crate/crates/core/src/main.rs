use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use oppmac::config::{preset, presets, RawConfig, RunConfig, SweepKind};
use oppmac::model::Duplex;
use oppmac::opportunity::radius_residual;
use oppmac::optimizer::{closed_form, solve_optimal_p, RhsVariant};
use oppmac::output::{
    demo_csv, format_number, optimizer_csv, provenance_line, simulation_csv, write_outputs, Sidecar,
};
use oppmac::schemes::{build_scheme, AccessScheme};
use oppmac::simulator::{
    optimizer_sweep, replicate, simulation_sweep, two_pair_demo, DemoGains, MeasurementMode, SimulationRecord,
    SweepAxis,
};

#[derive(Parser)]
#[command(name = "oppmac", version, about = "Opportunistic random access for Poisson bipolar full-duplex networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal transmission probability from every solver variant.
    Solve(ConfigArgs),
    /// Closed-form approximate transmission probability (alpha = 4).
    Approx(ConfigArgs),
    /// Empty-ball radius and opportunistic probability.
    Op(ConfigArgs),
    /// Replicated simulation of the configured schemes at one operating point.
    Simulate(ConfigArgs),
    /// Simulation or optimizer sweep over the configured grid.
    Sweep(ConfigArgs),
    /// Two-pair comparison of Max TX, PC TX and Random TX.
    Demo(DemoArgs),
    /// Bundled parameter sets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// Names and descriptions of the presets.
    List,
    /// Print a preset as a config document.
    Show { name: String },
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// JSON config file; its keys override the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a bundled preset.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "OPPMAC_OUT_DIR", default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    replications: Option<usize>,
    /// Stem of the output file names.
    #[arg(long)]
    name: Option<String>,

    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta_db: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta_db: Option<f64>,
    #[arg(long, value_parser = parse_duplex)]
    duplex: Option<Duplex>,
    /// Measured interference (linear).
    #[arg(long, short = 'i')]
    interference: Option<f64>,
    /// Comma-separated scheme names.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// `auto`, `quadrature`, `arctan` or `arccot`.
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    fixed_p: Option<f64>,
    #[arg(long)]
    window_side: Option<f64>,
    #[arg(long)]
    slots: Option<u64>,
    #[arg(long)]
    warmup: Option<u64>,
    #[arg(long, value_parser = parse_measurement)]
    measurement: Option<MeasurementMode>,
    #[arg(long, value_parser = parse_axis)]
    sweep_axis: Option<SweepAxis>,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    sweep_values: Option<Vec<f64>>,
}

fn parse_duplex(s: &str) -> std::result::Result<Duplex, String> {
    match s {
        "full" => Ok(Duplex::Full),
        "half" => Ok(Duplex::Half),
        _ => Err("expected `full` or `half`".into()),
    }
}

fn parse_measurement(s: &str) -> std::result::Result<MeasurementMode, String> {
    match s {
        "instant" => Ok(MeasurementMode::Instant),
        "fading-averaged" => Ok(MeasurementMode::FadingAveraged),
        _ => Err("expected `instant` or `fading-averaged`".into()),
    }
}

fn parse_axis(s: &str) -> std::result::Result<SweepAxis, String> {
    s.parse().map_err(|e: oppmac::Error| e.to_string())
}

impl ConfigArgs {
    fn overrides(&self) -> RawConfig {
        RawConfig {
            lambda: self.lambda,
            alpha: self.alpha,
            theta: self.theta,
            theta_db: self.theta_db,
            d: self.d,
            beta: self.beta,
            beta_db: self.beta_db,
            duplex: self.duplex,
            schemes: self.schemes.clone(),
            solver: self.solver.clone(),
            tolerance: self.tolerance,
            interference: self.interference,
            fixed_p: self.fixed_p,
            window_side: self.window_side,
            slots: self.slots,
            warmup: self.warmup,
            replications: self.replications,
            seed: self.seed,
            measurement: self.measurement,
            sweep_axis: self.sweep_axis,
            sweep_values: self.sweep_values.clone(),
            name: self.name.clone(),
            ..Default::default()
        }
    }

    fn resolve(&self) -> Result<RunConfig> {
        let mut raw = match &self.preset {
            Some(name) => preset(name)?,
            None => RawConfig::default(),
        };
        if let Some(path) = &self.config {
            raw = raw.overlay(RawConfig::from_path(path)?);
        }
        raw = raw.overlay(self.overrides());
        Ok(RunConfig::from_raw(&raw)?)
    }
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 0.04)]
    h11: f64,
    #[arg(long, default_value_t = 0.04)]
    h22: f64,
    #[arg(long, default_value_t = 0.05)]
    h12: f64,
    #[arg(long, default_value_t = 0.05)]
    h21: f64,
    /// Constant interference from the rest of the network.
    #[arg(long, default_value_t = 0.01)]
    external: f64,
    #[arg(long, default_value_t = 0.8)]
    op1: f64,
    #[arg(long, default_value_t = 0.5)]
    op2: f64,
    #[arg(long, env = "OPPMAC_OUT_DIR", default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value = "demo")]
    name: String,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(args) => solve(&args.resolve()?),
        Command::Approx(args) => approx(&args.resolve()?),
        Command::Op(args) => op(&args.resolve()?),
        Command::Simulate(args) => simulate(&args.resolve()?, &args.out),
        Command::Sweep(args) => sweep(&args.resolve()?, &args.out),
        Command::Demo(args) => demo(&args),
        Command::Preset { action } => {
            match action {
                PresetAction::List => {
                    for p in presets() {
                        println!("{:<8} {}", p.name, p.description);
                    }
                }
                PresetAction::Show { name } => println!("{}", preset(&name)?.to_json()?),
            }
            Ok(())
        }
    }
}

fn solve(cfg: &RunConfig) -> Result<()> {
    let i = cfg.interference;
    println!("interference = {}", format_number(i));
    let mut quadrature_failed = None;
    for variant in RhsVariant::ALL {
        match solve_optimal_p(i, &cfg.params, variant, cfg.tolerance) {
            Ok(r) => println!(
                "{:<10} p* = {}  residual = {}  clamped = {}  R = {}",
                variant.as_str(),
                format_number(r.p_star),
                format_number(r.residual),
                r.clamped,
                format_number(r.ball_radius)
            ),
            Err(e) => {
                println!("{:<10} error: {e}", variant.as_str());
                if variant == RhsVariant::Quadrature {
                    quadrature_failed = Some(e);
                }
            }
        }
    }
    if let Some(e) = quadrature_failed {
        bail!("solver failed: {e}");
    }
    Ok(())
}

fn approx(cfg: &RunConfig) -> Result<()> {
    let c = closed_form(cfg.interference, &cfg.params).context("closed-form approximation failed")?;
    let q = c.coefficients;
    println!("interference = {}", format_number(cfg.interference));
    println!("regime = {:?}  x = {}", q.regime, format_number(q.x));
    println!(
        "C1 = {}  C2 = {}  C3 = {}",
        format_number(q.c1),
        format_number(q.c2),
        format_number(q.c3)
    );
    println!("root = {}", format_number(c.root));
    println!("p = {}", format_number(c.p));
    Ok(())
}

fn op(cfg: &RunConfig) -> Result<()> {
    let est = cfg.opportunity.estimate(cfg.interference, &cfg.params)?;
    println!("interference = {}", format_number(est.measured_interference));
    println!("R = {}", format_number(est.ball_radius));
    println!(
        "radius residual = {}",
        format_number(radius_residual(est.measured_interference, est.ball_radius, &cfg.params))
    );
    println!("OP = {}", format_number(est.op));
    Ok(())
}

fn build_schemes(cfg: &RunConfig) -> Result<Vec<Box<dyn AccessScheme>>> {
    cfg.schemes
        .iter()
        .map(|s| Ok(build_scheme(s, &cfg.scheme_config)?))
        .collect()
}

fn report_written(paths: (PathBuf, PathBuf)) {
    eprintln!("wrote {} and {}", paths.0.display(), paths.1.display());
}

fn simulate(cfg: &RunConfig, out: &Path) -> Result<()> {
    let schemes = build_schemes(cfg)?;
    let outcome = replicate(&cfg.replication_setup(), &schemes, cfg.replications, cfg.seed).map_err(|e| e.to_string());
    let records = vec![SimulationRecord {
        value: cfg.params.lambda,
        outcome,
    }];
    write_simulation(cfg, out, "simulate", SweepAxis::Lambda, &records)
}

fn write_simulation(cfg: &RunConfig, out: &Path, command: &str, axis: SweepAxis, records: &[SimulationRecord]) -> Result<()> {
    let csv = simulation_csv(axis, records, &cfg.schemes, &provenance_line(cfg)?)?;
    print!("{csv}");
    let errors: Vec<String> = records
        .iter()
        .filter_map(|r| r.outcome.as_ref().err().map(|e| format!("{}={}: {e}", axis, r.value)))
        .collect();
    let sidecar = Sidecar {
        command,
        seed: cfg.seed,
        config: cfg.emit(),
        errors: errors.clone(),
        results: records,
    };
    report_written(write_outputs(out, &cfg.name, &csv, &sidecar)?);
    if !errors.is_empty() {
        bail!("{} grid point(s) failed: {}", errors.len(), errors.join("; "));
    }
    Ok(())
}

fn sweep(cfg: &RunConfig, out: &Path) -> Result<()> {
    let Some(grid) = &cfg.sweep else {
        bail!("no sweep configured: set `sweep_axis` and `sweep_values` or use a preset");
    };
    match grid.kind {
        SweepKind::Simulation => {
            let schemes = build_schemes(cfg)?;
            let records = simulation_sweep(
                grid.axis,
                &grid.values,
                &cfg.replication_setup(),
                &schemes,
                cfg.replications,
                cfg.seed,
            )?;
            write_simulation(cfg, out, "sweep", grid.axis, &records)
        }
        SweepKind::Optimizer => {
            let records = optimizer_sweep(grid.axis, &grid.values, &cfg.params, cfg.interference, cfg.tolerance)?;
            let csv = optimizer_csv(grid.axis, &records, &provenance_line(cfg)?)?;
            print!("{csv}");
            let errors: Vec<String> = records
                .iter()
                .flat_map(|r| r.errors.iter().map(move |e| format!("{}={}: {e}", grid.axis, r.value)))
                .collect();
            let sidecar = Sidecar {
                command: "sweep",
                seed: cfg.seed,
                config: cfg.emit(),
                errors,
                results: &records,
            };
            report_written(write_outputs(out, &cfg.name, &csv, &sidecar)?);
            Ok(())
        }
    }
}

fn demo(args: &DemoArgs) -> Result<()> {
    let gains = DemoGains {
        h11: args.h11,
        h22: args.h22,
        h12: args.h12,
        h21: args.h21,
    };
    let rows = two_pair_demo(gains, args.external, [args.op1, args.op2])?;
    let inputs = serde_json::json!({
        "gains": gains,
        "external_interference": args.external,
        "op": [args.op1, args.op2],
    });
    let csv = demo_csv(&rows, &format!("# inputs={inputs}"))?;
    print!("{csv}");
    let sidecar = Sidecar {
        command: "demo",
        seed: 0,
        config: RawConfig::default(),
        errors: Vec::new(),
        results: serde_json::json!({ "inputs": inputs, "rows": rows }),
    };
    report_written(write_outputs(&args.out, &args.name, &csv, &sidecar)?);
    Ok(())
}
