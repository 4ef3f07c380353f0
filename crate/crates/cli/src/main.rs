use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use captrans::demand;
use captrans::fixture;
use captrans::io::{load_bundle, read_json, write_bundle, write_json, Bundle};
use captrans::model::{ScenarioConfig, ScenarioMode};
use captrans::report;
use captrans::runner::{
    min_lcoe_search, parse_range, prepare, run_scenario, run_sweep, validate_inputs, write_artifacts, write_sweep_csv,
    SearchMethod, SolverChoice, SweepSpec,
};
use captrans::solver::SolveOptions;
use captrans::Error;

#[derive(Parser)]
#[command(name = "captrans", version, about = "Least-cost capacity transition and dispatch model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write its report.
    Run(RunArgs),
    /// Solve a grid of scenarios and write one CSV row per cell.
    Sweep(SweepArgs),
    /// Search electrification for the lowest LCOE under an emissions target.
    SearchLcoe(SearchArgs),
    /// Check an input bundle (and optionally a config) without solving.
    Validate(ValidateArgs),
    /// Write the bundled two-node test system as an input bundle.
    WriteFixture {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverKind {
    Builtin,
    Export,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    inputs: PathBuf,
    /// Scenario configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "builtin")]
    solver: SolverKind,
    /// MPS destination for `--solver export`; defaults to OUT/model.mps.
    #[arg(long)]
    mps_out: Option<PathBuf>,
    /// External solution (`NAME VALUE` lines) to import with `--solver export`.
    #[arg(long)]
    sol_in: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write the synthesized demand series into this directory.
    #[arg(long)]
    dump_demand: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    inputs: PathBuf,
    /// Template configuration supplying settings other than the grid axes.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Low-carbon percent grid as a:b:step (lcp+hve cells).
    #[arg(long, conflicts_with = "ghg")]
    lcp: Option<String>,
    /// Emissions reduction grid as a:b:step (ghg+hve cells).
    #[arg(long)]
    ghg: Option<String>,
    /// Electrification grid as a:b:step.
    #[arg(long, default_value = "0")]
    hve: String,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    inputs: PathBuf,
    /// Emissions reduction target as a fraction of the reference.
    #[arg(long)]
    ghg: f64,
    /// Template configuration supplying bounds and other settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// golden, golden:TOL or grid:N.
    #[arg(long, default_value = "golden")]
    search: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    inputs: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn load(inputs: &Path) -> Result<Bundle> {
    load_bundle(inputs).with_context(|| format!("loading input bundle {}", inputs.display()))
}

fn load_config(path: &Path) -> Result<ScenarioConfig> {
    read_json(path).with_context(|| format!("loading scenario config {}", path.display()))
}

fn cmd_run(a: RunArgs) -> Result<i32> {
    let bundle = load(&a.inputs)?;
    let config = load_config(&a.config)?;
    if let Some(dir) = &a.dump_demand {
        let p = prepare(&bundle, &config)?;
        demand::dump(&p.demand, dir)?;
    }
    let solver = match a.solver {
        SolverKind::Builtin => SolverChoice::Builtin(SolveOptions::default()),
        SolverKind::Export => SolverChoice::Export {
            mps_out: a.mps_out.clone().unwrap_or_else(|| a.out.join("model.mps")),
            sol_in: a.sol_in.clone(),
        },
    };
    let run = run_scenario(&bundle, &config, &solver)?;
    let written = write_artifacts(&a.out, &bundle, &config, &run)?;
    if let Some(s) = &run.search {
        write_json(&a.out.join("search.json"), s)?;
    }
    match &run.report {
        Some(r) => println!("{}: objective {:.6} LCOE {:.4} $/MWh", run.status, r.objective, r.lcoe),
        None => println!("{}", run.status),
    }
    for p in written {
        log::info!("wrote {}", p.display());
    }
    Ok(run.status.exit_code())
}

fn template(config: Option<&PathBuf>, mode: ScenarioMode) -> Result<ScenarioConfig> {
    Ok(match config {
        Some(p) => load_config(p)?,
        None => match mode {
            ScenarioMode::LcpHve => ScenarioConfig::lcp_hve(0.0, 0.0),
            _ => ScenarioConfig::ghg_hve(0.0, 0.0),
        },
    })
}

fn cmd_sweep(a: SweepArgs) -> Result<i32> {
    let bundle = load(&a.inputs)?;
    let hve = parse_range(&a.hve)?;
    let spec = match (&a.lcp, &a.ghg) {
        (Some(lcp), None) => {
            SweepSpec::lcp_hve(&parse_range(lcp)?, &hve, &template(a.config.as_ref(), ScenarioMode::LcpHve)?, a.jobs)?
        }
        (None, Some(ghg)) => {
            SweepSpec::omega_hve(&parse_range(ghg)?, &hve, &template(a.config.as_ref(), ScenarioMode::GhgHve)?, a.jobs)?
        }
        _ => bail!("give exactly one of --lcp or --ghg"),
    };
    let cells = run_sweep(&bundle, &spec, &SolveOptions::default());
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let path = a.out.join("sweep.csv");
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_sweep_csv(file, &cells)?;
    let failed = cells.iter().filter(|c| c.failed()).count();
    println!("{} cells, {} failed; wrote {}", cells.len(), failed, path.display());
    Ok(if failed == cells.len() { 1 } else { 0 })
}

fn cmd_search(a: SearchArgs) -> Result<i32> {
    let bundle = load(&a.inputs)?;
    let method: SearchMethod = a.search.parse()?;
    let mut config = match &a.config {
        Some(p) => load_config(p)?,
        None => ScenarioConfig::min_lcoe(a.ghg),
    };
    config.mode = ScenarioMode::MinLcoe;
    config.omega = Some(a.ghg);
    config.lcp = None;
    config.p_heat = None;
    config.p_veh = None;
    let run = match min_lcoe_search(&bundle, &config, method, &SolveOptions::default()) {
        Ok(run) => run,
        Err(e) if matches!(e.source, Error::NoFeasiblePoint(_)) => {
            eprintln!("error: {e}");
            return Ok(1);
        }
        Err(e) => return Err(e.into()),
    };
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    if let Some(s) = &run.search {
        write_json(&a.out.join("search.json"), s)?;
        if let Some(r) = &run.report {
            println!(
                "best HVE {:.4}: LCOE {:.4} $/MWh, realized LCP {:.2}% ({} evaluations)",
                s.hve,
                s.lcoe,
                r.lcp_realized_pct,
                s.trace.len()
            );
        }
    }
    if let Some(r) = &run.report {
        write_json(&a.out.join("report.json"), r)?;
        let path = a.out.join("report.csv");
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        report::write_csv(file, std::slice::from_ref(r))?;
    }
    Ok(run.status.exit_code())
}

fn cmd_validate(a: ValidateArgs) -> Result<i32> {
    let bundle = load(&a.inputs)?;
    let config = a.config.as_deref().map(load_config).transpose()?;
    match validate_inputs(&bundle, config.as_ref()) {
        Ok(()) => {
            println!("ok: {} nodes, {} interfaces, {} hours", bundle.network.nodes.len(), bundle.network.interfaces.len(), bundle.series.hours);
            Ok(0)
        }
        Err(Error::Validation(violations)) => {
            for v in &violations {
                println!("{v}");
            }
            println!("{} violation(s)", violations.len());
            Ok(1)
        }
        Err(e) => {
            println!("{e}");
            Ok(1)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::SearchLcoe(a) => cmd_search(a),
        Command::Validate(a) => cmd_validate(a),
        Command::WriteFixture { out } => write_bundle(&fixture::two_node_48h(), &out)
            .map(|files| {
                println!("wrote {} files to {}", files.len(), out.display());
                0
            })
            .map_err(Into::into),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
