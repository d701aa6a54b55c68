use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use channel_econ::io::{write_outputs, RunConfig, Table, Topology, WorldSelection};
use channel_econ::report::{analytic, reproduce, simulated, Report, FIGURE_IDS};
use channel_econ::sim::with_thread_cap;
use channel_econ::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
/// Tables with at most this many rows are echoed to stdout.
const ECHO_ROWS: usize = 30;

#[derive(Parser)]
#[command(name = "channel-econ", version, about = "Payment-channel economics: lifetimes, fees, fee-market equilibria and simulations")]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// JSON run config, or a manifest from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Desk-scale replications, horizons and grids.
    #[arg(long, global = true)]
    scaled_down: bool,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fee grid in BTC per record, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    phi: Option<Vec<f64>>,
    /// User counts, comma separated.
    #[arg(short = 'n', global = true, value_delimiter = ',')]
    n: Option<Vec<f64>>,
    /// Channel capacities, comma separated.
    #[arg(short = 'w', global = true, value_delimiter = ',')]
    w: Option<Vec<f64>>,
    #[arg(long, global = true, value_enum)]
    world: Option<WorldArg>,
    #[arg(long, global = true)]
    replications: Option<usize>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum WorldArg {
    WithLightning,
    NoLightning,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Expected channel lifetimes.
    Lifetime {
        /// Alice's balance in transfers; every balance when omitted.
        #[arg(long)]
        m: Option<f64>,
    },
    /// Optimal capacity and fees per record price.
    Capacity {
        /// Transfer size in BTC.
        #[arg(long)]
        z: Option<f64>,
    },
    /// Venue thresholds per record price.
    Thresholds,
    /// Records demanded per pair.
    Demand,
    /// Equilibrium fee, closed form against numeric.
    Equilibrium,
    /// Equilibrium fee and activity over user counts.
    PriceCurve,
    /// Star topology against pairs.
    Star {
        #[arg(long)]
        z: Option<f64>,
    },
    /// Monte-Carlo experiments.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Data for one figure family.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIGURE_IDS))]
        figure_id: String,
    },
}

#[derive(Subcommand)]
enum SimCommand {
    /// Best reset radius per capacity and its linear fit.
    ResetRadius,
    /// Best capacity per record price and its power-law fit.
    Capacity,
    /// Simulated demand curves for both worlds.
    Demand,
    /// Simulated equilibrium fee over user counts.
    Equilibrium,
    /// Network statistics for each record supply.
    Network,
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Lifetime { .. } => "lifetime".into(),
            Command::Capacity { .. } => "capacity".into(),
            Command::Thresholds => "thresholds".into(),
            Command::Demand => "demand".into(),
            Command::Equilibrium => "equilibrium".into(),
            Command::PriceCurve => "price-curve".into(),
            Command::Star { .. } => "star".into(),
            Command::Sim(s) => format!(
                "sim {}",
                match s {
                    SimCommand::ResetRadius => "reset-radius",
                    SimCommand::Capacity => "capacity",
                    SimCommand::Demand => "demand",
                    SimCommand::Equilibrium => "equilibrium",
                    SimCommand::Network => "network",
                }
            ),
            Command::Reproduce { figure_id } => format!("reproduce {figure_id}"),
        }
    }
}

fn build_config(opts: &GlobalOpts, command: &Command) -> Result<RunConfig, Error> {
    let mut cfg = match &opts.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if opts.scaled_down {
        cfg.scaled_down = true;
    }
    if let Some(out) = &opts.out {
        cfg.output_dir = out.clone();
    }
    if let Some(phi) = &opts.phi {
        cfg.phi_grid = Some(phi.clone());
    }
    if let Some(n) = &opts.n {
        cfg.n_grid = Some(n.clone());
    }
    if let Some(w) = &opts.w {
        cfg.w_grid = Some(w.clone());
    }
    if let Some(world) = opts.world {
        cfg.world = match world {
            WorldArg::WithLightning => WorldSelection::WithLightning,
            WorldArg::NoLightning => WorldSelection::NoLightning,
            WorldArg::Both => WorldSelection::Both,
        };
    }
    if opts.replications.is_some() {
        cfg.replications = opts.replications;
    }
    if let Command::Capacity { z: Some(z) } | Command::Star { z: Some(z) } = command {
        cfg.z = *z;
    }
    if let Command::Star { .. } = command {
        cfg.topology = Topology::Star;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(command: &Command, cfg: &RunConfig) -> Result<Report, Error> {
    match command {
        Command::Lifetime { m } => analytic::lifetime(cfg, *m),
        Command::Capacity { .. } => analytic::capacity(cfg),
        Command::Thresholds => analytic::thresholds(cfg),
        Command::Demand => analytic::demand(cfg),
        Command::Equilibrium => analytic::equilibrium(cfg),
        Command::PriceCurve => analytic::price_curve(cfg),
        Command::Star { .. } => analytic::star(cfg),
        Command::Sim(SimCommand::ResetRadius) => simulated::reset_radius(cfg),
        Command::Sim(SimCommand::Capacity) => simulated::capacity(cfg),
        Command::Sim(SimCommand::Demand) => simulated::demand(cfg),
        Command::Sim(SimCommand::Equilibrium) => simulated::price(cfg),
        Command::Sim(SimCommand::Network) => simulated::network(cfg),
        Command::Reproduce { figure_id } => reproduce(figure_id, cfg),
    }
}

fn print_table(t: &Table) {
    let cells: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|c| match c {
                    channel_econ::io::Cell::Float(v) if v.is_finite() => format!("{v:.6e}"),
                    other => other.render(),
                })
                .collect()
        })
        .collect();
    let widths: Vec<usize> = (0..t.columns.len())
        .map(|j| cells.iter().map(|r| r[j].len()).chain([t.columns[j].len()]).max().unwrap_or(0))
        .collect();
    let line = |row: &[String]| {
        row.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect::<Vec<_>>().join("  ")
    };
    println!("{}", line(&t.columns));
    for r in &cells {
        println!("{}", line(r));
    }
}

fn report_error(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { EXIT_NUMERIC })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli.opts, &cli.command) {
        Ok(cfg) => cfg,
        Err(e) => return report_error(&e),
    };
    let report = match with_thread_cap(|| run(&cli.command, &cfg)).and_then(|r| r) {
        Ok(r) => r,
        Err(e) => return report_error(&e),
    };
    let name = cli.command.name();
    let (manifest_path, manifest) = match write_outputs(&cfg, &name, &report.tables, &report.results) {
        Ok(m) => m,
        Err(e) => return report_error(&e),
    };
    for t in &report.tables {
        if t.rows.len() <= ECHO_ROWS {
            println!("== {}", t.name);
            print_table(t);
        }
    }
    for (k, v) in &report.results {
        println!("{k} = {v:.6e}");
    }
    for o in &manifest.outputs {
        println!("wrote {} ({} rows)", cfg.output_dir.join(&o.file).display(), o.rows);
    }
    println!("wrote {}", manifest_path.display());
    ExitCode::SUCCESS
}
