//! `sortflow`: one-shot solves and lifelong simulation sweeps.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::Parser;
use rayon::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sortflow::domain::{parse_agents, AgentSpec, GridMap, OneShotInstance};
use sortflow::flow::FlowNetwork;
use sortflow::ito::{build_ito, estimate_arrivals};
use sortflow::lifelong::{run, solve_stride, Algorithm, SimConfig};
use sortflow::pito::build_pito;
use sortflow::report::{companion_path, metrics_csv, write_event_log, write_metrics_csv, RunRecord};

#[derive(Debug, Parser)]
#[command(name = "sortflow", version, about = "Station assignment and path finding for grid sortation centers")]
#[command(arg_required_else_help = true)]
struct Args {
    /// Map file (`.` free, `@` obstacle, `T` station target, `B` bin).
    #[arg(long)]
    map: PathBuf,

    /// Number of agents.
    #[arg(long, default_value_t = 20)]
    agents: usize,

    /// Comma-separated algorithms: ito, ito-l, pito, pito-l, h-inf-l, h-q-l, h-1-l.
    #[arg(long, value_delimiter = ',', default_value = "pito-l")]
    algo: Vec<String>,

    /// Stride W between solves.
    #[arg(long, default_value_t = 30)]
    stride: u32,

    /// Simulated time steps.
    #[arg(long, default_value_t = 600)]
    horizon: u32,

    /// Processing time of a working slot.
    #[arg(long = "T", default_value_t = 10)]
    t: u32,

    /// Working slots per window.
    #[arg(long = "K", default_value_t = 9)]
    k: u32,

    /// Delivery time before an admitted agent comes back.
    #[arg(long, default_value_t = 30)]
    kappa: u32,

    /// Station copies per round for h-q-l (default ceil(M/N) + 5).
    #[arg(long = "Q")]
    q: Option<usize>,

    /// First seed; repetitions use consecutive seeds.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Number of seeds per algorithm.
    #[arg(long, default_value_t = 1)]
    reps: u64,

    /// Metrics CSV; the timeline goes to `<out>.timeline.csv`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Solve one instance and print the solution instead of simulating.
    #[arg(long)]
    oneshot: bool,

    /// Agents for --oneshot, one `row col start_time` per line. Without it
    /// agents start on random bins at time 0.
    #[arg(long)]
    scenario: Option<PathBuf>,

    /// With --oneshot, write the flow network of the first flow-based
    /// algorithm as an edge list.
    #[arg(long)]
    dump_network: Option<PathBuf>,

    /// Report measured solve times instead of `NA`.
    #[arg(long)]
    timing: bool,

    /// Parallel simulation jobs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LogMode {
    Off,
    Events,
    Debug,
}

fn log_mode() -> LogMode {
    match std::env::var("SORTFLOW_LOG").as_deref() {
        Err(_) | Ok("") | Ok("off") => LogMode::Off,
        Ok("events") => LogMode::Events,
        Ok("debug") => LogMode::Debug,
        Ok(other) => {
            eprintln!("warning: SORTFLOW_LOG={other} not understood, expected off, events or debug");
            LogMode::Off
        }
    }
}

fn load_map(path: &Path) -> Result<Arc<GridMap>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read map {}", path.display()))?;
    let map = GridMap::parse(&text).with_context(|| format!("invalid map {}", path.display()))?;
    Ok(Arc::new(map))
}

fn parse_algorithms(names: &[String]) -> Result<Vec<Algorithm>> {
    if names.is_empty() {
        bail!("--algo needs at least one algorithm");
    }
    names.iter().map(|n| n.parse::<Algorithm>().map_err(Into::into)).collect()
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mode = log_mode();
    if mode == LogMode::Debug {
        env_logger::Builder::new().filter_level(log::LevelFilter::Debug).init();
    }
    match execute(&args, mode) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(args: &Args, mode: LogMode) -> Result<()> {
    let map = load_map(&args.map)?;
    let algorithms = parse_algorithms(&args.algo)?;
    if args.q.is_some() && !algorithms.iter().any(|a| a.uses_q()) {
        eprintln!("warning: --Q only affects h-q-l and is ignored");
    }
    if args.oneshot {
        oneshot(args, map, &algorithms)
    } else {
        if args.scenario.is_some() || args.dump_network.is_some() {
            eprintln!("warning: --scenario and --dump-network only apply with --oneshot");
        }
        simulate(args, map, &algorithms, mode)
    }
}

fn oneshot_agents(args: &Args, map: &GridMap) -> Result<Vec<AgentSpec>> {
    if let Some(path) = &args.scenario {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read scenario {}", path.display()))?;
        return parse_agents(&text, map).with_context(|| format!("invalid scenario {}", path.display()));
    }
    let mut bins = map.bins().to_vec();
    if args.agents > bins.len() {
        bail!("{} agents do not fit on {} bins; pass --scenario", args.agents, bins.len());
    }
    bins.shuffle(&mut ChaCha8Rng::seed_from_u64(args.seed));
    Ok(bins
        .into_iter()
        .take(args.agents)
        .enumerate()
        .map(|(id, cell)| AgentSpec {
            id,
            start_cell: cell,
            start_time: 0,
        })
        .collect())
}

fn flow_network(instance: &OneShotInstance, algorithm: Algorithm) -> Result<Option<FlowNetwork>> {
    Ok(match algorithm {
        Algorithm::Ito(p) => Some(build_ito(instance, &estimate_arrivals(instance), p)?.0),
        Algorithm::Pito(p) => Some(build_pito(instance, p)?.0),
        _ => None,
    })
}

fn oneshot(args: &Args, map: Arc<GridMap>, algorithms: &[Algorithm]) -> Result<()> {
    let agents = oneshot_agents(args, &map)?;
    let instance = OneShotInstance::new(map.clone(), agents, args.t, args.k)?;
    let q = args.q.unwrap_or_else(|| sortflow::lifelong::default_q(instance.agents.len(), map.station_count()));
    if let Some(path) = &args.dump_network {
        let Some(net) = algorithms.iter().find_map(|&a| flow_network(&instance, a).transpose()).transpose()? else {
            bail!("--dump-network needs a flow-based algorithm (ito or pito)");
        };
        let file = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        net.write_edge_list(io::BufWriter::new(file))?;
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for &algorithm in algorithms {
        let solution = solve_stride(&instance, algorithm, q, args.seed)?.solution;
        writeln!(out, "algo={algorithm}")?;
        for (i, a) in instance.agents.iter().enumerate() {
            match solution.assignment.get(i) {
                Some(s) => {
                    let path = solution.path_of(a.id).map(|p| p.to_string()).unwrap_or_default();
                    let (row, col) = map.coords(map.target(s.station));
                    writeln!(
                        out,
                        "agent={} station={} target=({row},{col}) slot={} admit={} path={path}",
                        a.id,
                        s.station,
                        s.slot,
                        instance.slot_time(s.slot)
                    )?;
                }
                None => {
                    let note = if solution.demoted.contains(&i) { " demoted" } else { "" };
                    writeln!(out, "agent={} station=NULL{note}", a.id)?;
                }
            }
        }
        writeln!(out, "idle_time={}", solution.total_idle_time)?;
    }
    Ok(())
}

fn simulate(args: &Args, map: Arc<GridMap>, algorithms: &[Algorithm], mode: LogMode) -> Result<()> {
    if args.reps == 0 {
        bail!("--reps must be at least 1");
    }
    let cells: Vec<(Algorithm, u64)> = algorithms
        .iter()
        .flat_map(|&a| (0..args.reps).map(move |r| (a, args.seed + r)))
        .collect();
    let configs: Vec<SimConfig> = cells
        .iter()
        .map(|&(algorithm, seed)| SimConfig {
            map: map.clone(),
            agents: args.agents,
            algorithm,
            stride: args.stride,
            horizon: args.horizon,
            processing_time: args.t,
            slots: args.k,
            kappa: args.kappa,
            q: args.q,
            seed,
        })
        .collect();
    configs[0].validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .context("cannot start worker threads")?;
    let records: Vec<RunRecord> = pool.install(|| {
        configs
            .par_iter()
            .map(|c| {
                let result = run(c).with_context(|| format!("{} with seed {}", c.algorithm, c.seed))?;
                log::info!("{} seed {}: idle {}", c.algorithm, c.seed, result.metrics.total_idle_time);
                Ok(RunRecord {
                    algo: c.algorithm.name().to_string(),
                    seed: c.seed,
                    agents: c.agents,
                    stride: c.stride,
                    result,
                })
            })
            .collect::<Result<_>>()
    })?;

    match &args.out {
        Some(path) => {
            write_metrics_csv(&records, path, args.timing)?;
            if mode != LogMode::Off {
                write_event_log(&records, &companion_path(path, "events.log"))?;
            }
        }
        None => {
            print!("{}", metrics_csv(&records, args.timing));
            if mode != LogMode::Off {
                eprint!("{}", sortflow::report::event_log(&records));
            }
        }
    }
    Ok(())
}
