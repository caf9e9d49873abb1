use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use hsf_core::config::parse_config;
use hsf_core::explorer::{Explorer, MAX_EXPLORE_N};
use hsf_core::export::{render_table, wait_for_dot, write_csv, write_trace};
use hsf_core::{
    run_experiment, wait_for_graph, Bounds, Error, EstimateRow, ExperimentConfig, Ordering,
    RunOptions, Variant, Verdict,
};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_BOUND: u8 = 4;

#[derive(Parser)]
#[command(
    name = "hsf-sim",
    version,
    about = "Grid controller-network deadlock simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// key=value experiment configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of runs (overrides the config)
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Write the event log (JSON lines) here
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    /// Write the wait-for graph (DOT) here
    #[arg(long, global = true)]
    dot: Option<PathBuf>,
    /// Write the results table (CSV) here
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// One seeded run
    Run,
    /// Monte Carlo estimate for the configured cell
    Estimate,
    /// Estimates over orderings x variants
    Sweep {
        /// Comma-separated variants
        #[arg(long, value_delimiter = ',', default_values_t = default_variants())]
        variants: Vec<Variant>,
        /// Comma-separated orderings
        #[arg(long, value_delimiter = ',', default_values_t = Ordering::ALL.to_vec())]
        orderings: Vec<Ordering>,
    },
    /// Exhaustive deadlock check
    Check {
        #[arg(long, default_value_t = Bounds::default().max_states)]
        max_states: usize,
        #[arg(long, default_value_t = Bounds::default().max_depth)]
        max_depth: u32,
        /// Only the first K packets of the sequence
        #[arg(long)]
        prefix: Option<usize>,
    },
}

fn default_variants() -> Vec<Variant> {
    vec![
        Variant::basic(),
        Variant::queue(1),
        Variant::parallel(),
        Variant::acks_ne(),
    ]
}

/// An error carrying its process exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvariantBreach { .. } | Error::RoutingViolation { .. } => EXIT_INVARIANT,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            err: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        let code = match err.downcast_ref::<Error>() {
            Some(e) => exit_code(e),
            None if err.downcast_ref::<io::Error>().is_some() => EXIT_IO,
            None => EXIT_CONFIG,
        };
        Failure { code, err }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: Cli) -> Outcome {
    init_threads()?;
    let cfg = load_config(&cli.common)?;
    let out = &cli.common;
    match cli.command {
        Command::Run => cmd_run(&cfg, out),
        Command::Estimate => cmd_sweep(&cfg, out, &[cfg.variant], &[cfg.ordering]),
        Command::Sweep {
            variants,
            orderings,
        } => cmd_sweep(&cfg, out, &variants, &orderings),
        Command::Check {
            max_states,
            max_depth,
            prefix,
        } => cmd_check(
            &cfg,
            out,
            Bounds {
                max_states,
                max_depth,
                sequence_prefix: prefix,
            },
        ),
    }
}

fn init_threads() -> Outcome {
    let Ok(raw) = std::env::var("HSF_SIM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure {
            code: EXIT_CONFIG,
            err: anyhow!("HSF_SIM_THREADS: expected a positive integer, got '{raw}'"),
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("starting worker pool")?;
    Ok(())
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(runs) = common.runs {
        cfg.runs = runs;
    }
    Ok(cfg)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn save(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> hsf_core::Result<()>,
) -> anyhow::Result<()> {
    let mut w = create(path)?;
    write(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_run(cfg: &ExperimentConfig, out: &Common) -> Outcome {
    if out.csv.is_some() {
        return Err(anyhow!("--csv applies to estimate and sweep").into());
    }
    let sim = cfg.sim();
    let grid = sim.grid()?;
    let record = cfg.trace || out.trace.is_some();
    let mut world = hsf_core::World::new(&grid, sim)?;
    let mut resolver = hsf_core::engine::SeededResolver::new(cfg.seed);
    let result = world.run(
        &mut resolver,
        cfg.seed,
        RunOptions {
            record_trace: record,
            check_invariants: true,
        },
    )?;
    let graph = wait_for_graph(&world);
    let mut stdout = io::stdout().lock();
    let status = if result.deadlocked {
        format!(
            "deadlock at tick {}",
            result.deadlock_tick.unwrap_or(result.time)
        )
    } else if world.is_complete() {
        format!("completed at tick {}", result.time)
    } else {
        format!("horizon {} reached", result.time)
    };
    writeln!(
        stdout,
        "{} {} n={} seed={}: acks={} {status}",
        cfg.variant, cfg.ordering, cfg.n, cfg.seed, result.acks
    )
    .context("writing to stdout")?;
    for cy in &graph.cycles {
        let names: Vec<String> = cy
            .iter()
            .chain(cy.first())
            .map(ToString::to_string)
            .collect();
        writeln!(stdout, "wait-for cycle: {}", names.join(" -> ")).context("writing to stdout")?;
    }
    if let Some(events) = &result.events {
        match &out.trace {
            Some(path) => save(path, |w| write_trace(w, events))?,
            None => write_trace(&mut stdout, events)?,
        }
    }
    if let Some(path) = &out.dot {
        save(path, |w| {
            Ok(w.write_all(wait_for_dot(cfg.n, &graph).as_bytes())?)
        })?;
    }
    Ok(())
}

fn cmd_sweep(
    cfg: &ExperimentConfig,
    out: &Common,
    variants: &[Variant],
    orderings: &[Ordering],
) -> Outcome {
    if out.trace.is_some() || out.dot.is_some() {
        return Err(anyhow!("--trace and --dot apply to run and check").into());
    }
    let mut rows: Vec<EstimateRow> = Vec::new();
    let mut worst: Option<Failure> = None;
    for &ordering in orderings {
        for &variant in variants {
            let mut sim = cfg.sim();
            sim.ordering = ordering;
            sim.variant = variant;
            match run_experiment(sim, cfg.runs, cfg.seed) {
                Ok(row) => rows.push(row),
                Err(e) => {
                    eprintln!("cell {ordering} / {variant}: {e}");
                    let f = Failure::from(e);
                    if worst.as_ref().is_none_or(|w| f.code > w.code) {
                        worst = Some(f);
                    }
                }
            }
        }
    }
    print!("{}", render_table(&rows));
    if let Some(path) = &out.csv {
        save(path, |w| write_csv(w, &rows))?;
    }
    match worst {
        Some(f) => Err(Failure {
            code: f.code,
            err: anyhow!(
                "{} cell(s) failed",
                orderings.len() * variants.len() - rows.len()
            ),
        }),
        None => Ok(()),
    }
}

fn cmd_check(cfg: &ExperimentConfig, out: &Common, bounds: Bounds) -> Outcome {
    if out.csv.is_some() {
        return Err(anyhow!("--csv applies to estimate and sweep").into());
    }
    let sim = cfg.sim();
    let grid = sim.grid()?;
    if cfg.n > MAX_EXPLORE_N {
        return Err(anyhow!("exhaustive checking supports n <= {MAX_EXPLORE_N}").into());
    }
    let verdict = Explorer::new(&grid, sim, bounds.sequence_prefix)?.explore(bounds)?;
    match &verdict {
        Verdict::DeadlockFree { states, depth } => {
            println!("DeadlockFree ({states} states, depth {depth})")
        }
        Verdict::DeadlockReachable { trace, states } => {
            println!(
                "DeadlockReachable ({states} states, deadlock at tick {})",
                trace.deadlock_tick
            )
        }
        Verdict::BoundExceeded { states } => println!("BoundExceeded ({states} states)"),
    }
    let wants_export = out.trace.is_some() || out.dot.is_some();
    match &verdict {
        Verdict::DeadlockReachable { trace, .. } => {
            let (result, world) = trace.replay(
                &grid,
                sim,
                RunOptions {
                    record_trace: true,
                    check_invariants: true,
                },
            )?;
            let graph = wait_for_graph(&world);
            for cy in &graph.cycles {
                let names: Vec<String> = cy
                    .iter()
                    .chain(cy.first())
                    .map(ToString::to_string)
                    .collect();
                println!("wait-for cycle: {}", names.join(" -> "));
            }
            if let Some(path) = &out.trace {
                let events = result.events.unwrap_or_default();
                save(path, |w| write_trace(w, &events))?;
            }
            if let Some(path) = &out.dot {
                save(path, |w| {
                    Ok(w.write_all(wait_for_dot(cfg.n, &graph).as_bytes())?)
                })?;
            }
            Ok(())
        }
        Verdict::BoundExceeded { .. } => Err(Failure {
            code: EXIT_BOUND,
            err: anyhow!("state space exceeds the bounds; verdict unknown"),
        }),
        Verdict::DeadlockFree { .. } if wants_export => Err(Failure {
            code: EXIT_CONFIG,
            err: anyhow!("no counterexample trace to export"),
        }),
        Verdict::DeadlockFree { .. } => Ok(()),
    }
}
