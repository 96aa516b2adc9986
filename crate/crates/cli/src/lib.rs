//! Command-line front end: partitioning, the distributed evolutionary
//! algorithm, natural-cut preprocessing, benchmarks and convergence
//! analysis.

pub mod analyze;
pub mod io;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use evopart::engine::{restart_baseline, run, EngineConfig};
use evopart::evolution::OperatorRatios;
use evopart::multilevel::{partition, PartitionerConfig, Strength};
use evopart::natural_cuts::{preprocess_with, NaturalCutParams};
use evopart::{load_metis, seeded_rng, Graph};

#[derive(Debug, Parser)]
#[command(name = "evopart", version, about = "Multilevel and evolutionary graph partitioning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition a METIS graph once with the multilevel partitioner.
    Partition(PartitionArgs),
    /// Run the distributed evolutionary algorithm for a fixed time.
    Evolve(EvolveArgs),
    /// Discover natural cuts and write the contracted graph.
    NaturalCuts(NaturalCutsArgs),
    /// Benchmarks.
    #[command(subcommand)]
    Bench(Bench),
    /// Turn convergence CSVs into T_min, N_min, S_g and speedup curves.
    #[command(long_about = ANALYZE_HELP)]
    Analyze(AnalyzeArgs),
}

const ANALYZE_HELP: &str = "\
Turn convergence CSVs (worker_id,t_seconds,cut) into analysis curves.

Every CSV is one run. Files named <instance>.rep<N>.csv are repetitions of
<instance>; any other file is an instance of its own. Per run, events of all
workers are merged by time and reduced to their running minimum. Repetitions
of an instance are averaged event by event (r-th time with r-th time, r-th
cut with r-th cut) when all of them have the same number of events;
otherwise their events are merged into one running-minimum curve.

Times are divided by the instance base time: --t-base if given, otherwise
the mean time of each worker's first event, which is the end of its timed
calibration partition.

Outputs in --out-dir: t_min.csv, n_min.csv, s_g.csv and, with --baseline
(single-worker runs of the same instances), speedup.csv.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrengthArg {
    Strong,
    Eco,
}

impl From<StrengthArg> for Strength {
    fn from(s: StrengthArg) -> Self {
        match s {
            StrengthArg::Strong => Strength::Strong,
            StrengthArg::Eco => Strength::Eco,
        }
    }
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    /// Number of blocks.
    #[arg(long, short = 'k', default_value_t = 2)]
    pub k: usize,
    /// Allowed imbalance as a fraction (0.03 means 3%).
    #[arg(long, default_value_t = 0.03)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl BalanceArgs {
    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            bail!("--k must be at least 1");
        }
        if !(self.eps >= 0.0) {
            bail!("--eps must be non-negative");
        }
        Ok(())
    }

    fn config(&self, strength: StrengthArg) -> Result<PartitionerConfig> {
        self.validate()?;
        Ok(PartitionerConfig::new(strength.into(), self.k, self.eps).with_seed(self.seed))
    }
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub balance: BalanceArgs,
    #[arg(long, value_enum, default_value_t = StrengthArg::Strong)]
    pub strength: StrengthArg,
    /// Partition file; defaults to <graph>.part.<k>.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub balance: BalanceArgs,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub time: f64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Fresh individuals are created during the first time/F seconds.
    #[arg(long, default_value_t = evopart::engine::DEFAULT_FRACTION)]
    pub fraction: f64,
    /// Mutation weight out of ten; the rest goes to combination.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(0..=10))]
    pub coin: u32,
    /// Exchange with other workers every this many iterations.
    #[arg(long, default_value_t = 1)]
    pub comm_period: usize,
    /// Fixed population size instead of the timed estimate.
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long, value_enum, default_value_t = StrengthArg::Eco)]
    pub strength: StrengthArg,
    /// Best partition; defaults to <graph>.part.<k>.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Convergence CSV; defaults to <graph>.log.csv.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NaturalCutsArgs {
    pub graph: PathBuf,
    /// Size bound U; defaults to (1 + eps) n / (2k).
    #[arg(long = "U", alias = "u")]
    pub u: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10.0)]
    pub f: f64,
    #[arg(long, default_value_t = 2)]
    pub reps: usize,
    /// Used only to derive the default U.
    #[arg(long, short = 'k', default_value_t = 2)]
    pub k: usize,
    /// Used only to derive the default U.
    #[arg(long, default_value_t = 0.03)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cut-edge list; defaults to <graph>.cuts.
    #[arg(long)]
    pub cuts_out: Option<PathBuf>,
    /// Contracted METIS graph; defaults to <graph>.contracted.graph.
    #[arg(long)]
    pub graph_out: Option<PathBuf>,
    /// Node-to-cluster map, one line per node.
    #[arg(long)]
    pub map_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Bench {
    /// Equal budgets for the evolutionary algorithm and repeated restarts.
    RestartsVsEvolve(BenchArgs),
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub balance: BalanceArgs,
    /// Budget per trial and contender in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub time: f64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = StrengthArg::Eco)]
    pub strength: StrengthArg,
    /// Per-trial results as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(required = true)]
    pub csv: Vec<PathBuf>,
    /// Base time in seconds used to normalize every instance.
    #[arg(long)]
    pub t_base: Option<f64>,
    /// Single-worker runs of the same instances, for speedups.
    #[arg(long, num_args = 1..)]
    pub baseline: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn load(path: &Path) -> Result<Graph> {
    load_metis(path).with_context(|| format!("loading graph {}", path.display()))
}

fn sibling(graph: &Path, suffix: &str) -> PathBuf {
    let mut s = graph.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn budget(seconds: f64) -> Result<Duration> {
    if !(seconds > 0.0 && seconds.is_finite()) {
        bail!("--time must be a positive number of seconds");
    }
    Ok(Duration::from_secs_f64(seconds))
}

pub fn run_cli(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Partition(a) => cmd_partition(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::NaturalCuts(a) => cmd_natural_cuts(a),
        Command::Bench(Bench::RestartsVsEvolve(a)) => cmd_bench(a),
        Command::Analyze(a) => cmd_analyze(a),
    }
}

fn cmd_partition(a: PartitionArgs) -> Result<()> {
    let cfg = a.balance.config(a.strength)?;
    let g = load(&a.graph)?;
    let t0 = Instant::now();
    let p = partition(&g, &cfg);
    let elapsed = t0.elapsed();
    let out = a.output.unwrap_or_else(|| sibling(&a.graph, &format!(".part.{}", cfg.k)));
    io::write_partition(&out, p.assignment())?;
    println!("cut={} feasible={}", p.cut(), p.is_feasible());
    println!("time={:.3}s output={}", elapsed.as_secs_f64(), out.display());
    Ok(())
}

fn engine_config(
    balance: &BalanceArgs,
    strength: StrengthArg,
    workers: usize,
    time: f64,
) -> Result<EngineConfig> {
    if workers == 0 {
        bail!("--workers must be at least 1");
    }
    let cfg = balance.config(strength)?;
    let mut ec = EngineConfig::new(cfg, workers, budget(time)?);
    ec.seed = balance.seed;
    Ok(ec)
}

fn cmd_evolve(a: EvolveArgs) -> Result<()> {
    let mut ec = engine_config(&a.balance, a.strength, a.workers, a.time)?;
    if !(a.fraction >= 1.0) {
        bail!("--fraction must be at least 1");
    }
    ec.fraction = a.fraction;
    ec.ratios = OperatorRatios::with_coin(a.coin);
    ec.comm_period = a.comm_period.max(1);
    ec.population_size = a.population;
    let g = load(&a.graph)?;
    let res = run(&g, &ec)?;
    let out = a.output.unwrap_or_else(|| sibling(&a.graph, &format!(".part.{}", ec.partitioner.k)));
    let log_path = a.log.unwrap_or_else(|| sibling(&a.graph, ".log.csv"));
    io::write_partition(&out, res.best.partition().assignment())?;
    io::write_convergence_csv(&log_path, &res.log)?;
    println!("cut={} feasible={}", res.best.cut(), res.best.is_feasible());
    println!(
        "population={} t_bar={:.3}s events={} output={} log={}",
        res.population_size,
        res.t_bar,
        res.log.len(),
        out.display(),
        log_path.display()
    );
    for (w, s) in res.stats.iter().enumerate() {
        log::info!("worker {w}: {s:?}");
    }
    Ok(())
}

fn cmd_natural_cuts(a: NaturalCutsArgs) -> Result<()> {
    let g = load(&a.graph)?;
    if a.k == 0 {
        bail!("--k must be at least 1");
    }
    let u = match a.u {
        Some(u) => u,
        None => NaturalCutParams::preprocessing(&g, a.k, a.eps).u,
    };
    if !(u > 0.0) || !(a.alpha > 0.0) || !(a.f > 1.0) {
        bail!("need U > 0, alpha > 0 and f > 1");
    }
    let params = NaturalCutParams::new(u, a.alpha, a.f);
    let mut rng = seeded_rng(a.seed);
    let (coarse, map, cuts) = preprocess_with(&g, &params, a.reps, &mut rng);
    let cuts_out = a.cuts_out.unwrap_or_else(|| sibling(&a.graph, ".cuts"));
    let graph_out = a.graph_out.unwrap_or_else(|| sibling(&a.graph, ".contracted.graph"));
    io::write_cut_edges(&cuts_out, &cuts)?;
    std::fs::write(&graph_out, evopart::graph::write_metis(&coarse))
        .with_context(|| format!("writing {}", graph_out.display()))?;
    if let Some(path) = a.map_out {
        io::write_partition(&path, &map)?;
    }
    println!(
        "cut_edges={} nodes={} contracted_nodes={} contracted_edges={}",
        cuts.len(),
        g.n(),
        coarse.n(),
        coarse.m()
    );
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    if a.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let g = load(&a.graph)?;
    let base = engine_config(&a.balance, a.strength, a.workers, a.time)?;
    let mut rows = Vec::new();
    println!("{:>5} {:>10} {:>10} {:>8}", "trial", "evolve", "restarts", "runs");
    for trial in 0..a.trials {
        let seed = a.balance.seed.wrapping_add(trial as u64);
        let mut ec = base.clone();
        ec.seed = seed;
        let evo = run(&g, &ec)?;
        let rs = restart_baseline(&g, &ec.partitioner, ec.t_total, a.workers, seed)?;
        println!("{:>5} {:>10} {:>10} {:>8}", trial, evo.best.cut(), rs.best.cut(), rs.runs);
        rows.push((trial, evo.best.cut(), rs.best.cut(), rs.runs));
    }
    let wins = rows.iter().filter(|r| r.1 <= r.2).count();
    println!("evolve <= restarts in {wins}/{} trials", rows.len());
    if let Some(path) = a.csv {
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(["trial", "evolve_cut", "restart_cut", "restart_runs"])?;
        for (t, e, r, n) in rows {
            w.write_record([t.to_string(), e.to_string(), r.to_string(), n.to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<()> {
    if let Some(t) = a.t_base {
        if !(t > 0.0) {
            bail!("--t-base must be positive");
        }
    }
    let main = analyze::analyze(&analyze::load_instances(&a.csv)?, a.t_base)?;
    let baseline = if a.baseline.is_empty() {
        None
    } else {
        Some(analyze::analyze(&analyze::load_instances(&a.baseline)?, a.t_base)?)
    };
    for path in analyze::write_outputs(&a.out_dir, &main, baseline.as_ref())? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
