use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use trustseed::graphgen::graph_stats;
use trustseed::harness::{
    run_experiment, select_seeds, sweep_threshold, write_curves_csv, write_results_csv, ExperimentConfig, NetworkKind,
    Scenario, SeederKind,
};
use trustseed::io::{read_graph, read_seeding, write_graph, write_seeding};
use trustseed::projection::{build_simplified, projected_greedy, ProjectionOptions};
use trustseed::seeders::{
    actual_greedy, brute_force, greedy_lazy_hybrid, ActualGreedyOptions, Budget, GeneralObjective, HybridOptions,
    DEFAULT_BRUTE_FORCE_CAP,
};
use trustseed::{estimate_coverage, run, validate_instance, GeneralInstance, RngHandle, Seeding};

#[derive(Parser)]
#[command(
    name = "trustseed",
    version,
    about = "Seed selection for trust-weighted information diffusion"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Global {
    /// JSON config: a scenario, or for `experiment` a list of scenarios.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// 100,000 nodes, 100 runs over 10 graphs.
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate networks with trusts and thresholds.
    Generate(GenerateArgs),
    /// Run one seeder on a graph file.
    Seed(SeedArgs),
    /// Evaluate a seeding on a graph file.
    Simulate(SimulateArgs),
    /// Run a scenario grid and write the results table.
    Experiment(ExperimentArgs),
    /// Coverage of Projected Greedy candidates across thresholds and λ_d.
    SweepThreshold(SweepArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum NetworkArg {
    ScaleFree,
    RandomGroup,
    Geometric,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    network: Option<NetworkArg>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Number of graph instances.
    #[arg(long)]
    graphs: Option<usize>,
    /// Print degree and group statistics as JSON.
    #[arg(long)]
    stats: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum SeederArg {
    Random,
    HighDegree,
    /// Greedy on the max-max projection at `--threshold`.
    Greedy,
    Projected,
    Actual,
    BruteForce,
}

#[derive(Args)]
struct SeedArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    seeder: SeederArg,
    #[arg(long)]
    threshold: Option<f64>,
    /// Replications per evaluation for the simulation-based seeders.
    #[arg(long, default_value_t = 20)]
    reps: usize,
    /// Allow simulation-based seeders on large graphs.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    seeds: PathBuf,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Print the per-step counts of the first run.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Fill the wallclock_s column (makes output machine dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.05, 0.1, 0.15, 0.2])]
    lambda_ds: Vec<f64>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f)).with_context(|| format!("parsing {}", path.display()))
}

fn load_scenario(g: &Global) -> Result<Scenario> {
    let sc = match &g.config {
        Some(p) => read_json(p)?,
        None => Scenario::default(),
    };
    Ok(if g.paper_scale { sc.paper_scale() } else { sc })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn load_instance(g: &Global, graph: &Path) -> Result<(Scenario, GeneralInstance)> {
    let mut sc = load_scenario(g)?;
    let (graph, profiles) = read_graph(BufReader::new(
        File::open(graph).with_context(|| format!("opening {}", graph.display()))?,
    ))?;
    sc.nodes = graph.node_count();
    let inst = sc.instance(Arc::new(graph), profiles);
    let violations = validate_instance(&inst);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("{v}");
        }
        bail!("instance has {} violations", violations.len());
    }
    Ok((sc, inst))
}

fn generate(g: &Global, args: &GenerateArgs) -> Result<()> {
    let mut sc = load_scenario(g)?;
    if let Some(n) = args.nodes {
        sc.nodes = n;
    }
    if let Some(k) = args.graphs {
        sc.graphs = k;
    }
    match args.network {
        Some(NetworkArg::ScaleFree) => sc.network = NetworkKind::ScaleFree { m: 2 },
        Some(NetworkArg::RandomGroup) => {
            sc.network = NetworkKind::RandomGroup {
                avg_degree: 4.0,
                ratio: 2.0,
            }
        }
        Some(NetworkArg::Geometric) => sc.network = NetworkKind::Geometric(Default::default()),
        None => {}
    }
    let rng = RngHandle::new(g.seed.unwrap_or(0));
    for i in 0..sc.graphs {
        let (graph, profiles) = sc.build_network(i, &rng)?;
        let path = g.out.join(format!("graph_{i}.txt"));
        let mut w = create(&path)?;
        write_graph(&mut w, &graph, &profiles)?;
        w.flush()?;
        info!("wrote {}", path.display());
        if args.stats {
            println!("{}", serde_json::to_string(&graph_stats(&graph))?);
        }
    }
    Ok(())
}

fn seed(g: &Global, args: &SeedArgs) -> Result<()> {
    let (sc, inst) = load_instance(g, &args.graph)?;
    let rng = RngHandle::new(g.seed.unwrap_or(0));
    let budgets = inst.budgets();
    let seeding = match args.seeder {
        SeederArg::Random | SeederArg::HighDegree => {
            let kind = match args.seeder {
                SeederArg::Random => SeederKind::Random,
                _ => SeederKind::HighDegree,
            };
            let merged = select_seeds(&sc, kind, &inst, &rng)?;
            trustseed::seeders::split_in_order(merged, &budgets)
        }
        SeederArg::Greedy => {
            let t = args
                .threshold
                .context("--threshold is required for the greedy seeder")?;
            let sinst = build_simplified(&inst, t)?;
            let res = greedy_lazy_hybrid(&sinst, &Budget::PerSource(sinst.budgets()), &HybridOptions::default());
            println!("projected coverage {}", res.covered);
            trustseed::projection::partition_seeds(res.seeding.set(0), &budgets, &rng.derive("partition"))?
        }
        SeederArg::Projected => {
            let omega = sc.omega.build(&inst)?;
            let opts = ProjectionOptions {
                replications: args.reps,
                ..Default::default()
            };
            let report = projected_greedy(&inst, &omega, &opts, &rng)?;
            for (i, row) in report.rows.iter().enumerate() {
                let mut w = create(&g.out.join(format!("seeds_t{i}.txt")))?;
                write_seeding(&mut w, &row.candidate.seeding)?;
                w.flush()?;
            }
            let mut w = create(&g.out.join("projection.csv"))?;
            report.write_csv(&mut w, |i| format!("seeds_t{i}.txt"))?;
            w.flush()?;
            println!("best threshold {}", report.best_threshold());
            report.best_seeding().clone()
        }
        SeederArg::Actual => {
            let opts = ActualGreedyOptions {
                replications: args.reps,
                force: args.force,
                ..Default::default()
            };
            actual_greedy(&inst, &Budget::PerSource(budgets), &opts, &rng)?
        }
        SeederArg::BruteForce => {
            let obj = GeneralObjective::new(&inst, args.reps, rng.clone());
            let (s, v) = brute_force(&obj, &Budget::PerSource(budgets), DEFAULT_BRUTE_FORCE_CAP)?;
            println!("optimum {v}");
            s
        }
    };
    let path = g.out.join("seeds.txt");
    let mut w = create(&path)?;
    write_seeding(&mut w, &seeding)?;
    w.flush()?;
    info!("wrote {}", path.display());
    Ok(())
}

fn simulate(g: &Global, args: &SimulateArgs) -> Result<()> {
    let (_, inst) = load_instance(g, &args.graph)?;
    let seeding: Seeding = read_seeding(BufReader::new(
        File::open(&args.seeds).with_context(|| format!("opening {}", args.seeds.display()))?,
    ))?;
    let rng = RngHandle::new(g.seed.unwrap_or(0));
    if args.trace {
        let out = run(
            &inst,
            &seeding,
            &rng.derive("rep/0"),
            trustseed::diffusion::DEFAULT_MAX_STEPS,
        )?;
        print!("{}", out.trace_lines());
    }
    let est = estimate_coverage(&inst, &seeding, args.reps, &rng)?;
    println!("{}", serde_json::to_string(&est)?);
    Ok(())
}

fn experiment(g: &Global, args: &ExperimentArgs) -> Result<()> {
    let mut cfg: ExperimentConfig = match &g.config {
        Some(p) => read_json(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if g.paper_scale {
        cfg.scenarios = cfg.scenarios.into_iter().map(Scenario::paper_scale).collect();
    }
    let rows = run_experiment(&cfg, args.timing)?;
    let path = g.out.join("results.csv");
    let mut w = create(&path)?;
    write_results_csv(&mut w, &rows)?;
    w.flush()?;
    let meta = serde_json::json!({
        "seed": cfg.seed,
        "partition": "seeds are reassigned to sources at random in every evaluation run",
        "scenarios": cfg.scenarios,
    });
    let mut w = create(&g.out.join("metadata.json"))?;
    serde_json::to_writer_pretty(&mut w, &meta)?;
    w.flush()?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn sweep(g: &Global, args: &SweepArgs) -> Result<()> {
    let sc = load_scenario(g)?;
    let rng = RngHandle::new(g.seed.unwrap_or(0)).derive(format_args!("scenario/{}", sc.id));
    let curves = sweep_threshold(&sc, &args.lambda_ds, &rng)?;
    let path = g.out.join("threshold_curves.csv");
    let mut w = create(&path)?;
    write_curves_csv(&mut w, &curves)?;
    w.flush()?;
    for c in &curves {
        println!("lambda_d={} t_opt={}", c.lambda_d, c.t_opt);
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(w) = cli.global.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .context("configuring worker pool")?;
    }
    fs::create_dir_all(&cli.global.out).with_context(|| format!("creating {}", cli.global.out.display()))?;
    match &cli.cmd {
        Command::Generate(a) => generate(&cli.global, a),
        Command::Seed(a) => seed(&cli.global, a),
        Command::Simulate(a) => simulate(&cli.global, a),
        Command::Experiment(a) => experiment(&cli.global, a),
        Command::SweepThreshold(a) => sweep(&cli.global, a),
    }
}
