use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boundary_homology::bounds::{complexity_ratio_scan, parse_grid, scan_to_csv, ScanMode};
use boundary_homology::complex::{build_lslvr_filtration, local_scales, FiltrationComplex};
use boundary_homology::datasets::{
    generate_annulus_cloud, generate_two_circles, load_point_csv, save_point_csv,
    BoundaryDescriptor, Label, LabelOracle, LabeledPointCloud,
};
use boundary_homology::experiment::{
    budget_for, experiment_sweep, summarize, summary_to_csv, sweep_to_csv, Strategy, SweepConfig,
    DEFAULT_KAPPA_MAX, DEFAULT_K_OPPOSITE,
};
use boundary_homology::graph::{build_knn_graph, build_radius_graph, NeighborGraph};
use boundary_homology::metrics::{bottleneck_distance, select_min_distance};
use boundary_homology::persistence::{compute_persistence, PersistenceDiagram};
use boundary_homology::selection::{
    boundary_diagram, ensemble_average, validation_select, ClassifierOutputs,
};
use boundary_homology::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Active estimation of decision-boundary homology.
#[derive(Parser)]
#[command(name = "bhom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic labeled point cloud.
    Generate(GenerateArgs),
    /// Build a neighbor graph over a point file.
    Graph(GraphArgs),
    /// Spend a label budget with S² or uniform sampling.
    Query(QueryArgs),
    /// Persistence diagram of the LS-LVR filtration of labeled points.
    Persistence(PersistenceArgs),
    /// Bottleneck distance between two diagram files.
    Bottleneck(BottleneckArgs),
    /// Query/sample complexity ratio scan for the annulus scenario.
    Bounds(BoundsArgs),
    /// Select a classifier from a bank of prediction files.
    Select(SelectArgs),
    /// Run a budget sweep described by a key=value config file.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Dataset {
    TwoCircles,
    Annulus,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    dataset: Dataset,
    /// Number of points.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Label noise added to the signed distance (two-circles).
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Boundary radius (annulus).
    #[arg(long, default_value_t = 0.7)]
    tau: f64,
    /// Overlap half-width (annulus).
    #[arg(long, default_value_t = 0.0)]
    w: f64,
    /// Output point CSV.
    #[arg(long, default_value = "points.csv")]
    out: PathBuf,
    /// Also write the boundary descriptor JSON (two-circles).
    #[arg(long)]
    boundary_out: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    /// Point CSV.
    #[arg(long)]
    points: PathBuf,
    /// Connect points within this distance.
    #[arg(long, required_unless_present = "knn", conflicts_with = "knn")]
    radius: Option<f64>,
    /// Connect each point to its k nearest neighbors (symmetrized).
    #[arg(long)]
    knn: Option<usize>,
    /// Output edge CSV.
    #[arg(long, default_value = "graph.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    S2,
    Passive,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::S2 => Strategy::Active,
            StrategyArg::Passive => Strategy::Passive,
        }
    }
}

#[derive(Args)]
struct QueryArgs {
    /// Point CSV; its label column answers queries unless --labels is given.
    #[arg(long)]
    points: PathBuf,
    /// Edge CSV (needed by s2).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Label file with `index,label` rows.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    /// Number of labels to request.
    #[arg(
        long,
        required_unless_present = "budget_fraction",
        conflicts_with = "budget_fraction"
    )]
    budget: Option<usize>,
    /// Budget as a fraction of the pool.
    #[arg(long)]
    budget_fraction: Option<f64>,
    #[arg(long)]
    seed: u64,
    /// Output query log CSV.
    #[arg(long, default_value = "queries.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct HomologyArgs {
    /// Opposite-class neighbor rank defining the local scale.
    #[arg(long, default_value_t = DEFAULT_K_OPPOSITE)]
    k_opposite: usize,
    /// Largest κ in the filtration.
    #[arg(long, default_value_t = DEFAULT_KAPPA_MAX)]
    kappa_max: f64,
}

#[derive(Args)]
struct PersistenceArgs {
    /// Labeled point CSV.
    #[arg(long, required_unless_present = "filtration")]
    points: Option<PathBuf>,
    /// Restrict to the points of this query log, with the labels it recorded.
    #[arg(long, requires = "points")]
    log: Option<PathBuf>,
    /// Read a filtration CSV instead of building one.
    #[arg(long, conflicts_with_all = ["points", "log"])]
    filtration: Option<PathBuf>,
    #[command(flatten)]
    homology: HomologyArgs,
    /// Keep zero-persistence pairs in the output.
    #[arg(long)]
    include_zero: bool,
    /// Output diagram JSON.
    #[arg(long, default_value = "diagram.json")]
    out: PathBuf,
    /// Also write the filtration CSV.
    #[arg(long)]
    filtration_out: Option<PathBuf>,
}

#[derive(Args)]
struct BottleneckArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, default_value_t = 1)]
    dim: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanArg {
    VaryTau,
    VaryW,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    mode: ScanArg,
    #[arg(long)]
    delta: f64,
    /// Fixed overlap half-width (vary-tau).
    #[arg(long, required_if_eq("mode", "vary-tau"))]
    w: Option<f64>,
    /// Fixed boundary radius (vary-w).
    #[arg(long, required_if_eq("mode", "vary-w"))]
    tau: Option<f64>,
    /// Grid as start:stop:count.
    #[arg(long)]
    grid: String,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    /// Prediction CSVs `x1,...,xd,label[,prob1]`, one per bank member.
    #[arg(long, num_args = 1.., required = true)]
    bank: Vec<PathBuf>,
    /// Input dimension of the prediction files.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Query diagram JSON to compare against.
    #[arg(long, required_unless_present = "points")]
    query_diagram: Option<PathBuf>,
    /// Pool point CSV used with --log to build the query diagram.
    #[arg(long, requires = "log")]
    points: Option<PathBuf>,
    /// Query log; also drives validation selection and the ensemble.
    #[arg(long)]
    log: Option<PathBuf>,
    #[command(flatten)]
    homology: HomologyArgs,
    /// Write the ensemble's predictions (needs --log).
    #[arg(long, requires = "log")]
    ensemble_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Config file of key = value lines.
    config: PathBuf,
    /// Per-cell rows.
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
    /// Median over seeds per (strategy, fraction).
    #[arg(long, default_value = "sweep_summary.csv")]
    summary: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => 3,
        Error::InvalidParameter(_) | Error::Config { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Graph(a) => graph(a),
        Command::Query(a) => query(a),
        Command::Persistence(a) => persistence(a),
        Command::Bottleneck(a) => bottleneck(a),
        Command::Bounds(a) => bounds(a),
        Command::Select(a) => select(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

type Result<T = ()> = boundary_homology::Result<T>;

fn generate(a: GenerateArgs) -> Result {
    let cloud = match a.dataset {
        Dataset::TwoCircles => generate_two_circles(
            a.n,
            a.seed,
            &BoundaryDescriptor::default_two_circles(),
            a.noise,
        )?,
        Dataset::Annulus => generate_annulus_cloud(a.n, a.seed, a.tau, a.w)?,
    };
    save_point_csv(&cloud, &a.out)?;
    if let Some(path) = a.boundary_out {
        match cloud.boundary() {
            Some(b) => b.save_json(path)?,
            None => {
                return Err(Error::InvalidParameter(
                    "this dataset has no boundary descriptor".into(),
                ))
            }
        }
    }
    Ok(())
}

fn graph(a: GraphArgs) -> Result {
    let cloud = load_point_csv(&a.points)?;
    let g = match (a.radius, a.knn) {
        (Some(r), _) => build_radius_graph(&cloud, r)?,
        (_, Some(k)) => build_knn_graph(&cloud, k)?,
        _ => unreachable!("clap enforces one construction"),
    };
    g.save_edge_csv(&a.out)
}

fn oracle_for(cloud: &LabeledPointCloud, labels: Option<&Path>) -> Result<LabelOracle> {
    match labels {
        Some(p) => LabelOracle::load_csv(p, cloud.len()),
        None => LabelOracle::from_cloud(cloud),
    }
}

fn query(a: QueryArgs) -> Result {
    let cloud = load_point_csv(&a.points)?;
    let oracle = oracle_for(&cloud, a.labels.as_deref())?;
    let budget = match (a.budget, a.budget_fraction) {
        (Some(b), _) => b,
        (_, Some(f)) if (0.0..=1.0).contains(&f) => budget_for(f, cloud.len()),
        (_, Some(f)) => {
            return Err(Error::InvalidParameter(format!(
                "budget fraction {f} is outside [0, 1]"
            )))
        }
        _ => unreachable!("clap enforces one budget"),
    };
    let strategy = Strategy::from(a.strategy);
    let graph = match (&a.graph, strategy) {
        (Some(p), _) => NeighborGraph::load_edge_csv(p, cloud.len())?,
        (None, Strategy::Passive) => NeighborGraph::from_edges(cloud.len(), &[])?,
        (None, Strategy::Active) => return Err(Error::InvalidParameter("s2 needs --graph".into())),
    };
    strategy
        .run(&cloud, &graph, &oracle, budget, a.seed)?
        .save_csv(&a.out)
}

/// Reads a query log written by `query` as `(vertex, label)` pairs.
fn load_log(path: &Path) -> Result<Vec<(usize, Label)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let bad = |msg: &str| Error::Parse {
            path: path.to_path_buf(),
            row: i + 1,
            msg: msg.into(),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad("expected step,vertex,label,phase"));
        }
        let v = f[1].trim().parse().map_err(|_| bad("bad vertex"))?;
        let y = match f[2].trim() {
            "0" => 0,
            "1" => 1,
            _ => return Err(bad("label is not 0 or 1")),
        };
        out.push((v, y));
    }
    Ok(out)
}

fn queried_points(points: &Path, log: &Path) -> Result<LabeledPointCloud> {
    let cloud = load_point_csv(points)?;
    let mut q = load_log(log)?;
    if let Some(&(v, _)) = q.iter().find(|(v, _)| *v >= cloud.len()) {
        return Err(Error::InvalidParameter(format!(
            "logged vertex {v} is outside the {}-point pool",
            cloud.len()
        )));
    }
    q.sort_unstable();
    let idx: Vec<usize> = q.iter().map(|&(v, _)| v).collect();
    cloud
        .subset(&idx)
        .with_labels(q.iter().map(|&(_, y)| y).collect())
}

fn lslvr(cloud: &LabeledPointCloud, h: &HomologyArgs) -> Result<FiltrationComplex> {
    let scales = local_scales(cloud, h.k_opposite)?;
    build_lslvr_filtration(cloud, &scales, h.kappa_max)
}

fn persistence(a: PersistenceArgs) -> Result {
    let filtration = match (&a.filtration, &a.points, &a.log) {
        (Some(f), _, _) => FiltrationComplex::load_csv(f)?,
        (None, Some(p), Some(l)) => lslvr(&queried_points(p, l)?, &a.homology)?,
        (None, Some(p), None) => lslvr(&load_point_csv(p)?, &a.homology)?,
        (None, None, _) => unreachable!("clap requires points or filtration"),
    };
    if let Some(path) = &a.filtration_out {
        filtration.save_csv(path)?;
    }
    compute_persistence(&filtration)?.save_json(&a.out, a.include_zero)
}

fn bottleneck(a: BottleneckArgs) -> Result {
    let d = bottleneck_distance(
        &PersistenceDiagram::load_json(&a.a)?,
        &PersistenceDiagram::load_json(&a.b)?,
        a.dim,
    );
    println!("{d}");
    Ok(())
}

fn bounds(a: BoundsArgs) -> Result {
    let mode = match a.mode {
        ScanArg::VaryTau => ScanMode::vary_tau(a.w.expect("required by clap")),
        ScanArg::VaryW => ScanMode::vary_w(a.tau.expect("required by clap")),
    };
    if !(a.delta > 0.0 && a.delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {}",
            a.delta
        )));
    }
    let rows = complexity_ratio_scan(mode, &parse_grid(&a.grid)?, a.delta);
    let csv = scan_to_csv(&rows);
    match &a.out {
        Some(p) => fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    match rows.iter().find(|r| !r.feasible()) {
        Some(r) => Err(Error::Infeasible(format!(
            "grid point {}: {}",
            r.param,
            r.reason.as_deref().unwrap_or("infeasible")
        ))),
        None => Ok(()),
    }
}

fn select(a: SelectArgs) -> Result {
    let bank = a
        .bank
        .iter()
        .map(|p| ClassifierOutputs::load_csv(p, a.dim))
        .collect::<Result<Vec<_>>>()?;
    let query = match (&a.query_diagram, &a.points, &a.log) {
        (Some(p), _, _) => PersistenceDiagram::load_json(p)?,
        (None, Some(points), Some(log)) => {
            let q = queried_points(points, log)?;
            boundary_homology::selection::labeled_diagram(
                &q,
                a.homology.k_opposite,
                a.homology.kappa_max,
                Default::default(),
            )?
        }
        _ => unreachable!("clap requires a query diagram or points with a log"),
    };
    let diagrams = bank
        .iter()
        .map(|b| boundary_diagram(b, a.homology.k_opposite, a.homology.kappa_max))
        .collect::<Result<Vec<_>>>()?;
    let (topo, dist) = select_min_distance(&query, &diagrams, 1)?;
    println!("topological,{topo},{dist}");
    if let Some(log) = &a.log {
        let queried = load_log(log)?;
        let (val, err) = validation_select(&bank, &queried)?;
        println!("validation,{val},{err}");
        if let Some(out) = &a.ensemble_out {
            let (probs, labels) = ensemble_average(
                &bank[topo].probabilities_or_labels(),
                &bank[val].probabilities_or_labels(),
            )?;
            let inputs = &bank[topo].predictions;
            let cloud =
                LabeledPointCloud::new(inputs.dim(), inputs.coords().to_vec(), Some(labels))?;
            ClassifierOutputs::new(cloud, Some(probs))?.save_csv(out)?;
        }
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result {
    let config = SweepConfig::load(&a.config)?;
    let rows = experiment_sweep(&config)?;
    fs::write(&a.out, sweep_to_csv(&rows))?;
    fs::write(&a.summary, summary_to_csv(&summarize(&rows)))?;
    Ok(())
}
