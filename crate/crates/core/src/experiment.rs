//! End-to-end experiment drivers: the two-circles recovery sweep and the
//! model-selection trial.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::active::{passive_run, s2_run, QueryLog};
use crate::datasets::{
    generate_two_circles, BoundaryDescriptor, Label, LabelOracle, LabeledPointCloud,
};
use crate::graph::{build_radius_graph_with, NeighborGraph};
use crate::metrics::bottleneck_distance;
use crate::persistence::PersistenceDiagram;
use crate::selection::{
    ensemble_average, knn_predict_with, labeled_diagram, validation_select, ClassifierOutputs,
};
use crate::{Error, Execution, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Active,
    Passive,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Active => "s2",
            Strategy::Passive => "passive",
        }
    }

    /// Runs the strategy on the pool. The graph is only used by S².
    pub fn run(
        self,
        cloud: &LabeledPointCloud,
        graph: &NeighborGraph,
        oracle: &LabelOracle,
        budget: usize,
        seed: u64,
    ) -> Result<QueryLog> {
        match self {
            Strategy::Active => s2_run(graph, oracle, budget, seed),
            Strategy::Passive => passive_run(cloud, oracle, budget, seed),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s2" | "active" => Ok(Strategy::Active),
            "passive" | "uniform" => Ok(Strategy::Passive),
            _ => Err(Error::InvalidParameter(format!(
                "unknown strategy `{s}` (expected s2 or passive)"
            ))),
        }
    }
}

/// Number of labels bought by a budget fraction of an `n`-point pool.
pub fn budget_for(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64).round() as usize).min(n)
}

/// Parameters of the homology-estimation phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomologyParams {
    pub k_opposite: usize,
    pub kappa_max: f64,
}

impl Default for HomologyParams {
    fn default() -> Self {
        HomologyParams {
            k_opposite: DEFAULT_K_OPPOSITE,
            kappa_max: DEFAULT_KAPPA_MAX,
        }
    }
}

pub const DEFAULT_RADIUS: f64 = 0.65;
pub const DEFAULT_K_OPPOSITE: usize = 3;
pub const DEFAULT_KAPPA_MAX: f64 = 1.5;

impl HomologyParams {
    pub fn diagram(
        &self,
        cloud: &LabeledPointCloud,
        exec: Execution,
    ) -> Result<PersistenceDiagram> {
        labeled_diagram(cloud, self.k_opposite, self.kappa_max, exec)
    }
}

/// Sweep description parsed from flat `key = value` lines.
///
/// List-valued keys (`strategy`, `fraction`, `seed`) are given by repeating the key.
/// `#` starts a comment.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub data_seed: u64,
    pub noise: f64,
    pub radius: f64,
    pub homology: HomologyParams,
    pub strategies: Vec<Strategy>,
    pub fractions: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n: 2000,
            data_seed: 7,
            noise: 0.0,
            radius: DEFAULT_RADIUS,
            homology: HomologyParams::default(),
            strategies: Vec::new(),
            fractions: Vec::new(),
            seeds: Vec::new(),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        key: key.into(),
        msg: format!("cannot parse `{value}`"),
    })
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config {
                    key: line.into(),
                    msg: format!("line {} is not of the form key = value", lineno + 1),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => cfg.n = parse_value(key, value)?,
                "data_seed" => cfg.data_seed = parse_value(key, value)?,
                "noise" => cfg.noise = parse_value(key, value)?,
                "radius" => cfg.radius = parse_value(key, value)?,
                "k_opposite" => cfg.homology.k_opposite = parse_value(key, value)?,
                "kappa_max" => cfg.homology.kappa_max = parse_value(key, value)?,
                "strategy" => {
                    cfg.strategies
                        .push(value.parse().map_err(|e: Error| Error::Config {
                            key: key.into(),
                            msg: e.to_string(),
                        })?)
                }
                "fraction" => {
                    let f: f64 = parse_value(key, value)?;
                    if !(0.0..=1.0).contains(&f) {
                        return Err(Error::Config {
                            key: key.into(),
                            msg: format!("{f} is outside [0, 1]"),
                        });
                    }
                    cfg.fractions.push(f);
                }
                "seed" => cfg.seeds.push(parse_value(key, value)?),
                _ => {
                    return Err(Error::Config {
                        key: key.into(),
                        msg: "unknown key".into(),
                    })
                }
            }
        }
        if cfg.strategies.is_empty() {
            cfg.strategies = vec![Strategy::Active, Strategy::Passive];
        }
        if !(cfg.radius > 0.0) {
            return Err(Error::Config {
                key: "radius".into(),
                msg: "must be positive".into(),
            });
        }
        if !(cfg.homology.kappa_max > 0.0) {
            return Err(Error::Config {
                key: "kappa_max".into(),
                msg: "must be positive".into(),
            });
        }
        if cfg.homology.k_opposite == 0 {
            return Err(Error::Config {
                key: "k_opposite".into(),
                msg: "must be at least 1".into(),
            });
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Cells in row order: strategy, then fraction, then seed.
    pub fn cells(&self) -> Vec<(Strategy, f64, u64)> {
        let mut out = Vec::new();
        for &s in &self.strategies {
            for &f in &self.fractions {
                for &seed in &self.seeds {
                    out.push((s, f, seed));
                }
            }
        }
        out
    }
}

/// Labeled pool, its neighbor graph and the diagram of the fully labeled pool.
#[derive(Debug, Clone)]
pub struct Pool {
    pub cloud: LabeledPointCloud,
    pub graph: NeighborGraph,
    pub oracle: LabelOracle,
    pub truth: PersistenceDiagram,
}

impl Pool {
    pub fn new(
        cloud: LabeledPointCloud,
        radius: f64,
        homology: &HomologyParams,
        exec: Execution,
    ) -> Result<Self> {
        let oracle = LabelOracle::from_cloud(&cloud)?;
        let graph = build_radius_graph_with(&cloud, radius, exec)?;
        let truth = homology.diagram(&cloud, exec)?;
        Ok(Pool {
            cloud,
            graph,
            oracle,
            truth,
        })
    }

    pub fn two_circles(
        n: usize,
        data_seed: u64,
        noise: f64,
        radius: f64,
        homology: &HomologyParams,
    ) -> Result<Self> {
        let cloud = generate_two_circles(
            n,
            data_seed,
            &BoundaryDescriptor::default_two_circles(),
            noise,
        )?;
        Self::new(cloud, radius, homology, Execution::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub strategy: Strategy,
    pub fraction: f64,
    pub seed: u64,
    pub budget: usize,
    pub queries: usize,
    pub bottleneck: f64,
}

/// One (strategy, fraction, seed) cell: query, rebuild the diagram from the queried
/// points, and compare its dimension-1 part with the pool's.
pub fn run_cell(
    pool: &Pool,
    homology: &HomologyParams,
    strategy: Strategy,
    fraction: f64,
    seed: u64,
    exec: Execution,
) -> Result<SweepRow> {
    let budget = budget_for(fraction, pool.cloud.len());
    let log = strategy.run(&pool.cloud, &pool.graph, &pool.oracle, budget, seed)?;
    let queried = log.queried_cloud(&pool.cloud)?;
    let pd = homology.diagram(&queried, exec)?;
    Ok(SweepRow {
        strategy,
        fraction,
        seed,
        budget,
        queries: log.len(),
        bottleneck: bottleneck_distance(&pd, &pool.truth, 1),
    })
}

pub fn experiment_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    experiment_sweep_with(config, Execution::default())
}

/// Runs every cell of the sweep. Cells run in parallel, each with its own seed, and
/// rows come back in [`SweepConfig::cells`] order.
pub fn experiment_sweep_with(config: &SweepConfig, exec: Execution) -> Result<Vec<SweepRow>> {
    let cells = config.cells();
    if cells.is_empty() {
        return Ok(Vec::new());
    }
    let pool = Pool::two_circles(
        config.n,
        config.data_seed,
        config.noise,
        config.radius,
        &config.homology,
    )?;
    exec.map_slice(&cells, |&(s, f, seed)| {
        run_cell(&pool, &config.homology, s, f, seed, Execution::Sequential)
    })
    .into_iter()
    .collect()
}

pub const SWEEP_HEADER: &str = "strategy,fraction,seed,budget,queries,bottleneck";

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:?}")
    }
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:?},{},{},{},{}",
            r.strategy.as_str(),
            r.fraction,
            r.seed,
            r.budget,
            r.queries,
            fmt_f64(r.bottleneck)
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub fraction: f64,
    pub runs: usize,
    pub median_bottleneck: f64,
}

/// Median of a nonempty sample; the mean of the two middle values for even sizes.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    // equal middles return as is so two infinities do not average through a sum
    if v.len() % 2 == 1 || v[m - 1] == v[m] {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Median bottleneck distance over seeds, per (strategy, fraction) in first-seen order.
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<((Strategy, f64), Vec<f64>)> = Vec::new();
    for r in rows {
        match groups
            .iter_mut()
            .find(|(k, _)| *k == (r.strategy, r.fraction))
        {
            Some((_, v)) => v.push(r.bottleneck),
            None => groups.push(((r.strategy, r.fraction), vec![r.bottleneck])),
        }
    }
    groups
        .into_iter()
        .map(|((strategy, fraction), v)| SummaryRow {
            strategy,
            fraction,
            runs: v.len(),
            median_bottleneck: median(&v),
        })
        .collect()
}

pub const SUMMARY_HEADER: &str = "strategy,fraction,runs,median_bottleneck";

pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:?},{},{}",
            r.strategy.as_str(),
            r.fraction,
            r.runs,
            fmt_f64(r.median_bottleneck)
        );
    }
    s
}

/// Synthetic classifier bank for the model-selection experiment: kNN classifiers of
/// different `k` trained on a small noisy sample, evaluated on a held-out pool.
#[derive(Debug, Clone)]
pub struct SelectionBench {
    pub pool: Pool,
    pub bank: Vec<ClassifierOutputs>,
    pub bank_diagrams: Vec<PersistenceDiagram>,
    pub bank_ks: Vec<usize>,
    pub homology: HomologyParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionBenchConfig {
    pub pool_n: usize,
    pub pool_seed: u64,
    pub train_n: usize,
    pub train_seed: u64,
    pub train_noise: f64,
    pub radius: f64,
    pub bank_ks: Vec<usize>,
    pub homology: HomologyParams,
}

impl Default for SelectionBenchConfig {
    fn default() -> Self {
        SelectionBenchConfig {
            pool_n: 2000,
            pool_seed: 11,
            train_n: 300,
            train_seed: 12,
            train_noise: 0.3,
            radius: DEFAULT_RADIUS,
            bank_ks: vec![1, 3, 7, 15, 31],
            homology: HomologyParams::default(),
        }
    }
}

impl SelectionBench {
    pub fn new(cfg: &SelectionBenchConfig) -> Result<Self> {
        let geometry = BoundaryDescriptor::default_two_circles();
        let exec = Execution::default();
        let cloud = generate_two_circles(cfg.pool_n, cfg.pool_seed, &geometry, 0.0)?;
        let train = generate_two_circles(cfg.train_n, cfg.train_seed, &geometry, cfg.train_noise)?;
        let inputs = LabeledPointCloud::new(cloud.dim(), cloud.coords().to_vec(), None)?;
        let bank = cfg
            .bank_ks
            .iter()
            .map(|&k| knn_predict_with(&train, &inputs, k, exec))
            .collect::<Result<Vec<_>>>()?;
        let bank_diagrams = exec
            .map_slice(&bank, |b| {
                cfg.homology.diagram(&b.predictions, Execution::Sequential)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let pool = Pool::new(cloud, cfg.radius, &cfg.homology, exec)?;
        Ok(SelectionBench {
            pool,
            bank,
            bank_diagrams,
            bank_ks: cfg.bank_ks.clone(),
            homology: cfg.homology,
        })
    }

    /// Test error of every bank member against the pool's true labels.
    pub fn bank_errors(&self) -> Vec<f64> {
        let truth = self.pool.cloud.labels().expect("pool is labeled");
        self.bank
            .iter()
            .map(|b| b.error_rate(truth).expect("aligned"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub strategy: Strategy,
    pub seed: u64,
    pub topological: usize,
    pub topological_distance: f64,
    pub validation: usize,
    pub topological_error: f64,
    pub validation_error: f64,
    pub ensemble_error: f64,
    /// Errors of the ensemble and of its worse constituent, restricted to the points
    /// where both constituents predict the same label.
    pub agreement_errors: (f64, f64),
}

/// Queries the pool, then selects a bank member topologically (closest diagram in
/// dimension 1) and by validation error on the queried labels.
pub fn selection_trial(
    bench: &SelectionBench,
    strategy: Strategy,
    fraction: f64,
    seed: u64,
) -> Result<SelectionOutcome> {
    let pool = &bench.pool;
    let budget = budget_for(fraction, pool.cloud.len());
    let log = strategy.run(&pool.cloud, &pool.graph, &pool.oracle, budget, seed)?;
    let pd = bench
        .homology
        .diagram(&log.queried_cloud(&pool.cloud)?, Execution::Sequential)?;
    let distances: Vec<f64> = bench
        .bank_diagrams
        .iter()
        .map(|b| bottleneck_distance(&pd, b, 1))
        .collect();
    let (topological, topological_distance) = crate::metrics::argmin(&distances);
    let queried: Vec<(usize, Label)> = log.entries.iter().map(|e| (e.vertex, e.label)).collect();
    let (validation, _) = validation_select(&bench.bank, &queried)?;

    let truth = pool.cloud.labels().expect("pool is labeled");
    let (a, b) = (&bench.bank[topological], &bench.bank[validation]);
    let (_, ens_labels) =
        ensemble_average(&a.probabilities_or_labels(), &b.probabilities_or_labels())?;
    let agree: Vec<usize> = (0..truth.len())
        .filter(|&i| a.labels()[i] == b.labels()[i])
        .collect();
    let err_on = |labels: &[Label]| -> f64 {
        if agree.is_empty() {
            return 0.0;
        }
        agree.iter().filter(|&&i| labels[i] != truth[i]).count() as f64 / agree.len() as f64
    };
    let agreement_errors = (
        err_on(&ens_labels),
        err_on(a.labels()).max(err_on(b.labels())),
    );
    Ok(SelectionOutcome {
        strategy,
        seed,
        topological,
        topological_distance,
        validation,
        topological_error: a.error_rate(truth)?,
        validation_error: b.error_rate(truth)?,
        ensemble_error: crate::selection::error_rate(&ens_labels, truth)?,
        agreement_errors,
    })
}
