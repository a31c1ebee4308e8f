//! Label-query strategies: S² shortest-shortest-path bisection and uniform passive
//! sampling.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng as _;

use crate::datasets::{Label, LabelOracle, LabeledPointCloud};
use crate::graph::{multi_source_bfs, shortest_path, NeighborGraph};
use crate::rng;
use crate::{Error, Result};

/// Why a vertex was queried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Uniform,
    Bisect,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Uniform => "uniform",
            Phase::Bisect => "bisect",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryEntry {
    pub vertex: usize,
    pub label: Label,
    pub phase: Phase,
}

/// A cut edge together with the (zero-based) query step that revealed it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoundCut {
    pub edge: (usize, usize),
    pub step: usize,
}

/// Ordered record of the labels requested by a strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryLog {
    pub entries: Vec<QueryEntry>,
    pub budget: usize,
    pub found_cuts: Vec<FoundCut>,
}

impl QueryLog {
    fn new(budget: usize) -> Self {
        QueryLog {
            entries: Vec::with_capacity(budget),
            budget,
            found_cuts: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Queried vertices in query order.
    pub fn vertices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.vertex).collect()
    }

    /// Queried vertices sorted ascending, with their labels.
    pub fn sorted_labeled(&self) -> (Vec<usize>, Vec<Label>) {
        let mut v: Vec<_> = self.entries.iter().map(|e| (e.vertex, e.label)).collect();
        v.sort_unstable();
        v.into_iter().unzip()
    }

    /// Cut edges in discovery order.
    pub fn found_cut_edges(&self) -> Vec<(usize, usize)> {
        self.found_cuts.iter().map(|c| c.edge).collect()
    }

    /// The labeled sub-cloud of queried points, ordered by vertex index.
    pub fn queried_cloud(&self, cloud: &LabeledPointCloud) -> Result<LabeledPointCloud> {
        let (idx, labels) = self.sorted_labeled();
        cloud.subset(&idx).with_labels(labels)
    }

    /// Writes `step,vertex,label,phase` rows.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_csv(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "step,vertex,label,phase")?;
        for (step, e) in self.entries.iter().enumerate() {
            writeln!(out, "{step},{},{},{}", e.vertex, e.label, e.phase.as_str())?;
        }
        Ok(())
    }
}

/// Midpoint of the shortest shortest path between oppositely labeled vertices.
///
/// `labeled[v]` holds the known label of `v`, if any. Among all connected
/// oppositely labeled pairs the one at minimum BFS distance is chosen, ties going
/// to the lexicographically smallest `(i, j)` with `i < j`. The returned vertex sits
/// at position `⌊L/2⌋` along the lexicographically smallest shortest path from `i`
/// to `j`. Returns `None` when no such pair is connected or when the closest pair is
/// adjacent.
pub fn mssp(graph: &NeighborGraph, labeled: &[Option<Label>]) -> Option<usize> {
    let (i, j, len) = closest_opposite_pair(graph, labeled)?;
    if len < 2 {
        return None;
    }
    let path = shortest_path(graph, i, j).expect("pair is connected");
    debug_assert_eq!(path.len(), len + 1);
    Some(path[len / 2])
}

/// Lexicographically smallest oppositely labeled pair at minimum graph distance.
fn closest_opposite_pair(
    graph: &NeighborGraph,
    labeled: &[Option<Label>],
) -> Option<(usize, usize, usize)> {
    let of_class = |y: Label| {
        labeled
            .iter()
            .enumerate()
            .filter_map(move |(v, l)| (*l == Some(y)).then_some(v))
    };
    let dist0 = multi_source_bfs(graph, of_class(0));
    let len = of_class(1).map(|v| dist0[v]).min()?;
    if len == usize::MAX {
        return None;
    }
    let dist1 = multi_source_bfs(graph, of_class(1));
    // Smallest vertex that belongs to some closest pair; its partner is then larger.
    let first = labeled
        .iter()
        .enumerate()
        .find_map(|(v, l)| match l {
            Some(0) if dist1[v] == len => Some(v),
            Some(1) if dist0[v] == len => Some(v),
            _ => None,
        })
        .expect("a closest pair exists");
    let want = 1 - labeled[first].expect("first is labeled");
    let from_first = crate::graph::bfs_distances(graph, first);
    let second = (0..labeled.len())
        .find(|&v| labeled[v] == Some(want) && from_first[v] == len)
        .expect("partner at distance len");
    debug_assert!(second > first);
    Some((first, second, len))
}

/// Runs the S² strategy on a working copy of `graph` until `budget` labels are spent
/// or every vertex is labeled.
///
/// Each round queries a uniformly random unlabeled vertex, then keeps querying the
/// [`mssp`] midpoint while one exists. After every query, all edges joining the new
/// vertex to an oppositely labeled vertex are recorded as found cut edges and
/// removed from the working graph.
pub fn s2_run(
    graph: &NeighborGraph,
    oracle: &LabelOracle,
    budget: usize,
    seed: u64,
) -> Result<QueryLog> {
    let n = graph.vertex_count();
    if budget > n {
        return Err(Error::InvalidParameter(format!(
            "budget {budget} exceeds {n} vertices"
        )));
    }
    if oracle.len() < n {
        return Err(Error::InvalidParameter(format!(
            "oracle covers {} of {n} vertices",
            oracle.len()
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut working = graph.clone();
    let mut labeled: Vec<Option<Label>> = vec![None; n];
    let mut pool = UnlabeledPool::new(n);
    let mut log = QueryLog::new(budget);

    while log.len() < budget && !pool.is_empty() {
        let mut next = pool.take_random(&mut rng);
        let mut phase = Phase::Uniform;
        loop {
            pool.remove(next);
            let y = oracle.label(next);
            labeled[next] = Some(y);
            log.entries.push(QueryEntry {
                vertex: next,
                label: y,
                phase,
            });
            let step = log.len() - 1;
            let cut: Vec<usize> = working
                .neighbors(next)
                .iter()
                .copied()
                .filter(|&u| labeled[u].is_some_and(|l| l != y))
                .collect();
            for u in cut {
                working.remove_edge(next, u);
                log.found_cuts.push(FoundCut {
                    edge: (next.min(u), next.max(u)),
                    step,
                });
            }
            if log.len() == budget {
                return Ok(log);
            }
            match mssp(&working, &labeled) {
                Some(v) => {
                    next = v;
                    phase = Phase::Bisect;
                }
                None => break,
            }
        }
    }
    Ok(log)
}

/// Uniform sampling without replacement of `budget` of the cloud's points.
pub fn passive_run(
    cloud: &LabeledPointCloud,
    oracle: &LabelOracle,
    budget: usize,
    seed: u64,
) -> Result<QueryLog> {
    let n = cloud.len();
    if budget > n {
        return Err(Error::InvalidParameter(format!(
            "budget {budget} exceeds {n} points"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut pool = UnlabeledPool::new(n);
    let mut log = QueryLog::new(budget);
    for _ in 0..budget {
        let v = pool.take_random(&mut rng);
        pool.remove(v);
        log.entries.push(QueryEntry {
            vertex: v,
            label: oracle.label(v),
            phase: Phase::Uniform,
        });
    }
    Ok(log)
}

/// Set of unlabeled vertices supporting uniform draws and removal in O(1).
struct UnlabeledPool {
    items: Vec<usize>,
    pos: Vec<usize>,
}

impl UnlabeledPool {
    fn new(n: usize) -> Self {
        UnlabeledPool {
            items: (0..n).collect(),
            pos: (0..n).collect(),
        }
    }

    fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn take_random(&self, rng: &mut rng::Rng) -> usize {
        self.items[rng.random_range(0..self.items.len())]
    }

    fn remove(&mut self, v: usize) {
        let p = self.pos[v];
        if p == usize::MAX {
            return;
        }
        let last = *self.items.last().expect("nonempty");
        self.items.swap_remove(p);
        if last != v {
            self.pos[last] = p;
        }
        self.pos[v] = usize::MAX;
    }
}
