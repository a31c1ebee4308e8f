//! Neighbor graphs over point clouds, cut-sets and breadth-first search.

use std::collections::VecDeque;
use std::path::Path;

use crate::datasets::{Label, LabeledPointCloud};
use crate::unionfind::UnionFind;
use crate::{Error, Execution, Result};

/// How a [`NeighborGraph`] was built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Construction {
    /// All pairs within Euclidean distance `k`.
    Radius(f64),
    /// Union-symmetrized `k` nearest neighbors.
    Knn(usize),
    /// Built directly from an edge list.
    Explicit,
}

/// Undirected simple graph over point indices with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    adjacency: Vec<Vec<usize>>,
    construction: Construction,
}

impl NeighborGraph {
    /// Graph from an undirected edge list; duplicates and orientation are normalized.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i}, {j}) out of range for {n} vertices"
                )));
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {i}")));
            }
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(NeighborGraph {
            adjacency,
            construction: Construction::Explicit,
        })
    }

    /// Path graph `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).expect("path edges are valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    /// Removes the undirected edge `{i, j}` if present.
    pub fn remove_edge(&mut self, i: usize, j: usize) -> bool {
        let Ok(pi) = self.adjacency[i].binary_search(&j) else {
            return false;
        };
        self.adjacency[i].remove(pi);
        let pj = self.adjacency[j]
            .binary_search(&i)
            .expect("adjacency is symmetric");
        self.adjacency[j].remove(pj);
        true
    }

    /// Writes the edge list as `i,j` CSV.
    pub fn save_edge_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::datasets::write_pairs(path, "i,j", &self.edges())
    }

    /// Reads an `i,j` edge list CSV written by [`save_edge_csv`](Self::save_edge_csv).
    pub fn load_edge_csv(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)?;
        let mut edges = Vec::new();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            let parse = |k: usize| {
                rec.get(k)
                    .and_then(|f| f.trim().parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse {
                        path: path.to_path_buf(),
                        row: row + 2,
                        msg: "expected `i,j` vertex indices".into(),
                    })
            };
            edges.push((parse(0)?, parse(1)?));
        }
        Self::from_edges(n, &edges)
    }
}

/// Connects every pair of points within Euclidean distance `k`.
pub fn build_radius_graph(cloud: &LabeledPointCloud, k: f64) -> Result<NeighborGraph> {
    build_radius_graph_with(cloud, k, Execution::default())
}

pub fn build_radius_graph_with(
    cloud: &LabeledPointCloud,
    k: f64,
    exec: Execution,
) -> Result<NeighborGraph> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {k}"
        )));
    }
    let n = cloud.len();
    let adjacency = exec.map_range(n, |i| {
        let p = cloud.point(i);
        (0..n)
            .filter(|&j| j != i && crate::datasets::euclidean(p, cloud.point(j)) <= k)
            .collect()
    });
    Ok(NeighborGraph {
        adjacency,
        construction: Construction::Radius(k),
    })
}

/// Connects each point to its `k` nearest neighbors and symmetrizes by union.
/// Distance ties are broken toward the lower index.
pub fn build_knn_graph(cloud: &LabeledPointCloud, k: usize) -> Result<NeighborGraph> {
    build_knn_graph_with(cloud, k, Execution::default())
}

pub fn build_knn_graph_with(
    cloud: &LabeledPointCloud,
    k: usize,
    exec: Execution,
) -> Result<NeighborGraph> {
    let n = cloud.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k < {n} for a kNN graph, got k = {k}"
        )));
    }
    let nearest = exec.map_range(n, |i| {
        let p = cloud.point(i);
        let mut cand: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (crate::datasets::euclidean(p, cloud.point(j)), j))
            .collect();
        cand.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        cand.truncate(k);
        cand.into_iter().map(|(_, j)| j).collect::<Vec<_>>()
    });
    let mut adjacency = vec![Vec::new(); n];
    for (i, list) in nearest.into_iter().enumerate() {
        for j in list {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    Ok(NeighborGraph {
        adjacency,
        construction: Construction::Knn(k),
    })
}

/// Oppositely labeled edges and their endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CutStructures {
    /// Edges `(i, j)`, `i < j`, in lexicographic order.
    pub cut_set: Vec<(usize, usize)>,
    /// Sorted endpoints of the cut edges.
    pub cut_boundary: Vec<usize>,
}

pub fn cut_structures(graph: &NeighborGraph, labels: &[Label]) -> Result<CutStructures> {
    if labels.len() != graph.vertex_count() {
        return Err(Error::InvalidParameter(format!(
            "{} labels for {} vertices",
            labels.len(),
            graph.vertex_count()
        )));
    }
    let cut_set: Vec<_> = graph
        .edges()
        .into_iter()
        .filter(|&(i, j)| labels[i] != labels[j])
        .collect();
    let mut cut_boundary: Vec<usize> = cut_set.iter().flat_map(|&(i, j)| [i, j]).collect();
    cut_boundary.sort_unstable();
    cut_boundary.dedup();
    Ok(CutStructures {
        cut_set,
        cut_boundary,
    })
}

/// Breadth-first distances from `src`; `usize::MAX` marks unreachable vertices.
pub fn bfs_distances(graph: &NeighborGraph, src: usize) -> Vec<usize> {
    multi_source_bfs(graph, std::iter::once(src))
}

/// Distance from the nearest of `sources` to every vertex.
pub fn multi_source_bfs(
    graph: &NeighborGraph,
    sources: impl IntoIterator<Item = usize>,
) -> Vec<usize> {
    let mut dist = vec![usize::MAX; graph.vertex_count()];
    let mut queue = VecDeque::new();
    for s in sources {
        if dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in graph.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Unweighted shortest path from `src` to `dst`, inclusive of both ends.
///
/// Among equal-length paths the lexicographically smallest vertex sequence is
/// returned: BFS visits neighbors in ascending order, so each vertex's first
/// discoverer is the earliest vertex of the previous layer, and layer order is the
/// lexicographic order of those paths.
pub fn shortest_path(graph: &NeighborGraph, src: usize, dst: usize) -> Option<Vec<usize>> {
    if src == dst {
        return Some(vec![src]);
    }
    let n = graph.vertex_count();
    let mut parent = vec![usize::MAX; n];
    parent[src] = src;
    let mut queue = VecDeque::from([src]);
    'search: while let Some(u) = queue.pop_front() {
        for &v in graph.neighbors(u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                if v == dst {
                    break 'search;
                }
                queue.push_back(v);
            }
        }
    }
    if parent[dst] == usize::MAX {
        return None;
    }
    let mut path = vec![dst];
    let mut v = dst;
    while v != src {
        v = parent[v];
        path.push(v);
    }
    path.reverse();
    Some(path)
}

/// Component labeling of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// Component id per vertex; ids are ordered by smallest contained vertex.
    pub id: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

pub fn connected_components(graph: &NeighborGraph) -> Components {
    let n = graph.vertex_count();
    let mut uf = UnionFind::new(n);
    for (i, j) in graph.edges() {
        uf.union(i, j);
    }
    let mut root_id = vec![usize::MAX; n];
    let mut id = Vec::with_capacity(n);
    let mut sizes = Vec::new();
    for v in 0..n {
        let r = uf.find(v);
        if root_id[r] == usize::MAX {
            root_id[r] = sizes.len();
            sizes.push(0);
        }
        id.push(root_id[r]);
        sizes[root_id[r]] += 1;
    }
    Components { id, sizes }
}
