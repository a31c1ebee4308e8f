//! Bottleneck distance between persistence diagrams.

use std::collections::VecDeque;

use crate::persistence::{PersistenceDiagram, PersistencePair};
use crate::{Error, Execution, Result};

/// Exact bottleneck distance between the `dim` parts of two diagrams.
///
/// Essential (infinite-death) points can only match each other: if their counts
/// differ the distance is infinite, otherwise they are matched in birth order.
/// Finite points may also be sent to the diagonal. The finite part is solved by a
/// binary search over candidate distances with a perfect-matching feasibility test.
pub fn bottleneck_distance(a: &PersistenceDiagram, b: &PersistenceDiagram, dim: usize) -> f64 {
    let (fa, ea) = split(a, dim);
    let (fb, eb) = split(b, dim);
    if ea.len() != eb.len() {
        return f64::INFINITY;
    }
    let essential = ea
        .iter()
        .zip(&eb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    essential.max(finite_bottleneck(&fa, &fb))
}

fn split(d: &PersistenceDiagram, dim: usize) -> (Vec<(f64, f64)>, Vec<f64>) {
    let mut finite = Vec::new();
    let mut essential = Vec::new();
    for p in d.dim(dim).filter(|p| !p.is_zero_persistence()) {
        if p.is_essential() {
            essential.push(p.birth);
        } else {
            finite.push((p.birth, p.death));
        }
    }
    essential.sort_by(f64::total_cmp);
    (finite, essential)
}

fn linf(p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - q.0).abs().max((p.1 - q.1).abs())
}

fn to_diagonal(p: (f64, f64)) -> f64 {
    (p.1 - p.0) / 2.0
}

/// Bottleneck distance between finite diagrams.
///
/// Bipartite graph on `n + m` vertices per side: left holds the points of `a`
/// followed by one diagonal slot per point of `b`; right holds the points of `b`
/// followed by one diagonal slot per point of `a`.
pub(crate) fn finite_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (n, m) = (a.len(), b.len());
    if n + m == 0 {
        return 0.0;
    }
    let cost = |l: usize, r: usize| -> Option<f64> {
        match (l < n, r < m) {
            (true, true) => Some(linf(a[l], b[r])),
            (true, false) => (r - m == l).then(|| to_diagonal(a[l])),
            (false, true) => (l - n == r).then(|| to_diagonal(b[r])),
            (false, false) => Some(0.0),
        }
    };
    let mut candidates: Vec<f64> = Vec::with_capacity(n * m + n + m + 1);
    candidates.push(0.0);
    for p in a {
        candidates.extend(b.iter().map(|&q| linf(*p, q)));
        candidates.push(to_diagonal(*p));
    }
    candidates.extend(b.iter().map(|&q| to_diagonal(q)));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let size = n + m;
    let feasible = |t: f64| -> bool {
        let adj: Vec<Vec<usize>> = (0..size)
            .map(|l| {
                (0..size)
                    .filter(|&r| cost(l, r).is_some_and(|c| c <= t))
                    .collect()
            })
            .collect();
        hopcroft_karp(&adj, size) == size
    };
    // The largest candidate is always feasible: every point can go to the diagonal.
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Size of a maximum matching in a bipartite graph given by left adjacency lists.
pub fn hopcroft_karp(adj: &[Vec<usize>], right_size: usize) -> usize {
    const NIL: usize = usize::MAX;
    let left_size = adj.len();
    let mut match_l = vec![NIL; left_size];
    let mut match_r = vec![NIL; right_size];
    let mut layer = vec![0usize; left_size];
    let mut matched = 0;
    loop {
        // BFS from free left vertices builds the layered graph.
        let mut queue = VecDeque::new();
        for u in 0..left_size {
            if match_l[u] == NIL {
                layer[u] = 0;
                queue.push_back(u);
            } else {
                layer[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match match_r[v] {
                    NIL => found = true,
                    w if layer[w] == usize::MAX => {
                        layer[w] = layer[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            return matched;
        }
        let mut next_edge = vec![0usize; left_size];
        for u in 0..left_size {
            if match_l[u] == NIL
                && augment(
                    u,
                    adj,
                    &mut match_l,
                    &mut match_r,
                    &mut layer,
                    &mut next_edge,
                )
            {
                matched += 1;
            }
        }
    }
}

fn augment(
    root: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    layer: &mut [usize],
    next_edge: &mut [usize],
) -> bool {
    const NIL: usize = usize::MAX;
    // Iterative DFS along the layered graph.
    let mut stack = vec![root];
    while let Some(&u) = stack.last() {
        if next_edge[u] == adj[u].len() {
            layer[u] = usize::MAX;
            stack.pop();
            continue;
        }
        let v = adj[u][next_edge[u]];
        next_edge[u] += 1;
        let w = match_r[v];
        if w == NIL {
            // Flip the alternating path recorded on the stack.
            let mut v = v;
            while let Some(u) = stack.pop() {
                let prev = match_l[u];
                match_l[u] = v;
                match_r[v] = u;
                v = prev;
            }
            return true;
        }
        if layer[w] != usize::MAX && layer[w] == layer[u] + 1 {
            stack.push(w);
        }
    }
    false
}

/// Index of the bank diagram closest to `query`, ties to the lowest index.
pub fn select_min_distance(
    query: &PersistenceDiagram,
    bank: &[PersistenceDiagram],
    dim: usize,
) -> Result<(usize, f64)> {
    select_min_distance_with(query, bank, dim, Execution::default())
}

pub fn select_min_distance_with(
    query: &PersistenceDiagram,
    bank: &[PersistenceDiagram],
    dim: usize,
    exec: Execution,
) -> Result<(usize, f64)> {
    if bank.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot select from an empty bank".into(),
        ));
    }
    let d = exec.map_slice(bank, |b| bottleneck_distance(query, b, dim));
    Ok(argmin(&d))
}

pub(crate) fn argmin(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}

/// Convenience constructor for tests and tools: pairs of one dimension.
pub fn diagram_from_pairs(dim: usize, pairs: &[(f64, f64)]) -> PersistenceDiagram {
    PersistenceDiagram::new(
        pairs
            .iter()
            .map(|&(b, d)| PersistencePair::new(dim, b, d))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn identical_and_empty() {
        let a = diagram_from_pairs(1, &[(0.0, 2.0), (1.0, 1.5), (0.5, INF)]);
        assert_eq!(bottleneck_distance(&a, &a, 1), 0.0);
        let e = PersistenceDiagram::default();
        assert_eq!(bottleneck_distance(&e, &e, 1), 0.0);
    }

    #[test]
    fn single_point_to_diagonal() {
        let a = diagram_from_pairs(1, &[(0.0, 2.0)]);
        assert_eq!(
            bottleneck_distance(&a, &PersistenceDiagram::default(), 1),
            1.0
        );
    }

    #[test]
    fn essential_points() {
        let a = diagram_from_pairs(1, &[(0.0, INF), (3.0, INF)]);
        let b = diagram_from_pairs(1, &[(2.5, INF), (0.25, INF)]);
        assert_eq!(bottleneck_distance(&a, &b, 1), 0.5);
        let c = diagram_from_pairs(1, &[(0.0, INF)]);
        assert_eq!(bottleneck_distance(&a, &c, 1), INF);
    }

    #[test]
    fn only_requested_dimension_counts() {
        let mut a = diagram_from_pairs(0, &[(0.0, 10.0)]);
        a.pairs.push(PersistencePair::new(1, 1.0, 2.0));
        let b = diagram_from_pairs(1, &[(1.0, 2.0)]);
        assert_eq!(bottleneck_distance(&a, &b, 1), 0.0);
        assert_eq!(bottleneck_distance(&a, &b, 0), 5.0);
    }

    #[test]
    fn matching_beats_diagonal() {
        let a = diagram_from_pairs(1, &[(0.0, 10.0)]);
        let b = diagram_from_pairs(1, &[(0.5, 10.25)]);
        assert_eq!(bottleneck_distance(&a, &b, 1), 0.5);
    }

    #[test]
    fn hopcroft_karp_small() {
        let adj = vec![vec![0, 1], vec![0], vec![1, 2]];
        assert_eq!(hopcroft_karp(&adj, 3), 3);
        let adj = vec![vec![0], vec![0], vec![0]];
        assert_eq!(hopcroft_karp(&adj, 1), 1);
        assert_eq!(hopcroft_karp(&[vec![], vec![]], 2), 0);
    }

    #[test]
    fn selection_ties_and_errors() {
        let q = diagram_from_pairs(1, &[(0.0, 1.0)]);
        assert!(select_min_distance(&q, &[], 1).is_err());
        let bank = vec![diagram_from_pairs(1, &[(0.0, 3.0)]), q.clone(), q.clone()];
        assert_eq!(select_min_distance(&q, &bank, 1).unwrap(), (1, 0.0));
        assert_eq!(select_min_distance(&q, &bank[..1], 1).unwrap().0, 0);
    }
}
