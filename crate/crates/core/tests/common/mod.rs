//! Independent oracles and random instance generators shared by the integration
//! tests. Nothing here calls into the routines it is used to check.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use boundary_homology::complex::{FiltrationComplex, Simplex};
use boundary_homology::datasets::Label;
use boundary_homology::graph::NeighborGraph;
use boundary_homology::persistence::PersistenceDiagram;
use boundary_homology::rng::{self, Rng};
use rand::seq::index::sample;
use rand::Rng as _;

pub fn rng(seed: u64) -> Rng {
    rng::seeded(seed)
}

// ---------------------------------------------------------------- filtrations

/// Random filtration on at most `max_points` vertices with sparse vertex ids and
/// values on a coarse grid, so ties across and within dimensions are common.
pub fn random_filtration(r: &mut Rng, max_points: usize) -> FiltrationComplex {
    let n = r.random_range(1..=max_points);
    let ids: Vec<usize> = sample(r, 40, n).into_iter().collect();
    let step = |r: &mut Rng| r.random_range(0..4) as f64 * 0.25;
    let vval: Vec<f64> = (0..n)
        .map(|_| if r.random_bool(0.5) { 0.0 } else { step(r) })
        .collect();
    let p_edge = r.random_range(0.2..0.95);
    let p_tri = r.random_range(0.1..0.9);

    let mut simplices: Vec<Simplex> = (0..n)
        .map(|i| Simplex::new(&[ids[i]], vval[i]).unwrap())
        .collect();
    let mut eval: HashMap<(usize, usize), f64> = HashMap::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.random_bool(p_edge) {
                let v = vval[i].max(vval[j]) + step(r);
                eval.insert((i, j), v);
                simplices.push(Simplex::new(&[ids[i], ids[j]], v).unwrap());
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if let (Some(a), Some(b), Some(c)) =
                    (eval.get(&(i, j)), eval.get(&(i, k)), eval.get(&(j, k)))
                {
                    if r.random_bool(p_tri) {
                        let v = a.max(*b).max(*c) + step(r);
                        simplices.push(Simplex::new(&[ids[i], ids[j], ids[k]], v).unwrap());
                    }
                }
            }
        }
    }
    FiltrationComplex::new(simplices).unwrap()
}

/// Rank over Z/2 of a set of bit vectors.
fn rank_z2(mut rows: Vec<u64>) -> usize {
    let mut rank = 0;
    for bit in 0..64 {
        let mask = 1u64 << bit;
        if let Some(p) = rows.iter().position(|&r| r & mask != 0) {
            let pivot = rows.swap_remove(p);
            for r in rows.iter_mut() {
                if *r & mask != 0 {
                    *r ^= pivot;
                }
            }
            rank += 1;
        }
    }
    rank
}

/// `(β₀, β₁)` of the sub-complex `{σ : value(σ) ≤ t}` by dense boundary ranks.
pub fn dense_betti(f: &FiltrationComplex, t: f64) -> (usize, usize) {
    let sub: Vec<&Simplex> = f.simplices().iter().filter(|s| s.value <= t).collect();
    let verts: Vec<usize> = sub
        .iter()
        .filter(|s| s.dim() == 0)
        .map(|s| s.vertices()[0])
        .collect();
    let edges: Vec<(usize, usize)> = sub
        .iter()
        .filter(|s| s.dim() == 1)
        .map(|s| (s.vertices()[0], s.vertices()[1]))
        .collect();
    assert!(verts.len() <= 64 && edges.len() <= 64);
    let vpos = |v: usize| verts.iter().position(|&u| u == v).unwrap();
    let epos = |a: usize, b: usize| edges.iter().position(|&e| e == (a, b)).unwrap();
    let d1: Vec<u64> = edges
        .iter()
        .map(|&(a, b)| (1 << vpos(a)) | (1 << vpos(b)))
        .collect();
    let d2: Vec<u64> = sub
        .iter()
        .filter(|s| s.dim() == 2)
        .map(|s| {
            let v = s.vertices();
            (1 << epos(v[0], v[1])) | (1 << epos(v[0], v[2])) | (1 << epos(v[1], v[2]))
        })
        .collect();
    let r1 = rank_z2(d1);
    let r2 = rank_z2(d2);
    (verts.len() - r1, edges.len() - r1 - r2)
}

/// Distinct filtration values, plus a point below all of them and midpoints between
/// consecutive values.
pub fn probe_values(f: &FiltrationComplex) -> Vec<f64> {
    let mut v: Vec<f64> = f.simplices().iter().map(|s| s.value).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mut out = vec![-1.0];
    for w in v.windows(2) {
        out.push(0.5 * (w[0] + w[1]));
    }
    out.extend(v);
    out.push(1e9);
    out
}

// ---------------------------------------------------------------- diagrams

/// Random diagram with up to `max_finite` finite points and `essential` essential
/// points in dimension `dim`, mixing grid values (for ties) and continuous ones.
pub fn random_diagram(
    r: &mut Rng,
    dim: usize,
    max_finite: usize,
    essential: usize,
) -> PersistenceDiagram {
    use boundary_homology::persistence::PersistencePair;
    let val = |r: &mut Rng| {
        if r.random_bool(0.5) {
            r.random_range(0..8) as f64 * 0.5
        } else {
            r.random_range(0.0..4.0)
        }
    };
    let mut pairs = Vec::new();
    for _ in 0..r.random_range(0..=max_finite) {
        let b = val(r);
        let d = b + val(r);
        pairs.push(PersistencePair::new(dim, b, d));
    }
    for _ in 0..essential {
        pairs.push(PersistencePair::new(dim, val(r), f64::INFINITY));
    }
    PersistenceDiagram::new(pairs)
}

fn linf(p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - q.0).abs().max((p.1 - q.1).abs())
}

/// Exhaustive search over every partial matching of the finite points; unmatched
/// points pay their L∞ distance to the diagonal.
fn brute_finite(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    fn go(
        i: usize,
        a: &[(f64, f64)],
        b: &[(f64, f64)],
        used: &mut Vec<bool>,
        acc: f64,
        best: &mut f64,
    ) {
        if acc >= *best {
            return;
        }
        if i == a.len() {
            let rest = b
                .iter()
                .zip(used.iter())
                .filter(|(_, &u)| !u)
                .map(|(q, _)| (q.1 - q.0) / 2.0)
                .fold(acc, f64::max);
            *best = best.min(rest);
            return;
        }
        go(i + 1, a, b, used, acc.max((a[i].1 - a[i].0) / 2.0), best);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                go(i + 1, a, b, used, acc.max(linf(a[i], b[j])), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
    best
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Bottleneck distance by enumeration. Essential points match only each other.
pub fn brute_bottleneck(a: &PersistenceDiagram, b: &PersistenceDiagram, dim: usize) -> f64 {
    let parts = |d: &PersistenceDiagram| {
        let pts: Vec<_> = d.dim(dim).filter(|p| p.birth != p.death).collect();
        let fin: Vec<(f64, f64)> = pts
            .iter()
            .filter(|p| p.death.is_finite())
            .map(|p| (p.birth, p.death))
            .collect();
        let ess: Vec<f64> = pts
            .iter()
            .filter(|p| !p.death.is_finite())
            .map(|p| p.birth)
            .collect();
        (fin, ess)
    };
    let (fa, ea) = parts(a);
    let (fb, eb) = parts(b);
    if ea.len() != eb.len() {
        return f64::INFINITY;
    }
    let ess = permutations(ea.len())
        .into_iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(i, &j)| (ea[i] - eb[j]).abs())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    let ess = if ea.is_empty() { 0.0 } else { ess };
    ess.max(brute_finite(&fa, &fb))
}

// ---------------------------------------------------------------- graphs

/// Random connected graph on `n` vertices: a random tree plus `extra` random edges.
pub fn random_connected_graph(r: &mut Rng, n: usize, extra: usize) -> NeighborGraph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((r.random_range(0..v), v));
    }
    for _ in 0..extra {
        let a = r.random_range(0..n);
        let b = r.random_range(0..n);
        if a != b {
            edges.push((a, b));
        }
    }
    NeighborGraph::from_edges(n, &edges).unwrap()
}

/// Either i.i.d. labels or labels grown as a few contiguous regions.
pub fn random_labels(r: &mut Rng, g: &NeighborGraph) -> Vec<Label> {
    let n = g.vertex_count();
    if r.random_bool(0.5) {
        let p = r.random_range(0.05..0.95);
        return (0..n).map(|_| Label::from(r.random_bool(p))).collect();
    }
    let mut label: Vec<Option<Label>> = vec![None; n];
    let seeds = r.random_range(1..=6usize).min(n);
    let mut frontier = Vec::new();
    for v in sample(r, n, seeds) {
        label[v] = Some(r.random_range(0..2));
        frontier.push(v);
    }
    while !frontier.is_empty() {
        let i = r.random_range(0..frontier.len());
        let v = frontier.swap_remove(i);
        for &u in g.neighbors(v) {
            if label[u].is_none() {
                label[u] = label[v];
                frontier.push(u);
            }
        }
    }
    label.into_iter().map(|l| l.unwrap()).collect()
}

// ---------------------------------------------------------------- golden files

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

/// Rows of a header-first CSV as column-name maps.
pub fn read_golden(name: &str) -> Vec<HashMap<String, String>> {
    let text = std::fs::read_to_string(golden_dir().join(name)).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_owned)
        .collect();
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            header
                .iter()
                .cloned()
                .zip(l.split(',').map(str::to_owned))
                .collect()
        })
        .collect()
}

pub fn rel_close(actual: f64, expected: f64, tol: f64) -> bool {
    (actual - expected).abs() <= tol * expected.abs().max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------- S² on paths

/// Runs S² to exhaustion on a path of `n` vertices with labels `0` before `cut` and
/// `1` from `cut` on. Returns the number of bisection queries issued after both
/// labels have been seen, up to and including the query that reveals the cut edge.
pub fn path_bisections(n: usize, cut: usize, seed: u64) -> usize {
    use boundary_homology::active::{s2_run, Phase};
    use boundary_homology::datasets::LabelOracle;
    let g = NeighborGraph::path(n);
    let labels: Vec<Label> = (0..n).map(|i| Label::from(i >= cut)).collect();
    let log = s2_run(&g, &LabelOracle::Stored(labels), n, seed).unwrap();
    assert_eq!(log.found_cuts.len(), 1, "path with one cut");
    let cut_step = log.found_cuts[0].step;
    let mut seen = [false; 2];
    let both = log
        .entries
        .iter()
        .position(|e| {
            seen[e.label as usize] = true;
            seen[0] && seen[1]
        })
        .unwrap();
    log.entries[both + 1..=cut_step.max(both)]
        .iter()
        .filter(|e| e.phase == Phase::Bisect)
        .count()
}
