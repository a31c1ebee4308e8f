//! Persistent homology in dimensions 0 and 1 by Z/2 boundary-matrix reduction.

use std::collections::HashMap;
use std::path::Path;

use serde_json::{json, Value};

use crate::complex::{FiltrationComplex, Key};
use crate::unionfind::UnionFind;
use crate::{Error, Result};

/// A (birth, death) pair; `death` is `f64::INFINITY` for essential classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn new(dim: usize, birth: f64, death: f64) -> Self {
        PersistencePair { dim, birth, death }
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn is_zero_persistence(&self) -> bool {
        self.birth == self.death
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    /// Alive on the half-open interval [birth, death).
    pub fn alive_at(&self, t: f64) -> bool {
        self.birth <= t && t < self.death
    }
}

/// Multiset of persistence pairs in dimensions 0 and 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn new(pairs: Vec<PersistencePair>) -> Self {
        PersistenceDiagram { pairs }
    }

    pub fn dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// Pairs of `dim` with positive persistence.
    pub fn nontrivial(&self, dim: usize) -> Vec<PersistencePair> {
        self.dim(dim)
            .filter(|p| !p.is_zero_persistence())
            .copied()
            .collect()
    }

    pub fn betti_at(&self, dim: usize, t: f64) -> usize {
        self.dim(dim).filter(|p| p.alive_at(t)).count()
    }

    /// JSON `{"dim0": [[b, d | "inf"], ...], "dim1": [...]}`.
    pub fn to_json(&self, include_zero_persistence: bool) -> Value {
        let encode = |dim: usize| -> Value {
            Value::Array(
                self.dim(dim)
                    .filter(|p| include_zero_persistence || !p.is_zero_persistence())
                    .map(|p| {
                        let d = if p.is_essential() {
                            json!("inf")
                        } else {
                            json!(p.death)
                        };
                        json!([p.birth, d])
                    })
                    .collect(),
            )
        };
        json!({ "dim0": encode(0), "dim1": encode(1) })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let mut pairs = Vec::new();
        for (dim, key) in [(0, "dim0"), (1, "dim1")] {
            let Some(list) = v.get(key) else { continue };
            let list = list
                .as_array()
                .ok_or_else(|| Error::InvalidParameter(format!("`{key}` must be an array")))?;
            for item in list {
                let bad = || Error::InvalidParameter(format!("malformed pair {item} in `{key}`"));
                let arr = item.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
                let birth = arr[0].as_f64().ok_or_else(bad)?;
                let death = match &arr[1] {
                    Value::String(s) if s == "inf" => f64::INFINITY,
                    d => d.as_f64().ok_or_else(bad)?,
                };
                if !(birth <= death) {
                    return Err(Error::InvalidParameter(format!(
                        "pair ({birth}, {death}) has birth after death"
                    )));
                }
                pairs.push(PersistencePair::new(dim, birth, death));
            }
        }
        Ok(PersistenceDiagram { pairs })
    }

    pub fn save_json(&self, path: impl AsRef<Path>, include_zero_persistence: bool) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json(include_zero_persistence))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_json(&v)
    }
}

/// Computes the dimension 0 and 1 persistence pairs of `filtration` over Z/2.
///
/// Dimension 0 uses union-find with the elder rule. Dimension 1 reduces the
/// coboundary matrix of the edges in reverse filtration order, skipping edges that
/// merged components; this yields the same pairs as reducing the boundary matrix
/// since the pairing is unique for a fixed simplex order. Zero-persistence pairs are
/// kept. Classes never killed get infinite death; 2-dimensional classes are dropped.
pub fn compute_persistence(filtration: &FiltrationComplex) -> Result<PersistenceDiagram> {
    let simplices = filtration.simplices();
    // Simplices are addressed by ordinal within their dimension, which preserves
    // filtration order.
    let mut by_dim: [Vec<usize>; 3] = Default::default();
    for (j, s) in simplices.iter().enumerate() {
        by_dim[s.dim()].push(j);
    }
    let mut ordinal: HashMap<Key, u32> = HashMap::with_capacity(by_dim[0].len() + by_dim[1].len());
    for d in 0..2 {
        for (o, &j) in by_dim[d].iter().enumerate() {
            if ordinal.insert(simplices[j].key(), o as u32).is_some() {
                return Err(Error::InvalidFiltration(format!(
                    "repeated simplex {:?}",
                    simplices[j].vertices()
                )));
            }
        }
    }
    check_unique_triangles(filtration, &by_dim[2])?;
    let faces = |d: usize, o: usize| -> Result<Vec<u32>> {
        let j = by_dim[d][o];
        let s = &simplices[j];
        s.facets()
            .map(|f| {
                let &r = ordinal.get(&f).ok_or_else(|| {
                    Error::InvalidFiltration(format!("a face of {:?} is missing", s.vertices()))
                })?;
                if by_dim[d - 1][r as usize] >= j {
                    return Err(Error::InvalidFiltration(format!(
                        "a face of {:?} enters after it",
                        s.vertices()
                    )));
                }
                Ok(r)
            })
            .collect()
    };

    const NONE: u32 = u32::MAX;
    let (n_vertices, n_edges, n_triangles) = (by_dim[0].len(), by_dim[1].len(), by_dim[2].len());

    // Dimension 0. Each component is represented by its oldest vertex; a merge
    // kills the younger representative.
    let mut uf = UnionFind::new(n_vertices);
    let mut oldest: Vec<u32> = (0..n_vertices as u32).collect();
    let mut vertex_killer = vec![NONE; n_vertices];
    let mut negative_edge = vec![false; n_edges];
    for e in 0..n_edges {
        let f = faces(1, e)?;
        let (ra, rb) = (uf.find(f[0] as usize), uf.find(f[1] as usize));
        if ra != rb {
            let (old, young) = (oldest[ra].min(oldest[rb]), oldest[ra].max(oldest[rb]));
            vertex_killer[young as usize] = e as u32;
            negative_edge[e] = true;
            uf.union(ra, rb);
            oldest[uf.find(ra)] = old;
        }
    }

    // Dimension 1. Coboundaries as sorted triangle ordinals; the pivot of a column
    // is its earliest triangle.
    let mut offsets = vec![0usize; n_edges + 1];
    let mut tri_faces: Vec<[u32; 3]> = Vec::with_capacity(n_triangles);
    for t in 0..n_triangles {
        let f = faces(2, t)?;
        for &e in &f {
            offsets[e as usize + 1] += 1;
        }
        tri_faces.push([f[0], f[1], f[2]]);
    }
    for e in 0..n_edges {
        offsets[e + 1] += offsets[e];
    }
    let mut fill = offsets.clone();
    let mut cofaces = vec![0u32; offsets[n_edges]];
    for (t, f) in tri_faces.iter().enumerate() {
        for &e in f {
            cofaces[fill[e as usize]] = t as u32;
            fill[e as usize] += 1;
        }
    }
    drop(tri_faces);
    drop(fill);

    let mut triangle_owner: HashMap<u32, u32> = HashMap::new();
    let mut reduced: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut edge_killer = vec![NONE; n_edges];
    for e in (0..n_edges).rev() {
        if negative_edge[e] {
            continue;
        }
        let coboundary = &cofaces[offsets[e]..offsets[e + 1]];
        let Some(&first) = coboundary.first() else {
            continue;
        };
        if let std::collections::hash_map::Entry::Vacant(slot) = triangle_owner.entry(first) {
            // apparent pivot: the column needs no reduction
            slot.insert(e as u32);
            edge_killer[e] = first;
            reduced.insert(e as u32, coboundary.to_vec());
            continue;
        }
        let mut col = coboundary.to_vec();
        while let Some(&low) = col.first() {
            match triangle_owner.get(&low) {
                None => {
                    triangle_owner.insert(low, e as u32);
                    edge_killer[e] = low;
                    reduced.insert(e as u32, col);
                    break;
                }
                Some(owner) => col = symmetric_difference(&col, &reduced[owner]),
            }
        }
    }

    let death = |killer: u32, d: usize| {
        if killer == NONE {
            f64::INFINITY
        } else {
            simplices[by_dim[d][killer as usize]].value
        }
    };
    let mut pairs = Vec::with_capacity(n_vertices + n_edges);
    for s in simplices.iter().filter(|s| s.dim() < 2) {
        let o = ordinal[&s.key()] as usize;
        let pair = match s.dim() {
            0 => PersistencePair::new(0, s.value, death(vertex_killer[o], 1)),
            _ if negative_edge[o] => continue,
            _ => PersistencePair::new(1, s.value, death(edge_killer[o], 2)),
        };
        pairs.push(pair);
    }
    Ok(PersistenceDiagram { pairs })
}

/// Rejects repeated triangles. Vertex triples are packed into one word when the
/// indices fit, which keeps the check cheap on large complexes.
fn check_unique_triangles(filtration: &FiltrationComplex, triangles: &[usize]) -> Result<()> {
    let simplices = filtration.simplices();
    let max_vertex = triangles
        .iter()
        .map(|&j| simplices[j].vertices()[2])
        .max()
        .unwrap_or(0);
    let duplicate = if max_vertex < 1 << 21 {
        let mut packed: Vec<u64> = triangles
            .iter()
            .map(|&j| {
                simplices[j]
                    .vertices()
                    .iter()
                    .fold(0u64, |acc, &v| (acc << 21) | v as u64)
            })
            .collect();
        packed.sort_unstable();
        packed.windows(2).any(|w| w[0] == w[1])
    } else {
        let mut keys: Vec<Key> = triangles.iter().map(|&j| simplices[j].key()).collect();
        keys.sort_unstable();
        keys.windows(2).any(|w| w[0] == w[1])
    };
    if duplicate {
        return Err(Error::InvalidFiltration("repeated triangle".into()));
    }
    Ok(())
}

fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Betti number of the sub-complex at `t`.
pub fn betti_at(diagram: &PersistenceDiagram, dim: usize, t: f64) -> usize {
    diagram.betti_at(dim, t)
}

/// Connected components of the 1-skeleton at scale `t`, by union-find.
pub fn betti0_unionfind(filtration: &FiltrationComplex, t: f64) -> usize {
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut edges = Vec::new();
    for s in filtration.sublevel(t) {
        match *s.vertices() {
            [v] => {
                let next = ids.len();
                ids.entry(v).or_insert(next);
            }
            [a, b] => edges.push((a, b)),
            _ => {}
        }
    }
    let mut uf = UnionFind::new(ids.len());
    for (a, b) in edges {
        if let (Some(&x), Some(&y)) = (ids.get(&a), ids.get(&b)) {
            uf.union(x, y);
        }
    }
    uf.count()
}
