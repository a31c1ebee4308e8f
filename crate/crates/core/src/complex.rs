//! Labeled simplicial complexes truncated at dimension 2.
//!
//! Two constructions are provided: the locally scaled labeled Vietoris–Rips
//! filtration ([`build_lslvr_filtration`]) used on queried data, and the labeled
//! Čech snapshot ([`build_lc_complex`]) whose vertices are class-0 points witnessed
//! by a nearby class-1 point.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::datasets::{euclidean, Label, LabeledPointCloud};
use crate::persistence::{compute_persistence, PersistenceDiagram};
use crate::unionfind::UnionFind;
use crate::{Error, Execution, Result};

/// A simplex on at most three vertices with its filtration value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simplex {
    verts: [usize; 3],
    len: u8,
    pub value: f64,
}

impl Simplex {
    /// Builds a simplex; vertices are sorted and must be distinct.
    pub fn new(vertices: &[usize], value: f64) -> Result<Self> {
        if vertices.is_empty() || vertices.len() > 3 {
            return Err(Error::InvalidFiltration(format!(
                "simplices have 1 to 3 vertices, got {}",
                vertices.len()
            )));
        }
        let mut verts = [0; 3];
        verts[..vertices.len()].copy_from_slice(vertices);
        verts[..vertices.len()].sort_unstable();
        if verts[..vertices.len()].windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidFiltration(format!(
                "repeated vertex in {vertices:?}"
            )));
        }
        if !(value >= 0.0) {
            return Err(Error::InvalidFiltration(format!(
                "filtration value {value} is negative or NaN"
            )));
        }
        Ok(Simplex {
            verts,
            len: vertices.len() as u8,
            value,
        })
    }

    pub(crate) fn vertex(v: usize, value: f64) -> Self {
        Simplex {
            verts: [v, 0, 0],
            len: 1,
            value,
        }
    }

    pub(crate) fn edge(a: usize, b: usize, value: f64) -> Self {
        Simplex {
            verts: [a.min(b), a.max(b), 0],
            len: 2,
            value,
        }
    }

    pub(crate) fn triangle(a: usize, b: usize, c: usize, value: f64) -> Self {
        let mut v = [a, b, c];
        v.sort_unstable();
        Simplex {
            verts: v,
            len: 3,
            value,
        }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.verts[..self.len as usize]
    }

    pub fn dim(&self) -> usize {
        self.len as usize - 1
    }

    /// Codimension-one faces (empty for a vertex).
    pub fn facets(&self) -> impl Iterator<Item = Key> + '_ {
        let v = self.vertices();
        let n = if v.len() > 1 { v.len() } else { 0 };
        (0..n).map(move |skip| {
            let mut k = Key::default();
            for (_, &x) in v.iter().enumerate().filter(|&(t, _)| t != skip) {
                k.0[k.1 as usize] = x;
                k.1 += 1;
            }
            k
        })
    }

    pub fn key(&self) -> Key {
        Key(self.verts, self.len)
    }

    fn order(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.len.cmp(&other.len))
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

/// Hashable vertex set of a simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Key(pub(crate) [usize; 3], pub(crate) u8);

/// Simplices in filtration order: by value, then dimension, then vertex sequence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FiltrationComplex {
    simplices: Vec<Simplex>,
}

impl FiltrationComplex {
    /// Sorts `simplices` into filtration order and checks face closure and
    /// monotonicity.
    pub fn new(simplices: Vec<Simplex>) -> Result<Self> {
        let c = Self::from_unsorted(simplices);
        c.validate()?;
        Ok(c)
    }

    /// Sorts without validating. Persistence rejects invalid inputs later.
    pub fn from_unsorted(mut simplices: Vec<Simplex>) -> Self {
        simplices.sort_unstable_by(Simplex::order);
        FiltrationComplex { simplices }
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim() == dim).count()
    }

    /// Checks that every facet is present, enters no later than its coface and that
    /// no simplex is repeated.
    pub fn validate(&self) -> Result<()> {
        let mut value: HashMap<Key, f64> = HashMap::with_capacity(self.simplices.len());
        for s in &self.simplices {
            if value.insert(s.key(), s.value).is_some() {
                return Err(Error::InvalidFiltration(format!(
                    "duplicate simplex {:?}",
                    s.vertices()
                )));
            }
        }
        for s in &self.simplices {
            for f in s.facets() {
                match value.get(&f) {
                    None => {
                        return Err(Error::InvalidFiltration(format!(
                            "face {:?} of {:?} is missing",
                            &f.0[..f.1 as usize],
                            s.vertices()
                        )))
                    }
                    Some(&fv) if fv > s.value => {
                        return Err(Error::InvalidFiltration(format!(
                            "face {:?} enters at {fv} after its coface {:?} at {}",
                            &f.0[..f.1 as usize],
                            s.vertices(),
                            s.value
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Simplices entering at or before `t`.
    pub fn sublevel(&self, t: f64) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().take_while(move |s| s.value <= t)
    }

    /// Writes `filtration_value,dim,v0[,v1[,v2]]` rows in stored order.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_csv(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "filtration_value,dim,v0,v1,v2")?;
        for s in &self.simplices {
            let v: Vec<String> = s.vertices().iter().map(ToString::to_string).collect();
            writeln!(out, "{:?},{},{}", s.value, s.dim(), v.join(","))?;
        }
        Ok(())
    }

    /// Reads a complex written by [`write_csv`](Self::write_csv).
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_path(path)?;
        let mut simplices = Vec::new();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            let perr = |msg: String| Error::Parse {
                path: path.to_path_buf(),
                row: row + 2,
                msg,
            };
            let value: f64 = rec
                .get(0)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| perr("bad filtration value".into()))?;
            let dim: usize = rec
                .get(1)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| perr("bad dimension".into()))?;
            let verts = rec
                .iter()
                .skip(2)
                .filter(|f| !f.trim().is_empty())
                .map(|f| {
                    f.trim()
                        .parse::<usize>()
                        .map_err(|_| perr(format!("bad vertex `{f}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if verts.len() != dim + 1 {
                return Err(perr(format!(
                    "dimension {dim} with {} vertices",
                    verts.len()
                )));
            }
            simplices.push(Simplex::new(&verts, value).map_err(|e| perr(e.to_string()))?);
        }
        Self::new(simplices)
    }
}

/// Per-point distance to the `k_opposite`-th nearest point of the other class.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalScales {
    pub rho: Vec<f64>,
    pub k_opposite: usize,
}

pub fn local_scales(cloud: &LabeledPointCloud, k_opposite: usize) -> Result<LocalScales> {
    local_scales_with(cloud, k_opposite, Execution::default())
}

pub fn local_scales_with(
    cloud: &LabeledPointCloud,
    k_opposite: usize,
    exec: Execution,
) -> Result<LocalScales> {
    if k_opposite == 0 {
        return Err(Error::InvalidParameter(
            "k_opposite must be at least 1".into(),
        ));
    }
    let labels = cloud.require_labels("local scales")?;
    let (class0, class1) = split_classes(labels);
    for (y, members) in [(0, &class0), (1, &class1)] {
        if members.len() < k_opposite {
            return Err(Error::InsufficientData(format!(
                "class {y} has {} points but k_opposite = {k_opposite}",
                members.len()
            )));
        }
    }
    let rho = exec.map_range(cloud.len(), |i| {
        let others = if labels[i] == 0 { &class1 } else { &class0 };
        let p = cloud.point(i);
        let mut d: Vec<f64> = others
            .iter()
            .map(|&j| euclidean(p, cloud.point(j)))
            .collect();
        let (_, kth, _) = d.select_nth_unstable_by(k_opposite - 1, f64::total_cmp);
        *kth
    });
    Ok(LocalScales { rho, k_opposite })
}

fn split_classes(labels: &[Label]) -> (Vec<usize>, Vec<usize>) {
    let mut c0 = Vec::new();
    let mut c1 = Vec::new();
    for (i, &y) in labels.iter().enumerate() {
        if y == 0 {
            c0.push(i);
        } else {
            c1.push(i);
        }
    }
    (c0, c1)
}

/// Locally scaled entry value of a cross-class edge, `d / sqrt(rho_i rho_j)`.
///
/// Coincident points enter at 0; a positive distance against a zero scale never
/// enters.
pub fn cross_edge_value(distance: f64, rho_i: f64, rho_j: f64) -> f64 {
    if distance == 0.0 {
        return 0.0;
    }
    let s = (rho_i * rho_j).sqrt();
    if s > 0.0 {
        distance / s
    } else {
        f64::INFINITY
    }
}

/// Builds the LS-LVR filtration up to scale `kappa_max`.
///
/// Vertices enter at 0. A cross-class edge enters at [`cross_edge_value`]. A
/// same-class edge `{i, k}` enters at `min_j max(κ_ij, κ_jk)` over common
/// cross-class neighbors `j`. A triangle enters when its last edge does.
pub fn build_lslvr_filtration(
    cloud: &LabeledPointCloud,
    scales: &LocalScales,
    kappa_max: f64,
) -> Result<FiltrationComplex> {
    build_lslvr_filtration_with(cloud, scales, kappa_max, Execution::default())
}

pub fn build_lslvr_filtration_with(
    cloud: &LabeledPointCloud,
    scales: &LocalScales,
    kappa_max: f64,
    exec: Execution,
) -> Result<FiltrationComplex> {
    let labels = cloud.require_labels("the LS-LVR filtration")?;
    let n = cloud.len();
    if scales.rho.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{} scales for {n} points",
            scales.rho.len()
        )));
    }
    if !(kappa_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa_max must be positive, got {kappa_max}"
        )));
    }
    let rho = &scales.rho;
    let (class0, class1) = split_classes(labels);

    // Cross-class neighbors of each class-0 point with their entry values.
    let cross0: Vec<Vec<(usize, f64)>> = exec.map_slice(&class0, |&i| {
        let p = cloud.point(i);
        class1
            .iter()
            .filter_map(|&j| {
                let k = cross_edge_value(euclidean(p, cloud.point(j)), rho[i], rho[j]);
                (k <= kappa_max).then_some((j, k))
            })
            .collect()
    });
    let mut cross: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&i, list) in class0.iter().zip(&cross0) {
        for &(j, k) in list {
            cross[i].push((j, k));
            cross[j].push((i, k));
        }
    }
    for list in &mut cross {
        list.sort_unstable_by_key(|&(j, _)| j);
    }

    // Same-class edges through a shared cross-class witness.
    let mut edge_value: HashMap<(usize, usize), f64> = HashMap::new();
    for (i, list) in cross.iter().enumerate() {
        for &(j, k) in list {
            if i < j {
                edge_value.insert((i, j), k);
            }
        }
    }
    let mut same: HashMap<(usize, usize), f64> = HashMap::new();
    for list in &cross {
        for (a, &(i, ki)) in list.iter().enumerate() {
            for &(k, kk) in &list[a + 1..] {
                let v = ki.max(kk);
                same.entry((i, k))
                    .and_modify(|cur| {
                        if v < *cur {
                            *cur = v
                        }
                    })
                    .or_insert(v);
            }
        }
    }
    edge_value.extend(same);

    let mut simplices: Vec<Simplex> = (0..n).map(|v| Simplex::vertex(v, 0.0)).collect();
    simplices.extend(
        edge_value
            .iter()
            .map(|(&(a, b), &v)| Simplex::edge(a, b, v)),
    );
    simplices.extend(flag_triangles(n, &edge_value, exec));
    Ok(FiltrationComplex::from_unsorted(simplices))
}

/// All triangles whose three edges are present, entering at the max edge value.
fn flag_triangles(
    n: usize,
    edge_value: &HashMap<(usize, usize), f64>,
    exec: Execution,
) -> Vec<Simplex> {
    let mut upper: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&(a, b), &v) in edge_value {
        upper[a].push((b, v));
    }
    for list in &mut upper {
        list.sort_unstable_by_key(|&(b, _)| b);
    }
    let per_vertex = exec.map_range(n, |a| {
        let ua = &upper[a];
        let mut out = Vec::new();
        for (t, &(b, vab)) in ua.iter().enumerate() {
            // c > b with a-c and b-c present: intersect ua[t+1..] with upper[b]
            let (mut x, mut y) = (t + 1, 0);
            let ub = &upper[b];
            while x < ua.len() && y < ub.len() {
                match ua[x].0.cmp(&ub[y].0) {
                    Ordering::Less => x += 1,
                    Ordering::Greater => y += 1,
                    Ordering::Equal => {
                        let v = vab.max(ua[x].1).max(ub[y].1);
                        out.push(Simplex::triangle(a, b, ua[x].0, v));
                        x += 1;
                        y += 1;
                    }
                }
            }
        }
        out
    });
    per_vertex.into_iter().flatten().collect()
}

/// Radius of the smallest ball enclosing three points.
pub fn min_enclosing_radius(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let (ab, bc, ca) = (euclidean(a, b), euclidean(b, c), euclidean(c, a));
    // The ball on the longest side is minimal when it contains the opposite vertex.
    let (long, p, q, r) = if ab >= bc && ab >= ca {
        (ab, a, b, c)
    } else if bc >= ca {
        (bc, b, c, a)
    } else {
        (ca, c, a, b)
    };
    let mid: Vec<f64> = p.iter().zip(q).map(|(x, y)| 0.5 * (x + y)).collect();
    if euclidean(&mid, r) <= 0.5 * long {
        return 0.5 * long;
    }
    // Acute triangle: circumradius abc / (4 area), area from Heron's formula in the
    // numerically stable ordering.
    let mut s = [ab, bc, ca];
    s.sort_unstable_by(|x, y| y.total_cmp(x));
    let [x, y, z] = s;
    let area4 = ((x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z))).sqrt();
    ab * bc * ca / area4
}

/// Labeled Čech complex at scale `epsilon`.
///
/// Vertices are the points of `d0` within `gamma` of some point of `d1` (indices
/// refer to `d0`). Two vertices span an edge when their `epsilon`-balls meet, three
/// span a triangle when all three balls share a point. Every simplex carries value
/// `epsilon`.
pub fn build_lc_complex(
    d0: &LabeledPointCloud,
    d1: &LabeledPointCloud,
    epsilon: f64,
    gamma: f64,
) -> Result<FiltrationComplex> {
    if !(epsilon > 0.0) || !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon and gamma must be positive, got {epsilon} and {gamma}"
        )));
    }
    if !d0.is_empty() && !d1.is_empty() && d0.dim() != d1.dim() {
        return Err(Error::InvalidParameter(
            "reference and witness sets differ in dimension".into(),
        ));
    }
    let witnessed: Vec<usize> = (0..d0.len())
        .filter(|&i| d1.points().any(|q| euclidean(d0.point(i), q) <= gamma))
        .collect();
    let mut simplices: Vec<Simplex> = witnessed
        .iter()
        .map(|&v| Simplex::vertex(v, epsilon))
        .collect();
    let mut adj: HashSet<(usize, usize)> = HashSet::new();
    for (a, &i) in witnessed.iter().enumerate() {
        for &j in &witnessed[a + 1..] {
            if d0.distance(i, j) <= 2.0 * epsilon {
                adj.insert((i, j));
                simplices.push(Simplex::edge(i, j, epsilon));
            }
        }
    }
    for (a, &i) in witnessed.iter().enumerate() {
        for (b, &j) in witnessed.iter().enumerate().skip(a + 1) {
            if !adj.contains(&(i, j)) {
                continue;
            }
            for &k in &witnessed[b + 1..] {
                if adj.contains(&(i, k))
                    && adj.contains(&(j, k))
                    && min_enclosing_radius(d0.point(i), d0.point(j), d0.point(k)) <= epsilon
                {
                    simplices.push(Simplex::triangle(i, j, k, epsilon));
                }
            }
        }
    }
    Ok(FiltrationComplex::from_unsorted(simplices))
}

/// Betti number of the sub-complex at each grid value.
pub fn betti_window_scan(
    filtration: &FiltrationComplex,
    dim: usize,
    kappa_grid: &[f64],
) -> Result<Vec<usize>> {
    if kappa_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "kappa grid must be sorted ascending".into(),
        ));
    }
    let pd = compute_persistence(filtration)?;
    Ok(betti_scan_diagram(&pd, dim, kappa_grid))
}

pub fn betti_scan_diagram(pd: &PersistenceDiagram, dim: usize, kappa_grid: &[f64]) -> Vec<usize> {
    kappa_grid.iter().map(|&t| pd.betti_at(dim, t)).collect()
}

/// Maximal runs of `grid` where the scanned Betti number equals `target`, as
/// `(first, last)` grid values.
pub fn betti_windows(grid: &[f64], betti: &[usize], target: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &b) in betti.iter().enumerate() {
        match (b == target, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((grid[s], grid[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((grid[s], grid[betti.len() - 1]));
    }
    out
}

/// Components of the sub-complex at `t` that contain at least one edge. Isolated
/// vertices are points far from the other class and are not counted, so this is
/// the component count of the cross-class boundary structure.
pub fn boundary_components(filtration: &FiltrationComplex, t: f64) -> usize {
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut edges = Vec::new();
    for s in filtration.sublevel(t) {
        if let &[a, b] = s.vertices() {
            let next = ids.len();
            let a = *ids.entry(a).or_insert(next);
            let next = ids.len();
            let b = *ids.entry(b).or_insert(next);
            edges.push((a, b));
        }
    }
    let mut uf = UnionFind::new(ids.len());
    for (a, b) in edges {
        uf.union(a, b);
    }
    uf.count()
}
