//! Point clouds, synthetic generators, label oracles and file I/O.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

/// Binary class label.
pub type Label = u8;

/// An analytic circle in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    #[serde(rename = "c")]
    pub center: [f64; 2],
    #[serde(rename = "r")]
    pub radius: f64,
}

impl Circle {
    pub fn new(center: [f64; 2], radius: f64) -> Self {
        Circle { center, radius }
    }

    /// Signed distance to the circle: negative inside.
    pub fn signed_distance(&self, p: &[f64]) -> f64 {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        dx.hypot(dy) - self.radius
    }
}

/// Analytic description of a synthetic decision boundary made of circles.
///
/// Serialized as the JSON sidecar `{"circles":[{"c":[x,y],"r":r}],"betti0":k0,"betti1":k1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDescriptor {
    pub circles: Vec<Circle>,
    pub betti0: usize,
    pub betti1: usize,
}

impl BoundaryDescriptor {
    /// Descriptor for a union of pairwise disjoint circles.
    pub fn disjoint_circles(circles: Vec<Circle>) -> Result<Self> {
        for (i, c) in circles.iter().enumerate() {
            if !(c.radius > 0.0) || !c.radius.is_finite() {
                return Err(Error::InvalidGeometry(format!(
                    "circle {i} has non-positive radius {}",
                    c.radius
                )));
            }
            if !c.center.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidGeometry(format!(
                    "circle {i} has a non-finite center"
                )));
            }
        }
        for i in 0..circles.len() {
            for j in i + 1..circles.len() {
                let (a, b) = (&circles[i], &circles[j]);
                let d = (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]);
                if d <= a.radius + b.radius {
                    return Err(Error::InvalidGeometry(format!(
                        "circles {i} and {j} overlap (center distance {d}, radii {} + {})",
                        a.radius, b.radius
                    )));
                }
            }
        }
        let k = circles.len();
        Ok(BoundaryDescriptor {
            circles,
            betti0: k,
            betti1: k,
        })
    }

    /// Circles of radius 1 centered at (-2, 0) and (2, 0).
    pub fn default_two_circles() -> Self {
        Self::disjoint_circles(vec![
            Circle::new([-2.0, 0.0], 1.0),
            Circle::new([2.0, 0.0], 1.0),
        ])
        .expect("default geometry is valid")
    }

    /// Signed distance to the nearest circle (negative inside some circle).
    pub fn signed_distance(&self, p: &[f64]) -> f64 {
        self.circles
            .iter()
            .map(|c| c.signed_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Unsigned distance from `p` to the boundary manifold.
    pub fn distance_to_boundary(&self, p: &[f64]) -> f64 {
        self.circles
            .iter()
            .map(|c| c.signed_distance(p).abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: BoundaryDescriptor = serde_json::from_str(s)?;
        Ok(d)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// A set of points in R^d, optionally labeled, optionally carrying the analytic
/// boundary that generated the labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPointCloud {
    dim: usize,
    coords: Vec<f64>,
    labels: Option<Vec<Label>>,
    boundary: Option<BoundaryDescriptor>,
}

impl LabeledPointCloud {
    /// Builds a cloud from row-major coordinates.
    pub fn new(dim: usize, coords: Vec<f64>, labels: Option<Vec<Label>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "point dimension must be at least 1".into(),
            ));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        let n = coords.len() / dim;
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "{} labels for {n} points",
                    l.len()
                )));
            }
            if let Some(bad) = l.iter().find(|&&y| y > 1) {
                return Err(Error::InvalidParameter(format!(
                    "label {bad} is not binary"
                )));
            }
        }
        Ok(LabeledPointCloud {
            dim,
            coords,
            labels,
            boundary: None,
        })
    }

    /// Builds a cloud from a list of points.
    pub fn from_points(points: &[Vec<f64>], labels: Option<Vec<Label>>) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        if let Some((i, _)) = points.iter().enumerate().find(|(_, p)| p.len() != dim) {
            return Err(Error::InvalidParameter(format!(
                "point {i} has dimension {} but expected {dim}",
                points[i].len()
            )));
        }
        let coords = points.iter().flatten().copied().collect();
        Self::new(dim, coords, labels)
    }

    pub fn with_boundary(mut self, boundary: BoundaryDescriptor) -> Self {
        self.boundary = Some(boundary);
        self
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        let cloud = Self::new(self.dim, std::mem::take(&mut self.coords), Some(labels))?;
        Ok(LabeledPointCloud {
            boundary: self.boundary,
            ..cloud
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    /// Labels, or an error naming `what` needed them.
    pub fn require_labels(&self, what: &str) -> Result<&[Label]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter(format!("{what} requires a labeled cloud")))
    }

    pub fn boundary(&self) -> Option<&BoundaryDescriptor> {
        self.boundary.as_ref()
    }

    /// The sub-cloud at `indices`, in that order; the boundary descriptor is kept.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let coords = indices
            .iter()
            .flat_map(|&i| self.point(i).iter().copied())
            .collect();
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        LabeledPointCloud {
            dim: self.dim,
            coords,
            labels,
            boundary: self.boundary.clone(),
        }
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.point(i), self.point(j))
    }
}

/// Euclidean distance in double precision.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Samples `n` points uniformly in the bounding box of `geometry` inflated by one
/// radius and labels them 1 inside either circle.
///
/// With `noise > 0` the signed distance is perturbed by `noise * z`, `z ~ N(0, 1)`,
/// before thresholding. One normal variate is drawn per point regardless of
/// `noise`, so the point positions do not depend on the noise level.
pub fn generate_two_circles(
    n: usize,
    seed: u64,
    geometry: &BoundaryDescriptor,
    noise: f64,
) -> Result<LabeledPointCloud> {
    if geometry.circles.len() != 2 {
        return Err(Error::InvalidGeometry(format!(
            "expected exactly two circles, got {}",
            geometry.circles.len()
        )));
    }
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise must be finite and >= 0, got {noise}"
        )));
    }
    let geometry = BoundaryDescriptor::disjoint_circles(geometry.circles.clone())?;
    let pad = geometry
        .circles
        .iter()
        .map(|c| c.radius)
        .fold(0.0, f64::max);
    let lo_x = geometry
        .circles
        .iter()
        .map(|c| c.center[0] - c.radius)
        .fold(f64::INFINITY, f64::min)
        - pad;
    let hi_x = geometry
        .circles
        .iter()
        .map(|c| c.center[0] + c.radius)
        .fold(f64::NEG_INFINITY, f64::max)
        + pad;
    let lo_y = geometry
        .circles
        .iter()
        .map(|c| c.center[1] - c.radius)
        .fold(f64::INFINITY, f64::min)
        - pad;
    let hi_y = geometry
        .circles
        .iter()
        .map(|c| c.center[1] + c.radius)
        .fold(f64::NEG_INFINITY, f64::max)
        + pad;

    let mut rng = rng::seeded(seed);
    let mut coords = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x = lo_x + (hi_x - lo_x) * rng::unit(&mut rng);
        let y = lo_y + (hi_y - lo_y) * rng::unit(&mut rng);
        let z: f64 = rng.sample(StandardNormal);
        let s = geometry.signed_distance(&[x, y]) + noise * z;
        coords.push(x);
        coords.push(y);
        labels.push(Label::from(s < 0.0));
    }
    Ok(LabeledPointCloud::new(2, coords, Some(labels))?.with_boundary(geometry))
}

/// Half side length of the square domain used by the annulus scenario.
pub const ANNULUS_HALF_SIDE: f64 = 2.5;

/// Samples `n` points uniformly on the 5×5 square centered at the origin.
///
/// Label is 1 inside the disk of radius `tau`, except inside the tube
/// `tau - w < |x| < tau + w` where the two classes overlap completely and the label
/// is a fair coin. One coin is drawn per point regardless of position.
pub fn generate_annulus_cloud(n: usize, seed: u64, tau: f64, w: f64) -> Result<LabeledPointCloud> {
    validate_annulus(tau, w)?;
    let mut rng = rng::seeded(seed);
    let mut coords = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x = ANNULUS_HALF_SIDE * (2.0 * rng::unit(&mut rng) - 1.0);
        let y = ANNULUS_HALF_SIDE * (2.0 * rng::unit(&mut rng) - 1.0);
        let coin = Label::from(rng::unit(&mut rng) < 0.5);
        coords.push(x);
        coords.push(y);
        labels.push(annulus_label(x.hypot(y), tau, w, coin));
    }
    let boundary = BoundaryDescriptor::disjoint_circles(vec![Circle::new([0.0, 0.0], tau)])?;
    Ok(LabeledPointCloud::new(2, coords, Some(labels))?.with_boundary(boundary))
}

pub(crate) fn validate_annulus(tau: f64, w: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidGeometry(format!(
            "tau must be positive, got {tau}"
        )));
    }
    if !(w >= 0.0) || !(w < tau) {
        return Err(Error::InvalidGeometry(format!(
            "need 0 <= w < tau, got w = {w}, tau = {tau}"
        )));
    }
    if tau + w > ANNULUS_HALF_SIDE {
        return Err(Error::InvalidGeometry(format!(
            "circle of radius tau + w = {} does not fit in the 5x5 square",
            tau + w
        )));
    }
    Ok(())
}

fn annulus_label(r: f64, tau: f64, w: f64, coin: Label) -> Label {
    if w > 0.0 && r > tau - w && r < tau + w {
        coin
    } else {
        Label::from(r < tau)
    }
}

/// Deterministic label source for a cloud.
#[derive(Debug, Clone)]
pub enum LabelOracle {
    /// Labels stored alongside the cloud.
    Stored(Vec<Label>),
    /// Labels supplied externally, keyed by point index.
    Keyed(HashMap<usize, Label>),
}

impl LabelOracle {
    /// Oracle backed by the cloud's own labels.
    pub fn from_cloud(cloud: &LabeledPointCloud) -> Result<Self> {
        Ok(LabelOracle::Stored(
            cloud.require_labels("a label oracle")?.to_vec(),
        ))
    }

    /// Oracle from an `index,label` map; must cover every index in `0..n`.
    pub fn keyed(map: HashMap<usize, Label>, n: usize) -> Result<Self> {
        if let Some(i) = (0..n).find(|i| !map.contains_key(i)) {
            return Err(Error::InvalidParameter(format!(
                "label oracle has no label for index {i}"
            )));
        }
        if let Some((i, y)) = map.iter().find(|(_, &y)| y > 1) {
            return Err(Error::InvalidParameter(format!(
                "label {y} at index {i} is not binary"
            )));
        }
        Ok(LabelOracle::Keyed(map))
    }

    /// Reads an `index,label` CSV (an optional non-numeric header row is skipped).
    pub fn load_csv(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_path(path)?;
        let mut map = HashMap::new();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            let perr = |msg: String| Error::Parse {
                path: path.to_path_buf(),
                row: row + 1,
                msg,
            };
            if rec.len() != 2 {
                return Err(perr(format!(
                    "expected `index,label`, got {} fields",
                    rec.len()
                )));
            }
            let (Ok(i), Ok(y)) = (rec[0].trim().parse::<usize>(), rec[1].trim().parse::<u8>())
            else {
                if row == 0 {
                    continue;
                }
                return Err(perr(format!(
                    "non-numeric field in `{}`",
                    rec.iter().collect::<Vec<_>>().join(",")
                )));
            };
            if y > 1 {
                return Err(perr(format!("label {y} is not 0 or 1")));
            }
            map.insert(i, y);
        }
        Self::keyed(map, n)
    }

    pub fn label(&self, i: usize) -> Label {
        match self {
            LabelOracle::Stored(v) => v[i],
            LabelOracle::Keyed(m) => m[&i],
        }
    }

    pub fn len(&self) -> usize {
        match self {
            LabelOracle::Stored(v) => v.len(),
            LabelOracle::Keyed(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Writes `x1,...,xd[,label]` rows preceded by a header naming the columns.
pub fn save_point_csv(cloud: &LabeledPointCloud, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_point_csv(cloud, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_point_csv(cloud: &LabeledPointCloud, out: &mut impl Write) -> Result<()> {
    let mut header: Vec<String> = (1..=cloud.dim()).map(|k| format!("x{k}")).collect();
    if cloud.labels().is_some() {
        header.push("label".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for (i, p) in cloud.points().enumerate() {
        let mut row: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
        if let Some(l) = cloud.labels() {
            row.push(l[i].to_string());
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads a point CSV.
///
/// A leading header row (`x1,...,xd[,label]`) decides whether the last column is a
/// label. Without a header, the last column is read as a label.
pub fn load_point_csv(path: impl AsRef<Path>) -> Result<LabeledPointCloud> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut labeled: Option<bool> = None;
    let mut width: Option<usize> = None;
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = idx + 1;
        let perr = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            row,
            msg,
        };
        if idx == 0 && rec.iter().any(|f| f.trim().parse::<f64>().is_err()) {
            let last = rec.iter().next_back().unwrap_or("").trim();
            if !rec
                .iter()
                .all(|f| f.trim().starts_with('x') || f.trim() == "label")
            {
                return Err(perr(format!(
                    "unrecognized header `{}`",
                    rec.iter().collect::<Vec<_>>().join(",")
                )));
            }
            labeled = Some(last == "label");
            width = Some(rec.len());
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(perr(format!(
                "row has {} fields but expected {w}",
                rec.len()
            )));
        }
        let has_label = *labeled.get_or_insert(true);
        let ncoord = if has_label { w - 1 } else { w };
        if ncoord == 0 {
            return Err(perr("row has no coordinates".into()));
        }
        for f in rec.iter().take(ncoord) {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| perr(format!("non-numeric coordinate `{f}`")))?;
            coords.push(v);
        }
        if has_label {
            let f = rec[w - 1].trim();
            match f {
                "0" => labels.push(0),
                "1" => labels.push(1),
                _ => return Err(perr(format!("label `{f}` is not 0 or 1"))),
            }
        }
    }
    let has_label = labeled.unwrap_or(false);
    let dim = match (width, has_label) {
        (Some(w), true) => w - 1,
        (Some(w), false) => w,
        (None, _) => 1,
    };
    LabeledPointCloud::new(dim, coords, has_label.then_some(labels))
}

/// Writes a plain `i,j` edge list or other index pairs.
pub(crate) fn write_pairs(
    path: impl AsRef<Path>,
    header: &str,
    pairs: &[(usize, usize)],
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{header}")?;
    for (i, j) in pairs {
        writeln!(out, "{i},{j}")?;
    }
    out.flush()?;
    Ok(())
}
