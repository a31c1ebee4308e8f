//! Topological model selection over banks of classifier outputs.

use std::path::Path;

use crate::complex::{build_lslvr_filtration_with, local_scales_with};
use crate::datasets::{euclidean, Label, LabeledPointCloud};
use crate::metrics::argmin;
use crate::persistence::{compute_persistence, PersistenceDiagram};
use crate::{Error, Execution, Result};

/// Predictions of one classifier on a set of inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierOutputs {
    /// Inputs with the predicted labels attached.
    pub predictions: LabeledPointCloud,
    /// Optional class-1 probabilities.
    pub probabilities: Option<Vec<f64>>,
}

/// Label implied by a class-1 probability; 0.5 maps to class 1.
pub fn label_from_probability(p: f64) -> Label {
    Label::from(p >= 0.5)
}

impl ClassifierOutputs {
    pub fn new(predictions: LabeledPointCloud, probabilities: Option<Vec<f64>>) -> Result<Self> {
        let labels = predictions.require_labels("classifier outputs")?;
        if let Some(p) = &probabilities {
            if p.len() != labels.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} probabilities for {} predictions",
                    p.len(),
                    labels.len()
                )));
            }
            for (i, (&q, &y)) in p.iter().zip(labels).enumerate() {
                if !(0.0..=1.0).contains(&q) {
                    return Err(Error::InvalidParameter(format!(
                        "probability {q} at row {i} is outside [0, 1]"
                    )));
                }
                if label_from_probability(q) != y {
                    return Err(Error::InvalidParameter(format!(
                        "row {i}: label {y} disagrees with probability {q}"
                    )));
                }
            }
        }
        Ok(ClassifierOutputs {
            predictions,
            probabilities,
        })
    }

    pub fn labels(&self) -> &[Label] {
        self.predictions
            .labels()
            .expect("validated on construction")
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    /// Class-1 probabilities, falling back to hard labels.
    pub fn probabilities_or_labels(&self) -> Vec<f64> {
        match &self.probabilities {
            Some(p) => p.clone(),
            None => self.labels().iter().map(|&y| f64::from(y)).collect(),
        }
    }

    /// Fraction of `truth` the predictions get wrong.
    pub fn error_rate(&self, truth: &[Label]) -> Result<f64> {
        error_rate(self.labels(), truth)
    }

    /// Reads a prediction file with rows `x1,...,xd,label[,prob1]`.
    ///
    /// A header row names the columns (`x1,...,label[,prob1]`); without one every
    /// row is `x1,...,xd,label` and `dim` decides whether a trailing probability
    /// column is present.
    pub fn load_csv(path: impl AsRef<Path>, dim: usize) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_path(path)?;
        let mut coords = Vec::new();
        let mut labels = Vec::new();
        let mut probs = Vec::new();
        let mut width: Option<usize> = None;
        for (idx, rec) in reader.records().enumerate() {
            let rec = rec?;
            let row = idx + 1;
            let perr = |msg: String| Error::Parse {
                path: path.to_path_buf(),
                row,
                msg,
            };
            if idx == 0 && rec.get(0).is_some_and(|f| f.trim().parse::<f64>().is_err()) {
                continue;
            }
            let w = *width.get_or_insert(rec.len());
            if rec.len() != w {
                return Err(perr(format!(
                    "row has {} fields but expected {w}",
                    rec.len()
                )));
            }
            if w != dim + 1 && w != dim + 2 {
                return Err(perr(format!(
                    "expected {} or {} fields for dimension {dim}",
                    dim + 1,
                    dim + 2
                )));
            }
            for f in rec.iter().take(dim) {
                coords.push(
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| perr(format!("non-numeric coordinate `{f}`")))?,
                );
            }
            match rec[dim].trim() {
                "0" => labels.push(0),
                "1" => labels.push(1),
                f => return Err(perr(format!("label `{f}` is not 0 or 1"))),
            }
            if w == dim + 2 {
                let f = rec[dim + 1].trim();
                probs.push(
                    f.parse::<f64>()
                        .map_err(|_| perr(format!("non-numeric probability `{f}`")))?,
                );
            }
        }
        let has_probs = width == Some(dim + 2);
        let cloud = LabeledPointCloud::new(dim, coords, Some(labels))?;
        Self::new(cloud, has_probs.then_some(probs))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        use std::io::Write;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let mut header: Vec<String> = (1..=self.predictions.dim())
            .map(|k| format!("x{k}"))
            .collect();
        header.push("label".into());
        if self.probabilities.is_some() {
            header.push("prob1".into());
        }
        writeln!(out, "{}", header.join(","))?;
        for (i, p) in self.predictions.points().enumerate() {
            let mut row: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
            row.push(self.labels()[i].to_string());
            if let Some(pr) = &self.probabilities {
                row.push(format!("{:?}", pr[i]));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn error_rate(predicted: &[Label], truth: &[Label]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::InvalidParameter(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::InvalidParameter("error rate of an empty set".into()));
    }
    let wrong = predicted.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / truth.len() as f64)
}

/// Persistence diagram of a classifier's decision boundary: the LS-LVR filtration
/// of its inputs labeled by its predictions. Single-class predictions give an empty
/// diagram.
pub fn boundary_diagram(
    outputs: &ClassifierOutputs,
    k_opposite: usize,
    kappa_max: f64,
) -> Result<PersistenceDiagram> {
    boundary_diagram_with(outputs, k_opposite, kappa_max, Execution::default())
}

pub fn boundary_diagram_with(
    outputs: &ClassifierOutputs,
    k_opposite: usize,
    kappa_max: f64,
    exec: Execution,
) -> Result<PersistenceDiagram> {
    labeled_diagram(&outputs.predictions, k_opposite, kappa_max, exec)
}

/// LS-LVR persistence of a labeled cloud. Empty when either class has fewer than
/// `k_opposite` points, since no cross-class edge can be scaled.
pub fn labeled_diagram(
    cloud: &LabeledPointCloud,
    k_opposite: usize,
    kappa_max: f64,
    exec: Execution,
) -> Result<PersistenceDiagram> {
    let labels = cloud.require_labels("a boundary diagram")?;
    let ones = labels.iter().filter(|&&y| y == 1).count();
    if ones < k_opposite.max(1) || labels.len() - ones < k_opposite.max(1) {
        return Ok(PersistenceDiagram::default());
    }
    let scales = local_scales_with(cloud, k_opposite, exec)?;
    let filtration = build_lslvr_filtration_with(cloud, &scales, kappa_max, exec)?;
    compute_persistence(&filtration)
}

/// Bank member with the lowest error on the queried `(index, label)` pairs.
pub fn validation_select(
    bank: &[ClassifierOutputs],
    queried: &[(usize, Label)],
) -> Result<(usize, f64)> {
    if queried.is_empty() {
        return Err(Error::InvalidParameter(
            "validation needs at least one queried label".into(),
        ));
    }
    if bank.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot select from an empty bank".into(),
        ));
    }
    let truth: Vec<Label> = queried.iter().map(|&(_, y)| y).collect();
    let errors = bank
        .iter()
        .map(|member| {
            let labels = member.labels();
            let predicted = queried
                .iter()
                .map(|&(i, _)| {
                    labels.get(i).copied().ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "queried index {i} outside the bank's {} outputs",
                            labels.len()
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            error_rate(&predicted, &truth)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(argmin(&errors))
}

/// Elementwise mean of two probability vectors and the labels it implies.
pub fn ensemble_average(p_a: &[f64], p_b: &[f64]) -> Result<(Vec<f64>, Vec<Label>)> {
    if p_a.len() != p_b.len() {
        return Err(Error::InvalidParameter(format!(
            "{} vs {} probabilities",
            p_a.len(),
            p_b.len()
        )));
    }
    if let Some(p) = p_a.iter().chain(p_b).find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidParameter(format!(
            "probability {p} is outside [0, 1]"
        )));
    }
    let mean: Vec<f64> = p_a.iter().zip(p_b).map(|(a, b)| 0.5 * (a + b)).collect();
    let labels = mean.iter().map(|&p| label_from_probability(p)).collect();
    Ok((mean, labels))
}

/// k-nearest-neighbor majority vote. Distance ties go to the lower training
/// index, vote ties to class 1; the probability is the class-1 vote fraction.
pub fn knn_predict(
    train: &LabeledPointCloud,
    queries: &LabeledPointCloud,
    k: usize,
) -> Result<ClassifierOutputs> {
    knn_predict_with(train, queries, k, Execution::default())
}

pub fn knn_predict_with(
    train: &LabeledPointCloud,
    queries: &LabeledPointCloud,
    k: usize,
    exec: Execution,
) -> Result<ClassifierOutputs> {
    let labels = train.require_labels("kNN training data")?;
    if train.is_empty() {
        return Err(Error::InvalidParameter(
            "kNN needs a nonempty training set".into(),
        ));
    }
    if k == 0 || k > train.len() {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k <= {}, got {k}",
            train.len()
        )));
    }
    if !queries.is_empty() && queries.dim() != train.dim() {
        return Err(Error::InvalidParameter(
            "query and training dimensions differ".into(),
        ));
    }
    let probs = exec.map_range(queries.len(), |q| {
        let p = queries.point(q);
        let mut d: Vec<(f64, usize)> = train
            .points()
            .enumerate()
            .map(|(i, t)| (euclidean(p, t), i))
            .collect();
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        let ones = d[..k].iter().filter(|&&(_, i)| labels[i] == 1).count();
        ones as f64 / k as f64
    });
    let predicted: Vec<Label> = probs.iter().map(|&p| label_from_probability(p)).collect();
    let cloud = LabeledPointCloud::new(queries.dim(), queries.coords().to_vec(), Some(predicted))?;
    ClassifierOutputs::new(cloud, Some(probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn pts(xs: &[[f64; 2]], labels: Option<Vec<Label>>) -> LabeledPointCloud {
        let v: Vec<Vec<f64>> = xs.iter().map(|p| p.to_vec()).collect();
        LabeledPointCloud::from_points(&v, labels).unwrap()
    }

    fn random_cloud(n: usize, seed: u64, labeled: bool) -> LabeledPointCloud {
        let mut r = rng::seeded(seed);
        let coords: Vec<f64> = (0..2 * n).map(|_| rng::unit(&mut r)).collect();
        let labels = labeled.then(|| (0..n).map(|_| (rng::unit(&mut r) < 0.5) as Label).collect());
        LabeledPointCloud::new(2, coords, labels).unwrap()
    }

    #[test]
    fn outputs_validate_probability_consistency() {
        let c = pts(&[[0.0, 0.0], [1.0, 1.0]], Some(vec![0, 1]));
        assert!(ClassifierOutputs::new(c.clone(), Some(vec![0.2, 0.5])).is_ok());
        assert!(ClassifierOutputs::new(c.clone(), Some(vec![0.5, 0.9])).is_err());
        assert!(ClassifierOutputs::new(c.clone(), Some(vec![0.2])).is_err());
        assert!(ClassifierOutputs::new(c, Some(vec![-0.1, 0.7])).is_err());
    }

    #[test]
    fn constant_classifier_has_empty_diagram() {
        let c = random_cloud(30, 1, false).with_labels(vec![1; 30]).unwrap();
        let out = ClassifierOutputs::new(c, None).unwrap();
        assert!(boundary_diagram(&out, 1, 5.0).unwrap().pairs.is_empty());
    }

    #[test]
    fn boundary_diagram_matches_module_pipeline() {
        let c = random_cloud(50, 2, true);
        let out = ClassifierOutputs::new(c.clone(), None).unwrap();
        let pd = boundary_diagram(&out, 1, 4.0).unwrap();
        let s = crate::complex::local_scales(&c, 1).unwrap();
        let f = crate::complex::build_lslvr_filtration(&c, &s, 4.0).unwrap();
        assert_eq!(pd, compute_persistence(&f).unwrap());
    }

    #[test]
    fn validation_select_cases() {
        let c = pts(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], None);
        let a =
            ClassifierOutputs::new(c.clone().with_labels(vec![0, 0, 0]).unwrap(), None).unwrap();
        let b =
            ClassifierOutputs::new(c.clone().with_labels(vec![0, 1, 1]).unwrap(), None).unwrap();
        let q = [(0, 0), (2, 1)];
        assert_eq!(
            validation_select(&[a.clone(), b.clone()], &q).unwrap(),
            (1, 0.0)
        );
        assert_eq!(
            validation_select(std::slice::from_ref(&a), &q).unwrap(),
            (0, 0.5)
        );
        assert_eq!(validation_select(&[b.clone(), b], &q).unwrap().0, 0);
        assert!(validation_select(std::slice::from_ref(&a), &[]).is_err());
        assert!(validation_select(&[a], &[(5, 0)]).is_err());
    }

    #[test]
    fn validation_select_matches_recount() {
        let base = random_cloud(40, 3, false);
        let mut r = rng::seeded(77);
        let bank: Vec<ClassifierOutputs> = (0..6)
            .map(|_| {
                let l = (0..40)
                    .map(|_| (rng::unit(&mut r) < 0.5) as Label)
                    .collect();
                ClassifierOutputs::new(base.clone().with_labels(l).unwrap(), None).unwrap()
            })
            .collect();
        let queried: Vec<(usize, Label)> =
            (0..40).step_by(3).map(|i| (i, (i % 2) as Label)).collect();
        let mut best = (usize::MAX, usize::MAX);
        for (m, member) in bank.iter().enumerate() {
            let wrong = queried
                .iter()
                .filter(|&&(i, y)| member.labels()[i] != y)
                .count();
            if wrong < best.1 {
                best = (m, wrong);
            }
        }
        let (idx, err) = validation_select(&bank, &queried).unwrap();
        assert_eq!(idx, best.0);
        assert_eq!(err, best.1 as f64 / queried.len() as f64);
    }

    #[test]
    fn ensemble_cases() {
        let (p, l) = ensemble_average(&[0.2], &[0.6]).unwrap();
        assert!((p[0] - 0.4).abs() < 1e-15);
        assert_eq!(l, vec![0]);
        let (p, l) = ensemble_average(&[0.4], &[0.6]).unwrap();
        assert_eq!((p[0], l[0]), (0.5, 1));
        let v = [0.1, 0.7, 0.5];
        assert_eq!(ensemble_average(&v, &v).unwrap().0, v.to_vec());
        assert!(ensemble_average(&[0.1], &[0.1, 0.2]).is_err());
        assert!(ensemble_average(&[1.1], &[0.1]).is_err());
    }

    #[test]
    fn ensemble_commutes() {
        let mut r = rng::seeded(5);
        let a: Vec<f64> = (0..100).map(|_| rng::unit(&mut r)).collect();
        let b: Vec<f64> = (0..100).map(|_| rng::unit(&mut r)).collect();
        assert_eq!(
            ensemble_average(&a, &b).unwrap(),
            ensemble_average(&b, &a).unwrap()
        );
    }

    #[test]
    fn knn_cases() {
        let train = pts(&[[0.0, 0.0], [1.0, 0.0], [5.0, 0.0]], Some(vec![0, 1, 1]));
        let out = knn_predict(&train, &pts(&[[1.0, 0.0]], None), 1).unwrap();
        assert_eq!(out.labels(), &[1]);
        assert_eq!(out.probabilities.as_ref().unwrap()[0], 1.0);
        let out = knn_predict(&train, &pts(&[[0.0, 0.0], [9.0, 9.0]], None), 3).unwrap();
        assert_eq!(out.labels(), &[1, 1]);
        // vote tie goes to class 1
        let out = knn_predict(&train, &pts(&[[0.4, 0.0]], None), 2).unwrap();
        assert_eq!((out.labels()[0], out.probabilities.unwrap()[0]), (1, 0.5));
        // distance tie goes to the lower index (point 0 at distance 0.5 == point 1)
        let out = knn_predict(&train, &pts(&[[0.5, 0.0]], None), 1).unwrap();
        assert_eq!(out.labels(), &[0]);
        assert!(knn_predict(&train, &pts(&[[0.0, 0.0]], None), 4).is_err());
        let empty = LabeledPointCloud::new(2, vec![], Some(vec![])).unwrap();
        assert!(knn_predict(&empty, &pts(&[[0.0, 0.0]], None), 1).is_err());
    }

    #[test]
    fn knn_matches_full_sort_vote() {
        let train = random_cloud(60, 8, true);
        let queries = random_cloud(40, 9, false);
        for k in [1, 4, 7] {
            let out = knn_predict(&train, &queries, k).unwrap();
            assert_eq!(
                out,
                knn_predict_with(&train, &queries, k, Execution::Sequential).unwrap()
            );
            for q in 0..40 {
                let mut d: Vec<(f64, usize)> = (0..60)
                    .map(|i| (euclidean(queries.point(q), train.point(i)), i))
                    .collect();
                d.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let ones = d[..k]
                    .iter()
                    .filter(|&&(_, i)| train.labels().unwrap()[i] == 1)
                    .count();
                assert_eq!(out.labels()[q], Label::from(2 * ones >= k));
            }
        }
    }

    #[test]
    fn prediction_csv_round_trip() {
        let train = random_cloud(20, 4, true);
        let out = knn_predict(&train, &random_cloud(10, 5, false), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pred.csv");
        out.save_csv(&p).unwrap();
        assert_eq!(ClassifierOutputs::load_csv(&p, 2).unwrap(), out);
        std::fs::write(&p, "0.5,0.5,1\n0.1,0.2,0\n").unwrap();
        let hard = ClassifierOutputs::load_csv(&p, 2).unwrap();
        assert_eq!(hard.labels(), &[1, 0]);
        assert!(hard.probabilities.is_none());
    }
}
