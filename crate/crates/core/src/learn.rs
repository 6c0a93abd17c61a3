//! Nearest-mean classifiers: extrinsic subspace means on the Grassmannian for
//! FAT, arithmetic class means in Euclidean space for the coherent baselines.

use std::io::Write;

use num_complex::Complex;
use serde::Serialize;
use thiserror::Error;

use crate::csvfmt;
use crate::grassmann::{extrinsic_mean, procrustes_distance_sq, GrassmannError, GrassmannPoint};
use crate::links::{ReceivedEuclideanSample, ReceivedGrassmannSample};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("class {class} has no training samples")]
    EmptyClass { class: usize },
    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Outcome of classifying one input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub class: usize,
    /// Distance to the chosen class mean (squared Procrustes or squared
    /// Euclidean).
    pub metric: f64,
}

pub trait Classifier<X: ?Sized> {
    fn num_classes(&self) -> usize;
    fn decide(&self, input: &X) -> Result<Decision, LearnError>;
}

/// A received sample with its delivered label.
pub trait Labeled {
    type Input: ?Sized;
    fn input(&self) -> &Self::Input;
    fn label(&self) -> usize;
}

impl<T: Real> Labeled for ReceivedGrassmannSample<T> {
    type Input = GrassmannPoint<T>;
    fn input(&self) -> &GrassmannPoint<T> {
        &self.point
    }
    fn label(&self) -> usize {
        self.label
    }
}

impl<T: Real> Labeled for ReceivedEuclideanSample<T> {
    type Input = [Complex<T>];
    fn input(&self) -> &[Complex<T>] {
        &self.values
    }
    fn label(&self) -> usize {
        self.label
    }
}

/// Strict `<` keeps the first minimum, so ties go to the lowest class.
fn argmin(dists: impl IntoIterator<Item = f64>) -> Decision {
    let mut best = Decision {
        class: 0,
        metric: f64::INFINITY,
    };
    for (k, d) in dists.into_iter().enumerate() {
        if d < best.metric || k == 0 {
            best = Decision { class: k, metric: d };
        }
    }
    best
}

/// Groups training items by label, failing on out-of-range labels and on
/// classes without samples.
fn group_by_class<S: Labeled>(train: &[S], num_classes: usize) -> Result<Vec<Vec<&S>>, LearnError> {
    if num_classes == 0 {
        return Err(LearnError::Empty("class set"));
    }
    let mut groups: Vec<Vec<&S>> = vec![Vec::new(); num_classes];
    for s in train {
        let label = s.label();
        groups
            .get_mut(label)
            .ok_or(LearnError::LabelOutOfRange { label, num_classes })?
            .push(s);
    }
    if let Some(class) = groups.iter().position(Vec::is_empty) {
        return Err(LearnError::EmptyClass { class });
    }
    Ok(groups)
}

#[derive(Debug, Clone)]
pub struct GrassmannClassifier<T: Real> {
    class_means: Vec<GrassmannPoint<T>>,
}

impl<T: Real> GrassmannClassifier<T> {
    /// Classifier from explicit means, which must share one shape.
    pub fn from_means(class_means: Vec<GrassmannPoint<T>>) -> Result<Self, LearnError> {
        let first = class_means.first().ok_or(LearnError::Empty("class set"))?;
        let shape = first.basis().shape();
        if class_means.iter().any(|m| m.basis().shape() != shape) {
            return Err(LearnError::Shape("class means differ in shape".into()));
        }
        Ok(Self { class_means })
    }

    pub fn class_means(&self) -> &[GrassmannPoint<T>] {
        &self.class_means
    }

    /// `(T, m)` of the points this classifier accepts.
    pub fn point_shape(&self) -> (usize, usize) {
        let m = &self.class_means[0];
        (m.ambient_dim(), m.subspace_dim())
    }
}

impl<T: Real> Classifier<GrassmannPoint<T>> for GrassmannClassifier<T> {
    fn num_classes(&self) -> usize {
        self.class_means.len()
    }

    fn decide(&self, point: &GrassmannPoint<T>) -> Result<Decision, LearnError> {
        let want = self.point_shape();
        if (point.ambient_dim(), point.subspace_dim()) != want {
            return Err(LearnError::Shape(format!(
                "point in G({}, {}), classifier expects G({}, {})",
                point.ambient_dim(),
                point.subspace_dim(),
                want.0,
                want.1
            )));
        }
        let dists = self
            .class_means
            .iter()
            .map(|m| procrustes_distance_sq(point, m).map(|d| d.as_f64()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(argmin(dists))
    }
}

/// Extrinsic mean of each class's received points.
pub fn train_grassmann<T: Real>(
    train: &[ReceivedGrassmannSample<T>],
    num_classes: usize,
) -> Result<GrassmannClassifier<T>, LearnError> {
    let groups = group_by_class(train, num_classes)?;
    let means = groups
        .into_iter()
        .map(|g| {
            let pts: Vec<GrassmannPoint<T>> = g.into_iter().map(|s| s.point.clone()).collect();
            extrinsic_mean(&pts)
        })
        .collect::<Result<Vec<_>, _>>()?;
    GrassmannClassifier::from_means(means)
}

/// Nearest extrinsic mean by squared Procrustes distance.
pub fn classify_grassmann<T: Real>(clf: &GrassmannClassifier<T>, point: &GrassmannPoint<T>) -> Result<usize, LearnError> {
    Ok(clf.decide(point)?.class)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanClassifier<T> {
    class_means: Vec<Vec<Complex<T>>>,
}

impl<T: Real> EuclideanClassifier<T> {
    pub fn from_means(class_means: Vec<Vec<Complex<T>>>) -> Result<Self, LearnError> {
        let first = class_means.first().ok_or(LearnError::Empty("class set"))?;
        if first.is_empty() {
            return Err(LearnError::Empty("class mean"));
        }
        if class_means.iter().any(|m| m.len() != first.len()) {
            return Err(LearnError::Shape("class means differ in length".into()));
        }
        Ok(Self { class_means })
    }

    pub fn class_means(&self) -> &[Vec<Complex<T>>] {
        &self.class_means
    }

    pub fn dim(&self) -> usize {
        self.class_means[0].len()
    }
}

impl<T: Real> Classifier<[Complex<T>]> for EuclideanClassifier<T> {
    fn num_classes(&self) -> usize {
        self.class_means.len()
    }

    fn decide(&self, values: &[Complex<T>]) -> Result<Decision, LearnError> {
        if values.len() != self.dim() {
            return Err(LearnError::Shape(format!(
                "input has {} values, classifier expects {}",
                values.len(),
                self.dim()
            )));
        }
        Ok(argmin(self.class_means.iter().map(|m| {
            m.iter()
                .zip(values)
                .fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_sqr())
                .as_f64()
        })))
    }
}

/// Per-class arithmetic mean of the received vectors.
pub fn train_euclidean<T: Real>(
    train: &[ReceivedEuclideanSample<T>],
    num_classes: usize,
) -> Result<EuclideanClassifier<T>, LearnError> {
    let groups = group_by_class(train, num_classes)?;
    let dim = groups[0][0].values.len();
    let means = groups
        .into_iter()
        .map(|g| {
            let mut acc = vec![Complex::new(T::zero(), T::zero()); dim];
            for s in &g {
                if s.values.len() != dim {
                    return Err(LearnError::Shape(format!(
                        "training vector has {} values, expected {dim}",
                        s.values.len()
                    )));
                }
                for (a, v) in acc.iter_mut().zip(&s.values) {
                    *a += v;
                }
            }
            let n = T::lit(g.len() as f64);
            Ok(acc.into_iter().map(|a| a.unscale(n)).collect())
        })
        .collect::<Result<Vec<_>, _>>()?;
    EuclideanClassifier::from_means(means)
}

/// Nearest class mean by squared Euclidean distance.
pub fn classify_euclidean<T: Real>(clf: &EuclideanClassifier<T>, values: &[Complex<T>]) -> Result<usize, LearnError> {
    Ok(clf.decide(values)?.class)
}

/// One row of the per-sample decision export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecisionRecord {
    pub sample_id: usize,
    pub true_label: usize,
    pub predicted_label: usize,
    pub decision_metric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub error_rate: f64,
    pub n_test: usize,
    pub per_class_errors: Vec<usize>,
    /// 95% normal-approximation half-width, `1.96 sqrt(e (1 - e) / n)`.
    pub confidence_halfwidth: f64,
}

/// `1.96 sqrt(e (1 - e) / n)`.
pub fn halfwidth(error_rate: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    1.96 * (error_rate * (1.0 - error_rate) / n as f64).sqrt()
}

impl EvalReport {
    pub fn from_decisions(records: &[DecisionRecord], num_classes: usize) -> Result<Self, LearnError> {
        if records.is_empty() {
            return Err(LearnError::Empty("test set"));
        }
        let mut per_class_errors = vec![0; num_classes];
        for r in records {
            if r.true_label >= num_classes {
                return Err(LearnError::LabelOutOfRange {
                    label: r.true_label,
                    num_classes,
                });
            }
            if r.predicted_label != r.true_label {
                per_class_errors[r.true_label] += 1;
            }
        }
        let n_test = records.len();
        let error_rate = per_class_errors.iter().sum::<usize>() as f64 / n_test as f64;
        Ok(Self {
            error_rate,
            n_test,
            per_class_errors,
            confidence_halfwidth: halfwidth(error_rate, n_test),
        })
    }

    pub fn errors(&self) -> usize {
        self.per_class_errors.iter().sum()
    }
}

/// Classifies every test sample in order.
pub fn decisions<C, S>(clf: &C, test: &[S]) -> Result<Vec<DecisionRecord>, LearnError>
where
    S: Labeled,
    C: Classifier<S::Input> + ?Sized,
{
    test.iter()
        .enumerate()
        .map(|(i, s)| {
            let d = clf.decide(s.input())?;
            Ok(DecisionRecord {
                sample_id: i,
                true_label: s.label(),
                predicted_label: d.class,
                decision_metric: d.metric,
            })
        })
        .collect()
}

pub fn evaluate<C, S>(clf: &C, test: &[S]) -> Result<EvalReport, LearnError>
where
    S: Labeled,
    C: Classifier<S::Input> + ?Sized,
{
    EvalReport::from_decisions(&decisions(clf, test)?, clf.num_classes())
}

/// Writes `sample_id,true_label,predicted_label,decision_metric` rows.
pub fn write_decisions_csv<W: Write>(records: &[DecisionRecord], writer: W) -> Result<(), LearnError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(["sample_id", "true_label", "predicted_label", "decision_metric"])?;
    for r in records {
        w.write_record([
            r.sample_id.to_string(),
            r.true_label.to_string(),
            r.predicted_label.to_string(),
            csvfmt::float(r.decision_metric),
        ])?;
    }
    w.flush()?;
    Ok(())
}
