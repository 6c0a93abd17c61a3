//! Mixture-of-Gaussians source data.
//!
//! A sample of class `m` is `s = mu_m + z` where `z` has i.i.d. CN(0, sigma_s^2)
//! entries. Class means are either supplied explicitly or drawn as standard
//! complex Gaussian vectors rescaled to `||mu_m||^2 = sigma_s^2 * 10^(ratio_db / 10)`.

use std::io::{Read, Write};

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::csvfmt;
use crate::scalar::{complex_normal, db_to_linear, Real};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid MoG configuration: {0}")]
    Config(String),
    #[error("requested an empty dataset")]
    Empty,
    #[error("class means have not been generated or supplied")]
    MissingMeans,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed dataset csv at record {record}: {reason}")]
    Malformed { record: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoGConfig<T> {
    pub num_classes: usize,
    pub sample_dim: usize,
    /// One mean per class; empty until generated or supplied.
    pub class_means: Vec<Vec<Complex<T>>>,
    /// Per-complex-element variance of the deviation vector.
    pub deviation_variance: T,
    /// `||mu_m||^2 / sigma_s^2` in dB, used when means are auto-generated.
    pub parametric_ratio_db: T,
}

impl<T: Real> MoGConfig<T> {
    pub fn new(num_classes: usize, sample_dim: usize, deviation_variance: T, parametric_ratio_db: T) -> Self {
        Self {
            num_classes,
            sample_dim,
            class_means: Vec::new(),
            deviation_variance,
            parametric_ratio_db,
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.num_classes < 2 {
            return Err(DataError::Config(format!("need at least 2 classes, got {}", self.num_classes)));
        }
        if self.sample_dim < 1 {
            return Err(DataError::Config("sample dimension must be positive".into()));
        }
        if !(self.deviation_variance >= T::zero()) {
            return Err(DataError::Config("deviation variance must be non-negative".into()));
        }
        if !self.class_means.is_empty() {
            if self.class_means.len() != self.num_classes {
                return Err(DataError::Config(format!(
                    "{} class means supplied for {} classes",
                    self.class_means.len(),
                    self.num_classes
                )));
            }
            if let Some(bad) = self.class_means.iter().position(|m| m.len() != self.sample_dim) {
                return Err(DataError::Config(format!("mean {bad} does not have length {}", self.sample_dim)));
            }
        }
        Ok(())
    }

    /// Target `||mu_m||^2` for auto-generated means.
    pub fn target_mean_energy(&self) -> T {
        self.deviation_variance * db_to_linear(self.parametric_ratio_db)
    }

    /// Average energy per complex element of a sample, `E|s_l|^2`, over classes
    /// and deviation.
    pub fn per_element_power(&self) -> T {
        let mean_energy = if self.class_means.is_empty() {
            self.target_mean_energy()
        } else {
            let total = self
                .class_means
                .iter()
                .flat_map(|m| m.iter())
                .fold(T::zero(), |acc, c| acc + c.norm_sqr());
            total / T::lit(self.num_classes as f64)
        };
        mean_energy / T::lit(self.sample_dim as f64) + self.deviation_variance
    }

    /// Standard deviation of one real dimension (I or Q) of a sample element.
    pub fn per_dimension_std(&self) -> T {
        (self.per_element_power() / T::lit(2.0)).sqrt()
    }

    /// Returns a copy of the config with auto-generated means, unless means
    /// were already supplied.
    pub fn with_means(&self, seed: u64) -> Result<Self, DataError> {
        let mut cfg = self.clone();
        if cfg.class_means.is_empty() {
            cfg.class_means = generate_means(self, seed)?;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSample<T> {
    pub values: Vec<Complex<T>>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub samples: Vec<DataSample<T>>,
    pub config: MoGConfig<T>,
}

impl<T> Dataset<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Draws `M` class means with i.i.d. CN(0, 1) entries, each rescaled to the
/// energy implied by the parametric ratio.
pub fn generate_means<T: Real>(config: &MoGConfig<T>, seed: u64) -> Result<Vec<Vec<Complex<T>>>, DataError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = config.target_mean_energy();
    let means = (0..config.num_classes)
        .map(|_| {
            let mut mu: Vec<Complex<T>> = (0..config.sample_dim).map(|_| complex_normal(&mut rng, T::one())).collect();
            let energy = mu.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr());
            let scale = (target / energy).sqrt();
            mu.iter_mut().for_each(|c| *c = c.scale(scale));
            mu
        })
        .collect();
    Ok(means)
}

/// Draws `n` labelled samples. Labels cycle round-robin over the classes so
/// every class gets `n / M` or `n / M + 1` samples.
pub fn sample_dataset<T: Real>(config: &MoGConfig<T>, n: usize, seed: u64) -> Result<Dataset<T>, DataError> {
    config.validate()?;
    if n == 0 {
        return Err(DataError::Empty);
    }
    if config.class_means.is_empty() {
        return Err(DataError::MissingMeans);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|i| {
            let label = i % config.num_classes;
            let values = config.class_means[label]
                .iter()
                .map(|mu| mu + complex_normal(&mut rng, config.deviation_variance))
                .collect();
            DataSample { values, label }
        })
        .collect();
    Ok(Dataset {
        samples,
        config: config.clone(),
    })
}

/// Writes `label, re_0, im_0, ..., re_{L-1}, im_{L-1}` rows with a header.
pub fn write_dataset_csv<T: Real, W: Write>(dataset: &Dataset<T>, writer: W) -> Result<(), DataError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let dim = dataset.config.sample_dim;
    let mut header = vec!["label".to_string()];
    for l in 0..dim {
        header.push(format!("re_{l}"));
        header.push(format!("im_{l}"));
    }
    w.write_record(&header)?;
    for s in &dataset.samples {
        let mut row = Vec::with_capacity(1 + 2 * dim);
        row.push(s.label.to_string());
        for c in &s.values {
            row.push(csvfmt::float(c.re.as_f64()));
            row.push(csvfmt::float(c.im.as_f64()));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a dataset written by [`write_dataset_csv`]; the config supplies `M`
/// and `L` and is attached to the result.
pub fn read_dataset_csv<T: Real, R: Read>(reader: R, config: &MoGConfig<T>) -> Result<Dataset<T>, DataError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut samples = Vec::new();
    for (record_idx, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |reason: String| DataError::Malformed {
            record: record_idx,
            reason,
        };
        if rec.len() != 1 + 2 * config.sample_dim {
            return Err(bad(format!("expected {} fields, got {}", 1 + 2 * config.sample_dim, rec.len())));
        }
        let label: usize = rec[0].trim().parse().map_err(|_| bad(format!("bad label {:?}", &rec[0])))?;
        if label >= config.num_classes {
            return Err(bad(format!("label {label} out of range")));
        }
        let mut values = Vec::with_capacity(config.sample_dim);
        for l in 0..config.sample_dim {
            let re = csvfmt::parse_float(&rec[1 + 2 * l]).ok_or_else(|| bad(format!("bad re_{l}")))?;
            let im = csvfmt::parse_float(&rec[2 + 2 * l]).ok_or_else(|| bad(format!("bad im_{l}")))?;
            values.push(Complex::new(T::lit(re), T::lit(im)));
        }
        samples.push(DataSample { values, label });
    }
    Ok(Dataset {
        samples,
        config: config.clone(),
    })
}
