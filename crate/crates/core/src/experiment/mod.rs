//! Seeded Monte-Carlo sweeps over Doppler or SNR.
//!
//! One sweep cell is a `(scheme, value)` pair. Each trial of a cell draws a
//! fresh train/test dataset, pushes both through the scheme's link, trains
//! the matching nearest-mean classifier and counts test errors. Trials are
//! independent jobs on the rayon pool; results are merged by exact integer
//! counts and emitted in canonical order (scheme, then value), so output
//! does not depend on scheduling.

mod config;
mod output;
pub mod seeds;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub use config::{
    ChannelSection, ExperimentConfig, FrameSection, MogSection, SweepSection, SweepVariable, PAPER_DEFAULTS,
    PAPER_DEFAULTS_TOML, SEED_ENV,
};
pub use output::{emit_csv, parse_csv, read_csv, write_csv, CSV_HEADER};

use crate::fading::ChannelConfig;
use crate::grassmann::GrassmannError;
use crate::learn::{evaluate, train_euclidean, train_grassmann, LearnError};
use crate::links::{overhead_for_target, CoherentLink, FatLink, FrameConfig, LinkError, Scheme, SlotCount, SourceStats};
use crate::mog::{sample_dataset, DataSample, MoGConfig};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed result file, record {record}: {reason}")]
    Malformed { record: usize, reason: String },
}

/// Aggregated statistics of a successful cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RowStats {
    pub error_rate: f64,
    pub halfwidth: f64,
    pub overhead_fraction: f64,
    pub slots_per_sample: usize,
    /// Test decisions pooled over all trials.
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub variable: SweepVariable,
    pub value: f64,
    pub trials: usize,
    /// Failure message if any trial (or the overhead search) failed.
    pub stats: Result<RowStats, String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(|r| r.stats.is_err())
    }

    pub fn row(&self, scheme: Scheme, value: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.scheme == scheme && r.value == value)
    }

    fn sort(&mut self) {
        self.rows
            .sort_by(|a, b| a.scheme.cmp(&b.scheme).then(a.value.total_cmp(&b.value)));
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub errors: usize,
    pub n_test: usize,
    pub slots: SlotCount,
    /// Samples dropped because their data matrix was rank deficient.
    pub dropped: usize,
}

/// Per-trial datasets: `(train, test, source model)`.
fn trial_data(
    cfg: &ExperimentConfig,
    trial: usize,
) -> Result<(Vec<DataSample<f64>>, Vec<DataSample<f64>>, MoGConfig<f64>), String> {
    let seed = seeds::data_seed(cfg.base_seed, trial);
    let mog = cfg
        .mog_config()
        .with_means(seeds::stable_hash(&[seed, 0]))
        .map_err(|e| e.to_string())?;
    let train = sample_dataset(&mog, cfg.n_train, seeds::stable_hash(&[seed, 1])).map_err(|e| e.to_string())?;
    let test = sample_dataset(&mog, cfg.n_test, seeds::stable_hash(&[seed, 2])).map_err(|e| e.to_string())?;
    Ok((train.samples, test.samples, mog))
}

/// Acquires every sample through `acquire`, dropping rank-deficient ones.
fn acquire_all<S>(
    samples: &[DataSample<f64>],
    mut acquire: impl FnMut(&DataSample<f64>) -> Result<S, LinkError>,
    dropped: &mut usize,
) -> Result<Vec<S>, String> {
    let mut out = Vec::with_capacity(samples.len());
    for s in samples {
        match acquire(s) {
            Ok(r) => out.push(r),
            Err(LinkError::Grassmann(GrassmannError::DegenerateSample { sigma_min, sigma_max })) => {
                warn!("dropping rank-deficient sample (sigma_min {sigma_min:e}, sigma_max {sigma_max:e})");
                *dropped += 1;
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(out)
}

/// Runs one trial of `scheme` over `channel` with the given frame, drawing
/// link randomness from `link_seed`.
pub fn run_trial(
    cfg: &ExperimentConfig,
    scheme: Scheme,
    channel: &ChannelConfig<f64>,
    frame: &FrameConfig,
    trial: usize,
    link_seed: u64,
) -> Result<TrialOutcome, String> {
    let (train, test, mog) = trial_data(cfg, trial)?;
    let mut rng = ChaCha8Rng::seed_from_u64(link_seed);
    let num_classes = mog.num_classes;
    let mut dropped = 0;
    let learn_err = |e: LearnError| e.to_string();
    let (report, slots) = if scheme.is_coherent() {
        let link = CoherentLink::new(*frame, *channel, SourceStats::from_mog(&mog), mog.sample_dim)
            .map_err(|e| e.to_string())?;
        let rx_train = acquire_all(&train, |s| link.acquire(s, &mut rng), &mut dropped)?;
        let clf = train_euclidean(&rx_train, num_classes).map_err(learn_err)?;
        let rx_test = acquire_all(&test, |s| link.acquire(s, &mut rng), &mut dropped)?;
        (evaluate(&clf, &rx_test).map_err(learn_err)?, link.slots_per_sample())
    } else {
        let link = FatLink::new(*channel, mog.sample_dim).map_err(|e| e.to_string())?;
        let rx_train = acquire_all(&train, |s| link.acquire(s, &mut rng), &mut dropped)?;
        let clf = train_grassmann(&rx_train, num_classes).map_err(learn_err)?;
        let rx_test = acquire_all(&test, |s| link.acquire(s, &mut rng), &mut dropped)?;
        (evaluate(&clf, &rx_test).map_err(learn_err)?, link.slots_per_sample())
    };
    Ok(TrialOutcome {
        errors: report.errors(),
        n_test: report.n_test,
        slots,
        dropped,
    })
}

/// Pools trial outcomes into row statistics.
fn pool(outcomes: &[Result<TrialOutcome, String>], overhead: f64) -> Result<RowStats, String> {
    let mut errors = 0;
    let mut n = 0;
    let mut slots = 0;
    for (t, o) in outcomes.iter().enumerate() {
        let o = o.as_ref().map_err(|e| format!("trial {t}: {e}"))?;
        errors += o.errors;
        n += o.n_test;
        slots = o.slots.total();
    }
    let error_rate = errors as f64 / n as f64;
    Ok(RowStats {
        error_rate,
        halfwidth: crate::learn::halfwidth(error_rate, n),
        overhead_fraction: overhead,
        slots_per_sample: slots,
        n_test: n,
    })
}

/// Classification error for every `(scheme, value)` cell.
pub fn run_error_sweep(cfg: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    cfg.validate()?;
    let values = &cfg.sweep.values;
    let jobs: Vec<(Scheme, usize, usize)> = cfg
        .schemes
        .iter()
        .flat_map(|&s| (0..values.len()).flat_map(move |v| (0..cfg.trials).map(move |t| (s, v, t))))
        .collect();
    let outcomes: Vec<Result<TrialOutcome, String>> = jobs
        .par_iter()
        .map(|&(scheme, v, trial)| {
            let channel = cfg.channel_at(values[v]);
            let seed = seeds::cell_seed(cfg.base_seed, scheme, v, trial);
            run_trial(cfg, scheme, &channel, &cfg.frame_for(scheme), trial, seed)
        })
        .collect();

    let mut result = SweepResult::default();
    for (chunk, &(scheme, v, _)) in outcomes.chunks(cfg.trials).zip(jobs.iter().step_by(cfg.trials)) {
        let stats = pool(chunk, cfg.frame_for(scheme).overhead());
        match &stats {
            Ok(s) => info!("{scheme} {}={}: error {:.5} +- {:.5}", cfg.sweep.variable.id(), values[v], s.error_rate, s.halfwidth),
            Err(e) => warn!("{scheme} {}={}: failed: {e}", cfg.sweep.variable.id(), values[v]),
        }
        result.rows.push(SweepRow {
            scheme,
            variable: cfg.sweep.variable,
            value: values[v],
            trials: cfg.trials,
            stats,
        });
    }
    result.sort();
    Ok(result)
}

/// Mean error over `cfg.trials` trials of `scheme` with the given frame,
/// using the overhead-search seed stream (shared across Doppler values and
/// frame lengths). Returns the pooled statistics.
pub fn overhead_probe(
    cfg: &ExperimentConfig,
    scheme: Scheme,
    channel: &ChannelConfig<f64>,
    frame: &FrameConfig,
) -> Result<RowStats, String> {
    let outcomes: Vec<_> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, scheme, channel, frame, t, seeds::overhead_seed(cfg.base_seed, scheme, t)))
        .collect();
    pool(&outcomes, frame.overhead())
}

/// Training overhead needed to reach `target_error` at every Doppler value.
pub fn run_overhead_sweep(cfg: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    cfg.validate()?;
    if cfg.sweep.variable != SweepVariable::Doppler {
        return Err(ExperimentError::Config("the overhead sweep runs over doppler".into()));
    }
    let values = &cfg.sweep.values;
    let cells: Vec<(Scheme, usize)> = cfg
        .schemes
        .iter()
        .flat_map(|&s| (0..values.len()).map(move |v| (s, v)))
        .collect();
    let mut result = SweepResult {
        rows: cells
            .par_iter()
            .map(|&(scheme, v)| {
                let channel = cfg.channel_at(values[v]);
                let mut probed = std::collections::HashMap::new();
                let search = overhead_for_target(
                    scheme,
                    &channel,
                    cfg.target_error,
                    cfg.max_search_data_slots(scheme),
                    |frame| {
                        let stats = overhead_probe(cfg, scheme, &channel, frame).map_err(LinkError::Evaluation)?;
                        let e = stats.error_rate;
                        info!("{scheme} doppler={}: D={} error {e:.5}", values[v], frame.data_slots_per_frame);
                        probed.insert(frame.data_slots_per_frame, stats);
                        Ok(e)
                    },
                );
                let stats = search.map_err(|e| e.to_string()).map(|s| {
                    let stats = probed.remove(&s.frame.data_slots_per_frame).expect("chosen frame was probed");
                    RowStats {
                        overhead_fraction: s.overhead,
                        ..stats
                    }
                });
                if let Err(e) = &stats {
                    warn!("{scheme} doppler={}: {e}", values[v]);
                }
                SweepRow {
                    scheme,
                    variable: SweepVariable::Doppler,
                    value: values[v],
                    trials: cfg.trials,
                    stats,
                }
            })
            .collect(),
    };
    result.sort();
    Ok(result)
}
