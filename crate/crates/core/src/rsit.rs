//! Repeat and shift invariance test: a max-loss search over seeded
//! repeat/translate augmentations of every sample, for any predictor.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nets::{forward_polymer, ModelConfig, NetError, ReferenceModel};
use crate::polymer::Strategy;
use crate::psmiles::{parse, random_augment, SmilesError};
use crate::rng::trial_seed;

#[derive(Debug, Error)]
pub enum PredictError {
    #[error(transparent)]
    Smiles(#[from] SmilesError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("{0}")]
    Other(String),
}

/// A deterministic map from P-SMILES to a real prediction.
pub trait Predictor: Sync {
    /// Strategy or model name used in reports.
    fn name(&self) -> String;
    fn seed(&self) -> Option<u64> {
        None
    }
    fn predict(&self, psmiles: &str) -> Result<f64, PredictError>;
}

/// A [`ReferenceModel`] forward pass as a predictor.
#[derive(Debug, Clone)]
pub struct ReferencePredictor {
    pub model: ReferenceModel,
}

impl Predictor for ReferencePredictor {
    fn name(&self) -> String {
        self.model.config.strategy.name().to_string()
    }

    fn seed(&self) -> Option<u64> {
        self.model.seed.as_ref().map(|d| d.seed)
    }

    fn predict(&self, psmiles: &str) -> Result<f64, PredictError> {
        Ok(forward_polymer(&self.model, &parse(psmiles)?, None)?.y_hat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Squared,
    Absolute,
}

impl Loss {
    pub fn eval(self, prediction: f64, label: f64) -> f64 {
        match self {
            Loss::Squared => (prediction - label).powi(2),
            Loss::Absolute => (prediction - label).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    R2,
    Rmse,
}

impl Metric {
    pub fn eval(self, labels: &[f64], predictions: &[f64]) -> f64 {
        match self {
            Metric::R2 => r2(labels, predictions),
            Metric::Rmse => rmse(labels, predictions),
        }
    }

    /// Performance drop from `clean` to `attacked`, positive when the
    /// attack hurts.
    pub fn gap(self, clean: f64, attacked: f64) -> f64 {
        match self {
            Metric::R2 => clean - attacked,
            Metric::Rmse => attacked - clean,
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Metric, String> {
        match s {
            "r2" => Ok(Metric::R2),
            "rmse" => Ok(Metric::Rmse),
            _ => Err(format!("unknown metric {s:?} (expected r2 or rmse)")),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::R2 => "r2",
            Metric::Rmse => "rmse",
        })
    }
}

/// Coefficient of determination. Zero when the labels are constant or
/// there are no samples.
pub fn r2(labels: &[f64], predictions: &[f64]) -> f64 {
    assert_eq!(labels.len(), predictions.len());
    if labels.is_empty() {
        return 0.0;
    }
    let mean = labels.iter().sum::<f64>() / labels.len() as f64;
    let sst: f64 = labels.iter().map(|y| (y - mean).powi(2)).sum();
    if sst == 0.0 {
        return 0.0;
    }
    let sse: f64 = labels.iter().zip(predictions).map(|(y, p)| (y - p).powi(2)).sum();
    1.0 - sse / sst
}

pub fn rmse(labels: &[f64], predictions: &[f64]) -> f64 {
    assert_eq!(labels.len(), predictions.len());
    if labels.is_empty() {
        return 0.0;
    }
    let sse: f64 = labels.iter().zip(predictions).map(|(y, p)| (y - p).powi(2)).sum();
    (sse / labels.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RsitConfig {
    /// Augmentation trials per sample; zero reduces to clean evaluation.
    pub trials: usize,
    pub seed: u64,
    pub loss: Loss,
    pub metric: Metric,
}

impl Default for RsitConfig {
    fn default() -> RsitConfig {
        RsitConfig {
            trials: 5,
            seed: 0,
            loss: Loss::Squared,
            metric: Metric::R2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResult {
    pub index: usize,
    pub psmiles: String,
    pub label: f64,
    pub base_prediction: f64,
    pub base_loss: f64,
    /// Largest loss seen, starting from the unaugmented loss.
    pub adv_loss: f64,
    pub adv_predict: f64,
    /// Input that produced `adv_loss` (the source itself when no trial
    /// beat it).
    pub adv_psmiles: String,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleFailure {
    pub index: usize,
    pub psmiles: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RsitReport {
    pub predictor: String,
    pub model_seed: Option<u64>,
    pub metric: Metric,
    pub loss: Loss,
    pub trials: usize,
    pub seed: u64,
    pub samples: Vec<SampleResult>,
    pub failures: Vec<SampleFailure>,
    pub clean_metric: f64,
    pub adv_metric: f64,
    pub rsit_gap: f64,
    /// Largest `|adv_predict - base_prediction|` over the samples.
    pub max_prediction_shift: f64,
}

impl RsitReport {
    pub fn to_text(&self) -> String {
        format!(
            "predictor   {}\nsamples     {} ({} failed)\ntrials      {}\n{:<11} clean {:.6}  rsit {:.6}  gap {:.6}\nmax shift   {:.3e}\n",
            self.predictor,
            self.samples.len(),
            self.failures.len(),
            self.trials,
            self.metric,
            self.clean_metric,
            self.adv_metric,
            self.rsit_gap,
            self.max_prediction_shift,
        )
    }
}

fn run_sample(
    m: &dyn Predictor,
    index: usize,
    psmiles: &str,
    label: f64,
    cfg: &RsitConfig,
) -> Result<SampleResult, PredictError> {
    let base = m.predict(psmiles)?;
    let base_loss = cfg.loss.eval(base, label);
    let mut best = (base_loss, base, psmiles.to_string());
    for t in 0..cfg.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, index as u64, t as u64));
        let aug = random_augment(psmiles, &mut rng)?;
        let p = m.predict(&aug)?;
        let loss = cfg.loss.eval(p, label);
        if loss > best.0 {
            best = (loss, p, aug);
        }
    }
    Ok(SampleResult {
        index,
        psmiles: psmiles.to_string(),
        label,
        base_prediction: base,
        base_loss,
        adv_loss: best.0,
        adv_predict: best.1,
        adv_psmiles: best.2,
        trials: cfg.trials,
    })
}

/// Runs the test over `samples` (`(psmiles, label)`). Samples whose
/// prediction or augmentation fails are listed in `failures` and left out
/// of both metrics.
///
/// ```
/// use polyseq::rsit::{rsit, Predictor, PredictError, RsitConfig};
/// struct Len;
/// impl Predictor for Len {
///     fn name(&self) -> String { "len".into() }
///     fn predict(&self, s: &str) -> Result<f64, PredictError> { Ok(s.len() as f64) }
/// }
/// let data = vec![("*CONO*".to_string(), 6.0), ("*CC(C)*".to_string(), 7.0)];
/// let report = rsit(&Len, &data, &RsitConfig::default());
/// assert!(report.rsit_gap >= 0.0);
/// ```
pub fn rsit(m: &dyn Predictor, samples: &[(String, f64)], cfg: &RsitConfig) -> RsitReport {
    let outcomes: Vec<Result<SampleResult, SampleFailure>> = samples
        .par_iter()
        .enumerate()
        .map(|(i, (s, y))| {
            run_sample(m, i, s, *y, cfg).map_err(|e| SampleFailure {
                index: i,
                psmiles: s.clone(),
                error: e.to_string(),
            })
        })
        .collect();
    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => ok.push(r),
            Err(f) => failures.push(f),
        }
    }
    let labels: Vec<f64> = ok.iter().map(|r| r.label).collect();
    let base: Vec<f64> = ok.iter().map(|r| r.base_prediction).collect();
    let adv: Vec<f64> = ok.iter().map(|r| r.adv_predict).collect();
    let clean_metric = cfg.metric.eval(&labels, &base);
    let adv_metric = cfg.metric.eval(&labels, &adv);
    RsitReport {
        predictor: m.name(),
        model_seed: m.seed(),
        metric: cfg.metric,
        loss: cfg.loss,
        trials: cfg.trials,
        seed: cfg.seed,
        max_prediction_shift: ok
            .iter()
            .map(|r| (r.adv_predict - r.base_prediction).abs())
            .fold(0.0, f64::max),
        samples: ok,
        failures,
        clean_metric,
        adv_metric,
        rsit_gap: cfg.metric.gap(clean_metric, adv_metric),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyRow {
    pub strategy: String,
    pub clean: f64,
    pub rsit: f64,
    pub gap: f64,
    pub max_prediction_shift: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyTable {
    pub metric: Metric,
    pub trials: usize,
    pub model_seed: u64,
    pub rows: Vec<StrategyRow>,
}

impl StrategyTable {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:<12} {:>12} {:>12} {:>10}\n",
            "strategy",
            format!("clean {}", self.metric),
            format!("rsit {}", self.metric),
            "gap"
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:<12} {:>12.6} {:>12.6} {:>10.6}\n",
                r.strategy, r.clean, r.rsit, r.gap
            ));
        }
        s
    }
}

/// One reference predictor per strategy, all generated from `model_seed`
/// with `base` otherwise unchanged, each run through [`rsit`].
pub fn compare_strategies(
    samples: &[(String, f64)],
    cfg: &RsitConfig,
    base: &ModelConfig,
    model_seed: u64,
) -> StrategyTable {
    let rows = Strategy::ALL
        .iter()
        .map(|&strategy| {
            let model = ReferenceModel::generate(
                ModelConfig {
                    strategy,
                    ..base.clone()
                },
                model_seed,
            );
            let r = rsit(&ReferencePredictor { model }, samples, cfg);
            StrategyRow {
                strategy: strategy.name().to_string(),
                clean: r.clean_metric,
                rsit: r.adv_metric,
                gap: r.rsit_gap,
                max_prediction_shift: r.max_prediction_shift,
                failures: r.failures.len(),
            }
        })
        .collect();
    StrategyTable {
        metric: cfg.metric,
        trials: cfg.trials,
        model_seed,
        rows,
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset: {0}")]
    Csv(#[from] csv::Error),
    #[error("dataset header must be `psmiles,value`, found {0:?}")]
    Header(String),
}

#[derive(Deserialize)]
struct Row {
    psmiles: String,
    value: f64,
}

/// Reads a `psmiles,value` CSV.
pub fn read_dataset<R: Read>(reader: R) -> Result<Vec<(String, f64)>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 2 || &header[0] != "psmiles" || &header[1] != "value" {
        return Err(DatasetError::Header(header.iter().collect::<Vec<_>>().join(",")));
    }
    rdr.deserialize::<Row>()
        .map(|r| r.map(|r| (r.psmiles, r.value)).map_err(DatasetError::from))
        .collect()
}
