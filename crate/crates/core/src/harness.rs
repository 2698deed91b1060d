//! Monte Carlo replications of the train / evaluate protocol.
//!
//! Each replication draws three independent trajectories from the process:
//! a training path of length `n`, a test path of length `n` for MAPE and
//! RMSPE, and an evaluation path of length `m` on which the empirical excess
//! risk `(1/(m-p)) Σ [ℓ(ĥ(X'_i), Y'_i) - ℓ(f(X'_i), Y'_i)]` is measured under
//! the L1, Huber and squared losses. The three paths depend only on
//! `(seed, dgp, error law, n, replication)`, so every loss in a sweep is
//! trained and scored on the same data.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dgp::{self, DgpSpec, InnovationLaw, RegressionFn, SupervisedPairs};
use crate::losses::{LossFamily, LossSpec, DEFAULT_HUBER_DELTA};
use crate::mlp::{NetworkArchitecture, NetworkParams};
use crate::par::{self, Execution};
use crate::seed;
use crate::trainer::{self, TrainConfig};
use crate::{Error, Result, CSV_VERSION_LINE};

const STREAM_TRAIN_DATA: u64 = 11;
const STREAM_TEST_DATA: u64 = 12;
const STREAM_EVAL_DATA: u64 = 13;
const STREAM_FIT: u64 = 14;

pub const RECORDS_HEADER: &str =
    "dgp,error,loss,n,rep,excess_l1,excess_huber,excess_l2,mape,rmspe,epochs,seconds,diverged";

/// Anything that maps a batch of inputs to predictions.
pub trait Predictor {
    fn predict_batch(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>>;
}

impl Predictor for NetworkParams {
    fn predict_batch(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        self.forward_batch(x, None)
    }
}

/// A predictor given by a function of one input row.
pub struct FnPredictor<F>(pub F);

impl<F> Predictor for FnPredictor<F>
where
    F: Fn(&[f64]) -> f64,
{
    fn predict_batch(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        Ok(x.rows().into_iter().map(|r| (self.0)(&r.to_vec())).collect())
    }
}

/// Empirical excess risk for each loss in `losses` on the pairs, against the
/// regression function of `dgp`.
pub fn excess_risks_on<P: Predictor + ?Sized>(
    hhat: &P,
    dgp: &DgpSpec,
    pairs: &SupervisedPairs,
    losses: &[LossSpec],
) -> Result<Vec<f64>> {
    if pairs.is_empty() {
        return Err(Error::InsufficientData("excess risk on an empty sample".into()));
    }
    let pred = hhat.predict_batch(pairs.x())?;
    let mut sums = vec![0.0; losses.len()];
    for ((x, y), h) in pairs.iter().zip(pred.iter()) {
        let target = dgp.regression(x.as_slice().expect("rows of a standard layout array are contiguous"));
        for (s, l) in sums.iter_mut().zip(losses) {
            *s += l.loss_unchecked(h - y) - l.loss_unchecked(target - y);
        }
    }
    let n = pairs.len() as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

/// Simulates a fresh trajectory of length `m` from `dgp` (using `dgp.seed`)
/// and returns the empirical excess risk of `hhat` under `loss`.
pub fn excess_risk_empirical<P: Predictor + ?Sized>(hhat: &P, dgp: &DgpSpec, loss: &LossSpec, m: usize) -> Result<f64> {
    let pairs = dgp::simulate(dgp, m)?.embed()?;
    Ok(excess_risks_on(hhat, dgp, &pairs, std::slice::from_ref(loss))?[0])
}

fn residuals<P: Predictor + ?Sized>(hhat: &P, pairs: &SupervisedPairs) -> Result<Array1<f64>> {
    if pairs.is_empty() {
        return Err(Error::InsufficientData("prediction error on an empty test set".into()));
    }
    Ok(&pairs.y - &hhat.predict_batch(pairs.x())?)
}

/// Mean absolute prediction error.
pub fn mape<P: Predictor + ?Sized>(hhat: &P, pairs: &SupervisedPairs) -> Result<f64> {
    let r = residuals(hhat, pairs)?;
    Ok(r.mapv(f64::abs).sum() / r.len() as f64)
}

/// Root mean squared prediction error.
pub fn rmspe<P: Predictor + ?Sized>(hhat: &P, pairs: &SupervisedPairs) -> Result<f64> {
    let r = residuals(hhat, pairs)?;
    Ok((r.mapv(|v| v * v).sum() / r.len() as f64).sqrt())
}

fn default_losses() -> Vec<LossSpec> {
    vec![LossSpec::L1, LossSpec::huber(DEFAULT_HUBER_DELTA).unwrap(), LossSpec::L2]
}
fn default_sizes() -> Vec<usize> {
    vec![250, 500, 1000]
}
fn default_reps() -> usize {
    100
}
fn default_eval_len() -> usize {
    10_000
}
fn default_hidden() -> Vec<usize> {
    vec![100, 100]
}
fn default_burn_in() -> usize {
    dgp::DEFAULT_BURN_IN
}

/// One sweep over losses × sample sizes × replications for a single process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dgp: RegressionFn,
    pub error: InnovationLaw,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_losses")]
    pub losses: Vec<LossSpec>,
    #[serde(default = "default_sizes")]
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_reps")]
    pub replications: usize,
    /// Length of the trajectory used for the excess risk.
    #[serde(default = "default_eval_len")]
    pub eval_length: usize,
    /// Hidden layer widths; the input width is the process order.
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub seed: u64,
    /// Fill the `seconds` column with wall time. Off by default so that
    /// outputs are reproducible byte for byte.
    #[serde(default)]
    pub record_timing: bool,
}

impl PartialEq for RegressionFn {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (RegressionFn::Custom(a), RegressionFn::Custom(b)) => std::sync::Arc::ptr_eq(&a.0, &b.0),
            _ => self.tag() == other.tag(),
        }
    }
}

impl ExperimentConfig {
    pub fn new(dgp: RegressionFn, error: InnovationLaw) -> Self {
        Self {
            dgp,
            error,
            burn_in: default_burn_in(),
            losses: default_losses(),
            sample_sizes: default_sizes(),
            replications: default_reps(),
            eval_length: default_eval_len(),
            hidden: default_hidden(),
            train: TrainConfig::default(),
            seed: 0,
            record_timing: false,
        }
    }

    pub fn dgp_spec(&self) -> Result<DgpSpec> {
        let mut spec = DgpSpec::named(self.dgp.clone(), self.error, 0)?;
        spec.burn_in = self.burn_in;
        Ok(spec)
    }

    pub fn architecture(&self) -> Result<NetworkArchitecture> {
        NetworkArchitecture::with_hidden(self.dgp_spec()?.order, &self.hidden)
    }

    pub fn validate(&self) -> Result<()> {
        let spec = self.dgp_spec()?;
        spec.validate()?;
        self.train.validate()?;
        let p = spec.order;
        if self.replications == 0 {
            return Err(Error::InvalidSpec("replications must be >= 1".into()));
        }
        if self.losses.is_empty() || self.sample_sizes.is_empty() {
            return Err(Error::InvalidSpec("need at least one loss and one sample size".into()));
        }
        for l in &self.losses {
            l.validate()?;
        }
        if self.eval_length <= p {
            return Err(Error::InvalidSpec(format!("eval length must exceed the order {p}")));
        }
        if let Some(&n) = self.sample_sizes.iter().find(|&&n| n <= p + self.train.batch_size) {
            return Err(Error::InvalidSpec(format!(
                "sample size {n} must exceed order + batch size = {}",
                p + self.train.batch_size
            )));
        }
        self.architecture()?;
        Ok(())
    }

    /// Huber threshold used for the Huber excess-risk column: the first Huber
    /// loss in the sweep, or the default.
    fn huber_metric(&self) -> LossSpec {
        self.losses
            .iter()
            .copied()
            .find(|l| l.family == LossFamily::Huber)
            .unwrap_or_else(|| LossSpec::huber(DEFAULT_HUBER_DELTA).unwrap())
    }

    /// Parses JSON or TOML depending on the file extension (TOML otherwise).
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            Ok(serde_json::from_str(&text)?)
        } else {
            toml_from_str(&text)
        }
    }
}

fn toml_from_str(text: &str) -> Result<ExperimentConfig> {
    toml::from_str(text).map_err(|e| Error::InvalidSpec(format!("config: {e}")))
}

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub dgp: String,
    pub error: String,
    pub loss: String,
    pub n: usize,
    pub rep: usize,
    pub excess_l1: f64,
    pub excess_huber: f64,
    pub excess_l2: f64,
    pub mape: f64,
    pub rmspe: f64,
    pub epochs: usize,
    pub seconds: f64,
    pub diverged: bool,
}

impl ReplicationRecord {
    /// Excess risk measured with the same family the net was trained with.
    pub fn matched_excess(&self) -> f64 {
        match self.loss.split(':').next() {
            Some("l1") => self.excess_l1,
            Some("huber") => self.excess_huber,
            _ => self.excess_l2,
        }
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.dgp,
            self.error,
            self.loss,
            self.n,
            self.rep,
            self.excess_l1,
            self.excess_huber,
            self.excess_l2,
            self.mape,
            self.rmspe,
            self.epochs,
            self.seconds,
            u8::from(self.diverged)
        )
    }
}

#[derive(Debug, Clone)]
struct Job {
    loss_index: usize,
    n: usize,
    rep: usize,
}

/// Seeds of the three trajectories of a replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicationSeeds {
    pub train: u64,
    pub test: u64,
    pub eval: u64,
}

pub fn replication_seeds(cfg: &ExperimentConfig, n: usize, rep: usize) -> ReplicationSeeds {
    let key = |stream| {
        seed::derive(
            cfg.seed,
            &[stream, seed::tag_code(cfg.dgp.tag()), seed::tag_code(&cfg.error.tag()), n as u64, rep as u64],
        )
    };
    ReplicationSeeds {
        train: key(STREAM_TRAIN_DATA),
        test: key(STREAM_TEST_DATA),
        eval: key(STREAM_EVAL_DATA),
    }
}

/// Seed of the optimizer (initialization and shuffling) for one fit.
pub fn fit_seed(cfg: &ExperimentConfig, loss: &LossSpec, n: usize, rep: usize) -> u64 {
    seed::derive(
        cfg.seed ^ cfg.train.seed,
        &[
            STREAM_FIT,
            seed::tag_code(cfg.dgp.tag()),
            seed::tag_code(&cfg.error.tag()),
            seed::tag_code(&loss.tag()),
            n as u64,
            rep as u64,
        ],
    )
}

/// Run every replication. Output is sorted by loss (config order), then n and rep
/// and does not depend on the execution mode or thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReplicationRecord>> {
    run_experiment_with(cfg, Execution::default())
}

pub fn run_experiment_with(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<ReplicationRecord>> {
    cfg.validate()?;
    let spec = cfg.dgp_spec()?;
    let arch = cfg.architecture()?;
    let huber_metric = cfg.huber_metric();
    let mut jobs = Vec::new();
    for loss_index in 0..cfg.losses.len() {
        for &n in &cfg.sample_sizes {
            for rep in 0..cfg.replications {
                jobs.push(Job { loss_index, n, rep });
            }
        }
    }
    let results = par::map(&jobs, exec, |job| run_replication(cfg, &spec, &arch, huber_metric, job));
    let mut out = Vec::with_capacity(results.len());
    for (job, r) in jobs.iter().zip(results) {
        out.push((job.loss_index, job.n, job.rep, r?));
    }
    out.sort_by_key(|&(l, n, rep, _)| (l, n, rep));
    Ok(out.into_iter().map(|(.., r)| r).collect())
}

fn run_replication(
    cfg: &ExperimentConfig,
    spec: &DgpSpec,
    arch: &NetworkArchitecture,
    huber_metric: LossSpec,
    job: &Job,
) -> Result<ReplicationRecord> {
    let start = Instant::now();
    let loss = cfg.losses[job.loss_index];
    let seeds = replication_seeds(cfg, job.n, job.rep);
    let mut record = ReplicationRecord {
        dgp: cfg.dgp.tag().to_string(),
        error: cfg.error.tag(),
        loss: loss.tag(),
        n: job.n,
        rep: job.rep,
        excess_l1: f64::NAN,
        excess_huber: f64::NAN,
        excess_l2: f64::NAN,
        mape: f64::NAN,
        rmspe: f64::NAN,
        epochs: 0,
        seconds: 0.0,
        diverged: false,
    };

    let outcome = (|| -> Result<()> {
        let train = dgp::simulate(&spec.with_seed(seeds.train), job.n)?.embed()?;
        let train_cfg = TrainConfig {
            seed: fit_seed(cfg, &loss, job.n, job.rep),
            ..cfg.train.clone()
        };
        let report = match trainer::fit(&train, arch, &loss, &train_cfg) {
            Ok(r) => r,
            Err(Error::TrainingDiverged { epoch, .. }) => {
                record.epochs = epoch;
                return Err(Error::TrainingDiverged { epoch, batch: 0 });
            }
            Err(e) => return Err(e),
        };
        record.epochs = report.epochs_run;
        let hhat = &report.params;

        let test = dgp::simulate(&spec.with_seed(seeds.test), job.n)?.embed()?;
        record.mape = mape(hhat, &test)?;
        record.rmspe = rmspe(hhat, &test)?;

        let eval = dgp::simulate(&spec.with_seed(seeds.eval), cfg.eval_length)?.embed()?;
        let ex = excess_risks_on(hhat, spec, &eval, &[LossSpec::L1, huber_metric, LossSpec::L2])?;
        record.excess_l1 = ex[0];
        record.excess_huber = ex[1];
        record.excess_l2 = ex[2];
        if ex.iter().chain([&record.mape, &record.rmspe]).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite evaluation metric".into()));
        }
        Ok(())
    })();

    match outcome {
        Ok(()) => {}
        Err(Error::TrainingDiverged { .. } | Error::SimulationDiverged { .. } | Error::Numeric(_)) => {
            record.diverged = true;
            record.excess_l1 = f64::NAN;
            record.excess_huber = f64::NAN;
            record.excess_l2 = f64::NAN;
            record.mape = f64::NAN;
            record.rmspe = f64::NAN;
        }
        Err(e) => return Err(e),
    }
    if cfg.record_timing {
        record.seconds = start.elapsed().as_secs_f64();
    }
    Ok(record)
}

pub fn write_records_csv<W: Write>(records: &[ReplicationRecord], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(w, "{RECORDS_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_line())?;
    }
    Ok(())
}

/// Metrics summarized per group.
pub const METRICS: [&str; 6] = ["excess_l1", "excess_huber", "excess_l2", "mape", "rmspe", "epochs"];

fn metric(r: &ReplicationRecord, name: &str) -> f64 {
    match name {
        "excess_l1" => r.excess_l1,
        "excess_huber" => r.excess_huber,
        "excess_l2" => r.excess_l2,
        "mape" => r.mape,
        "rmspe" => r.rmspe,
        "epochs" => r.epochs as f64,
        _ => unreachable!("unknown metric {name}"),
    }
}

/// Quantile by linear interpolation between order statistics (type 7):
/// position `h = (n - 1) q`, value `x[⌊h⌋] + (h - ⌊h⌋)(x[⌊h⌋+1] - x[⌊h⌋])`.
/// `sorted` must be ascending and nonempty.
pub fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_type7(&v, 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub dgp: String,
    pub error: String,
    pub loss: String,
    pub n: usize,
    pub metric: &'static str,
    /// Replications that entered the statistics.
    pub count: usize,
    /// Diverged replications left out.
    pub excluded: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator), 0 for one value.
    pub sd: f64,
    #[serde(skip)]
    pub values: Vec<f64>,
}

type GroupKey = (String, String, String, usize);

fn groups(records: &[ReplicationRecord]) -> Vec<(GroupKey, Vec<&ReplicationRecord>)> {
    let mut order: Vec<GroupKey> = Vec::new();
    let mut map: BTreeMap<GroupKey, Vec<&ReplicationRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.dgp.clone(), r.error.clone(), r.loss.clone(), r.n);
        map.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            Vec::new()
        }).push(r);
    }
    order.into_iter().map(|k| {
        let v = map.remove(&k).unwrap();
        (k, v)
    }).collect()
}

/// Boxplot statistics per (dgp, error, loss, n, metric), in first-seen order.
/// Diverged records are excluded and counted.
pub fn summarize(records: &[ReplicationRecord]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for ((dgp, error, loss, n), rs) in groups(records) {
        let excluded = rs.iter().filter(|r| r.diverged).count();
        for name in METRICS {
            let mut values: Vec<f64> = rs.iter().filter(|r| !r.diverged).map(|r| metric(r, name)).collect();
            values.sort_by(f64::total_cmp);
            let count = values.len();
            let (min, q1, med, q3, max, mean, sd) = if count == 0 {
                (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN)
            } else {
                let mean = values.iter().sum::<f64>() / count as f64;
                let sd = if count > 1 {
                    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
                } else {
                    0.0
                };
                (
                    values[0],
                    quantile_type7(&values, 0.25),
                    quantile_type7(&values, 0.5),
                    quantile_type7(&values, 0.75),
                    values[count - 1],
                    mean,
                    sd,
                )
            };
            out.push(SummaryRow {
                dgp: dgp.clone(),
                error: error.clone(),
                loss: loss.clone(),
                n,
                metric: name,
                count,
                excluded,
                min,
                q1,
                median: med,
                q3,
                max,
                mean,
                sd,
                values,
            });
        }
    }
    out
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(w, "dgp,error,loss,n,metric,count,excluded,min,q1,median,q3,max,mean,sd")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.dgp, r.error, r.loss, r.n, r.metric, r.count, r.excluded, r.min, r.q1, r.median, r.q3, r.max, r.mean, r.sd
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BoxplotGroup<'a> {
    dgp: &'a str,
    error: &'a str,
    loss: &'a str,
    n: usize,
    metric: &'a str,
    excluded: usize,
    values: &'a [f64],
}

/// Grouped raw values for external plotting.
pub fn write_boxplot_json<W: Write>(rows: &[SummaryRow], w: W) -> Result<()> {
    let groups: Vec<BoxplotGroup<'_>> = rows
        .iter()
        .map(|r| BoxplotGroup {
            dgp: &r.dgp,
            error: &r.error,
            loss: &r.loss,
            n: r.n,
            metric: r.metric,
            excluded: r.excluded,
            values: &r.values,
        })
        .collect();
    serde_json::to_writer_pretty(w, &serde_json::json!({ "version": 1, "groups": groups }))?;
    Ok(())
}

/// Writes `records.csv`, `summary.csv` and `boxplot.json` into `dir`.
pub fn write_outputs(records: &[ReplicationRecord], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_records_csv(records, std::io::BufWriter::new(fs::File::create(dir.join("records.csv"))?))?;
    let summary = summarize(records);
    write_summary_csv(&summary, std::io::BufWriter::new(fs::File::create(dir.join("summary.csv"))?))?;
    let mut f = std::io::BufWriter::new(fs::File::create(dir.join("boxplot.json"))?);
    write_boxplot_json(&summary, &mut f)?;
    writeln!(f)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn pairs(x: Vec<f64>, y: Vec<f64>) -> SupervisedPairs {
        let n = y.len();
        SupervisedPairs::new(Array2::from_shape_vec((n, x.len() / n), x).unwrap(), Array1::from(y)).unwrap()
    }

    #[test]
    fn prediction_errors() {
        let zero = FnPredictor(|_: &[f64]| 0.0);
        let p = pairs(vec![0.0, 0.0], vec![1.0, -1.0]);
        assert_eq!(mape(&zero, &p).unwrap(), 1.0);
        assert_eq!(rmspe(&zero, &p).unwrap(), 1.0);
        let p = pairs(vec![0.0, 0.0], vec![0.0, 2.0]);
        assert_eq!(mape(&zero, &p).unwrap(), 1.0);
        assert!((rmspe(&zero, &p).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let empty = SupervisedPairs::new(Array2::zeros((0, 1)), Array1::zeros(0)).unwrap();
        assert!(matches!(mape(&zero, &empty), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn perfect_predictor_noiseless() {
        let spec = DgpSpec::dgp2(InnovationLaw::Zero, 1);
        let test = dgp::simulate(&spec, 100).unwrap().embed().unwrap();
        let f = FnPredictor(|x: &[f64]| dgp::f_dgp2(x[0], x[1]));
        assert_eq!(mape(&f, &test).unwrap(), 0.0);
        assert_eq!(rmspe(&f, &test).unwrap(), 0.0);
    }

    #[test]
    fn excess_risk_of_target_is_zero() {
        let spec = DgpSpec::dgp1(InnovationLaw::StudentT { df: 2.0 }, 4);
        let f = FnPredictor(|x: &[f64]| dgp::f_dgp1(x[0], x[1], x[2]));
        for loss in [LossSpec::L1, LossSpec::huber(1.345).unwrap(), LossSpec::L2] {
            assert_eq!(excess_risk_empirical(&f, &spec, &loss, 2000).unwrap(), 0.0);
        }
    }

    #[test]
    fn shifted_target_noiseless_l1() {
        let spec = DgpSpec::dgp1(InnovationLaw::Zero, 4);
        let f = FnPredictor(|x: &[f64]| dgp::f_dgp1(x[0], x[1], x[2]) + 1.0);
        assert_eq!(excess_risk_empirical(&f, &spec, &LossSpec::L1, 10_000).unwrap(), 1.0);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_type7(&v, 0.5), 3.0);
        assert_eq!(quantile_type7(&v, 0.25), 2.0);
        assert_eq!(quantile_type7(&v, 0.75), 4.0);
        // four values: h = 0.75 for q1
        let v = [1.0, 2.0, 4.0, 8.0];
        assert_eq!(quantile_type7(&v, 0.25), 1.75);
        assert_eq!(quantile_type7(&v, 0.5), 3.0);
        assert_eq!(quantile_type7(&[7.0], 0.3), 7.0);
    }

    fn rec(loss: &str, n: usize, rep: usize, v: f64, diverged: bool) -> ReplicationRecord {
        ReplicationRecord {
            dgp: "dgp1".into(),
            error: "t2".into(),
            loss: loss.into(),
            n,
            rep,
            excess_l1: v,
            excess_huber: v,
            excess_l2: v,
            mape: v,
            rmspe: v,
            epochs: 10,
            seconds: 0.0,
            diverged,
        }
    }

    #[test]
    fn summary_of_single_record() {
        let rows = summarize(&[rec("l1", 250, 0, 0.7, false)]);
        assert_eq!(rows.len(), METRICS.len());
        let r = &rows[0];
        assert_eq!((r.min, r.q1, r.median, r.q3, r.max, r.mean, r.sd), (0.7, 0.7, 0.7, 0.7, 0.7, 0.7, 0.0));
    }

    #[test]
    fn summary_groups_and_exclusions() {
        let mut records: Vec<_> = (0..5).map(|i| rec("l1", 250, i, (i + 1) as f64, false)).collect();
        records.push(rec("l1", 250, 5, f64::NAN, true));
        records.extend((0..3).map(|i| rec("l2", 250, i, 1.0, false)));
        let rows = summarize(&records);
        let l1: Vec<_> = rows.iter().filter(|r| r.loss == "l1" && r.metric == "mape").collect();
        assert_eq!(l1.len(), 1);
        assert_eq!(l1[0].count, 5);
        assert_eq!(l1[0].excluded, 1);
        assert_eq!((l1[0].q1, l1[0].median, l1[0].q3), (2.0, 3.0, 4.0));
        let l2 = rows.iter().find(|r| r.loss == "l2" && r.metric == "rmspe").unwrap();
        assert_eq!(l2.count, 3);

        let mut buf = Vec::new();
        write_summary_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("dgp1,t2,l1,250,mape,5,1,1,2,3,4,5,3,"));

        let mut buf = Vec::new();
        write_boxplot_json(&rows, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["groups"].as_array().unwrap().len(), rows.len());
        assert_eq!(v["groups"][0]["values"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn records_csv_format() {
        let mut buf = Vec::new();
        write_records_csv(&[rec("huber", 500, 3, 0.25, false)], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# robust-wdep-dnn v1\n\
             dgp,error,loss,n,rep,excess_l1,excess_huber,excess_l2,mape,rmspe,epochs,seconds,diverged\n\
             dgp1,t2,huber,500,3,0.25,0.25,0.25,0.25,0.25,10,0,0\n"
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::new(RegressionFn::Dgp1, InnovationLaw::Gaussian);
        assert!(cfg.validate().is_ok());
        cfg.sample_sizes = vec![30];
        assert!(cfg.validate().is_err());
        cfg.sample_sizes = vec![300];
        cfg.replications = 0;
        assert!(cfg.validate().is_err());
        cfg.replications = 1;
        cfg.eval_length = 3;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_and_json_configs() {
        let toml = r#"
            # sweep
            dgp = "dgp2"
            error = "t2"
            losses = ["l1", "huber:2", "l2"]
            sample_sizes = [250, 500]
            replications = 3   # small
            hidden = [8]
            seed = 9

            [train]
            max_epochs = 5
            learning_rate = 0.01
        "#;
        let cfg = toml_from_str(toml).unwrap();
        assert_eq!(cfg.dgp, RegressionFn::Dgp2);
        assert_eq!(cfg.error, InnovationLaw::StudentT { df: 2.0 });
        assert_eq!(cfg.losses[1].delta, 2.0);
        assert_eq!(cfg.train.max_epochs, 5);
        assert_eq!(cfg.train.batch_size, 32);
        assert_eq!(cfg.eval_length, 10_000);
        let json = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        assert!(toml_from_str("dgp = \"dgp1\"\nerror = \"gaussian\"\nbogus = 1\n").is_err());
    }

    #[test]
    fn seeds_shared_across_losses() {
        let cfg = ExperimentConfig::new(RegressionFn::Dgp1, InnovationLaw::Gaussian);
        let a = replication_seeds(&cfg, 250, 0);
        assert_ne!(a, replication_seeds(&cfg, 250, 1));
        assert_ne!(a, replication_seeds(&cfg, 500, 0));
        assert_ne!(a.train, a.test);
        assert_ne!(a.test, a.eval);
        assert_ne!(fit_seed(&cfg, &LossSpec::L1, 250, 0), fit_seed(&cfg, &LossSpec::L2, 250, 0));
    }
}
