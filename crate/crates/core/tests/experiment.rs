use robust_dnn::dgp::{self, DgpSpec, InnovationLaw, RegressionFn};
use robust_dnn::harness::{self, ExperimentConfig, FnPredictor};
use robust_dnn::losses::LossSpec;
use robust_dnn::par::Execution;

fn tiny(dgp: RegressionFn, error: InnovationLaw) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(dgp, error);
    cfg.losses = vec![LossSpec::L1];
    cfg.sample_sizes = vec![100];
    cfg.replications = 2;
    cfg.eval_length = 500;
    cfg.hidden = vec![8];
    cfg.train.max_epochs = 5;
    cfg.seed = 31;
    cfg
}

fn csv(records: &[harness::ReplicationRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    harness::write_records_csv(records, &mut buf).unwrap();
    buf
}

#[test]
fn two_replications_two_records() {
    let cfg = tiny(RegressionFn::Dgp1, InnovationLaw::Gaussian);
    let records = harness::run_experiment(&cfg).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!((records[0].rep, records[1].rep), (0, 1));
    assert_ne!(records[0].mape, records[1].mape);
    let s0 = harness::replication_seeds(&cfg, 100, 0);
    let s1 = harness::replication_seeds(&cfg, 100, 1);
    assert_ne!(s0, s1);
    let spec = cfg.dgp_spec().unwrap();
    let t0 = dgp::simulate(&spec.with_seed(s0.train), 100).unwrap();
    let t1 = dgp::simulate(&spec.with_seed(s1.train), 100).unwrap();
    assert_ne!(t0.values, t1.values);
}

#[test]
fn same_config_same_bytes() {
    let mut cfg = tiny(RegressionFn::Dgp2, InnovationLaw::StudentT { df: 2.0 });
    cfg.losses = vec![LossSpec::L1, LossSpec::huber(1.345).unwrap(), LossSpec::L2];
    cfg.sample_sizes = vec![100, 150];
    let a = csv(&harness::run_experiment_with(&cfg, Execution::Sequential).unwrap());
    let b = csv(&harness::run_experiment_with(&cfg, Execution::Parallel).unwrap());
    let c = csv(&harness::run_experiment(&cfg).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 2 + 3 * 2 * 2);
}

#[test]
fn records_complete_and_ordered() {
    let mut cfg = tiny(RegressionFn::Dgp1, InnovationLaw::Gaussian);
    cfg.losses = vec![LossSpec::L2, LossSpec::L1];
    cfg.sample_sizes = vec![120, 100];
    cfg.replications = 3;
    let records = harness::run_experiment(&cfg).unwrap();
    assert_eq!(records.len(), 12);
    let keys: Vec<(String, usize, usize)> = records.iter().map(|r| (r.loss.clone(), r.n, r.rep)).collect();
    let mut expected = Vec::new();
    for l in ["l2", "l1"] {
        for n in [100, 120] {
            for rep in 0..3 {
                expected.push((l.to_string(), n, rep));
            }
        }
    }
    assert_eq!(keys, expected);
    for r in &records {
        assert!(!r.diverged);
        assert!(r.rmspe >= r.mape);
        assert_eq!(r.seconds, 0.0);
    }
    let summary = harness::summarize(&records);
    assert!(summary.iter().all(|s| s.count == 3 && s.excluded == 0));
}

#[test]
fn adding_a_loss_leaves_other_rows_unchanged() {
    let cfg = tiny(RegressionFn::Dgp1, InnovationLaw::Gaussian);
    let alone = harness::run_experiment(&cfg).unwrap();
    let mut both = cfg.clone();
    both.losses = vec![LossSpec::L2, LossSpec::L1];
    let records = harness::run_experiment(&both).unwrap();
    assert_eq!(&records[2..], &alone[..]);
}

#[test]
fn true_function_noise_floor() {
    // excess risk of a predictor near f stays above -3/sqrt(m - p) across seeds
    let m = 2_000;
    let bound = -3.0 / ((m - 3) as f64).sqrt();
    let h = FnPredictor(|x: &[f64]| dgp::f_dgp1(x[0], x[1], x[2]) + 0.05);
    for seed in 0..100 {
        let spec = DgpSpec::dgp1(InnovationLaw::Gaussian, seed);
        let v = harness::excess_risk_empirical(&h, &spec, &LossSpec::huber(1.345).unwrap(), m).unwrap();
        assert!(v >= bound, "seed {seed}: {v}");
    }
    let f = FnPredictor(|x: &[f64]| dgp::f_dgp1(x[0], x[1], x[2]));
    let spec = DgpSpec::dgp1(InnovationLaw::Gaussian, 7);
    let v = harness::excess_risk_empirical(&f, &spec, &LossSpec::L1, m).unwrap();
    assert!(v.abs() <= 5.0 / ((m - 3) as f64).sqrt());
}

#[test]
fn outputs_written() {
    let cfg = tiny(RegressionFn::Dgp1, InnovationLaw::Cauchy);
    let records = harness::run_experiment(&cfg).unwrap();
    let dir = std::env::temp_dir().join(format!("robust-dnn-outputs-{}", std::process::id()));
    harness::write_outputs(&records, &dir).unwrap();
    let rec = std::fs::read_to_string(dir.join("records.csv")).unwrap();
    assert!(rec.starts_with("# robust-wdep-dnn v1\ndgp,error,loss,n,rep,"));
    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert!(summary.lines().nth(2).unwrap().starts_with("dgp1,cauchy,l1,100,excess_l1,"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("boxplot.json")).unwrap()).unwrap();
    assert!(json["groups"].is_array());
    std::fs::remove_dir_all(&dir).unwrap();
}
