use robust_dnn::dgp::{self, DgpSpec, InnovationLaw, RegressionFn};
use robust_dnn::seed;

fn draws(law: InnovationLaw, n: usize, s: u64) -> Vec<f64> {
    let mut rng = seed::rng_from(s);
    (0..n).map(|_| dgp::sample_innovation(&law, &mut rng).unwrap()).collect()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn gaussian_mean() {
    let v = draws(InnovationLaw::Gaussian, 100_000, 1);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean.abs() <= 0.02, "mean {mean}");
}

#[test]
fn student_t2_median_and_fourth_moment() {
    let v = draws(InnovationLaw::StudentT { df: 2.0 }, 100_000, 2);
    let s = sorted(v.clone());
    let median = (s[49_999] + s[50_000]) / 2.0;
    assert!(median.abs() <= 0.02, "median {median}");

    // The running fourth moment keeps jumping upward instead of settling.
    let m4 = |k: usize| v[..k].iter().map(|x| x.powi(4)).sum::<f64>() / k as f64;
    let checkpoints = [1_000, 10_000, 100_000];
    let moments: Vec<f64> = checkpoints.iter().map(|&k| m4(k)).collect();
    assert!(moments[2] > moments[0], "{moments:?}");
    // a finite fourth moment of 3 would be the Gaussian benchmark
    assert!(moments[2] > 30.0, "{moments:?}");
}

#[test]
fn cauchy_interquartile_range() {
    let s = sorted(draws(InnovationLaw::Cauchy, 100_000, 3));
    let iqr = s[75_000] - s[25_000];
    assert!((iqr - 2.0).abs() <= 0.1, "iqr {iqr}");
}

#[test]
fn burn_in_leaves_no_drift() {
    for spec in [DgpSpec::dgp1(InnovationLaw::Gaussian, 21), DgpSpec::dgp2(InnovationLaw::Gaussian, 22)] {
        let y = dgp::simulate(&spec, 10_000).unwrap().values;
        let (a, b) = y.split_at(5_000);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let var = |v: &[f64]| {
            let m = mean(v);
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        };
        // AR(1) variance inflation from the lag-1 autocorrelation
        let m = mean(&y);
        let rho = y.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / y.iter().map(|x| (x - m).powi(2)).sum::<f64>();
        let inflation = ((1.0 + rho) / (1.0 - rho)).max(1.0);
        let se = ((var(a) / a.len() as f64 + var(b) / b.len() as f64) * inflation).sqrt();
        let diff = (mean(a) - mean(b)).abs();
        assert!(diff < 5.0 * se, "{}: diff {diff} se {se}", spec.function.tag());
    }
}

#[test]
fn noiseless_contraction_is_geometric() {
    // threshold AR fixed point on the positive branch: y = 0.5 - 0.5 y + 0.15 y
    let y_star = 0.5 / 1.35;
    let mut spec = DgpSpec::dgp1(InnovationLaw::Zero, 0);
    spec.burn_in = 0;
    let y = dgp::simulate(&spec, 300).unwrap().values;
    let err: Vec<f64> = y.iter().map(|v| (v - y_star).abs()).collect();
    assert!(err[299] < 1e-12, "final error {}", err[299]);
    let envelope: Vec<f64> = err.chunks(10).map(|c| c.iter().cloned().fold(0.0, f64::max)).collect();
    for w in envelope.windows(2).take(5) {
        assert!(w[1] < 0.9 * w[0], "{envelope:?}");
    }
}

#[test]
fn embed_count_matches() {
    for (spec, p) in [(DgpSpec::dgp1(InnovationLaw::Gaussian, 5), 3), (DgpSpec::dgp2(InnovationLaw::Gaussian, 5), 2)] {
        for n in [p + 1, 10, 257] {
            let pairs = dgp::simulate(&spec, n).unwrap().embed().unwrap();
            assert_eq!(pairs.len(), n - p);
            assert_eq!(pairs.dim(), p);
        }
    }
}

#[test]
fn custom_function_is_used() {
    let f = RegressionFn::custom(|l: &[f64]| 0.5 * l[0] + 1.0);
    let spec = DgpSpec::custom(1, f, InnovationLaw::Zero, vec![0.5], 0);
    let y = dgp::simulate(&spec, 5).unwrap().values;
    for v in y {
        assert!((v - 2.0).abs() < 1e-12);
    }
}
