//! Nonlinear autoregressive data generation.
//!
//! `Y_t = f(Y_{t-1}, ..., Y_{t-p}) + ε_t` with i.i.d. innovations. Two
//! regression functions are built in (a threshold AR(3) and an exponential
//! AR(2)); arbitrary ones can be plugged in as [`RegressionFn::Custom`].

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::seed::{self, SimRng};
use crate::{Error, Result, CSV_VERSION_LINE};

pub const DEFAULT_BURN_IN: usize = 500;

/// Values beyond this magnitude count as a diverged trajectory.
const DIVERGENCE_LEVEL: f64 = 1e100;

/// Threshold AR: `0.5 - 0.5 max(y1, 0) + 0.2 min(y1, 0) + 0.15 y3`.
///
/// The second lag is part of the signature but does not enter the formula.
pub fn f_dgp1(y1: f64, _y2: f64, y3: f64) -> f64 {
    0.5 - 0.5 * y1.max(0.0) + 0.2 * y1.min(0.0) + 0.15 * y3
}

/// Exponential AR: `0.75 + (0.8 - 0.2 e^{-y1²}) y1 + (-0.2 + 0.3 e^{-y1²}) y2`.
pub fn f_dgp2(y1: f64, y2: f64) -> f64 {
    let e = (-y1 * y1).exp();
    0.75 + (0.8 - 0.2 * e) * y1 + (-0.2 + 0.3 * e) * y2
}

/// A user supplied regression function of the lag vector `(Y_{t-1}, ..., Y_{t-p})`.
#[derive(Clone)]
pub struct CustomFn(pub Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>);

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomFn(..)")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressionFn {
    Dgp1,
    Dgp2,
    #[serde(skip)]
    Custom(CustomFn),
}

impl RegressionFn {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        RegressionFn::Custom(CustomFn(Arc::new(f)))
    }

    pub fn tag(&self) -> &'static str {
        match self {
            RegressionFn::Dgp1 => "dgp1",
            RegressionFn::Dgp2 => "dgp2",
            RegressionFn::Custom(_) => "custom",
        }
    }

    /// Evaluate at lags `(Y_{t-1}, ..., Y_{t-p})`.
    #[inline]
    pub fn eval(&self, lags: &[f64]) -> f64 {
        match self {
            RegressionFn::Dgp1 => f_dgp1(lags[0], lags[1], lags[2]),
            RegressionFn::Dgp2 => f_dgp2(lags[0], lags[1]),
            RegressionFn::Custom(f) => (f.0)(lags),
        }
    }
}

impl FromStr for RegressionFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dgp1" => Ok(RegressionFn::Dgp1),
            "dgp2" => Ok(RegressionFn::Dgp2),
            other => Err(Error::InvalidSpec(format!("unknown dgp '{other}' (expected dgp1 or dgp2)"))),
        }
    }
}

/// Innovation distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InnovationLaw {
    Gaussian,
    StudentT { df: f64 },
    Cauchy,
    /// `ε ≡ 0`; noiseless recursion.
    Zero,
}

impl InnovationLaw {
    pub fn validate(&self) -> Result<()> {
        if let InnovationLaw::StudentT { df } = self {
            if !(*df > 0.0) || !df.is_finite() {
                return Err(Error::InvalidSpec(format!("student-t degrees of freedom must be positive, got {df}")));
            }
        }
        Ok(())
    }

    pub fn tag(&self) -> String {
        match self {
            InnovationLaw::Gaussian => "gaussian".into(),
            InnovationLaw::StudentT { df } => format!("t{df}"),
            InnovationLaw::Cauchy => "cauchy".into(),
            InnovationLaw::Zero => "zero".into(),
        }
    }

    fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match *self {
            InnovationLaw::Gaussian => Sampler::Gaussian,
            InnovationLaw::StudentT { df } => Sampler::StudentT(
                StudentT::new(df).map_err(|e| Error::InvalidSpec(format!("student-t: {e}")))?,
            ),
            InnovationLaw::Cauchy => Sampler::Cauchy(Cauchy::new(0.0, 1.0).expect("unit cauchy is valid")),
            InnovationLaw::Zero => Sampler::Zero,
        })
    }
}

impl fmt::Display for InnovationLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for InnovationLaw {
    type Err = Error;

    /// Accepts `gaussian`/`normal`, `t<df>` (e.g. `t2`), `cauchy`, `zero`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let law = match lower.as_str() {
            "gaussian" | "normal" => InnovationLaw::Gaussian,
            "cauchy" => InnovationLaw::Cauchy,
            "zero" | "none" => InnovationLaw::Zero,
            t if t.starts_with('t') => {
                let df = t[1..]
                    .trim_start_matches(':')
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidSpec(format!("bad student-t tag '{s}'")))?;
                InnovationLaw::StudentT { df }
            }
            _ => {
                return Err(Error::InvalidSpec(format!(
                    "unknown error law '{s}' (expected gaussian, t<df>, cauchy or zero)"
                )))
            }
        };
        law.validate()?;
        Ok(law)
    }
}

impl TryFrom<String> for InnovationLaw {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InnovationLaw> for String {
    fn from(l: InnovationLaw) -> Self {
        l.tag()
    }
}

enum Sampler {
    Gaussian,
    StudentT(StudentT<f64>),
    Cauchy(Cauchy<f64>),
    Zero,
}

impl Sampler {
    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gaussian => StandardNormal.sample(rng),
            Sampler::StudentT(d) => d.sample(rng),
            Sampler::Cauchy(d) => d.sample(rng),
            Sampler::Zero => 0.0,
        }
    }
}

/// One draw from `law`.
pub fn sample_innovation<R: Rng + ?Sized>(law: &InnovationLaw, rng: &mut R) -> Result<f64> {
    Ok(law.sampler()?.draw(rng))
}

/// Full description of an autoregressive data generating process.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DgpSpec {
    pub order: usize,
    pub function: RegressionFn,
    pub innovation: InnovationLaw,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    /// Coefficients of the linear growth bound `|f(x)| <= Σ α_i |x_i| + c`.
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

impl DgpSpec {
    pub fn dgp1(innovation: InnovationLaw, seed: u64) -> Self {
        Self {
            order: 3,
            function: RegressionFn::Dgp1,
            innovation,
            burn_in: DEFAULT_BURN_IN,
            alphas: vec![0.5, 0.0, 0.15],
            seed,
        }
    }

    /// The linear bound coefficients `(0.8, 0.2)` are the asymptotic slopes
    /// `sup |0.8 - 0.2 e^{-y²}|` and `sup |-0.2 + 0.3 e^{-y²}|`.
    pub fn dgp2(innovation: InnovationLaw, seed: u64) -> Self {
        Self {
            order: 2,
            function: RegressionFn::Dgp2,
            innovation,
            burn_in: DEFAULT_BURN_IN,
            alphas: vec![0.8, 0.2],
            seed,
        }
    }

    /// Built-in process by tag with its canonical order and bound coefficients.
    pub fn named(function: RegressionFn, innovation: InnovationLaw, seed: u64) -> Result<Self> {
        match function {
            RegressionFn::Dgp1 => Ok(Self::dgp1(innovation, seed)),
            RegressionFn::Dgp2 => Ok(Self::dgp2(innovation, seed)),
            RegressionFn::Custom(_) => Err(Error::InvalidSpec("custom processes need an explicit order".into())),
        }
    }

    pub fn custom(order: usize, f: RegressionFn, innovation: InnovationLaw, alphas: Vec<f64>, seed: u64) -> Self {
        Self {
            order,
            function: f,
            innovation,
            burn_in: DEFAULT_BURN_IN,
            alphas,
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidSpec("autoregressive order must be >= 1".into()));
        }
        let required = match self.function {
            RegressionFn::Dgp1 => Some(3),
            RegressionFn::Dgp2 => Some(2),
            RegressionFn::Custom(_) => None,
        };
        if let Some(p) = required {
            if self.order != p {
                return Err(Error::InvalidSpec(format!(
                    "{} has order {p}, got {}",
                    self.function.tag(),
                    self.order
                )));
            }
        }
        if !self.alphas.is_empty() && self.alphas.len() != self.order {
            return Err(Error::InvalidSpec(format!(
                "expected {} bound coefficients, got {}",
                self.order,
                self.alphas.len()
            )));
        }
        if self.alphas.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::InvalidSpec("bound coefficients must be nonnegative".into()));
        }
        self.innovation.validate()
    }

    /// Target predictor `h*(x) = f(x)`.
    #[inline]
    pub fn regression(&self, lags: &[f64]) -> f64 {
        self.function.eval(lags)
    }
}

/// Result of the `Σ α_i < 1` check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stationarity {
    pub stationary: bool,
    /// `1 - Σ α_i`; negative when the condition fails by a margin.
    pub margin: f64,
}

pub fn check_stationarity(spec: &DgpSpec) -> Stationarity {
    let sum: f64 = spec.alphas.iter().sum();
    Stationarity {
        stationary: sum < 1.0,
        margin: 1.0 - sum,
    }
}

/// A simulated path `Y_1, ..., Y_n`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub values: Vec<f64>,
    pub spec: DgpSpec,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn embed(&self) -> Result<SupervisedPairs> {
        embed(&self.values, self.spec.order)
    }
}

/// Simulate `n` values after `burn_in` discarded steps, starting from zeros.
pub fn simulate(spec: &DgpSpec, n: usize) -> Result<Trajectory> {
    let mut rng = seed::rng_from(spec.seed);
    simulate_with(spec, n, &mut rng)
}

/// As [`simulate`] but drawing innovations from a caller-owned generator.
pub fn simulate_with(spec: &DgpSpec, n: usize, rng: &mut SimRng) -> Result<Trajectory> {
    spec.validate()?;
    let p = spec.order;
    if n < p + 1 {
        return Err(Error::InsufficientData(format!("need n >= {} for order {p}, got {n}", p + 1)));
    }
    let sampler = spec.innovation.sampler()?;
    // lags[0] = Y_{t-1}, ..., lags[p-1] = Y_{t-p}
    let mut lags = vec![0.0; p];
    let mut values = Vec::with_capacity(n);
    for step in 0..spec.burn_in + n {
        let y = spec.regression(&lags) + sampler.draw(rng);
        if !y.is_finite() || y.abs() > DIVERGENCE_LEVEL {
            return Err(Error::SimulationDiverged { step });
        }
        lags.rotate_right(1);
        lags[0] = y;
        if step >= spec.burn_in {
            values.push(y);
        }
    }
    Ok(Trajectory {
        values,
        spec: spec.clone(),
    })
}

/// Lagged regression pairs `X_i = (Y_{i-1}, ..., Y_{i-p})`, `Y_i`, in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedPairs {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
}

impl SupervisedPairs {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Shape(format!("{} inputs but {} targets", x.nrows(), y.len())));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ArrayView1<'_, f64>, f64)> {
        self.x.rows().into_iter().zip(self.y.iter().copied())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_VERSION_LINE}")?;
        let header: Vec<String> = (1..=self.dim()).map(|i| format!("x{i}")).chain(["y".to_string()]).collect();
        writeln!(w, "{}", header.join(","))?;
        for (x, y) in self.iter() {
            for v in x {
                write!(w, "{v},")?;
            }
            writeln!(w, "{y}")?;
        }
        Ok(())
    }
}

pub fn embed(values: &[f64], p: usize) -> Result<SupervisedPairs> {
    let n = values.len();
    if p == 0 || n <= p {
        return Err(Error::InsufficientData(format!(
            "embedding order {p} needs more than {p} values, got {n}"
        )));
    }
    let rows = n - p;
    let x = Array2::from_shape_fn((rows, p), |(i, j)| values[i + p - 1 - j]);
    let y = Array1::from_iter(values[p..].iter().copied());
    Ok(SupervisedPairs { x, y })
}

/// Single-column CSV with header `y`.
pub fn write_trajectory_csv<W: Write>(values: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(w, "y")?;
    for v in values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

/// Reads the format written by [`write_trajectory_csv`]; `#` lines are skipped.
pub fn read_trajectory_csv<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "y" {
                return Err(Error::InvalidSpec(format!("expected header 'y', found '{line}'")));
            }
            saw_header = true;
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::InvalidSpec(format!("line {}: not a number: '{line}'", lineno + 1)))?;
        values.push(v);
    }
    Ok(values)
}
