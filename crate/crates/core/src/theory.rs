//! Closed-form rates, architecture schedules and excess-risk bounds.
//!
//! Two regimes are covered:
//!
//! - strongly mixing processes with `α(j) = ᾱ exp(-c j^γ)`, where rates are
//!   expressed through the effective sample size [`n_alpha`];
//! - ψ-weakly dependent processes with `Σ_j (j+1)^k ε(j) <= L₁ L₂^k (k!)^μ`,
//!   where rates use `n` directly.
//!
//! An infinite moment order `r = f64::INFINITY` is supported everywhere and
//! gives the limits `1 - 1/r = 1` and `m^{1/r} = 1`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::mlp::{Activation, ClassSpec};
use crate::{Error, Result, CSV_VERSION_LINE};

/// The combinator `Ψ(u, v)` attached to each weak dependence notion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiKind {
    #[default]
    Theta,
    Eta,
    Kappa,
    Lambda,
}

impl PsiKind {
    pub fn value(self, u: f64, v: f64) -> f64 {
        match self {
            PsiKind::Theta => 2.0 * v,
            PsiKind::Eta => u + v,
            PsiKind::Kappa => u * v,
            PsiKind::Lambda => (u + v + u * v) / 2.0,
        }
    }
}

impl FromStr for PsiKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "theta" => Ok(PsiKind::Theta),
            "eta" => Ok(PsiKind::Eta),
            "kappa" => Ok(PsiKind::Kappa),
            "lambda" => Ok(PsiKind::Lambda),
            other => Err(Error::InvalidSpec(format!("unknown psi '{other}'"))),
        }
    }
}

/// `Ψ(u, v)` for integer block sizes.
pub fn psi_value(kind: PsiKind, u: u64, v: u64) -> f64 {
    kind.value(u as f64, v as f64)
}

/// Which pair of constants `(C_{n,1}, C_{n,2})` prefactors enters the
/// weak-dependence constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantsVariant {
    /// `16 K² β² Ψ(1,1) L₁` and `4 K β L₂ max(2^{3+μ}/Ψ(1,1), 1)`.
    #[default]
    Proof,
    /// `32 K² β² Ψ(1,1) L₁` and `8 K β L₂ max(2^{3+μ}/Ψ(1,1), 1)`.
    Statement,
}

impl ConstantsVariant {
    fn prefactors(self) -> (f64, f64) {
        match self {
            ConstantsVariant::Proof => (16.0, 4.0),
            ConstantsVariant::Statement => (32.0, 8.0),
        }
    }
}

/// Every constant that enters the theoretical quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TheoryInputs {
    /// Hölder smoothness of the target.
    pub s: f64,
    /// Input dimension.
    pub d: usize,
    /// Moment order, `E|Y|^r <= M`; may be infinite.
    pub r: f64,
    /// Lipschitz constant of the loss; `None` for losses without one.
    pub lipschitz: Option<f64>,
    /// Mixing rate constants.
    pub c: f64,
    pub gamma: f64,
    pub alpha_bar: f64,
    /// Weak dependence constants.
    pub l1: f64,
    pub l2: f64,
    pub mu: f64,
    /// Moment bound.
    pub m: f64,
    /// Log exponent in the strong mixing bound, must exceed 3.
    pub nu: f64,
    pub l0: f64,
    pub n0: f64,
    pub s0: f64,
    pub b0: f64,
    pub psi: PsiKind,
    /// Activation dependent constant of the covering bound.
    pub c_sigma: f64,
    /// Hölder norm bound of the target, if known.
    pub holder_bound: Option<f64>,
    /// Output bound used in the strong mixing schedule, supplied by the caller.
    pub output_bound: Option<f64>,
    pub constants: ConstantsVariant,
}

impl Default for TheoryInputs {
    fn default() -> Self {
        Self {
            s: 7.0,
            d: 3,
            r: f64::INFINITY,
            lipschitz: Some(1.0),
            c: 1.0,
            gamma: 1.0,
            alpha_bar: 1.0,
            l1: 1.0,
            l2: 1.0,
            mu: 0.0,
            m: 1.0,
            nu: 3.01,
            l0: 1.0,
            n0: 1.0,
            s0: 1.0,
            b0: 1.0,
            psi: PsiKind::Theta,
            c_sigma: 1.0,
            holder_bound: None,
            output_bound: None,
            constants: ConstantsVariant::Proof,
        }
    }
}

impl TheoryInputs {
    /// `1 - 1/r`, equal to 1 for infinite `r`.
    pub fn moment_factor(&self) -> f64 {
        1.0 - 1.0 / self.r
    }

    /// `s / (s + d)`.
    pub fn smoothness_ratio(&self) -> f64 {
        self.s / (self.s + self.d as f64)
    }

    fn lipschitz_constant(&self) -> Result<f64> {
        match self.lipschitz {
            Some(k) if k > 0.0 && k.is_finite() => Ok(k),
            Some(k) => Err(Error::InvalidSpec(format!("loss Lipschitz constant must be positive, got {k}"))),
            None => Err(Error::InvalidSpec("the loss has no Lipschitz constant; bounds do not apply".into())),
        }
    }

    /// Positivity constraints that every calculator relies on.
    pub fn positivity_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v > 0.0) {
                out.push(format!("{name} must be > 0 (got {v})"));
            }
        };
        positive("s", self.s);
        positive("d", self.d as f64);
        positive("c", self.c);
        positive("gamma", self.gamma);
        positive("alpha_bar", self.alpha_bar);
        positive("M", self.m);
        positive("L0", self.l0);
        positive("N0", self.n0);
        positive("S0", self.s0);
        positive("B0", self.b0);
        positive("C_sigma", self.c_sigma);
        for (name, v) in [("L1", self.l1), ("L2", self.l2), ("mu", self.mu)] {
            if !(v >= 0.0) {
                out.push(format!("{name} must be >= 0 (got {v})"));
            }
        }
        out
    }

    fn require_valid(&self) -> Result<()> {
        let v = self.positivity_violations();
        if !v.is_empty() {
            return Err(Error::InvalidSpec(v.join("; ")));
        }
        if !(self.r > 1.0) {
            return Err(Error::InvalidSpec(format!("moment order r must exceed 1, got {}", self.r)));
        }
        Ok(())
    }
}

/// Effective sample size `⌊n / ⌈(8n/c)^{1/(γ+1)}⌉⌋` under geometric mixing.
pub fn n_alpha(n: u64, c: f64, gamma: f64) -> Result<u64> {
    if !(c > 0.0) || !(gamma > 0.0) {
        return Err(Error::InvalidSpec(format!("c and gamma must be positive, got c={c}, gamma={gamma}")));
    }
    let block = block_length(n, c, gamma);
    let m = n / block;
    if m < 1 {
        return Err(Error::TooSmallN(format!("n_alpha({n}) = 0")));
    }
    Ok(m)
}

/// `⌈(8n/c)^{1/(γ+1)}⌉`, snapping values within rounding error of an integer.
fn block_length(n: u64, c: f64, gamma: f64) -> u64 {
    let x = (8.0 * n as f64 / c).powf(1.0 / (gamma + 1.0));
    let nearest = x.round();
    let k = if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    (k as u64).max(1)
}

/// `T_β y`: clip to `[-β, β]`.
#[inline]
pub fn truncate(y: f64, beta: f64) -> f64 {
    if y.abs() <= beta {
        y
    } else {
        beta * y.signum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    /// Strong mixing, rates in the effective sample size.
    StrongMixing,
    /// ψ-weak dependence, rates in `n`.
    WeakDependence,
}

impl Theorem {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Theorem::StrongMixing),
            2 => Ok(Theorem::WeakDependence),
            _ => Err(Error::InvalidSpec(format!("theorem must be 1 or 2, got {i}"))),
        }
    }
}

/// Truncation level used when bounding the stochastic error.
///
/// Strong mixing: `max(F_n, n_alpha^{1/r})`; weak dependence:
/// `n^{(μ+1)/(r(2μ+3))}` (the output bound is not used).
pub fn beta_n(inputs: &TheoryInputs, n: u64, theorem: Theorem, output_bound: f64) -> Result<f64> {
    match theorem {
        Theorem::StrongMixing => {
            let m = n_alpha(n, inputs.c, inputs.gamma)? as f64;
            Ok(output_bound.max(m.powf(1.0 / inputs.r)))
        }
        Theorem::WeakDependence => Ok(weak_dependence_output_cap(inputs, n as f64)),
    }
}

/// `n^{(μ+1)/(r(2μ+3))}`.
fn weak_dependence_output_cap(inputs: &TheoryInputs, n: f64) -> f64 {
    let mu = inputs.mu;
    n.powf((mu + 1.0) / (inputs.r * (2.0 * mu + 3.0)))
}

/// Architecture caps `(L, N, S, B, F)` at a given sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchitectureSchedule {
    /// Sample size entering the formulas (`n_alpha` or `n`).
    pub m: f64,
    pub depth: f64,
    pub width: f64,
    pub sparsity: f64,
    pub sup_norm: f64,
    /// Output bound when one is determined (caller supplied or theorem imposed).
    pub output_bound: Option<f64>,
    pub depth_cap: usize,
    pub width_cap: usize,
    pub sparsity_cap: usize,
}

impl ArchitectureSchedule {
    /// The class `(⌈L⌉, ⌈N⌉, B, F, ⌊S⌋)`; `F = ∞` when no output bound is set.
    pub fn class_spec(&self) -> Result<ClassSpec> {
        let spec = ClassSpec {
            depth: self.depth_cap as f64,
            width: self.width_cap as f64,
            sup_norm: self.sup_norm,
            output_bound: self.output_bound.unwrap_or(f64::INFINITY),
            sparsity: self.sparsity_cap as f64,
            activation: Activation::Relu,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// The schedule formulas shared by both theorems, evaluated at sample size `m`:
///
/// `L = (1-1/r) s L₀/(s+d) log m`, `N = N₀ m^{(1-1/r) d/(s+d)}`,
/// `S = (1-1/r) s S₀/(s+d) m^{(1-1/r) d/(s+d)} log m`,
/// `B = B₀ m^{(1-1/r) 4s(d/s+1)/(s+d)}`.
pub fn schedule_kernel(inputs: &TheoryInputs, m: f64) -> ArchitectureSchedule {
    let s = inputs.s;
    let d = inputs.d as f64;
    let q = inputs.moment_factor();
    let log_m = m.ln();
    let growth = m.powf(q * d / (s + d));
    let depth = q * s * inputs.l0 / (s + d) * log_m;
    let width = inputs.n0 * growth;
    let sparsity = q * s * inputs.s0 / (s + d) * growth * log_m;
    let sup_norm = inputs.b0 * m.powf(q * 4.0 * s * (d / s + 1.0) / (s + d));
    ArchitectureSchedule {
        m,
        depth,
        width,
        sparsity,
        sup_norm,
        output_bound: None,
        depth_cap: (depth.ceil() as usize).max(1),
        width_cap: (width.ceil() as usize).max(1),
        sparsity_cap: sparsity.floor().max(0.0) as usize,
    }
}

/// Strong mixing schedule at `m = n_alpha(n)`; `F_n` is whatever the caller
/// put in `inputs.output_bound`.
pub fn schedule_thm1(inputs: &TheoryInputs, n: u64) -> Result<ArchitectureSchedule> {
    inputs.require_valid()?;
    let m = n_alpha(n, inputs.c, inputs.gamma)?;
    if m < 3 {
        return Err(Error::TooSmallN(format!("n_alpha({n}) = {m} < 3")));
    }
    let mut sched = schedule_kernel(inputs, m as f64);
    sched.output_bound = inputs.output_bound;
    Ok(sched)
}

/// Weak dependence schedule at `m = n`, with the output cap `n^{(μ+1)/(r(2μ+3))}`.
pub fn schedule_thm2(inputs: &TheoryInputs, n: u64) -> Result<ArchitectureSchedule> {
    inputs.require_valid()?;
    if n < 3 {
        return Err(Error::TooSmallN(format!("n = {n} < 3")));
    }
    let mut sched = schedule_kernel(inputs, n as f64);
    sched.output_bound = Some(weak_dependence_output_cap(inputs, n as f64));
    Ok(sched)
}

pub fn schedule(inputs: &TheoryInputs, n: u64, theorem: Theorem) -> Result<ArchitectureSchedule> {
    match theorem {
        Theorem::StrongMixing => schedule_thm1(inputs, n),
        Theorem::WeakDependence => schedule_thm2(inputs, n),
    }
}

/// Natural log of the covering number bound
/// `exp(2L(S+1) log(C_σ L (N+1) (B ∨ 1) / ε))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveringBound {
    pub log_value: f64,
    /// The log argument is at most 1, so the bound says nothing.
    pub vacuous: bool,
}

pub fn covering_bound(depth: f64, width: f64, sup_norm: f64, sparsity: f64, c_sigma: f64, epsilon: f64) -> Result<CoveringBound> {
    for (name, v) in [
        ("L", depth),
        ("N", width),
        ("B", sup_norm),
        ("S", sparsity),
        ("C_sigma", c_sigma),
        ("epsilon", epsilon),
    ] {
        if !(v > 0.0) {
            return Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")));
        }
    }
    let inner = (c_sigma / epsilon).ln() + depth.ln() + (width + 1.0).ln() + sup_norm.max(1.0).ln();
    Ok(CoveringBound {
        log_value: 2.0 * depth * (sparsity + 1.0) * inner,
        vacuous: inner <= 0.0,
    })
}

/// An evaluated bound with its additive terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound {
    pub value: f64,
    pub terms: Vec<f64>,
    /// Reasons the inputs fall outside the theorem's hypotheses.
    pub warnings: Vec<String>,
}

/// Sum of terms given as logarithms, exponentiated at the end.
fn sum_from_logs(log_terms: &[f64]) -> (f64, Vec<f64>) {
    let max = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let acc: f64 = log_terms.iter().map(|l| (l - max).exp()).sum();
    let value = (max + acc.ln()).exp();
    (value, log_terms.iter().map(|l| l.exp()).collect())
}

/// `C(K_ℓ, ᾱ, M) = (64/3) K_ℓ (1 + 4 e^{-2} ᾱ) + 6 K_ℓ M`.
pub fn strong_mixing_constant(k: f64, alpha_bar: f64, m: f64) -> f64 {
    64.0 / 3.0 * k * (1.0 + 4.0 * (-2.0f64).exp() * alpha_bar) + 6.0 * k * m
}

/// Strong mixing excess-risk bound at `m = n_alpha(n)`:
///
/// `((log m)^ν + K)/m^{(s/(s+d))(1-1/r)} + C(K, ᾱ, M)/m^{1-1/r} + 3K/m`.
pub fn bound_thm1(inputs: &TheoryInputs, n: u64) -> Result<Bound> {
    inputs.require_valid()?;
    let k = inputs.lipschitz_constant()?;
    let m = n_alpha(n, inputs.c, inputs.gamma)?;
    if m < 3 {
        return Err(Error::TooSmallN(format!("n_alpha({n}) = {m} < 3")));
    }
    let mut warnings = Vec::new();
    if !(inputs.nu > 3.0) {
        warnings.push(format!("nu = {} violates nu > 3", inputs.nu));
    }
    let log_m = (m as f64).ln();
    let q = inputs.moment_factor();
    let rate = inputs.smoothness_ratio() * q;
    let c = strong_mixing_constant(k, inputs.alpha_bar, inputs.m);
    let logs = [
        (log_m.powf(inputs.nu) + k).ln() - rate * log_m,
        c.ln() - q * log_m,
        (3.0 * k).ln() - log_m,
    ];
    let (value, terms) = sum_from_logs(&logs);
    Ok(Bound { value, terms, warnings })
}

/// `C₀ = 2^{(μ+1)/(2μ+3)} (a K² Ψ(1,1) L₁)^{(μ+2)/(2μ+3)} / (b K L₂ max(2^{3+μ}/Ψ(1,1), 1))^{1/(2μ+3)}`
/// with `(a, b) = (16, 4)` or `(32, 8)` depending on the constants variant.
/// For `(16, 4)` the prefactor collapses to `4K`.
pub fn weak_dependence_c0(inputs: &TheoryInputs) -> Result<f64> {
    let k = inputs.lipschitz_constant()?;
    if !(inputs.l2 > 0.0) {
        return Err(Error::InvalidSpec("L2 must be positive for the weak dependence constant".into()));
    }
    let mu = inputs.mu;
    let psi11 = inputs.psi.value(1.0, 1.0);
    let (a, b) = inputs.constants.prefactors();
    let denom = 2.0 * mu + 3.0;
    let c1 = a * k * k * psi11 * inputs.l1;
    let c2 = b * k * inputs.l2 * (2f64.powf(3.0 + mu) / psi11).max(1.0);
    Ok(2f64.powf((mu + 1.0) / denom) * c1.powf((mu + 2.0) / denom) / c2.powf(1.0 / denom))
}

/// `(1 - 1/r)(μ+1)/(2μ+3)`.
pub fn thm2_decay_exponent(inputs: &TheoryInputs) -> f64 {
    inputs.moment_factor() * (inputs.mu + 1.0) / (2.0 * inputs.mu + 3.0)
}

/// Smallest admissible smoothness for the weak dependence bound:
/// `max{d((r-1)(2μ+3)(μ+2)/(r(2μ+3) - (μ+1)) - 1), d((1-1/r)(2μ+3) - 1)}`.
pub fn thm2_smoothness_threshold(d: usize, r: f64, mu: f64) -> f64 {
    let d = d as f64;
    let q = 1.0 - 1.0 / r;
    let a = 2.0 * mu + 3.0;
    // numerator and denominator divided by r so that r = ∞ is a plain limit
    let first = d * (q * a * (mu + 2.0) / (a - (mu + 1.0) / r) - 1.0);
    let second = d * (q * a - 1.0);
    first.max(second)
}

/// Weak dependence excess-risk bound:
///
/// `C/n^{(1-1/r)(μ+1)/(2μ+3)} + 3K/n + 2K/n^{(s/(s+d))(1-1/r)}` with
/// `C = 2 + C₀ + 6KM`.
pub fn bound_thm2(inputs: &TheoryInputs, n: u64) -> Result<Bound> {
    inputs.require_valid()?;
    let k = inputs.lipschitz_constant()?;
    if n < 3 {
        return Err(Error::TooSmallN(format!("n = {n} < 3")));
    }
    let mut warnings = Vec::new();
    let threshold = thm2_smoothness_threshold(inputs.d, inputs.r, inputs.mu);
    if !(inputs.s > threshold) {
        warnings.push(format!("s = {} does not exceed the smoothness threshold {threshold}", inputs.s));
    }
    let c = 2.0 + weak_dependence_c0(inputs)? + 6.0 * k * inputs.m;
    let log_n = (n as f64).ln();
    let logs = [
        c.ln() - thm2_decay_exponent(inputs) * log_n,
        (3.0 * k).ln() - log_n,
        (2.0 * k).ln() - inputs.smoothness_ratio() * inputs.moment_factor() * log_n,
    ];
    let (value, terms) = sum_from_logs(&logs);
    Ok(Bound { value, terms, warnings })
}

/// `α(j) = ᾱ exp(-c j^γ)`.
pub fn alpha_mixing_coefficient(j: u64, alpha_bar: f64, c: f64, gamma: f64) -> f64 {
    alpha_bar * (-c * (j as f64).powf(gamma)).exp()
}

/// Checks `Σ_j (j+1)^k ε(j) <= L₁ L₂^k (k!)^μ` for `k = 0..=k_max` on a
/// supplied (finite) dependence coefficient sequence.
pub fn weak_dependence_condition_holds(eps: &[f64], l1: f64, l2: f64, mu: f64, k_max: u32) -> bool {
    let mut log_fact = 0.0;
    (0..=k_max).all(|k| {
        if k > 0 {
            log_fact += (k as f64).ln();
        }
        let lhs: f64 = eps
            .iter()
            .enumerate()
            .map(|(j, e)| ((j + 1) as f64).powi(k as i32) * e)
            .sum();
        let rhs = l1 * l2.powi(k as i32) * (mu * log_fact).exp();
        lhs <= rhs
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub holds: bool,
    pub detail: String,
}

/// Arithmetic checks of the hypotheses; nothing here is estimated from data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
    pub thm2_smoothness_threshold: f64,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{:<22} {:<4} {}", c.name, if c.holds { "ok" } else { "FAIL" }, c.detail)?;
        }
        Ok(())
    }
}

pub fn check_assumptions(inputs: &TheoryInputs) -> AssumptionReport {
    let mut checks = Vec::new();
    let lip = inputs.lipschitz_constant();
    checks.push(AssumptionCheck {
        name: "lipschitz_loss",
        holds: lip.is_ok(),
        detail: match &lip {
            Ok(k) => format!("K = {k}"),
            Err(e) => e.to_string(),
        },
    });
    checks.push(AssumptionCheck {
        name: "moment_order",
        holds: inputs.r > 1.0,
        detail: format!("r = {} (need r > 1)", inputs.r),
    });
    checks.push(AssumptionCheck {
        name: "log_exponent",
        holds: inputs.nu > 3.0,
        detail: format!("nu = {} (need nu > 3)", inputs.nu),
    });
    let threshold = thm2_smoothness_threshold(inputs.d, inputs.r, inputs.mu);
    checks.push(AssumptionCheck {
        name: "thm2_smoothness",
        holds: inputs.s > threshold,
        detail: format!("s = {} (need s > {threshold})", inputs.s),
    });
    let violations = inputs.positivity_violations();
    checks.push(AssumptionCheck {
        name: "positivity",
        holds: violations.is_empty(),
        detail: if violations.is_empty() {
            "all constants in range".into()
        } else {
            violations.join("; ")
        },
    });
    if let (Some(k), Some(f)) = (inputs.holder_bound, inputs.output_bound) {
        checks.push(AssumptionCheck {
            name: "output_bound",
            holds: f > k,
            detail: format!("F = {f}, Hoelder bound K = {k} (need F > K)"),
        });
    }
    AssumptionReport {
        checks,
        thm2_smoothness_threshold: threshold,
    }
}

/// One row of the `bound` table. Fields that are undefined at this `n`
/// (e.g. `n_alpha < 3`) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: u64,
    pub n_alpha: Option<u64>,
    pub schedule: Option<ArchitectureSchedule>,
    pub bound_thm1: Option<f64>,
    pub bound_thm2: Option<f64>,
}

pub fn bound_row(inputs: &TheoryInputs, n: u64, theorem: Theorem) -> BoundRow {
    BoundRow {
        n,
        n_alpha: n_alpha(n, inputs.c, inputs.gamma).ok(),
        schedule: schedule(inputs, n, theorem).ok(),
        bound_thm1: bound_thm1(inputs, n).ok().map(|b| b.value),
        bound_thm2: bound_thm2(inputs, n).ok().map(|b| b.value),
    }
}

/// Roughly log-spaced integers from `lo` to `hi` inclusive, `per_decade`
/// points per factor of ten, deduplicated.
pub fn log_grid(lo: u64, hi: u64, per_decade: u32) -> Vec<u64> {
    if lo == 0 || hi < lo || per_decade == 0 {
        return Vec::new();
    }
    let (a, b) = ((lo as f64).log10(), (hi as f64).log10());
    let steps = ((b - a) * per_decade as f64).round() as u64;
    let mut out: Vec<u64> = (0..=steps)
        .map(|i| {
            let e = if steps == 0 { a } else { a + (b - a) * i as f64 / steps as f64 };
            10f64.powf(e).round() as u64
        })
        .collect();
    out.dedup();
    out
}

pub fn write_bound_csv<W: Write>(rows: &[BoundRow], mut w: W) -> Result<()> {
    fn cell<T: fmt::Display>(v: Option<T>) -> String {
        v.map(|x| x.to_string()).unwrap_or_default()
    }
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(w, "n,n_alpha,L,N,S,B,bound_thm1,bound_thm2")?;
    for r in rows {
        let s = r.schedule.as_ref();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.n,
            cell(r.n_alpha),
            cell(s.map(|s| s.depth)),
            cell(s.map(|s| s.width)),
            cell(s.map(|s| s.sparsity)),
            cell(s.map(|s| s.sup_norm)),
            cell(r.bound_thm1),
            cell(r.bound_thm2),
        )?;
    }
    Ok(())
}
