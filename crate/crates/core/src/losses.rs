//! Loss functions in the prediction argument.
//!
//! L1 and Huber are globally Lipschitz (constants 1 and `delta`), the
//! squared loss is kept as the non-robust baseline and has no Lipschitz
//! constant.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default Huber threshold.
pub const DEFAULT_HUBER_DELTA: f64 = 1.345;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossFamily {
    L1,
    Huber,
    L2,
}

impl LossFamily {
    pub fn tag(self) -> &'static str {
        match self {
            LossFamily::L1 => "l1",
            LossFamily::Huber => "huber",
            LossFamily::L2 => "l2",
        }
    }
}

/// A loss family plus its parameter. Serialized as its tag: `l1`, `l2`,
/// `huber` (default delta) or `huber:<delta>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LossSpec {
    pub family: LossFamily,
    /// Huber threshold; ignored by the other families.
    pub delta: f64,
}

impl LossSpec {
    pub const L1: LossSpec = LossSpec {
        family: LossFamily::L1,
        delta: DEFAULT_HUBER_DELTA,
    };
    pub const L2: LossSpec = LossSpec {
        family: LossFamily::L2,
        delta: DEFAULT_HUBER_DELTA,
    };

    pub fn huber(delta: f64) -> Result<Self> {
        let spec = LossSpec {
            family: LossFamily::Huber,
            delta,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.family == LossFamily::Huber && !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "huber delta must be positive and finite, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    pub fn tag(&self) -> String {
        match self.family {
            LossFamily::Huber if self.delta != DEFAULT_HUBER_DELTA => format!("huber:{}", self.delta),
            f => f.tag().to_string(),
        }
    }

    /// Loss value `ℓ(y, y')` for prediction `y` and target `y'`.
    pub fn loss(&self, y: f64, target: f64) -> Result<f64> {
        if !y.is_finite() || !target.is_finite() {
            return Err(Error::Numeric(format!("loss({y}, {target})")));
        }
        Ok(self.loss_unchecked(y - target))
    }

    /// Loss as a function of the residual `y - y'`, no finiteness check.
    #[inline]
    pub fn loss_unchecked(&self, residual: f64) -> f64 {
        let a = residual.abs();
        match self.family {
            LossFamily::L1 => a,
            LossFamily::Huber => {
                if a <= self.delta {
                    0.5 * residual * residual
                } else {
                    self.delta * a - 0.5 * self.delta * self.delta
                }
            }
            LossFamily::L2 => residual * residual,
        }
    }

    /// Subgradient of the loss in the prediction argument.
    pub fn dloss_dpred(&self, y: f64, target: f64) -> Result<f64> {
        if !y.is_finite() || !target.is_finite() {
            return Err(Error::Numeric(format!("dloss_dpred({y}, {target})")));
        }
        Ok(self.derivative_unchecked(y - target))
    }

    /// Subgradient as a function of the residual. Zero at a zero residual for L1.
    #[inline]
    pub fn derivative_unchecked(&self, residual: f64) -> f64 {
        match self.family {
            LossFamily::L1 => sign(residual),
            LossFamily::Huber => {
                if residual.abs() <= self.delta {
                    residual
                } else {
                    self.delta * sign(residual)
                }
            }
            LossFamily::L2 => 2.0 * residual,
        }
    }

    /// Global Lipschitz constant in the prediction argument, `None` for L2.
    pub fn lipschitz_constant(&self) -> Option<f64> {
        match self.family {
            LossFamily::L1 => Some(1.0),
            LossFamily::Huber => Some(self.delta),
            LossFamily::L2 => None,
        }
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl TryFrom<String> for LossSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<LossSpec> for String {
    fn from(l: LossSpec) -> Self {
        l.tag()
    }
}

impl FromStr for LossFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(LossFamily::L1),
            "huber" => Ok(LossFamily::Huber),
            "l2" => Ok(LossFamily::L2),
            other => Err(Error::InvalidSpec(format!(
                "unknown loss '{other}' (expected l1, huber or l2)"
            ))),
        }
    }
}

impl FromStr for LossSpec {
    type Err = Error;

    /// Parses `l1`, `l2`, `huber` or `huber:<delta>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, delta) = match s.split_once(':') {
            Some((name, d)) => {
                let delta = d
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidSpec(format!("bad huber delta '{d}'")))?;
                (name, Some(delta))
            }
            None => (s, None),
        };
        let family: LossFamily = name.parse()?;
        let spec = LossSpec {
            family,
            delta: delta.unwrap_or(DEFAULT_HUBER_DELTA),
        };
        spec.validate()?;
        Ok(spec)
    }
}
