//! Symmetric zero-mean jump laws and the two integrals every equity
//! expression consumes: the CDF `F(J)` and the lower partial first moment
//! `G(J) = ∫_{-∞}^{J} x f(x) dx`.
//!
//! Jump size is measured in units of cubeless win probability. Both laws are
//! parametrized by a tail-width `scale`: the standard deviation σ for the
//! Gaussian and 1/λ for the double-exponential (Laplace) law.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpKind {
    Gaussian,
    DoubleExponential,
}

impl std::str::FromStr for JumpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "normal" => Ok(JumpKind::Gaussian),
            "double-exponential" | "laplace" => Ok(JumpKind::DoubleExponential),
            other => Err(Error::invalid("kind", format!("unknown jump law `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpDistribution {
    kind: JumpKind,
    scale: f64,
}

impl JumpDistribution {
    pub fn new(kind: JumpKind, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid("scale", format!("must be positive, got {scale}")));
        }
        Ok(Self { kind, scale })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(JumpKind::Gaussian, sigma)
    }

    pub fn double_exponential(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda", format!("must be positive, got {lambda}")));
        }
        Self::new(JumpKind::DoubleExponential, 1.0 / lambda)
    }

    /// The law of the given kind whose expected absolute jump is `alpha`.
    pub fn from_volatility(kind: JumpKind, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
        }
        let scale = match kind {
            JumpKind::Gaussian => alpha / (2.0 / PI).sqrt(),
            JumpKind::DoubleExponential => alpha,
        };
        Self::new(kind, scale)
    }

    pub fn kind(&self) -> JumpKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same law with its scale multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.kind, self.scale * factor)
    }

    pub fn pdf(&self, j: f64) -> f64 {
        let s = self.scale;
        match self.kind {
            JumpKind::Gaussian => (-0.5 * (j / s).powi(2)).exp() / (s * (2.0 * PI).sqrt()),
            JumpKind::DoubleExponential => 0.5 / s * (-j.abs() / s).exp(),
        }
    }

    /// `F(J)`.
    pub fn cdf(&self, j: f64) -> f64 {
        let s = self.scale;
        match self.kind {
            JumpKind::Gaussian => 0.5 * libm::erfc(-j / s * FRAC_1_SQRT_2),
            JumpKind::DoubleExponential => {
                if j > 0.0 {
                    1.0 - 0.5 * (-j / s).exp()
                } else {
                    0.5 * (j / s).exp()
                }
            }
        }
    }

    /// `G(J)`; never positive, smallest at `J = 0` where it equals `-α/2`.
    pub fn partial_moment(&self, j: f64) -> f64 {
        let s = self.scale;
        match self.kind {
            JumpKind::Gaussian => -s / (2.0 * PI).sqrt() * (-0.5 * (j / s).powi(2)).exp(),
            JumpKind::DoubleExponential => -0.5 * (s + j.abs()) * (-j.abs() / s).exp(),
        }
    }

    /// Expected absolute jump, `α = ∫ |J| f(J) dJ`.
    pub fn jump_volatility(&self) -> f64 {
        match self.kind {
            JumpKind::Gaussian => self.scale * (2.0 / PI).sqrt(),
            JumpKind::DoubleExponential => self.scale,
        }
    }

    pub fn std_dev(&self) -> f64 {
        match self.kind {
            JumpKind::Gaussian => self.scale,
            JumpKind::DoubleExponential => self.scale * std::f64::consts::SQRT_2,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            JumpKind::Gaussian => {
                let z: f64 = rng.sample(StandardNormal);
                z * self.scale
            }
            JumpKind::DoubleExponential => {
                // Exponential magnitude with a fair sign; 1 - v lies in (0, 1].
                let v: f64 = rng.random();
                let magnitude = -self.scale * (1.0 - v).ln();
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
        }
    }
}
