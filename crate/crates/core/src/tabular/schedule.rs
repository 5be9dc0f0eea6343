use std::fmt;

use crate::error::{Error, Result};

/// Learning-rate sequence indexed by the global environment step `t >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearningRateSchedule {
    Constant(f64),
    /// `alpha_t = h / (M (t + t0))`, a Robbins-Monro sequence whose
    /// effective rate after `M` reuses stays close to `h / (t + t0)`.
    Polynomial {
        h: f64,
        t0: f64,
        m: usize,
    },
}

impl LearningRateSchedule {
    pub fn constant(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!(
                "constant learning rate must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(LearningRateSchedule::Constant(alpha))
    }

    /// Requires `h, t0 > 0` and `h <= M t0` so that `alpha_0 <= 1`.
    pub fn polynomial(h: f64, t0: f64, m: usize) -> Result<Self> {
        if !(h > 0.0 && t0 > 0.0 && h.is_finite() && t0.is_finite()) {
            return Err(Error::invalid(format!(
                "polynomial schedule needs h, t0 > 0, got h={h} t0={t0}"
            )));
        }
        if m < 1 {
            return Err(Error::invalid("SMR ratio M must be at least 1"));
        }
        if h > m as f64 * t0 {
            return Err(Error::invalid(format!(
                "polynomial schedule starts above 1: h / (M t0) = {}",
                h / (m as f64 * t0)
            )));
        }
        Ok(LearningRateSchedule::Polynomial { h, t0, m })
    }

    /// Parses `constant:<alpha>` or `poly:<h>:<t0>`; `m` is the SMR ratio
    /// the polynomial form divides by.
    pub fn parse(spec: &str, m: usize) -> Result<Self> {
        let parts: Vec<&str> = spec.trim().split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number `{s}` in schedule `{spec}`")))
        };
        match parts.as_slice() {
            ["constant", a] => Self::constant(num(a)?),
            ["poly", h, t0] => Self::polynomial(num(h)?, num(t0)?, m),
            _ => Err(Error::Config(format!(
                "schedule must be `constant:<alpha>` or `poly:<h>:<t0>`, got `{spec}`"
            ))),
        }
    }

    #[inline]
    pub fn rate(&self, t: u64) -> f64 {
        match *self {
            LearningRateSchedule::Constant(a) => a,
            LearningRateSchedule::Polynomial { h, t0, m } => h / (m as f64 * (t as f64 + t0)),
        }
    }
}

impl fmt::Display for LearningRateSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearningRateSchedule::Constant(a) => write!(f, "constant:{a}"),
            LearningRateSchedule::Polynomial { h, t0, .. } => write!(f, "poly:{h}:{t0}"),
        }
    }
}
