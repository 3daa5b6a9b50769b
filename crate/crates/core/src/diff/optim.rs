//! First-order optimizer over flattened parameters.

use serde::{Deserialize, Serialize};

use super::params::{Gradient, ParamVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    /// Adam: bias-corrected first and second moment estimates.
    #[default]
    Adam,
    /// Plain gradient descent.
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Adam,
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return bad(format!("learning rate must be finite and >= 0, got {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("optimizer betas must lie in [0, 1)".into());
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return bad(format!("optimizer eps must be positive, got {}", self.eps));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub config: OptimizerConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, len: usize) -> Self {
        Self {
            config,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }
}

/// One update of `p` along `-g`.
pub fn step(
    state: &OptimizerState,
    p: &ParamVector,
    g: &Gradient,
    lr: f64,
) -> Result<(OptimizerState, ParamVector)> {
    let x = p.to_flat();
    let grad = g.to_flat();
    if grad.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: grad.len(),
        });
    }
    if state.m.len() != x.len() || state.v.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: state.m.len(),
        });
    }
    if !(lr.is_finite() && lr >= 0.0) {
        return Err(Error::InvalidParameter(format!("learning rate must be >= 0, got {lr}")));
    }
    let cfg = state.config;
    let mut next = state.clone();
    next.t += 1;
    let mut out = x.clone();
    match cfg.kind {
        OptimizerKind::Sgd => {
            for (o, gi) in out.iter_mut().zip(&grad) {
                *o -= lr * gi;
            }
        }
        OptimizerKind::Adam => {
            let t = next.t as i32;
            let bc1 = 1.0 - cfg.beta1.powi(t);
            let bc2 = 1.0 - cfg.beta2.powi(t);
            for i in 0..out.len() {
                let gi = grad[i];
                next.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * gi;
                next.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * gi * gi;
                let m_hat = next.m[i] / bc1;
                let v_hat = next.v[i] / bc2;
                out[i] -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
            }
        }
    }
    Ok((next, p.with_flat(&out)?))
}
