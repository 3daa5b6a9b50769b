//! Real-coordinate kernel evaluation, generic over [`Real`] so the same code
//! runs on plain floats and on the gradient tape.
//!
//! The multiplier uses the form
//! `s (c(a.z)/(1+s) a - z) / (1 - (c a.z)^2)` with `s = sqrt(1 - c||a||^2)`,
//! which equals the projector form but has no `1/||a||^2` singularity.

use serde::{Deserialize, Serialize};

use super::real::{dot, Real};
use crate::kernels::KernelVariant;

/// Upper bound on `sqrt(c)||z||` for points produced by [`project`].
pub const SATURATION: f64 = 1.0 - 2e-9;

/// How raw features enter the ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Projection {
    #[default]
    Exp0,
    Clip { beta: f64, eps: f64 },
}

/// `exp0` (saturated at [`SATURATION`]) or the clipped projection.
pub fn project<R: Real>(x: &[R], c: R, projection: Projection) -> Vec<R> {
    let n2 = dot(x, x);
    match projection {
        Projection::Exp0 => {
            let u = c * n2;
            let scale = if u.value() < 1e-8 {
                // tanh(r)/r = 1 - r^2/3 + 2r^4/15 - ...
                (u * (u * (2.0 / 15.0) - 1.0 / 3.0)) + 1.0
            } else {
                let r = u.sqrt();
                let t = r.tanh();
                if t.value() > SATURATION {
                    R::from_f64(SATURATION) / r
                } else {
                    t / r
                }
            };
            x.iter().map(|&v| v * scale).collect()
        }
        Projection::Clip { beta, eps } => {
            if n2.value() == 0.0 {
                return x.to_vec();
            }
            let r = (c * n2).sqrt();
            if r.value() > 1.0 - eps {
                let factor = R::from_f64(beta * (1.0 - eps)) / r;
                x.iter().map(|&v| v * factor).collect()
            } else {
                x.iter().map(|&v| v * beta).collect()
            }
        }
    }
}

/// How class scores are derived from the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    /// `-D` with `D` the squared distance induced by the kernel; for the
    /// exponential kernels `D = -ln k`.
    #[default]
    Distance,
    /// `k`, or `ln k` for the exponential kernels.
    Similarity,
}

/// A point with its multiplier image and self-similarities cached.
#[derive(Debug, Clone)]
pub struct Rep<R> {
    pub z: Vec<R>,
    pub b: Vec<R>,
    /// de Branges–Rovnyak value `k(z, z)`.
    pub self_dbr: R,
    /// Kernel value of the configured variant at `(z, z)`.
    pub self_value: R,
}

#[derive(Debug, Clone)]
pub struct DiffKernel<R> {
    pub variant: KernelVariant,
    pub c: R,
    pub poles: Vec<Vec<R>>,
    pub weights: Vec<R>,
    pub alphas: Vec<R>,
    pub offset: f64,
    pub degree: u32,
    pub bandwidth: R,
}

impl<R: Real> DiffKernel<R> {
    /// `b(z)`; identically zero for the Drury–Arveson kernel.
    pub fn multiplier(&self, z: &[R]) -> Vec<R> {
        let mut out = vec![R::zero(); z.len()];
        if self.variant == KernelVariant::Da {
            return out;
        }
        for (a, &w) in self.poles.iter().zip(&self.weights) {
            let az = dot(a, z);
            let t = self.c * az;
            let s = (self.c * dot(a, a)).one_minus().sqrt();
            let coef = t / (s + 1.0);
            let scale = w * s / (t * t).one_minus();
            for ((o, &ak), &zk) in out.iter_mut().zip(a).zip(z) {
                *o = *o + (coef * ak - zk) * scale;
            }
        }
        out
    }

    pub fn prepare(&self, z: Vec<R>) -> Rep<R> {
        let b = self.multiplier(&z);
        let self_dbr = self.dbr_raw(&z, &b, &z, &b);
        let mut rep = Rep {
            z,
            b,
            self_dbr,
            self_value: self_dbr,
        };
        rep.self_value = match self.variant {
            KernelVariant::Da | KernelVariant::Ahl => self_dbr,
            KernelVariant::AhPoly => (self_dbr + self.offset).powi(self.degree as i32),
            KernelVariant::AhRbf | KernelVariant::AhLap | KernelVariant::Base => R::one(),
            KernelVariant::AhRad => self.series(R::one()),
        };
        rep
    }

    fn dbr_raw(&self, zi: &[R], bi: &[R], zj: &[R], bj: &[R]) -> R {
        (self.c * dot(bi, bj)).one_minus() / (self.c * dot(zi, zj)).one_minus()
    }

    pub fn dbr(&self, a: &Rep<R>, b: &Rep<R>) -> R {
        self.dbr_raw(&a.z, &a.b, &b.z, &b.b)
    }

    /// `k(a,a) + k(b,b) - 2k(a,b)` of the de Branges–Rovnyak kernel, clamped at 0.
    pub fn dbr_distance_sq(&self, a: &Rep<R>, b: &Rep<R>) -> R {
        clamp_nonneg(a.self_dbr + b.self_dbr - self.dbr(a, b) * 2.0)
    }

    fn series(&self, x: R) -> R {
        self.alphas
            .iter()
            .rev()
            .fold(R::zero(), |acc, &alpha| acc * x + alpha)
    }

    fn base(&self, a: &Rep<R>, b: &Rep<R>) -> R {
        let k = self.dbr(a, b);
        k * k / (a.self_dbr * b.self_dbr)
    }

    /// Kernel value of the configured variant.
    pub fn value(&self, a: &Rep<R>, b: &Rep<R>) -> R {
        match self.variant {
            KernelVariant::Da | KernelVariant::Ahl => self.dbr(a, b),
            KernelVariant::AhPoly => (self.dbr(a, b) + self.offset).powi(self.degree as i32),
            KernelVariant::AhRbf | KernelVariant::AhLap => (-self.log_distance(a, b)).exp(),
            KernelVariant::Base => self.base(a, b),
            KernelVariant::AhRad => self.series(self.base(a, b)),
        }
    }

    /// `-ln k` for the exponential kernels.
    fn log_distance(&self, a: &Rep<R>, b: &Rep<R>) -> R {
        let d = self.dbr_distance_sq(a, b);
        match self.variant {
            KernelVariant::AhRbf => d / (self.bandwidth * self.bandwidth * 2.0),
            KernelVariant::AhLap => d.sqrt() / self.bandwidth,
            _ => unreachable!("log distance is only defined for exponential kernels"),
        }
    }

    /// Dissimilarity used in distance mode.
    pub fn distance(&self, a: &Rep<R>, b: &Rep<R>) -> R {
        if self.variant.is_exponential() {
            self.log_distance(a, b)
        } else {
            clamp_nonneg(a.self_value + b.self_value - self.value(a, b) * 2.0)
        }
    }

    pub fn score(&self, mode: ScoreMode, a: &Rep<R>, b: &Rep<R>) -> R {
        match mode {
            ScoreMode::Distance => -self.distance(a, b),
            ScoreMode::Similarity if self.variant.is_exponential() => -self.log_distance(a, b),
            ScoreMode::Similarity => self.value(a, b),
        }
    }
}

fn clamp_nonneg<R: Real>(x: R) -> R {
    if x.value() < 0.0 {
        R::zero()
    } else {
        x
    }
}
