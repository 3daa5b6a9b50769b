//! Unconstrained parameter vectors and their constrained views.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::{project, DiffKernel, Projection};
use super::real::{softmax, Real};
use crate::error::{Error, Result};
use crate::geometry::{BallPoint, Curvature};
use crate::kernels::{KernelConfig, KernelVariant, RadialCoeffs};
use crate::rkhs::MultiplierParams;

/// Learnable quantities, all unconstrained.
///
/// `head` holds task-specific extras (the affine semantic map for zero-shot
/// learning); it is empty otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params<R> {
    pub pole_raws: Vec<Vec<R>>,
    pub weight_logits: Vec<R>,
    pub radial_raws: Vec<R>,
    pub log_c: R,
    pub log_bandwidth: R,
    #[serde(default)]
    pub head: Vec<R>,
}

pub type ParamVector = Params<f64>;

/// Which groups of [`Params`] the optimizer may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Trainable {
    pub poles: bool,
    pub weights: bool,
    pub radial: bool,
    pub curvature: bool,
    pub bandwidth: bool,
    pub head: bool,
}

impl Default for Trainable {
    fn default() -> Self {
        Self {
            poles: true,
            weights: true,
            radial: true,
            curvature: false,
            bandwidth: false,
            head: true,
        }
    }
}

/// Gradient with the shape of [`ParamVector`]. Frozen scalar groups carry
/// `None`; frozen vector groups are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    pub pole_raws: Vec<Vec<f64>>,
    pub weight_logits: Vec<f64>,
    pub radial_raws: Vec<f64>,
    pub log_c: Option<f64>,
    pub log_bandwidth: Option<f64>,
    pub head: Vec<f64>,
}

impl<R: Real> Params<R> {
    pub fn map<S>(&self, mut f: impl FnMut(Group, R) -> S) -> Params<S> {
        Params {
            pole_raws: self
                .pole_raws
                .iter()
                .map(|p| p.iter().map(|&x| f(Group::Poles, x)).collect())
                .collect(),
            weight_logits: self.weight_logits.iter().map(|&x| f(Group::Weights, x)).collect(),
            radial_raws: self.radial_raws.iter().map(|&x| f(Group::Radial, x)).collect(),
            log_c: f(Group::Curvature, self.log_c),
            log_bandwidth: f(Group::Bandwidth, self.log_bandwidth),
            head: self.head.iter().map(|&x| f(Group::Head, x)).collect(),
        }
    }

    pub fn num_poles(&self) -> usize {
        self.pole_raws.len()
    }

    pub fn dim(&self) -> usize {
        self.pole_raws.first().map_or(0, Vec::len)
    }

    pub fn curvature(&self) -> R {
        self.log_c.exp()
    }

    /// Kernel view with every constraint realized.
    pub fn kernel(&self, spec: &KernelSpec) -> DiffKernel<R> {
        let c = self.curvature();
        DiffKernel {
            variant: spec.variant,
            c,
            poles: self
                .pole_raws
                .iter()
                .map(|raw| project(raw, c, Projection::Exp0))
                .collect(),
            weights: softmax(&self.weight_logits),
            alphas: self.radial_raws.iter().map(|&r| r * r).collect(),
            offset: spec.offset,
            degree: spec.degree,
            bandwidth: self.log_bandwidth.exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Poles,
    Weights,
    Radial,
    Curvature,
    Bandwidth,
    Head,
}

impl Trainable {
    pub fn includes(&self, group: Group) -> bool {
        match group {
            Group::Poles => self.poles,
            Group::Weights => self.weights,
            Group::Radial => self.radial,
            Group::Curvature => self.curvature,
            Group::Bandwidth => self.bandwidth,
            Group::Head => self.head,
        }
    }
}

/// Non-learned kernel hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub variant: KernelVariant,
    pub offset: f64,
    pub degree: u32,
}

impl KernelSpec {
    pub fn new(variant: KernelVariant) -> Self {
        Self {
            variant,
            offset: 1.0,
            degree: 2,
        }
    }
}

/// Constrained view of a [`ParamVector`].
#[derive(Debug, Clone, PartialEq)]
pub struct Materialized {
    /// `None` when there are no poles.
    pub multiplier: Option<MultiplierParams>,
    /// `None` when there are no radial raws or all of them are zero.
    pub radial: Option<RadialCoeffs>,
    pub weights: Vec<f64>,
    pub alphas: Vec<f64>,
    pub curvature: Curvature,
    pub bandwidth: f64,
}

impl ParamVector {
    /// Zero raws: poles at the origin, uniform weights, `c = 1`, `tau = 1`.
    pub fn zeros(m: usize, dim: usize, radial_terms: usize) -> Self {
        Self {
            pole_raws: vec![vec![0.0; dim]; m],
            weight_logits: vec![0.0; m],
            radial_raws: vec![0.0; radial_terms],
            log_c: 0.0,
            log_bandwidth: 0.0,
            head: Vec::new(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|x| x.is_finite())
    }

    pub fn len(&self) -> usize {
        self.pole_raws.iter().map(Vec::len).sum::<usize>()
            + self.weight_logits.len()
            + self.radial_raws.len()
            + 2
            + self.head.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Order: pole raws (row-major), logits, radial raws, `log_c`,
    /// `log_bandwidth`, head.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        self.map(|_, x| out.push(x));
        out
    }

    pub fn groups(&self) -> Vec<Group> {
        let mut out = Vec::with_capacity(self.len());
        self.map(|g, _| out.push(g));
        out
    }

    /// Same shape as `self`, values from `flat`.
    pub fn with_flat(&self, flat: &[f64]) -> Result<Self> {
        if flat.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: flat.len(),
            });
        }
        let mut it = flat.iter().copied();
        Ok(self.map(|_, _| it.next().expect("length checked")))
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.pole_raws.len() == other.pole_raws.len()
            && self
                .pole_raws
                .iter()
                .zip(&other.pole_raws)
                .all(|(a, b)| a.len() == b.len())
            && self.weight_logits.len() == other.weight_logits.len()
            && self.radial_raws.len() == other.radial_raws.len()
            && self.head.len() == other.head.len()
    }

    /// Realizes poles `a_i = exp0(raw_i)`, `w = softmax(logits)`,
    /// `alpha_l = raw_l^2` and `c = exp(log_c)`.
    pub fn materialize(&self) -> Result<Materialized> {
        if !self.is_finite() {
            return Err(Error::InvalidParameter("non-finite parameter".into()));
        }
        if self.weight_logits.len() != self.pole_raws.len() {
            return Err(Error::DimensionMismatch {
                expected: self.pole_raws.len(),
                got: self.weight_logits.len(),
            });
        }
        let curvature = Curvature::new(self.log_c.exp())?;
        let c = curvature.value();
        let multiplier = if self.pole_raws.is_empty() {
            None
        } else {
            let poles = self
                .pole_raws
                .iter()
                .map(|raw| {
                    let coords = project(raw, c, Projection::Exp0)
                        .into_iter()
                        .map(|x| Complex64::new(x, 0.0))
                        .collect();
                    BallPoint::from_op(coords, curvature)
                })
                .collect::<Result<Vec<_>>>()?;
            Some(MultiplierParams::new(poles, self.weight_logits.clone())?)
        };
        let alphas: Vec<f64> = self.radial_raws.iter().map(|r| r * r).collect();
        let radial = if self.radial_raws.len() >= 2 && alphas.iter().any(|a| *a > 0.0) {
            Some(RadialCoeffs::new(self.radial_raws.clone())?)
        } else {
            None
        };
        Ok(Materialized {
            multiplier,
            radial,
            weights: softmax(&self.weight_logits),
            alphas,
            curvature,
            bandwidth: self.log_bandwidth.exp(),
        })
    }

    /// Equivalent configuration for the complex-coordinate API.
    pub fn kernel_config(&self, spec: &KernelSpec) -> Result<KernelConfig> {
        let m = self.materialize()?;
        let need_params = || {
            m.multiplier
                .clone()
                .ok_or_else(|| Error::InvalidConfig(format!("{} needs at least one pole", spec.variant)))
        };
        let config = match spec.variant {
            KernelVariant::Da => KernelConfig::Da {
                curvature: m.curvature,
            },
            KernelVariant::Ahl => KernelConfig::Ahl {
                params: need_params()?,
            },
            KernelVariant::AhPoly => KernelConfig::AhPoly {
                params: need_params()?,
                offset: spec.offset,
                degree: spec.degree,
            },
            KernelVariant::AhRbf => KernelConfig::AhRbf {
                params: need_params()?,
                bandwidth: m.bandwidth,
            },
            KernelVariant::AhLap => KernelConfig::AhLap {
                params: need_params()?,
                bandwidth: m.bandwidth,
            },
            KernelVariant::Base => KernelConfig::Base {
                params: need_params()?,
            },
            KernelVariant::AhRad => KernelConfig::AhRad {
                params: need_params()?,
                radial: m.radial.clone().ok_or_else(|| {
                    Error::InvalidConfig("ahrad needs a nonzero radial coefficient".into())
                })?,
            },
        };
        config.validate()?;
        Ok(config)
    }
}

impl Gradient {
    /// Flattened in [`ParamVector::to_flat`] order; frozen scalars become 0.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.pole_raws.iter().flatten().copied().collect();
        out.extend(&self.weight_logits);
        out.extend(&self.radial_raws);
        out.push(self.log_c.unwrap_or(0.0));
        out.push(self.log_bandwidth.unwrap_or(0.0));
        out.extend(&self.head);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|x| x.is_finite())
    }

    pub fn zeros_like(p: &ParamVector, trainable: Trainable) -> Self {
        Self {
            pole_raws: vec![vec![0.0; p.dim()]; p.num_poles()],
            weight_logits: vec![0.0; p.weight_logits.len()],
            radial_raws: vec![0.0; p.radial_raws.len()],
            log_c: trainable.curvature.then_some(0.0),
            log_bandwidth: trainable.bandwidth.then_some(0.0),
            head: vec![0.0; p.head.len()],
        }
    }
}
