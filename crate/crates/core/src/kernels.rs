//! Adaptive hyperbolic kernel family and Gram assembly.
//!
//! Every adaptive variant is a function of the de Branges–Rovnyak kernel
//! `k = dbr_kernel(params, ., .)`:
//!
//! | variant | value |
//! |---------|-------|
//! | AHL     | `k` |
//! | AHPoly  | `(k + b)^d`, integer `d >= 1` |
//! | AHRBF   | `exp(-||k_i - k_j||^2 / (2 tau^2))` |
//! | AHLap   | `exp(-||k_i - k_j|| / tau)` |
//! | Base    | `|k_ij|^2 / (k_ii k_jj)` |
//! | AHRad   | `sum_{l=0}^{K} alpha_l base^l` |
//!
//! plus the plain Drury–Arveson kernel (`Da`) for reference.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BallPoint, Curvature};
use crate::rkhs::{
    da_raw, dbr_kernel, dbr_raw, induced_distance_sq, multiplier_raw, KernelValue,
    MultiplierParams,
};

/// Default AHRad truncation order.
pub const DEFAULT_TRUNCATION: usize = 50;

/// Default upper bound on Gram matrix size.
pub const DEFAULT_MAX_GRAM: usize = 1024;

/// Nonnegative power-series coefficients `alpha_l = raw_l^2`, `l = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCoeffs {
    raw: Vec<f64>,
}

impl RadialCoeffs {
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::InvalidParameter(
                "radial series needs truncation order K >= 1".into(),
            ));
        }
        if raw.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidParameter("non-finite radial coefficient".into()));
        }
        if raw.iter().all(|r| *r == 0.0) {
            return Err(Error::InvalidParameter(
                "at least one radial coefficient must be positive".into(),
            ));
        }
        Ok(Self { raw })
    }

    pub fn from_alphas(alphas: &[f64]) -> Result<Self> {
        if alphas.iter().any(|a| *a < 0.0) {
            return Err(Error::InvalidParameter("radial coefficients must be >= 0".into()));
        }
        Self::new(alphas.iter().map(|a| a.sqrt()).collect())
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.raw.iter().map(|r| r * r).collect()
    }

    pub fn truncation(&self) -> usize {
        self.raw.len() - 1
    }

    /// Horner evaluation of `sum_l alpha_l x^l`.
    pub fn series(&self, x: f64) -> f64 {
        self.raw.iter().rev().fold(0.0, |acc, r| acc * x + r * r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelVariant {
    Da,
    Ahl,
    AhPoly,
    AhRbf,
    AhLap,
    Base,
    AhRad,
}

impl KernelVariant {
    pub const ADAPTIVE: [KernelVariant; 5] = [
        KernelVariant::Ahl,
        KernelVariant::AhPoly,
        KernelVariant::AhRbf,
        KernelVariant::AhLap,
        KernelVariant::AhRad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelVariant::Da => "da",
            KernelVariant::Ahl => "ahl",
            KernelVariant::AhPoly => "ahpoly",
            KernelVariant::AhRbf => "ahrbf",
            KernelVariant::AhLap => "ahlap",
            KernelVariant::Base => "base",
            KernelVariant::AhRad => "ahrad",
        }
    }

    /// Kernels of the form `exp(-distance)`.
    pub fn is_exponential(self) -> bool {
        matches!(self, KernelVariant::AhRbf | KernelVariant::AhLap)
    }
}

impl fmt::Display for KernelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fully specified kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelConfig {
    Da { curvature: Curvature },
    Ahl { params: MultiplierParams },
    AhPoly { params: MultiplierParams, offset: f64, degree: u32 },
    AhRbf { params: MultiplierParams, bandwidth: f64 },
    AhLap { params: MultiplierParams, bandwidth: f64 },
    Base { params: MultiplierParams },
    AhRad { params: MultiplierParams, radial: RadialCoeffs },
}

/// Per-point quantities shared by every kernel evaluation involving the point.
#[derive(Debug, Clone)]
pub struct Representer {
    point: BallPoint,
    image: Vec<Complex64>,
    self_dbr: f64,
}

impl Representer {
    pub fn point(&self) -> &BallPoint {
        &self.point
    }
}

impl KernelConfig {
    pub fn variant(&self) -> KernelVariant {
        match self {
            KernelConfig::Da { .. } => KernelVariant::Da,
            KernelConfig::Ahl { .. } => KernelVariant::Ahl,
            KernelConfig::AhPoly { .. } => KernelVariant::AhPoly,
            KernelConfig::AhRbf { .. } => KernelVariant::AhRbf,
            KernelConfig::AhLap { .. } => KernelVariant::AhLap,
            KernelConfig::Base { .. } => KernelVariant::Base,
            KernelConfig::AhRad { .. } => KernelVariant::AhRad,
        }
    }

    pub fn multiplier(&self) -> Option<&MultiplierParams> {
        match self {
            KernelConfig::Da { .. } => None,
            KernelConfig::Ahl { params }
            | KernelConfig::AhPoly { params, .. }
            | KernelConfig::AhRbf { params, .. }
            | KernelConfig::AhLap { params, .. }
            | KernelConfig::Base { params }
            | KernelConfig::AhRad { params, .. } => Some(params),
        }
    }

    pub fn curvature(&self) -> Curvature {
        match self {
            KernelConfig::Da { curvature } => *curvature,
            other => other.multiplier().expect("adaptive kernel").curvature(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelConfig::AhPoly { offset, degree, .. } => {
                if !(offset.is_finite() && *offset > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "polynomial offset must be positive, got {offset}"
                    )));
                }
                if *degree == 0 {
                    return Err(Error::InvalidConfig("polynomial degree must be >= 1".into()));
                }
            }
            KernelConfig::AhRbf { bandwidth, .. } | KernelConfig::AhLap { bandwidth, .. } => {
                if !(bandwidth.is_finite() && *bandwidth > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "bandwidth must be positive, got {bandwidth}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn ensure_point(&self, z: &BallPoint) -> Result<()> {
        match self.multiplier() {
            Some(params) => params.ensure_compatible(z),
            None => {
                let c = self.curvature();
                if z.curvature() != c {
                    Err(Error::CurvatureMismatch(c.value(), z.curvature().value()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn prepare(&self, z: &BallPoint) -> Result<Representer> {
        self.ensure_point(z)?;
        let c = self.curvature().value();
        let image = match self.multiplier() {
            Some(params) => multiplier_raw(params, z.coords()),
            None => Vec::new(),
        };
        let self_dbr = match self.multiplier() {
            Some(_) => dbr_raw(z.coords(), &image, z.coords(), &image, c).re,
            None => da_raw(z.coords(), z.coords(), c).re,
        };
        Ok(Representer {
            point: z.clone(),
            image,
            self_dbr,
        })
    }

    fn pair_dbr(&self, a: &Representer, b: &Representer) -> Complex64 {
        let c = self.curvature().value();
        match self.multiplier() {
            Some(_) => dbr_raw(a.point.coords(), &a.image, b.point.coords(), &b.image, c),
            None => da_raw(a.point.coords(), b.point.coords(), c),
        }
    }

    fn base_prepared(&self, a: &Representer, b: &Representer) -> f64 {
        self.pair_dbr(a, b).norm_sqr() / (a.self_dbr * b.self_dbr)
    }

    pub fn evaluate_prepared(&self, a: &Representer, b: &Representer) -> Result<KernelValue> {
        a.point.ensure_compatible(&b.point)?;
        let real = |x: f64| Complex64::new(x, 0.0);
        Ok(match self {
            KernelConfig::Da { .. } | KernelConfig::Ahl { .. } => self.pair_dbr(a, b),
            KernelConfig::AhPoly { offset, degree, .. } => {
                (self.pair_dbr(a, b) + offset).powu(*degree)
            }
            KernelConfig::AhRbf { bandwidth, .. } => {
                let d = induced_distance_sq(a.self_dbr, b.self_dbr, self.pair_dbr(a, b).re)?;
                real((-d / (2.0 * bandwidth * bandwidth)).exp())
            }
            KernelConfig::AhLap { bandwidth, .. } => {
                let d = induced_distance_sq(a.self_dbr, b.self_dbr, self.pair_dbr(a, b).re)?;
                real((-d.sqrt() / bandwidth).exp())
            }
            KernelConfig::Base { .. } => real(self.base_prepared(a, b)),
            KernelConfig::AhRad { radial, .. } => real(radial.series(self.base_prepared(a, b))),
        })
    }

    /// Stable identifier derived from every parameter of the configuration.
    pub fn fingerprint(&self) -> String {
        format!("{}-{:016x}", self.variant(), fnv1a(format!("{self:?}").as_bytes()))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Kernel value for one pair of points.
pub fn evaluate(config: &KernelConfig, zi: &BallPoint, zj: &BallPoint) -> Result<KernelValue> {
    config.validate()?;
    let a = config.prepare(zi)?;
    let b = config.prepare(zj)?;
    config.evaluate_prepared(&a, &b)
}

/// Squared cosine similarity of the normalized de Branges–Rovnyak representers.
pub fn base_kernel(params: &MultiplierParams, zi: &BallPoint, zj: &BallPoint) -> Result<f64> {
    let kij = dbr_kernel(params, zi, zj)?;
    let kii = dbr_kernel(params, zi, zi)?.re;
    let kjj = dbr_kernel(params, zj, zj)?.re;
    Ok(kij.norm_sqr() / (kii * kjj))
}

/// Truncated radial power series in the base kernel.
pub fn ahrad(
    params: &MultiplierParams,
    radial: &RadialCoeffs,
    zi: &BallPoint,
    zj: &BallPoint,
) -> Result<f64> {
    Ok(radial.series(base_kernel(params, zi, zj)?))
}

/// Hermitian kernel matrix over a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<Complex64>,
    fingerprint: String,
    point_set: String,
}

impl GramMatrix {
    /// Wraps an arbitrary row-major matrix, rejecting non-Hermitian input
    /// (deviation above `1e-12`).
    pub fn from_entries(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "expected {n}x{n} entries, got {}",
                entries.len()
            )));
        }
        for i in 0..n {
            for j in i..n {
                let dev = (entries[i * n + j] - entries[j * n + i].conj()).norm();
                if dev > 1e-12 {
                    return Err(Error::NotHermitian { i, j, deviation: dev });
                }
            }
        }
        Ok(Self {
            n,
            entries,
            fingerprint: "external".into(),
            point_set: "external".into(),
        })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("matrix must be square".into()));
        }
        Self::from_entries(
            n,
            rows.iter()
                .flatten()
                .map(|&x| Complex64::new(x, 0.0))
                .collect(),
        )
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn point_set_id(&self) -> &str {
        &self.point_set
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }
}

fn point_set_id(points: &[BallPoint]) -> String {
    let mut bytes = Vec::with_capacity(points.len() * points[0].dim() * 16 + 8);
    bytes.extend_from_slice(&points[0].curvature().value().to_bits().to_le_bytes());
    for z in points.iter().flat_map(|p| p.coords()) {
        bytes.extend_from_slice(&z.re.to_bits().to_le_bytes());
        bytes.extend_from_slice(&z.im.to_bits().to_le_bytes());
    }
    format!("n{}-{:016x}", points.len(), fnv1a(&bytes))
}

/// Gram matrix with the default size limit.
pub fn gram(config: &KernelConfig, points: &[BallPoint]) -> Result<GramMatrix> {
    gram_with_limit(config, points, DEFAULT_MAX_GRAM)
}

/// Computes the diagonal and strict upper triangle, then mirrors conjugates,
/// so the result is exactly Hermitian.
pub fn gram_with_limit(
    config: &KernelConfig,
    points: &[BallPoint],
    max_points: usize,
) -> Result<GramMatrix> {
    config.validate()?;
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidParameter("gram needs at least one point".into()));
    }
    if n > max_points {
        return Err(Error::InvalidParameter(format!(
            "gram size {n} exceeds limit {max_points}"
        )));
    }
    for p in &points[1..] {
        points[0].ensure_compatible(p)?;
    }
    let reps = points
        .iter()
        .map(|p| config.prepare(p))
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| config.evaluate_prepared(&reps[i], &reps[j]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for (i, row) in rows.into_iter().enumerate() {
        for (offset, v) in row.into_iter().enumerate() {
            let j = i + offset;
            if i == j {
                if !v.re.is_finite() || v.im.abs() > 1e-12 * v.re.abs().max(1.0) {
                    return Err(Error::Numerical(format!(
                        "diagonal entry {i} is not real: {v}"
                    )));
                }
                entries[i * n + i] = Complex64::new(v.re, 0.0);
            } else {
                entries[i * n + j] = v;
                entries[j * n + i] = v.conj();
            }
        }
    }
    Ok(GramMatrix {
        n,
        entries,
        fingerprint: config.fingerprint(),
        point_set: point_set_id(points),
    })
}
