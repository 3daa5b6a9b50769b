//! Poincaré-ball primitives at curvature `-c`.
//!
//! The ball of curvature `-c` is the open set `{z in C^n : ||z|| < 1/sqrt(c)}`.
//! Real features are treated as complex vectors with zero imaginary part.
//!
//! The conformal factor here is `1 / (1 - c||z||^2)`, without the factor of
//! two that many hyperbolic-learning libraries fold into it.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Points with `sqrt(c)||z|| >= 1 - BOUNDARY_MARGIN` are rejected on ingestion.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

/// Curvature magnitude `c > 0`; the ball has radius `1/sqrt(c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Curvature(f64);

impl Curvature {
    pub fn new(c: f64) -> Result<Self> {
        if c.is_finite() && c > 0.0 {
            Ok(Self(c))
        } else {
            Err(Error::InvalidCurvature(c))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn sqrt(self) -> f64 {
        self.0.sqrt()
    }

    /// Euclidean radius of the ball, `1/sqrt(c)`.
    pub fn radius(self) -> f64 {
        1.0 / self.0.sqrt()
    }
}

impl Default for Curvature {
    fn default() -> Self {
        Self(1.0)
    }
}

/// A point strictly inside the ball of a given curvature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallPoint {
    coords: Vec<Complex64>,
    curvature: Curvature,
}

impl BallPoint {
    /// Validates and wraps complex coordinates. Rejects points within
    /// [`BOUNDARY_MARGIN`] of the boundary.
    pub fn new(coords: Vec<Complex64>, curvature: Curvature) -> Result<Self> {
        Self::checked(coords, curvature, BOUNDARY_MARGIN)
    }

    pub fn from_real(coords: &[f64], curvature: Curvature) -> Result<Self> {
        Self::new(
            coords.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            curvature,
        )
    }

    pub fn origin(dim: usize, curvature: Curvature) -> Self {
        assert!(dim >= 1, "ball dimension must be at least 1");
        Self {
            coords: vec![Complex64::new(0.0, 0.0); dim],
            curvature,
        }
    }

    /// Wraps the output of an operation that is mathematically interior.
    /// Only the strict boundary is enforced.
    pub(crate) fn from_op(coords: Vec<Complex64>, curvature: Curvature) -> Result<Self> {
        Self::checked(coords, curvature, 0.0)
    }

    fn checked(coords: Vec<Complex64>, curvature: Curvature, margin: f64) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Geometry("point must have dimension >= 1".into()));
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Geometry("non-finite coordinate".into()));
        }
        let scaled = curvature.sqrt() * inner(&coords, &coords).re.sqrt();
        if scaled >= 1.0 - margin {
            return Err(Error::Geometry(format!(
                "point outside admissible ball: sqrt(c)*||z|| = {scaled} (limit {})",
                1.0 - margin
            )));
        }
        Ok(Self { coords, curvature })
    }

    #[inline]
    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.coords)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn is_real(&self) -> bool {
        self.coords.iter().all(|z| z.im == 0.0)
    }

    /// Real parts of the coordinates, if every imaginary part is zero.
    pub fn real_coords(&self) -> Option<Vec<f64>> {
        self.is_real()
            .then(|| self.coords.iter().map(|z| z.re).collect())
    }

    /// The antipodal point `-z`.
    pub fn neg(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|z| -z).collect(),
            curvature: self.curvature,
        }
    }

    /// Fails unless `other` lives in the same ball.
    pub fn ensure_compatible(&self, other: &BallPoint) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        if self.curvature != other.curvature {
            return Err(Error::CurvatureMismatch(
                self.curvature.value(),
                other.curvature.value(),
            ));
        }
        Ok(())
    }
}

/// Real tangent vector at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector(Vec<f64>);

impl TangentVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Geometry("tangent vector must have dimension >= 1".into()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::Geometry("non-finite tangent coordinate".into()));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// `a* b = sum_k conj(a_k) b_k`.
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

pub(crate) fn norm_sq(a: &[Complex64]) -> f64 {
    inner(a, a).re
}

/// `lambda_c(z) = 1 / (1 - c||z||^2)`.
pub fn conformal_factor(z: &BallPoint) -> f64 {
    1.0 / (1.0 - z.curvature.value() * z.norm_sq())
}

/// Exponential map at the origin: `tanh(sqrt(c)||v||) v / (sqrt(c)||v||)`.
///
/// Returns an error when `tanh` saturates so far that the image is not
/// representable as an interior point.
pub fn exp0(v: &TangentVector, c: Curvature) -> Result<BallPoint> {
    let v = v.coords();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(BallPoint::origin(v.len(), c));
    }
    let arg = c.sqrt() * norm;
    let scale = arg.tanh() / arg;
    let coords = v.iter().map(|&x| Complex64::new(scale * x, 0.0)).collect();
    BallPoint::from_op(coords, c)
}

/// Clipped projection `beta * min{1, (1 - eps)/(sqrt(c)||x||)} * x`.
///
/// Requires `beta > 0`, `eps` in `(0, 1)` and `beta (1 - eps) < 1`, so the
/// output norm is at most `beta (1 - eps) / sqrt(c)`.
pub fn clip_project(x: &[f64], c: Curvature, beta: f64, eps: f64) -> Result<BallPoint> {
    validate_clip(beta, eps)?;
    if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Geometry("clip input must be finite and non-empty".into()));
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(BallPoint::origin(x.len(), c));
    }
    let factor = beta * (1.0f64).min((1.0 - eps) / (c.sqrt() * norm));
    BallPoint::new(
        x.iter().map(|&v| Complex64::new(factor * v, 0.0)).collect(),
        c,
    )
}

pub fn validate_clip(beta: f64, eps: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("clip beta must be positive, got {beta}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("clip eps must lie in (0,1), got {eps}")));
    }
    if beta * (1.0 - eps) >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "clip parameters reach the boundary: beta*(1-eps) = {} >= 1",
            beta * (1.0 - eps)
        )));
    }
    Ok(())
}

/// Parallel/orthogonal split of `z` relative to a pole `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MobiusParts {
    /// Projection of `z` onto the complex line through `a` (zero when `a = 0`).
    pub parallel: Vec<Complex64>,
    /// `z - parallel`.
    pub orthogonal: Vec<Complex64>,
    /// `sqrt(1 - c||a||^2)`.
    pub scale: f64,
}

pub(crate) fn decompose_raw(a: &[Complex64], z: &[Complex64], c: f64) -> MobiusParts {
    let a_norm_sq = norm_sq(a);
    let parallel: Vec<Complex64> = if a_norm_sq == 0.0 {
        vec![Complex64::new(0.0, 0.0); z.len()]
    } else {
        let coef = inner(a, z) / a_norm_sq;
        a.iter().map(|x| coef * x).collect()
    };
    let orthogonal = z.iter().zip(&parallel).map(|(zk, pk)| zk - pk).collect();
    MobiusParts {
        parallel,
        orthogonal,
        scale: (1.0 - c * a_norm_sq).sqrt(),
    }
}

pub fn mobius_decompose(a: &BallPoint, z: &BallPoint) -> Result<MobiusParts> {
    a.ensure_compatible(z)?;
    Ok(decompose_raw(&a.coords, &z.coords, a.curvature.value()))
}

/// `phi_a(z) = (a - P_a(z) - s_a Q_a(z)) / (1 - c a* z)`.
pub(crate) fn mobius_raw(a: &[Complex64], z: &[Complex64], c: f64) -> Vec<Complex64> {
    let parts = decompose_raw(a, z, c);
    let denom = Complex64::new(1.0, 0.0) - c * inner(a, z);
    a.iter()
        .zip(&parts.parallel)
        .zip(&parts.orthogonal)
        .map(|((ak, pk), qk)| (ak - pk - parts.scale * qk) / denom)
        .collect()
}

/// Möbius self-map of the ball sending `a` to the origin.
pub fn mobius_map(a: &BallPoint, z: &BallPoint) -> Result<BallPoint> {
    a.ensure_compatible(z)?;
    BallPoint::from_op(mobius_raw(&a.coords, &z.coords, a.curvature.value()), a.curvature)
}

/// Pseudo-hyperbolic distance `rho = sqrt(c) ||phi_{z_i}(z_j)||`, in `[0, 1)`.
pub fn pseudo_distance(zi: &BallPoint, zj: &BallPoint) -> Result<f64> {
    zi.ensure_compatible(zj)?;
    let c = zi.curvature;
    Ok(c.sqrt() * norm_sq(&mobius_raw(&zi.coords, &zj.coords, c.value())).sqrt())
}

/// Closed form `sqrt(1 - (1-c||z_i||^2)(1-c||z_j||^2) / |1 - c z_i* z_j|^2)`.
pub fn pseudo_distance_closed_form(zi: &BallPoint, zj: &BallPoint) -> Result<f64> {
    zi.ensure_compatible(zj)?;
    let c = zi.curvature.value();
    let num = (1.0 - c * zi.norm_sq()) * (1.0 - c * zj.norm_sq());
    let den = (Complex64::new(1.0, 0.0) - c * inner(&zi.coords, &zj.coords)).norm_sqr();
    Ok((1.0 - num / den).max(0.0).sqrt())
}

/// Geodesic distance `(2/sqrt(c)) artanh(rho)`.
pub fn geodesic_distance(zi: &BallPoint, zj: &BallPoint) -> Result<f64> {
    let rho = pseudo_distance(zi, zj)?;
    Ok(2.0 / zi.curvature.sqrt() * rho.atanh())
}
