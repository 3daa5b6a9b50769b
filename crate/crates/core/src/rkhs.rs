//! Drury–Arveson and de Branges–Rovnyak kernels on the curvature-`c` ball.
//!
//! The multiplier is a weighted average of symmetrized Möbius maps,
//!
//! ```text
//! b(z) = 1/2 sum_i w_i (phi_{a_i}(z) + phi_{-a_i}(z))
//!      = sum_i w_i ((c a_i* z) a_i - P_{a_i}(z) - s_{a_i} Q_{a_i}(z)) / (1 - (c a_i* z)^2)
//! ```
//!
//! and the de Branges–Rovnyak kernel is
//! `k(z_i, z_j) = (1 - c b(z_i)* b(z_j)) / (1 - c z_i* z_j)`. With weights on
//! the open simplex this kernel is positive definite for any number of poles.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{decompose_raw, inner, mobius_raw, BallPoint, Curvature};

pub type KernelValue = Complex64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Learnable poles plus weight logits. Weights are always read through
/// [`MultiplierParams::weights`], a softmax, so they stay on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierParams {
    poles: Vec<BallPoint>,
    weight_logits: Vec<f64>,
}

impl MultiplierParams {
    pub fn new(poles: Vec<BallPoint>, weight_logits: Vec<f64>) -> Result<Self> {
        let first = poles
            .first()
            .ok_or_else(|| Error::InvalidParameter("multiplier needs at least one pole".into()))?;
        for p in &poles[1..] {
            first.ensure_compatible(p)?;
        }
        if weight_logits.len() != poles.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weight logits for {} poles",
                weight_logits.len(),
                poles.len()
            )));
        }
        if weight_logits.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("non-finite weight logit".into()));
        }
        Ok(Self {
            poles,
            weight_logits,
        })
    }

    /// `m` poles at the origin with uniform weights; gives the constant kernel 1.
    pub fn degenerate(m: usize, dim: usize, curvature: Curvature) -> Self {
        assert!(m >= 1);
        Self {
            poles: vec![BallPoint::origin(dim, curvature); m],
            weight_logits: vec![0.0; m],
        }
    }

    pub fn poles(&self) -> &[BallPoint] {
        &self.poles
    }

    pub fn weight_logits(&self) -> &[f64] {
        &self.weight_logits
    }

    pub fn num_poles(&self) -> usize {
        self.poles.len()
    }

    pub fn dim(&self) -> usize {
        self.poles[0].dim()
    }

    pub fn curvature(&self) -> Curvature {
        self.poles[0].curvature()
    }

    pub fn weights(&self) -> Vec<f64> {
        softmax(&self.weight_logits)
    }

    pub fn ensure_compatible(&self, z: &BallPoint) -> Result<()> {
        self.poles[0].ensure_compatible(z)
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Curvature-aware Drury–Arveson kernel `1 / (1 - c z_i* z_j)`.
pub fn da_kernel(zi: &BallPoint, zj: &BallPoint) -> Result<KernelValue> {
    zi.ensure_compatible(zj)?;
    Ok(da_raw(zi.coords(), zj.coords(), zi.curvature().value()))
}

pub(crate) fn da_raw(zi: &[Complex64], zj: &[Complex64], c: f64) -> Complex64 {
    ONE / (ONE - c * inner(zi, zj))
}

/// One symmetrized Möbius term in closed form:
/// `((c a* z) a - P_a(z) - s_a Q_a(z)) / (1 - (c a* z)^2)`.
pub(crate) fn averaged_term_raw(a: &[Complex64], z: &[Complex64], c: f64) -> Vec<Complex64> {
    let parts = decompose_raw(a, z, c);
    let t = c * inner(a, z);
    let denom = ONE - t * t;
    a.iter()
        .zip(&parts.parallel)
        .zip(&parts.orthogonal)
        .map(|((ak, pk), qk)| (t * ak - pk - parts.scale * qk) / denom)
        .collect()
}

/// The same term computed literally as `(phi_a(z) + phi_{-a}(z)) / 2`.
pub(crate) fn averaged_term_explicit(a: &[Complex64], z: &[Complex64], c: f64) -> Vec<Complex64> {
    let neg_a: Vec<Complex64> = a.iter().map(|x| -x).collect();
    let plus = mobius_raw(a, z, c);
    let minus = mobius_raw(&neg_a, z, c);
    plus.iter().zip(&minus).map(|(p, m)| 0.5 * (p + m)).collect()
}

pub(crate) fn multiplier_raw(params: &MultiplierParams, z: &[Complex64]) -> Vec<Complex64> {
    let c = params.curvature().value();
    let mut out = vec![Complex64::new(0.0, 0.0); z.len()];
    for (pole, w) in params.poles.iter().zip(params.weights()) {
        for (o, t) in out.iter_mut().zip(averaged_term_raw(pole.coords(), z, c)) {
            *o += w * t;
        }
    }
    out
}

/// The multiplier `b(z)` via the closed form.
pub fn multiplier_b(params: &MultiplierParams, z: &BallPoint) -> Result<BallPoint> {
    params.ensure_compatible(z)?;
    BallPoint::from_op(multiplier_raw(params, z.coords()), z.curvature())
}

/// The multiplier `b(z)` as an explicit weighted average of Möbius maps.
pub fn multiplier_b_explicit(params: &MultiplierParams, z: &BallPoint) -> Result<BallPoint> {
    params.ensure_compatible(z)?;
    let c = params.curvature().value();
    let mut out = vec![Complex64::new(0.0, 0.0); z.dim()];
    for (pole, w) in params.poles.iter().zip(params.weights()) {
        for (o, t) in out
            .iter_mut()
            .zip(averaged_term_explicit(pole.coords(), z.coords(), c))
        {
            *o += w * t;
        }
    }
    BallPoint::from_op(out, z.curvature())
}

/// `(1 - c b_i* b_j) / (1 - c z_i* z_j)` from precomputed multiplier images.
pub(crate) fn dbr_raw(
    zi: &[Complex64],
    bi: &[Complex64],
    zj: &[Complex64],
    bj: &[Complex64],
    c: f64,
) -> Complex64 {
    (ONE - c * inner(bi, bj)) / (ONE - c * inner(zi, zj))
}

/// Curvature-aware de Branges–Rovnyak kernel.
pub fn dbr_kernel(params: &MultiplierParams, zi: &BallPoint, zj: &BallPoint) -> Result<KernelValue> {
    params.ensure_compatible(zi)?;
    params.ensure_compatible(zj)?;
    let bi = multiplier_raw(params, zi.coords());
    let bj = multiplier_raw(params, zj.coords());
    Ok(dbr_raw(
        zi.coords(),
        &bi,
        zj.coords(),
        &bj,
        params.curvature().value(),
    ))
}

/// `k(i,i) + k(j,j) - 2 Re k(i,j)` with rounding residues clamped to zero.
pub(crate) fn induced_distance_sq(kii: f64, kjj: f64, kij_re: f64) -> Result<f64> {
    let d = kii + kjj - 2.0 * kij_re;
    if d >= 0.0 {
        return Ok(d);
    }
    let slack = 1e-12 * (1.0f64).max(kii.abs() + kjj.abs());
    if d >= -slack {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!(
            "induced squared distance {d:e} is negative beyond rounding"
        )))
    }
}

/// Squared RKHS distance between the representers of `z_i` and `z_j`.
pub fn rkhs_distance_sq(params: &MultiplierParams, zi: &BallPoint, zj: &BallPoint) -> Result<f64> {
    let kii = dbr_kernel(params, zi, zi)?.re;
    let kjj = dbr_kernel(params, zj, zj)?.re;
    let kij = dbr_kernel(params, zi, zj)?;
    induced_distance_sq(kii, kjj, kij.re)
}

/// Pointwise necessary condition for the multiplier-norm bound:
/// `sqrt(c) ||b(z)|| < 1`.
pub fn pointwise_contraction_check(params: &MultiplierParams, z: &BallPoint) -> Result<bool> {
    params.ensure_compatible(z)?;
    let b = multiplier_raw(params, z.coords());
    Ok(params.curvature().sqrt() * inner(&b, &b).re.sqrt() < 1.0)
}
