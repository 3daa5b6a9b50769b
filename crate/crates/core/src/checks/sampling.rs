//! Seeded point sampling inside the ball.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{BallPoint, Curvature};

/// Default sampling radius as a fraction of the ball radius.
pub const DEFAULT_RADIUS_FRACTION: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

/// Uniform direction, radius `u^(1/d) * fraction / sqrt(c)` where `d` is the
/// real dimension of the sampled space.
pub fn sample_ball<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    c: Curvature,
    field: Field,
    fraction: f64,
) -> BallPoint {
    let real_dim = match field {
        Field::Real => dim,
        Field::Complex => 2 * dim,
    };
    let u: f64 = rng.random();
    let radius = u.powf(1.0 / real_dim as f64) * fraction / c.sqrt();
    on_sphere(rng, dim, c, field, radius)
}

/// A uniformly oriented point at Euclidean norm exactly `radius`.
pub fn on_sphere<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    c: Curvature,
    field: Field,
    radius: f64,
) -> BallPoint {
    let coords: Vec<Complex64> = loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = match field {
                    Field::Real => 0.0,
                    Field::Complex => rng.sample(StandardNormal),
                };
                Complex64::new(re, im)
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            break v.into_iter().map(|z| z * (radius / norm)).collect();
        }
    };
    BallPoint::new(coords, c).expect("sampled radius lies inside the ball")
}
