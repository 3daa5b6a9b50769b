//! Numerical validation suites: spectral PSD certification, the
//! Drury–Arveson isometry, and the algebraic identities behind the
//! multiplier construction.

pub mod eigen;
pub mod sampling;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{inner, mobius_raw, pseudo_distance, BallPoint, Curvature};
use crate::kernels::{gram, GramMatrix, KernelConfig, KernelVariant, RadialCoeffs};
use crate::rkhs::{
    averaged_term_explicit, averaged_term_raw, da_kernel, dbr_kernel, multiplier_b,
    multiplier_b_explicit, pointwise_contraction_check, MultiplierParams,
};

pub use eigen::{hermitian_eigenvalues, min_max_eigenvalues};
pub use sampling::{on_sphere, sample_ball, Field, DEFAULT_RADIUS_FRACTION};

/// Default PSD tolerance, scaled by `max(1, |max_eig|)`.
pub const DEFAULT_PSD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub label: String,
    pub n: usize,
    pub min_eig: f64,
    pub max_eig: f64,
    pub tolerance: f64,
    pub seed: Option<u64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorMetric {
    Abs,
    Rel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub name: String,
    pub trials: usize,
    /// Worst observed error; relative when `metric` is `rel`.
    pub max_abs_error: f64,
    pub metric: ErrorMetric,
    pub tolerance: f64,
    pub worst_case_inputs: String,
    pub seed: u64,
    pub verdict: Verdict,
}

/// Certifies a precomputed matrix: pass iff `min_eig >= -tol * max(1, |max_eig|)`.
pub fn psd_report(label: &str, g: &GramMatrix, tol: f64, seed: Option<u64>) -> Result<PsdReport> {
    let (min_eig, max_eig) = min_max_eigenvalues(g)?;
    Ok(PsdReport {
        label: label.to_string(),
        n: g.size(),
        min_eig,
        max_eig,
        tolerance: tol,
        seed,
        verdict: Verdict::from_bool(min_eig >= -tol * (1.0f64).max(max_eig.abs())),
    })
}

pub fn check_psd(config: &KernelConfig, points: &[BallPoint], tol: f64) -> Result<PsdReport> {
    let g = gram(config, points)?;
    psd_report(&config.fingerprint(), &g, tol, None)
}

/// A kernel family member used by the PSD sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepKernel {
    pub variant: KernelVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
}

impl SweepKernel {
    fn label(&self) -> String {
        match (self.degree, self.truncation) {
            (Some(d), _) => format!("{}(d={d})", self.variant),
            (_, Some(k)) => format!("{}(K={k})", self.variant),
            _ => self.variant.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdSweepSpec {
    pub kernels: Vec<SweepKernel>,
    pub curvatures: Vec<f64>,
    pub dims: Vec<usize>,
    pub pole_counts: Vec<usize>,
    pub points: usize,
    pub tol: f64,
    pub seed: u64,
    pub complex: bool,
}

impl Default for PsdSweepSpec {
    fn default() -> Self {
        let k = |variant, degree, truncation| SweepKernel {
            variant,
            degree,
            truncation,
        };
        Self {
            kernels: vec![
                k(KernelVariant::Ahl, None, None),
                k(KernelVariant::AhPoly, Some(2), None),
                k(KernelVariant::AhPoly, Some(3), None),
                k(KernelVariant::AhRbf, None, None),
                k(KernelVariant::AhLap, None, None),
                k(KernelVariant::AhRad, None, Some(50)),
            ],
            curvatures: vec![0.25, 1.0, 2.0],
            dims: vec![1, 2, 8],
            pole_counts: vec![1, 3],
            points: 32,
            tol: DEFAULT_PSD_TOL,
            seed: 0,
            complex: false,
        }
    }
}

/// Random multiplier with poles sampled in the ball and Gaussian logits.
pub fn random_multiplier<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    dim: usize,
    c: Curvature,
    field: Field,
) -> MultiplierParams {
    let poles = (0..m)
        .map(|_| sample_ball(rng, dim, c, field, DEFAULT_RADIUS_FRACTION))
        .collect();
    let logits = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    MultiplierParams::new(poles, logits).expect("sampled multiplier is valid")
}

/// A random instance of a sweep kernel. Bandwidths and offsets are fixed at 1;
/// radial raws are uniform in `[0, 1)` so every `alpha_l <= 1`.
pub fn random_config<R: Rng + ?Sized>(
    rng: &mut R,
    kernel: &SweepKernel,
    m: usize,
    dim: usize,
    c: Curvature,
    field: Field,
) -> KernelConfig {
    if kernel.variant == KernelVariant::Da {
        return KernelConfig::Da { curvature: c };
    }
    let params = random_multiplier(rng, m, dim, c, field);
    match kernel.variant {
        KernelVariant::Ahl => KernelConfig::Ahl { params },
        KernelVariant::AhPoly => KernelConfig::AhPoly {
            params,
            offset: 1.0,
            degree: kernel.degree.unwrap_or(2),
        },
        KernelVariant::AhRbf => KernelConfig::AhRbf {
            params,
            bandwidth: 1.0,
        },
        KernelVariant::AhLap => KernelConfig::AhLap {
            params,
            bandwidth: 1.0,
        },
        KernelVariant::Base => KernelConfig::Base { params },
        KernelVariant::AhRad => {
            let k = kernel
                .truncation
                .unwrap_or(crate::kernels::DEFAULT_TRUNCATION);
            let mut raw: Vec<f64> = (0..=k).map(|_| rng.random::<f64>()).collect();
            raw[0] = raw[0].max(1e-3);
            KernelConfig::AhRad {
                params,
                radial: RadialCoeffs::new(raw).expect("positive coefficients"),
            }
        }
        KernelVariant::Da => unreachable!(),
    }
}

/// Runs the PSD grid. Every cell draws from its own seeded stream so cells
/// are independent of evaluation order.
pub fn psd_sweep(spec: &PsdSweepSpec) -> Result<Vec<PsdReport>> {
    let field = if spec.complex {
        Field::Complex
    } else {
        Field::Real
    };
    let mut cells = Vec::new();
    for kernel in &spec.kernels {
        for &c in &spec.curvatures {
            for &n in &spec.dims {
                for &m in &spec.pole_counts {
                    cells.push((*kernel, c, n, m));
                }
            }
        }
    }
    cells
        .into_par_iter()
        .enumerate()
        .map(|(idx, (kernel, c, n, m))| {
            let cell_seed = spec.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ idx as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(cell_seed);
            let curvature = crate::geometry::Curvature::new(c)?;
            let config = random_config(&mut rng, &kernel, m, n, curvature, field);
            let points: Vec<BallPoint> = (0..spec.points)
                .map(|_| sample_ball(&mut rng, n, curvature, field, DEFAULT_RADIUS_FRACTION))
                .collect();
            let g = gram(&config, &points)?;
            let label = format!("psd {} c={c} n={n} m={m}", kernel.label());
            psd_report(&label, &g, spec.tol, Some(cell_seed))
        })
        .collect()
}

struct Worst {
    error: f64,
    inputs: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            error: 0.0,
            inputs: String::new(),
        }
    }

    fn observe(&mut self, error: f64, inputs: impl FnOnce() -> String) {
        let error = if error.is_nan() { f64::MAX } else { error };
        if error > self.error || self.inputs.is_empty() {
            self.error = self.error.max(error);
            self.inputs = inputs();
        }
    }

    fn report(self, name: &str, trials: usize, metric: ErrorMetric, tol: f64, seed: u64) -> SweepReport {
        SweepReport {
            name: name.to_string(),
            trials,
            max_abs_error: self.error,
            metric,
            tolerance: tol,
            worst_case_inputs: self.inputs,
            seed,
            verdict: Verdict::from_bool(self.error <= tol),
        }
    }
}

fn describe(points: &[(&str, &BallPoint)]) -> String {
    let parts: Vec<String> = points
        .iter()
        .map(|(name, p)| {
            let coords: Vec<String> = p
                .coords()
                .iter()
                .map(|z| format!("{:e}{:+e}i", z.re, z.im))
                .collect();
            format!("{name}=[{}]", coords.join(","))
        })
        .collect();
    let c = points.first().map(|(_, p)| p.curvature().value()).unwrap_or(1.0);
    format!("c={c}; {}", parts.join("; "))
}

/// Compares the Drury–Arveson normalized-representer metric
/// `sqrt(1 - |k_ij|^2 / (k_ii k_jj))` with the pseudo-hyperbolic distance.
pub fn check_isometry(c: Curvature, n: usize, trials: usize, tol: f64, seed: u64) -> Result<SweepReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Worst::new();
    for _ in 0..trials.max(1) {
        let zi = sample_ball(&mut rng, n, c, Field::Complex, DEFAULT_RADIUS_FRACTION);
        let zj = sample_ball(&mut rng, n, c, Field::Complex, DEFAULT_RADIUS_FRACTION);
        let err = isometry_deviation(&zi, &zj)?;
        worst.observe(err, || describe(&[("zi", &zi), ("zj", &zj)]));
    }
    Ok(worst.report(
        &format!("isometry c={} n={n}", c.value()),
        trials.max(1),
        ErrorMetric::Abs,
        tol,
        seed,
    ))
}

/// `|delta_da(z_i, z_j) - rho(z_i, z_j)|` for one pair.
pub fn isometry_deviation(zi: &BallPoint, zj: &BallPoint) -> Result<f64> {
    let kij = da_kernel(zi, zj)?;
    let kii = da_kernel(zi, zi)?.re;
    let kjj = da_kernel(zj, zj)?.re;
    let delta = (1.0 - kij.norm_sqr() / (kii * kjj)).max(0.0).sqrt();
    Ok((delta - pseudo_distance(zi, zj)?).abs())
}

/// Where identity-sweep points are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointSampling {
    /// Uniform in the ball of radius `0.95 / sqrt(c)`.
    Uniform,
    /// On the sphere `sqrt(c)||z|| = fraction`.
    Shell(f64),
    /// Every point at the origin.
    Origin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentitySpec {
    pub trials: usize,
    pub tol: f64,
    /// Tolerance for the relative Möbius factorization error.
    pub rel_tol: f64,
    pub seed: u64,
    pub curvatures: Vec<f64>,
    pub dims: Vec<usize>,
    pub poles: usize,
    pub sampling: PointSampling,
}

impl Default for IdentitySpec {
    fn default() -> Self {
        Self {
            trials: 1000,
            tol: 1e-11,
            rel_tol: 1e-12,
            seed: 0,
            curvatures: vec![0.25, 1.0, 2.0],
            dims: vec![1, 2, 8],
            poles: 3,
            sampling: PointSampling::Uniform,
        }
    }
}

fn identity_point(rng: &mut ChaCha8Rng, n: usize, c: Curvature, sampling: PointSampling) -> BallPoint {
    match sampling {
        PointSampling::Uniform => sample_ball(rng, n, c, Field::Complex, DEFAULT_RADIUS_FRACTION),
        PointSampling::Shell(frac) => on_sphere(rng, n, c, Field::Complex, frac / c.sqrt()),
        PointSampling::Origin => BallPoint::origin(n, c),
    }
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Runs every identity sweep and returns one report per identity:
/// Möbius averaging (single term and full multiplier), Möbius
/// factorization, `b(0) = 0`, oddness of `b`, sign symmetry of the kernel,
/// and the pointwise contraction bound.
pub fn identity_sweeps(spec: &IdentitySpec) -> Result<Vec<SweepReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut averaging = Worst::new();
    let mut averaging_full = Worst::new();
    let mut factor = Worst::new();
    let mut origin = Worst::new();
    let mut oddness = Worst::new();
    let mut symmetry = Worst::new();
    let mut contraction = Worst::new();
    let trials = spec.trials.max(1);

    for t in 0..trials {
        let cv = spec.curvatures[t % spec.curvatures.len()];
        let n = spec.dims[(t / spec.curvatures.len()) % spec.dims.len()];
        let c = Curvature::new(cv)?;
        let params = match spec.sampling {
            PointSampling::Origin => MultiplierParams::new(
                (0..spec.poles)
                    .map(|_| sample_ball(&mut rng, n, c, Field::Complex, DEFAULT_RADIUS_FRACTION))
                    .collect(),
                vec![0.0; spec.poles],
            )?,
            _ => random_multiplier(&mut rng, spec.poles, n, c, Field::Complex),
        };
        let a = params.poles()[0].clone();
        let zi = identity_point(&mut rng, n, c, spec.sampling);
        let zj = identity_point(&mut rng, n, c, spec.sampling);

        let closed = averaged_term_raw(a.coords(), zi.coords(), cv);
        let explicit = averaged_term_explicit(a.coords(), zi.coords(), cv);
        averaging.observe(max_abs_diff(&closed, &explicit), || {
            describe(&[("a", &a), ("z", &zi)])
        });

        let b_closed = multiplier_b(&params, &zi)?;
        let b_explicit = multiplier_b_explicit(&params, &zi)?;
        averaging_full.observe(max_abs_diff(b_closed.coords(), b_explicit.coords()), || {
            describe(&[("z", &zi)])
        });

        let rel = factorization_residual(&a, &zi, &zj);
        factor.observe(rel, || describe(&[("a", &a), ("zi", &zi), ("zj", &zj)]));

        let b0 = multiplier_b(&params, &BallPoint::origin(n, c))?;
        origin.observe(b0.norm(), || describe(&[("pole0", &a)]));

        let b_neg = multiplier_b(&params, &zi.neg())?;
        let odd = b_neg
            .coords()
            .iter()
            .zip(b_closed.coords())
            .map(|(x, y)| (x + y).norm())
            .fold(0.0, f64::max);
        oddness.observe(odd, || describe(&[("z", &zi)]));

        let k = dbr_kernel(&params, &zi, &zj)?;
        let k_neg = dbr_kernel(&params, &zi.neg(), &zj.neg())?;
        symmetry.observe((k - k_neg).norm(), || describe(&[("zi", &zi), ("zj", &zj)]));

        let ok = pointwise_contraction_check(&params, &zi)?;
        let scaled = c.sqrt() * b_closed.norm();
        contraction.observe(if ok { 0.0 } else { scaled - 1.0 + f64::EPSILON }, || {
            describe(&[("z", &zi)])
        });
    }

    let tol = spec.tol;
    Ok(vec![
        averaging.report("mobius_averaging_term", trials, ErrorMetric::Abs, tol, spec.seed),
        averaging_full.report("mobius_averaging_multiplier", trials, ErrorMetric::Abs, tol, spec.seed),
        factor.report("mobius_factorization", trials, ErrorMetric::Rel, spec.rel_tol, spec.seed),
        origin.report("multiplier_at_origin", trials, ErrorMetric::Abs, tol, spec.seed),
        oddness.report("multiplier_oddness", trials, ErrorMetric::Abs, tol, spec.seed),
        symmetry.report("kernel_sign_symmetry", trials, ErrorMetric::Abs, tol, spec.seed),
        contraction.report("pointwise_contraction", trials, ErrorMetric::Abs, tol, spec.seed),
    ])
}

/// Relative residual of
/// `1 - c phi_a(z_i)* phi_a(z_j) = (1 - c||a||^2)(1 - c z_i* z_j) / ((1 - c z_i* a)(1 - c a* z_j))`.
pub fn factorization_residual(a: &BallPoint, zi: &BallPoint, zj: &BallPoint) -> f64 {
    let c = a.curvature().value();
    let one = Complex64::new(1.0, 0.0);
    let pi = mobius_raw(a.coords(), zi.coords(), c);
    let pj = mobius_raw(a.coords(), zj.coords(), c);
    let lhs = one - c * inner(&pi, &pj);
    let rhs = (1.0 - c * a.norm_sq()) * (one - c * inner(zi.coords(), zj.coords()))
        / ((one - c * inner(zi.coords(), a.coords())) * (one - c * inner(a.coords(), zj.coords())));
    (lhs - rhs).norm() / rhs.norm()
}

/// Aggregate of [`identity_sweeps`]: the worst error over every identity,
/// passing only if each identity meets its own tolerance.
pub fn check_identities(spec: &IdentitySpec) -> Result<SweepReport> {
    let sweeps = identity_sweeps(spec)?;
    let worst = sweeps
        .iter()
        .max_by(|a, b| a.max_abs_error.total_cmp(&b.max_abs_error))
        .expect("at least one sweep");
    Ok(SweepReport {
        name: "identities".into(),
        trials: spec.trials.max(1),
        max_abs_error: worst.max_abs_error,
        metric: worst.metric,
        tolerance: spec.tol,
        worst_case_inputs: format!("{}: {}", worst.name, worst.worst_case_inputs),
        seed: spec.seed,
        verdict: Verdict::from_bool(sweeps.iter().all(|s| s.verdict.passed())),
    })
}
