//! Reference formulas written independently of the library: the Möbius map is
//! evaluated on the unit ball after rescaling by sqrt(c), and positive
//! semidefiniteness is certified by a shifted Cholesky factorization.

use num_complex::Complex64;

pub type C = Complex64;

/// `<u, v> = sum_k conj(u_k) v_k`.
pub fn herm(u: &[C], v: &[C]) -> C {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn scaled(v: &[C], s: f64) -> Vec<C> {
    v.iter().map(|x| x * s).collect()
}

/// Unit-ball automorphism `(a - P_a u - sqrt(1-|a|^2) Q_a u) / (1 - <a, u>)`.
fn unit_mobius(a: &[C], u: &[C]) -> Vec<C> {
    let aa = herm(a, a).re;
    let au = herm(a, u);
    let s = (1.0 - aa).sqrt();
    (0..u.len())
        .map(|k| {
            let p = if aa > 0.0 { a[k] * (au / aa) } else { C::new(0.0, 0.0) };
            (a[k] - p - s * (u[k] - p)) / (1.0 - au)
        })
        .collect()
}

/// Möbius map on the ball of radius `1/sqrt(c)`.
pub fn mobius(a: &[C], z: &[C], c: f64) -> Vec<C> {
    let r = c.sqrt();
    scaled(&unit_mobius(&scaled(a, r), &scaled(z, r)), 1.0 / r)
}

pub fn pseudo_distance(zi: &[C], zj: &[C], c: f64) -> f64 {
    let m = mobius(zi, zj, c);
    c.sqrt() * herm(&m, &m).re.sqrt()
}

/// Symmetrized multiplier `sum_i w_i (phi_{a_i}(z) + phi_{-a_i}(z)) / 2`.
pub fn multiplier(poles: &[Vec<C>], weights: &[f64], z: &[C], c: f64) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); z.len()];
    for (a, w) in poles.iter().zip(weights) {
        let neg: Vec<C> = a.iter().map(|x| -x).collect();
        let p = mobius(a, z, c);
        let q = mobius(&neg, z, c);
        for k in 0..z.len() {
            out[k] += w * 0.5 * (p[k] + q[k]);
        }
    }
    out
}

pub fn dbr(poles: &[Vec<C>], weights: &[f64], zi: &[C], zj: &[C], c: f64) -> C {
    let bi = multiplier(poles, weights, zi, c);
    let bj = multiplier(poles, weights, zj, c);
    (1.0 - c * herm(&bi, &bj)) / (1.0 - c * herm(zi, zj))
}

pub fn base(poles: &[Vec<C>], weights: &[f64], zi: &[C], zj: &[C], c: f64) -> f64 {
    let kij = dbr(poles, weights, zi, zj, c);
    let kii = dbr(poles, weights, zi, zi, c).re;
    let kjj = dbr(poles, weights, zj, zj, c).re;
    kij.norm_sqr() / (kii * kjj)
}

/// Right-hand side of the Möbius factorization
/// `1 - c <phi_a(z_i), phi_a(z_j)>`.
pub fn factorization_rhs(a: &[C], zi: &[C], zj: &[C], c: f64) -> C {
    (1.0 - c * herm(a, a).re) * (1.0 - c * herm(zi, zj)) / ((1.0 - c * herm(zi, a)) * (1.0 - c * herm(a, zj)))
}

/// Whether `g + shift I` admits a Cholesky factorization.
pub fn cholesky_ok(n: usize, g: &[C], shift: f64) -> bool {
    let mut l = vec![C::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = g[j * n + j].re + shift;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[j * n + j] = C::new(d, 0.0);
        for i in (j + 1)..n {
            let mut s = g[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / d;
        }
    }
    true
}
