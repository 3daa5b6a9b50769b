//! Cyclic Jacobi eigenvalue solver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies a real Givens rotation, so real symmetric input
//! never leaves the real axis.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::GramMatrix;

const MAX_SWEEPS: usize = 64;

/// All eigenvalues of a Hermitian matrix (row-major, `n x n`), ascending.
pub fn hermitian_eigenvalues(n: usize, matrix: &[Complex64]) -> Result<Vec<f64>> {
    if matrix.len() != n * n {
        return Err(Error::InvalidParameter(format!(
            "expected {} entries, got {}",
            n * n,
            matrix.len()
        )));
    }
    for i in 0..n {
        for j in i..n {
            let dev = (matrix[i * n + j] - matrix[j * n + i].conj()).norm();
            if dev > 1e-12 {
                return Err(Error::NotHermitian { i, j, deviation: dev });
            }
        }
    }
    let mut a = matrix.to_vec();
    for i in 0..n {
        a[i * n + i] = Complex64::new(a[i * n + i].re, 0.0);
    }

    let frob_sq: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let target = (f64::EPSILON * f64::EPSILON) * frob_sq;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum();
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, n, p, q);
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    Ok(eig)
}

fn rotate(a: &mut [Complex64], n: usize, p: usize, q: usize) {
    let g = a[p * n + q];
    let mag = g.norm();
    if mag == 0.0 {
        return;
    }
    let alpha = a[p * n + p].re;
    let beta = a[q * n + q].re;
    if mag < 1e-300 {
        a[p * n + q] = Complex64::new(0.0, 0.0);
        a[q * n + p] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = g / mag;
    let zeta = (beta - alpha) / (2.0 * mag);
    let t = if zeta == 0.0 {
        1.0
    } else {
        zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let phase_conj = phase.conj();

    // A <- A U with U = [[c, s], [-s conj(ph), c conj(ph)]] on columns (p, q).
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = c * akp - s * phase_conj * akq;
        a[k * n + q] = s * akp + c * phase_conj * akq;
    }
    // A <- U^H A on rows (p, q).
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = c * apk - s * phase * aqk;
        a[q * n + k] = s * apk + c * phase * aqk;
    }
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
    a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
    a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
}

/// Smallest and largest eigenvalue of a Gram matrix.
pub fn min_max_eigenvalues(g: &GramMatrix) -> Result<(f64, f64)> {
    let eig = hermitian_eigenvalues(g.size(), g.entries())?;
    Ok((eig[0], eig[eig.len() - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn real(rows: &[Vec<f64>]) -> GramMatrix {
        GramMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn identity() {
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..5).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        assert_eq!(min_max_eigenvalues(&real(&rows)).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn all_ones() {
        let (lo, hi) = min_max_eigenvalues(&real(&vec![vec![1.0; 3]; 3])).unwrap();
        assert_abs_diff_eq!(lo, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(hi, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn diagonal() {
        let (lo, hi) = min_max_eigenvalues(&real(&[vec![2.0, 0.0], vec![0.0, -1.0]])).unwrap();
        assert_eq!((lo, hi), (-1.0, 2.0));
    }

    #[test]
    fn indefinite_two_by_two() {
        let (lo, hi) = min_max_eigenvalues(&real(&[vec![1.0, 2.0], vec![2.0, 1.0]])).unwrap();
        assert_abs_diff_eq!(lo, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 3.0, epsilon = 1e-15);
    }

    #[test]
    fn complex_two_by_two() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(2.0, 0.0),
        ];
        let eig = hermitian_eigenvalues(2, &m).unwrap();
        assert_abs_diff_eq!(eig[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eig[1], 3.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
        ];
        assert!(matches!(
            hermitian_eigenvalues(2, &m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn trace_and_frobenius_are_preserved() {
        let n = 12;
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let v = Complex64::new(((i * 7 + j * 3) % 11) as f64 - 5.0, if i == j { 0.0 } else { ((i + 2 * j) % 5) as f64 - 2.0 });
                m[i * n + j] = v;
                m[j * n + i] = v.conj();
            }
        }
        let eig = hermitian_eigenvalues(n, &m).unwrap();
        let trace: f64 = (0..n).map(|i| m[i * n + i].re).sum();
        let frob: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(eig.iter().sum::<f64>(), trace, epsilon = 1e-11);
        assert_abs_diff_eq!(eig.iter().map(|e| e * e).sum::<f64>(), frob, epsilon = 1e-9);
    }
}
