//! Dense symmetric eigensolver (cyclic Jacobi) for the small matrices that
//! appear in negative-definiteness and positivity checks.

use num_complex::Complex64;

/// Eigen-decomposition of a real symmetric matrix. Eigenvalues ascend;
/// `vectors` is row-major with eigenvector `j` in column `j`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub n: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymEigen {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + j]).collect()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi on a row-major symmetric `n x n` matrix. Only symmetry of
/// the input is assumed; the upper triangle is mirrored down first.
pub fn sym_eigen(a: &[f64], n: usize) -> SymEigen {
    assert_eq!(a.len(), n * n, "matrix is not {n} x {n}");
    let mut m = a.to_vec();
    for i in 0..n {
        for j in 0..i {
            m[i * n + j] = m[j * n + i];
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm2: f64 = m.iter().map(|x| x * x).sum();
    let target = (f64::EPSILON * f64::EPSILON) * norm2;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| 2.0 * m[p * n + q] * m[p * n + q])
            .sum();
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * kp - s * kq;
                    m[k * n + q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * pk - s * qk;
                    m[q * n + k] = s * pk + c * qk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let (kp, kq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * kp - s * kq;
                    v[k * n + q] = s * kp + c * kq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (j, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + j] = v[i * n + src];
        }
    }
    SymEigen { n, values, vectors }
}

/// Eigenvalues (ascending) of a Hermitian matrix through the real symmetric
/// embedding `[[A, -B], [B, A]]`, whose spectrum is that of `A + iB` with
/// every eigenvalue doubled.
pub fn hermitian_eigenvalues(a: &[Complex64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n, "matrix is not {n} x {n}");
    let m = 2 * n;
    let mut r = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a[i * n + j];
            r[i * m + j] = z.re;
            r[(i + n) * m + (j + n)] = z.re;
            r[i * m + (j + n)] = -z.im;
            r[(i + n) * m + j] = z.im;
        }
    }
    let e = sym_eigen(&r, m);
    e.values.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};
    use proptest::prelude::*;

    fn random_symmetric(n: usize, seed: &[f64]) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                a[i * n + j] = seed[k % seed.len()] * ((i + 2 * j) as f64).sin();
                a[j * n + i] = a[i * n + j];
                k += 1;
            }
        }
        a
    }

    #[test]
    fn diagonal_and_small_cases() {
        let e = sym_eigen(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((e.values[0] - 1.0).abs() < 1e-15 && (e.values[1] - 3.0).abs() < 1e-15);
        let v = e.vector(1);
        assert!((v[0].abs() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(sym_eigen(&[], 0).values.is_empty());
    }

    #[test]
    fn hermitian_pauli_y() {
        let i = Complex64::i();
        let a = [Complex64::new(0.0, 0.0), -i, i, Complex64::new(0.0, 0.0)];
        let ev = hermitian_eigenvalues(&a, 2);
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn agrees_with_nalgebra(n in 1usize..24, seed in proptest::collection::vec(-3.0f64..3.0, 1..40)) {
            let a = random_symmetric(n, &seed);
            let ours = sym_eigen(&a, n);
            let mut theirs: Vec<f64> = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &a)).eigenvalues.iter().copied().collect();
            theirs.sort_by(f64::total_cmp);
            for (x, y) in ours.values.iter().zip(&theirs) {
                prop_assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
            // A v = lambda v
            for j in 0..n {
                let v = ours.vector(j);
                for i in 0..n {
                    let av: f64 = (0..n).map(|k| a[i * n + k] * v[k]).sum();
                    prop_assert!((av - ours.values[j] * v[i]).abs() < 1e-9);
                }
            }
        }
    }
}
