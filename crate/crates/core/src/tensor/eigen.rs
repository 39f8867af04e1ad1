//! Hermitian eigendecomposition.
//!
//! 2×2 matrices use the closed form. Larger matrices go through cyclic
//! complex Jacobi sweeps: each rotation first removes the phase of the
//! pivot `a_pq`, then applies the real symmetric Jacobi rotation.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::matrix::{Matrix, HERMITIAN_TOL};

/// Relative off-diagonal threshold at which Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Components below this magnitude are skipped when fixing eigenvector phases.
const PHASE_EPS: f64 = 1e-12;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    values: Vec<f64>,
    vectors: Matrix,
}

impl Eigen {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] *= self.values[j];
            }
        }
        &scaled * &self.vectors.adjoint()
    }
}

/// Diagonalizes a Hermitian matrix.
pub fn eigh(m: &Matrix) -> Result<Eigen> {
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.dim();
    let (values, vectors) = match n {
        0 => (Vec::new(), Matrix::zeros(0)),
        1 => (vec![m[(0, 0)].re], Matrix::identity(1)),
        2 => closed_form_2x2(m),
        _ => jacobi(m),
    };
    Ok(canonicalize(values, vectors))
}

fn closed_form_2x2(m: &Matrix) -> (Vec<f64>, Matrix) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let radius = half_diff.hypot(b.norm());
    let mut vectors = Matrix::zeros(2);
    if b.norm() == 0.0 {
        // already diagonal
        let (lo, hi) = if a <= d { (0, 1) } else { (1, 0) };
        vectors[(lo, 0)] = C64::new(1.0, 0.0);
        vectors[(hi, 1)] = C64::new(1.0, 0.0);
        return (vec![a.min(d), a.max(d)], vectors);
    }
    let values = [mean - radius, mean + radius];
    for (k, &lambda) in values.iter().enumerate() {
        // (a - λ) x + b y = 0 and conj(b) x + (d - λ) y = 0; take the
        // better-conditioned of the two null vectors.
        let v1 = [b, C64::new(lambda - a, 0.0)];
        let v2 = [C64::new(lambda - d, 0.0), b.conj()];
        let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
        let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
        let (v, norm) = if n1 >= n2 { (v1, n1.sqrt()) } else { (v2, n2.sqrt()) };
        vectors[(0, k)] = v[0] / norm;
        vectors[(1, k)] = v[1] / norm;
    }
    (values.to_vec(), vectors)
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(m: &Matrix) -> (Vec<f64>, Matrix) {
    let n = m.dim();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE * scale {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let g = [
                    [C64::new(c, 0.0), C64::new(s, 0.0)],
                    [phase.conj() * -s, phase.conj() * c],
                ];
                rotate(&mut a, &mut v, p, q, &g);
            }
        }
    }
    let values = (0..n).map(|i| a[(i, i)].re).collect();
    (values, v)
}

/// `A ← G† A G`, `V ← V G` with `G` acting on the (p, q) plane.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, g: &[[C64; 2]; 2]) {
    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g[0][0] + akq * g[1][0];
        a[(k, q)] = akp * g[0][1] + akq * g[1][1];
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g[0][0] + vkq * g[1][0];
        v[(k, q)] = vkp * g[0][1] + vkq * g[1][1];
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g[0][0].conj() * apk + g[1][0].conj() * aqk;
        a[(q, k)] = g[0][1].conj() * apk + g[1][1].conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

/// Sorts ascending and makes the first non-negligible component of every
/// eigenvector real and positive.
fn canonicalize(values: Vec<f64>, vectors: Matrix) -> Eigen {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut sorted = Matrix::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        let col = vectors.column(old);
        let phase = col
            .iter()
            .find(|c| c.norm() > PHASE_EPS)
            .map(|c| c.conj() / c.norm())
            .unwrap_or(C64::new(1.0, 0.0));
        for i in 0..n {
            let mut x = col[i] * phase;
            if col[i].norm() > PHASE_EPS && x.im.abs() < f64::EPSILON * x.re.abs() {
                x.im = 0.0;
            }
            sorted[(i, new)] = x;
        }
    }
    Eigen { values: order.iter().map(|&i| values[i]).collect(), vectors: sorted }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(rng.random_range(-2.0..2.0), 0.0);
            for j in i + 1..n {
                let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    fn unitarity_residual(v: &Matrix) -> f64 {
        (&v.adjoint() * v).sub(&Matrix::identity(v.dim())).frobenius_norm()
    }

    #[test]
    fn pauli_z_spectrum() {
        let e = eigh(&Matrix::pauli_z()).unwrap();
        assert_eq!(e.values(), &[-1.0, 1.0]);
        assert_eq!(e.vectors().column(0), vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert_eq!(e.vectors().column(1), vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let e = eigh(&Matrix::pauli_x()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.values()[0] + 1.0).abs() < 1e-15);
        assert!((e.values()[1] - 1.0).abs() < 1e-15);
        let minus = e.vectors().column(0);
        let plus = e.vectors().column(1);
        assert!((minus[0] - C64::new(h, 0.0)).norm() < 1e-15);
        assert!((minus[1] - C64::new(-h, 0.0)).norm() < 1e-15);
        assert!((plus[0] - C64::new(h, 0.0)).norm() < 1e-15);
        assert!((plus[1] - C64::new(h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pauli_y_phase_convention() {
        let e = eigh(&Matrix::pauli_y()).unwrap();
        for k in 0..2 {
            let first = e.vectors()[(0, k)];
            assert!(first.re > 0.0 && first.im == 0.0);
        }
    }

    #[test]
    fn random_4x4_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_hermitian(4, &mut rng);
        let e = eigh(&m).unwrap();
        let rel = e.reconstruct().sub(&m).frobenius_norm() / m.frobenius_norm();
        assert!(rel <= 1e-10, "{rel}");
    }

    #[test]
    fn random_dims_2_to_6() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..100 {
            let n = 2 + trial % 5;
            let m = random_hermitian(n, &mut rng);
            let e = eigh(&m).unwrap();
            let rel = e.reconstruct().sub(&m).frobenius_norm() / m.frobenius_norm();
            assert!(rel <= 1e-10, "dim {n}: reconstruction {rel}");
            assert!(unitarity_residual(e.vectors()) <= 1e-10);
            assert!(e.values().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum_stays_orthonormal() {
        // diag(1, 1, 3) rotated by a random unitary built from eigenvectors
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = eigh(&random_hermitian(3, &mut rng)).unwrap().vectors().clone();
        let mut d = Matrix::zeros(3);
        d[(0, 0)] = C64::new(1.0, 0.0);
        d[(1, 1)] = C64::new(1.0, 0.0);
        d[(2, 2)] = C64::new(3.0, 0.0);
        let m = &(&u * &d) * &u.adjoint();
        let e = eigh(&m).unwrap();
        assert!((e.values()[0] - 1.0).abs() < 1e-12);
        assert!((e.values()[1] - 1.0).abs() < 1e-12);
        assert!((e.values()[2] - 3.0).abs() < 1e-12);
        assert!(unitarity_residual(e.vectors()) <= 1e-10);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Matrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(eigh(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn zero_matrix() {
        let e = eigh(&Matrix::zeros(3)).unwrap();
        assert_eq!(e.values(), &[0.0, 0.0, 0.0]);
        assert!(unitarity_residual(e.vectors()) == 0.0);
    }
}
