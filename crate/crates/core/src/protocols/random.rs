use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tensor::{HermitianObservable, Matrix, StateVector};

fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random qudit: `n` standard complex normals, normalized.
pub fn random_state(n: usize, seed: u64) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::Dimension(format!("state dimension {n} is below 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..n).map(|_| complex_normal(&mut rng)).collect();
    StateVector::qudit(amps)?.normalize()
}

/// Random Hermitian `(G + G†)/2` with `G` complex Gaussian.
pub fn random_hermitian(n: usize, seed: u64) -> Result<HermitianObservable> {
    if n < 2 {
        return Err(Error::Dimension(format!("observable dimension {n} is below 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Matrix::from_row_major(n, (0..n * n).map(|_| complex_normal(&mut rng)).collect())?;
    HermitianObservable::new(g.add(&g.adjoint()).scale(C64::new(0.5, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_and_deterministic() {
        for n in 2..6 {
            let a = random_state(n, 42).unwrap();
            assert!((a.norm() - 1.0).abs() < 1e-12);
            let b = random_state(n, 42).unwrap();
            assert!(a.amps().iter().zip(b.amps()).all(|(x, y)| x.re.to_bits() == y.re.to_bits()
                && x.im.to_bits() == y.im.to_bits()));
        }
        assert_ne!(random_state(2, 1).unwrap(), random_state(2, 2).unwrap());
    }

    #[test]
    fn haar_mean_of_sigma_z() {
        let z = HermitianObservable::pauli_z();
        let mean = (0..10_000).map(|s| z.expectation(random_state(2, s).unwrap().amps())).sum::<f64>() / 1e4;
        assert!(mean.abs() < 0.02, "{mean}");
    }

    #[test]
    fn hermitian_is_valid() {
        let h = random_hermitian(4, 7).unwrap();
        assert!(h.matrix().hermitian_deviation() == 0.0);
        assert!(random_hermitian(1, 0).is_err());
    }
}
