#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use sepkit::{ComplexMatrix, C64};

pub fn gaussian<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| gaussian(rng))
}

/// `(G + G^dagger) / 2` for a complex Gaussian `G`.
pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    random_matrix(rng, n).hermitian_part()
}

pub fn unit_vector<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.map(|x| x / norm);
        }
    }
}
