//! Seeded random sampling of algebra elements, states and cone points.
//!
//! All randomness flows through [`Sampler`], a ChaCha8 stream seeded from a
//! `u64`, so every experiment is reproducible from its recorded seed.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, AlgebraSpec};
use crate::linalg::{CMatrix, CVector};
use crate::scalar::{Real, C};

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent child stream derived from this one, e.g. one per worker.
    pub fn fork(&mut self) -> Self {
        Self::new(self.rng.random())
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn complex_normal<T: Real>(&mut self) -> C<T> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C::new(T::lit(s * self.normal()), T::lit(s * self.normal()))
    }

    /// Complex Ginibre matrix with unit-variance entries.
    pub fn ginibre<T: Real>(&mut self, n: usize) -> CMatrix<T> {
        CMatrix::from_fn(n, n, |_, _| self.complex_normal())
    }

    /// Haar-distributed unit vector in `C^n`.
    pub fn haar_unit_vector<T: Real>(&mut self, n: usize) -> CVector<T> {
        loop {
            let v = CVector::from_fn(n, |_, _| self.complex_normal::<T>());
            let norm = v.norm();
            if norm > T::lit(1e-8) {
                return v.unscale(norm);
            }
        }
    }

    /// GUE-type Hermitian matrix.
    pub fn hermitian_matrix<T: Real>(&mut self, n: usize) -> CMatrix<T> {
        let g = self.ginibre::<T>(n);
        (&g + g.adjoint()) * C::new(T::lit(0.5), T::zero())
    }

    /// Arbitrary element with Ginibre blocks.
    pub fn element<T: Real>(&mut self, spec: &Arc<AlgebraSpec>) -> AlgebraElement<T> {
        let blocks = spec.block_dims().iter().map(|&n| self.ginibre(n)).collect();
        AlgebraElement::new(spec.clone(), blocks).expect("shapes follow spec")
    }

    /// Self-adjoint element with GUE blocks.
    pub fn hermitian_element<T: Real>(&mut self, spec: &Arc<AlgebraSpec>) -> AlgebraElement<T> {
        let blocks = spec
            .block_dims()
            .iter()
            .map(|&n| self.hermitian_matrix(n))
            .collect();
        AlgebraElement::hermitian(spec.clone(), blocks).expect("shapes follow spec")
    }

    /// Positive definite density blocks with unit total trace.
    ///
    /// Each block is `G G* + c·1` with Ginibre `G` and a floor `c` so the
    /// spectrum stays well conditioned, weighted by random block masses.
    pub fn density_blocks<T: Real>(&mut self, spec: &AlgebraSpec) -> Vec<CMatrix<T>> {
        let weights: Vec<f64> = (0..spec.num_blocks())
            .map(|_| 0.2 + self.uniform())
            .collect();
        let wsum: f64 = weights.iter().sum();
        spec.block_dims()
            .iter()
            .zip(&weights)
            .map(|(&n, &w)| {
                let g = self.ginibre::<T>(n);
                let mut m = &g * g.adjoint();
                let floor = T::lit(0.1) * m.trace().re / T::lit(n as f64) + T::lit(1e-3);
                for i in 0..n {
                    m[(i, i)] += C::new(floor, T::zero());
                }
                let tr = m.trace().re;
                m * C::new(T::lit(w / wsum) / tr, T::zero())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Sampler::new(42);
        let mut b = Sampler::new(42);
        for _ in 0..10 {
            assert_eq!(a.normal(), b.normal());
        }
    }

    #[test]
    fn densities_are_normalized() {
        let spec = AlgebraSpec::new(vec![2, 3]).unwrap();
        let blocks: Vec<CMatrix<f64>> = Sampler::new(1).density_blocks(&spec);
        let tr: f64 = blocks.iter().map(|b| b.trace().re).sum();
        assert!((tr - 1.0).abs() < 1e-14);
    }
}
