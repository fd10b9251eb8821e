//! The standard form `(M, H, P, J)` of a faithful state in the
//! Hilbert–Schmidt picture.
//!
//! The GNS space is the algebra itself with inner product
//! `⟨ξ, η⟩ = Σ_b tr(ξ_b* η_b)`. With `ρ` the density of the state:
//!
//! * `ξ₀ = ρ^{1/2}`, and `M` acts by left multiplication;
//! * `Δ^α ξ = ρ^α ξ ρ^{-α}` and `J ξ = ξ*`, so `j(A) ξ = ξ A*`;
//! * `σ_z(x) = ρ^{iz} x ρ^{-iz}` for every complex `z`;
//! * `P = {ρ^{1/4} a ρ^{1/4} : a ≥ 0}`, which as a set is the cone of
//!   blockwise positive semidefinite matrices for every faithful `ρ`.
//!
//! All modular quantities are evaluated in the eigenbasis of `ρ`, where the
//! GNS basis vector `|p⟩⟨q|` of a block is an eigenvector of `log Δ` with
//! eigenvalue `log r_p − log r_q`.
//!
//! In finite dimension `Δ` is bounded with bounded inverse, so every element
//! is entire for the modular flow and strip-analyticity requirements on
//! generators hold automatically; see [`ANALYTICITY_NOTE`].

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::ComplexField;

use crate::algebra::{check_shapes, AlgebraElement, AlgebraSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, HermitianEigen};
use crate::sampling::Sampler;
use crate::scalar::{cr, Real, C};

/// Surfaced in reports instead of checking strip-analyticity conditions.
pub const ANALYTICITY_NOTE: &str = "finite dimension: the modular operator is bounded with bounded \
inverse, so every element is entire for the modular flow and all strip-analyticity conditions \
on generators are satisfied";

/// A vector of the GNS space, stored as its blockwise matrix representative.
#[derive(Debug, Clone, PartialEq)]
pub struct GnsVector<T: Real> {
    spec: Arc<AlgebraSpec>,
    blocks: Vec<CMatrix<T>>,
}

impl<T: Real> GnsVector<T> {
    pub fn new(spec: Arc<AlgebraSpec>, blocks: Vec<CMatrix<T>>) -> Result<Self> {
        check_shapes(&spec, &blocks)?;
        Ok(Self { spec, blocks })
    }

    pub fn zero(spec: Arc<AlgebraSpec>) -> Self {
        let blocks = spec
            .block_dims()
            .iter()
            .map(|&n| CMatrix::zeros(n, n))
            .collect();
        Self { spec, blocks }
    }

    pub fn from_flat(spec: Arc<AlgebraSpec>, flat: &[C<T>]) -> Result<Self> {
        let e = AlgebraElement::from_flat(spec.clone(), flat)?;
        Ok(Self {
            spec,
            blocks: e.blocks().to_vec(),
        })
    }

    /// The element's matrix representative read as a GNS vector.
    pub fn from_element(x: &AlgebraElement<T>) -> Self {
        Self {
            spec: x.spec_arc().clone(),
            blocks: x.blocks().to_vec(),
        }
    }

    pub fn spec(&self) -> &Arc<AlgebraSpec> {
        &self.spec
    }

    pub fn blocks(&self) -> &[CMatrix<T>] {
        &self.blocks
    }

    pub fn flatten(&self) -> CVector<T> {
        let mut out = CVector::zeros(self.spec.dimension());
        for (m, off) in self.blocks.iter().zip(self.spec.block_offsets()) {
            out.rows_mut(off, m.len())
                .copy_from(&linalg::vec_row_major(m));
        }
        out
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C<T> {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .fold(cr(T::zero()), |acc, (a, b)| acc + linalg::hs_inner(a, b))
    }

    pub fn norm(&self) -> T {
        self.inner(self).re.max(T::zero()).sqrt()
    }

    pub fn scale(&self, c: C<T>) -> Self {
        Self {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().map(|b| b * c).collect(),
        }
    }

    /// `x ξ` (left action of `M`).
    pub fn left_mul(&self, x: &AlgebraElement<T>) -> Self {
        Self {
            spec: self.spec.clone(),
            blocks: x.blocks().iter().zip(&self.blocks).map(|(a, b)| a * b).collect(),
        }
    }

    /// `ξ x` (right multiplication; `j(A) ξ = ξ A*`).
    pub fn right_mul(&self, x: &AlgebraElement<T>) -> Self {
        Self {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().zip(x.blocks()).map(|(b, a)| b * a).collect(),
        }
    }

    /// Largest absolute entry of `ξ − Jξ`.
    pub fn j_real_defect(&self) -> T {
        self.blocks
            .iter()
            .map(linalg::hermitian_defect)
            .fold(T::zero(), |a, b| a.max(b))
    }

    fn map_blocks(&self, f: impl Fn(usize, &CMatrix<T>) -> CMatrix<T>) -> Self {
        Self {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().enumerate().map(|(i, b)| f(i, b)).collect(),
        }
    }

    fn zip_blocks(&self, other: &Self, f: impl Fn(&CMatrix<T>, &CMatrix<T>) -> CMatrix<T>) -> Self {
        assert_eq!(self.spec, other.spec, "GNS vectors over different algebras");
        Self {
            spec: self.spec.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

impl<T: Real> Add for &GnsVector<T> {
    type Output = GnsVector<T>;
    fn add(self, rhs: Self) -> GnsVector<T> {
        self.zip_blocks(rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for &GnsVector<T> {
    type Output = GnsVector<T>;
    fn sub(self, rhs: Self) -> GnsVector<T> {
        self.zip_blocks(rhs, |a, b| a - b)
    }
}

impl<T: Real> Neg for &GnsVector<T> {
    type Output = GnsVector<T>;
    fn neg(self) -> GnsVector<T> {
        self.scale(cr(-T::one()))
    }
}

impl<T: Real> Mul<T> for &GnsVector<T> {
    type Output = GnsVector<T>;
    fn mul(self, rhs: T) -> GnsVector<T> {
        self.scale(cr(rhs))
    }
}

/// A faithful state `ω(x) = Σ_b tr(ρ_b x_b)` with its density eigendecomposition.
#[derive(Debug, Clone)]
pub struct FaithfulState<T: Real> {
    spec: Arc<AlgebraSpec>,
    rho_blocks: Vec<CMatrix<T>>,
    eigen: Vec<HermitianEigen<T>>,
}

fn trace_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::default_epsilon() * T::lit(64.0))
}

impl<T: Real> FaithfulState<T> {
    /// Validates the density: Hermitian blocks (symmetrized), unit total trace
    /// and strictly positive spectrum.
    pub fn new(spec: Arc<AlgebraSpec>, rho_blocks: Vec<CMatrix<T>>) -> Result<Self> {
        check_shapes(&spec, &rho_blocks)?;
        let rho_blocks: Vec<_> = rho_blocks.iter().map(linalg::hermitize).collect();
        let trace = rho_blocks
            .iter()
            .fold(T::zero(), |acc, m| acc + m.trace().re);
        if (trace - T::one()).abs() > trace_tolerance() {
            return Err(Error::argument(format!(
                "density has trace {}, expected 1",
                trace.as_f64()
            )));
        }
        let eigen: Vec<_> = rho_blocks.iter().map(HermitianEigen::new).collect();
        for (b, e) in eigen.iter().enumerate() {
            if e.min() <= T::zero() {
                return Err(Error::argument(format!(
                    "state is not faithful: block {b} has eigenvalue {:e}",
                    e.min().as_f64()
                )));
            }
        }
        Ok(Self {
            spec,
            rho_blocks,
            eigen,
        })
    }

    /// Rescales positive blocks to unit total trace before validating.
    pub fn from_unnormalized(spec: Arc<AlgebraSpec>, rho_blocks: Vec<CMatrix<T>>) -> Result<Self> {
        check_shapes(&spec, &rho_blocks)?;
        let trace = rho_blocks
            .iter()
            .fold(T::zero(), |acc, m| acc + m.trace().re);
        if trace <= T::zero() {
            return Err(Error::argument("density has non-positive trace"));
        }
        let scaled = rho_blocks.iter().map(|m| m * cr(T::one() / trace)).collect();
        Self::new(spec, scaled)
    }

    /// The trace `τ = tr / Σ n_i`.
    pub fn tracial(spec: Arc<AlgebraSpec>) -> Self {
        let total: usize = spec.block_dims().iter().sum();
        let w = T::one() / T::lit(total as f64);
        let blocks = spec
            .block_dims()
            .iter()
            .map(|&n| linalg::identity::<T>(n) * cr(w))
            .collect();
        Self::new(spec, blocks).expect("tracial state is faithful")
    }

    pub fn random(spec: Arc<AlgebraSpec>, sampler: &mut Sampler) -> Self {
        let blocks = sampler.density_blocks(&spec);
        Self::new(spec, blocks).expect("sampled densities are faithful")
    }

    pub fn spec(&self) -> &Arc<AlgebraSpec> {
        &self.spec
    }

    pub fn rho_blocks(&self) -> &[CMatrix<T>] {
        &self.rho_blocks
    }

    pub fn eigen(&self) -> &[HermitianEigen<T>] {
        &self.eigen
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigen
            .iter()
            .map(|e| e.min())
            .fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b))
    }

    /// `ω(x)`.
    pub fn expectation(&self, x: &AlgebraElement<T>) -> C<T> {
        self.rho_blocks
            .iter()
            .zip(x.blocks())
            .fold(cr(T::zero()), |acc, (r, b)| acc + (r * b).trace())
    }
}

/// Result of a Moreau decomposition `ξ = ξ₊ − ξ₋` along the natural cone.
#[derive(Debug, Clone)]
pub struct ConeSplit<T: Real> {
    pub positive: GnsVector<T>,
    pub negative: GnsVector<T>,
    /// Relative KKT residual: distance of `ξ₋` from `P` and `|⟨ξ₊, ξ₋⟩|`,
    /// divided by `‖ξ‖²` (respectively `‖ξ‖`).
    pub residual: T,
    pub iterations: usize,
}

/// Settings for the iterative cone projection.
#[derive(Debug, Clone, Copy)]
pub struct IterativeCone {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for IterativeCone {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tolerance: 1e-9,
        }
    }
}

/// Modular data of one block: `ρ_b = U diag(r) U*`.
#[derive(Debug, Clone)]
struct BlockModular<T: Real> {
    u: CMatrix<T>,
    r: Vec<T>,
    ln_r: Vec<T>,
}

impl<T: Real> BlockModular<T> {
    fn to_eigen(&self, m: &CMatrix<T>) -> CMatrix<T> {
        self.u.adjoint() * m * &self.u
    }

    fn from_eigen(&self, m: &CMatrix<T>) -> CMatrix<T> {
        &self.u * m * self.u.adjoint()
    }

    /// Multiplies eigenbasis entry `(p, q)` by `exp(c (ln r_p − ln r_q))`.
    fn scale(&self, m: &CMatrix<T>, c: C<T>) -> CMatrix<T> {
        let mut e = self.to_eigen(m);
        let n = self.r.len();
        for p in 0..n {
            for q in 0..n {
                e[(p, q)] *= (c * cr(self.ln_r[p] - self.ln_r[q])).exp();
            }
        }
        self.from_eigen(&e)
    }

    /// Entrywise multiplication in the eigenbasis by `(r_p r_q)^α`.
    fn congruence(&self, m: &CMatrix<T>, alpha: T) -> CMatrix<T> {
        let mut e = self.to_eigen(m);
        let n = self.r.len();
        for p in 0..n {
            for q in 0..n {
                e[(p, q)] *= cr((alpha * (self.ln_r[p] + self.ln_r[q])).exp());
            }
        }
        self.from_eigen(&e)
    }
}

/// Standard form of a faithful state.
#[derive(Debug, Clone)]
pub struct StandardForm<T: Real> {
    state: FaithfulState<T>,
    xi0: GnsVector<T>,
    modular: Vec<BlockModular<T>>,
}

/// Builds the Hilbert–Schmidt standard form of `state`.
pub fn build_standard_form<T: Real>(state: FaithfulState<T>) -> Result<StandardForm<T>> {
    StandardForm::new(state)
}

impl<T: Real> StandardForm<T> {
    pub fn new(state: FaithfulState<T>) -> Result<Self> {
        let modular: Vec<_> = state
            .eigen()
            .iter()
            .map(|e| {
                if e.min() <= T::zero() {
                    return Err(Error::argument("state is not faithful"));
                }
                Ok(BlockModular {
                    u: e.vectors.clone(),
                    r: e.values.clone(),
                    ln_r: e.values.iter().map(|r| r.ln()).collect(),
                })
            })
            .collect::<Result<_>>()?;
        let xi0_blocks = state
            .eigen()
            .iter()
            .map(|e| e.apply_fn(|r| cr(r.sqrt())))
            .collect();
        let xi0 = GnsVector::new(state.spec().clone(), xi0_blocks)?;
        Ok(Self {
            state,
            xi0,
            modular,
        })
    }

    pub fn state(&self) -> &FaithfulState<T> {
        &self.state
    }

    pub fn spec(&self) -> &Arc<AlgebraSpec> {
        self.state.spec()
    }

    pub fn gns_dim(&self) -> usize {
        self.spec().dimension()
    }

    /// The cyclic and separating vector `ξ₀ = ρ^{1/2}`.
    pub fn xi0(&self) -> &GnsVector<T> {
        &self.xi0
    }

    /// Density eigenvalues `r_p` of block `b`, ascending.
    pub fn block_eigenvalues(&self, b: usize) -> &[T] {
        &self.modular[b].r
    }

    /// Unitary `U_b` diagonalizing the density of block `b`.
    pub fn block_eigenvectors(&self, b: usize) -> &CMatrix<T> {
        &self.modular[b].u
    }

    /// Eigenvalues `log r_p − log r_q` of `log Δ`, indexed like a flattened
    /// GNS vector written in the density eigenbasis.
    pub fn modular_log_eigenvalues(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.gns_dim());
        for m in &self.modular {
            for &lp in &m.ln_r {
                for &lq in &m.ln_r {
                    out.push(lp - lq);
                }
            }
        }
        out
    }

    /// Rewrites block matrices in the density eigenbasis, `U* m U`.
    pub fn to_eigenbasis(&self, blocks: &[CMatrix<T>]) -> Vec<CMatrix<T>> {
        self.modular
            .iter()
            .zip(blocks)
            .map(|(m, b)| m.to_eigen(b))
            .collect()
    }

    /// Inverse of [`Self::to_eigenbasis`].
    pub fn from_eigenbasis(&self, blocks: &[CMatrix<T>]) -> Vec<CMatrix<T>> {
        self.modular
            .iter()
            .zip(blocks)
            .map(|(m, b)| m.from_eigen(b))
            .collect()
    }

    fn scale_blocks(&self, blocks: &[CMatrix<T>], c: C<T>) -> Vec<CMatrix<T>> {
        self.modular
            .iter()
            .zip(blocks)
            .map(|(m, b)| m.scale(b, c))
            .collect()
    }

    /// `σ_z(x) = ρ^{iz} x ρ^{-iz}` for complex `z`.
    ///
    /// For real `z` this is a *-automorphism, and in general
    /// `σ_z(x)* = σ_{z̄}(x*)`.
    pub fn modular_flow(&self, z: C<T>, x: &AlgebraElement<T>) -> AlgebraElement<T> {
        let c = C::new(T::zero(), T::one()) * z;
        AlgebraElement::new(x.spec_arc().clone(), self.scale_blocks(x.blocks(), c))
            .expect("shape preserved")
    }

    /// `Δ^α ξ = ρ^α ξ ρ^{-α}`.
    pub fn delta_power(&self, alpha: T, xi: &GnsVector<T>) -> GnsVector<T> {
        GnsVector {
            spec: xi.spec.clone(),
            blocks: self.scale_blocks(&xi.blocks, cr(alpha)),
        }
    }

    /// The modular unitary group `Δ^{is} ξ`.
    pub fn modular_unitary(&self, s: T, xi: &GnsVector<T>) -> GnsVector<T> {
        GnsVector {
            spec: xi.spec.clone(),
            blocks: self.scale_blocks(&xi.blocks, C::new(T::zero(), s)),
        }
    }

    /// Modular conjugation `Jξ = ξ*` (blockwise conjugate transpose).
    pub fn j_conjugate(&self, xi: &GnsVector<T>) -> GnsVector<T> {
        xi.map_blocks(|_, b| b.adjoint())
    }

    /// Right action `j(A) ξ = J A J ξ = ξ A*`.
    pub fn j_action(&self, a: &AlgebraElement<T>, xi: &GnsVector<T>) -> GnsVector<T> {
        xi.right_mul(&a.adjoint())
    }

    /// `A ξ₀`.
    pub fn vector_of(&self, a: &AlgebraElement<T>) -> GnsVector<T> {
        self.xi0.left_mul(a)
    }

    /// The cone generator `Δ^{1/4} A A* ξ₀ = ρ^{1/4} A A* ρ^{1/4}`.
    pub fn cone_generator(&self, a: &AlgebraElement<T>) -> GnsVector<T> {
        let aa = a.compose(&a.adjoint()).expect("same algebra");
        self.delta_power(T::lit(0.25), &self.vector_of(&aa))
    }

    /// `ρ^{α} m ρ^{α}` blockwise.
    fn congruence(&self, xi: &GnsVector<T>, alpha: T) -> GnsVector<T> {
        xi.map_blocks(|b, m| self.modular[b].congruence(m, alpha))
    }

    /// `ρ^{1/4} a ρ^{1/4}` for a blockwise matrix `a`.
    pub fn cone_point(&self, a: &GnsVector<T>) -> GnsVector<T> {
        self.congruence(a, T::lit(0.25))
    }

    /// Membership in `P`: `ρ^{-1/4} ξ ρ^{-1/4}` must be Hermitian with
    /// smallest eigenvalue at least `−tol` in every block.
    pub fn cone_membership(&self, xi: &GnsVector<T>, tol: T) -> bool {
        self.cone_margin(xi) >= -tol
    }

    /// Smallest eigenvalue of `ρ^{-1/4} ξ ρ^{-1/4}` over the blocks, lowered
    /// by its Hermitian defect; nonnegative exactly on `P`.
    pub fn cone_margin(&self, xi: &GnsVector<T>) -> T {
        let a = self.congruence(xi, T::lit(-0.25));
        a.blocks
            .iter()
            .map(|m| {
                let defect = linalg::hermitian_defect(m);
                HermitianEigen::new(&linalg::hermitize(m)).min() - defect
            })
            .fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b))
    }

    fn check_j_real(&self, xi: &GnsVector<T>) -> Result<()> {
        let defect = xi.j_real_defect();
        let bound = T::lit(1e-12) * T::one().max(xi.norm());
        if defect > bound {
            return Err(Error::argument(format!(
                "vector is not J-real (defect {:e})",
                defect.as_f64()
            )));
        }
        Ok(())
    }

    /// KKT residual of a candidate split `ξ = ξ₊ − ξ₋` with `ξ₊ ∈ P` by
    /// construction.
    fn split_residual(&self, xi: &GnsVector<T>, pos: &GnsVector<T>, neg: &GnsVector<T>) -> T {
        let scale = xi.norm().max(T::lit(1e-300));
        let outside = neg
            .blocks
            .iter()
            .map(|m| {
                let e = HermitianEigen::new(m);
                e.values
                    .iter()
                    .filter(|&&v| v < T::zero())
                    .fold(T::zero(), |acc, &v| acc + v * v)
            })
            .fold(T::zero(), |a, b| a + b)
            .sqrt();
        let comp = pos.inner(neg).modulus();
        (outside / scale).max(comp / (scale * scale))
    }

    /// Moreau decomposition `ξ = ξ₊ − ξ₋` of a J-real vector, with `ξ₊` the
    /// metric projection onto `P` and `ξ₋ = Proj_P(−ξ)`.
    ///
    /// Since `P` is the blockwise positive semidefinite cone, the split is the
    /// spectral positive/negative part of each Hermitian block.
    pub fn cone_project(&self, xi: &GnsVector<T>, tol: T) -> Result<ConeSplit<T>> {
        self.check_j_real(xi)?;
        let mut pos = Vec::with_capacity(xi.blocks.len());
        let mut neg = Vec::with_capacity(xi.blocks.len());
        for m in &xi.blocks {
            let e = HermitianEigen::new(m);
            pos.push(e.apply_fn(|v| cr(v.max(T::zero()))));
            neg.push(e.apply_fn(|v| cr((-v).max(T::zero()))));
        }
        let positive = GnsVector::new(xi.spec.clone(), pos)?;
        let negative = GnsVector::new(xi.spec.clone(), neg)?;
        let residual = self.split_residual(xi, &positive, &negative);
        if residual > tol {
            return Err(Error::Numeric {
                message: "spectral cone split failed its optimality check".into(),
                residual: residual.as_f64(),
            });
        }
        Ok(ConeSplit {
            positive,
            negative,
            residual,
            iterations: 0,
        })
    }

    /// Projection onto `P` computed without using that `P` is the PSD cone:
    /// minimizes `‖ρ^{1/4} a ρ^{1/4} − ξ‖` over `a ≥ 0` by accelerated
    /// projected gradient with adaptive restart, per block in the density
    /// eigenbasis.
    pub fn cone_project_iterative(
        &self,
        xi: &GnsVector<T>,
        settings: IterativeCone,
    ) -> Result<ConeSplit<T>> {
        self.check_j_real(xi)?;
        let tol = T::lit(settings.tolerance);
        let eig_blocks: Vec<_> = self
            .to_eigenbasis(&xi.blocks)
            .iter()
            .map(linalg::hermitize)
            .collect();
        let weights: Vec<CMatrix<T>> = self
            .modular
            .iter()
            .map(|m| {
                let n = m.r.len();
                CMatrix::from_fn(n, n, |p, q| cr((m.r[p] * m.r[q]).sqrt().sqrt()))
            })
            .collect();

        let project_psd = |m: &CMatrix<T>| {
            HermitianEigen::new(&linalg::hermitize(m)).apply_fn(|v| cr(v.max(T::zero())))
        };
        let weighted = |w: &CMatrix<T>, a: &CMatrix<T>| w.component_mul(a);

        let mut a: Vec<CMatrix<T>> = eig_blocks
            .iter()
            .zip(&weights)
            .map(|(b, w)| project_psd(&b.component_div(w)))
            .collect();
        let mut y = a.clone();
        let mut momentum: Vec<T> = vec![T::one(); a.len()];
        let lipschitz: Vec<T> = self
            .modular
            .iter()
            .map(|m| m.r.iter().fold(T::zero(), |acc, &r| acc.max(r)).sqrt())
            .collect();

        let residual_of = |a: &[CMatrix<T>]| -> (T, GnsVector<T>, GnsVector<T>) {
            let pos_eig: Vec<_> = a
                .iter()
                .zip(&weights)
                .map(|(a, w)| weighted(w, a))
                .collect();
            let pos = GnsVector {
                spec: xi.spec.clone(),
                blocks: self.from_eigenbasis(&pos_eig),
            };
            let neg = &pos - xi;
            let res = self.split_residual(xi, &pos, &neg);
            (res, pos, neg)
        };

        let mut iterations = 0;
        let mut last = T::max_value().unwrap_or_else(T::one);
        while iterations < settings.max_iterations {
            iterations += 1;
            for k in 0..a.len() {
                let w = &weights[k];
                let grad = weighted(w, &(weighted(w, &y[k]) - &eig_blocks[k]));
                let step = &y[k] - grad.clone() * cr(T::one() / lipschitz[k]);
                let next = project_psd(&step);
                let delta = &next - &a[k];
                let t_next = (T::one()
                    + (T::one() + T::lit(4.0) * momentum[k] * momentum[k]).sqrt())
                    * T::lit(0.5);
                // restart when the momentum direction opposes descent
                if linalg::hs_inner(&(&y[k] - &next), &delta).re > T::zero() {
                    momentum[k] = T::one();
                    y[k] = next.clone();
                } else {
                    let beta = (momentum[k] - T::one()) / t_next;
                    y[k] = &next + delta * cr(beta);
                    momentum[k] = t_next;
                }
                a[k] = next;
            }
            if iterations % 10 == 0 || iterations == settings.max_iterations {
                let (res, positive, negative) = residual_of(&a);
                last = res;
                if res <= tol {
                    return Ok(ConeSplit {
                        positive,
                        negative,
                        residual: res,
                        iterations,
                    });
                }
            }
        }
        Err(Error::Convergence {
            iterations,
            residual: last.as_f64(),
        })
    }

    /// `ξ ∧ η = Proj(ξ, η − P) = η − Proj_P(η − ξ)`.
    pub fn meet(&self, xi: &GnsVector<T>, eta: &GnsVector<T>, tol: T) -> Result<GnsVector<T>> {
        self.check_j_real(xi)?;
        self.check_j_real(eta)?;
        let split = self.cone_project(&(eta - xi), tol)?;
        Ok(eta - &split.positive)
    }

    /// Sampled extreme ray `ρ^{1/4} u u* ρ^{1/4}` supported on one block,
    /// with `u` Haar-random; the block is chosen uniformly.
    pub fn sample_extreme_ray(&self, sampler: &mut Sampler) -> GnsVector<T> {
        let b = sampler.index(self.spec().num_blocks());
        self.extreme_ray_in_block(b, sampler)
    }

    pub fn extreme_ray_in_block(&self, b: usize, sampler: &mut Sampler) -> GnsVector<T> {
        let spec = self.spec().clone();
        let mut v = GnsVector::zero(spec);
        let n = v.blocks[b].nrows();
        let u = sampler.haar_unit_vector::<T>(n);
        v.blocks[b] = &u * u.adjoint();
        self.cone_point(&v)
    }

    /// A vector with `0 ≤ ξ ≤ ξ₀`: `ρ^{1/4} a ρ^{1/4}` with `a = V diag(s) V*`,
    /// `V` Haar-random and `s` uniform in `[0, 1]`.
    pub fn sample_order_interval(&self, sampler: &mut Sampler) -> GnsVector<T> {
        let blocks = self
            .spec()
            .block_dims()
            .iter()
            .map(|&n| {
                let g = sampler.ginibre::<T>(n);
                let q = g.qr().q();
                let s = CVector::from_fn(n, |_, _| cr(T::lit(sampler.uniform())));
                let scaled = CMatrix::from_fn(n, n, |i, j| q[(i, j)] * s[j]);
                linalg::hermitize(&(scaled * q.adjoint()))
            })
            .collect();
        let a = GnsVector {
            spec: self.spec().clone(),
            blocks,
        };
        self.cone_point(&a)
    }

    /// Random J-real vector with GUE blocks.
    pub fn sample_j_real(&self, sampler: &mut Sampler) -> GnsVector<T> {
        let blocks = self
            .spec()
            .block_dims()
            .iter()
            .map(|&n| sampler.hermitian_matrix::<T>(n))
            .collect();
        GnsVector {
            spec: self.spec().clone(),
            blocks,
        }
    }

    /// Random complex vector with Ginibre blocks.
    pub fn sample_vector(&self, sampler: &mut Sampler) -> GnsVector<T> {
        let blocks = self
            .spec()
            .block_dims()
            .iter()
            .map(|&n| sampler.ginibre::<T>(n))
            .collect();
        GnsVector {
            spec: self.spec().clone(),
            blocks,
        }
    }
}
