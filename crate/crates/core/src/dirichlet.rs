//! Assembly of the Dirichlet operator `H = Σ_k H_k` with
//!
//! ```text
//! E_k(η, ξ) = ∫ ⟨D_k(t) η, D_k(t) ξ⟩ f(t) dt,
//! D_k(t) = σ_{t−i/4}(x_k) − j(σ_{t−i/4}(x_k)).
//! ```
//!
//! On the Hilbert–Schmidt GNS space `D_k(t) ξ = y(t) ξ − ξ y(t)*` with
//! `y(t) = ρ^{it+1/4} x_k ρ^{-it-1/4}`, and `D_k(t) = Δ^{it} D_k(0) Δ^{-it}`.
//! In the eigenbasis of `log Δ` the time integral therefore reduces to the
//! entrywise product of `D_k(0)† D_k(0)` with `f̂(λ_α − λ_β)`; that is the
//! spectral route. The quadrature route integrates `D_k(t)† D_k(t) f(t)`
//! directly on a grid and exists as an independent cross-check.
//!
//! `H` is block diagonal along the blocks of `M`, so all work is done per
//! block and scattered into the full `gns_dim × gns_dim` matrix.

use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen};
use crate::scalar::{cr, Real, C};
use crate::standard_form::{GnsVector, StandardForm};
use crate::weight::WeightFunction;

pub use crate::weight::Quadrature;

/// The Dirichlet operator as a dense Hermitian matrix on the GNS space
/// (row-major block flattening), with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix<T: Real> {
    sf: Arc<StandardForm<T>>,
    family: Vec<AlgebraElement<T>>,
    weight: WeightFunction<T>,
    matrix: CMatrix<T>,
    eigenvalues: Vec<T>,
    eigenvectors: CMatrix<T>,
    per_k: Option<Vec<CMatrix<T>>>,
}

impl<T: Real> GeneratorMatrix<T> {
    fn from_blocks(
        sf: Arc<StandardForm<T>>,
        family: Vec<AlgebraElement<T>>,
        weight: WeightFunction<T>,
        blocks: Vec<CMatrix<T>>,
        per_k: Option<Vec<Vec<CMatrix<T>>>>,
    ) -> Self {
        let spec = sf.spec().clone();
        let dim = spec.dimension();
        let scatter = |bl: &[CMatrix<T>]| {
            let mut full = CMatrix::zeros(dim, dim);
            for (b, m) in bl.iter().enumerate() {
                let r = spec.block_range(b);
                full.view_mut((r.start, r.start), (m.nrows(), m.ncols()))
                    .copy_from(m);
            }
            full
        };
        let matrix = scatter(&blocks);
        let per_k = per_k.map(|ks| ks.iter().map(|bl| scatter(bl)).collect());

        let mut pairs: Vec<(T, usize, usize)> = Vec::with_capacity(dim);
        let eigs: Vec<HermitianEigen<T>> = blocks.iter().map(HermitianEigen::new).collect();
        for (b, e) in eigs.iter().enumerate() {
            for (i, &v) in e.values.iter().enumerate() {
                pairs.push((v, b, i));
            }
        }
        pairs.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let mut eigenvectors = CMatrix::zeros(dim, dim);
        let mut eigenvalues = Vec::with_capacity(dim);
        for (col, &(v, b, i)) in pairs.iter().enumerate() {
            eigenvalues.push(v);
            let r = spec.block_range(b);
            eigenvectors
                .view_mut((r.start, col), (r.len(), 1))
                .copy_from(&eigs[b].vectors.column(i));
        }
        Self {
            sf,
            family,
            weight,
            matrix,
            eigenvalues,
            eigenvectors,
            per_k,
        }
    }

    pub fn standard_form(&self) -> &StandardForm<T> {
        &self.sf
    }

    pub fn standard_form_arc(&self) -> &Arc<StandardForm<T>> {
        &self.sf
    }

    pub fn family(&self) -> &[AlgebraElement<T>] {
        &self.family
    }

    pub fn weight(&self) -> &WeightFunction<T> {
        &self.weight
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, matching [`Self::eigenvalues`].
    /// Each eigenvector is supported on a single block of `M`.
    pub fn eigenvectors(&self) -> &CMatrix<T> {
        &self.eigenvectors
    }

    /// Per-generator summands `H_k`, when retained.
    pub fn per_k(&self) -> Option<&[CMatrix<T>]> {
        self.per_k.as_deref()
    }

    pub fn drop_summands(&mut self) {
        self.per_k = None;
    }

    /// `‖H‖`, the largest eigenvalue magnitude.
    pub fn norm(&self) -> T {
        self.eigenvalues
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn hermitian_defect(&self) -> T {
        linalg::hermitian_defect(&self.matrix)
    }

    /// `H ξ`.
    pub fn apply(&self, xi: &GnsVector<T>) -> GnsVector<T> {
        let v = &self.matrix * xi.flatten();
        GnsVector::from_flat(xi.spec().clone(), v.as_slice()).expect("dimension preserved")
    }

    /// `H_k ξ`.
    pub fn apply_k(&self, k: usize, xi: &GnsVector<T>) -> Result<GnsVector<T>> {
        let hk = self.summand(k)?;
        let v = hk * xi.flatten();
        GnsVector::from_flat(xi.spec().clone(), v.as_slice())
    }

    fn summand(&self, k: usize) -> Result<&CMatrix<T>> {
        let per_k = self.per_k.as_ref().ok_or_else(|| {
            Error::Capability("per-generator summands were not retained".into())
        })?;
        per_k
            .get(k)
            .ok_or_else(|| Error::argument(format!("generator index {k} out of range")))
    }
}

/// Options for [`assemble_generator_spectral_with`].
#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    /// Keep the per-generator summands `H_k` (needed by [`per_k_energy`]).
    pub keep_summands: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            keep_summands: true,
        }
    }
}

fn validate_family<T: Real>(sf: &StandardForm<T>, family: &[AlgebraElement<T>]) -> Result<()> {
    for (k, x) in family.iter().enumerate() {
        if x.spec() != sf.spec().as_ref() {
            return Err(Error::structural(format!(
                "generator {k} lives in {}, state in {}",
                x.spec(),
                sf.spec()
            )));
        }
        let scale = T::one().max(x.op_norm());
        if x.self_adjoint_defect() > T::lit(1e-12) * scale {
            return Err(Error::argument(format!(
                "generator {k} is not self-adjoint; split it with split_self_adjoint first"
            )));
        }
    }
    Ok(())
}

/// `D†D` for `D ξ = y ξ − ξ y*` on one `n × n` block:
/// `ξ ↦ y*y ξ + ξ y*y − y* ξ y* − y ξ y`.
fn derivation_gram<T: Real>(y: &CMatrix<T>) -> CMatrix<T> {
    let n = y.nrows();
    let id = linalg::identity::<T>(n);
    let ys = y.adjoint();
    let yy = &ys * y;
    linalg::left_right_superop(&yy, &id) + linalg::left_right_superop(&id, &yy)
        - linalg::left_right_superop(&ys, &ys)
        - linalg::left_right_superop(y, y)
}

/// Weights `f̂(λ_α − λ_β)` of one block, `λ_{(p,q)} = ln r_p − ln r_q`.
fn transform_weights<T: Real>(
    sf: &StandardForm<T>,
    b: usize,
    f: &WeightFunction<T>,
) -> Result<CMatrix<T>> {
    let r = sf.block_eigenvalues(b);
    let n = r.len();
    let ln: Vec<T> = r.iter().map(|v| v.ln()).collect();
    let lam: Vec<T> = (0..n * n).map(|a| ln[a / n] - ln[a % n]).collect();
    let mut cache: std::collections::HashMap<u64, C<T>> = std::collections::HashMap::new();
    let mut w = CMatrix::zeros(n * n, n * n);
    for a in 0..n * n {
        for c in 0..n * n {
            let omega = lam[a] - lam[c];
            let key = omega.as_f64().to_bits();
            let v = match cache.get(&key) {
                Some(v) => *v,
                None => {
                    let v = f.spectral_transform(omega)?;
                    cache.insert(key, v);
                    v
                }
            };
            w[(a, c)] = v;
        }
    }
    Ok(w)
}

/// Per-block summand `H_{k,b}` in the modular eigenbasis.
fn spectral_block_summand<T: Real>(
    sf: &StandardForm<T>,
    b: usize,
    x: &CMatrix<T>,
    weights: &CMatrix<T>,
) -> CMatrix<T> {
    let u = sf.block_eigenvectors(b);
    let r = sf.block_eigenvalues(b);
    let n = r.len();
    let xe = u.adjoint() * x * u;
    // y = σ_{-i/4}(x) = ρ^{1/4} x ρ^{-1/4}
    let y = CMatrix::from_fn(n, n, |p, q| {
        xe[(p, q)] * cr(((r[p].ln() - r[q].ln()) * T::lit(0.25)).exp())
    });
    derivation_gram(&y).component_mul(weights)
}

/// Spectral assembly, retaining the per-generator summands.
pub fn assemble_generator_spectral<T: Real>(
    sf: &StandardForm<T>,
    family: &[AlgebraElement<T>],
    f: &WeightFunction<T>,
) -> Result<GeneratorMatrix<T>> {
    assemble_generator_spectral_with(sf, family, f, AssemblyOptions::default())
}

/// Exact integration of the time integral in the modular eigenbasis.
///
/// Summands are computed in parallel over `k` and reduced in index order, so
/// the result does not depend on scheduling.
pub fn assemble_generator_spectral_with<T: Real>(
    sf: &StandardForm<T>,
    family: &[AlgebraElement<T>],
    f: &WeightFunction<T>,
    options: AssemblyOptions,
) -> Result<GeneratorMatrix<T>> {
    validate_family(sf, family)?;
    let spec = sf.spec().clone();
    let nb = spec.num_blocks();
    let mut blocks = Vec::with_capacity(nb);
    let mut per_k_blocks: Vec<Vec<CMatrix<T>>> = vec![Vec::with_capacity(nb); family.len()];
    let chunk = rayon::current_num_threads().max(1);
    for b in 0..nb {
        let n = spec.block_dims()[b];
        let weights = transform_weights(sf, b, f)?;
        let u = sf.block_eigenvectors(b);
        let basis_change = linalg::left_right_superop(u, &u.adjoint());
        let mut acc = CMatrix::zeros(n * n, n * n);
        for (c, group) in family.chunks(chunk).enumerate() {
            let parts: Vec<CMatrix<T>> = group
                .par_iter()
                .map(|x| spectral_block_summand(sf, b, x.block(b), &weights))
                .collect();
            for (i, hk) in parts.into_iter().enumerate() {
                acc += &hk;
                if options.keep_summands {
                    let hk = &basis_change * hk * basis_change.adjoint();
                    per_k_blocks[c * chunk + i].push(linalg::hermitize(&hk));
                }
            }
        }
        let acc = &basis_change * acc * basis_change.adjoint();
        blocks.push(linalg::hermitize(&acc));
    }
    Ok(GeneratorMatrix::from_blocks(
        Arc::new(sf.clone()),
        family.to_vec(),
        f.clone(),
        blocks,
        options.keep_summands.then_some(per_k_blocks),
    ))
}

/// Superoperator of `ξ ↦ y ξ − ξ y*` on one block.
fn derivation_superop<T: Real>(y: &CMatrix<T>) -> CMatrix<T> {
    let id = linalg::identity::<T>(y.nrows());
    linalg::left_right_superop(y, &id) - linalg::left_right_superop(&id, &y.adjoint())
}

/// Largest tolerated Hermitian defect of the quadrature sum, relative to its
/// largest entry.
pub const QUADRATURE_HERMITIAN_TOLERANCE: f64 = 1e-8;

/// Direct trapezoidal integration of `∫ D_k(t)† D_k(t) f(t) dt` on
/// `[−t_max, t_max]`, with `D_k(t)` built from the modular flow at `t − i/4`.
pub fn assemble_generator_quadrature<T: Real>(
    sf: &StandardForm<T>,
    family: &[AlgebraElement<T>],
    f: &WeightFunction<T>,
    quad: &Quadrature,
) -> Result<GeneratorMatrix<T>> {
    validate_family(sf, family)?;
    quad.validate()?;
    let spec = sf.spec().clone();
    let points: Vec<(T, T)> = quad.points();
    let quarter = T::lit(0.25);

    let per_k: Vec<Vec<CMatrix<T>>> = family
        .par_iter()
        .map(|x| {
            let mut acc: Vec<CMatrix<T>> = spec
                .block_dims()
                .iter()
                .map(|&n| CMatrix::zeros(n * n, n * n))
                .collect();
            for &(t, w) in &points {
                let ft = f.eval(t);
                if ft == T::zero() {
                    continue;
                }
                let y = sf.modular_flow(C::new(t, -quarter), x);
                for (b, a) in acc.iter_mut().enumerate() {
                    let d = derivation_superop(y.block(b));
                    *a += (d.adjoint() * &d) * cr(ft * w);
                }
            }
            acc
        })
        .collect();

    let mut blocks: Vec<CMatrix<T>> = spec
        .block_dims()
        .iter()
        .map(|&n| CMatrix::zeros(n * n, n * n))
        .collect();
    for hk in &per_k {
        for (a, m) in blocks.iter_mut().zip(hk) {
            *a += m;
        }
    }
    for m in &blocks {
        let defect = linalg::hermitian_defect(m);
        let scale = T::one().max(linalg::max_abs(m));
        if defect > T::lit(QUADRATURE_HERMITIAN_TOLERANCE) * scale {
            return Err(Error::Numeric {
                message: "quadrature sum is not Hermitian".into(),
                residual: defect.as_f64(),
            });
        }
    }
    let blocks = blocks.iter().map(linalg::hermitize).collect();
    let per_k = per_k
        .into_iter()
        .map(|bl| bl.iter().map(linalg::hermitize).collect())
        .collect();
    Ok(GeneratorMatrix::from_blocks(
        Arc::new(sf.clone()),
        family.to_vec(),
        f.clone(),
        blocks,
        Some(per_k),
    ))
}

/// `D_x(t) ξ = σ_{t−i/4}(x) ξ − j(σ_{t−i/4}(x)) ξ`.
pub fn derivation_apply<T: Real>(
    sf: &StandardForm<T>,
    x: &AlgebraElement<T>,
    t: T,
    xi: &GnsVector<T>,
) -> GnsVector<T> {
    let y = sf.modular_flow(C::new(t, T::lit(-0.25)), x);
    &xi.left_mul(&y) - &sf.j_action(&y, xi)
}

/// `E(ξ, η) = ⟨ξ, H η⟩`, antilinear in `ξ`.
pub fn form_eval<T: Real>(h: &GeneratorMatrix<T>, xi: &GnsVector<T>, eta: &GnsVector<T>) -> C<T> {
    xi.flatten().dotc(&(h.matrix() * eta.flatten()))
}

/// `E_k[ξ] = ⟨ξ, H_k ξ⟩`.
pub fn per_k_energy<T: Real>(h: &GeneratorMatrix<T>, k: usize, xi: &GnsVector<T>) -> Result<T> {
    let hk = h.summand(k)?;
    let v = xi.flatten();
    Ok(v.dotc(&(hk * &v)).re)
}
