//! The semigroup `T_t = e^{-tH}`, its fixed space `N = ker H`, the center
//! subspace `[Z(M)ξ₀]`, and the checks tying them together.
//!
//! Ergodicity is decided structurally (`dim N = 1` with `N ∥ ξ₀`); the
//! sampled definition, strict positivity of `⟨ξ, T_t η⟩` for cone pairs, is
//! run alongside as corroboration.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::algebra::{center_basis, generated_subalgebra, AlgebraElement};
use crate::dirichlet::{
    assemble_generator_spectral_with, derivation_apply, per_k_energy, AssemblyOptions,
    GeneratorMatrix,
};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::sampling::Sampler;
use crate::scalar::{cr, Real, C};
use crate::standard_form::{GnsVector, IterativeCone, StandardForm, ANALYTICITY_NOTE};
use crate::weight::WeightFunction;

/// Numerical cut-offs used by the verifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative kernel threshold: eigenvalues `≤ kernel·max(1, ‖H‖)` are zero.
    pub kernel: f64,
    /// Allowed negative eigenvalue of `H`.
    pub psd: f64,
    /// Largest principal angle (radians) accepted as equal subspaces.
    pub subspace: f64,
    /// Cone membership / positivity tolerance.
    pub cone: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            kernel: 1e-9,
            psd: 1e-10,
            subspace: 1e-7,
            cone: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kernel", self.kernel),
            ("psd", self.psd),
            ("subspace", self.subspace),
            ("cone", self.cone),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::argument(format!("tolerance {name} must be positive")));
            }
        }
        Ok(())
    }
}

/// How the sampled Markovianity and ergodicity checks draw their samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingPlan {
    /// Cone pairs for the positivity and ergodicity checks.
    pub pairs: usize,
    /// Order-interval vectors `0 ≤ ξ ≤ ξ₀` for the sub-Markov check.
    pub interval_samples: usize,
    pub t_grid: Vec<f64>,
    pub seed: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            pairs: 1000,
            interval_samples: 500,
            t_grid: vec![0.1, 1.0, 10.0],
            seed: 0,
        }
    }
}

/// `T_t ξ = e^{-tH} ξ` through the stored eigendecomposition.
pub fn evolve<T: Real>(h: &GeneratorMatrix<T>, t: T, xi: &GnsVector<T>) -> Result<GnsVector<T>> {
    let m = semigroup_matrix(h, t)?;
    let v = m * xi.flatten();
    GnsVector::from_flat(xi.spec().clone(), v.as_slice())
}

/// Dense `e^{-tH}`. Eigenvalues below zero (rounding) are clamped to zero so
/// that the semigroup stays contractive.
pub fn semigroup_matrix<T: Real>(h: &GeneratorMatrix<T>, t: T) -> Result<CMatrix<T>> {
    if t < T::zero() || !t.is_finite() {
        return Err(Error::argument("semigroup time must be finite and non-negative"));
    }
    if t == T::zero() {
        return Ok(linalg::identity(h.matrix().nrows()));
    }
    let v = h.eigenvectors();
    let mut scaled = v.clone();
    for (j, &lam) in h.eigenvalues().iter().enumerate() {
        let s = cr((-t * lam.max(T::zero())).exp());
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= s;
        }
    }
    Ok(scaled * v.adjoint())
}

/// Orthonormal basis of `ker H` with the information needed to judge how
/// cleanly the kernel separates from the rest of the spectrum.
#[derive(Debug, Clone)]
pub struct FixedSpace<T: Real> {
    pub basis: Vec<GnsVector<T>>,
    pub tol_used: f64,
    /// Absolute cut `tol · max(1, ‖H‖)`.
    pub threshold: f64,
    /// `(first rejected − last accepted eigenvalue) / max(1, ‖H‖)`;
    /// infinite when every eigenvalue was accepted.
    pub eigenvalue_margin: f64,
    /// False when the margin is below ten times the tolerance.
    pub well_separated: bool,
}

impl<T: Real> FixedSpace<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Eigenvectors of `H` with eigenvalue at most `tol · max(1, ‖H‖)`.
pub fn fixed_space<T: Real>(h: &GeneratorMatrix<T>, tol: f64) -> FixedSpace<T> {
    let scale = 1.0f64.max(h.norm().as_f64());
    let threshold = tol * scale;
    let ev = h.eigenvalues();
    let spec = h.standard_form().spec().clone();
    let accepted = ev.iter().take_while(|v| v.as_f64() <= threshold).count();
    let basis = (0..accepted)
        .map(|j| {
            let col = h.eigenvectors().column(j).into_owned();
            GnsVector::from_flat(spec.clone(), col.as_slice()).expect("dimension matches")
        })
        .collect();
    let eigenvalue_margin = if accepted == ev.len() {
        f64::INFINITY
    } else {
        let last = if accepted == 0 {
            0.0
        } else {
            ev[accepted - 1].as_f64().max(0.0)
        };
        (ev[accepted].as_f64() - last) / scale
    };
    FixedSpace {
        basis,
        tol_used: tol,
        threshold,
        eigenvalue_margin,
        well_separated: eigenvalue_margin >= 10.0 * tol,
    }
}

/// Orthonormalized `{e_i ξ₀}` for the block units `e_i`.
pub fn center_vector_space<T: Real>(sf: &StandardForm<T>) -> Vec<GnsVector<T>> {
    center_basis::<T>(sf.spec())
        .iter()
        .map(|e| {
            let v = sf.vector_of(e);
            let n = v.norm();
            v.scale(cr(T::one() / n))
        })
        .collect()
}

/// Largest principal angle between two spans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceDistance {
    /// Radians; `π/2` when the dimensions differ.
    pub angle: f64,
    pub dims_match: bool,
}

fn as_columns<T: Real>(basis: &[GnsVector<T>], dim: usize) -> CMatrix<T> {
    let mut m = CMatrix::zeros(dim, basis.len());
    for (j, v) in basis.iter().enumerate() {
        m.set_column(j, &v.flatten());
    }
    m
}

/// Largest principal angle between `span U` and `span V` (orthonormal inputs).
///
/// Computed as `asin σ_max((1 − V V*) U)` rather than from the cosines, so
/// small angles keep full relative accuracy.
pub fn subspace_distance<T: Real>(u: &[GnsVector<T>], v: &[GnsVector<T>]) -> SubspaceDistance {
    if u.len() != v.len() {
        return SubspaceDistance {
            angle: FRAC_PI_2,
            dims_match: false,
        };
    }
    if u.is_empty() {
        return SubspaceDistance {
            angle: 0.0,
            dims_match: true,
        };
    }
    let dim = u[0].spec().dimension();
    let um = as_columns(u, dim);
    let vm = as_columns(v, dim);
    let residual = &um - &vm * (vm.adjoint() * &um);
    let s = linalg::op_norm(&residual).as_f64().min(1.0);
    SubspaceDistance {
        angle: s.asin(),
        dims_match: true,
    }
}

/// `max_i ‖(1 − P_V) u_i‖` for vectors `u_i` and an orthonormal `V`.
pub fn containment_residual<T: Real>(u: &[GnsVector<T>], v: &[GnsVector<T>]) -> f64 {
    u.iter()
        .map(|x| {
            let mut r = x.clone();
            for b in v {
                r = &r - &b.scale(b.inner(x));
            }
            r.norm().as_f64()
        })
        .fold(0.0, f64::max)
}

/// Smallest eigenvalue above the kernel cut `tol · max(1, ‖H‖)`; zero if none.
pub fn spectral_gap<T: Real>(h: &GeneratorMatrix<T>, tol: f64) -> f64 {
    let threshold = tol * 1.0f64.max(h.norm().as_f64());
    h.eigenvalues()
        .iter()
        .map(|v| v.as_f64())
        .find(|&v| v > threshold)
        .unwrap_or(0.0)
}

/// Outcome of the sampled Markovianity checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovReport {
    /// `max_t ‖T_t ξ₀ − ξ₀‖ ≤ tol`.
    pub unital: bool,
    pub unital_residual: f64,
    /// Smallest `Re ⟨η, T_t ξ⟩` over sampled cone pairs and times.
    pub positivity_min: f64,
    pub positivity_ok: bool,
    /// Smallest cone margin of `T_t ξ` and `ξ₀ − T_t ξ` over order-interval samples.
    pub interval_margin_min: f64,
    pub submarkov_failures: usize,
    pub pair_samples: usize,
    pub interval_samples: usize,
    pub t_grid: Vec<f64>,
    pub seed: u64,
}

/// Unitality, positivity preservation (via self-duality: `T_t P ⊆ P` iff
/// `⟨η, T_t ξ⟩ ≥ 0` for cone pairs) and sub-Markovianity on `[0, ξ₀]`.
pub fn check_markovian<T: Real>(
    h: &GeneratorMatrix<T>,
    plan: &SamplingPlan,
    tol: f64,
) -> Result<MarkovReport> {
    let sf = h.standard_form();
    let spec = sf.spec().clone();
    let xi0 = sf.xi0().flatten();
    let mut rng = Sampler::new(plan.seed);
    let semigroups = plan
        .t_grid
        .iter()
        .map(|&t| semigroup_matrix(h, T::lit(t)))
        .collect::<Result<Vec<_>>>()?;

    let unital_residual = semigroups
        .iter()
        .map(|m| (m * &xi0 - &xi0).norm().as_f64())
        .fold(0.0, f64::max);

    let mut positivity_min = f64::INFINITY;
    for _ in 0..plan.pairs {
        let xi = sf.sample_extreme_ray(&mut rng).flatten();
        let eta = sf.sample_extreme_ray(&mut rng).flatten();
        for m in &semigroups {
            let p = eta.dotc(&(m * &xi)).re.as_f64();
            positivity_min = positivity_min.min(p);
        }
    }

    let mut interval_margin_min = f64::INFINITY;
    let mut submarkov_failures = 0;
    for _ in 0..plan.interval_samples {
        let xi = sf.sample_order_interval(&mut rng);
        let flat = xi.flatten();
        for m in &semigroups {
            let txi = GnsVector::from_flat(spec.clone(), (m * &flat).as_slice())?;
            let lower = sf.cone_margin(&txi).as_f64();
            let upper = sf.cone_margin(&(sf.xi0() - &txi)).as_f64();
            let margin = lower.min(upper);
            interval_margin_min = interval_margin_min.min(margin);
            if margin < -tol {
                submarkov_failures += 1;
            }
        }
    }

    Ok(MarkovReport {
        unital: unital_residual <= tol,
        unital_residual,
        positivity_min,
        positivity_ok: positivity_min >= -tol,
        interval_margin_min,
        submarkov_failures,
        pair_samples: plan.pairs,
        interval_samples: plan.interval_samples,
        t_grid: plan.t_grid.clone(),
        seed: plan.seed,
    })
}

/// A sampled cone pair for which no grid time gave a positive pairing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicWitness {
    pub sample: usize,
    pub xi_block: usize,
    pub eta_block: usize,
    pub max_pairing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicCheck {
    pub ergodic: bool,
    pub samples: usize,
    pub failures: usize,
    /// First failing pairs, at most 16.
    pub witnesses: Vec<ErgodicWitness>,
}

/// Samples extreme rays `(ξ, η)` of `P` (each in a uniformly chosen block) and
/// looks for a grid time with `⟨ξ, T_t η⟩ > tol`. The grid is extended by
/// `20 / gap` when all its times are shorter.
pub fn check_ergodic<T: Real>(
    h: &GeneratorMatrix<T>,
    plan: &SamplingPlan,
    tol: f64,
) -> Result<ErgodicCheck> {
    let sf = h.standard_form();
    let nb = sf.spec().num_blocks();
    let mut rng = Sampler::new(plan.seed ^ 0x9e37_79b9_7f4a_7c15);
    // A slow generator needs a time past its relaxation scale; append 20/gap.
    let mut grid = plan.t_grid.clone();
    let gap = spectral_gap(h, 1e-9);
    if gap > 0.0 && grid.iter().all(|&t| t < 20.0 / gap) {
        grid.push(20.0 / gap);
    }
    let semigroups = grid
        .iter()
        .map(|&t| semigroup_matrix(h, T::lit(t)))
        .collect::<Result<Vec<_>>>()?;
    let mut witnesses = Vec::new();
    let mut failures = 0;
    for sample in 0..plan.pairs {
        let (bx, be) = (rng.index(nb), rng.index(nb));
        let xi = sf.extreme_ray_in_block(bx, &mut rng).flatten();
        let eta = sf.extreme_ray_in_block(be, &mut rng).flatten();
        let best = semigroups
            .iter()
            .map(|m| xi.dotc(&(m * &eta)).re.as_f64())
            .fold(f64::NEG_INFINITY, f64::max);
        if !(best > tol) {
            failures += 1;
            if witnesses.len() < 16 {
                witnesses.push(ErgodicWitness {
                    sample,
                    xi_block: bx,
                    eta_block: be,
                    max_pairing: best,
                });
            }
        }
    }
    Ok(ErgodicCheck {
        ergodic: failures == 0,
        samples: plan.pairs,
        failures,
        witnesses,
    })
}

/// Residuals of the structural properties of `N = ker H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelInvariants {
    /// `max ‖(1 − P_N) Δ^{is} η‖` over kernel basis vectors and sampled `s`.
    pub modular_invariance: f64,
    /// `max ‖(1 − P_N) J η‖`.
    pub j_invariance: f64,
    /// `max ‖H η_±‖` for the cone parts of J-real kernel vectors.
    pub cone_parts: f64,
    /// `max_k E_k[η]` over kernel vectors (requires retained summands).
    pub per_k_energy: f64,
    /// `max ‖D_k(t) η‖` over kernel vectors, generators and sampled `t`.
    pub derivation: f64,
    /// `min` over non-kernel eigenvectors of `max_k E_k[ξ]`; positive means
    /// every vector outside `N` is seen by some generator.
    pub outside_min_energy: f64,
    /// `max_i ‖(1 − P_N) e_i ξ₀‖`.
    pub center_containment: f64,
}

/// Evaluates the kernel invariances on `N` for a generator that kept its
/// per-generator summands.
pub fn check_kernel_invariants<T: Real>(
    h: &GeneratorMatrix<T>,
    n: &FixedSpace<T>,
    sampler: &mut Sampler,
    samples: usize,
) -> Result<KernelInvariants> {
    let sf = h.standard_form();
    let family = h.family();
    let mut modular_invariance = 0.0f64;
    let mut derivation = 0.0f64;
    for _ in 0..samples {
        let s = T::lit(3.0 * sampler.normal());
        let images: Vec<_> = n.basis.iter().map(|v| sf.modular_unitary(s, v)).collect();
        modular_invariance = modular_invariance.max(containment_residual(&images, &n.basis));
        for eta in &n.basis {
            for x in family {
                derivation = derivation.max(derivation_apply(sf, x, s, eta).norm().as_f64());
            }
        }
    }
    let j_images: Vec<_> = n.basis.iter().map(|v| sf.j_conjugate(v)).collect();
    let j_invariance = containment_residual(&j_images, &n.basis);

    let mut cone_parts = 0.0f64;
    let half = T::lit(0.5);
    for eta in &n.basis {
        let jeta = sf.j_conjugate(eta);
        let re = (eta + &jeta).scale(cr(half));
        let im = (eta - &jeta).scale(C::new(T::zero(), -half));
        for part in [re, im] {
            let part = symmetrize(&part);
            let split = sf.cone_project_iterative(&part, IterativeCone::default())?;
            for v in [&split.positive, &split.negative] {
                cone_parts = cone_parts.max(h.apply(v).norm().as_f64());
            }
        }
    }

    let mut per_k = 0.0f64;
    for eta in &n.basis {
        for k in 0..family.len() {
            per_k = per_k.max(per_k_energy(h, k, eta)?.as_f64());
        }
    }

    let spec = sf.spec().clone();
    let mut outside_min_energy = f64::INFINITY;
    for j in n.dim()..h.eigenvalues().len() {
        let col = h.eigenvectors().column(j).into_owned();
        let v = GnsVector::from_flat(spec.clone(), col.as_slice())?;
        let mut best = 0.0f64;
        for k in 0..family.len() {
            best = best.max(per_k_energy(h, k, &v)?.as_f64());
        }
        outside_min_energy = outside_min_energy.min(best);
    }

    let center_containment = containment_residual(&center_vector_space(sf), &n.basis);
    Ok(KernelInvariants {
        modular_invariance,
        j_invariance,
        cone_parts,
        per_k_energy: per_k,
        derivation,
        outside_min_energy,
        center_containment,
    })
}

/// Removes rounding noise that would make a J-real combination fail the
/// exact J-reality precondition of the cone projection.
fn symmetrize<T: Real>(v: &GnsVector<T>) -> GnsVector<T> {
    let blocks = v.blocks().iter().map(linalg::hermitize).collect();
    GnsVector::new(v.spec().clone(), blocks).expect("shape preserved")
}

/// Everything [`verify_theorem`] needs besides the model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub tolerances: Tolerances,
    pub sampling: SamplingPlan,
}

/// Outcome of comparing `ker H` with `[Z(M)ξ₀]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    #[serde(rename = "generates_M")]
    pub generates_m: bool,
    pub generated_dimension: usize,
    pub algebra_dimension: usize,
    #[serde(rename = "dim_N")]
    pub dim_n: usize,
    pub dim_center_space: usize,
    /// Largest principal angle between `ker H` and `[Z(M)ξ₀]` (π/2 if the
    /// dimensions differ).
    pub max_principal_angle: f64,
    /// `[Z(M)ξ₀] ⊆ ker H`, measured as the largest residual of a center vector.
    pub containment_residual: f64,
    pub containment_holds: bool,
    /// `None` when the family does not generate `M` (hypothesis not met).
    pub theorem_holds: Option<bool>,
    pub spectral_gap: f64,
    /// `None` when every eigenvalue is in the kernel.
    pub kernel_margin: Option<f64>,
    pub kernel_well_separated: bool,
    pub min_eigenvalue: f64,
    pub markov: MarkovReport,
    /// Structural verdict: `dim N = 1` and `N ∥ ξ₀`.
    pub ergodic: bool,
    /// Sampled corroboration of the definition.
    pub ergodic_sampled: ErgodicCheck,
    pub notes: Vec<String>,
}

/// Runs the whole comparison for a self-adjoint family and weight `f`.
pub fn verify_theorem<T: Real>(
    sf: &StandardForm<T>,
    family: &[AlgebraElement<T>],
    f: &WeightFunction<T>,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    let tol = &options.tolerances;
    tol.validate()?;
    let spec = sf.spec().clone();
    let (generated_dimension, generates_m) = if family.is_empty() {
        let b = spec.num_blocks();
        (b, b == spec.dimension())
    } else {
        let g = generated_subalgebra(family)?;
        (g.dimension, g.generates_m)
    };
    let h = assemble_generator_spectral_with(
        sf,
        family,
        f,
        AssemblyOptions {
            keep_summands: false,
        },
    )?;
    report_for(&h, generated_dimension, generates_m, options)
}

/// Builds the report for an already assembled generator.
pub fn report_for<T: Real>(
    h: &GeneratorMatrix<T>,
    generated_dimension: usize,
    generates_m: bool,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    let tol = &options.tolerances;
    let sf = h.standard_form();
    let spec = sf.spec().clone();
    let n = fixed_space(h, tol.kernel);
    let z = center_vector_space(sf);
    let dist = subspace_distance(&n.basis, &z);
    let containment = containment_residual(&z, &n.basis);
    let gap = spectral_gap(h, tol.kernel);
    let markov = check_markovian(h, &options.sampling, tol.cone)?;
    let ergodic_sampled = check_ergodic(h, &options.sampling, tol.cone)?;

    let xi0 = [sf.xi0().clone()];
    let ergodic = n.dim() == 1 && subspace_distance(&n.basis, &xi0).angle <= tol.subspace;
    let theorem_holds =
        generates_m.then_some(dist.dims_match && dist.angle <= tol.subspace);
    let min_eigenvalue = h.eigenvalues().first().map(|v| v.as_f64()).unwrap_or(0.0);

    let mut notes = vec![ANALYTICITY_NOTE.to_string()];
    if !generates_m {
        notes.push(
            "family does not generate M: only the containment [Z(M)xi0] in ker H is asserted"
                .into(),
        );
    }
    if !n.well_separated {
        notes.push(format!(
            "kernel is ill-separated: margin {:e} below 10x tolerance {:e}",
            n.eigenvalue_margin, tol.kernel
        ));
    }
    if min_eigenvalue < -tol.psd {
        notes.push(format!("generator has negative eigenvalue {min_eigenvalue:e}"));
    }
    if ergodic != ergodic_sampled.ergodic {
        notes.push(format!(
            "structural ergodicity ({ergodic}) and sampled check ({}) disagree",
            ergodic_sampled.ergodic
        ));
    }

    Ok(VerificationReport {
        generates_m,
        generated_dimension,
        algebra_dimension: spec.dimension(),
        dim_n: n.dim(),
        dim_center_space: z.len(),
        max_principal_angle: dist.angle,
        containment_residual: containment,
        containment_holds: containment <= tol.kernel.max(1e-9),
        theorem_holds,
        spectral_gap: gap,
        kernel_margin: n.eigenvalue_margin.is_finite().then_some(n.eigenvalue_margin),
        kernel_well_separated: n.well_separated,
        min_eigenvalue,
        markov,
        ergodic,
        ergodic_sampled,
        notes,
    })
}
