//! Numerical laboratory for finite-dimensional standard forms of von Neumann
//! algebras, the Dirichlet forms built from a generating family and an
//! admissible weight, and the ergodicity of their Markovian semigroups.
//!
//! The pipeline is
//!
//! 1. [`algebra`]: `M = M_{n_1} ⊕ … ⊕ M_{n_B}` and its elements;
//! 2. [`standard_form`]: a faithful state, `ξ₀`, `Δ`, `J` and the natural cone;
//! 3. [`weight`] and [`dirichlet`]: the weight `f`, its transform `f̂`, and the
//!    Dirichlet operator `H = Σ_k H_k` assembled two independent ways;
//! 4. [`ergodicity`]: the semigroup `e^{-tH}`, its fixed space, the center
//!    subspace `[Z(M)ξ₀]` and the Markovianity / ergodicity checks;
//! 5. [`spin_chain`]: finite quantum spin chains at inverse temperature `β`.
//!
//! Every numerical type is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`, which is what the default
//! tolerances are tuned for.

pub mod algebra;
pub mod dirichlet;
pub mod ergodicity;
pub mod error;
pub mod linalg;
pub mod sampling;
pub mod scalar;
pub mod spin_chain;
pub mod standard_form;
pub mod weight;

pub use algebra::{
    center_basis, generated_subalgebra, is_factor, pauli, AlgebraElement, AlgebraSpec,
    GeneratedSubalgebra,
};
pub use dirichlet::{
    assemble_generator_quadrature, assemble_generator_spectral, assemble_generator_spectral_with,
    derivation_apply, form_eval, per_k_energy, AssemblyOptions, GeneratorMatrix, Quadrature,
};
pub use ergodicity::{
    center_vector_space, check_ergodic, check_kernel_invariants, check_markovian,
    containment_residual, evolve, fixed_space, report_for, semigroup_matrix, spectral_gap,
    subspace_distance, verify_theorem, ErgodicCheck, ErgodicWitness, FixedSpace,
    KernelInvariants, MarkovReport, SamplingPlan, SubspaceDistance, Tolerances,
    VerificationReport, VerifyOptions,
};
pub use error::{Error, Result};
pub use sampling::Sampler;
pub use scalar::{Real, C};
pub use spin_chain::{
    analyticity_margin, gap_sweep, gibbs_state, interaction_norm, pauli_family,
    AnalyticityMargin, Boundary, Interaction, InteractionTerm, LatticeSpec, SweepOptions,
    SweepRow,
};
pub use standard_form::{
    build_standard_form, ConeSplit, FaithfulState, GnsVector, IterativeCone, StandardForm,
};
pub use weight::{
    check_admissible, AdmissibilityGrid, AdmissibilityReport, WeightFunction, WeightKind,
};

pub type AlgebraElement64 = AlgebraElement<f64>;
pub type AlgebraElement32 = AlgebraElement<f32>;
pub type GnsVector64 = GnsVector<f64>;
pub type GnsVector32 = GnsVector<f32>;
pub type FaithfulState64 = FaithfulState<f64>;
pub type FaithfulState32 = FaithfulState<f32>;
pub type StandardForm64 = StandardForm<f64>;
pub type StandardForm32 = StandardForm<f32>;
pub type WeightFunction64 = WeightFunction<f64>;
pub type WeightFunction32 = WeightFunction<f32>;
pub type GeneratorMatrix64 = GeneratorMatrix<f64>;
pub type GeneratorMatrix32 = GeneratorMatrix<f32>;
pub type FixedSpace64 = FixedSpace<f64>;
pub type Interaction64 = Interaction<f64>;
