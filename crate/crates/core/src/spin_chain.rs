//! Finite spin-1/2 chains: translation-invariant interactions, Gibbs states,
//! the translated Pauli family and temperature sweeps of the generator gap.
//!
//! Sites are numbered `0..L`; site `0` is the leftmost tensor factor, so a
//! basis index of the chain has site `j` at bit `L − 1 − j`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{pauli, AlgebraElement, AlgebraSpec};
use crate::dirichlet::{assemble_generator_spectral_with, AssemblyOptions};
use crate::ergodicity::{fixed_space, spectral_gap, subspace_distance};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen};
use crate::scalar::{cr, Real};
use crate::standard_form::{FaithfulState, StandardForm};
use crate::weight::WeightFunction;

/// Largest chain length accepted unless the caller raises the cap.
pub const DEFAULT_MAX_LENGTH: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub length: usize,
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(length: usize, boundary: Boundary) -> Result<Self> {
        if length < 2 {
            return Err(Error::argument("chain length must be at least 2"));
        }
        Ok(Self { length, boundary })
    }

    /// Hilbert space dimension `2^L` of the chain.
    pub fn hilbert_dim(&self) -> usize {
        1 << self.length
    }

    /// GNS dimension `4^L`.
    pub fn gns_dim(&self) -> usize {
        self.hilbert_dim() * self.hilbert_dim()
    }

    pub fn check_cap(&self, max_length: usize) -> Result<()> {
        if self.length > max_length {
            return Err(Error::Capacity {
                what: "chain length".into(),
                requested: self.length,
                cap: max_length,
            });
        }
        Ok(())
    }

    pub fn algebra(&self) -> Arc<AlgebraSpec> {
        Arc::new(AlgebraSpec::full(self.hilbert_dim()).expect("positive dimension"))
    }

    /// Sites covered by a template anchored at `i`, or `None` if it falls
    /// off an open chain.
    fn place(&self, i: usize, offsets: &[usize]) -> Option<Vec<usize>> {
        offsets
            .iter()
            .map(|&o| match self.boundary {
                Boundary::Periodic => Some((i + o) % self.length),
                Boundary::Open => (i + o < self.length).then_some(i + o),
            })
            .collect()
    }
}

/// One translation-invariant term: `strength · local` acting on the sites
/// `i + offsets` for every anchor `i`.
#[derive(Debug, Clone)]
pub struct InteractionTerm<T: Real> {
    pub offsets: Vec<usize>,
    pub local: CMatrix<T>,
    pub coupling: String,
    pub strength: T,
}

#[derive(Debug, Clone)]
pub struct Interaction<T: Real> {
    terms: Vec<InteractionTerm<T>>,
}

impl<T: Real> Interaction<T> {
    pub fn new(terms: Vec<InteractionTerm<T>>) -> Result<Self> {
        for t in &terms {
            let k = t.offsets.len();
            if k == 0 {
                return Err(Error::argument(format!("term {} has no sites", t.coupling)));
            }
            let mut sorted = t.offsets.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != k {
                return Err(Error::argument(format!("term {} repeats a site", t.coupling)));
            }
            let d = 1usize << k;
            if t.local.shape() != (d, d) {
                return Err(Error::structural(format!(
                    "term {} needs a {d}x{d} local matrix",
                    t.coupling
                )));
            }
            if linalg::hermitian_defect(&t.local) > T::lit(1e-12) * T::one().max(linalg::op_norm(&t.local)) {
                return Err(Error::argument(format!("term {} is not Hermitian", t.coupling)));
            }
        }
        Ok(Self { terms })
    }

    /// Transverse-field Ising: `−J σ_z σ_z` on bonds, `−h σ_x` on sites.
    pub fn ising(j: T, h: T) -> Self {
        let [x, _, z] = pauli::<T>();
        Self {
            terms: vec![
                InteractionTerm {
                    offsets: vec![0, 1],
                    local: -linalg::kron(&z, &z),
                    coupling: "J".into(),
                    strength: j,
                },
                InteractionTerm {
                    offsets: vec![0],
                    local: -x,
                    coupling: "h".into(),
                    strength: h,
                },
            ],
        }
    }

    pub fn terms(&self) -> &[InteractionTerm<T>] {
        &self.terms
    }

    /// Largest offset plus one.
    pub fn range(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| t.offsets.iter().map(|o| o + 1))
            .max()
            .unwrap_or(0)
    }

    /// Every coupling multiplied by `c`.
    pub fn scaled(&self, c: T) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| InteractionTerm {
                strength: t.strength * c,
                ..t.clone()
            })
            .collect();
        Self { terms }
    }

    fn check_lattice(&self, lattice: &LatticeSpec) -> Result<()> {
        if self.range() > lattice.length {
            return Err(Error::argument(format!(
                "interaction range {} exceeds chain length {}",
                self.range(),
                lattice.length
            )));
        }
        Ok(())
    }

    /// `Φ_X` for every site set `X` met on the lattice, as full-chain operators.
    pub fn local_terms(&self, lattice: &LatticeSpec) -> Result<BTreeMap<Vec<usize>, CMatrix<T>>> {
        self.check_lattice(lattice)?;
        let dim = lattice.hilbert_dim();
        let mut out: BTreeMap<Vec<usize>, CMatrix<T>> = BTreeMap::new();
        for t in &self.terms {
            for i in 0..lattice.length {
                let Some(sites) = lattice.place(i, &t.offsets) else {
                    continue;
                };
                let op = embed(&t.local, &sites, lattice.length) * cr(t.strength);
                let mut key = sites.clone();
                key.sort_unstable();
                out.entry(key)
                    .and_modify(|m| *m += &op)
                    .or_insert_with(|| op.clone());
                debug_assert_eq!(op.nrows(), dim);
            }
        }
        Ok(out)
    }

    /// `H_Λ = Σ_X Φ_X` on the chain.
    pub fn hamiltonian(&self, lattice: &LatticeSpec) -> Result<CMatrix<T>> {
        let dim = lattice.hilbert_dim();
        let mut h = CMatrix::zeros(dim, dim);
        for m in self.local_terms(lattice)?.values() {
            h += m;
        }
        Ok(h)
    }
}

/// Embeds `local` (acting on `sites`, first site most significant) into the
/// `2^L`-dimensional chain.
pub fn embed<T: Real>(local: &CMatrix<T>, sites: &[usize], length: usize) -> CMatrix<T> {
    let dim = 1usize << length;
    let bits: Vec<usize> = sites.iter().map(|&s| length - 1 - s).collect();
    let mask: usize = bits.iter().map(|b| 1usize << b).sum();
    let k = sites.len();
    let local_index = |a: usize| {
        bits.iter()
            .enumerate()
            .fold(0usize, |acc, (pos, &b)| acc | (((a >> b) & 1) << (k - 1 - pos)))
    };
    let mut out = CMatrix::zeros(dim, dim);
    for a in 0..dim {
        let la = local_index(a);
        for b in 0..dim {
            if a & !mask == b & !mask {
                out[(a, b)] = local[(la, local_index(b))];
            }
        }
    }
    out
}

/// `sup_i Σ_{X ∋ i} e^{λ|X|} ‖Φ_X‖` over the finite chain.
pub fn interaction_norm<T: Real>(phi: &Interaction<T>, lambda: f64, lattice: &LatticeSpec) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::argument("lambda must be positive"));
    }
    let terms = phi.local_terms(lattice)?;
    let mut per_site = vec![0.0f64; lattice.length];
    for (sites, m) in &terms {
        let w = (lambda * sites.len() as f64).exp() * linalg::op_norm(m).as_f64();
        for &s in sites {
            per_site[s] += w;
        }
    }
    Ok(per_site.into_iter().fold(0.0, f64::max))
}

/// `ρ = e^{−βH_Λ} / Z`, computed from the spectrum of `H_Λ` shifted by its
/// minimum so the exponentials never overflow.
pub fn gibbs_state<T: Real>(phi: &Interaction<T>, beta: T, lattice: &LatticeSpec) -> Result<FaithfulState<T>> {
    if beta < T::zero() || !beta.is_finite() {
        return Err(Error::argument("beta must be finite and non-negative"));
    }
    let h = phi.hamiltonian(lattice)?;
    let eig = HermitianEigen::new(&h);
    let e0 = eig.min();
    let z: T = eig
        .values
        .iter()
        .fold(T::zero(), |acc, &e| acc + (-(beta * (e - e0))).exp());
    let weakest = (-(beta * (eig.max() - e0))).exp() / z;
    if weakest < T::lit(1e3) * T::default_epsilon() {
        return Err(Error::Numeric {
            message: format!("Gibbs state at beta {beta} is not faithful at working precision"),
            residual: weakest.as_f64(),
        });
    }
    let rho = eig.apply_fn(|e| cr((-(beta * (e - e0))).exp() / z));
    FaithfulState::new(lattice.algebra(), vec![rho])
}

/// `{σ_x^{(j)}, σ_y^{(j)}, σ_z^{(j)} : j = 0..L}`, ordered by site then Pauli.
pub fn pauli_family<T: Real>(lattice: &LatticeSpec) -> Vec<AlgebraElement<T>> {
    let spec = lattice.algebra();
    let paulis = pauli::<T>();
    (0..lattice.length)
        .flat_map(|j| {
            let spec = spec.clone();
            paulis.clone().into_iter().map(move |p| {
                let m = embed(&p, &[j], lattice.length);
                AlgebraElement::hermitian(spec.clone(), vec![m]).expect("shape follows lattice")
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityMargin {
    /// `λ / (2β‖Φ‖_λ)`; `None` stands for `+∞` (β = 0 or Φ = 0).
    pub gamma: Option<f64>,
    pub beta_phi_norm: f64,
    /// `β‖Φ‖_λ < λ`.
    pub condition_ok: bool,
}

/// The high-temperature smallness condition for `βΦ`. Informational only:
/// at finite volume every element is entire for the modular flow.
pub fn analyticity_margin<T: Real>(
    phi: &Interaction<T>,
    beta: f64,
    lambda: f64,
    lattice: &LatticeSpec,
) -> Result<AnalyticityMargin> {
    let norm = interaction_norm(phi, lambda, lattice)?;
    let beta_phi_norm = beta * norm;
    Ok(AnalyticityMargin {
        gamma: (beta_phi_norm > 0.0).then(|| lambda / (2.0 * beta_phi_norm)),
        beta_phi_norm,
        condition_ok: beta_phi_norm < lambda,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub phi_norm_lambda: f64,
    pub lambda: f64,
    pub condition_ok: bool,
    pub gap: f64,
    #[serde(rename = "dim_N")]
    pub dim_n: usize,
    pub ergodic: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub max_length: usize,
    pub kernel_tol: f64,
    pub subspace_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            max_length: DEFAULT_MAX_LENGTH,
            kernel_tol: 1e-9,
            subspace_tol: 1e-7,
        }
    }
}

/// One row per `β`, in input order. Rows are computed in parallel.
pub fn gap_sweep<T: Real>(
    phi: &Interaction<T>,
    lattice: &LatticeSpec,
    f: &WeightFunction<T>,
    betas: &[f64],
    lambda: f64,
    options: SweepOptions,
) -> Result<Vec<SweepRow>> {
    lattice.check_cap(options.max_length)?;
    let phi_norm_lambda = interaction_norm(phi, lambda, lattice)?;
    let family = pauli_family::<T>(lattice);
    betas
        .par_iter()
        .map(|&beta| {
            let state = gibbs_state(phi, T::lit(beta), lattice)?;
            let sf = StandardForm::new(state)?;
            let h = assemble_generator_spectral_with(
                &sf,
                &family,
                f,
                AssemblyOptions {
                    keep_summands: false,
                },
            )?;
            let n = fixed_space(&h, options.kernel_tol);
            let parallel = subspace_distance(&n.basis, &[sf.xi0().clone()]);
            Ok(SweepRow {
                beta,
                phi_norm_lambda,
                lambda,
                condition_ok: beta * phi_norm_lambda < lambda,
                gap: spectral_gap(&h, options.kernel_tol),
                dim_n: n.dim(),
                ergodic: parallel.dims_match && parallel.angle <= options.subspace_tol,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::generated_subalgebra;
    use crate::dirichlet::assemble_generator_spectral;

    fn chain(l: usize) -> LatticeSpec {
        LatticeSpec::new(l, Boundary::Periodic).unwrap()
    }

    #[test]
    fn ising_norm_by_hand() {
        let phi = Interaction::<f64>::ising(1.0, 1.0);
        let n = interaction_norm(&phi, 0.5, &chain(4)).unwrap();
        let hand = 0.5f64.exp() + 2.0 * 1.0f64.exp();
        assert!((n - hand).abs() < 1e-12);
        assert!((hand - 7.0853).abs() < 1e-4);
        let zero = Interaction::<f64>::ising(0.0, 0.0);
        assert_eq!(interaction_norm(&zero, 0.5, &chain(4)).unwrap(), 0.0);
        let doubled = interaction_norm(&phi.scaled(2.0), 0.5, &chain(4)).unwrap();
        assert!((doubled - 2.0 * n).abs() < 1e-12);
        let open = LatticeSpec::new(4, Boundary::Open).unwrap();
        assert!((interaction_norm(&phi, 0.5, &open).unwrap() - hand).abs() < 1e-12);
        assert!(interaction_norm(&phi, 0.0, &open).is_err());
    }

    #[test]
    fn norm_is_monotone() {
        let lat = chain(3);
        let mut last = 0.0;
        for l in [0.1, 0.3, 0.5, 1.0] {
            let n = interaction_norm(&Interaction::<f64>::ising(0.7, 1.3), l, &lat).unwrap();
            assert!(n >= last);
            last = n;
        }
        let a = interaction_norm(&Interaction::<f64>::ising(0.7, 1.3), 0.5, &lat).unwrap();
        let b = interaction_norm(&Interaction::<f64>::ising(0.9, 1.3), 0.5, &lat).unwrap();
        assert!(b >= a);
    }

    #[test]
    fn margin_examples() {
        let phi = Interaction::<f64>::ising(1.0, 1.0);
        let lat = chain(4);
        let m0 = analyticity_margin(&phi, 0.0, 0.5, &lat).unwrap();
        assert!(m0.condition_ok && m0.gamma.is_none());
        let m = analyticity_margin(&phi, 0.05, 0.5, &lat).unwrap();
        assert!(m.condition_ok && (m.beta_phi_norm - 0.354).abs() < 1e-3);
        let m = analyticity_margin(&phi, 0.1, 0.5, &lat).unwrap();
        assert!(!m.condition_ok && (m.beta_phi_norm - 0.709).abs() < 1e-3);
    }

    #[test]
    fn embed_matches_kron() {
        let [x, y, z] = pauli::<f64>();
        let id = linalg::identity::<f64>(2);
        let direct = linalg::kron(&linalg::kron(&x, &id), &z);
        let mut two = embed(&x, &[0], 3);
        two = &two * embed(&z, &[2], 3);
        assert!((&direct - &two).norm() < 1e-15);
        // reversed site order swaps the tensor factors
        let xy = linalg::kron(&x, &y);
        let wrap = embed(&xy, &[2, 0], 3);
        let expect = linalg::kron(&linalg::kron(&y, &id), &x);
        assert!((&wrap - &expect).norm() < 1e-15);
    }

    #[test]
    fn gibbs_examples() {
        let lat = chain(3);
        let phi = Interaction::<f64>::ising(1.0, 0.5);
        let s = gibbs_state(&phi, 0.0, &lat).unwrap();
        assert!((&s.rho_blocks()[0] - linalg::identity::<f64>(8) * cr(0.125)).norm() < 1e-15);

        // field only: ρ factorizes into single-site e^{βhσ_x}/Z
        let (beta, h) = (0.7, 0.5);
        let field = Interaction::<f64>::ising(0.0, h);
        let s = gibbs_state(&field, beta, &chain(2)).unwrap();
        let mut ev = HermitianEigen::new(&s.rho_blocks()[0]).values;
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let z = (beta * h).exp() + (-beta * h).exp();
        let (lo, hi) = ((-beta * h).exp() / z, (beta * h).exp() / z);
        let expect = [lo * lo, lo * hi, lo * hi, hi * hi];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }

        let mut last = f64::INFINITY;
        for beta in [0.0, 0.5, 1.0, 2.0] {
            let s = gibbs_state(&phi, beta, &lat).unwrap();
            let ev = HermitianEigen::new(&s.rho_blocks()[0]);
            assert!(ev.min() > 0.0 && ev.min() <= last + 1e-15);
            assert!((ev.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            last = ev.min();
        }
        assert!(matches!(gibbs_state(&phi, 40.0, &lat), Err(Error::Numeric { .. })));
        assert!(gibbs_state(&phi, -1.0, &lat).is_err());
    }

    #[test]
    fn pauli_family_generates() {
        let lat = chain(2);
        let fam = pauli_family::<f64>(&lat);
        assert_eq!(fam.len(), 6);
        assert!(fam.iter().all(|x| (x.op_norm() - 1.0).abs() < 1e-14));
        let g = generated_subalgebra(&fam).unwrap();
        assert_eq!(g.dimension, 16);
        assert!(g.generates_m);
    }

    #[test]
    fn sweep_examples() {
        let lat = chain(3);
        let phi = Interaction::<f64>::ising(1.0, 1.0);
        let f = WeightFunction::f0();
        let rows = gap_sweep(&phi, &lat, &f, &[0.0, 0.1, 0.2], 0.5, SweepOptions::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows.iter().map(|r| r.beta).collect::<Vec<_>>(), vec![0.0, 0.1, 0.2]);
        for r in &rows {
            assert_eq!(r.dim_n, 1);
            assert!(r.ergodic && r.gap > 0.0);
        }
        // β = 0: same as the tracial state
        let sf = StandardForm::new(FaithfulState::tracial(lat.algebra())).unwrap();
        let h = assemble_generator_spectral(&sf, &pauli_family(&lat), &f).unwrap();
        assert!((rows[0].gap - spectral_gap(&h, 1e-9)).abs() < 1e-10);
        assert!(gap_sweep(&phi, &lat, &f, &[], 0.5, SweepOptions::default()).unwrap().is_empty());
        let big = chain(12);
        assert!(matches!(
            gap_sweep(&phi, &big, &f, &[0.0], 0.5, SweepOptions::default()),
            Err(Error::Capacity { cap: 6, .. })
        ));
    }

    #[test]
    fn translation_covariance() {
        let lat = chain(3);
        let phi = Interaction::<f64>::ising(1.0, 0.6);
        let state = gibbs_state(&phi, 0.4, &lat).unwrap();
        let sf = StandardForm::new(state).unwrap();
        let fam = pauli_family::<f64>(&lat);
        let f = WeightFunction::f0();
        let h = assemble_generator_spectral(&sf, &fam, &f).unwrap();
        // the shifted family x_{j+1}: same set, different order
        let mut shifted = fam[3..].to_vec();
        shifted.extend_from_slice(&fam[..3]);
        let hs = assemble_generator_spectral(&sf, &shifted, &f).unwrap();
        // the cyclic shift unitary maps the Gibbs state to itself
        let dim = lat.hilbert_dim();
        let shift = CMatrix::<f64>::from_fn(dim, dim, |a, b| {
            let rot = ((b >> 1) | ((b & 1) << 2)) & (dim - 1);
            if a == rot { cr(1.0) } else { cr(0.0) }
        });
        let rho = &state_rho(&sf);
        assert!((&shift * rho * shift.adjoint() - rho).norm() < 1e-12);
        for (a, b) in h.eigenvalues().iter().zip(hs.eigenvalues()) {
            assert!((a - b).abs() < 1e-8);
        }
        // and H commutes with ξ ↦ U ξ U*
        let s = linalg::left_right_superop(&shift, &shift.adjoint());
        assert!((&s * h.matrix() * s.adjoint() - h.matrix()).norm() < 1e-8);
    }

    fn state_rho(sf: &StandardForm<f64>) -> CMatrix<f64> {
        sf.state().rho_blocks()[0].clone()
    }
}
