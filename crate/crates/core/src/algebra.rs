//! Finite-dimensional von Neumann algebras presented as direct sums of full
//! matrix blocks `M_{n_1} ⊕ … ⊕ M_{n_B}`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::scalar::{ci, cr, Real, C};

/// Relative threshold below which a candidate is considered to lie in the
/// current span during subalgebra closure.
pub const SPAN_RANK_THRESHOLD: f64 = 1e-10;

/// Block structure `(n_1, …, n_B)` of the algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgebraSpec {
    block_dims: Vec<usize>,
}

impl AlgebraSpec {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::structural("algebra needs at least one block"));
        }
        if let Some(pos) = block_dims.iter().position(|&n| n == 0) {
            return Err(Error::structural(format!("block {pos} has dimension 0")));
        }
        Ok(Self { block_dims })
    }

    /// The full matrix algebra `M_n`.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// `Σ n_i²`, which is also the dimension of the GNS space.
    pub fn dimension(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }

    /// Offsets of each block inside a flattened element.
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.block_dims
            .iter()
            .map(|n| {
                let o = acc;
                acc += n * n;
                o
            })
            .collect()
    }

    /// Index range of block `b` inside a flattened element.
    pub fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        let start: usize = self.block_dims[..b].iter().map(|n| n * n).sum();
        start..start + self.block_dims[b] * self.block_dims[b]
    }
}

impl fmt::Display for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.block_dims.iter().map(|n| format!("M{n}")).collect();
        write!(f, "{}", parts.join("⊕"))
    }
}

/// True iff the algebra has trivial center, i.e. a single block.
pub fn is_factor(spec: &AlgebraSpec) -> bool {
    spec.num_blocks() == 1
}

/// A block-diagonal element of the algebra.
#[derive(Debug, Clone)]
pub struct AlgebraElement<T: Real> {
    spec: Arc<AlgebraSpec>,
    blocks: Vec<CMatrix<T>>,
    self_adjoint: bool,
}

// The self-adjoint flag is a construction hint, not part of the value.
impl<T: Real> PartialEq for AlgebraElement<T> {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.blocks == other.blocks
    }
}

pub(crate) fn check_shapes<T: Real>(spec: &AlgebraSpec, blocks: &[CMatrix<T>]) -> Result<()> {
    if blocks.len() != spec.num_blocks() {
        return Err(Error::structural(format!(
            "expected {} blocks for {spec}, got {}",
            spec.num_blocks(),
            blocks.len()
        )));
    }
    for (i, (m, &n)) in blocks.iter().zip(spec.block_dims()).enumerate() {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::structural(format!(
                "block {i} is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    Ok(())
}

impl<T: Real> AlgebraElement<T> {
    pub fn new(spec: Arc<AlgebraSpec>, blocks: Vec<CMatrix<T>>) -> Result<Self> {
        check_shapes(&spec, &blocks)?;
        Ok(Self {
            spec,
            blocks,
            self_adjoint: false,
        })
    }

    /// Builds a self-adjoint element; each block is replaced by its Hermitian
    /// part so that the result is exactly self-adjoint.
    pub fn hermitian(spec: Arc<AlgebraSpec>, blocks: Vec<CMatrix<T>>) -> Result<Self> {
        check_shapes(&spec, &blocks)?;
        let blocks = blocks.iter().map(linalg::hermitize).collect();
        Ok(Self {
            spec,
            blocks,
            self_adjoint: true,
        })
    }

    /// An element of the single-block algebra `M_n`.
    pub fn full(matrix: CMatrix<T>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::structural("matrix must be square"));
        }
        let spec = Arc::new(AlgebraSpec::full(matrix.nrows())?);
        Self::new(spec, vec![matrix])
    }

    pub fn identity(spec: Arc<AlgebraSpec>) -> Self {
        let blocks = spec.block_dims().iter().map(|&n| linalg::identity(n)).collect();
        Self {
            spec,
            blocks,
            self_adjoint: true,
        }
    }

    pub fn zero(spec: Arc<AlgebraSpec>) -> Self {
        let blocks = spec
            .block_dims()
            .iter()
            .map(|&n| CMatrix::zeros(n, n))
            .collect();
        Self {
            spec,
            blocks,
            self_adjoint: true,
        }
    }

    /// Rebuilds an element from its row-major flattening.
    pub fn from_flat(spec: Arc<AlgebraSpec>, flat: &[C<T>]) -> Result<Self> {
        if flat.len() != spec.dimension() {
            return Err(Error::structural(format!(
                "flat vector has length {}, expected {}",
                flat.len(),
                spec.dimension()
            )));
        }
        let blocks = spec
            .block_dims()
            .iter()
            .zip(spec.block_offsets())
            .map(|(&n, off)| linalg::unvec_row_major(&flat[off..off + n * n], n))
            .collect();
        Ok(Self {
            spec,
            blocks,
            self_adjoint: false,
        })
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn spec_arc(&self) -> &Arc<AlgebraSpec> {
        &self.spec
    }

    pub fn blocks(&self) -> &[CMatrix<T>] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &CMatrix<T> {
        &self.blocks[b]
    }

    /// Whether the element was constructed as exactly self-adjoint.
    pub fn is_flagged_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    /// Largest absolute entry of `a - a*` over all blocks.
    pub fn self_adjoint_defect(&self) -> T {
        self.blocks
            .iter()
            .map(linalg::hermitian_defect)
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn flatten(&self) -> CVector<T> {
        let mut out = CVector::zeros(self.spec.dimension());
        for (m, off) in self.blocks.iter().zip(self.spec.block_offsets()) {
            let n = m.nrows();
            for i in 0..n {
                for j in 0..n {
                    out[off + i * n + j] = m[(i, j)];
                }
            }
        }
        out
    }

    fn same_spec(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::structural(format!(
                "algebra mismatch: {} vs {}",
                self.spec, other.spec
            )));
        }
        Ok(())
    }

    /// Blockwise product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_spec(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self {
            spec: self.spec.clone(),
            blocks,
            self_adjoint: false,
        })
    }

    /// Blockwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
            self_adjoint: self.self_adjoint,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_spec(other)?;
        Ok(Self {
            spec: self.spec.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a + b)
                .collect(),
            self_adjoint: self.self_adjoint && other.self_adjoint,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(cr(-T::one())))
    }

    pub fn scale(&self, c: C<T>) -> Self {
        Self {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().map(|b| b * c).collect(),
            self_adjoint: self.self_adjoint && c.im == T::zero(),
        }
    }

    /// Scaling by a real factor keeps self-adjointness.
    pub fn scale_real(&self, c: T) -> Self {
        self.scale(cr(c))
    }

    /// Hilbert–Schmidt inner product `Σ_b tr(a_b* c_b)`.
    pub fn hs_inner(&self, other: &Self) -> C<T> {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .fold(cr(T::zero()), |acc, (a, b)| acc + linalg::hs_inner(a, b))
    }

    pub fn hs_norm(&self) -> T {
        self.hs_inner(self).re.max(T::zero()).sqrt()
    }

    /// Largest operator norm over the blocks.
    pub fn op_norm(&self) -> T {
        self.blocks
            .iter()
            .map(linalg::op_norm)
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Splits `x` into self-adjoint parts `(x + x*)/2` and `(x − x*)/(2i)`,
    /// so that `x = re + i·im`.
    pub fn split_self_adjoint(&self) -> (Self, Self) {
        let half = T::lit(0.5);
        let re: Vec<_> = self
            .blocks
            .iter()
            .map(|b| (b + b.adjoint()) * cr(half))
            .collect();
        let im: Vec<_> = self
            .blocks
            .iter()
            .map(|b| (b - b.adjoint()) * ci(-half))
            .collect();
        (
            Self {
                spec: self.spec.clone(),
                blocks: re,
                self_adjoint: true,
            },
            Self {
                spec: self.spec.clone(),
                blocks: im,
                self_adjoint: true,
            },
        )
    }
}

/// The block identities `e_i = 0 ⊕ … ⊕ 1_{n_i} ⊕ … ⊕ 0`, a basis of the center.
pub fn center_basis<T: Real>(spec: &Arc<AlgebraSpec>) -> Vec<AlgebraElement<T>> {
    (0..spec.num_blocks())
        .map(|b| {
            let blocks = spec
                .block_dims()
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    if i == b {
                        linalg::identity(n)
                    } else {
                        CMatrix::zeros(n, n)
                    }
                })
                .collect();
            AlgebraElement {
                spec: spec.clone(),
                blocks,
                self_adjoint: true,
            }
        })
        .collect()
}

/// Result of [`generated_subalgebra`].
#[derive(Debug, Clone)]
pub struct GeneratedSubalgebra<T: Real> {
    /// Hilbert–Schmidt orthonormal basis.
    pub basis: Vec<AlgebraElement<T>>,
    pub dimension: usize,
    pub generates_m: bool,
}

struct SpanBuilder<T: Real> {
    basis: Vec<CVector<T>>,
    threshold: T,
}

impl<T: Real> SpanBuilder<T> {
    /// Orthogonalizes `v` against the current basis (two Gram–Schmidt passes)
    /// and appends it if it carries a new direction. Returns the index of the
    /// new basis vector.
    fn try_add(&mut self, mut v: CVector<T>) -> Option<usize> {
        let norm0 = v.norm();
        if norm0 == T::zero() {
            return None;
        }
        for _ in 0..2 {
            for b in &self.basis {
                let coef = b.dotc(&v);
                v.axpy(-coef, b, C::new(T::one(), T::zero()));
            }
        }
        let r = v.norm();
        if r <= self.threshold * norm0 {
            return None;
        }
        self.basis.push(v.unscale(r));
        Some(self.basis.len() - 1)
    }
}

/// Hilbert–Schmidt orthonormal basis of the *-algebra generated by `family`
/// together with the block units.
///
/// The closure is seeded with the block identities `e_i` (so the algebra is
/// unital in every block) and the family with its adjoints, then repeatedly
/// multiplied on the left by the family members until no new direction
/// appears. `generates_m` is true iff the span is all of `M`.
pub fn generated_subalgebra<T: Real>(
    family: &[AlgebraElement<T>],
) -> Result<GeneratedSubalgebra<T>> {
    let first = family
        .first()
        .ok_or_else(|| Error::argument("generating family is empty"))?;
    let spec = first.spec_arc().clone();
    for x in family {
        first.same_spec(x)?;
    }

    let mut gens: Vec<AlgebraElement<T>> = Vec::with_capacity(2 * family.len());
    for x in family {
        gens.push(x.clone());
        if x.self_adjoint_defect() > T::zero() {
            gens.push(x.adjoint());
        }
    }

    let mut span = SpanBuilder {
        basis: Vec::new(),
        threshold: T::lit(SPAN_RANK_THRESHOLD),
    };
    let mut queue = std::collections::VecDeque::new();
    for e in center_basis::<T>(&spec).iter().chain(gens.iter()) {
        if let Some(i) = span.try_add(e.flatten()) {
            queue.push_back(i);
        }
    }
    let full = spec.dimension();
    while let Some(i) = queue.pop_front() {
        if span.basis.len() == full {
            break;
        }
        let elem = AlgebraElement::from_flat(spec.clone(), span.basis[i].as_slice())?;
        for g in &gens {
            let prod = g.compose(&elem)?;
            if let Some(j) = span.try_add(prod.flatten()) {
                queue.push_back(j);
            }
        }
    }

    let basis = span
        .basis
        .iter()
        .map(|v| AlgebraElement::from_flat(spec.clone(), v.as_slice()))
        .collect::<Result<Vec<_>>>()?;
    let dimension = basis.len();
    Ok(GeneratedSubalgebra {
        basis,
        dimension,
        generates_m: dimension == full,
    })
}

/// Pauli matrices `(σ_x, σ_y, σ_z)`.
pub fn pauli<T: Real>() -> [CMatrix<T>; 3] {
    let o = T::one();
    let z = T::zero();
    let c = |re: T, im: T| C::new(re, im);
    [
        CMatrix::from_row_slice(2, 2, &[c(z, z), c(o, z), c(o, z), c(z, z)]),
        CMatrix::from_row_slice(2, 2, &[c(z, z), c(z, -o), c(z, o), c(z, z)]),
        CMatrix::from_row_slice(2, 2, &[c(o, z), c(z, z), c(z, z), c(-o, z)]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Sampler;

    fn m2() -> Arc<AlgebraSpec> {
        Arc::new(AlgebraSpec::full(2).unwrap())
    }

    fn paulis(spec: &Arc<AlgebraSpec>) -> [AlgebraElement<f64>; 3] {
        let [x, y, z] = pauli::<f64>();
        [
            AlgebraElement::hermitian(spec.clone(), vec![x]).unwrap(),
            AlgebraElement::hermitian(spec.clone(), vec![y]).unwrap(),
            AlgebraElement::hermitian(spec.clone(), vec![z]).unwrap(),
        ]
    }

    fn diff(a: &AlgebraElement<f64>, b: &AlgebraElement<f64>) -> f64 {
        a.sub(b).unwrap().hs_norm()
    }

    #[test]
    fn spec_validation() {
        assert!(AlgebraSpec::new(vec![]).is_err());
        assert!(AlgebraSpec::new(vec![2, 0]).is_err());
        let s = AlgebraSpec::new(vec![2, 3]).unwrap();
        assert_eq!(s.dimension(), 13);
        assert_eq!(s.block_offsets(), vec![0, 4]);
        assert_eq!(s.block_range(1), 4..13);
    }

    #[test]
    fn sigma_x_times_sigma_z_is_minus_i_sigma_y() {
        let s = m2();
        let [x, y, z] = paulis(&s);
        let prod = x.compose(&z).unwrap();
        let expect = y.scale(C::new(0.0, -1.0));
        assert!(diff(&prod, &expect) < 1e-15);
    }

    #[test]
    fn identity_is_neutral_and_blockwise() {
        let spec = Arc::new(AlgebraSpec::new(vec![2, 3]).unwrap());
        let mut rng = Sampler::new(7);
        let a: AlgebraElement<f64> = rng.element(&spec);
        let b: AlgebraElement<f64> = rng.element(&spec);
        let one = AlgebraElement::identity(spec.clone());
        assert!(diff(&one.compose(&a).unwrap(), &a) < 1e-15);
        let ab = a.compose(&b).unwrap();
        for k in 0..2 {
            let expect = a.block(k) * b.block(k);
            assert!(linalg::max_abs(&(ab.block(k) - expect)) < 1e-14);
        }
    }

    #[test]
    fn compose_rejects_mismatched_specs() {
        let a = AlgebraElement::<f64>::identity(m2());
        let b = AlgebraElement::<f64>::identity(Arc::new(AlgebraSpec::new(vec![3]).unwrap()));
        assert!(matches!(a.compose(&b), Err(Error::Structural(_))));
    }

    #[test]
    fn adjoint_examples() {
        let s = m2();
        let [x, _, z] = paulis(&s);
        assert_eq!(x.adjoint(), x);
        let iz = z.scale(C::new(0.0, 1.0));
        assert!(diff(&iz.adjoint(), &iz.scale(cr(-1.0))) == 0.0);
        let a: AlgebraElement<f64> = Sampler::new(3).element(&s);
        assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn generated_dimensions() {
        let s = m2();
        let [x, _, z] = paulis(&s);
        let g = generated_subalgebra(&[z.clone()]).unwrap();
        assert_eq!((g.dimension, g.generates_m), (2, false));
        let g = generated_subalgebra(&[x, z]).unwrap();
        assert_eq!((g.dimension, g.generates_m), (4, true));
        let s23 = Arc::new(AlgebraSpec::new(vec![2, 3]).unwrap());
        let g = generated_subalgebra(&[AlgebraElement::<f64>::identity(s23)]).unwrap();
        assert_eq!((g.dimension, g.generates_m), (2, false));
        assert!(generated_subalgebra::<f64>(&[]).is_err());
    }

    #[test]
    fn center_examples() {
        let s = Arc::new(AlgebraSpec::new(vec![2, 3]).unwrap());
        let c = center_basis::<f64>(&s);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].block(0), &linalg::identity::<f64>(2));
        assert_eq!(c[0].block(1), &CMatrix::<f64>::zeros(3, 3));
        let classical = Arc::new(AlgebraSpec::new(vec![1, 1]).unwrap());
        assert_eq!(center_basis::<f64>(&classical).len(), 2);
        assert!(is_factor(&AlgebraSpec::full(2).unwrap()));
        assert!(!is_factor(&s));
        assert!(is_factor(&AlgebraSpec::full(4).unwrap()));
    }

    #[test]
    fn split_recombines() {
        let s = Arc::new(AlgebraSpec::new(vec![2, 1]).unwrap());
        let a: AlgebraElement<f64> = Sampler::new(11).element(&s);
        let (re, im) = a.split_self_adjoint();
        assert_eq!(re.self_adjoint_defect(), 0.0);
        assert!(im.self_adjoint_defect() < 1e-15);
        let back = re.add(&im.scale(C::new(0.0, 1.0))).unwrap();
        assert!(diff(&back, &a) < 1e-14);
    }
}
