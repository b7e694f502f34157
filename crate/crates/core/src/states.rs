//! Density matrices on composite spaces and the fixed states and operators
//! used throughout the crate.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{
    eig_hermitian, kron, kron_vec, vec_norm, ComplexMatrix, HilbertDims, C64, ONE, ZERO,
};

/// Trace deviation allowed for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Allowed negativity of the smallest eigenvalue of a density matrix.
pub const STATE_PSD_TOL: f64 = 1e-9;
/// Norm deviation allowed for local factors of a product vector.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Density matrix together with the local dimensions it lives on.
///
/// A state produced from a [`SeparableDecomposition`] keeps it as a
/// separability certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipartiteState {
    dims: HilbertDims,
    rho: ComplexMatrix,
    decomposition: Option<SeparableDecomposition>,
}

impl MultipartiteState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(dims: HilbertDims, rho: ComplexMatrix) -> Result<Self> {
        let n = rho.require_square("density matrix")?;
        if n != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix is {n}x{n} but dims {dims} have total {}",
                dims.total()
            )));
        }
        rho.require_hermitian()?;
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace is {:.12}{:+.3e}i, expected 1",
                tr.re, tr.im
            )));
        }
        let min = eig_hermitian(&rho)?.min();
        if min < -STATE_PSD_TOL {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min:.3e} is below -{STATE_PSD_TOL:e}"
            )));
        }
        Ok(MultipartiteState {
            dims,
            rho,
            decomposition: None,
        })
    }

    pub fn maximally_mixed(dims: HilbertDims) -> Self {
        let n = dims.total();
        MultipartiteState {
            rho: ComplexMatrix::identity(n).scale_real(1.0 / n as f64),
            dims,
            decomposition: None,
        }
    }

    pub fn dims(&self) -> &HilbertDims {
        &self.dims
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn decomposition(&self) -> Option<&SeparableDecomposition> {
        self.decomposition.as_ref()
    }

    /// Attaches a decomposition after checking that it reproduces the density
    /// matrix within `1e-10` entrywise.
    pub fn with_decomposition(mut self, d: SeparableDecomposition) -> Result<Self> {
        let assembled = assemble_separable(d, self.dims.clone())?;
        let dev = assembled.rho.max_abs_diff(&self.rho)?;
        if dev > 1e-10 {
            return Err(Error::InvalidState(format!(
                "decomposition differs from the density matrix by {dev:.3e}"
            )));
        }
        self.decomposition = assembled.decomposition;
        Ok(self)
    }

    /// Drops the separability certificate, keeping the density matrix.
    pub fn without_certificate(mut self) -> Self {
        self.decomposition = None;
        self
    }

    pub fn purity(&self) -> f64 {
        self.rho
            .trace_product(&self.rho)
            .map(|z| z.re)
            .unwrap_or(f64::NAN)
    }
}

/// Product vector `|phi_1> ⊗ ... ⊗ |phi_n>` stored factor by factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<C64>>", into = "Vec<Vec<C64>>")]
pub struct ProductVector {
    locals: Vec<Vec<C64>>,
}

impl ProductVector {
    /// Requires every factor to have unit norm (to 1e-12) and length >= 2.
    pub fn new(locals: Vec<Vec<C64>>) -> Result<Self> {
        if locals.is_empty() {
            return Err(Error::InvalidDims("product vector without factors".into()));
        }
        for (k, v) in locals.iter().enumerate() {
            if v.len() < 2 {
                return Err(Error::InvalidDims(format!(
                    "factor {} has dimension {}",
                    k + 1,
                    v.len()
                )));
            }
            let norm = vec_norm(v);
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::OutOfRange(format!(
                    "factor {} has norm {norm:.15}, expected 1",
                    k + 1
                )));
            }
        }
        Ok(ProductVector { locals })
    }

    /// Normalizes each factor before validating.
    pub fn normalized(locals: Vec<Vec<C64>>) -> Result<Self> {
        let locals = locals
            .into_iter()
            .map(|v| normalize(&v))
            .collect::<Result<Vec<_>>>()?;
        ProductVector::new(locals)
    }

    pub fn locals(&self) -> &[Vec<C64>] {
        &self.locals
    }

    pub fn dims(&self) -> HilbertDims {
        HilbertDims::new(self.locals.iter().map(|v| v.len()).collect())
            .expect("factors have dimension >= 2")
    }

    /// Full vector on the composite space.
    pub fn to_vector(&self) -> Vec<C64> {
        self.locals[1..]
            .iter()
            .fold(self.locals[0].clone(), |acc, v| kron_vec(&acc, v))
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.to_vector())
    }

    /// `<phi|X|phi>`, real part.
    pub fn expectation(&self, x: &ComplexMatrix) -> Result<f64> {
        Ok(x.expectation(&self.to_vector())?.re)
    }

    pub fn inner(&self, other: &ProductVector) -> Result<C64> {
        if self.locals.len() != other.locals.len() {
            return Err(Error::DimensionMismatch(
                "product vectors have different numbers of factors".into(),
            ));
        }
        let mut acc = ONE;
        for (a, b) in self.locals.iter().zip(&other.locals) {
            if a.len() != b.len() {
                return Err(Error::DimensionMismatch(format!(
                    "factor dimensions {} and {} differ",
                    a.len(),
                    b.len()
                )));
            }
            acc *= crate::tensor::inner(a, b);
        }
        Ok(acc)
    }
}

impl TryFrom<Vec<Vec<C64>>> for ProductVector {
    type Error = Error;

    fn try_from(v: Vec<Vec<C64>>) -> Result<Self> {
        ProductVector::new(v)
    }
}

impl From<ProductVector> for Vec<Vec<C64>> {
    fn from(p: ProductVector) -> Self {
        p.locals
    }
}

/// Convex decomposition into pure product states, `sum_i p_i |phi_i><phi_i|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableDecomposition {
    pub weights: Vec<f64>,
    pub terms: Vec<ProductVector>,
}

impl SeparableDecomposition {
    pub fn validate(&self, dims: &HilbertDims) -> Result<()> {
        if self.weights.len() != self.terms.len() {
            return Err(Error::WeightsInvalid(format!(
                "{} weights for {} terms",
                self.weights.len(),
                self.terms.len()
            )));
        }
        if self.terms.is_empty() {
            return Err(Error::WeightsInvalid("decomposition has no terms".into()));
        }
        if let Some(w) = self.weights.iter().find(|w| w.is_nan() || **w < 0.0) {
            return Err(Error::WeightsInvalid(format!("negative weight {w}")));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::WeightsInvalid(format!("weights sum to {sum:.15}")));
        }
        let n = dims.total();
        if self.terms.len() > n * n {
            return Err(Error::WeightsInvalid(format!(
                "{} terms exceed the bound N^2 = {}",
                self.terms.len(),
                n * n
            )));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if &t.dims() != dims {
                return Err(Error::DimensionMismatch(format!(
                    "term {} has dims {} but state dims are {dims}",
                    i + 1,
                    t.dims()
                )));
            }
        }
        Ok(())
    }
}

pub fn normalize(v: &[C64]) -> Result<Vec<C64>> {
    let norm = vec_norm(v);
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|z| z / norm).collect())
}

/// `|v><v| / <v|v>`
pub fn density_from_pure(v: &[C64], dims: HilbertDims) -> Result<MultipartiteState> {
    if v.len() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for dims {dims}",
            v.len()
        )));
    }
    let v = normalize(v)?;
    MultipartiteState::new(dims, ComplexMatrix::projector(&v))
}

/// `sum_i p_i |phi_i1><phi_i1| ⊗ ... ⊗ |phi_in><phi_in|`, keeping the decomposition.
pub fn assemble_separable(
    d: SeparableDecomposition,
    dims: HilbertDims,
) -> Result<MultipartiteState> {
    d.validate(&dims)?;
    let n = dims.total();
    let mut rho = ComplexMatrix::zeros(n, n);
    for (&w, term) in d.weights.iter().zip(&d.terms) {
        let local_projectors: Vec<ComplexMatrix> = term
            .locals()
            .iter()
            .map(|v| ComplexMatrix::projector(v))
            .collect();
        let product = local_projectors[1..]
            .iter()
            .fold(local_projectors[0].clone(), |acc, p| kron(&acc, p));
        rho = &rho + &product.scale_real(w);
    }
    let mut state = MultipartiteState::new(dims, rho)?;
    state.decomposition = Some(d);
    Ok(state)
}

/// Fixed operators and vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedOperator {
    /// Normalized maximally entangled projector on `C^d ⊗ C^d`.
    PPlus,
    /// Singlet projector on two qubits.
    PsiMinus,
    /// Swap of two `d`-dimensional factors.
    FlipV,
    Identity,
    PauliX,
    PauliY,
    PauliZ,
    /// `(|0> + |1>)/sqrt 2` as a column.
    PlusVec,
    /// `(|0> - |1>)/sqrt 2` as a column.
    MinusVec,
}

impl NamedOperator {
    pub const ALL: [NamedOperator; 9] = [
        NamedOperator::PPlus,
        NamedOperator::PsiMinus,
        NamedOperator::FlipV,
        NamedOperator::Identity,
        NamedOperator::PauliX,
        NamedOperator::PauliY,
        NamedOperator::PauliZ,
        NamedOperator::PlusVec,
        NamedOperator::MinusVec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NamedOperator::PPlus => "P_plus",
            NamedOperator::PsiMinus => "Psi_minus",
            NamedOperator::FlipV => "flip_V",
            NamedOperator::Identity => "identity",
            NamedOperator::PauliX => "pauli_x",
            NamedOperator::PauliY => "pauli_y",
            NamedOperator::PauliZ => "pauli_z",
            NamedOperator::PlusVec => "plus_vec",
            NamedOperator::MinusVec => "minus_vec",
        }
    }
}

impl FromStr for NamedOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NamedOperator::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

/// Builds a named operator with local dimension `d`. Qubit-only operators
/// reject `d != 2`.
pub fn named_operator(name: NamedOperator, d: usize) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::InvalidDims(format!(
            "local dimension {d} is below 2"
        )));
    }
    let qubit_only = |op: NamedOperator| -> Result<()> {
        if d == 2 {
            Ok(())
        } else {
            Err(Error::WrongShape(format!(
                "{} is defined for d = 2 only",
                op.name()
            )))
        }
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(match name {
        NamedOperator::PPlus => ComplexMatrix::projector(&max_entangled_vector(d)),
        NamedOperator::PsiMinus => {
            qubit_only(name)?;
            ComplexMatrix::projector(&[ZERO, C64::new(s, 0.0), C64::new(-s, 0.0), ZERO])
        }
        NamedOperator::FlipV => {
            let n = d * d;
            ComplexMatrix::from_fn(n, n, |r, c| {
                let (r1, r2) = (r / d, r % d);
                if c == r2 * d + r1 {
                    ONE
                } else {
                    ZERO
                }
            })
        }
        NamedOperator::Identity => ComplexMatrix::identity(d),
        NamedOperator::PauliX => {
            qubit_only(name)?;
            ComplexMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO])?
        }
        NamedOperator::PauliY => {
            qubit_only(name)?;
            ComplexMatrix::new(
                2,
                2,
                vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO],
            )?
        }
        NamedOperator::PauliZ => {
            qubit_only(name)?;
            ComplexMatrix::new(2, 2, vec![ONE, ZERO, ZERO, -ONE])?
        }
        NamedOperator::PlusVec => {
            qubit_only(name)?;
            ComplexMatrix::column(&plus_ket())
        }
        NamedOperator::MinusVec => {
            qubit_only(name)?;
            ComplexMatrix::column(&minus_ket())
        }
    })
}

/// `(1/sqrt d) sum_k |kk>`
pub fn max_entangled_vector(d: usize) -> Vec<C64> {
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    (0..d * d)
        .map(|i| if i / d == i % d { amp } else { ZERO })
        .collect()
}

pub fn ket0() -> Vec<C64> {
    vec![ONE, ZERO]
}

pub fn ket1() -> Vec<C64> {
    vec![ZERO, ONE]
}

pub fn plus_ket() -> Vec<C64> {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    vec![s, s]
}

pub fn minus_ket() -> Vec<C64> {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    vec![s, -s]
}

/// `p P_- + (1 - p) I/4` on two qubits.
pub fn werner_state(p: f64) -> Result<MultipartiteState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!(
            "Werner parameter p = {p} outside [0, 1]"
        )));
    }
    let singlet = named_operator(NamedOperator::PsiMinus, 2)?;
    let mixed = ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
    MultipartiteState::new(HilbertDims::qubits(2), &singlet.scale_real(p) + &mixed)
}

/// Haar-random unit vector: normalized i.i.d. complex Gaussian amplitudes.
pub fn haar_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..d)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(v) = normalize(&v) {
            return v;
        }
    }
}

pub fn random_product_vector<R: Rng + ?Sized>(rng: &mut R, dims: &HilbertDims) -> ProductVector {
    let locals = dims
        .as_slice()
        .iter()
        .map(|&d| haar_vector(rng, d))
        .collect();
    ProductVector::new(locals).expect("Haar factors are normalized")
}

/// Mixture of `k` Haar-random pure product states with weights uniform on the
/// simplex. Deterministic for a fixed seed.
pub fn random_separable(dims: &HilbertDims, k: usize, seed: u64) -> Result<MultipartiteState> {
    let n = dims.total();
    if k < 1 || k > n * n {
        return Err(Error::OutOfRange(format!(
            "term count k = {k} outside 1..={}",
            n * n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<ProductVector> = (0..k)
        .map(|_| random_product_vector(&mut rng, dims))
        .collect();
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // absorb rounding so the weights sum to 1 as tightly as floats allow
    let drift = 1.0 - weights.iter().sum::<f64>();
    weights[0] += drift;
    assemble_separable(SeparableDecomposition { weights, terms }, dims.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{eigvals_hermitian, partial_trace};

    fn cplx(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn pure_state_from_basis_vector() {
        let s = density_from_pure(&[ONE, ZERO], HilbertDims::qubits(1)).unwrap();
        assert_eq!(s.rho(), &ComplexMatrix::diag_real(&[1.0, 0.0]));
    }

    #[test]
    fn pure_state_is_normalized() {
        let s = density_from_pure(&[ZERO, cplx(2.0)], HilbertDims::qubits(1)).unwrap();
        assert!(
            s.rho()
                .max_abs_diff(&ComplexMatrix::diag_real(&[0.0, 1.0]))
                .unwrap()
                < 1e-15
        );
        assert_eq!(
            density_from_pure(&[ZERO, ZERO], HilbertDims::qubits(1)),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn singlet_is_pure() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let st =
            density_from_pure(&[ZERO, cplx(s), cplx(-s), ZERO], HilbertDims::qubits(2)).unwrap();
        let singlet = named_operator(NamedOperator::PsiMinus, 2).unwrap();
        assert!(st.rho().max_abs_diff(&singlet).unwrap() < 1e-15);
        assert!((st.purity() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn assemble_rejects_bad_weights() {
        let t = ProductVector::new(vec![ket0(), ket0()]).unwrap();
        let d = SeparableDecomposition {
            weights: vec![0.7, 0.2],
            terms: vec![t.clone(), t.clone()],
        };
        assert!(matches!(
            assemble_separable(d, HilbertDims::qubits(2)),
            Err(Error::WeightsInvalid(_))
        ));
        let d = SeparableDecomposition {
            weights: vec![1.5, -0.5],
            terms: vec![t.clone(), t],
        };
        assert!(matches!(
            assemble_separable(d, HilbertDims::qubits(2)),
            Err(Error::WeightsInvalid(_))
        ));
    }

    #[test]
    fn assemble_rejects_dim_mismatch() {
        let t = ProductVector::new(vec![ket0(), ket0()]).unwrap();
        let d = SeparableDecomposition {
            weights: vec![1.0],
            terms: vec![t],
        };
        assert!(matches!(
            assemble_separable(d, HilbertDims::qubits(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn single_product_term() {
        let t = ProductVector::new(vec![ket0(), ket0(), ket0()]).unwrap();
        let s = assemble_separable(
            SeparableDecomposition {
                weights: vec![1.0],
                terms: vec![t],
            },
            HilbertDims::qubits(3),
        )
        .unwrap();
        let mut expected = ComplexMatrix::zeros(8, 8);
        expected[(0, 0)] = ONE;
        assert_eq!(s.rho(), &expected);
        assert!(s.decomposition().is_some());
    }

    #[test]
    fn classical_mixture() {
        let d = SeparableDecomposition {
            weights: vec![0.5, 0.5],
            terms: vec![
                ProductVector::new(vec![ket0(), ket0()]).unwrap(),
                ProductVector::new(vec![ket1(), ket1()]).unwrap(),
            ],
        };
        let s = assemble_separable(d, HilbertDims::qubits(2)).unwrap();
        assert_eq!(s.rho(), &ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]));
    }

    #[test]
    fn flip_expectations() {
        let v = named_operator(NamedOperator::FlipV, 2).unwrap();
        let phi_plus = max_entangled_vector(2);
        assert!((v.expectation(&phi_plus).unwrap() - ONE).norm() < 1e-15);
        let singlet = named_operator(NamedOperator::PsiMinus, 2).unwrap();
        assert!((v.trace_product(&singlet).unwrap() + ONE).norm() < 1e-15);
    }

    #[test]
    fn flip_swaps_product_vectors() {
        let v = named_operator(NamedOperator::FlipV, 3).unwrap();
        let a = vec![cplx(1.0), cplx(2.0), cplx(3.0)];
        let b = vec![cplx(-1.0), C64::new(0.0, 1.0), cplx(0.5)];
        let out = v.apply(&kron_vec(&a, &b)).unwrap();
        let expected = kron_vec(&b, &a);
        for (x, y) in out.iter().zip(&expected) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn unknown_and_misdimensioned_names() {
        assert!(matches!(
            "P_minus".parse::<NamedOperator>(),
            Err(Error::UnknownName(_))
        ));
        assert_eq!(
            "flip_V".parse::<NamedOperator>().unwrap(),
            NamedOperator::FlipV
        );
        assert!(named_operator(NamedOperator::PauliX, 3).is_err());
        assert_eq!(named_operator(NamedOperator::PPlus, 3).unwrap().rows(), 9);
    }

    #[test]
    fn p_plus_marginals_are_maximally_mixed() {
        for d in 2..=4 {
            let pp = named_operator(NamedOperator::PPlus, d).unwrap();
            let dims = HilbertDims::new(vec![d, d]).unwrap();
            for k in [1, 2] {
                let marg = partial_trace(&pp, &dims, &[k]).unwrap();
                let expected = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
                assert!(marg.max_abs_diff(&expected).unwrap() < 1e-15);
            }
        }
    }

    #[test]
    fn werner_edges() {
        let w0 = werner_state(0.0).unwrap();
        assert!(
            w0.rho()
                .max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25))
                .unwrap()
                < 1e-16
        );
        assert!(matches!(werner_state(1.2), Err(Error::OutOfRange(_))));
        assert!(matches!(werner_state(-0.1), Err(Error::OutOfRange(_))));
        let ev = eigvals_hermitian(werner_state(1.0).unwrap().rho()).unwrap();
        assert!((ev[3] - 1.0).abs() < 1e-14 && ev[0].abs() < 1e-14);
    }

    #[test]
    fn state_validation() {
        let dims = HilbertDims::qubits(1);
        assert!(matches!(
            MultipartiteState::new(dims.clone(), ComplexMatrix::identity(2)),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            MultipartiteState::new(dims.clone(), ComplexMatrix::diag_real(&[1.5, -0.5])),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            MultipartiteState::new(dims, ComplexMatrix::identity(4).scale_real(0.25)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn random_separable_contract() {
        let dims = HilbertDims::new(vec![2, 3]).unwrap();
        assert!(random_separable(&dims, 0, 1).is_err());
        assert!(random_separable(&dims, 37, 1).is_err());
        let a = random_separable(&dims, 5, 42).unwrap();
        let b = random_separable(&dims, 5, 42).unwrap();
        assert_eq!(a, b);
        let c = random_separable(&dims, 5, 43).unwrap();
        assert_ne!(a, c);
        let one = random_separable(&dims, 1, 7).unwrap();
        assert!((one.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decomposition_must_match_the_density_matrix() {
        let dims = HilbertDims::qubits(2);
        let s = random_separable(&dims, 3, 5).unwrap();
        let d = s.decomposition().unwrap().clone();
        let bare = s.clone().without_certificate();
        assert_eq!(bare.clone().with_decomposition(d.clone()).unwrap(), s);
        let mixed = MultipartiteState::maximally_mixed(dims);
        assert!(matches!(
            mixed.with_decomposition(d),
            Err(Error::InvalidState(_))
        ));
    }
}
