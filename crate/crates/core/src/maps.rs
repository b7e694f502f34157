//! Entanglement witnesses, linear maps positive on product states, and the
//! correspondence between them.
//!
//! A map `L: B(H_in) -> B(H_out)` is stored through its Choi operator
//!
//! ```text
//! C = sum_{a,b} L(|a><b|) ⊗ |a><b|      on H_out ⊗ H_in,
//! ```
//!
//! so `L(Y)_{xy} = sum_{a,b} C[(x,a),(y,b)] Y_{ab}`. A witness `W` on
//! `H_1 ⊗ H_rest` corresponds to the map `L: B(H_rest) -> B(H_1)` with
//! `W = sum_{ij} |i><j| ⊗ L^dagger(|i><j|) = d_1 (I ⊗ L^dagger)(P_+)`, `P_+` the
//! normalized maximally entangled projector on `H_1 ⊗ H_1`. Under this
//! correspondence `Tr(W (P ⊗ Q)) = Tr(P L(Q))`, so `W` is nonnegative on
//! product states exactly when `L` maps product projections to positive
//! operators.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::product_opt::{certify, Budget, Direction, OptResult};
use crate::states::{named_operator, MultipartiteState, NamedOperator};
use crate::tensor::{
    eig_hermitian, partial_transpose, permute_subsystems, ComplexMatrix, HilbertDims, C64, ONE,
    ZERO,
};

/// Certified product-state minima below this value disqualify a witness.
pub const WITNESS_TOL: f64 = 1e-7;

/// Hermitian operator meant to be nonnegative on all product states.
///
/// The product-state minimum is computed on demand by [`Witness::certify`]
/// and cached; until then the witness is unverified.
#[derive(Debug)]
pub struct Witness {
    dims: HilbertDims,
    matrix: ComplexMatrix,
    label: Option<String>,
    certificate: OnceLock<OptResult>,
}

impl Clone for Witness {
    fn clone(&self) -> Self {
        let certificate = OnceLock::new();
        if let Some(c) = self.certificate.get() {
            let _ = certificate.set(c.clone());
        }
        Witness {
            dims: self.dims.clone(),
            matrix: self.matrix.clone(),
            label: self.label.clone(),
            certificate,
        }
    }
}

impl PartialEq for Witness {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims
            && self.matrix == other.matrix
            && self.label == other.label
            && self.certificate.get() == other.certificate.get()
    }
}

impl Witness {
    pub fn new(dims: HilbertDims, matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.require_square("witness")?;
        if n != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "witness is {n}x{n} but dims {dims} have total {}",
                dims.total()
            )));
        }
        matrix.require_hermitian()?;
        Ok(Witness {
            dims,
            matrix: matrix.hermitian_part(),
            label: None,
            certificate: OnceLock::new(),
        })
    }

    /// Flip operator on `C^d ⊗ C^d`.
    pub fn flip(d: usize) -> Result<Self> {
        let v = named_operator(NamedOperator::FlipV, d)?;
        Ok(Witness::new(HilbertDims::new(vec![d, d])?, v)?.with_label("flip_V"))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Attaches a previously computed certificate after checking its sign and
    /// that it was evaluated on this operator.
    pub fn with_certificate(self, cert: OptResult) -> Result<Self> {
        self.check_certificate(&cert)?;
        let _ = self.certificate.set(cert);
        Ok(self)
    }

    pub fn dims(&self) -> &HilbertDims {
        &self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn certificate(&self) -> Option<&OptResult> {
        self.certificate.get()
    }

    /// Certified nonnegative on product states: a cached certificate exists and
    /// both optimization routes agreed.
    pub fn is_certified(&self) -> bool {
        self.certificate().is_some_and(|c| c.converged)
    }

    /// Computes (or returns the cached) minimum of `<phi|W|phi>` over product
    /// vectors. Fails with `NotAWitness` if that minimum is below `-1e-7`.
    pub fn certify(&self, budget: &Budget) -> Result<&OptResult> {
        if let Some(c) = self.certificate.get() {
            return Ok(c);
        }
        let cert = certify(&self.matrix, &self.dims, Direction::Min, budget)?;
        self.check_certificate(&cert)?;
        let _ = self.certificate.set(cert);
        Ok(self.certificate.get().expect("certificate was just set"))
    }

    fn check_certificate(&self, cert: &OptResult) -> Result<()> {
        if cert.argopt.dims() != self.dims {
            return Err(Error::DimensionMismatch(format!(
                "certificate point has dims {} but witness has dims {}",
                cert.argopt.dims(),
                self.dims
            )));
        }
        if cert.value < -WITNESS_TOL {
            return Err(Error::NotAWitness { min: cert.value });
        }
        Ok(())
    }
}

/// `Tr(W rho)`.
pub fn eval_witness(w: &Witness, state: &MultipartiteState) -> Result<f64> {
    if w.dims() != state.dims() {
        return Err(Error::DimensionMismatch(format!(
            "witness dims {} vs state dims {}",
            w.dims(),
            state.dims()
        )));
    }
    let value = w.matrix().trace_product(state.rho())?;
    debug_assert!(value.im.abs() <= 1e-10 * (1.0 + value.re.abs()));
    Ok(value.re)
}

/// Linear map between operator spaces, stored as its Choi operator on
/// `H_out ⊗ H_in` (see the module docs for the convention).
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMapOp {
    in_dims: HilbertDims,
    out_dims: HilbertDims,
    choi: ComplexMatrix,
    certificate: Option<OptResult>,
}

impl LinearMapOp {
    pub fn from_choi(
        in_dims: HilbertDims,
        out_dims: HilbertDims,
        choi: ComplexMatrix,
    ) -> Result<Self> {
        let n = choi.require_square("Choi operator")?;
        if n != in_dims.total() * out_dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "Choi operator is {n}x{n} for a map {in_dims} -> {out_dims}"
            )));
        }
        choi.require_hermitian()?;
        Ok(LinearMapOp {
            in_dims,
            out_dims,
            choi,
            certificate: None,
        })
    }

    /// Tabulates a map from its action on the matrix units `|a><b|`.
    pub fn from_fn(
        in_dims: HilbertDims,
        out_dims: HilbertDims,
        f: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    ) -> Result<Self> {
        let (din, dout) = (in_dims.total(), out_dims.total());
        let mut choi = ComplexMatrix::zeros(dout * din, dout * din);
        for a in 0..din {
            for b in 0..din {
                let mut unit = ComplexMatrix::zeros(din, din);
                unit[(a, b)] = ONE;
                let image = f(&unit);
                if image.rows() != dout || image.cols() != dout {
                    return Err(Error::DimensionMismatch(format!(
                        "map image is {}x{}, expected {dout}x{dout}",
                        image.rows(),
                        image.cols()
                    )));
                }
                for x in 0..dout {
                    for y in 0..dout {
                        choi[(x * din + a, y * din + b)] = image[(x, y)];
                    }
                }
            }
        }
        LinearMapOp::from_choi(in_dims, out_dims, choi)
    }

    /// Transposition on `C^d`.
    pub fn transposition(d: usize) -> Result<Self> {
        let dims = HilbertDims::new(vec![d])?;
        LinearMapOp::from_fn(dims.clone(), dims, |y| y.transpose())
    }

    pub fn identity(d: usize) -> Result<Self> {
        let dims = HilbertDims::new(vec![d])?;
        LinearMapOp::from_fn(dims.clone(), dims, |y| y.clone())
    }

    pub fn in_dims(&self) -> &HilbertDims {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &HilbertDims {
        &self.out_dims
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    /// Product-state certificate of the corresponding witness, if known.
    pub fn certificate(&self) -> Option<&OptResult> {
        self.certificate.as_ref()
    }

    pub fn with_certificate(mut self, cert: OptResult) -> Self {
        self.certificate = Some(cert);
        self
    }

    /// Positive on product states, as certified through the witness form.
    pub fn is_certified_lmpp(&self) -> bool {
        self.certificate
            .as_ref()
            .is_some_and(|c| c.converged && c.value >= -WITNESS_TOL)
    }

    /// Certifies positivity on product inputs by minimizing the witness form
    /// over product states. Needs a single output factor.
    pub fn certify(mut self, budget: &Budget) -> Result<Self> {
        let w = witness_from_map(&self)?;
        let cert = w.certify(budget)?.clone();
        self.certificate = Some(cert);
        Ok(self)
    }

    /// `L(Y)` for an operator on the whole input space.
    pub fn apply_local(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (din, dout) = (self.in_dims.total(), self.out_dims.total());
        if y.rows() != din || y.cols() != din {
            return Err(Error::DimensionMismatch(format!(
                "map input must be {din}x{din}, got {}x{}",
                y.rows(),
                y.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(dout, dout);
        for x in 0..dout {
            for z in 0..dout {
                let mut acc = ZERO;
                for a in 0..din {
                    for b in 0..din {
                        acc += self.choi[(x * din + a, z * din + b)] * y[(a, b)];
                    }
                }
                out[(x, z)] = acc;
            }
        }
        Ok(out)
    }
}

/// The map `L: B(H_2 ⊗ ... ⊗ H_n) -> B(H_1)` whose witness form is `w`:
/// `L(Y)_{xy} = Tr(W_{yx} Y)` with `W_{ij}` the `(i, j)` block of `w` over `H_1`.
/// Product values carry over as `Tr(W (P ⊗ Q)) = Tr(P^T L(Q))`, so `w` is
/// nonnegative on product states exactly when `L` maps product projections to
/// positive operators.
pub fn map_from_witness(w: &Witness) -> Result<LinearMapOp> {
    let dims = w.dims().as_slice();
    if dims.len() < 2 {
        return Err(Error::DimensionMismatch(
            "witness needs at least two subsystems to define a map".into(),
        ));
    }
    let out_dims = HilbertDims::new(vec![dims[0]])?;
    let in_dims = HilbertDims::new(dims[1..].to_vec())?;
    let (d1, din) = (dims[0], in_dims.total());
    let wm = w.matrix();
    let mut choi = ComplexMatrix::zeros(d1 * din, d1 * din);
    for x in 0..d1 {
        for y in 0..d1 {
            // block W_{yx}; L(|a><b|)_{xy} = (W_{yx})_{ba}
            for a in 0..din {
                for b in 0..din {
                    choi[(x * din + a, y * din + b)] = wm[(y * din + b, x * din + a)];
                }
            }
        }
    }
    let mut map = LinearMapOp::from_choi(in_dims, out_dims, choi)?;
    map.certificate = w.certificate().cloned();
    Ok(map)
}

/// `W = d_1 (I ⊗ L^dagger)(P_+) = sum_{ij} |i><j| ⊗ L^dagger(|i><j|)` on `H_1 ⊗ H_in`.
pub fn witness_from_map(m: &LinearMapOp) -> Result<Witness> {
    if m.out_dims.len() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "witness form needs a single output factor, map has output dims {}",
            m.out_dims
        )));
    }
    let d1 = m.out_dims.total();
    let din = m.in_dims.total();
    let adj = adjoint_map(m);
    let mut w = ComplexMatrix::zeros(d1 * din, d1 * din);
    for i in 0..d1 {
        for j in 0..d1 {
            let mut unit = ComplexMatrix::zeros(d1, d1);
            unit[(i, j)] = ONE;
            let block = adj.apply_local(&unit)?;
            for a in 0..din {
                for b in 0..din {
                    w[(i * din + a, j * din + b)] = block[(a, b)];
                }
            }
        }
    }
    let mut dims = m.out_dims.as_slice().to_vec();
    dims.extend_from_slice(m.in_dims.as_slice());
    let witness = Witness::new(HilbertDims::new(dims)?, w)?;
    match &m.certificate {
        Some(c) => witness.with_certificate(c.clone()),
        None => Ok(witness),
    }
}

/// The map `L^dagger` with `Tr(X L(Y)) = Tr(L^dagger(X) Y)`.
pub fn adjoint_map(m: &LinearMapOp) -> LinearMapOp {
    let (din, dout) = (m.in_dims.total(), m.out_dims.total());
    // new Choi on H_in ⊗ H_out: C'[(a,c),(b,d)] = C[(d,b),(c,a)]
    let choi = ComplexMatrix::from_fn(din * dout, din * dout, |r, s| {
        let (a, c) = (r / dout, r % dout);
        let (b, d) = (s / dout, s % dout);
        m.choi[(d * din + b, c * din + a)]
    });
    LinearMapOp {
        in_dims: m.out_dims.clone(),
        out_dims: m.in_dims.clone(),
        choi,
        certificate: None,
    }
}

/// `(I ⊗ L)(X)` with `L` acting on the subsystems listed in `on` (1-based, in
/// the order matching `m.in_dims`). The output acts on the untouched
/// subsystems in ascending order followed by `m.out_dims`.
pub fn apply_map_to_operator(
    m: &LinearMapOp,
    x: &ComplexMatrix,
    dims: &HilbertDims,
    on: &[usize],
) -> Result<(ComplexMatrix, HilbertDims)> {
    dims.check_subset(on)?;
    let on_dims = dims.select(on)?;
    if &on_dims != m.in_dims() {
        return Err(Error::DimensionMismatch(format!(
            "subsystems {on:?} have dims {on_dims} but the map expects {}",
            m.in_dims()
        )));
    }
    let rest = dims.complement(on);
    let perm: Vec<usize> = rest.iter().chain(on).copied().collect();
    let (x, _) = permute_subsystems(x, dims, &perm)?;
    let rest_total: usize = rest.iter().map(|&k| dims.dim(k)).product();
    let (din, dout) = (m.in_dims.total(), m.out_dims.total());

    let mut out = ComplexMatrix::zeros(rest_total * dout, rest_total * dout);
    for k in 0..rest_total {
        for l in 0..rest_total {
            let block = ComplexMatrix::from_fn(din, din, |a, b| x[(k * din + a, l * din + b)]);
            let image = m.apply_local(&block)?;
            for p in 0..dout {
                for q in 0..dout {
                    out[(k * dout + p, l * dout + q)] = image[(p, q)];
                }
            }
        }
    }
    let mut out_dims: Vec<usize> = rest.iter().map(|&k| dims.dim(k)).collect();
    out_dims.extend_from_slice(m.out_dims.as_slice());
    Ok((out, HilbertDims::new(out_dims)?))
}

/// `(I ⊗ L)(rho)`; not necessarily positive, negativity signals entanglement.
pub fn apply_map(
    m: &LinearMapOp,
    state: &MultipartiteState,
    on: &[usize],
) -> Result<(ComplexMatrix, HilbertDims)> {
    apply_map_to_operator(m, state.rho(), state.dims(), on)
}

/// Output of a two-qubit-to-qubit map on a pair of Bloch-parametrized pure
/// states, written as `alpha (I + k . sigma)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochAction {
    pub alpha: f64,
    pub k_vec: [f64; 3],
}

impl BlochAction {
    pub fn k_norm(&self) -> f64 {
        self.k_vec.iter().map(|k| k * k).sum::<f64>().sqrt()
    }
}

/// `(I + r . sigma) / 2`
pub fn bloch_state(r: [f64; 3]) -> ComplexMatrix {
    ComplexMatrix::new(
        2,
        2,
        vec![
            C64::new((1.0 + r[2]) / 2.0, 0.0),
            C64::new(r[0] / 2.0, -r[1] / 2.0),
            C64::new(r[0] / 2.0, r[1] / 2.0),
            C64::new((1.0 - r[2]) / 2.0, 0.0),
        ],
    )
    .expect("2x2")
}

/// Evaluates `O = L(rho_n ⊗ rho_m)` for `rho_r = (I + r . sigma)/2` and returns
/// `alpha = Tr(O)/2`, `k_i = Tr(O sigma_i)/Tr(O)` (zero when `Tr(O) <= 1e-12`).
pub fn bloch_action(m: &LinearMapOp, n_hat: [f64; 3], m_hat: [f64; 3]) -> Result<BlochAction> {
    if m.in_dims.as_slice() != [2, 2] || m.out_dims.as_slice() != [2] {
        return Err(Error::WrongShape(format!(
            "Bloch action needs a map 2x2 -> 2, got {} -> {}",
            m.in_dims, m.out_dims
        )));
    }
    for (name, v) in [("n_hat", n_hat), ("m_hat", m_hat)] {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::OutOfRange(format!(
                "{name} has norm {norm}, expected 1"
            )));
        }
    }
    let input = bloch_state(n_hat).kron(&bloch_state(m_hat));
    let o = m.apply_local(&input)?;
    let tr = o.trace().re;
    let paulis = [
        NamedOperator::PauliX,
        NamedOperator::PauliY,
        NamedOperator::PauliZ,
    ];
    let mut k_vec = [0.0; 3];
    if tr > 1e-12 {
        for (k, p) in k_vec.iter_mut().zip(paulis) {
            *k = o.trace_product(&named_operator(p, 2)?)?.re / tr;
        }
    }
    Ok(BlochAction {
        alpha: tr / 2.0,
        k_vec,
    })
}

/// `W = A + B^{T_2}` with `A, B` positive semidefinite.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub iterations: usize,
    /// `||A + B^{T_2} - W||_F`
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct DykstraSettings {
    pub max_iterations: usize,
    /// Stop once an iteration moves the iterate by at most this much (Frobenius).
    pub step_tol: f64,
}

impl Default for DykstraSettings {
    fn default() -> Self {
        DykstraSettings {
            max_iterations: 50_000,
            step_tol: 1e-8,
        }
    }
}

/// Smallest eigenvalue allowed in a returned factor.
pub const DECOMPOSITION_PSD_TOL: f64 = 1e-7;
/// Relative affine residual allowed: `||A + B^{T_2} - W||_F <= 1e-6 (1 + ||W||_F)`.
pub const DECOMPOSITION_RESIDUAL_TOL: f64 = 1e-6;

fn project_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(&m.hermitian_part())?;
    let n = eig.values.len();
    let clipped: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| eig.vectors[(i, k)] * clipped[k] * eig.vectors[(j, k)].conj())
            .sum()
    }))
}

/// Writes a two-qubit witness as `A + B^{T_2}` with `A, B >= 0` using Dykstra's
/// alternating projections between the PSD x PSD cone and the affine set
/// `{(A, B) : A + B^{T_2} = W}`.
pub fn decompose_witness_2x2(w: &Witness, settings: &DykstraSettings) -> Result<Decomposition> {
    if w.dims().as_slice() != [2, 2] {
        return Err(Error::WrongShape(format!(
            "decomposition needs dims 2x2, got {}",
            w.dims()
        )));
    }
    let dims = w.dims().clone();
    let target = w.matrix().clone();
    let pt = |m: &ComplexMatrix| partial_transpose(m, &dims, &[2]);

    let project_affine =
        |a: &ComplexMatrix, b: &ComplexMatrix| -> Result<(ComplexMatrix, ComplexMatrix)> {
            let r = &(&target - a) - &pt(b)?;
            let half = r.scale_real(0.5);
            Ok((a + &half, b + &pt(&half)?))
        };
    let residual_of = |a: &ComplexMatrix, b: &ComplexMatrix| -> Result<f64> {
        Ok((&(a + &pt(b)?) - &target).frobenius_norm())
    };

    let zero = ComplexMatrix::zeros(4, 4);
    let (mut xa, mut xb) = (target.clone(), zero.clone());
    let (mut pa, mut pb) = (zero.clone(), zero.clone());
    let (mut qa, mut qb) = (zero.clone(), zero);
    let (mut ya, mut yb) = (xa.clone(), xb.clone());
    let mut iterations = 0;
    while iterations < settings.max_iterations {
        iterations += 1;
        let (sa, sb) = (&xa + &pa, &xb + &pb);
        ya = project_psd(&sa)?;
        yb = project_psd(&sb)?;
        pa = &sa - &ya;
        pb = &sb - &yb;
        let (ta, tb) = (&ya + &qa, &yb + &qb);
        let (na, nb) = project_affine(&ta, &tb)?;
        qa = &ta - &na;
        qb = &tb - &nb;
        let step =
            ((&na - &xa).frobenius_norm().powi(2) + (&nb - &xb).frobenius_norm().powi(2)).sqrt();
        xa = na;
        xb = nb;
        if step <= settings.step_tol {
            break;
        }
    }

    let scale = 1.0 + target.frobenius_norm();
    // The cone iterate is PSD by construction; accept it if the affine residual is small.
    let residual = residual_of(&ya, &yb)?;
    if residual <= DECOMPOSITION_RESIDUAL_TOL * scale {
        return Ok(Decomposition {
            a: ya,
            b: yb,
            iterations,
            residual,
        });
    }
    // Otherwise the affine iterate, if it is PSD within tolerance.
    let min_a = eig_hermitian(&xa)?.min();
    let min_b = eig_hermitian(&xb)?.min();
    if min_a >= -DECOMPOSITION_PSD_TOL && min_b >= -DECOMPOSITION_PSD_TOL {
        let residual = residual_of(&xa, &xb)?;
        return Ok(Decomposition {
            a: xa,
            b: xb,
            iterations,
            residual,
        });
    }
    Err(Error::Infeasible {
        iterations,
        residual,
    })
}

/// `L^dagger(sigma)`: the two-qubit operator whose decomposability is the
/// three-qubit condition on `L`.
pub fn adjoint_image(m: &LinearMapOp, sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
    adjoint_map(m).apply_local(sigma)
}
