//! Unextendible product bases, the states they induce on the complement of
//! their span, and the witnesses that detect those states.
//!
//! For an orthonormal product set `S` with span projector `P_S`, the
//! normalized complement projector `rho_S = (I - P_S) / (N - |S|)` is positive
//! under every partial transpose. When no product vector is orthogonal to all
//! of `S`, `epsilon = min_{prod} <phi|P_S|phi>` is strictly positive, and for
//! any positive `C` with `c = max_{prod} <phi|C|phi>` the operator
//! `P_S - (epsilon / c) C` is nonnegative on product vectors while taking the
//! value `-(epsilon / c) Tr(C rho_S)` on `rho_S`.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::maps::{eval_witness, Witness};
use crate::product_opt::{certify, Budget, Direction, OptResult};
use crate::states::{ket0, ket1, minus_ket, plus_ket, MultipartiteState, ProductVector};
use crate::tensor::{eig_hermitian, ComplexMatrix, HilbertDims};

/// Maximum |<psi_i|psi_j>| for distinct members.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Minimum product overlap required to call a set unextendible.
pub const UNEXTENDIBLE_TOL: f64 = 1e-6;

/// Orthonormal product vectors that do not span the space, optionally with a
/// certified minimum product overlap `epsilon`.
#[derive(Clone, Debug, PartialEq)]
pub struct UpbSet {
    dims: HilbertDims,
    members: Vec<ProductVector>,
    epsilon: Option<OptResult>,
}

/// Fails with `OrthogonalityViolation` naming the first offending pair (1-based).
pub fn check_orthogonality(members: &[ProductVector]) -> Result<()> {
    for i in 0..members.len() {
        for j in (i + 1)..members.len() {
            let overlap = members[i].inner(&members[j])?.norm();
            if overlap > ORTHOGONALITY_TOL {
                return Err(Error::OrthogonalityViolation {
                    first: i + 1,
                    second: j + 1,
                    overlap,
                });
            }
        }
    }
    Ok(())
}

impl UpbSet {
    pub fn new(dims: HilbertDims, members: Vec<ProductVector>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::OutOfRange("product set has no members".into()));
        }
        for (i, m) in members.iter().enumerate() {
            if m.dims() != dims {
                return Err(Error::DimensionMismatch(format!(
                    "member {} has dims {} but the set has dims {dims}",
                    i + 1,
                    m.dims()
                )));
            }
        }
        if members.len() >= dims.total() {
            return Err(Error::SpansSpace {
                members: members.len(),
                total: dims.total(),
            });
        }
        check_orthogonality(&members)?;
        Ok(UpbSet {
            dims,
            members,
            epsilon: None,
        })
    }

    pub fn dims(&self) -> &HilbertDims {
        &self.dims
    }

    pub fn members(&self) -> &[ProductVector] {
        &self.members
    }

    /// Certified `min <phi|P_S|phi>` over product vectors, when verified.
    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon.as_ref().map(|e| e.value)
    }

    pub fn epsilon_certificate(&self) -> Option<&OptResult> {
        self.epsilon.as_ref()
    }

    /// Reattaches a stored certificate, re-checking its threshold.
    pub fn with_epsilon(mut self, cert: OptResult) -> Result<Self> {
        if cert.argopt.dims() != self.dims {
            return Err(Error::DimensionMismatch(
                "epsilon certificate dims differ".into(),
            ));
        }
        if cert.value <= UNEXTENDIBLE_TOL {
            return Err(Error::NotUnextendible {
                epsilon: cert.value,
            });
        }
        self.epsilon = Some(cert);
        Ok(self)
    }

    /// `P_S = sum_i |psi_i><psi_i|`.
    pub fn span_projector(&self) -> ComplexMatrix {
        let n = self.dims.total();
        self.members
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, m| &acc + &m.projector())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinUpb {
    /// `{|0,1,+>, |1,+,0>, |+,0,1>, |-,-,->}`
    Shifts,
    /// `{|000>, |+,1,->, |1,-,+>, |-,+,1>}`
    ShiftsCorrected,
}

impl BuiltinUpb {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinUpb::Shifts => "shifts",
            BuiltinUpb::ShiftsCorrected => "shifts_paper_corrected",
        }
    }
}

impl FromStr for BuiltinUpb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shifts" => Ok(BuiltinUpb::Shifts),
            "shifts_paper_corrected" => Ok(BuiltinUpb::ShiftsCorrected),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

pub fn builtin_upb(which: BuiltinUpb) -> UpbSet {
    let (z, o, p, m) = (ket0(), ket1(), plus_ket(), minus_ket());
    let triples = match which {
        BuiltinUpb::Shifts => [
            [z.clone(), o.clone(), p.clone()],
            [o.clone(), p.clone(), z.clone()],
            [p.clone(), z.clone(), o.clone()],
            [m.clone(), m.clone(), m.clone()],
        ],
        BuiltinUpb::ShiftsCorrected => [
            [z.clone(), z.clone(), z.clone()],
            [p.clone(), o.clone(), m.clone()],
            [o.clone(), m.clone(), p.clone()],
            [m.clone(), p.clone(), o.clone()],
        ],
    };
    let members = triples
        .into_iter()
        .map(|t| ProductVector::new(t.to_vec()).expect("unit factors"))
        .collect();
    UpbSet::new(HilbertDims::qubits(3), members).expect("builtin sets are orthogonal")
}

/// Certifies unextendibility: minimizes `<phi|P_S|phi>` over product vectors
/// with the seesaw, cross-checks against the grid oracle, and requires the
/// certified minimum to exceed `1e-6`.
pub fn verify_upb(u: &UpbSet, budget: &Budget) -> Result<UpbSet> {
    check_orthogonality(&u.members)?;
    let cert = certify(&u.span_projector(), &u.dims, Direction::Min, budget)?;
    if !cert.converged {
        return Err(Error::NotCertified {
            seesaw: cert.value,
            grid: cert.cross_check.unwrap_or(f64::NAN),
        });
    }
    if cert.value <= UNEXTENDIBLE_TOL {
        return Err(Error::NotUnextendible {
            epsilon: cert.value,
        });
    }
    let mut out = u.clone();
    out.epsilon = Some(cert);
    Ok(out)
}

/// `(I - P_S) / (N - |S|)`.
pub fn bound_entangled_state(u: &UpbSet) -> Result<MultipartiteState> {
    let n = u.dims.total();
    let complement = &ComplexMatrix::identity(n) - &u.span_projector();
    let rank = (n - u.members.len()) as f64;
    MultipartiteState::new(u.dims.clone(), complement.scale_real(1.0 / rank))
}

/// Witness synthesized from a verified product set.
#[derive(Clone, Debug)]
pub struct UpbWitness {
    pub witness: Witness,
    pub epsilon: f64,
    /// Certified `max <phi|C|phi>` over product vectors.
    pub c: OptResult,
    /// `Tr(C rho_S)`.
    pub c_overlap: f64,
    /// `Tr(W rho_S)`, equal to `-(epsilon / c) Tr(C rho_S)`.
    pub value_on_state: f64,
}

/// Builds `P_S - (epsilon / c) C` and certifies it on product states.
pub fn build_witness(u: &UpbSet, c_op: &ComplexMatrix, budget: &Budget) -> Result<UpbWitness> {
    let epsilon = u.epsilon().ok_or(Error::Unverified)?;
    let n = u.dims.total();
    if c_op.rows() != n || c_op.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "C is {}x{} but the product set lives in dimension {n}",
            c_op.rows(),
            c_op.cols()
        )));
    }
    let min_eig = eig_hermitian(c_op)?.min();
    if min_eig < -crate::tensor::PSD_TOL * (1.0 + c_op.max_abs()) {
        return Err(Error::NotPositive { min_eig });
    }

    let c = certify(c_op, &u.dims, Direction::Max, budget)?;
    if !c.converged {
        return Err(Error::NotCertified {
            seesaw: c.value,
            grid: c.cross_check.unwrap_or(f64::NAN),
        });
    }
    if c.value <= 1e-12 {
        return Err(Error::DegenerateC { c: c.value });
    }
    let state = bound_entangled_state(u)?;
    let c_overlap = c_op.trace_product(state.rho())?.re;
    if c_overlap <= 1e-12 {
        return Err(Error::NotDetecting { overlap: c_overlap });
    }

    let w = &u.span_projector() - &c_op.scale_real(epsilon / c.value);
    let witness = Witness::new(u.dims.clone(), w)?.with_label("upb_witness");
    witness.certify(budget)?;
    let value_on_state = eval_witness(&witness, &state)?;
    Ok(UpbWitness {
        witness,
        epsilon,
        c,
        c_overlap,
        value_on_state,
    })
}
