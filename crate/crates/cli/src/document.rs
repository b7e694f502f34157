//! JSON documents exchanged between subcommands.
//!
//! Every document carries its `kind`, the local dimensions it lives on, a
//! payload of complex matrices stored as `{rows, cols, re, im}` and a `meta`
//! block with the tool version, seed and any attached certificates. Floats are
//! written with 17 significant digits and parsed back bit-exactly.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::Value;

use sepkit::maps::{LinearMapOp, Witness};
use sepkit::product_opt::OptResult;
use sepkit::states::{MultipartiteState, ProductVector, SeparableDecomposition};
use sepkit::upb::UpbSet;
use sepkit::{ComplexMatrix, Error, HilbertDims};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    State,
    Operator,
    Witness,
    Map,
    Upb,
    Report,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    State {
        rho: ComplexMatrix,
    },
    Operator {
        matrix: ComplexMatrix,
    },
    Witness {
        matrix: ComplexMatrix,
    },
    Map {
        in_dims: HilbertDims,
        out_dims: HilbertDims,
        choi: ComplexMatrix,
    },
    Upb {
        members: Vec<ProductVector>,
    },
    Report(Value),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<SeparableDecomposition>,
    /// Minimum over product states of a witness (or of a map's witness form).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product_min: Option<OptResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<OptResult>,
}

impl Certificates {
    fn is_empty(&self) -> bool {
        self == &Certificates::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Certificates::is_empty")]
    pub certificates: Certificates,
}

impl Default for Meta {
    fn default() -> Self {
        Meta {
            tool_version: TOOL_VERSION.to_string(),
            seed: None,
            label: None,
            certificates: Certificates::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDocument", into = "RawDocument")]
pub struct Document {
    pub dims: HilbertDims,
    pub payload: Payload,
    pub meta: Meta,
}

#[derive(Serialize, Deserialize)]
struct RawDocument {
    kind: Kind,
    dims: HilbertDims,
    payload: Value,
    meta: Meta,
}

#[derive(Serialize, Deserialize)]
struct MatrixPayload {
    #[serde(alias = "rho")]
    matrix: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct MapPayload {
    in_dims: HilbertDims,
    out_dims: HilbertDims,
    choi: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct UpbPayload {
    members: Vec<ProductVector>,
}

impl From<Document> for RawDocument {
    fn from(d: Document) -> Self {
        let kind = d.kind();
        let payload = match d.payload {
            Payload::State { rho } => serde_json::json!({ "rho": rho }),
            Payload::Operator { matrix } | Payload::Witness { matrix } => {
                serde_json::json!({ "matrix": matrix })
            }
            Payload::Map {
                in_dims,
                out_dims,
                choi,
            } => serde_json::to_value(MapPayload {
                in_dims,
                out_dims,
                choi,
            })
            .expect("plain data"),
            Payload::Upb { members } => {
                serde_json::to_value(UpbPayload { members }).expect("plain data")
            }
            Payload::Report(v) => v,
        };
        RawDocument {
            kind,
            dims: d.dims,
            payload,
            meta: d.meta,
        }
    }
}

impl TryFrom<RawDocument> for Document {
    type Error = String;

    fn try_from(raw: RawDocument) -> std::result::Result<Self, String> {
        let parse_err = |e: serde_json::Error| format!("{:?} payload: {e}", raw.kind);
        let payload = match raw.kind {
            Kind::State => Payload::State {
                rho: serde_json::from_value::<MatrixPayload>(raw.payload.clone())
                    .map_err(parse_err)?
                    .matrix,
            },
            Kind::Operator | Kind::Witness => {
                let matrix = serde_json::from_value::<MatrixPayload>(raw.payload.clone())
                    .map_err(parse_err)?
                    .matrix;
                if raw.kind == Kind::Operator {
                    Payload::Operator { matrix }
                } else {
                    Payload::Witness { matrix }
                }
            }
            Kind::Map => {
                let p: MapPayload =
                    serde_json::from_value(raw.payload.clone()).map_err(parse_err)?;
                Payload::Map {
                    in_dims: p.in_dims,
                    out_dims: p.out_dims,
                    choi: p.choi,
                }
            }
            Kind::Upb => Payload::Upb {
                members: serde_json::from_value::<UpbPayload>(raw.payload.clone())
                    .map_err(parse_err)?
                    .members,
            },
            Kind::Report => Payload::Report(raw.payload.clone()),
        };
        let doc = Document {
            dims: raw.dims,
            payload,
            meta: raw.meta,
        };
        doc.check_shape().map_err(|e| e.to_string())?;
        Ok(doc)
    }
}

impl Document {
    pub fn new(dims: HilbertDims, payload: Payload) -> Self {
        Document {
            dims,
            payload,
            meta: Meta::default(),
        }
    }

    pub fn report(dims: HilbertDims, value: Value) -> Self {
        Document::new(dims, Payload::Report(value))
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.meta.seed = seed;
        self
    }

    pub fn kind(&self) -> Kind {
        match self.payload {
            Payload::State { .. } => Kind::State,
            Payload::Operator { .. } => Kind::Operator,
            Payload::Witness { .. } => Kind::Witness,
            Payload::Map { .. } => Kind::Map,
            Payload::Upb { .. } => Kind::Upb,
            Payload::Report(_) => Kind::Report,
        }
    }

    /// The `dims` field is authoritative: matrices must match its total
    /// dimension and a map's dims must be its output dims followed by its
    /// input dims.
    fn check_shape(&self) -> sepkit::Result<()> {
        let n = self.dims.total();
        let check = |m: &ComplexMatrix, what: &str| {
            if m.rows() != n || m.cols() != n {
                Err(Error::DimensionMismatch(format!(
                    "{what} is {}x{} but dims {} require {n}x{n}",
                    m.rows(),
                    m.cols(),
                    self.dims
                )))
            } else {
                Ok(())
            }
        };
        match &self.payload {
            Payload::State { rho } => check(rho, "density matrix"),
            Payload::Operator { matrix } | Payload::Witness { matrix } => check(matrix, "operator"),
            Payload::Map {
                in_dims,
                out_dims,
                choi,
            } => {
                let mut expected = out_dims.as_slice().to_vec();
                expected.extend_from_slice(in_dims.as_slice());
                if expected != self.dims.as_slice() {
                    return Err(Error::DimensionMismatch(format!(
                        "map {in_dims} -> {out_dims} needs document dims {}",
                        HilbertDims::new(expected)?
                    )));
                }
                check(choi, "Choi operator")
            }
            Payload::Upb { members } => match members.iter().find(|m| m.dims() != self.dims) {
                Some(m) => Err(Error::DimensionMismatch(format!(
                    "member with dims {} in a set with dims {}",
                    m.dims(),
                    self.dims
                ))),
                None => Ok(()),
            },
            Payload::Report(_) => Ok(()),
        }
    }

    fn expect_kind(&self, kind: Kind) -> sepkit::Result<()> {
        if self.kind() == kind {
            Ok(())
        } else {
            Err(Error::WrongShape(format!(
                "expected a {kind:?} document, got {:?}",
                self.kind()
            )))
        }
    }

    pub fn from_state(state: &MultipartiteState) -> Self {
        let mut doc = Document::new(
            state.dims().clone(),
            Payload::State {
                rho: state.rho().clone(),
            },
        );
        doc.meta.certificates.decomposition = state.decomposition().cloned();
        doc
    }

    pub fn to_state(&self) -> sepkit::Result<MultipartiteState> {
        self.expect_kind(Kind::State)?;
        let Payload::State { rho } = &self.payload else {
            unreachable!()
        };
        let state = MultipartiteState::new(self.dims.clone(), rho.clone())?;
        match &self.meta.certificates.decomposition {
            Some(d) => state.with_decomposition(d.clone()),
            None => Ok(state),
        }
    }

    pub fn from_operator(dims: HilbertDims, matrix: ComplexMatrix) -> Self {
        Document::new(dims, Payload::Operator { matrix })
    }

    /// Matrix of an operator, witness or state document.
    pub fn to_operator(&self) -> sepkit::Result<ComplexMatrix> {
        match &self.payload {
            Payload::Operator { matrix } | Payload::Witness { matrix } => Ok(matrix.clone()),
            Payload::State { rho } => Ok(rho.clone()),
            _ => Err(Error::WrongShape(format!(
                "expected an operator document, got {:?}",
                self.kind()
            ))),
        }
    }

    pub fn from_witness(w: &Witness) -> Self {
        let mut doc = Document::new(
            w.dims().clone(),
            Payload::Witness {
                matrix: w.matrix().clone(),
            },
        );
        doc.meta.label = w.label().map(str::to_string);
        doc.meta.certificates.product_min = w.certificate().cloned();
        doc
    }

    pub fn to_witness(&self) -> sepkit::Result<Witness> {
        self.expect_kind(Kind::Witness)?;
        let mut w = Witness::new(self.dims.clone(), self.to_operator()?)?;
        if let Some(label) = &self.meta.label {
            w = w.with_label(label.clone());
        }
        match &self.meta.certificates.product_min {
            Some(c) => w.with_certificate(c.clone()),
            None => Ok(w),
        }
    }

    pub fn from_map(m: &LinearMapOp) -> Self {
        let mut dims = m.out_dims().as_slice().to_vec();
        dims.extend_from_slice(m.in_dims().as_slice());
        let mut doc = Document::new(
            HilbertDims::new(dims).expect("dims of a valid map"),
            Payload::Map {
                in_dims: m.in_dims().clone(),
                out_dims: m.out_dims().clone(),
                choi: m.choi().clone(),
            },
        );
        doc.meta.certificates.product_min = m.certificate().cloned();
        doc
    }

    pub fn to_map(&self) -> sepkit::Result<LinearMapOp> {
        self.expect_kind(Kind::Map)?;
        let Payload::Map {
            in_dims,
            out_dims,
            choi,
        } = &self.payload
        else {
            unreachable!()
        };
        let m = LinearMapOp::from_choi(in_dims.clone(), out_dims.clone(), choi.clone())?;
        Ok(match &self.meta.certificates.product_min {
            Some(c) => m.with_certificate(c.clone()),
            None => m,
        })
    }

    pub fn from_upb(u: &UpbSet) -> Self {
        let mut doc = Document::new(
            u.dims().clone(),
            Payload::Upb {
                members: u.members().to_vec(),
            },
        );
        doc.meta.certificates.epsilon = u.epsilon_certificate().cloned();
        doc
    }

    pub fn to_upb(&self) -> sepkit::Result<UpbSet> {
        self.expect_kind(Kind::Upb)?;
        let Payload::Upb { members } = &self.payload else {
            unreachable!()
        };
        let u = UpbSet::new(self.dims.clone(), members.clone())?;
        match &self.meta.certificates.epsilon {
            Some(c) => u.with_epsilon(c.clone()),
            None => Ok(u),
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
        self.serialize(&mut ser).expect("documents serialize");
        String::from_utf8(out).expect("JSON is UTF-8")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Compact JSON with every float printed as `d.dddddddddddddddde±x`.
pub struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}
