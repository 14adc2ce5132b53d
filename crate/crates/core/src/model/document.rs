//! JSON model documents. Reals are written with 17 significant digits so a
//! document round-trips bit-exactly.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use super::cluster::ClusterModel;
use crate::linalg::{self, EigenDecomposition, Matrix, SymMatrix};
use crate::{Error, Result};

/// On-disk model layout; matrices are flattened row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub d_x: usize,
    pub m: usize,
    pub lambda_used: f64,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<f64>,
    pub g_inv: Vec<f64>,
    pub coverage: Vec<f64>,
    pub localization: Vec<f64>,
    /// Regularized Gram matrix.
    pub g: Vec<f64>,
    pub yg: Vec<f64>,
    pub y_vec: Vec<f64>,
}

impl From<&ClusterModel> for ModelDocument {
    fn from(m: &ClusterModel) -> Self {
        ModelDocument {
            d_x: m.dim(),
            m: m.m,
            lambda_used: m.lambda_used,
            eigenvalues: m.eigenvalues.clone(),
            eigenvectors: m.eigenvectors.as_slice().to_vec(),
            g_inv: m.g_inv.as_slice().to_vec(),
            coverage: m.coverage.clone(),
            localization: m.localization.clone(),
            g: m.g.as_slice().to_vec(),
            yg: m.yg.as_slice().to_vec(),
            y_vec: m.y_vec.clone(),
        }
    }
}

impl TryFrom<ModelDocument> for ClusterModel {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        let d = doc.d_x;
        if d == 0 {
            return Err(Error::InvalidModel("d_x must be positive".into()));
        }
        let vectors = [
            ("eigenvalues", doc.eigenvalues.len(), d),
            ("coverage", doc.coverage.len(), d),
            ("localization", doc.localization.len(), d),
            ("y_vec", doc.y_vec.len(), d),
            ("eigenvectors", doc.eigenvectors.len(), d * d),
            ("g_inv", doc.g_inv.len(), d * d),
            ("g", doc.g.len(), d * d),
            ("yg", doc.yg.len(), d * d),
        ];
        for (name, found, expected) in vectors {
            if found != expected {
                return Err(Error::InvalidModel(format!(
                    "`{name}` has {found} entries, expected {expected}"
                )));
            }
        }
        let sym = |name: &str, v: Vec<f64>| {
            SymMatrix::new(d, v).map_err(|e| Error::InvalidModel(format!("`{name}`: {e}")))
        };
        let eig = EigenDecomposition {
            values: doc.eigenvalues,
            vectors: Matrix::from_vec(d, d, doc.eigenvectors)?,
        };
        let g = sym("g", doc.g)?;
        let factor = linalg::cholesky(&g)
            .map_err(|e| Error::InvalidModel(format!("`g` is not usable as a metric: {e}")))?;
        ClusterModel::assemble(
            eig,
            g,
            factor,
            sym("g_inv", doc.g_inv)?,
            sym("yg", doc.yg)?,
            doc.y_vec,
            doc.coverage,
            doc.localization,
            doc.m,
            doc.lambda_used,
        )
    }
}

impl ClusterModel {
    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        write_json_17(&mut out, &ModelDocument::from(self)).expect("in-memory write");
        out.push(b'\n');
        String::from_utf8(out).expect("JSON is UTF-8")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDocument =
            serde_json::from_str(s).map_err(|e| Error::InvalidModel(e.to_string()))?;
        ClusterModel::try_from(doc)
    }
}

/// Pretty-printed JSON with every `f64` written as `{:.16e}`.
pub fn write_json_17<W: io::Write, T: Serialize + ?Sized>(writer: W, value: &T) -> io::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, SeventeenDigits::default());
    value.serialize(&mut ser).map_err(io::Error::other)
}

#[derive(Default)]
struct SeventeenDigits {
    inner: PrettyFormatter<'static>,
}

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}
