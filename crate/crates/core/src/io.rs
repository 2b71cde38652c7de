//! File formats: the matrix JSON encoding, count records and CSV helpers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// Formats a float with 9 significant digits, trimming trailing zeros;
/// magnitudes below 1e-4 or from 1e9 up use exponent notation.
pub fn format_float(x: f64) -> String {
    let r = round_sig(x, 9);
    if r == 0.0 {
        return "0".into();
    }
    if r.abs() < 1e-4 || r.abs() >= 1e9 {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// `{"rows": R, "cols": C, "data": [[re, im], ...]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let clean = |v: f64| {
            let r = round_sig(v, 9);
            if r == 0.0 {
                0.0
            } else {
                r
            }
        };
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            data: m.entries().iter().map(|z| [clean(z.re), clean(z.im)]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        if j.data.len() != j.rows * j.cols {
            return Err(Error::Parse(format!(
                "matrix declares {}x{} but has {} entries",
                j.rows,
                j.cols,
                j.data.len()
            )));
        }
        if j.data.iter().any(|[re, im]| !re.is_finite() || !im.is_finite()) {
            return Err(Error::Parse("non-finite matrix entry".into()));
        }
        ComplexMatrix::from_vec(j.rows, j.cols, j.data.iter().map(|[re, im]| c64(*re, *im)).collect())
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("matrix serialization")
}

pub fn matrix_from_json(s: &str) -> Result<ComplexMatrix> {
    let j: MatrixJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    ComplexMatrix::try_from(j)
}
