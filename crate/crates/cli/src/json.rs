//! JSON encodings of numbers and matrices. Complex numbers are `[re, im]`,
//! matrices are arrays of rows, block labels are 1-based.

use serde_json::{json, Value};
use stokes_lab::numkit::{CMatrix, C64};

pub fn cx(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn cvec(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&z| cx(z)).collect())
}

pub fn mat(m: &CMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| cx(m[(i, j)])).collect())).collect())
}

pub fn mats(ms: &[CMatrix]) -> Value {
    Value::Array(ms.iter().map(mat).collect())
}

/// Zero-based block indices shifted to 1-based labels.
pub fn labels(v: &[usize]) -> Value {
    json!(v.iter().map(|k| k + 1).collect::<Vec<_>>())
}

pub fn pairs(v: &[(usize, usize)]) -> Value {
    json!(v.iter().map(|&(s, t)| [s + 1, t + 1]).collect::<Vec<_>>())
}

/// Residual summary with the threshold it is judged against.
pub fn check(residual: f64, threshold: f64) -> Value {
    json!({ "residual": residual, "threshold": threshold, "pass": residual <= threshold })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodings() {
        assert_eq!(cx(C64::new(1.5, -2.0)), json!([1.5, -2.0]));
        let m = CMatrix::from_row_slice(1, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        assert_eq!(mat(&m), json!([[[1.0, 0.0], [0.0, 1.0]]]));
        assert_eq!(pairs(&[(0, 1)]), json!([[1, 2]]));
        assert_eq!(check(2.0, 1.0)["pass"], json!(false));
    }
}
