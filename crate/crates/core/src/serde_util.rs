//! `[re, im]` encodings for complex scalars, vectors and matrices.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::numeric::{CMatrix, CVector};

pub type ComplexRepr = [f64; 2];
pub type MatrixRepr = Vec<Vec<ComplexRepr>>;

pub fn complex_to_repr(z: Complex64) -> ComplexRepr {
    [z.re, z.im]
}

pub fn complex_from_repr(r: ComplexRepr) -> Result<Complex64, String> {
    if r[0].is_finite() && r[1].is_finite() {
        Ok(Complex64::new(r[0], r[1]))
    } else {
        Err("non-finite complex entry".into())
    }
}

pub fn matrix_to_repr(m: &CMatrix) -> MatrixRepr {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| complex_to_repr(m[(i, j)])).collect())
        .collect()
}

pub fn matrix_from_repr(rows: &MatrixRepr) -> Result<CMatrix, String> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err("ragged matrix rows".into());
    }
    let mut m = CMatrix::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            m[(i, j)] = complex_from_repr(e)?;
        }
    }
    Ok(m)
}

pub fn vector_to_repr(v: &CVector) -> Vec<ComplexRepr> {
    v.iter().map(|&z| complex_to_repr(z)).collect()
}

pub fn vector_from_repr(v: &[ComplexRepr]) -> Result<CVector, String> {
    let entries = v.iter().map(|&r| complex_from_repr(r)).collect::<Result<Vec<_>, _>>()?;
    Ok(CVector::from_vec(entries))
}

/// `#[serde(with = "crate::serde_util::matrix")]`
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_repr(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows = MatrixRepr::deserialize(d)?;
        matrix_from_repr(&rows).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "crate::serde_util::complex")]`
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        complex_to_repr(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        complex_from_repr(ComplexRepr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "crate::serde_util::vector")]`
pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> Result<S::Ok, S::Error> {
        vector_to_repr(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector, D::Error> {
        let raw = Vec::<ComplexRepr>::deserialize(d)?;
        vector_from_repr(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::c;

    #[test]
    fn matrix_repr_layout() {
        let m = CMatrix::from_row_slice(1, 2, &[c(1.0, 2.0), c(-0.5, 0.0)]);
        let json = serde_json::to_string(&matrix_to_repr(&m)).unwrap();
        assert_eq!(json, "[[[1.0,2.0],[-0.5,0.0]]]");
        let back: MatrixRepr = serde_json::from_str(&json).unwrap();
        assert_eq!(matrix_from_repr(&back).unwrap(), m);
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows: MatrixRepr = vec![vec![[1.0, 0.0]], vec![]];
        assert!(matrix_from_repr(&rows).is_err());
    }
}
