use super::csr::CsrMatrix;
use crate::error::{Error, Result};

/// Largest dimension accepted by [`dense_spd_check`].
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Definiteness {
    PositiveDefinite,
    /// Factorization met a non-positive pivot.
    NotPositiveDefinite {
        row: usize,
        pivot: f64,
    },
}

impl Definiteness {
    pub fn is_positive_definite(&self) -> bool {
        matches!(self, Definiteness::PositiveDefinite)
    }
}

/// Dense Cholesky factorization of a symmetric matrix; succeeds iff every pivot is positive.
pub fn dense_spd_check(a: &CsrMatrix) -> Result<Definiteness> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::InvalidArgument("dense_spd_check needs a square matrix".into()));
    }
    if n > DENSE_LIMIT {
        return Err(Error::InvalidArgument(format!("dimension {n} exceeds dense limit {DENSE_LIMIT}")));
    }
    let mut l = a.to_dense();
    for j in 0..n {
        let d = l[j][j] - l[j][..j].iter().map(|v| v * v).sum::<f64>();
        if !(d > 0.0) {
            return Ok(Definiteness::NotPositiveDefinite { row: j, pivot: d });
        }
        let djj = d.sqrt();
        l[j][j] = djj;
        let row_j = l[j][..j].to_vec();
        for row_i in l.iter_mut().skip(j + 1) {
            let s = row_i[j] - row_i[..j].iter().zip(&row_j).map(|(x, y)| x * y).sum::<f64>();
            row_i[j] = s / djj;
        }
    }
    Ok(Definiteness::PositiveDefinite)
}
