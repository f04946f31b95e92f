//! Sparse storage, iterative and direct SPD solvers.

mod csr;
mod dense;
mod envelope;
mod pcg;

pub use csr::{axpy, dot, norm2, CsrMatrix};
pub use dense::{dense_spd_check, Definiteness, DENSE_LIMIT};
pub use envelope::{reverse_cuthill_mckee, EnvelopeCholesky};
pub use pcg::{pcg_operator, pcg_solve, Preconditioner, SolveStats};

use crate::error::Result;

/// How the SPD systems of the discrete problem are solved.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum SolverKind {
    /// Factor once with envelope Cholesky, then back-substitute.
    #[default]
    Cholesky,
    /// Preconditioned CG on every solve.
    Pcg { rel_tol: f64, max_iter: usize, preconditioner: Preconditioner },
}

/// A reusable solver for a fixed SPD matrix.
#[derive(Clone, Debug)]
pub enum SpdSolver {
    Cholesky(EnvelopeCholesky),
    Pcg { matrix: CsrMatrix, rel_tol: f64, max_iter: usize, preconditioner: Preconditioner },
}

impl SpdSolver {
    pub fn new(a: &CsrMatrix, kind: SolverKind) -> Result<Self> {
        Ok(match kind {
            SolverKind::Cholesky => SpdSolver::Cholesky(EnvelopeCholesky::factor(a)?),
            SolverKind::Pcg { rel_tol, max_iter, preconditioner } => {
                SpdSolver::Pcg { matrix: a.clone(), rel_tol, max_iter, preconditioner }
            }
        })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            SpdSolver::Cholesky(c) => Ok(c.solve(b)),
            SpdSolver::Pcg { matrix, rel_tol, max_iter, preconditioner } => {
                Ok(pcg_solve(matrix, b, *rel_tol, *max_iter, *preconditioner)?.x)
            }
        }
    }
}
