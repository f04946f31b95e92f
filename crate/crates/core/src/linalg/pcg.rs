use super::csr::{axpy, dot, norm2, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
}

#[derive(Clone, Debug)]
pub struct SolveStats {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `||b - A x|| / ||b||`.
    pub residual: f64,
}

/// Preconditioned conjugate gradients for SPD `a`.
///
/// Stops once the true residual satisfies `||b - A x|| <= rel_tol ||b||`.
pub fn pcg_solve(
    a: &CsrMatrix,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
    precond: Preconditioner,
) -> Result<SolveStats> {
    if !a.is_square() || a.nrows() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "pcg: {}x{} matrix with right side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let inv_diag: Vec<f64> = match precond {
        Preconditioner::None => vec![1.0; a.nrows()],
        Preconditioner::Jacobi => a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect(),
    };
    pcg_operator(
        |x, y| a.mul_vec_into(x, y),
        |r, z| {
            for ((zi, ri), di) in z.iter_mut().zip(r).zip(&inv_diag) {
                *zi = ri * di;
            }
        },
        b,
        None,
        rel_tol,
        max_iter,
    )
}

/// Conjugate gradients on a matrix-free SPD operator with a user preconditioner.
pub fn pcg_operator(
    apply: impl Fn(&[f64], &mut [f64]),
    precondition: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x0: Option<&[f64]>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = b.len();
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Breakdown("non-finite right-hand side".into()));
    }
    let bnorm = norm2(b);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    if bnorm == 0.0 {
        return Ok(SolveStats { x: vec![0.0; n], iterations: 0, residual: 0.0 });
    }

    let mut r = b.to_vec();
    let mut ap = vec![0.0; n];
    if x0.is_some() {
        apply(&x, &mut ap);
        axpy(-1.0, &ap, &mut r);
    }
    let target = rel_tol * bnorm;
    let mut rnorm = norm2(&r);
    if rnorm <= target {
        return Ok(SolveStats { x, iterations: 0, residual: rnorm / bnorm });
    }
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut best = (rnorm, x.clone());

    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() || pap <= 0.0 {
            if !pap.is_finite() {
                return Err(Error::Breakdown("non-finite curvature in CG".into()));
            }
            return Err(Error::Breakdown(format!("non-positive curvature {pap:.3e} in CG (operator not SPD)")));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        rnorm = norm2(&r);
        if !rnorm.is_finite() {
            return Err(Error::Breakdown("non-finite residual in CG".into()));
        }
        if rnorm < best.0 {
            best = (rnorm, x.clone());
        }
        if rnorm <= target {
            // Confirm with the true residual; the recursive one drifts slightly.
            apply(&x, &mut ap);
            let mut true_r = b.to_vec();
            axpy(-1.0, &ap, &mut true_r);
            let true_norm = norm2(&true_r);
            if true_norm <= target {
                return Ok(SolveStats { x, iterations: it, residual: true_norm / bnorm });
            }
            r = true_r;
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, residual: best.0 / bnorm, best: best.1 })
}
