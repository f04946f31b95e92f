//! Envelope (skyline) Cholesky factorization after reverse Cuthill-McKee reordering.
//!
//! On the structured meshes used here the reordered bandwidth is `O(N)`, so one
//! factorization costs `O(N^4)` and each solve `O(N^3)`. The optimal control
//! solvers factor the stiffness matrix once and reuse it for every state and
//! adjoint solve.

use std::collections::VecDeque;

use super::csr::CsrMatrix;
use crate::error::{Error, Result};

/// Reverse Cuthill-McKee permutation of the symmetric sparsity pattern of `a`.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_last_level = |start: usize, visited: &[bool]| -> (usize, usize) {
        // Returns the eccentricity of `start` and a min-degree node on the last level.
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::from([start]);
        dist[start] = 0;
        let mut far = (0, start);
        while let Some(u) = queue.pop_front() {
            let d = dist[u];
            if d > far.0 || (d == far.0 && degree[u] < degree[far.1]) {
                far = (d, u);
            }
            for &v in a.row(u).0 {
                if !visited[v] && dist[v] == usize::MAX {
                    dist[v] = d + 1;
                    queue.push_back(v);
                }
            }
        }
        far
    };

    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)).unwrap();
        // A few sweeps towards a pseudo-peripheral node.
        let mut start = seed;
        let mut ecc = 0;
        for _ in 0..4 {
            let (e, far) = bfs_last_level(start, &visited);
            if e <= ecc && start != seed {
                break;
            }
            ecc = e;
            start = far;
        }

        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        let mut neighbors = Vec::new();
        while let Some(u) = queue.pop_front() {
            order.push(u);
            neighbors.clear();
            neighbors.extend(a.row(u).0.iter().copied().filter(|&v| !visited[v]));
            neighbors.sort_by_key(|&v| (degree[v], v));
            for &v in &neighbors {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// Lower-triangular Cholesky factor stored row-wise from the first nonzero column.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument("cholesky needs a square matrix".into()));
        }
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &j in a.row(old).0 {
                let jn = inv[j];
                if jn < first[new] {
                    first[new] = jn;
                }
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + (i - first[i] + 1));
        }
        let mut values = vec![0.0; offsets[n]];
        for (new, &old) in perm.iter().enumerate() {
            let (cols, vals) = a.row(old);
            for (&j, &v) in cols.iter().zip(vals) {
                let jn = inv[j];
                if jn <= new {
                    values[offsets[new] + jn - first[new]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let (head, tail) = values.split_at_mut(offsets[i]);
            let row_i = &mut tail[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let start = fi.max(fj);
                let row_j = &head[offsets[j]..offsets[j + 1]];
                let s: f64 = row_i[start - fi..j - fi].iter().zip(&row_j[start - fj..j - fj]).map(|(x, y)| x * y).sum();
                row_i[j - fi] = (row_i[j - fi] - s) / row_j[j - fj];
            }
            let d = row_i[i - fi] - row_i[..i - fi].iter().map(|v| v * v).sum::<f64>();
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { row: perm[i], pivot: d });
            }
            row_i[i - fi] = d.sqrt();
        }
        Ok(Self { perm, first, offsets, values })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut z: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&z[fi..i]).map(|(l, x)| l * x).sum();
            z[i] = (z[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let xi = z[i] / row[i - fi];
            z[i] = xi;
            for (zk, l) in z[fi..i].iter_mut().zip(&row[..i - fi]) {
                *zk -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = z[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::csr::norm2;

    fn laplacian_2d(m: usize) -> CsrMatrix {
        let n = m * m;
        let mut t = Vec::new();
        for j in 0..m {
            for i in 0..m {
                let k = j * m + i;
                t.push((k, k, 4.0));
                if i + 1 < m {
                    t.push((k, k + 1, -1.0));
                    t.push((k + 1, k, -1.0));
                }
                if j + 1 < m {
                    t.push((k, k + m, -1.0));
                    t.push((k + m, k, -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(n, n, t).unwrap()
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_2d(7);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort();
        assert_eq!(p, (0..49).collect::<Vec<_>>());
    }

    #[test]
    fn solves_grid_laplacian() {
        let a = laplacian_2d(20);
        let chol = EnvelopeCholesky::factor(&a).unwrap();
        assert!(chol.envelope_size() < 400 * 30);
        let b: Vec<f64> = (0..400).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let x = chol.solve(&b);
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(ax, bi)| ax - bi).collect();
        assert!(norm2(&r) < 1e-12 * norm2(&b));
    }

    #[test]
    fn detects_indefinite() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(EnvelopeCholesky::factor(&a), Err(Error::NotPositiveDefinite { .. })));
    }
}
