//! Skyline (profile) Cholesky factorization with reverse Cuthill–McKee ordering.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::sparse::CsrMatrix;

/// Pivots below this fraction of the original diagonal are treated as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// `P A Pᵀ = L Lᵀ` with `L` stored row-wise in a variable-band profile.
#[derive(Debug, Clone)]
pub struct Factorization {
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// `inv[old] = new`
    inv: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl Factorization {
    /// Factorizes a symmetric sparse matrix, reordering it with RCM first.
    pub fn sparse(a: &CsrMatrix) -> Result<Self> {
        check_square(a.nrows(), a.ncols())?;
        let perm = reverse_cuthill_mckee(a);
        Self::build(a.nrows(), perm, |old_row, push| {
            for (j, v) in a.row(old_row) {
                push(j, v)
            }
        })
    }

    /// Factorizes a dense symmetric matrix in its natural order.
    pub fn dense(a: &DMatrix<f64>) -> Result<Self> {
        check_square(a.nrows(), a.ncols())?;
        Self::build(a.nrows(), (0..a.nrows()).collect(), |old_row, push| {
            for j in 0..a.ncols() {
                let v = a[(old_row, j)];
                if v != 0.0 {
                    push(j, v)
                }
            }
        })
    }

    fn build(n: usize, perm: Vec<usize>, rows: impl Fn(usize, &mut dyn FnMut(usize, f64))) -> Result<Self> {
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        // profile: first column of each (permuted) lower row
        let mut first: Vec<usize> = (0..n).collect();
        for new_i in 0..n {
            rows(perm[new_i], &mut |j, _| {
                let new_j = inv[j];
                if new_j < first[new_i] {
                    first[new_i] = new_j;
                }
            });
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut len = 0;
        for i in 0..n {
            start.push(len);
            len += i - first[i] + 1;
        }
        start.push(len);
        let mut data = vec![0.0; len];
        let mut diag = vec![0.0; n];
        for new_i in 0..n {
            rows(perm[new_i], &mut |j, v| {
                let new_j = inv[j];
                if new_j <= new_i {
                    data[start[new_i] + new_j - first[new_i]] += v;
                }
                if new_j == new_i {
                    diag[new_i] += v;
                }
            });
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let row_i = &data[start[i] + k0 - fi..start[i] + j - fi];
                let row_j = &data[start[j] + k0 - fj..start[j] + j - fj];
                let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
                let ljj = data[start[j] + j - fj];
                let idx = start[i] + j - fi;
                data[idx] = (data[idx] - dot) / ljj;
            }
            let row = &data[start[i]..start[i] + i - fi];
            let d = data[start[i] + i - fi] - row.iter().map(|v| v * v).sum::<f64>();
            if !(d > PIVOT_TOLERANCE * diag[i].abs()) || diag[i] <= 0.0 {
                return Err(Error::NotPositiveDefinite {
                    row: perm[i],
                    pivot: d,
                    diagonal: diag[i],
                });
            }
            data[start[i] + i - fi] = d.sqrt();
        }
        Ok(Self {
            perm,
            inv,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the factor.
    pub fn profile_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side length");
        let mut y: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i] + i - fi];
            let dot: f64 = row.iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - dot) / self.data[self.start[i] + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            y[i] /= self.data[self.start[i] + i - fi];
            let xi = y[i];
            for (k, l) in (fi..i).zip(&self.data[self.start[i]..self.start[i] + i - fi]) {
                y[k] -= l * xi;
            }
        }
        DVector::from_iterator(n, (0..n).map(|old| y[self.inv[old]]))
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(b.nrows(), b.ncols());
        for c in 0..b.ncols() {
            x.set_column(c, &self.solve(&b.column(c).into_owned()));
        }
        x
    }
}

fn check_square(r: usize, c: usize) -> Result<()> {
    if r != c {
        return Err(Error::Dimension(format!("cannot factorize a {r}x{c} matrix")));
    }
    Ok(())
}

/// Reverse Cuthill–McKee ordering of the symmetric sparsity graph; returns `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj: Vec<Vec<usize>> = (0..n).map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect()).collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        // start each component from its lowest-degree unvisited node
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)).unwrap();
        let mut queue = VecDeque::from([seed]);
        visited[seed] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn solves_sparse_spd() {
        let a = laplacian_1d(40);
        let f = Factorization::sparse(&a).unwrap();
        assert!(f.profile_size() <= 2 * 40);
        let b = DVector::from_fn(40, |i, _| (i as f64).sin());
        let x = f.solve(&b);
        let r = a.mul_vec(&x) - &b;
        assert!(r.norm() <= 1e-12 * b.norm());
    }

    #[test]
    fn solves_random_dense_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 12] {
            let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let a = &m.transpose() * &m + DMatrix::identity(n, n) * 0.1;
            let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let x = Factorization::dense(&a).unwrap().solve(&b);
            assert!((&a * &x - &b).norm() <= 1e-10 * a.norm() * x.norm());
            let xs = Factorization::sparse(&CsrMatrix::from_dense(&a)).unwrap().solve(&b);
            assert!((&x - &xs).norm() <= 1e-10 * x.norm());
        }
    }

    #[test]
    fn detects_singular_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!(matches!(Factorization::dense(&a), Err(Error::NotPositiveDefinite { .. })));
        let z = DMatrix::<f64>::zeros(1, 1);
        assert!(Factorization::dense(&z).is_err());
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_1d(10);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, (0..10).collect::<Vec<_>>());
    }
}
