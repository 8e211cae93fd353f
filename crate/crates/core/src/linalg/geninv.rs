//! Generalized inverses of floating subdomain matrices by dof fixing.
//!
//! For `K` symmetric positive semi-definite with `null(K) = range(R)`, one dof
//! per rigid mode is fixed (chosen by column-pivoted orthogonalization of
//! `Rᵀ`). The remaining block is definite and factorized; applying the inverse
//! returns zeros at the fixed dofs. The result satisfies `K K⁺ K = K` and
//! `K K⁺ b = b` whenever `Rᵀ b = 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::skyline::Factorization;
use crate::linalg::sparse::CsrMatrix;

/// Modes whose residual `‖K r‖` exceeds this fraction of `‖K‖‖r‖` are rejected.
pub const KERNEL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct GeneralizedInverse {
    n: usize,
    fixed: Vec<usize>,
    free: Vec<usize>,
    factor: Option<Factorization>,
    kernel: DMatrix<f64>,
}

impl GeneralizedInverse {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn fixed_dofs(&self) -> &[usize] {
        &self.fixed
    }

    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    pub fn is_singular(&self) -> bool {
        !self.fixed.is_empty()
    }

    pub fn apply(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.n);
        if let Some(f) = &self.factor {
            let rhs = DVector::from_iterator(self.free.len(), self.free.iter().map(|&i| b[i]));
            let y = f.solve(&rhs);
            for (k, &i) in self.free.iter().enumerate() {
                x[i] = y[k];
            }
        }
        x
    }
}

pub fn factorize_semidefinite(k: &CsrMatrix, r: &DMatrix<f64>) -> Result<GeneralizedInverse> {
    check_kernel(k.nrows(), k.norm_inf(), r, |v| k.mul_vec(v))?;
    let fixed = pivot_dofs(r)?;
    let free = complement(k.nrows(), &fixed);
    let factor = if free.is_empty() {
        None
    } else {
        Some(Factorization::sparse(&k.submatrix(&free, &free)).map_err(not_spanned)?)
    };
    Ok(GeneralizedInverse {
        n: k.nrows(),
        fixed,
        free,
        factor,
        kernel: r.clone(),
    })
}

pub fn factorize_semidefinite_dense(k: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<GeneralizedInverse> {
    let norm = k.row_iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    check_kernel(k.nrows(), norm, r, |v| k * v)?;
    let fixed = pivot_dofs(r)?;
    let free = complement(k.nrows(), &fixed);
    let factor = if free.is_empty() {
        None
    } else {
        let sub = k.select_rows(&free).select_columns(&free);
        Some(Factorization::dense(&sub).map_err(not_spanned)?)
    };
    Ok(GeneralizedInverse {
        n: k.nrows(),
        fixed,
        free,
        factor,
        kernel: r.clone(),
    })
}

fn not_spanned(e: Error) -> Error {
    Error::InconsistentNullSpace(format!("reduced matrix is not definite ({e})"))
}

fn check_kernel(n: usize, norm: f64, r: &DMatrix<f64>, mul: impl Fn(&DVector<f64>) -> DVector<f64>) -> Result<()> {
    if r.ncols() > 0 && r.nrows() != n {
        return Err(Error::Dimension(format!("kernel basis has {} rows, matrix {}", r.nrows(), n)));
    }
    for c in 0..r.ncols() {
        let col = r.column(c).into_owned();
        let kr = mul(&col).norm();
        if kr > KERNEL_TOLERANCE * norm * col.norm() {
            return Err(Error::InconsistentNullSpace(format!(
                "mode {c} is not in the null space (|K r| = {kr:.3e})"
            )));
        }
    }
    Ok(())
}

fn complement(n: usize, fixed: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !fixed.contains(i)).collect()
}

/// Column-pivoted Gram–Schmidt on `Rᵀ`: one dof (row of `R`) per mode.
pub fn pivot_dofs(r: &DMatrix<f64>) -> Result<Vec<usize>> {
    let m = r.ncols();
    let mut rows: Vec<DVector<f64>> = (0..r.nrows()).map(|i| r.row(i).transpose()).collect();
    let scale = rows.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut chosen = Vec::with_capacity(m);
    for _ in 0..m {
        let (best, norm) = rows
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(i, v)| (i, v.norm()))
            .fold((usize::MAX, -1.0), |acc, (i, n)| if n > acc.1 * (1.0 + 1e-12) { (i, n) } else { acc });
        if best == usize::MAX || norm <= 1e-10 * scale {
            return Err(Error::InconsistentNullSpace("rigid body modes are linearly dependent".into()));
        }
        let q = &rows[best] / norm;
        for v in rows.iter_mut() {
            let c = v.dot(&q);
            *v -= &q * c;
        }
        chosen.push(best);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn floating_spring_fixes_first_node() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let r = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]) / 2f64.sqrt();
        let g = factorize_semidefinite_dense(&k, &r).unwrap();
        assert_eq!(g.fixed_dofs(), &[0]);
        let x = g.apply(&DVector::from_vec(vec![-1.0, 1.0]));
        assert_eq!(x, DVector::from_vec(vec![0.0, 1.0]));
        assert_eq!(&k * &x, DVector::from_vec(vec![-1.0, 1.0]));
        let sparse = factorize_semidefinite(&CsrMatrix::from_dense(&k), &r).unwrap();
        assert_eq!(sparse.apply(&DVector::from_vec(vec![-1.0, 1.0])), x);
    }

    #[test]
    fn empty_kernel_is_plain_solve() {
        let k = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let g = factorize_semidefinite_dense(&k, &DMatrix::zeros(2, 0)).unwrap();
        assert!(!g.is_singular());
        let b = DVector::from_vec(vec![1.0, 0.0]);
        assert!((&k * g.apply(&b) - &b).norm() < 1e-14);
    }

    /// K K⁺ K = K on random PSD matrices MᵀM with a prescribed kernel.
    #[test]
    fn reflexive_identity_on_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..20 {
            let n = rng.random_range(2..=12);
            let m = rng.random_range(0..n.min(4));
            let basis = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
            let r = if m > 0 { basis.clone().qr().q() } else { DMatrix::zeros(n, 0) };
            let proj = DMatrix::identity(n, n) - &r * r.transpose();
            let a = DMatrix::from_fn(n + 2, n, |_, _| rng.random_range(-1.0..1.0)) * &proj;
            let k = a.transpose() * &a;
            let k = (&k + k.transpose()) * 0.5;
            let g = factorize_semidefinite_dense(&k, &r).unwrap();
            let mut kkk = DMatrix::zeros(n, n);
            for c in 0..n {
                kkk.set_column(c, &(&k * g.apply(&k.column(c).into_owned())));
            }
            let err = (&kkk - &k).norm() / k.norm();
            assert!(err < 1e-8, "trial {trial}: n={n} m={m} err={err:e}");
        }
    }

    #[test]
    fn missing_mode_is_detected() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let err = factorize_semidefinite_dense(&k, &DMatrix::zeros(2, 0)).unwrap_err();
        assert!(matches!(err, Error::InconsistentNullSpace(_)));
        let wrong = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        assert!(factorize_semidefinite_dense(&k, &wrong).is_err());
    }
}
