//! Static condensation of subdomain matrices onto their boundary dofs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::skyline::Factorization;
use crate::linalg::sparse::CsrMatrix;

/// Block split of a subdomain matrix into boundary (b) and internal (i) dofs
/// with `K_ii` factorized once.
#[derive(Debug, Clone)]
pub struct StaticCondensation {
    boundary: Vec<usize>,
    internal: Vec<usize>,
    k_bb: CsrMatrix,
    k_bi: CsrMatrix,
    k_ii: Option<Factorization>,
}

impl StaticCondensation {
    pub fn new(k: &CsrMatrix, boundary: &[usize]) -> Result<Self> {
        let n = k.nrows();
        let mut is_boundary = vec![false; n];
        for &b in boundary {
            if b >= n {
                return Err(Error::Dimension(format!("boundary dof {b} out of range {n}")));
            }
            is_boundary[b] = true;
        }
        let internal: Vec<usize> = (0..n).filter(|&i| !is_boundary[i]).collect();
        let k_ii = if internal.is_empty() {
            None
        } else {
            Some(Factorization::sparse(&k.submatrix(&internal, &internal)).map_err(|e| Error::SingularInterior(Box::new(e)))?)
        };
        Ok(Self {
            boundary: boundary.to_vec(),
            k_bb: k.submatrix(boundary, boundary),
            k_bi: k.submatrix(boundary, &internal),
            internal,
            k_ii,
        })
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn internal(&self) -> &[usize] {
        &self.internal
    }

    pub fn k_bb(&self) -> &CsrMatrix {
        &self.k_bb
    }

    /// `S = K_bb − K_bi K_ii⁻¹ K_ib`, dense and symmetrized.
    pub fn schur(&self) -> DMatrix<f64> {
        let nb = self.boundary.len();
        let mut s = self.k_bb.to_dense();
        if let Some(f) = &self.k_ii {
            let k_ib = self.k_bi.to_dense().transpose();
            let x = f.solve_matrix(&k_ib);
            s -= self.k_bi.to_dense() * x;
        }
        let s = (&s + s.transpose()) * 0.5;
        debug_assert_eq!(s.nrows(), nb);
        s
    }

    /// `f*_b = f_b − K_bi K_ii⁻¹ f_i` for a full local vector `f`.
    pub fn condense(&self, f: &DVector<f64>) -> DVector<f64> {
        let f_b = DVector::from_iterator(self.boundary.len(), self.boundary.iter().map(|&i| f[i]));
        match &self.k_ii {
            Some(fac) => {
                let f_i = DVector::from_iterator(self.internal.len(), self.internal.iter().map(|&i| f[i]));
                f_b - self.k_bi.mul_vec(&fac.solve(&f_i))
            }
            None => f_b,
        }
    }

    /// `K_bi K_ii⁻¹ f_i` for a full local vector `f`.
    pub fn interior_reaction(&self, f: &DVector<f64>) -> DVector<f64> {
        match &self.k_ii {
            Some(fac) => {
                let f_i = DVector::from_iterator(self.internal.len(), self.internal.iter().map(|&i| f[i]));
                self.k_bi.mul_vec(&fac.solve(&f_i))
            }
            None => DVector::zeros(self.boundary.len()),
        }
    }

    /// Full local field from boundary values: `u_i = K_ii⁻¹ (f_i − K_ib u_b)`.
    pub fn extend(&self, f: &DVector<f64>, u_b: &DVector<f64>) -> DVector<f64> {
        let mut u = DVector::zeros(self.boundary.len() + self.internal.len());
        for (k, &i) in self.boundary.iter().enumerate() {
            u[i] = u_b[k];
        }
        if let Some(fac) = &self.k_ii {
            let f_i = DVector::from_iterator(self.internal.len(), self.internal.iter().map(|&i| f[i]));
            let rhs = f_i - self.k_bi.tr_mul_vec(u_b);
            let u_i = fac.solve(&rhs);
            for (k, &i) in self.internal.iter().enumerate() {
                u[i] = u_i[k];
            }
        }
        u
    }
}

pub fn schur_complement(k: &CsrMatrix, boundary: &[usize]) -> Result<DMatrix<f64>> {
    Ok(StaticCondensation::new(k, boundary)?.schur())
}

pub fn condense_force(k: &CsrMatrix, f: &DVector<f64>, boundary: &[usize]) -> Result<DVector<f64>> {
    Ok(StaticCondensation::new(k, boundary)?.condense(f))
}
