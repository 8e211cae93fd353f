//! `P(Q) = I − QG (GᵀQG)⁻¹ Gᵀ` and its transpose.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::linalg::{LinearOperator, Projection};

pub struct CoarseProjector {
    g: DMatrix<f64>,
    qg: DMatrix<f64>,
    gqg: DMatrix<f64>,
    factor: Option<Cholesky<f64, Dyn>>,
}

impl CoarseProjector {
    pub fn new(g: &DMatrix<f64>, q: &dyn LinearOperator) -> Result<Self> {
        let m = g.ncols();
        let mut qg = DMatrix::zeros(g.nrows(), m);
        for c in 0..m {
            qg.set_column(c, &q.apply(&g.column(c).into_owned()));
        }
        let gqg = g.transpose() * &qg;
        let gqg = (&gqg + gqg.transpose()) * 0.5;
        let factor = if m == 0 {
            None
        } else {
            Some(
                Cholesky::new(gqg.clone())
                    .ok_or_else(|| Error::SingularCoarse("GᵀQG is not positive definite".into()))?,
            )
        };
        Ok(Self {
            g: g.clone(),
            qg,
            gqg,
            factor,
        })
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// `(GᵀQG)⁻¹ y` with one step of iterative refinement.
    pub fn coarse_solve(&self, y: &DVector<f64>) -> DVector<f64> {
        match &self.factor {
            None => DVector::zeros(0),
            Some(f) => {
                let mut x = f.solve(y);
                let r = y - &self.gqg * &x;
                x += f.solve(&r);
                x
            }
        }
    }

    /// `λ₀ = P λ₀₀ + QG (GᵀQG)⁻¹ e`
    pub fn admissible_start(&self, lambda00: &DVector<f64>, e: &DVector<f64>) -> DVector<f64> {
        if self.factor.is_none() {
            return lambda00.clone();
        }
        // equivalently λ₀₀ + QG (GᵀQG)⁻¹ (e − Gᵀλ₀₀), applied twice
        let mut lambda = lambda00.clone();
        for _ in 0..2 {
            let defect = e - self.g.transpose() * &lambda;
            lambda += &self.qg * self.coarse_solve(&defect);
        }
        lambda
    }

    /// `α = (GᵀQG)⁻¹ GᵀQ r`, refined once on the weighted residual `r − Gα`.
    pub fn alpha(&self, r: &DVector<f64>) -> DVector<f64> {
        if self.factor.is_none() {
            return DVector::zeros(0);
        }
        let mut alpha = self.coarse_solve(&(self.qg.transpose() * r));
        let rest = r - &self.g * &alpha;
        alpha += self.coarse_solve(&(self.qg.transpose() * rest));
        alpha
    }

    /// `max ‖Gᵀ P x‖ / (‖G‖₂ ‖x‖)` over the given probes.
    pub fn defect(&self, probes: &[DVector<f64>]) -> f64 {
        if self.g.ncols() == 0 {
            return 0.0;
        }
        let gn = self.g.singular_values().max();
        probes
            .iter()
            .map(|x| (self.g.transpose() * self.project(x)).norm() / (gn * x.norm()))
            .fold(0.0, f64::max)
    }
}

// With a badly conditioned Q the oblique projector has a large norm and a
// single pass leaves `GᵀPx` at ε‖P‖‖x‖. A second pass removes that remainder,
// just as reorthogonalization does for Gram–Schmidt.
impl Projection for CoarseProjector {
    fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        if self.factor.is_none() {
            return x.clone();
        }
        let mut y = x - &self.qg * self.coarse_solve(&(self.g.transpose() * x));
        y -= &self.qg * self.coarse_solve(&(self.g.transpose() * &y));
        y
    }

    fn project_transpose(&self, x: &DVector<f64>) -> DVector<f64> {
        if self.factor.is_none() {
            return x.clone();
        }
        let mut y = x - &self.g * self.coarse_solve(&(self.qg.transpose() * x));
        y -= &self.g * self.coarse_solve(&(self.qg.transpose() * &y));
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Identity;

    #[test]
    fn projector_is_idempotent_and_annihilates_g() {
        let g = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 2.0, -1.0, 0.5]);
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-3, 4.0, 2.0]));
        let p = CoarseProjector::new(&g, &q).unwrap();
        let x = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.7]);
        let px = p.project(&x);
        assert!((p.project(&px) - &px).norm() < 1e-12);
        assert!(p.defect(std::slice::from_ref(&x)) < 1e-14);
        // Pᵀ is the transpose of P
        let y = DVector::from_vec(vec![1.0, 2.0, -1.0, 0.0]);
        assert!((y.dot(&px) - p.project_transpose(&y).dot(&x)).abs() < 1e-12);
        let id = CoarseProjector::new(&DMatrix::zeros(4, 0), &Identity(4)).unwrap();
        assert_eq!(id.project(&x), x);
    }
}
