//! Factorizations, generalized inverses, condensation, and the interface Krylov engine.

mod condense;
mod geninv;
mod operator;
mod pcg;
mod pinv;
mod skyline;
mod sparse;

pub use condense::{condense_force, schur_complement, StaticCondensation};
pub use geninv::{factorize_semidefinite, factorize_semidefinite_dense, pivot_dofs, GeneralizedInverse, KERNEL_TOLERANCE};
pub use operator::{FnOperator, Identity, LinearOperator, Projection};
pub use pcg::{pcg, relative_residual, IterateView, KrylovReport, PcgOptions, Termination};
pub use pinv::{small_pinv, PINV_CUTOFF};
pub use skyline::{reverse_cuthill_mckee, Factorization, PIVOT_TOLERANCE};
pub use sparse::CsrMatrix;

use nalgebra::DMatrix;

/// Orthonormal basis of the column span, dropping columns that are dependent
/// to within `tol` relative to the largest column.
pub fn orthonormalize(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let scale = a.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
    for c in a.column_iter() {
        let mut v = c.into_owned();
        // two passes of Gram–Schmidt
        for _ in 0..2 {
            for q in &basis {
                let d = v.dot(q);
                v.axpy(-d, q, 1.0);
            }
        }
        let n = v.norm();
        if n > tol * scale && n > 0.0 {
            basis.push(v / n);
        }
    }
    if basis.is_empty() {
        DMatrix::zeros(a.nrows(), 0)
    } else {
        DMatrix::from_columns(&basis)
    }
}
