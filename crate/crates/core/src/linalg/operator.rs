use nalgebra::{DMatrix, DVector};

/// A square linear map applied matrix-free.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Dense image of the identity; meant for diagnostics on small problems.
    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            a.set_column(j, &self.apply(&e));
        }
        a
    }
}

/// An oblique or orthogonal projector, applied with its transpose.
pub trait Projection: Sync {
    fn project(&self, x: &DVector<f64>) -> DVector<f64>;
    fn project_transpose(&self, x: &DVector<f64>) -> DVector<f64>;
}

#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }
}

impl Projection for Identity {
    fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }
    fn project_transpose(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self * x
    }
}

/// Wraps a closure as an operator.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&DVector<f64>) -> DVector<f64> + Sync> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&DVector<f64>) -> DVector<f64> + Sync> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.f)(x)
    }
}
