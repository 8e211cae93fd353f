//! Geometric rigid body modes of a subdomain, filtered against its stiffness.

use nalgebra::DMatrix;

use crate::fe::element::Physics;
use crate::linalg::{orthonormalize, CsrMatrix};
use crate::mesh::LocalDof;

/// Kept modes satisfy `‖K r‖ ≤ MODE_TOLERANCE·‖K‖·‖r‖`.
pub const MODE_TOLERANCE: f64 = 1e-8;

/// Translations and infinitesimal rotations (or the constant) on the given dofs.
pub fn geometric_modes(physics: Physics, dim: usize, dofs: &[LocalDof], coords: &[[f64; 3]]) -> DMatrix<f64> {
    let n = dofs.len();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let mut center = [0.0; 3];
    let mut count = 0.0;
    for d in dofs.iter().filter(|d| d.component == 0) {
        for k in 0..3 {
            center[k] += coords[d.node][k];
        }
        count += 1.0;
    }
    if count > 0.0 {
        for c in &mut center {
            *c /= count;
        }
    }
    let x = |d: &LocalDof, k: usize| coords[d.node][k] - center[k];
    let mut cols: Vec<Vec<f64>> = Vec::new();
    match physics {
        Physics::Scalar => cols.push(vec![1.0; n]),
        Physics::Elasticity => {
            for t in 0..dim {
                cols.push(dofs.iter().map(|d| if d.component == t { 1.0 } else { 0.0 }).collect());
            }
            let planes: &[(usize, usize)] = if dim == 2 { &[(0, 1)] } else { &[(0, 1), (1, 2), (0, 2)] };
            for &(i, j) in planes {
                cols.push(
                    dofs.iter()
                        .map(|d| {
                            if d.component == i {
                                -x(d, j)
                            } else if d.component == j {
                                x(d, i)
                            } else {
                                0.0
                            }
                        })
                        .collect(),
                );
            }
        }
    }
    DMatrix::from_fn(n, cols.len(), |r, c| cols[c][r])
}

/// Orthonormal basis of the geometric modes lying in `null(K)`.
///
/// Candidates are orthonormalized, then combinations whose stiffness response
/// is below tolerance are kept (singular vectors of `K·Q`), so a clamp that
/// removes only part of a mode's span is handled exactly.
pub fn rigid_body_modes(k: &CsrMatrix, candidates: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    if candidates.ncols() == 0 || n == 0 {
        return DMatrix::zeros(n, 0);
    }
    let q = orthonormalize(candidates, 1e-10);
    if q.ncols() == 0 {
        return q;
    }
    let mut kq = DMatrix::zeros(n, q.ncols());
    for c in 0..q.ncols() {
        kq.set_column(c, &k.mul_vec(&q.column(c).into_owned()));
    }
    let threshold = MODE_TOLERANCE * k.norm_inf();
    // pad to at least as many rows as columns so the thin SVD exposes every right singular vector
    let m = q.ncols();
    let kq = if kq.nrows() < m { kq.resize_vertically(m, 0.0) } else { kq };
    let svd = kq.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let kept: Vec<_> = (0..m)
        .filter(|&c| svd.singular_values[c] <= threshold)
        .map(|c| &q * v_t.row(c).transpose())
        .collect();
    if kept.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    orthonormalize(&DMatrix::from_columns(&kept), 1e-10)
}
