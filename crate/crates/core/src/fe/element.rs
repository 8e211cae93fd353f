//! Isoparametric Q1 element matrices (4-node quad, 8-node hex) and the 2-node bar.

use nalgebra::{DMatrix, SMatrix};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Physics {
    /// Scalar diffusion, one dof per node.
    Scalar,
    /// Linear elasticity; plane strain in 2D.
    Elasticity,
}

impl Physics {
    pub fn dofs_per_node(self, dimension: usize) -> usize {
        match self {
            Physics::Scalar => 1,
            Physics::Elasticity => dimension,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "scalar" => Ok(Physics::Scalar),
            "elasticity" => Ok(Physics::Elasticity),
            _ => Err(Error::UnknownStrategy {
                kind: "physics",
                name: name.into(),
                available: "scalar, elasticity".into(),
            }),
        }
    }
}

/// Coefficients of one element: conductivity or Young's modulus, plus Poisson ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub modulus: f64,
    pub poisson: f64,
}

const GAUSS: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

/// Reference corner signs, counterclockwise, bottom face first in 3D.
const CORNERS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

/// Shape function gradients in reference coordinates at `xi`, one row per node.
fn reference_gradients(dim: usize, xi: [f64; 3]) -> DMatrix<f64> {
    let n = 1 << dim;
    let mut g = DMatrix::zeros(n, dim);
    for a in 0..n {
        let c = CORNERS[a];
        let f: Vec<f64> = (0..dim).map(|k| 1.0 + c[k] * xi[k]).collect();
        for k in 0..dim {
            let mut v = c[k];
            for (m, fm) in f.iter().enumerate() {
                if m != k {
                    v *= fm;
                }
            }
            g[(a, k)] = v / n as f64;
        }
    }
    g
}

fn gauss_points(dim: usize) -> Vec<[f64; 3]> {
    let mut pts = Vec::new();
    for &z in if dim == 3 { &GAUSS[..] } else { &[0.0][..] } {
        for &y in &GAUSS {
            for &x in &GAUSS {
                pts.push([x, y, z]);
            }
        }
    }
    pts
}

/// Constitutive matrix in Voigt notation (plane strain in 2D).
fn elasticity_matrix(dim: usize, c: Coefficients) -> DMatrix<f64> {
    let (e, nu) = (c.modulus, c.poisson);
    let lam = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let nv = if dim == 2 { 3 } else { 6 };
    let mut d = DMatrix::zeros(nv, nv);
    for i in 0..dim {
        for j in 0..dim {
            d[(i, j)] = lam;
        }
        d[(i, i)] += 2.0 * mu;
    }
    for i in dim..nv {
        d[(i, i)] = mu;
    }
    d
}

/// Shear strain pairs in Voigt order.
fn shear_pairs(dim: usize) -> &'static [(usize, usize)] {
    if dim == 2 {
        &[(0, 1)]
    } else {
        &[(0, 1), (1, 2), (0, 2)]
    }
}

/// Element stiffness for a Q1 element with nodes in reference order.
///
/// Dofs are ordered node-major, then by component.
pub fn element_stiffness(
    physics: Physics,
    dim: usize,
    coords: &[[f64; 3]],
    coefficients: Coefficients,
    element: usize,
) -> Result<DMatrix<f64>> {
    let n = 1 << dim;
    if coords.len() != n || !(2..=3).contains(&dim) {
        return Err(Error::Dimension(format!("{}-node element in {dim}D", coords.len())));
    }
    let dpn = physics.dofs_per_node(dim);
    let mut k = DMatrix::zeros(n * dpn, n * dpn);
    let x = DMatrix::from_fn(n, dim, |a, j| coords[a][j]);
    let d = match physics {
        Physics::Elasticity => Some(elasticity_matrix(dim, coefficients)),
        Physics::Scalar => None,
    };
    for (point, xi) in gauss_points(dim).into_iter().enumerate() {
        let gref = reference_gradients(dim, xi);
        let jac = gref.transpose() * &x;
        let det = jac.determinant();
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::DegenerateElement { element, point, det });
        }
        let jinv = jac.try_inverse().ok_or(Error::DegenerateElement { element, point, det })?;
        // physical gradients, one row per node
        let grad = gref * jinv.transpose();
        match &d {
            None => k += &grad * grad.transpose() * (coefficients.modulus * det),
            Some(d) => {
                let nv = d.nrows();
                let mut b = DMatrix::zeros(nv, n * dpn);
                for a in 0..n {
                    for i in 0..dim {
                        b[(i, a * dpn + i)] = grad[(a, i)];
                    }
                    for (s, &(i, j)) in shear_pairs(dim).iter().enumerate() {
                        b[(dim + s, a * dpn + i)] = grad[(a, j)];
                        b[(dim + s, a * dpn + j)] = grad[(a, i)];
                    }
                }
                k += b.transpose() * d * &b * det;
            }
        }
    }
    Ok((&k + k.transpose()) * 0.5)
}

/// Two-node bar (or 1D diffusion) element `k·[[1, −1], [−1, 1]]`.
pub fn bar_stiffness(k: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[k, -k, -k, k])
}

/// Consistent nodal forces of a uniform traction over a Q1 face.
///
/// `face` holds the corner coordinates of an edge (2 nodes, 2D) or a
/// quadrilateral (4 nodes, 3D) in cyclic order. Returns one weight per corner
/// summing to the face measure.
pub fn face_load_weights(face: &[[f64; 3]]) -> Result<Vec<f64>> {
    match face.len() {
        2 => {
            let len = (0..3).map(|k| (face[1][k] - face[0][k]).powi(2)).sum::<f64>().sqrt();
            Ok(vec![0.5 * len; 2])
        }
        4 => {
            let mut w = vec![0.0; 4];
            let sgn = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
            for &eta in &GAUSS {
                for &xi in &GAUSS {
                    let mut dx = SMatrix::<f64, 3, 2>::zeros();
                    let mut shape = [0.0; 4];
                    for a in 0..4 {
                        let [sa, ta] = sgn[a];
                        shape[a] = 0.25 * (1.0 + sa * xi) * (1.0 + ta * eta);
                        for k in 0..3 {
                            dx[(k, 0)] += 0.25 * sa * (1.0 + ta * eta) * face[a][k];
                            dx[(k, 1)] += 0.25 * ta * (1.0 + sa * xi) * face[a][k];
                        }
                    }
                    let area = dx.column(0).cross(&dx.column(1)).norm();
                    for a in 0..4 {
                        w[a] += shape[a] * area;
                    }
                }
            }
            Ok(w)
        }
        n => Err(Error::Dimension(format!("face with {n} corners"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn unit_square() -> Vec<[f64; 3]> {
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]]
    }

    fn unit_cube() -> Vec<[f64; 3]> {
        CORNERS.iter().map(|c| [(c[0] + 1.0) / 2.0, (c[1] + 1.0) / 2.0, (c[2] + 1.0) / 2.0]).collect()
    }

    const UNIT: Coefficients = Coefficients { modulus: 1.0, poisson: 0.3 };

    #[test]
    fn scalar_square_rows_sum_to_zero() {
        let k = element_stiffness(Physics::Scalar, 2, &unit_square(), UNIT, 0).unwrap();
        for i in 0..4 {
            assert!(k.row(i).sum().abs() < 1e-14);
        }
        // known Q1 laplacian on the unit square
        assert!((k[(0, 0)] - 2.0 / 3.0).abs() < 1e-14);
        assert!((k[(0, 2)] + 1.0 / 3.0).abs() < 1e-14);
        assert!((k[(0, 1)] + 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn elasticity_annihilates_rigid_modes() {
        for (dim, coords) in [(2, unit_square()), (3, unit_cube())] {
            let k = element_stiffness(Physics::Elasticity, dim, &coords, UNIT, 0).unwrap();
            let n = coords.len();
            let mut modes = Vec::new();
            for t in 0..dim {
                modes.push(DVector::from_fn(n * dim, |i, _| if i % dim == t { 1.0 } else { 0.0 }));
            }
            for &(i, j) in shear_pairs(dim) {
                modes.push(DVector::from_fn(n * dim, |r, _| {
                    let (a, c) = (r / dim, r % dim);
                    if c == i {
                        -coords[a][j]
                    } else if c == j {
                        coords[a][i]
                    } else {
                        0.0
                    }
                }));
            }
            for m in modes {
                assert!((&k * m).amax() < 1e-12);
            }
            assert!((&k - k.transpose()).amax() == 0.0);
            assert_eq!(k.symmetric_eigen().eigenvalues.iter().filter(|&&e| e > 1e-10).count(), n * dim - modes_count(dim));
        }
    }

    fn modes_count(dim: usize) -> usize {
        if dim == 2 { 3 } else { 6 }
    }

    #[test]
    fn inverted_element_is_rejected() {
        let mut c = unit_square();
        c.swap(1, 3);
        let err = element_stiffness(Physics::Scalar, 2, &c, UNIT, 7).unwrap_err();
        assert!(matches!(err, Error::DegenerateElement { element: 7, .. }));
    }

    #[test]
    fn sheared_square_keeps_constant_mode() {
        let t = 60f64.to_radians().tan();
        let c: Vec<_> = unit_square().into_iter().map(|p| [p[0] + p[1] * t, p[1], 0.0]).collect();
        let k = element_stiffness(Physics::Scalar, 2, &c, UNIT, 0).unwrap();
        assert!((&k * DVector::from_element(4, 1.0)).amax() < 1e-13);
    }

    #[test]
    fn bar_matches_single_dof_reduction() {
        assert_eq!(bar_stiffness(3.0), DMatrix::from_row_slice(2, 2, &[3.0, -3.0, -3.0, 3.0]));
    }

    #[test]
    fn face_weights_sum_to_measure() {
        let w = face_load_weights(&[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).unwrap();
        assert_eq!(w, vec![1.0, 1.0]);
        let q = [[0.0, 0.0, 1.0], [2.0, 0.0, 1.0], [2.0, 3.0, 1.0], [0.0, 3.0, 1.0]];
        let w = face_load_weights(&q).unwrap();
        for v in w {
            assert!((v - 1.5).abs() < 1e-14);
        }
    }
}
