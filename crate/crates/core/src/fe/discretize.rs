//! Global element data of a problem before it is cut into subdomains.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fe::element::{bar_stiffness, element_stiffness, face_load_weights, Physics};
use crate::fe::material::MaterialField;
use crate::mesh::{GridSpec, Mesh};

/// Element matrices, constraints, and nodal loads on a node set.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub physics: Physics,
    pub dimension: usize,
    pub coords: Vec<[f64; 3]>,
    pub elements: Vec<Vec<usize>>,
    /// Dofs ordered node-major, then component.
    pub element_matrices: Vec<DMatrix<f64>>,
    /// Clamped `(node, component)` pairs.
    pub constrained: Vec<(usize, usize)>,
    /// Applied loads indexed by `node * dofs_per_node + component`.
    pub nodal_loads: Vec<f64>,
}

impl Discretization {
    pub fn dofs_per_node(&self) -> usize {
        self.physics.dofs_per_node(self.dimension)
    }

    pub fn node_count(&self) -> usize {
        self.coords.len()
    }
}

/// Clamp and pressure faces of a structured problem.
///
/// The face at the lowest coordinate along `axis` is clamped and a uniform
/// pressure of magnitude `pressure` acts on the opposite face: a traction in
/// the −`axis` direction for elasticity, an inward flux for scalar problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadSpec {
    pub axis: usize,
    pub pressure: f64,
}

pub fn structured_discretization(
    spec: &GridSpec,
    mesh: &Mesh,
    physics: Physics,
    material: &MaterialField,
    load: &LoadSpec,
) -> Result<Discretization> {
    material.validate()?;
    let dim = spec.dimension;
    if load.axis >= dim {
        return Err(Error::config(format!("load axis {} in a {dim}D problem", load.axis)));
    }
    let dpn = physics.dofs_per_node(dim);
    let per: Vec<usize> = (0..dim).map(|a| spec.elements_per_subdomain(a)).collect();

    let mut element_matrices = Vec::with_capacity(mesh.element_count());
    for (e, nodes) in mesh.elements.iter().enumerate() {
        let mut block = [0usize; 3];
        for a in 0..dim {
            block[a] = mesh.element_index[e][a] / per[a];
        }
        let coords: Vec<[f64; 3]> = nodes.iter().map(|&n| mesh.coords[n]).collect();
        element_matrices.push(element_stiffness(physics, dim, &coords, material.coefficients(block), e)?);
    }

    let constrained = mesh
        .nodes_on_layer(load.axis, 0)
        .into_iter()
        .flat_map(|n| (0..dpn).map(move |c| (n, c)))
        .collect();

    let mut nodal_loads = vec![0.0; mesh.node_count() * dpn];
    let top = mesh.nodes_per_axis[load.axis] - 1;
    let (component, sign) = match physics {
        Physics::Elasticity => (load.axis, -1.0),
        Physics::Scalar => (0, 1.0),
    };
    for (e, nodes) in mesh.elements.iter().enumerate() {
        if mesh.element_index[e][load.axis] + 1 != top {
            continue;
        }
        // element face on the loaded side, kept in cyclic order
        let face: Vec<usize> = nodes
            .iter()
            .copied()
            .filter(|&n| mesh.node_index(n)[load.axis] == top)
            .collect();
        let face = cyclic(face, mesh, load.axis);
        let corners: Vec<[f64; 3]> = face.iter().map(|&n| mesh.coords[n]).collect();
        let weights = face_load_weights(&corners)?;
        for (&n, w) in face.iter().zip(weights) {
            nodal_loads[n * dpn + component] += sign * load.pressure * w;
        }
    }

    Ok(Discretization {
        physics,
        dimension: dim,
        coords: mesh.coords.clone(),
        elements: mesh.elements.clone(),
        element_matrices,
        constrained,
        nodal_loads,
    })
}

/// Orders the 4 corners of a face perpendicular to `axis` cyclically.
fn cyclic(mut face: Vec<usize>, mesh: &Mesh, axis: usize) -> Vec<usize> {
    if face.len() != 4 {
        return face;
    }
    let plane: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
    let key = |n: usize| {
        let idx = mesh.node_index(n);
        (idx[plane[0]], idx[plane[1]])
    };
    face.sort_by_key(|&n| key(n));
    // sorted as (lo,lo), (lo,hi), (hi,lo), (hi,hi)
    vec![face[0], face[2], face[3], face[1]]
}

/// Two bar elements in series: node 0 clamped, stiffnesses `k1`, `k2`,
/// nodal loads on nodes 0..3. Elements are (0,1) and (1,2).
pub fn two_spring_chain(k1: f64, k2: f64, loads: [f64; 3]) -> Discretization {
    Discretization {
        physics: Physics::Scalar,
        dimension: 1,
        coords: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
        elements: vec![vec![0, 1], vec![1, 2]],
        element_matrices: vec![bar_stiffness(k1), bar_stiffness(k2)],
        constrained: vec![(0, 0)],
        nodal_loads: loads.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_structured_mesh;

    #[test]
    fn pressure_resultant_equals_face_measure() {
        for (spec, physics) in [
            (GridSpec::new(&[4, 3], &[2, 1]).with_slant(60.0), Physics::Scalar),
            (GridSpec::new(&[2, 2, 2], &[1, 1, 1]), Physics::Elasticity),
        ] {
            let mesh = build_structured_mesh(&spec).unwrap();
            let axis = spec.dimension - 1;
            let disc = structured_discretization(
                &spec,
                &mesh,
                physics,
                &MaterialField::uniform(1.0, 0.3),
                &LoadSpec { axis, pressure: 2.0 },
            )
            .unwrap();
            let total: f64 = disc.nodal_loads.iter().sum();
            let width: f64 = (0..spec.dimension).filter(|&a| a != axis).map(|a| spec.elements_per_axis[a] as f64).product();
            let expected = if physics == Physics::Scalar { 2.0 * width } else { -2.0 * width };
            assert!((total - expected).abs() < 1e-12, "{total} vs {expected}");
            let dpn = disc.dofs_per_node();
            for &(n, c) in &disc.constrained {
                assert_eq!(disc.nodal_loads[n * dpn + c], 0.0);
            }
        }
    }
}
