//! Structured tensor-product meshes of Q1 quadrilaterals and hexahedra.

use crate::error::{Error, Result};

/// Geometry and decomposition of a structured box mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dimension: usize,
    pub elements_per_axis: Vec<usize>,
    pub subdomains_per_axis: Vec<usize>,
    pub element_size: Vec<f64>,
    /// Shear angle in degrees; 0 keeps the box straight.
    pub slant_angle: f64,
}

impl GridSpec {
    /// Unit elements, no slant.
    pub fn new(elements_per_axis: &[usize], subdomains_per_axis: &[usize]) -> Self {
        let dimension = elements_per_axis.len();
        Self {
            dimension,
            elements_per_axis: elements_per_axis.to_vec(),
            subdomains_per_axis: subdomains_per_axis.to_vec(),
            element_size: vec![1.0; dimension],
            slant_angle: 0.0,
        }
    }

    /// `subdomains` blocks per axis, each `per_subdomain` elements wide.
    pub fn blocks(dimension: usize, subdomains: usize, per_subdomain: usize) -> Self {
        Self::new(&vec![subdomains * per_subdomain; dimension], &vec![subdomains; dimension])
    }

    pub fn with_slant(mut self, degrees: f64) -> Self {
        self.slant_angle = degrees;
        self
    }

    pub fn with_element_size(mut self, size: &[f64]) -> Self {
        self.element_size = size.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension != 2 && self.dimension != 3 {
            return Err(Error::config(format!("dimension must be 2 or 3, got {}", self.dimension)));
        }
        let d = self.dimension;
        if self.elements_per_axis.len() != d
            || self.subdomains_per_axis.len() != d
            || self.element_size.len() != d
        {
            return Err(Error::config(format!(
                "grid vectors must all have {d} entries (elements {:?}, subdomains {:?}, size {:?})",
                self.elements_per_axis, self.subdomains_per_axis, self.element_size
            )));
        }
        for axis in 0..d {
            let (ne, ns) = (self.elements_per_axis[axis], self.subdomains_per_axis[axis]);
            if ne == 0 || ns == 0 {
                return Err(Error::config(format!("axis {axis}: counts must be positive")));
            }
            if ne % ns != 0 {
                return Err(Error::config(format!(
                    "axis {axis}: {ne} elements not divisible into {ns} subdomains"
                )));
            }
            let h = self.element_size[axis];
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::config(format!("axis {axis}: element size {h} must be positive")));
            }
        }
        if !(self.slant_angle > -90.0 && self.slant_angle < 90.0) {
            return Err(Error::config(format!(
                "slant angle {} must lie in (-90, 90)",
                self.slant_angle
            )));
        }
        Ok(())
    }

    pub fn elements_per_subdomain(&self, axis: usize) -> usize {
        self.elements_per_axis[axis] / self.subdomains_per_axis[axis]
    }

    pub fn subdomain_count(&self) -> usize {
        self.subdomains_per_axis.iter().product()
    }
}

/// Nodes and Q1 connectivity of a structured mesh.
///
/// Nodes are numbered lexicographically with the x index running fastest.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub dimension: usize,
    pub nodes_per_axis: [usize; 3],
    pub coords: Vec<[f64; 3]>,
    /// 4 (quad) or 8 (hex) node ids, counterclockwise / right-handed.
    pub elements: Vec<Vec<usize>>,
    /// Grid index of each element's lower corner.
    pub element_index: Vec<[usize; 3]>,
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn node_id(&self, index: [usize; 3]) -> usize {
        let [nx, ny, _] = self.nodes_per_axis;
        index[0] + nx * (index[1] + ny * index[2])
    }

    pub fn node_index(&self, id: usize) -> [usize; 3] {
        let [nx, ny, _] = self.nodes_per_axis;
        [id % nx, (id / nx) % ny, id / (nx * ny)]
    }

    /// Nodes whose grid index along `axis` equals `layer`.
    pub fn nodes_on_layer(&self, axis: usize, layer: usize) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&n| self.node_index(n)[axis] == layer)
            .collect()
    }
}

pub fn build_structured_mesh(spec: &GridSpec) -> Result<Mesh> {
    spec.validate()?;
    let d = spec.dimension;
    let mut ne = [1usize; 3];
    let mut nn = [1usize; 3];
    let mut h = [0.0f64; 3];
    for axis in 0..d {
        ne[axis] = spec.elements_per_axis[axis];
        nn[axis] = ne[axis] + 1;
        h[axis] = spec.element_size[axis];
    }
    let shear = spec.slant_angle.to_radians().tan();
    // 2D shears x along y, 3D shears x along z.
    let shear_axis = d - 1;

    let mut coords = Vec::with_capacity(nn.iter().product());
    for k in 0..nn[2] {
        for j in 0..nn[1] {
            for i in 0..nn[0] {
                let idx = [i, j, k];
                let mut x = [0.0; 3];
                for axis in 0..d {
                    x[axis] = idx[axis] as f64 * h[axis];
                }
                if spec.slant_angle != 0.0 {
                    x[0] += x[shear_axis] * shear;
                }
                coords.push(x);
            }
        }
    }

    let id = |i: usize, j: usize, k: usize| i + nn[0] * (j + nn[1] * k);
    let mut elements = Vec::with_capacity(ne.iter().product());
    let mut element_index = Vec::with_capacity(elements.capacity());
    for k in 0..ne[2] {
        for j in 0..ne[1] {
            for i in 0..ne[0] {
                let quad = [id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k)];
                let conn = if d == 2 {
                    quad.to_vec()
                } else {
                    let mut hex = quad.to_vec();
                    hex.extend([id(i, j, k + 1), id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1), id(i, j + 1, k + 1)]);
                    hex
                };
                elements.push(conn);
                element_index.push([i, j, k]);
            }
        }
    }

    Ok(Mesh {
        dimension: d,
        nodes_per_axis: nn,
        coords,
        elements,
        element_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_of_two_quads() {
        let mesh = build_structured_mesh(&GridSpec::new(&[2, 1], &[1, 1])).unwrap();
        assert_eq!(mesh.element_count(), 2);
        assert_eq!(mesh.node_count(), 6);
    }

    #[test]
    fn tensor_grid_coordinates() {
        let mesh = build_structured_mesh(&GridSpec::new(&[4, 4], &[2, 2])).unwrap();
        assert_eq!(mesh.node_count(), 25);
        for j in 0..5 {
            for i in 0..5 {
                let c = mesh.coords[mesh.node_id([i, j, 0])];
                assert_eq!(c, [i as f64, j as f64, 0.0]);
            }
        }
    }

    #[test]
    fn slant_shears_along_last_axis() {
        let mesh = build_structured_mesh(&GridSpec::new(&[4, 4], &[2, 2]).with_slant(45.0)).unwrap();
        for j in 0..5 {
            for i in 0..5 {
                let c = mesh.coords[mesh.node_id([i, j, 0])];
                assert!((c[0] - (i + j) as f64).abs() < 1e-12);
                assert_eq!(c[1], j as f64);
            }
        }
        let mesh3 = build_structured_mesh(&GridSpec::new(&[1, 1, 2], &[1, 1, 1]).with_slant(45.0)).unwrap();
        let top = mesh3.coords[mesh3.node_id([0, 1, 2])];
        assert!((top[0] - 2.0).abs() < 1e-12 && top[1] == 1.0 && top[2] == 2.0);
    }

    #[test]
    fn hex_connectivity_is_right_handed() {
        let mesh = build_structured_mesh(&GridSpec::new(&[1, 1, 1], &[1, 1, 1])).unwrap();
        let c: Vec<_> = mesh.elements[0].iter().map(|&n| mesh.coords[n]).collect();
        assert_eq!(c[0], [0.0, 0.0, 0.0]);
        assert_eq!(c[1], [1.0, 0.0, 0.0]);
        assert_eq!(c[2], [1.0, 1.0, 0.0]);
        assert_eq!(c[3], [0.0, 1.0, 0.0]);
        assert_eq!(c[4], [0.0, 0.0, 1.0]);
        assert_eq!(c[6], [1.0, 1.0, 1.0]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(
            build_structured_mesh(&GridSpec::new(&[5, 4], &[2, 2])),
            Err(Error::Config(_))
        ));
        assert!(GridSpec::new(&[4, 4], &[2, 2]).with_slant(90.0).validate().is_err());
        assert!(GridSpec::new(&[4, 4], &[2, 2]).with_slant(-90.0).validate().is_err());
        assert!(GridSpec::new(&[4], &[1]).validate().is_err());
        assert!(GridSpec::new(&[4, 0], &[1, 1]).validate().is_err());
    }
}
