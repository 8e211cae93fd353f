//! A problem cut into subdomains, with every per-subdomain factorization prepared.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fe::{geometric_modes, rigid_body_modes, structured_discretization, Discretization, LoadSpec, MaterialField, Physics};
use crate::linalg::{factorize_semidefinite, CsrMatrix, Factorization, GeneralizedInverse, StaticCondensation};
use crate::mesh::{
    build_jump_operator, build_structured_mesh, build_trace_maps, partition_blocks, DofLayout, GridSpec, JumpMap, Partition, Redundancy, TraceMap,
};

/// How an applied load on a shared node is handed to the subdomains before any splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RawAssignment {
    /// Entire load to the lowest-index owning subdomain.
    #[default]
    Owner,
    /// Equal shares among owners.
    Multiplicity,
}

impl RawAssignment {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "owner" => Ok(Self::Owner),
            "multiplicity" => Ok(Self::Multiplicity),
            _ => Err(Error::UnknownStrategy {
                kind: "raw assignment",
                name: name.into(),
                available: "owner, multiplicity".into(),
            }),
        }
    }
}

/// One subdomain's equilibrium `K u = f + g` and its prepared operators.
#[derive(Debug, Clone)]
pub struct SubdomainSystem {
    pub k: CsrMatrix,
    /// Raw load under the chosen assignment.
    pub f: DVector<f64>,
    /// Local indices of interface dofs.
    pub boundary: Vec<usize>,
    pub internal: Vec<usize>,
    /// Orthonormal rigid body modes (no columns when grounded).
    pub r: DMatrix<f64>,
    /// Clamped `(node, component)` pairs on this subdomain's nodes.
    pub constrained: Vec<(usize, usize)>,
    pub kplus: GeneralizedInverse,
    pub condensation: StaticCondensation,
    /// Dense Schur complement on `boundary`.
    pub schur: DMatrix<f64>,
    /// `diag(K)` over all local dofs.
    pub diagonal: DVector<f64>,
}

impl SubdomainSystem {
    pub fn is_floating(&self) -> bool {
        self.r.ncols() > 0
    }

    pub fn mode_count(&self) -> usize {
        self.r.ncols()
    }

    /// `diag(K_bb)`
    pub fn kbb_diagonal(&self) -> DVector<f64> {
        DVector::from_iterator(self.boundary.len(), self.boundary.iter().map(|&i| self.diagonal[i]))
    }

    /// Rows of `R` at the boundary dofs.
    pub fn r_boundary(&self) -> DMatrix<f64> {
        self.r.select_rows(&self.boundary)
    }

    pub fn restrict_boundary(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.boundary.len(), self.boundary.iter().map(|&i| v[i]))
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub physics: Physics,
    pub dimension: usize,
    pub partition: Partition,
    pub layout: DofLayout,
    pub trace: TraceMap,
    pub jump: JumpMap,
    pub subdomains: Vec<SubdomainSystem>,
    /// Directly assembled global stiffness on the free dofs.
    pub k_global: CsrMatrix,
    pub f_global: DVector<f64>,
}

impl Decomposition {
    pub fn new(disc: &Discretization, partition: Partition, redundancy: Redundancy, assignment: RawAssignment) -> Result<Self> {
        let dpn = disc.dofs_per_node();
        if partition.node_count != disc.node_count() {
            return Err(Error::Dimension(format!(
                "partition has {} nodes, discretization {}",
                partition.node_count,
                disc.node_count()
            )));
        }
        let layout = DofLayout::new(disc.node_count(), dpn, disc.constrained.iter().copied());
        let trace = build_trace_maps(&partition, &layout)?;
        let jump = build_jump_operator(&partition, &trace, redundancy);

        let mut f_global = DVector::zeros(layout.free_count());
        for node in 0..disc.node_count() {
            for c in 0..dpn {
                let v = disc.nodal_loads[node * dpn + c];
                if v == 0.0 {
                    continue;
                }
                match layout.global(node, c) {
                    Some(g) => f_global[g] += v,
                    None => warn!("load {v} on clamped dof (node {node}, component {c}) dropped"),
                }
            }
        }

        let k_global = assemble(&layout, disc, 0..disc.elements.len(), |node, c| layout.global(node, c), layout.free_count());

        let subdomains = (0..partition.len())
            .into_par_iter()
            .map(|s| build_subdomain(disc, &partition, &layout, &trace, &f_global, assignment, s).map_err(|e| e.in_subdomain(s)))
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            physics: disc.physics,
            dimension: disc.dimension,
            partition,
            layout,
            trace,
            jump,
            subdomains,
            k_global,
            f_global,
        })
    }

    pub fn len(&self) -> usize {
        self.subdomains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subdomains.is_empty()
    }

    pub fn multiplier_count(&self) -> usize {
        self.jump.len()
    }

    /// Raw subdomain loads.
    pub fn raw_forces(&self) -> Vec<DVector<f64>> {
        self.subdomains.iter().map(|s| s.f.clone()).collect()
    }

    /// `‖K_g u_g − f_g‖ / ‖f_g‖`
    pub fn global_residual(&self, u_g: &DVector<f64>) -> f64 {
        let r = self.k_global.mul_vec(u_g) - &self.f_global;
        let nf = self.f_global.norm();
        if nf > 0.0 {
            r.norm() / nf
        } else {
            r.norm()
        }
    }

    /// Global field from subdomain copies, averaged with `diag(K)` weights.
    pub fn average(&self, locals: &[DVector<f64>]) -> DVector<f64> {
        let mut num = DVector::zeros(self.trace.global_count);
        let mut den = DVector::zeros(self.trace.global_count);
        for (s, u) in locals.iter().enumerate() {
            let sub = &self.subdomains[s];
            for (i, d) in self.trace.dofs[s].iter().enumerate() {
                num[d.global] += sub.diagonal[i] * u[i];
                den[d.global] += sub.diagonal[i];
            }
        }
        num.component_div(&den)
    }

    /// Solution of the assembled global system by sparse Cholesky, with two
    /// steps of iterative refinement against the sparse matrix.
    pub fn direct_solve(&self) -> Result<DVector<f64>> {
        let factor = Factorization::sparse(&self.k_global)?;
        let mut u = factor.solve(&self.f_global);
        for _ in 0..2 {
            let r = &self.f_global - self.k_global.mul_vec(&u);
            u += factor.solve(&r);
        }
        Ok(u)
    }
}

fn assemble(
    layout: &DofLayout,
    disc: &Discretization,
    elements: impl Iterator<Item = usize>,
    index: impl Fn(usize, usize) -> Option<usize>,
    n: usize,
) -> CsrMatrix {
    let dpn = layout.dofs_per_node;
    let mut triplets = Vec::new();
    for e in elements {
        let nodes = &disc.elements[e];
        let ke = &disc.element_matrices[e];
        let idx: Vec<Option<usize>> = nodes.iter().flat_map(|&node| (0..dpn).map(move |c| (node, c))).map(|(node, c)| index(node, c)).collect();
        for (a, ia) in idx.iter().enumerate() {
            let Some(ia) = ia else { continue };
            for (b, ib) in idx.iter().enumerate() {
                let Some(ib) = ib else { continue };
                triplets.push((*ia, *ib, ke[(a, b)]));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &triplets)
}

fn build_subdomain(
    disc: &Discretization,
    partition: &Partition,
    layout: &DofLayout,
    trace: &TraceMap,
    f_global: &DVector<f64>,
    assignment: RawAssignment,
    s: usize,
) -> Result<SubdomainSystem> {
    let part = &partition.subdomains[s];
    let dofs = &trace.dofs[s];
    let n = dofs.len();
    let mut local_of = std::collections::HashMap::with_capacity(n);
    for (i, d) in dofs.iter().enumerate() {
        local_of.insert((d.node, d.component), i);
    }
    let k = assemble(layout, disc, part.elements.iter().copied(), |node, c| local_of.get(&(node, c)).copied(), n);

    let mut f = DVector::zeros(n);
    for (i, d) in dofs.iter().enumerate() {
        let owners = &partition.owners[d.node];
        f[i] = match assignment {
            RawAssignment::Owner if owners[0] == s => f_global[d.global],
            RawAssignment::Owner => 0.0,
            RawAssignment::Multiplicity => f_global[d.global] / owners.len() as f64,
        };
    }

    let dpn = layout.dofs_per_node;
    let constrained = part
        .nodes
        .iter()
        .flat_map(|&node| (0..dpn).map(move |c| (node, c)))
        .filter(|&(node, c)| layout.global(node, c).is_none())
        .collect();

    let candidates = geometric_modes(disc.physics, disc.dimension.max(1), dofs, &disc.coords);
    let r = rigid_body_modes(&k, &candidates);
    let kplus = factorize_semidefinite(&k, &r)?;
    let boundary = trace.boundary(s);
    let internal = trace.internal(s);
    let condensation = StaticCondensation::new(&k, &boundary)?;
    let schur = condensation.schur();
    let diagonal = k.diagonal();
    Ok(SubdomainSystem {
        k,
        f,
        boundary,
        internal,
        r,
        constrained,
        kplus,
        condensation,
        schur,
        diagonal,
    })
}

/// A point load added on top of the face pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalLoad {
    pub node: usize,
    pub component: usize,
    pub value: f64,
}

/// Everything needed to build a structured block-partitioned problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub grid: GridSpec,
    pub physics: Physics,
    pub material: MaterialField,
    pub load: LoadSpec,
    pub nodal: Vec<NodalLoad>,
    pub redundancy: Redundancy,
    pub assignment: RawAssignment,
}

impl ProblemSpec {
    /// Uniform unit material, unit pressure on the face opposite the clamp.
    pub fn new(grid: GridSpec, physics: Physics) -> Self {
        let axis = grid.dimension - 1;
        Self {
            grid,
            physics,
            material: MaterialField::uniform(1.0, 0.3),
            load: LoadSpec { axis, pressure: 1.0 },
            nodal: Vec::new(),
            redundancy: Redundancy::NonRedundant,
            assignment: RawAssignment::Owner,
        }
    }

    pub fn with_material(mut self, material: MaterialField) -> Self {
        self.material = material;
        self
    }

    pub fn build(&self) -> Result<Decomposition> {
        let mesh = build_structured_mesh(&self.grid)?;
        let partition = partition_blocks(&mesh, &self.grid)?;
        let mut disc = structured_discretization(&self.grid, &mesh, self.physics, &self.material, &self.load)?;
        let dpn = disc.dofs_per_node();
        for load in &self.nodal {
            if load.node >= disc.node_count() || load.component >= dpn {
                return Err(Error::config(format!(
                    "nodal load on node {} component {} outside {} nodes with {dpn} components",
                    load.node,
                    load.component,
                    disc.node_count()
                )));
            }
            disc.nodal_loads[load.node * dpn + load.component] += load.value;
        }
        Decomposition::new(&disc, partition, self.redundancy, self.assignment)
    }
}

/// The two-spring chain cut at its middle node: Ω1 = element (0,1), Ω2 = element (1,2).
pub fn two_spring_decomposition(k1: f64, k2: f64, loads: [f64; 3]) -> Result<Decomposition> {
    let disc = crate::fe::two_spring_chain(k1, k2, loads);
    let partition = Partition::from_element_sets(3, &disc.elements, vec![vec![0], vec![1]])?;
    Decomposition::new(&disc, partition, Redundancy::NonRedundant, RawAssignment::Owner)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_spring_subdomains() {
        let dec = two_spring_decomposition(1.0, 1.0, [0.0, 0.0, 1.0]).unwrap();
        let (a, b) = (&dec.subdomains[0], &dec.subdomains[1]);
        assert_eq!(a.k.to_dense(), DMatrix::from_element(1, 1, 1.0));
        assert_eq!(a.f, DVector::from_element(1, 0.0));
        assert_eq!(a.r.ncols(), 0);
        assert_eq!(b.k.to_dense(), DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        assert_eq!(b.f, DVector::from_vec(vec![0.0, 1.0]));
        let inv = 1.0 / 2f64.sqrt();
        assert!((b.r.column(0).abs() - DVector::from_element(2, inv)).amax() < 1e-15);
        assert_eq!(b.boundary, vec![0]);
        let u = dec.direct_solve().unwrap();
        assert!((u - DVector::from_vec(vec![1.0, 2.0])).amax() < 1e-14);
    }
}
