//! Boolean trace (L) and signed jump (B) operators of a partition.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::partition::Partition;

/// Numbering of the unconstrained global degrees of freedom.
///
/// Dofs are ordered by node, then by field component.
#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    pub dofs_per_node: usize,
    /// `global[node * dofs_per_node + component]`, `None` when constrained.
    global: Vec<Option<usize>>,
    free: usize,
}

impl DofLayout {
    pub fn new(node_count: usize, dofs_per_node: usize, constrained: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut fixed = vec![false; node_count * dofs_per_node];
        for (node, comp) in constrained {
            fixed[node * dofs_per_node + comp] = true;
        }
        let mut free = 0;
        let global = fixed
            .into_iter()
            .map(|f| {
                if f {
                    None
                } else {
                    free += 1;
                    Some(free - 1)
                }
            })
            .collect();
        Self {
            dofs_per_node,
            global,
            free,
        }
    }

    pub fn global(&self, node: usize, component: usize) -> Option<usize> {
        self.global[node * self.dofs_per_node + component]
    }

    pub fn free_count(&self) -> usize {
        self.free
    }

    pub fn node_count(&self) -> usize {
        self.global.len() / self.dofs_per_node
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalDof {
    pub node: usize,
    pub component: usize,
    pub global: usize,
}

/// Per-subdomain Boolean selection `u⁽ˢ⁾ = L⁽ˢ⁾ u_g`, stored as index arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMap {
    pub global_count: usize,
    pub dofs: Vec<Vec<LocalDof>>,
    multiplicity: Vec<usize>,
}

impl TraceMap {
    pub fn subdomain_count(&self) -> usize {
        self.dofs.len()
    }

    pub fn local_count(&self, s: usize) -> usize {
        self.dofs[s].len()
    }

    pub fn total_local_count(&self) -> usize {
        self.dofs.iter().map(Vec::len).sum()
    }

    pub fn global_indices(&self, s: usize) -> Vec<usize> {
        self.dofs[s].iter().map(|d| d.global).collect()
    }

    /// Number of subdomains holding a copy of global dof `g`.
    pub fn multiplicity(&self, g: usize) -> usize {
        self.multiplicity[g]
    }

    pub fn gather(&self, s: usize, global: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.dofs[s].len(), self.dofs[s].iter().map(|d| global[d.global]))
    }

    /// `out += L⁽ˢ⁾ᵀ local`
    pub fn scatter_add(&self, s: usize, local: &DVector<f64>, out: &mut DVector<f64>) {
        for (d, v) in self.dofs[s].iter().zip(local.iter()) {
            out[d.global] += v;
        }
    }

    /// `Lᵀ u` over all subdomains.
    pub fn assemble(&self, locals: &[DVector<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.global_count);
        for (s, u) in locals.iter().enumerate() {
            self.scatter_add(s, u, &mut out);
        }
        out
    }

    /// Local indices of dofs shared with another subdomain.
    pub fn boundary(&self, s: usize) -> Vec<usize> {
        (0..self.dofs[s].len())
            .filter(|&i| self.multiplicity[self.dofs[s][i].global] >= 2)
            .collect()
    }

    pub fn internal(&self, s: usize) -> Vec<usize> {
        (0..self.dofs[s].len())
            .filter(|&i| self.multiplicity[self.dofs[s][i].global] < 2)
            .collect()
    }

    /// Dense stacked L (rows = all subdomain dofs in subdomain order).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.total_local_count(), self.global_count);
        let mut row = 0;
        for dofs in &self.dofs {
            for d in dofs {
                l[(row, d.global)] = 1.0;
                row += 1;
            }
        }
        l
    }
}

pub fn build_trace_maps(partition: &Partition, layout: &DofLayout) -> Result<TraceMap> {
    if layout.node_count() != partition.node_count {
        return Err(Error::Dimension(format!(
            "dof layout covers {} nodes, partition {}",
            layout.node_count(),
            partition.node_count
        )));
    }
    let mut multiplicity = vec![0usize; layout.free_count()];
    let dofs: Vec<Vec<LocalDof>> = partition
        .subdomains
        .iter()
        .map(|part| {
            let mut v = Vec::with_capacity(part.nodes.len() * layout.dofs_per_node);
            for &node in &part.nodes {
                for component in 0..layout.dofs_per_node {
                    if let Some(global) = layout.global(node, component) {
                        multiplicity[global] += 1;
                        v.push(LocalDof { node, component, global });
                    }
                }
            }
            v
        })
        .collect();
    Ok(TraceMap {
        global_count: layout.free_count(),
        dofs,
        multiplicity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Redundancy {
    /// One multiplier per edge of a spanning tree of the owners of each dof.
    #[default]
    NonRedundant,
    /// One multiplier per pair of owners.
    FullyRedundant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Endpoint {
    pub subdomain: usize,
    pub local: usize,
}

/// One interface constraint `u⁽plus⁾ − u⁽minus⁾ = 0` on copies of a global dof.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Multiplier {
    pub global: usize,
    pub plus: Endpoint,
    pub minus: Endpoint,
}

/// Signed Boolean jump operator `B = [B⁽¹⁾ … B⁽ᴺ⁾]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpMap {
    pub mode: Redundancy,
    pub multipliers: Vec<Multiplier>,
    /// Contiguous multiplier ranges acting on the same global dof.
    pub groups: Vec<(usize, Range<usize>)>,
    /// Per subdomain: (multiplier, local dof, sign).
    entries: Vec<Vec<(usize, usize, f64)>>,
    local_counts: Vec<usize>,
}

impl JumpMap {
    pub fn len(&self) -> usize {
        self.multipliers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multipliers.is_empty()
    }

    pub fn subdomain_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self, s: usize) -> &[(usize, usize, f64)] {
        &self.entries[s]
    }

    /// `B⁽ˢ⁾ᵀ λ`
    pub fn transpose_apply(&self, s: usize, lambda: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.local_counts[s]);
        for &(m, l, sign) in &self.entries[s] {
            out[l] += sign * lambda[m];
        }
        out
    }

    /// `out += B⁽ˢ⁾ u`
    pub fn apply_add(&self, s: usize, u: &DVector<f64>, out: &mut DVector<f64>) {
        for &(m, l, sign) in &self.entries[s] {
            out[m] += sign * u[l];
        }
    }

    /// `Σ B⁽ˢ⁾ u⁽ˢ⁾`
    pub fn jump(&self, locals: &[DVector<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.len());
        for (s, u) in locals.iter().enumerate() {
            self.apply_add(s, u, &mut out);
        }
        out
    }

    /// Dense `B⁽ˢ⁾`.
    pub fn block_dense(&self, s: usize) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.len(), self.local_counts[s]);
        for &(m, l, sign) in &self.entries[s] {
            b[(m, l)] += sign;
        }
        b
    }

    /// Dense stacked `B`, columns in subdomain order.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let total: usize = self.local_counts.iter().sum();
        let mut b = DMatrix::zeros(self.len(), total);
        let mut offset = 0;
        for s in 0..self.entries.len() {
            for &(m, l, sign) in &self.entries[s] {
                b[(m, offset + l)] += sign;
            }
            offset += self.local_counts[s];
        }
        b
    }
}

pub fn build_jump_operator(partition: &Partition, trace: &TraceMap, mode: Redundancy) -> JumpMap {
    let ns = partition.len();
    // Copies of each global dof: (subdomain, local index), subdomain ascending.
    let mut copies: Vec<Vec<Endpoint>> = vec![Vec::new(); trace.global_count];
    for s in 0..ns {
        for (local, d) in trace.dofs[s].iter().enumerate() {
            copies[d.global].push(Endpoint { subdomain: s, local });
        }
    }

    let mut multipliers = Vec::new();
    let mut groups = Vec::new();
    // Global dofs are numbered by node then component, so this walks node → component → pair.
    for (global, owners) in copies.iter().enumerate() {
        if owners.len() < 2 {
            continue;
        }
        let start = multipliers.len();
        match mode {
            Redundancy::NonRedundant => {
                let root = owners[0];
                for &other in &owners[1..] {
                    multipliers.push(Multiplier { global, plus: root, minus: other });
                }
            }
            Redundancy::FullyRedundant => {
                for a in 0..owners.len() {
                    for b in a + 1..owners.len() {
                        multipliers.push(Multiplier { global, plus: owners[a], minus: owners[b] });
                    }
                }
            }
        }
        groups.push((global, start..multipliers.len()));
    }

    let mut entries = vec![Vec::new(); ns];
    for (m, mult) in multipliers.iter().enumerate() {
        entries[mult.plus.subdomain].push((m, mult.plus.local, 1.0));
        entries[mult.minus.subdomain].push((m, mult.minus.local, -1.0));
    }
    JumpMap {
        mode,
        multipliers,
        groups,
        entries,
        local_counts: trace.dofs.iter().map(Vec::len).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_mesh, partition_blocks, GridSpec};

    fn spring2() -> (Partition, TraceMap) {
        let p = Partition::from_subdomain_nodes(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let layout = DofLayout::new(3, 1, []);
        let t = build_trace_maps(&p, &layout).unwrap();
        (p, t)
    }

    #[test]
    fn spring2_trace_and_jump() {
        let (p, t) = spring2();
        assert_eq!(t.global_indices(0), vec![0, 1]);
        assert_eq!(t.global_indices(1), vec![1, 2]);
        assert_eq!(t.multiplicity(1), 2);
        let l = t.to_dense();
        let colsum: Vec<f64> = (0..3).map(|c| l.column(c).sum()).collect();
        assert_eq!(colsum, vec![1.0, 2.0, 1.0]);

        let b = build_jump_operator(&p, &t, Redundancy::NonRedundant);
        assert_eq!(b.len(), 1);
        assert_eq!(b.block_dense(0), DMatrix::from_row_slice(1, 2, &[0.0, 1.0]));
        assert_eq!(b.block_dense(1), DMatrix::from_row_slice(1, 2, &[-1.0, 0.0]));
    }

    #[test]
    fn single_subdomain_trace_is_identity() {
        let spec = GridSpec::new(&[3, 2], &[1, 1]);
        let mesh = build_structured_mesh(&spec).unwrap();
        let p = partition_blocks(&mesh, &spec).unwrap();
        let t = build_trace_maps(&p, &DofLayout::new(mesh.node_count(), 2, [])).unwrap();
        assert_eq!(t.to_dense(), DMatrix::identity(24, 24));
        assert!(build_jump_operator(&p, &t, Redundancy::NonRedundant).is_empty());
    }

    #[test]
    fn triple_node_multiplier_counts() {
        // Three subdomains sharing node 1, as in the three-subdomain compatibility figure.
        let p = Partition::from_subdomain_nodes(2, vec![vec![0, 1], vec![0, 1], vec![1]]).unwrap();
        let t = build_trace_maps(&p, &DofLayout::new(2, 1, [])).unwrap();
        let nr = build_jump_operator(&p, &t, Redundancy::NonRedundant);
        let fr = build_jump_operator(&p, &t, Redundancy::FullyRedundant);
        let at_node1 = |b: &JumpMap| b.multipliers.iter().filter(|m| m.global == 1).count();
        assert_eq!(at_node1(&nr), 2);
        assert_eq!(at_node1(&fr), 3);
        assert_eq!(fr.len(), 4);
        // both modes annihilate compatible fields
        for b in [&nr, &fr] {
            let bl = b.to_dense() * t.to_dense();
            assert!(bl.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn jump_annihilates_trace_on_blocks() {
        let spec = GridSpec::new(&[4, 4], &[2, 2]);
        let mesh = build_structured_mesh(&spec).unwrap();
        let p = partition_blocks(&mesh, &spec).unwrap();
        let t = build_trace_maps(&p, &DofLayout::new(mesh.node_count(), 1, [])).unwrap();
        let b = build_jump_operator(&p, &t, Redundancy::NonRedundant);
        let bl = b.to_dense() * t.to_dense();
        assert!(bl.iter().all(|&v| v == 0.0));
        // every row: one +1 and one -1 in distinct subdomains
        for m in &b.multipliers {
            assert_ne!(m.plus.subdomain, m.minus.subdomain);
            assert!(m.plus.subdomain < m.minus.subdomain);
        }
        let expected: usize = p.owners.iter().map(|o| o.len() - 1).sum();
        assert_eq!(b.len(), expected);
    }
}
