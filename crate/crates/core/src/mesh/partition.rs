use crate::error::{Error, Result};
use crate::mesh::grid::{GridSpec, Mesh};

#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainPart {
    pub elements: Vec<usize>,
    /// Sorted global node ids; position in this list is the local node id.
    pub nodes: Vec<usize>,
    /// Block index in the subdomain grid (zero for hand-built partitions).
    pub block: [usize; 3],
}

/// Non-overlapping decomposition of a node set into subdomains.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub node_count: usize,
    pub subdomains: Vec<SubdomainPart>,
    /// Sorted ids of the subdomains touching each node.
    pub owners: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds a partition from explicit per-subdomain node lists.
    pub fn from_subdomain_nodes(node_count: usize, nodes: Vec<Vec<usize>>) -> Result<Self> {
        let subdomains = nodes
            .into_iter()
            .map(|mut n| {
                n.sort_unstable();
                n.dedup();
                SubdomainPart {
                    elements: Vec::new(),
                    nodes: n,
                    block: [0; 3],
                }
            })
            .collect();
        Self::finish(node_count, subdomains)
    }

    /// Builds a partition from explicit per-subdomain element lists.
    pub fn from_element_sets(node_count: usize, element_nodes: &[Vec<usize>], sets: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; element_nodes.len()];
        let mut subdomains = Vec::with_capacity(sets.len());
        for (s, elements) in sets.into_iter().enumerate() {
            let mut nodes = Vec::new();
            for &e in &elements {
                if e >= element_nodes.len() || seen[e] {
                    return Err(Error::config(format!("element {e} of subdomain {s} is missing or assigned twice")));
                }
                seen[e] = true;
                nodes.extend_from_slice(&element_nodes[e]);
            }
            nodes.sort_unstable();
            nodes.dedup();
            subdomains.push(SubdomainPart {
                elements,
                nodes,
                block: [s, 0, 0],
            });
        }
        if let Some(e) = seen.iter().position(|&v| !v) {
            return Err(Error::config(format!("element {e} belongs to no subdomain")));
        }
        Self::finish(node_count, subdomains)
    }

    fn finish(node_count: usize, subdomains: Vec<SubdomainPart>) -> Result<Self> {
        let mut owners = vec![Vec::new(); node_count];
        for (s, part) in subdomains.iter().enumerate() {
            for &n in &part.nodes {
                if n >= node_count {
                    return Err(Error::config(format!("subdomain {s} references node {n} >= {node_count}")));
                }
                owners[n].push(s);
            }
        }
        if let Some(n) = owners.iter().position(|o| o.is_empty()) {
            return Err(Error::config(format!("node {n} belongs to no subdomain")));
        }
        Ok(Self {
            node_count,
            subdomains,
            owners,
        })
    }

    pub fn len(&self) -> usize {
        self.subdomains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subdomains.is_empty()
    }

    pub fn multiplicity(&self, node: usize) -> usize {
        self.owners[node].len()
    }

    pub fn interface_nodes(&self) -> Vec<usize> {
        (0..self.node_count).filter(|&n| self.owners[n].len() >= 2).collect()
    }

    /// Local node id of global `node` in subdomain `s`.
    pub fn local_node(&self, s: usize, node: usize) -> Option<usize> {
        self.subdomains[s].nodes.binary_search(&node).ok()
    }

    /// Renumbers subdomains: new subdomain `i` is old subdomain `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::Dimension(format!("order has {} entries for {} subdomains", order.len(), self.len())));
        }
        let subdomains = order.iter().map(|&s| self.subdomains[s].clone()).collect();
        Self::finish(self.node_count, subdomains)
    }
}

/// Cuts the mesh into equal axis-aligned blocks of elements.
pub fn partition_blocks(mesh: &Mesh, spec: &GridSpec) -> Result<Partition> {
    spec.validate()?;
    let d = spec.dimension;
    let mut nb = [1usize; 3];
    let mut per = [1usize; 3];
    for axis in 0..d {
        nb[axis] = spec.subdomains_per_axis[axis];
        per[axis] = spec.elements_per_subdomain(axis);
    }
    let block_id = |b: [usize; 3]| b[0] + nb[0] * (b[1] + nb[1] * b[2]);

    let mut subdomains: Vec<SubdomainPart> = Vec::with_capacity(nb.iter().product());
    for k in 0..nb[2] {
        for j in 0..nb[1] {
            for i in 0..nb[0] {
                subdomains.push(SubdomainPart {
                    elements: Vec::new(),
                    nodes: Vec::new(),
                    block: [i, j, k],
                });
            }
        }
    }
    for (e, idx) in mesh.element_index.iter().enumerate() {
        let b = [idx[0] / per[0], idx[1] / per[1], idx[2] / per[2]];
        let part = &mut subdomains[block_id(b)];
        part.elements.push(e);
        part.nodes.extend_from_slice(&mesh.elements[e]);
    }
    for part in &mut subdomains {
        part.nodes.sort_unstable();
        part.nodes.dedup();
    }
    Partition::finish(mesh.node_count(), subdomains)
}
