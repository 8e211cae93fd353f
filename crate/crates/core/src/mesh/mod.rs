//! Structured meshes, block partitions, and the interface operators L and B.

mod grid;
mod maps;
mod partition;

pub use grid::{build_structured_mesh, GridSpec, Mesh};
pub use maps::{
    build_jump_operator, build_trace_maps, DofLayout, Endpoint, JumpMap, LocalDof, Multiplier, Redundancy,
    TraceMap,
};
pub use partition::{partition_blocks, Partition, SubdomainPart};
