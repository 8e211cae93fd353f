//! Element matrices, materials, loads, and rigid body modes.

mod discretize;
mod element;
mod material;
mod rigid;

pub use discretize::{structured_discretization, two_spring_chain, Discretization, LoadSpec};
pub use element::{bar_stiffness, element_stiffness, face_load_weights, Coefficients, Physics};
pub use material::{MaterialField, MaterialPattern};
pub use rigid::{geometric_modes, rigid_body_modes, MODE_TOLERANCE};
