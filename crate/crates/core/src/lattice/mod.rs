//! Scaled lattice, planar regions, mass distributions and the flow `D_s`.

mod flow;
mod mass;
mod region;
mod site;

pub use flow::{disk_flow_radius, flow_velocity, DiskFlow, Flow, NumericFlow};
pub use mass::{DensityProfile, MassDistribution, SourcePoint, SourceShape, SourceSpec};
pub use region::{lattice_points, Region};
pub use site::{LatticeGrid, Site};
