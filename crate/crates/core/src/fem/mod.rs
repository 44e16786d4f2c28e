//! Isoparametric finite element machinery: shape functions, quadrature,
//! spaces, deformed geometry, assembly, and direct solution.

pub mod assembly;
pub mod field;
pub mod geometry;
pub mod quadrature;
pub mod shape;
pub mod solver;
pub mod space;

pub use assembly::{BlockLayout, LinearSystem, Measure, SystemBuilder};
pub use field::Field;
pub use geometry::{CellGeo, DeformedGeometry, FacetGeo};
pub use shape::CellType;
pub use solver::solve_direct;
pub use space::{FeSpace, TraceSpace};
