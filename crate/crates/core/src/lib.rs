//! Exact-integer-arithmetic engine for geometric realizations of triangulated
//! surfaces on small cubic grids.
//!
//! The crate verifies, exhaustively enumerates (modulo the 48 cube symmetries),
//! and heuristically searches for embedded polyhedra with straight edges and
//! flat triangles whose vertices lie on an integer grid. All geometric
//! decisions are made with exact integer predicates; no floating point enters
//! any verdict.

pub mod geom;
pub mod io;
pub mod realize;
pub mod search;
pub mod surface;
pub mod symmetry;

pub use geom::{GridPoint, Orientation};
pub use realize::{Realization, VerificationReport};
pub use surface::{TopologyReport, Triangulation};
pub use symmetry::CubeIsometry;
