//! Numerical toolkit for Delaunay surfaces and Delaunay tori.
//!
//! The crate builds the unduloid/nodoid profiles from Jacobi elliptic
//! functions, evaluates curvature quantities on cylinders, tori and normal
//! graphs over them, and measures the remainders of the small-parameter
//! expansions that govern the bending construction.

pub mod cylinder;
pub mod graph;
pub mod jet;
pub mod mesh;
pub mod ode;
pub mod probe;
pub mod profile;
pub mod quad;
pub mod report;
pub mod special_fn;
pub mod surface;
pub mod torus;

pub use nalgebra::Vector3;
