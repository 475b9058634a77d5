//! Exact symbolic and numeric toolkit for characteristic classes of
//! foliation leaf spaces: the cochain complex of formal vector fields with
//! its formal Chern cocycles, truncated jet calculus, the Gelfand-Kazhdan
//! frame construction, finite atlas presentations with their Cech-De Rham
//! double complex, and a numeric model of the Reeb foliation transversal.

pub mod cech;
pub mod cli;
pub mod error;
pub mod rational;
pub mod report;
pub mod site;
pub mod gk;
pub mod jet;
pub mod linalg;
pub mod numeric;
pub mod parse;
pub mod presentation;
pub mod probe;
pub mod profile;
pub mod wn;
pub mod symbolics;

pub use rational::Rational;
