pub mod algebras;
pub mod auto;
pub mod catalog;
pub mod error;
pub mod expr;
pub mod group;
pub mod jets;
pub mod lie;
pub mod pde;
pub mod poly;
pub mod rational;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod suite;
