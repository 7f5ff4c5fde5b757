pub mod catalog;
pub mod complexity;
pub mod error;
pub mod geodesic;
pub mod growth;
pub mod manifold;
pub mod mre;
pub mod ode;
pub mod quadrature;
pub mod scenario;
pub mod table;

pub use error::{Error, Result};
