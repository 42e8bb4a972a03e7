pub mod counting;
pub mod error;
pub mod finite_fields;
pub mod hermitian_duality;
pub mod instance;
pub mod lattice_window;
pub mod linalg;
pub mod local_fields;
pub mod registry;
pub mod series;

pub use error::{Error, Result};
