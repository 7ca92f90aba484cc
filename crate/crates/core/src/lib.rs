//! Minimum measurement entropy of pure multi-particle states over simple
//! product observables, with Schmidt forms, measurement schemes, and toy
//! point-spectrum scattering models that generate entanglement.

pub mod cli;
pub mod error;
pub mod linalg;
pub mod observables;
pub mod scattering;
pub mod schemes;
pub mod schmidt;
pub mod search;
pub mod sq;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use observables::{PointObservable, ProductObservable};
pub use schemes::{Partition, Scheme};
pub use schmidt::{schmidt, SchmidtForm};
pub use sq::{sq_bipartite, sq_search, Method, SearchOptions, SqResult};
pub use state::StateVector;
