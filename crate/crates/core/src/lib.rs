//! Graph-state construction on two-species optical lattices by global
//! operations, with exact Clifford and dense noisy backends and a
//! two-setting fidelity certification.

pub mod circuit;
pub mod engine;
pub mod error;
pub mod graph;
pub mod lattice;
pub mod noise;
pub mod pauli;
pub mod scalar;
pub mod statevector;
pub mod tableau;
pub mod verification;

pub use error::{Error, Result};
pub use graph::Graph;
pub use lattice::{ConstructionSequence, GlobalOp, Lattice, Scheme, Species};
pub use noise::{NoiseKind, NoiseModel, TrajectoryPlan};
pub use pauli::{Pauli, PauliString, Phase};
pub use scalar::Scalar;
pub use tableau::{CanonicalForm, MeasurementOutcome, OutcomePolicy, Tableau};

/// Double-precision statevector (the default backend).
pub type StateVector = statevector::StateVector<f64>;
/// Single-precision statevector.
pub type StateVector32 = statevector::StateVector<f32>;
pub type Unitary2 = statevector::Unitary2<f64>;
