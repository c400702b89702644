//! Partial standard quantum process tomography in the Choi matrix representation.
//!
//! The crate reconstructs individual elements of a channel's χ matrix, expanded
//! over the matrix units `|a⟩⟨b|`, from simulated input-state / projector
//! measurements. A diagonal element needs a single measurement setting, an
//! off-diagonal element at most sixteen, independent of the system dimension.
//! Every reconstruction can be checked against the χ matrix computed directly
//! from the channel's Kraus operators.
//!
//! Module map:
//!
//! * [`channel`]: Kraus channels, their action on states and the χ oracle.
//! * [`basis`]: matrix units, pure-state and Hermitian expansions, SU(d)
//!   generators and the Choi/Pauli conversion.
//! * [`measure`]: exact and shot-noise measurement backends.
//! * [`tomo`]: λ/β algebra, measurement planning, element and full reconstruction,
//!   multi-qudit index utilities.

pub mod basis;
pub mod channel;
mod error;
pub mod linalg;
pub mod measure;
pub mod tomo;

pub use error::{Error, Result};

pub use basis::{ChoiIndex, HermitianBasis, HermitianExpansion, PureStateExpansion};
pub use channel::{DensityMatrix, QuantumChannel, ValidationReport};
pub use linalg::{ComplexMatrix, StateVector};
pub use measure::{BackendConfig, BackendMode, MeasurementOutcome, MeasurementSetting, Observable};
pub use tomo::{
    ChiElementEstimate, ChiMatrix, FullTomography, LambdaMatrix, MeasurementPlan, QuditIndexMap,
    Strategy,
};

/// Tolerance for physicality checks (trace, Hermiticity, positivity).
pub const PHYSICAL_TOL: f64 = 1e-10;

/// Tolerance for algebraic identities evaluated on exact arithmetic paths.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
