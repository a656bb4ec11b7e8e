//! Average gate fidelity of trace-preserving maps on qudits.
//!
//! The crate evaluates `F̄(E) = ∫dψ ⟨ψ|E(|ψ⟩⟨ψ|)|ψ⟩` exactly through the
//! SU(d) generator formula and through finite isotropic state designs
//! (minimal `d²`-state simplices, the qubit octahedron), and checks both
//! against a Haar Monte Carlo estimate and the entanglement-fidelity
//! identity.

pub mod channels;
pub mod cli;
pub mod designs;
pub mod error;
pub mod fidelity;
pub mod haar;
pub mod io;
pub mod selftest;
pub mod su_basis;
pub mod tensor;

pub use channels::KrausChannel;
pub use designs::StateDesign;
pub use error::{Error, Result};
pub use fidelity::{FidelityMethod, FidelityReport};
pub use su_basis::{gell_mann_basis, GeneratorBasis};
pub use tensor::{ComplexMatrix, DensityMatrix, PureState, Tolerances};
