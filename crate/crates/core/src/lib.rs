//! Separability of surface subgroups in graph manifolds: integer lattices on
//! tori, decomposition graphs, spirality of almost fibered surfaces, and
//! finite semi-covers with checkable certificates.

pub mod instance;
pub mod io;
pub mod jsj;
pub mod lattice;
pub mod phi;
pub mod semicover;

#[cfg(any(test, feature = "oracle"))]
pub mod corpus;
#[cfg(any(test, feature = "oracle"))]
pub mod gen;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub use instance::Instance;
pub use jsj::{JsjGraph, LerfVerdict, PrimeLerfVerdict};
pub use lattice::{hnf, span2, Gluing, Lattice, LatticeError, ScaledSlope, Slope, Vector};
pub use phi::{PhiGraph, Separability, SpiralityValue, Step};
pub use semicover::{
    assemble, verify_certificate, Assembly, CertViolation, CoverCertificate, SemicoverError, SpiralObstruction,
};
