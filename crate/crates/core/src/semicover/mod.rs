//! Assembly of a finite semi-cover certifying separability, and its verifier.
//!
//! The compact core of the cover is modelled by its finite dual graph `G_K`
//! (see [`graph`]). Every edge end receives a finite-index subgroup of the
//! torus homology. A spanning tree is processed vertex by vertex with the
//! exponents of `𝔄` dropping by one at each step, after which the chords are
//! pasted. The only chord that can fail is a cylinder between two fibered
//! vertices, and it fails exactly when its cycle has nontrivial spirality.

pub mod assemble;
pub mod constants;
pub mod graph;
pub mod slopes;
pub mod verify;

use num_bigint::BigInt;
use thiserror::Error;

use crate::jsj::JsjViolation;
use crate::lattice::{Lattice, LatticeError, Slope, Vector};
use crate::phi::{PhiError, PhiViolation, SpiralityValue, Step};

pub use assemble::{assemble, assemble_with_order, prepare, spanning_tree_with_edge_conditions, Prepared, TreeChoice};
pub use constants::{build_sheet, global_constant, ConstantInput, ConstantSheet};
pub use graph::{
    build_cover_graph, CoverEdge, CoverEnd, CoverGraph, CoverGraphSpec, CoverVertex, CoverVertexKind,
    ExtraEdge, ExtraEnd, ExtraVertex, Side, Space, SpaceSpec,
};
pub use slopes::{choose_slopes, EdgeSlopes, SlopeChoice};
pub use verify::{verify_certificate, CertViolation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemicoverError {
    #[error("hypotheses violated: {0}")]
    HypothesesViolated(String),
    #[error("invalid decomposition graph: {}", join(.0))]
    InvalidJsj(Vec<JsjViolation>),
    #[error("invalid surface graph: {}", join(.0))]
    InvalidPhi(Vec<PhiViolation>),
    #[error("invalid cover graph: {}", .0.join("; "))]
    InvalidCoverGraph(Vec<String>),
    #[error("cylinder {0} has no core curve")]
    MissingCore(String),
    #[error("piece {0} has no degeneracy slope on {1}")]
    MissingDegeneracySlope(String, String),
    #[error("edge {0} joins vertex spaces that cannot share it")]
    IncompatiblePair(String),
    #[error("the chosen slope on {0} is parallel to the core")]
    SlopeParallelToCore(String),
    #[error("inconsistent constants: {0}")]
    InconsistentConstants(String),
    #[error("no spanning tree satisfies the edge conditions: {0}")]
    EdgeConditionUnsatisfiable(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Phi(#[from] PhiError),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// How one edge end meets its vertex space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EndShape {
    Torus,
    /// `Z[core] + Z[multiplier * t]`
    Cylinder { core: Vector, t: Slope, multiplier: BigInt },
    /// `Z[mu * u] + Z[nu * v]`
    Plane { u: Slope, v: Slope, mu: BigInt, nu: BigInt },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndRecord {
    pub vertex: String,
    pub shape: EndShape,
    pub lattice: Lattice,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRecord {
    pub edge: String,
    pub in_tree: bool,
    pub a: EndRecord,
    pub b: EndRecord,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexRecord {
    pub vertex: String,
    /// 1-based position in the tree order.
    pub position: usize,
    /// Exponent of `𝔄` in the boundary condition when the vertex was added.
    pub exponent: u32,
    pub parent_edge: Option<String>,
    /// The single parameter of fibered vertices.
    pub alpha: Option<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverCertificate {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    pub sheet: ConstantSheet,
}

impl CoverCertificate {
    pub fn edge(&self, id: &str) -> Option<&EdgeRecord> {
        self.edges.iter().find(|e| e.edge == id)
    }
}

/// A chord whose cycle has spirality other than 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpiralObstruction {
    pub chord: String,
    pub cycle: Vec<Step>,
    pub value: SpiralityValue,
    /// Indices of the two chord-side subgroups before pasting.
    pub index_a: BigInt,
    pub index_b: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assembly {
    Certified(CoverCertificate),
    Obstructed(SpiralObstruction),
}
