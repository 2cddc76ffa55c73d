//! Torus decompositions as decorated graphs, and the LERF decision.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::lattice::{Gluing, Slope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PieceKind {
    SeifertFibered,
    HyperbolicFiniteVolume,
    HyperbolicHigherGenus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryComponent {
    pub id: String,
    pub genus: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub id: String,
    pub kind: PieceKind,
    pub boundary: Vec<BoundaryComponent>,
    /// Regular fiber on each torus, Seifert pieces only.
    pub fiber_slopes: BTreeMap<String, Slope>,
    /// Degeneracy slopes, hyperbolic pieces only. Optional per torus.
    pub degeneracy_slopes: BTreeMap<String, Slope>,
}

impl Piece {
    pub fn boundary(&self, id: &str) -> Option<&BoundaryComponent> {
        self.boundary.iter().find(|b| b.id == id)
    }

    pub fn tori(&self) -> impl Iterator<Item = &BoundaryComponent> {
        self.boundary.iter().filter(|b| b.genus == 1)
    }

    pub fn has_higher_genus_boundary(&self) -> bool {
        self.boundary.iter().any(|b| b.genus >= 2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeEnd {
    pub piece: String,
    pub boundary: String,
}

impl EdgeEnd {
    pub fn new(piece: &str, boundary: &str) -> EdgeEnd {
        EdgeEnd { piece: piece.to_string(), boundary: boundary.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub end_a: EdgeEnd,
    pub end_b: EdgeEnd,
    /// End-a torus basis expressed in the end-b basis.
    pub gluing: Gluing,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JsjGraph {
    pub pieces: Vec<Piece>,
    pub edges: Vec<Edge>,
    pub is_sol: bool,
    pub trivial_decomposition: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsjViolation {
    #[error("duplicate piece id {0}")]
    DuplicatePiece(String),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(String),
    #[error("piece {0} has duplicate boundary id {1}")]
    DuplicateBoundary(String, String),
    #[error("piece {0} boundary {1} has genus 0")]
    SphereBoundary(String, String),
    #[error("edge {0} references unknown boundary {1}/{2}")]
    UnknownEnd(String, String, String),
    #[error("edge {0} endpoint {1}/{2} is not a torus")]
    EndNotTorus(String, String, String),
    #[error("torus {0}/{1} is used by more than one edge end")]
    TorusReused(String, String),
    #[error("seifert piece {0} has no fiber slope on torus {1}")]
    MissingFiber(String, String),
    #[error("piece {0} carries a fiber slope on {1} but is not seifert fibered or {1} is not a torus")]
    StrayFiber(String, String),
    #[error("piece {0} carries a degeneracy slope on {1} but is not hyperbolic or {1} is not a torus")]
    StrayDegeneracy(String, String),
    #[error("seifert piece {0} has a boundary component {1} of higher genus")]
    SeifertHigherGenus(String, String),
    #[error("finite-volume piece {0} has a boundary component {1} of higher genus")]
    FiniteVolumeHigherGenus(String, String),
    #[error("piece {0} is of higher-genus kind but has no boundary of genus at least 2")]
    NoHigherGenusBoundary(String),
    #[error("edge {0} glues seifert pieces with matching fibers, the decomposition is not minimal")]
    MatchingFibers(String),
    #[error("the decomposition graph is not connected")]
    Disconnected,
    #[error("the decomposition has no pieces")]
    Empty,
    #[error("trivial_decomposition is set but the graph is not a single piece without edges")]
    NotTrivial,
    #[error("the graph is a single piece without edges but trivial_decomposition is unset")]
    UnflaggedTrivial,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsjError {
    #[error("invalid decomposition graph: {}", join(.0))]
    InvalidGraph(Vec<JsjViolation>),
}

fn join(v: &[JsjViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LerfVerdict {
    Lerf,
    NotLerf { edge: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimeLerfVerdict {
    Lerf,
    NotLerf { summand: usize, edge: String },
}

impl fmt::Display for LerfVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LerfVerdict::Lerf => write!(f, "Lerf"),
            LerfVerdict::NotLerf { edge } => write!(f, "NotLerf edge={edge}"),
        }
    }
}

impl JsjGraph {
    pub fn piece(&self, id: &str) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn validate(&self) -> Vec<JsjViolation> {
        let mut out = Vec::new();
        let mut ids = BTreeSet::new();
        for p in &self.pieces {
            if !ids.insert(p.id.as_str()) {
                out.push(JsjViolation::DuplicatePiece(p.id.clone()));
            }
            let mut bids = BTreeSet::new();
            for b in &p.boundary {
                if !bids.insert(b.id.as_str()) {
                    out.push(JsjViolation::DuplicateBoundary(p.id.clone(), b.id.clone()));
                }
                if b.genus == 0 {
                    out.push(JsjViolation::SphereBoundary(p.id.clone(), b.id.clone()));
                }
                if b.genus >= 2 {
                    match p.kind {
                        PieceKind::SeifertFibered => out
                            .push(JsjViolation::SeifertHigherGenus(p.id.clone(), b.id.clone())),
                        PieceKind::HyperbolicFiniteVolume => out.push(
                            JsjViolation::FiniteVolumeHigherGenus(p.id.clone(), b.id.clone()),
                        ),
                        PieceKind::HyperbolicHigherGenus => {}
                    }
                }
            }
            if p.kind == PieceKind::HyperbolicHigherGenus && !p.has_higher_genus_boundary() {
                out.push(JsjViolation::NoHigherGenusBoundary(p.id.clone()));
            }
            let is_torus = |t: &str| p.boundary(t).is_some_and(|b| b.genus == 1);
            if p.kind == PieceKind::SeifertFibered {
                for t in p.tori() {
                    if !p.fiber_slopes.contains_key(&t.id) {
                        out.push(JsjViolation::MissingFiber(p.id.clone(), t.id.clone()));
                    }
                }
            }
            for t in p.fiber_slopes.keys() {
                if p.kind != PieceKind::SeifertFibered || !is_torus(t) {
                    out.push(JsjViolation::StrayFiber(p.id.clone(), t.clone()));
                }
            }
            for t in p.degeneracy_slopes.keys() {
                if p.kind == PieceKind::SeifertFibered || !is_torus(t) {
                    out.push(JsjViolation::StrayDegeneracy(p.id.clone(), t.clone()));
                }
            }
        }

        let mut eids = BTreeSet::new();
        let mut used: BTreeMap<&EdgeEnd, usize> = BTreeMap::new();
        for e in &self.edges {
            if !eids.insert(e.id.as_str()) {
                out.push(JsjViolation::DuplicateEdge(e.id.clone()));
            }
            let mut ends_ok = true;
            for end in [&e.end_a, &e.end_b] {
                match self.piece(&end.piece).and_then(|p| p.boundary(&end.boundary)) {
                    None => {
                        ends_ok = false;
                        out.push(JsjViolation::UnknownEnd(
                            e.id.clone(),
                            end.piece.clone(),
                            end.boundary.clone(),
                        ))
                    }
                    Some(b) if b.genus != 1 => {
                        ends_ok = false;
                        out.push(JsjViolation::EndNotTorus(
                            e.id.clone(),
                            end.piece.clone(),
                            end.boundary.clone(),
                        ))
                    }
                    Some(_) => *used.entry(end).or_default() += 1,
                }
            }
            if ends_ok {
                let fa = self.piece(&e.end_a.piece).and_then(|p| p.fiber_slopes.get(&e.end_a.boundary));
                let fb = self.piece(&e.end_b.piece).and_then(|p| p.fiber_slopes.get(&e.end_b.boundary));
                if let (Some(fa), Some(fb)) = (fa, fb) {
                    if e.gluing.apply_slope(fa).ok().as_ref() == Some(fb) {
                        out.push(JsjViolation::MatchingFibers(e.id.clone()));
                    }
                }
            }
        }
        for (end, n) in used {
            if n > 1 {
                out.push(JsjViolation::TorusReused(end.piece.clone(), end.boundary.clone()));
            }
        }

        if self.pieces.is_empty() {
            out.push(JsjViolation::Empty);
        } else if !self.is_connected() {
            out.push(JsjViolation::Disconnected);
        }
        let single = self.pieces.len() == 1 && self.edges.is_empty();
        if self.trivial_decomposition && !single {
            out.push(JsjViolation::NotTrivial);
        }
        if !self.trivial_decomposition && single {
            out.push(JsjViolation::UnflaggedTrivial);
        }
        out
    }

    fn is_connected(&self) -> bool {
        let index: BTreeMap<&str, usize> =
            self.pieces.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
        let mut parent: Vec<usize> = (0..self.pieces.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            if let (Some(&a), Some(&b)) =
                (index.get(e.end_a.piece.as_str()), index.get(e.end_b.piece.as_str()))
            {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
        let roots: BTreeSet<usize> = (0..parent.len()).map(|i| find(&mut parent, i)).collect();
        roots.len() <= 1
    }

    /// Decides whether the fundamental group is LERF.
    ///
    /// Geometric and Sol manifolds are LERF. Otherwise every decomposition torus
    /// must be adjacent to a piece with a boundary component of genus at least two.
    pub fn is_lerf(&self) -> Result<LerfVerdict, JsjError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(JsjError::InvalidGraph(violations));
        }
        if self.trivial_decomposition || self.is_sol {
            return Ok(LerfVerdict::Lerf);
        }
        let mut edges: Vec<&Edge> = self.edges.iter().collect();
        edges.sort_by(|x, y| x.id.cmp(&y.id));
        for e in edges {
            let rich = [&e.end_a, &e.end_b].iter().any(|end| {
                self.piece(&end.piece).is_some_and(|p| p.has_higher_genus_boundary())
            });
            if !rich {
                return Ok(LerfVerdict::NotLerf { edge: e.id.clone() });
            }
        }
        Ok(LerfVerdict::Lerf)
    }
}

/// LERF for a connected sum: every prime summand must be LERF.
pub fn lerf_prime_decomposition(summands: &[JsjGraph]) -> Result<PrimeLerfVerdict, JsjError> {
    for (i, g) in summands.iter().enumerate() {
        if let LerfVerdict::NotLerf { edge } = g.is_lerf()? {
            return Ok(PrimeLerfVerdict::NotLerf { summand: i, edge });
        }
    }
    Ok(PrimeLerfVerdict::Lerf)
}
