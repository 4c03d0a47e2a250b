use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cube::Face;
use crate::structure::Elem;

/// A single failed condition together with the data that witnesses it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Fewer or more function values than `rel + 1`.
    B1 {
        tuple: Vec<Elem>,
    },
    /// A function value outside the structure.
    B2 {
        tuple: Vec<Elem>,
    },
    /// A substructure-independent set of size n + 1.
    B3 {
        independent: Vec<Elem>,
    },
    /// Two elements with the same label set.
    A1 {
        left: Elem,
        right: Elem,
    },
    GraphLoop {
        vertex: Elem,
    },
    GraphAsymmetric {
        from: Elem,
        to: Elem,
    },
    NotIdentity {
        face: Face,
    },
    NotEmbedding {
        from: Face,
        to: Face,
        reason: String,
    },
    Functoriality {
        sigma: Face,
        tau: Face,
        rho: Face,
    },
    Disjointness {
        sigma: Face,
        tau: Face,
    },
    FaceInvalid {
        face: Face,
        violations: Vec<Violation>,
    },
    Naturality {
        sigma: Face,
        tau: Face,
    },
    MixedDisjointness {
        sigma: Face,
        tau: Face,
    },
    HNotEmbedding {
        face: Face,
        reason: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::B1 { tuple } => write!(f, "(B1) entry length for {tuple:?}"),
            Violation::B2 { tuple } => write!(f, "(B2) dangling function value at {tuple:?}"),
            Violation::B3 { independent } => {
                write!(f, "(B3) substructure-independent set {independent:?}")
            }
            Violation::A1 { left, right } => write!(f, "(A1) {left} and {right} share a label set"),
            Violation::GraphLoop { vertex } => write!(f, "loop at {vertex}"),
            Violation::GraphAsymmetric { from, to } => write!(f, "edge {from}->{to} not symmetric"),
            Violation::NotIdentity { face } => write!(f, "f^{face}_{face} is not the identity"),
            Violation::NotEmbedding { from, to, reason } => {
                write!(f, "f^{from}_{to} is not an embedding: {reason}")
            }
            Violation::Functoriality { sigma, tau, rho } => {
                write!(f, "functoriality fails at ({sigma}, {tau}, {rho})")
            }
            Violation::Disjointness { sigma, tau } => {
                write!(f, "disjointness fails at ({sigma}, {tau})")
            }
            Violation::FaceInvalid { face, violations } => {
                write!(f, "face {face} invalid ({} violations)", violations.len())
            }
            Violation::Naturality { sigma, tau } => write!(f, "naturality fails at ({sigma}, {tau})"),
            Violation::MixedDisjointness { sigma, tau } => {
                write!(f, "mixed disjointness fails at ({sigma}, {tau})")
            }
            Violation::HNotEmbedding { face, reason } => {
                write!(f, "h_{face} is not an embedding: {reason}")
            }
        }
    }
}

/// List of violations; empty iff the checked object is valid.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
