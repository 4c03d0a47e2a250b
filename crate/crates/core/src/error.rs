use thiserror::Error;

use crate::cube::Face;
use crate::report::ValidationReport;
use crate::structure::Elem;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // Structural faults: the input does not describe a well-formed value.
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("family mismatch: {left} vs {right}")]
    FamilyMismatch { left: String, right: String },
    #[error("label universe mismatch: {left:?} vs {right:?}")]
    LabelMismatch { left: Option<u32>, right: Option<u32> },
    #[error("duplicate element id {0}")]
    DuplicateElement(Elem),
    #[error("element id {0} is not an element of the structure")]
    NotAnElement(Elem),
    #[error("non-total tuple table: no entry for tuple {0:?}")]
    NonTotalTable(Vec<Elem>),
    #[error("malformed tuple entry for {tuple:?}: {reason}")]
    BadEntry { tuple: Vec<Elem>, reason: String },
    #[error("label index {label} outside universe of size {universe}")]
    LabelOutOfRange { label: u32, universe: u32 },
    #[error("label universe of size {0} is not supported (max 64)")]
    UniverseTooLarge(u32),
    #[error("subset is not closed under the function symbols")]
    NotClosed,
    #[error("map is not injective or does not cover the source: {0}")]
    BadMap(String),
    #[error("cube dimension {0} exceeds the supported bound of 16")]
    DimensionTooLarge(usize),
    #[error("cube is missing face {0}")]
    MissingFace(Face),
    #[error("cube is missing map {0} -> {1}")]
    MissingMap(Face, Face),
    #[error("face {face} is not part of a {k}-cube")]
    FaceOutOfRange { face: Face, k: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("i/o error: {0}")]
    Io(String),

    // Domain refusals: the input is well formed but the operation does not apply.
    #[error("amalgamation arity exceeded: k = {k} but BKL_{n} only has disjoint k-amalgamation for 1 <= k <= {n}")]
    ArityExceeded { k: usize, n: usize },
    #[error("cube extension needs 1 <= k < n for BKL_{n}, got k = {k}")]
    ExtensionRange { k: usize, n: usize },
    #[error("input rejected by validation: {0}")]
    Invalid(ValidationReport),
    #[error("label collision: elements {0} and {1} would carry the same label set")]
    LabelCollision(Elem, Elem),
    #[error("label universe exhausted; rerun with a label universe of at least {required}")]
    LabelsExhausted { required: u32 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("run aborted: {0}")]
    Aborted(String),

    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ArityMismatch { .. } => "arity_mismatch",
            Error::FamilyMismatch { .. } => "family_mismatch",
            Error::LabelMismatch { .. } => "label_mismatch",
            Error::DuplicateElement(_) => "duplicate_element",
            Error::NotAnElement(_) => "dangling_id",
            Error::NonTotalTable(_) => "non_total_table",
            Error::BadEntry { .. } => "bad_entry",
            Error::LabelOutOfRange { .. } => "label_out_of_range",
            Error::UniverseTooLarge(_) => "universe_too_large",
            Error::NotClosed => "not_closed",
            Error::BadMap(_) => "bad_map",
            Error::DimensionTooLarge(_) => "dimension_too_large",
            Error::MissingFace(_) => "missing_face",
            Error::MissingMap(..) => "missing_map",
            Error::FaceOutOfRange { .. } => "face_out_of_range",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::Json(_) => "malformed_json",
            Error::Schema(_) => "schema_violation",
            Error::Io(_) => "io",
            Error::ArityExceeded { .. } => "arity_exceeded",
            Error::ExtensionRange { .. } => "extension_range",
            Error::Invalid(_) => "invalid",
            Error::LabelCollision(..) => "label_collision",
            Error::LabelsExhausted { .. } => "labels_exhausted",
            Error::Unsupported(_) => "unsupported",
            Error::Aborted(_) => "aborted",
            Error::Internal(_) => "internal",
        }
    }

    /// True for mathematical refusals, false for malformed input.
    pub fn is_refusal(&self) -> bool {
        matches!(
            self,
            Error::ArityExceeded { .. }
                | Error::ExtensionRange { .. }
                | Error::Invalid(_)
                | Error::LabelCollision(..)
                | Error::LabelsExhausted { .. }
                | Error::Unsupported(_)
                | Error::Aborted(_)
                | Error::Internal(_)
        )
    }
}
