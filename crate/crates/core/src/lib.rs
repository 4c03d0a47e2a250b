//! Finite BKL_n structures, cube diagrams of structures, disjoint
//! amalgamation, and the iterative construction of irreducible cubes.

pub mod amalgam;
pub mod becker;
pub mod cube;
pub mod error;
pub mod extend;
pub mod fraisse;
pub mod io;
pub mod random;
pub mod report;
pub mod structure;
pub mod types;
pub mod witness;

pub use amalgam::{complete_bkl, disjoint_amalgamate, set_colimit, IdAllocator, SetColimit, Strategy};
pub use becker::{build_digraph, dimension_estimate, find_cube_embedding, CubeWitness, EmbeddabilityDigraph};
pub use cube::{
    is_reducible, validate_cube, validate_disjoint, validate_disjoint_embedding, CubeDiagram, DisjointEmbedding, Face,
    Shape,
};
pub use error::{Error, Result};
pub use extend::extend_cube;
pub use fraisse::{run, Certificate, CoverageReport, RunConfig, RunState, Status};
pub use report::{ValidationReport, Violation};
pub use structure::{
    check_embedding, embeds, find_embeddings, find_embeddings_extending, generated_substructure, independence_check,
    is_closed, is_isomorphic, satisfies_theta, theta, validate_bkl, validate_family, validate_graph, validate_labels,
    Atom, Elem, Embedding, Family, FiniteStructure, LabelSet, Labeling, ThetaFormula, TupleEntry,
};
pub use witness::{search_failure_witness, FailureWitness};
