//! Exact response matrices and matrix-tree identities for superport
//! electrical networks.
//!
//! Vertices are 0-based inside the library and 1-based in every file and
//! report. See [`network`] for the canonical numbering.

pub mod forest;
pub mod linalg;
pub mod network;
pub mod random;
pub mod solver;
pub mod verify;

pub use forest::{Execution, Forest, ForestEnumerator, ForestError, XyzwPartition, DEFAULT_CAP};
pub use linalg::{format_rational, parse_rational, LinalgError, Matrix, Rational};
pub use network::{Circuit, NetworkError, NetworkFile, Relabeling, Solution, SuperportNetwork};
pub use solver::{
    c2l, electrical_response, extended_response, kirchhoff_matrix, response_from_k, solve,
    superport_response, ResponseMatrices, SolverError,
};
pub use verify::{Report, Status, Theorem, Verifier, VerifyError};
