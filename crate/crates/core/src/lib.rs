//! A calculus engine for static class diagrams.
//!
//! Diagrams ([`ClassDiagram`]) are checked for well-formedness, interpreted
//! over finite system snapshots ([`Snapshot`]), and compared by bounded
//! refinement: `d2` follows from `d1` at scope `k` when every snapshot with at
//! most `k` objects satisfying `d1` also satisfies `d2`. Transformation rules
//! ([`TransformStep`]) rewrite diagrams syntactically, and proof scripts
//! replay rule sequences with a per-step semantic check.

pub mod cli;
pub mod diagram;
pub mod finder;
pub mod fuzz;
pub mod multiplicity;
pub mod names;
pub mod snapshot;
pub mod textio;
pub mod transform;
pub mod wellformed;

pub use diagram::{diagram_equal, Association, AssociationEnd, ClassDiagram, Vocabulary};
pub use finder::{
    check_refinement, enumerate_snapshots, find_instance, meaning_up_to_bound, Bounds, Outcome,
    RefinementVerdict, Strategy,
};
pub use multiplicity::MultiplicitySet;
pub use names::{ClassifierId, NameId, ObjectId};
pub use snapshot::{canonicalize, extension, links_of, satisfies, Axiom, ObjectState, Snapshot, Verdict};
pub use transform::{apply_step, run_proof_script, ProofResult, ProofScript, TransformStep};
pub use wellformed::{well_formed, Finding, FindingCode, ValidationReport};
