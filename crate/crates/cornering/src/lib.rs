//! Resource theories and the free cornering.
//!
//! A resource theory is a symmetric strict monoidal category presented by
//! object generators, arrow generators, and equations; its morphisms are
//! transformations of resources. The free cornering of such a theory is a
//! single-object double category whose cells describe concurrent
//! interacting processes: vertical edges are exchange protocols, corner
//! cells bend resource wires into boundaries, and horizontal composition
//! connects participants along shared protocols.
//!
//! Foundations live in three modules: [`theory`] declares and validates
//! presentations, [`morphism`] builds boundary-typed morphism terms over
//! them, and [`cell`] builds cell terms with four-sided boundary typing.
//! On top of them [`rewrite`] normalizes cells, decides equality, and
//! extracts the morphism a vertical cell denotes; [`crossing`] carries
//! wires through exchanges and tensors cells side by side; [`compact`]
//! dualizes theories, inverts one-way exchanges, and balances the
//! ledgers that units and counits leave behind; [`simulate`] runs
//! composite rows as concurrent exchange protocols and extracts the
//! causal traces of their hand-offs.

pub mod cell;
pub mod compact;
pub mod crossing;
pub mod exchange;
pub mod morphism;
mod pasting;
pub mod rewrite;
pub mod simulate;
pub mod theory;

pub use cell::{
    CellBoundary, CellError, CellNode, CellTerm, ExchangeType, Polarity, PolarizedObject,
};
pub use compact::{
    balance_ledger, circ_normal_form, dual_object_name, dualize_theory, exchange_dual, h_counit,
    h_symmetry, h_unit, reversal_iso, star_word, symmetry_inverse, CancelledPair, CompactError,
    DiagramSite, DualizedObject, LedgerReport,
};
pub use crossing::{
    check_crossing_naturality, check_noninteraction, crossing, tensor_cells, CrossingRequest,
};
pub use exchange::{adapter, canonicalize_exchange, d_circ_bullet};
pub use morphism::{MorphismNode, MorphismTerm};
pub use rewrite::{
    cells_equal, eval_vertical, morphisms_equal, rewrite_fixpoint, rewrite_fixpoint_traced,
    to_row_normal_form, RewriteError, RewriteOptions, RewriteStep, RowNormalForm, Verdict,
};
pub use simulate::{
    compose_row, extract_trace, replay_concurrently, run, AdapterMode, BoundaryEvent, CausalTrace,
    Direction, SimulateError,
};
pub use theory::{validate_theory, ObjectWord, Theory, TheoryError, TheoryPresentation};
