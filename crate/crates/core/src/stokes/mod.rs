//! Stokes and connection matrices of the confluent system as normalized
//! infinite matrix products, their assembly, and the canonical solutions of
//! the associated difference systems.

pub mod accel;
pub mod assemble;
pub mod difference;
pub mod entries;

pub use accel::{ProductConfig, ProductTrace};
pub use entries::{
    connection_col, connection_row, convergence_guard, line_blocker, quantum_entry, segment_blocker, stokes_entry_minus,
    stokes_entry_minus_at, stokes_entry_plus, stokes_entry_plus_at, GuardReport, QuantumForm,
};
pub use assemble::{
    assemble_Sd, assemble_hybrid, assemble_with, duality_check, duality_check_with, hybrid_entry, im_ordering, monodromy_check,
    product_entry, rotate_stokes, EntrySource,
    triangularity, EntryProvider, MonodromyReport, StokesRay, StokesSet, TriangularityReport,
};
pub use difference::{
    connection_Lk, connection_Lk_value, connection_Lk_with, difference_residuals, difference_solution, residue_prediction,
    ConnectionReport, Side, CONTOUR_NODES,
};
