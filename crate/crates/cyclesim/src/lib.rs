//! Exact desk-scale simulator of a reversible, tree-structured construction
//! that grows the uniform superposition of all Hamiltonian cycles over `n`
//! vertices, level by level, starting from the unique 3-vertex tour.
//!
//! Cycles are coded as edge bitmasks ([`encoding`]); states are sparse maps
//! from basis labels to signed integer coefficients with an implicit
//! normalizer, so every probability is an exact fraction ([`qstate`]). The
//! level mapping is a permutation of basis labels factored into 4-bit
//! involutions ([`mapping`]); the builder drives it level by level and
//! keeps the probability ledger ([`builder`]); a brute-force oracle and a
//! weight matrix close the loop on TSP instances ([`oracle`]).
//!
//! ```
//! use cyclesim::{build_superposition, Variant};
//!
//! let (state, ledger) = build_superposition(5, Variant::Projector).unwrap();
//! assert_eq!(state.term_count(), 12); // all (5-1)!/2 tours, equal weight
//! assert_eq!(ledger.entries[1].p.to_string(), "2/3");
//! ```

mod bits;
mod error;

pub mod builder;
pub mod encoding;
pub mod mapping;
pub mod oracle;
pub mod qstate;

pub use builder::{
    build_superposition, build_to_level, expand_level, expected_measurement_cost, mean,
    phase_scramble_then_expand, reverse_level, sample_repetitions, trace_level, AncillaMode,
    BuildOptions, BuildOutcome, LedgerEntry, LevelTrace, ProbabilityLedger, SpaceAccounting,
    Variant, DEFAULT_TERM_BUDGET,
};
pub use encoding::{decode_cycle, encode_cycle, EdgeIndexer, PathMask, MAX_VERTICES};
pub use error::{Error, Result};
pub use mapping::{
    apply_sub_op, apply_um, apply_um_aux, apply_um_dagger, apply_um_with_trace, matrix_element,
    SubOpSpec, SubOpTrace,
};
pub use oracle::{enumerate_cycles, min_tour, tour_weight, TourSource, WeightMatrix};
pub use qstate::{AncillaMask, BasisLabel, ExactProb, Sign, SparseState};
