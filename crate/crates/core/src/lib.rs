//! Exact contact calculus on towers of focal-plane bundles over the plane.
//!
//! The crate provides four layers. `tower` implements the Chow ring of the
//! iterated projectivization with its duality and pairing tables. `contact`
//! builds the multi-curve contact modules and class formulas on top of it.
//! `branch` lifts parametrized branches through the tower coordinates and
//! reads off their contact invariants. `jet` realizes the chart derivations
//! and the rank tests for the jet evaluation matrices.

pub mod branch;
pub mod contact;
pub mod error;
pub mod formula;
pub mod io;
pub mod jet;
pub mod matrix;
pub mod series;
pub mod tower;

pub use branch::{
    analyze_branch, curve_characteristics, desingularization_level, lift_with_coordinates,
    BranchSeries, ChartKind, LiftReport, LiftedBranch, TraceEntry,
};
pub use contact::{
    curve_module, lift_class, multiply_modules, nonsingular_module, proto_contact, ContactModule,
    ContactMonomial, CurveCharacteristics, FactorKind, FactorTag, FamilyCharacteristics,
    ProtoContactResult,
};
pub use error::{BranchError, ContactError, IoError, JetError, RingError};
pub use formula::{emit_formula, FormulaTexts, SymbolicCurve};
pub use io::{
    chart_kind_label, BranchInput, ContactRequest, CurveInput, CurveLiftRequest, FamilyInput,
    FormulaRequest, LiftRequest, ModuleRequest,
};
pub use jet::{
    defining_sequence, exact_rank, fiber_system, lemma_b_sweep, universal_matrix, weight_of,
    ChartSpec, FiberFactor, GradedWeight, GradingKind, JetCalculator, JetChartKind, JetPolynomial,
    LemmaOutcome, LemmaStatement, MonomialPlacement, SweepCase, UniversalMatrix,
};
pub use matrix::RatMatrix;
pub use series::{SeriesFailure, TruncatedSeries, Valuation};
pub use tower::{build_tower, ChowClass, GeometricBasis, PairingMatrix, Tower};

/// Seed used by every randomized check when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 1729;
