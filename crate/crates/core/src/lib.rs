//! Exact computations with symmetric Higman–Thompson groups `V_d(H, q)` that
//! carry a finite local group `H` and a homomorphism `q: H -> Sym(d)`, together
//! with the Stein–Farley poset they act on.
//!
//! - [`trees`]: complete finite d-ary trees as prefix codes.
//! - [`localgroup`]: finite permutation groups with a verified `q`.
//! - [`element`]: labeled tree pairs, their reduction, composition, action on
//!   eventually periodic points, and the maps `pi`, `iota`, `retract`.
//! - [`steinfarley`]: vertices `[T, g]`, the orders `<=` and elementary `<=`,
//!   intervals, stabilizers, descending links and the complete-join check.
//! - [`homology`]: reduced integral homology through Smith normal form.
//! - [`campaign`]: seeded property campaigns and JSON-ready reports.

pub mod campaign;
pub mod element;
pub mod homology;
pub mod localgroup;
pub mod parse;
pub mod simplicial;
pub mod steinfarley;
pub mod trees;

pub use element::{CantorPoint, ElementError, SymTreePair};
pub use localgroup::{Generator, GroupError, GroupOptions, LocalElement, LocalGroup, Perm};
pub use parse::ParseError;
pub use simplicial::SimplicialComplex;
pub use trees::{CompleteTree, LeafAddress, TreeError};
