//! Computable structures whose isomorphisms encode the paths of a binary
//! tree.
//!
//! Given a computable tree `T ⊆ 2^<ω`, this crate builds two computable
//! structures 𝑀 and 𝑁 on the universe `T × 2` such that every infinite
//! path through `T` computes an isomorphism `𝑀 → 𝑁` and every isomorphism
//! computes a path. The modules are:
//!
//! * [`tree`]: finite and generator-backed trees and their normalization;
//! * [`structure`]: the relations `R_σ`, `L`, `P` and the constant `c`;
//! * [`reductions`]: path to isomorphism and back, as oracle computations;
//! * [`pi01`]: monotone prefix checkers presenting both classes as Π⁰₁;
//! * [`oracle`]: exhaustive verification on finite windows.

pub mod bits;
pub mod corpus;
pub mod oracle;
pub mod pi01;
pub mod reductions;
pub mod structure;
pub mod tree;

pub use bits::{bs, BinString};
pub use structure::{const_node, Node, Side, StructurePair};
pub use tree::{normalize, Generator, NormalizedTree, Tree, TreeError};
