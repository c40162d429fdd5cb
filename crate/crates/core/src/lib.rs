//! Morita theory of finite groupoids and its Poisson-geometric
//! specialisations.
//!
//! - [`group`] and [`groupoid`]: finite groups and groupoids as explicit
//!   tables, with the standard constructions (pair, action, gauge).
//! - [`bibundle`]: bibundles as generalised morphisms, their tensor product
//!   and the Morita-equivalence decision.
//! - [`picard`]: automorphisms, bisections, inner and outer automorphisms,
//!   Picard groups and the exact sequences relating them.
//! - [`tss`]: labelled surface graphs of topologically stable Poisson
//!   structures and their equivalence problems.
//! - [`gauge`]: gauge transformations of sampled bivector fields.
//! - [`io`]: JSON file formats.

pub mod bibundle;
pub mod gauge;
pub mod group;
pub mod groupoid;
pub mod io;
pub mod picard;
pub mod report;
pub mod tss;
pub mod union_find;

pub use bibundle::Bibundle;
pub use group::FiniteGroup;
pub use groupoid::FiniteGroupoid;
pub use report::{ValidationReport, Violation};
