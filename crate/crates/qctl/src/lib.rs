//! QCTL — CTL with propositional quantification — over finite and bounded
//! tree models.
//!
//! The crate provides:
//!
//! * a parser, printer and structural metrics for QCTL formulas ([`syntax`]);
//! * finite labelled tree models, Kripke structures and computation-tree
//!   unfoldings, with frontier completion modes that stand in for the
//!   infinite tree semantics ([`trees`]);
//! * the satisfaction relation with two quantifier backends and a prenex
//!   normal form rewriter ([`checker`]);
//! * a complete satisfiability decision procedure for the EX fragment on
//!   N-bounded trees, and bounded witness search over finite trees ([`sat`]);
//! * generators for the whole catalogue of formula schemas: local nominals,
//!   graded counting, grids, tower-counting node types, arithmetic
//!   comparisons and tiling reductions ([`constructions`]);
//! * logic-to-logic translations between the EX, EF and EXEF fragments and
//!   the embeddings of finite-tree logics into the infinite-tree semantics
//!   ([`translations`]);
//! * brute-force tiling and multi-tiling solvers used as independent oracles
//!   ([`tiling`]);
//! * the verification suites wired to both `cargo test` and the `qctl verify`
//!   subcommand ([`verify`]).
//!
//! The guide under `book/` walks through the concepts chapter by chapter;
//! its code snippets are compiled and run by `cargo test --doc`.

pub mod checker;
pub mod constructions;
pub mod sat;
pub mod syntax;
pub mod tiling;
pub mod translations;
pub mod trees;
pub mod verify;

#[cfg(doctest)]
mod book;
