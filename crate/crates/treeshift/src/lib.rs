//! Weighted shift operators on truncated rooted directed trees.
//!
//! A rooted directed tree carries one weight per non-root vertex; the
//! associated shift operator sends the basis vector at a vertex to the
//! weighted sum of the basis vectors at its children.  This crate builds
//! such operators at a finite truncation depth, checks whether they are
//! *balanced* (the shifted basis vectors have constant norm on each
//! generation), extracts the wandering subspace of the adjoint kernel, and
//! decides unitary equivalence of balanced non-periodic shifts from two
//! invariants: the generation-norm sequence and the generation
//! cardinality sequence.
//!
//! Independent cross-checks are provided: a joint eigenvalue/multiplicity
//! oracle over the wandering blocks, a Wold-type oracle for isometries,
//! an explicit block unitary with a verified intertwining residual, and a
//! reproducing-kernel model with Cauchy-dual based radius estimates.
//!
//! ```
//! use std::sync::Arc;
//! use treeshift::equivalence::{decide_nonperiodic, ShiftPresentation, Verdict};
//! use treeshift::seqclass::MomentSequenceSpec;
//! use treeshift::tree::{RootedTree, TailRule};
//!
//! let binary = Arc::new(RootedTree::uniform(6, 2, Some(TailRule::SelfSimilar { period: 1 }))?);
//! let ternary = Arc::new(RootedTree::uniform(5, 3, Some(TailRule::SelfSimilar { period: 1 }))?);
//!
//! // Same moment sequence, different generation cardinalities.
//! let left = ShiftPresentation::with_tree(MomentSequenceSpec::dirichlet(2.0), &binary);
//! let right = ShiftPresentation::with_tree(MomentSequenceSpec::dirichlet(2.0), &ternary);
//!
//! let outcome = decide_nonperiodic(&left, &right)?;
//! assert_eq!(outcome.verdict, Verdict::NotEquivalent);
//! assert!(outcome.cert.is_exact());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

#![forbid(unsafe_code)]

pub mod analytic;
pub mod cert;
pub mod cli;
pub mod equivalence;
pub mod error;
pub mod examples;
pub mod report;
pub mod seqclass;
pub mod shift;
pub mod specfile;
pub mod tol;
pub mod tree;
pub mod wandering;

pub use cert::{Certification, Certified};
pub use error::{AnalyticError, EquivalenceError, SeqError, ShiftError, SpecError, TreeError};
pub use shift::{ShiftOperator, WeightSystem};
pub use tree::RootedTree;
