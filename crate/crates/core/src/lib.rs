//! Task planning for tabletop stack rearrangement with aggregate topple
//! and scoop transitions.
//!
//! The pipeline: an [`domain::Instance`] is mapped onto a gadget graph
//! ([`gadget`]), compiled into a time-expanded flow program ([`flow`]),
//! solved by an anytime branch-and-bound ([`solver`]), turned back into an
//! action sequence ([`extract`]) and finally executed under a stochastic
//! landing model ([`exec_sim`]). [`bench`] drives the experiment protocols.

pub mod bench;
pub mod domain;
pub mod error;
pub mod exec_sim;
pub mod extract;
pub mod flow;
pub mod gadget;
pub mod scoop;
pub mod solver;

pub use error::{BenchError, DomainError, ExtractError, FlowError, GadgetError, Violation};
