//! Concurrent timed port automata with history-based semantics at
//! bounded horizons.
//!
//! The crate is organized in layers:
//!
//! - [`history`]: timed histories (per-tick named communications over a
//!   fixed channel set), sum, projection, prefix and the dyadic
//!   distance.
//! - [`automata`]: port signatures, reactive transition relations,
//!   bounded execution/schedule/behavior enumeration and the
//!   pulse-drivenness checks.
//! - [`builtins`]: the fair merge, the unbounded buffer (bounded here by
//!   a capacity) and the mutually blocking pair.
//! - [`composition`]: one-to-many composition with a constructive
//!   schedule or a bounded joint search, hiding, and the product
//!   decomposition oracle.
//! - [`denotational`]: pulse-driven step functions, components as
//!   nonempty function sets, the Banach iterator, fixed-point
//!   composition and the automaton-vs-component equivalence check.
//! - [`netdesc`]: a small text format for describing automata and nets.
//! - [`random`]: seeded generators for cross-validation.
//!
//! Enumeration-heavy routines run data-parallel on rayon when the
//! default `parallel` feature is enabled and sequentially otherwise,
//! with identical results.

pub mod automata;
pub mod builtins;
pub mod cli;
pub mod composition;
pub mod denotational;
pub mod history;
pub mod netdesc;
pub mod par;
pub mod random;

pub use automata::{Automaton, PortSignature};
pub use composition::{compose, hide};
pub use history::{ChannelSet, History, Slice};
