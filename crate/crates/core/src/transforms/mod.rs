//! Formula-to-formula transformations: quantifier encodings, μ-elimination
//! and predicate abstraction. Each is sound in one direction only: a valid
//! output implies a valid input.

mod abstraction;
mod bound;
mod entail;
mod elim;
mod preds;
mod quant;

pub use bound::{bound_schedule, parse_bound, BoundExpr};
pub use elim::{eliminate_mu, eliminate_mu_scaled, ElimError};
pub use quant::desugar_quantifiers;
pub use abstraction::{abstract_predicates, AbsError};
pub use entail::{EntailError, Entailment, SmtEntailment, WindowEntailment};
pub use preds::{parse_predicates, PredError, PredicateSet};
