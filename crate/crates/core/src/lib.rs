//! Model checking and validity tooling for higher-order fixpoint logic with
//! integers.

pub mod chc;
pub mod lts;
pub mod pipeline;
pub mod program;
pub mod semantics;
pub mod smt;
pub mod syntax;
pub mod transforms;

use thiserror::Error;

/// Any error the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] syntax::ParseError),
    #[error(transparent)]
    Type(#[from] syntax::TypeError),
    #[error(transparent)]
    Rewrite(#[from] syntax::RewriteError),
    #[error(transparent)]
    Lts(#[from] lts::LtsError),
    #[error(transparent)]
    Sem(#[from] semantics::SemError),
    #[error(transparent)]
    Elim(#[from] transforms::ElimError),
    #[error(transparent)]
    Abs(#[from] transforms::AbsError),
    #[error(transparent)]
    Entail(#[from] transforms::EntailError),
    #[error(transparent)]
    Preds(#[from] transforms::PredError),
    #[error(transparent)]
    Chc(#[from] chc::ChcError),
    #[error(transparent)]
    Horn(#[from] chc::HornError),
    #[error(transparent)]
    Program(#[from] program::ProgramError),
    #[error(transparent)]
    Smt(#[from] smt::SmtError),
}
