//! Symbolic regression by Fourier Tree Growing.
//!
//! Function classes are represented by their values on the training set, so
//! fitting becomes a least-squares projection onto the span of randomly grown
//! expression trees. Genetic-programming baselines, a polynomial benchmark
//! with an exact `L²` inner product, and an experiment harness are included.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod error;
pub mod expr;
pub mod ftg;
pub mod gp;
pub mod harness;
pub mod hilbert;
pub mod linalg;
pub mod lsp;
pub mod projection;
mod scalar;

pub use error::{BudgetExhausted, ExprError, HarnessError, HilbertError, PolyError};
pub use scalar::Scalar;

pub type Tree = expr::ExprTree<f64>;
pub type Ops = expr::OperatorSet<f64>;
pub type Data = hilbert::DataSet<f64>;
pub type Vector = hilbert::EvalVector<f64>;
pub type Polynomial = lsp::Poly<f64>;
pub type FtgOptions = ftg::FtgConfig<f64>;
pub type FtgOutcome = ftg::FtgResult<f64>;
pub type GpOutcome = gp::GpResult<f64>;
