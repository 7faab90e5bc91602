use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ExprError;
use crate::Scalar;

/// Denominators at or below this magnitude make protected division return 1.
pub const DIV_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnaryOp {
    Sin,
    Cos,
    /// Protected logarithm: `ln|x|`, with `ln 0 = 0`.
    Ln,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    /// Protected division: 1 when `|den| <= 1e-12`.
    Div,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 3] = [UnaryOp::Sin, UnaryOp::Cos, UnaryOp::Ln];

    #[inline]
    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            UnaryOp::Sin => x.sin(),
            UnaryOp::Cos => x.cos(),
            UnaryOp::Ln => {
                if x == T::zero() {
                    T::zero()
                } else {
                    x.abs().ln()
                }
            }
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Ln => "ln",
        }
    }
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 4] = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div];

    #[inline]
    pub fn apply<T: Scalar>(self, a: T, b: T) -> T {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b.abs() <= T::lit(DIV_GUARD) {
                    T::one()
                } else {
                    a / b
                }
            }
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }
}

impl fmt::Display for UnaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl fmt::Display for BinaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for UnaryOp {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UnaryOp::ALL
            .into_iter()
            .find(|op| op.symbol() == s)
            .ok_or_else(|| ExprError::UnknownOperator(s.to_string()))
    }
}

impl FromStr for BinaryOp {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BinaryOp::ALL
            .into_iter()
            .find(|op| op.symbol() == s)
            .ok_or_else(|| ExprError::UnknownOperator(s.to_string()))
    }
}

/// Distribution for ephemeral constants drawn at generation time.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstantSampler<T> {
    /// Uniform on the closed interval `[lo, hi]`.
    Uniform { lo: T, hi: T },
    /// Uniform choice from a fixed list.
    Choice(Vec<T>),
}

impl<T: Scalar> ConstantSampler<T> {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match self {
            ConstantSampler::Uniform { lo, hi } => {
                if lo == hi {
                    *lo
                } else {
                    rng.gen_range(*lo..=*hi)
                }
            }
            ConstantSampler::Choice(values) => values[rng.gen_range(0..values.len())],
        }
    }
}

impl<T: Scalar> Default for ConstantSampler<T> {
    fn default() -> Self {
        ConstantSampler::Uniform { lo: -T::one(), hi: T::one() }
    }
}

/// The elementary operators a search may compose: unary and binary
/// operators, `n_vars` coordinate projections and a constant sampler.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSet<T> {
    unary: Vec<UnaryOp>,
    binary: Vec<BinaryOp>,
    n_vars: usize,
    constants: ConstantSampler<T>,
}

/// One draw from the operator set: an internal operator or a terminal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Internal {
    Unary(UnaryOp),
    Binary(BinaryOp),
}

impl<T: Scalar> OperatorSet<T> {
    pub fn new(
        unary: Vec<UnaryOp>,
        binary: Vec<BinaryOp>,
        n_vars: usize,
        constants: ConstantSampler<T>,
    ) -> Result<Self, ExprError> {
        if n_vars == 0 {
            return Err(ExprError::InvalidOperatorSet("at least one variable is required".into()));
        }
        if unary.is_empty() && binary.is_empty() {
            return Err(ExprError::InvalidOperatorSet("no internal operators".into()));
        }
        match &constants {
            ConstantSampler::Uniform { lo, hi } if !(lo <= hi) => {
                return Err(ExprError::InvalidOperatorSet("constant range is empty".into()))
            }
            ConstantSampler::Choice(v) if v.is_empty() => {
                return Err(ExprError::InvalidOperatorSet("constant list is empty".into()))
            }
            _ => {}
        }
        Ok(Self { unary, binary, n_vars, constants })
    }

    /// `{+, -, *, /}` with `{sin, cos, ln}` over one variable, constants from `U[-1, 1]`.
    pub fn conventional() -> Self {
        Self::new(UnaryOp::ALL.to_vec(), BinaryOp::ALL.to_vec(), 1, ConstantSampler::default())
            .expect("valid operator set")
    }

    /// `{+, *}` over one variable, no unary operators.
    pub fn polynomial() -> Self {
        Self::new(vec![], vec![BinaryOp::Add, BinaryOp::Mul], 1, ConstantSampler::default())
            .expect("valid operator set")
    }

    pub fn unary(&self) -> &[UnaryOp] {
        &self.unary
    }

    pub fn binary(&self) -> &[BinaryOp] {
        &self.binary
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn constants(&self) -> &ConstantSampler<T> {
        &self.constants
    }

    pub fn with_constants(mut self, constants: ConstantSampler<T>) -> Self {
        self.constants = constants;
        self
    }

    /// Uniform over `U ∪ B`.
    pub(crate) fn sample_internal<R: Rng + ?Sized>(&self, rng: &mut R) -> Internal {
        let idx = rng.gen_range(0..self.unary.len() + self.binary.len());
        if idx < self.unary.len() {
            Internal::Unary(self.unary[idx])
        } else {
            Internal::Binary(self.binary[idx - self.unary.len()])
        }
    }

    /// Projection or constant with equal probability, then uniform within.
    pub(crate) fn sample_terminal<R: Rng + ?Sized>(&self, rng: &mut R) -> super::Node<T> {
        if rng.gen_bool(0.5) {
            super::Node::Var(rng.gen_range(0..self.n_vars))
        } else {
            super::Node::Const(self.constants.sample(rng))
        }
    }
}
