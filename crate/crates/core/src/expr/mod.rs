//! Expression trees over elementary operators: evaluation, random
//! composition, and the subtree operators used by GP.

mod cache;
mod generate;
mod ops;
mod sexpr;
mod tree;
mod variation;

pub use cache::NodeValues;
pub use generate::{generate_composition, generate_with_draw, GenParams, RampDraw};
pub use ops::{BinaryOp, ConstantSampler, OperatorSet, UnaryOp, DIV_GUARD};
pub use tree::{ExprTree, Node, NodeHandle};
pub use variation::{random_subtree, subtree_crossover, subtree_mutation};

/// Evaluates `tree` at the point `x`.
pub fn eval_tree<T: crate::Scalar>(tree: &ExprTree<T>, x: &[T]) -> T {
    tree.eval(x)
}
