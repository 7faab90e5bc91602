use rand::Rng;

use crate::expr::generate::{generate_composition, GenParams};
use crate::expr::ops::OperatorSet;
use crate::expr::tree::{ExprTree, NodeHandle};
use crate::Scalar;

/// Uniformly chosen node of `tree`.
pub fn random_subtree<T: Scalar, R: Rng + ?Sized>(tree: &ExprTree<T>, rng: &mut R) -> NodeHandle {
    tree.handle(rng.gen_range(0..tree.size())).expect("index in range")
}

/// `a` with a uniformly chosen subtree replaced by a uniformly chosen
/// subtree of `b`.
pub fn subtree_crossover<T: Scalar, R: Rng + ?Sized>(a: &ExprTree<T>, b: &ExprTree<T>, rng: &mut R) -> ExprTree<T> {
    let at = random_subtree(a, rng);
    let donor = b.subtree(random_subtree(b, rng).index());
    a.replace_subtree(at, &donor).expect("fresh handle")
}

/// Uniform subtree mutation: a uniformly chosen node is replaced by a fresh
/// random composition.
pub fn subtree_mutation<T: Scalar, R: Rng + ?Sized>(
    tree: &ExprTree<T>,
    opset: &OperatorSet<T>,
    params: &GenParams,
    rng: &mut R,
) -> ExprTree<T> {
    let at = random_subtree(tree, rng);
    let fresh = generate_composition(opset, params, rng);
    tree.replace_subtree(at, &fresh).expect("fresh handle")
}
