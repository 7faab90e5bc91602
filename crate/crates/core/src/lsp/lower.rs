use crate::error::PolyError;
use crate::expr::{BinaryOp, ExprTree, Node};
use crate::lsp::poly::Poly;
use crate::Scalar;

/// Largest degree a lowered polynomial may reach.
pub const DEGREE_GUARD: usize = 2000;

/// Lowers a `{+, -, *}` tree over `x0` to normal form.
pub fn tree_to_poly<T: Scalar>(tree: &ExprTree<T>) -> Result<Poly<T>, PolyError> {
    tree_to_poly_guarded(tree, DEGREE_GUARD)
}

pub fn tree_to_poly_guarded<T: Scalar>(tree: &ExprTree<T>, max_degree: usize) -> Result<Poly<T>, PolyError> {
    let mut stack: Vec<Poly<T>> = Vec::new();
    for node in tree.nodes().iter().rev() {
        let p = match node {
            Node::Const(c) => Poly::constant(*c),
            Node::Var(0) => Poly::monomial(1),
            Node::Var(i) => return Err(PolyError::Variable(*i)),
            Node::Unary(op) => return Err(PolyError::Unsupported(op.symbol().into())),
            Node::Binary(op) => {
                let a = stack.pop().expect("valid prefix tree");
                let b = stack.pop().expect("valid prefix tree");
                match op {
                    BinaryOp::Add => &a + &b,
                    BinaryOp::Sub => &a - &b,
                    BinaryOp::Mul => {
                        let degree = a.degree().unwrap_or(0) + b.degree().unwrap_or(0);
                        if degree > max_degree {
                            return Err(PolyError::DegreeExceeded { degree, max: max_degree });
                        }
                        &a * &b
                    }
                    BinaryOp::Div => return Err(PolyError::Unsupported(op.symbol().into())),
                }
            }
        };
        stack.push(p);
    }
    let p = stack.pop().expect("non-empty tree");
    if !p.is_finite() {
        return Err(PolyError::NonFinite);
    }
    Ok(p)
}
