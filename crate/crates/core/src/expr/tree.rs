use std::ops::Range;

use crate::error::ExprError;
use crate::expr::ops::{BinaryOp, UnaryOp};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Node<T> {
    Unary(UnaryOp),
    Binary(BinaryOp),
    /// Coordinate projection `x_i`.
    Var(usize),
    Const(T),
}

impl<T> Node<T> {
    #[inline]
    pub fn arity(&self) -> usize {
        match self {
            Node::Unary(_) => 1,
            Node::Binary(_) => 2,
            Node::Var(_) | Node::Const(_) => 0,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.arity() == 0
    }
}

/// Expression tree stored as a flat prefix-order node list.
///
/// Every subtree occupies a contiguous range of the list, which keeps
/// subtree selection and replacement to a splice.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprTree<T> {
    nodes: Vec<Node<T>>,
}

/// Addresses one node of a particular tree. Handles carry the size of the
/// tree they were taken from; using one on a tree of another size fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeHandle {
    index: usize,
    tree_size: usize,
}

impl NodeHandle {
    pub fn index(&self) -> usize {
        self.index
    }
}

impl<T: Scalar> ExprTree<T> {
    /// Builds a tree from prefix-order nodes, checking arity consistency.
    pub fn from_prefix(nodes: Vec<Node<T>>) -> Result<Self, ExprError> {
        let mut need = 1usize;
        for (i, node) in nodes.iter().enumerate() {
            if need == 0 {
                return Err(ExprError::Malformed(format!("trailing nodes after position {i}")));
            }
            need = need - 1 + node.arity();
        }
        if need != 0 || nodes.is_empty() {
            return Err(ExprError::Malformed("missing operands".into()));
        }
        Ok(Self { nodes })
    }

    pub fn constant(c: T) -> Self {
        Self { nodes: vec![Node::Const(c)] }
    }

    pub fn var(i: usize) -> Self {
        Self { nodes: vec![Node::Var(i)] }
    }

    pub fn unary(op: UnaryOp, child: ExprTree<T>) -> Self {
        let mut nodes = Vec::with_capacity(child.len() + 1);
        nodes.push(Node::Unary(op));
        nodes.extend(child.nodes);
        Self { nodes }
    }

    pub fn binary(op: BinaryOp, left: ExprTree<T>, right: ExprTree<T>) -> Self {
        let mut nodes = Vec::with_capacity(left.len() + right.len() + 1);
        nodes.push(Node::Binary(op));
        nodes.extend(left.nodes);
        nodes.extend(right.nodes);
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Longest root-to-leaf path, counted in edges.
    pub fn depth(&self) -> usize {
        // (remaining children, depth) for each open operator
        let mut open: Vec<(usize, usize)> = Vec::new();
        let mut max_depth = 0;
        for node in &self.nodes {
            let depth = open.len();
            max_depth = max_depth.max(depth);
            if node.arity() > 0 {
                open.push((node.arity(), depth));
            } else {
                while let Some(top) = open.last_mut() {
                    top.0 -= 1;
                    if top.0 == 0 {
                        open.pop();
                    } else {
                        break;
                    }
                }
            }
        }
        max_depth
    }

    /// Largest variable index used plus one (0 for variable-free trees).
    pub fn var_bound(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Var(i) => Some(i + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Node-index range of the subtree rooted at `start`.
    pub fn subtree_range(&self, start: usize) -> Range<usize> {
        let mut need = 1usize;
        let mut end = start;
        while need > 0 {
            need = need - 1 + self.nodes[end].arity();
            end += 1;
        }
        start..end
    }

    /// End of the subtree range of every node.
    pub fn subtree_ends(&self) -> Vec<usize> {
        let mut ends = vec![0; self.nodes.len()];
        for i in (0..self.nodes.len()).rev() {
            ends[i] = match self.nodes[i].arity() {
                0 => i + 1,
                1 => ends[i + 1],
                _ => ends[ends[i + 1]],
            };
        }
        ends
    }

    pub fn subtree(&self, start: usize) -> ExprTree<T> {
        Self { nodes: self.nodes[self.subtree_range(start)].to_vec() }
    }

    pub fn handle(&self, index: usize) -> Result<NodeHandle, ExprError> {
        if index < self.nodes.len() {
            Ok(NodeHandle { index, tree_size: self.nodes.len() })
        } else {
            Err(ExprError::StaleHandle { index, size: self.nodes.len() })
        }
    }

    /// Returns a copy of `self` with the subtree at `handle` replaced.
    pub fn replace_subtree(&self, handle: NodeHandle, new: &ExprTree<T>) -> Result<ExprTree<T>, ExprError> {
        if handle.tree_size != self.nodes.len() || handle.index >= self.nodes.len() {
            return Err(ExprError::StaleHandle { index: handle.index, size: self.nodes.len() });
        }
        let range = self.subtree_range(handle.index);
        let mut nodes = Vec::with_capacity(self.nodes.len() - range.len() + new.len());
        nodes.extend_from_slice(&self.nodes[..range.start]);
        nodes.extend_from_slice(&new.nodes);
        nodes.extend_from_slice(&self.nodes[range.end..]);
        Ok(Self { nodes })
    }

    /// Evaluates at one point. Total: protected operators never fail, and
    /// non-finite intermediates propagate.
    pub fn eval(&self, x: &[T]) -> T {
        let mut stack: Vec<T> = Vec::with_capacity(16);
        for node in self.nodes.iter().rev() {
            match *node {
                Node::Const(c) => stack.push(c),
                Node::Var(i) => stack.push(x[i]),
                Node::Unary(op) => {
                    let a = stack.pop().expect("proper tree");
                    stack.push(op.apply(a));
                }
                Node::Binary(op) => {
                    let a = stack.pop().expect("proper tree");
                    let b = stack.pop().expect("proper tree");
                    stack.push(op.apply(a, b));
                }
            }
        }
        stack.pop().expect("proper tree")
    }

    /// Evaluates on a batch of points, given column-major coordinates
    /// (`columns[i][j]` is coordinate `i` of point `j`).
    pub fn eval_columns(&self, columns: &[Vec<T>], n_points: usize) -> Vec<T> {
        let n = n_points;
        // operand stack of n-wide slots, flattened
        let mut buf: Vec<T> = Vec::with_capacity(16 * n);
        for node in self.nodes.iter().rev() {
            match *node {
                Node::Const(c) => buf.resize(buf.len() + n, c),
                Node::Var(i) => buf.extend_from_slice(&columns[i][..n]),
                Node::Unary(op) => {
                    let top = buf.len() - n;
                    let v = &mut buf[top..];
                    match op {
                        UnaryOp::Sin => v.iter_mut().for_each(|a| *a = a.sin()),
                        UnaryOp::Cos => v.iter_mut().for_each(|a| *a = a.cos()),
                        UnaryOp::Ln => v.iter_mut().for_each(|a| *a = UnaryOp::Ln.apply(*a)),
                    }
                }
                Node::Binary(op) => {
                    let top = buf.len() - n;
                    let (rest, a) = buf.split_at_mut(top);
                    let b = &mut rest[top - n..];
                    let pairs = b.iter_mut().zip(a.iter());
                    match op {
                        BinaryOp::Add => pairs.for_each(|(b, &a)| *b = a + *b),
                        BinaryOp::Sub => pairs.for_each(|(b, &a)| *b = a - *b),
                        BinaryOp::Mul => pairs.for_each(|(b, &a)| *b = a * *b),
                        BinaryOp::Div => pairs.for_each(|(b, &a)| *b = BinaryOp::Div.apply(a, *b)),
                    }
                    buf.truncate(top);
                }
            }
        }
        buf
    }

    /// Checks the structural invariants: arities consistent, variables below `n_vars`.
    pub fn validate(&self, n_vars: usize) -> Result<(), ExprError> {
        Self::from_prefix(self.nodes.clone())?;
        if self.var_bound() > n_vars {
            return Err(ExprError::VarOutOfRange { index: self.var_bound() - 1, n_vars });
        }
        Ok(())
    }
}
