use crate::expr::ops::{BinaryOp, UnaryOp};
use crate::expr::tree::{ExprTree, Node};
use crate::Scalar;

/// Values of every node of a tree on a fixed batch of points, so a tree that
/// differs in one subtree can be evaluated along the changed path only.
/// Results are bitwise identical to [`ExprTree::eval_columns`].
#[derive(Clone, Debug)]
pub struct NodeValues<T> {
    n: usize,
    ends: Vec<usize>,
    values: Vec<T>,
}

fn apply_unary<T: Scalar>(op: UnaryOp, v: &mut [T]) {
    match op {
        UnaryOp::Sin => v.iter_mut().for_each(|a| *a = a.sin()),
        UnaryOp::Cos => v.iter_mut().for_each(|a| *a = a.cos()),
        UnaryOp::Ln => v.iter_mut().for_each(|a| *a = UnaryOp::Ln.apply(*a)),
    }
}

/// `out[j] = op(a[j], out[j])` when `a_first`, else `out[j] = op(out[j], b[j])`.
fn apply_binary<T: Scalar>(op: BinaryOp, out: &mut [T], other: &[T], a_first: bool) {
    let pairs = out.iter_mut().zip(other);
    if a_first {
        pairs.for_each(|(o, &a)| *o = op.apply(a, *o));
    } else {
        pairs.for_each(|(o, &b)| *o = op.apply(*o, b));
    }
}

/// Fills node `i` from its children, which sit at higher indices.
fn fill<T: Scalar>(values: &mut [T], nodes: &[Node<T>], ends: &[usize], i: usize, columns: &[Vec<T>], n: usize) {
    let (head, tail) = values.split_at_mut((i + 1) * n);
    let out = &mut head[i * n..];
    let child = |c: usize| &tail[(c - i - 1) * n..(c - i) * n];
    match nodes[i] {
        Node::Const(c) => out.fill(c),
        Node::Var(v) => out.copy_from_slice(&columns[v][..n]),
        Node::Unary(op) => {
            out.copy_from_slice(child(i + 1));
            apply_unary(op, out);
        }
        Node::Binary(op) => {
            out.copy_from_slice(child(i + 1));
            apply_binary(op, out, child(ends[i + 1]), false);
        }
    }
}

fn table<T: Scalar>(nodes: &[Node<T>], ends: &[usize], columns: &[Vec<T>], n: usize) -> Vec<T> {
    let mut values = vec![T::zero(); nodes.len() * n];
    for i in (0..nodes.len()).rev() {
        fill(&mut values, nodes, ends, i, columns, n);
    }
    values
}

impl<T: Scalar> NodeValues<T> {
    pub fn new(tree: &ExprTree<T>, columns: &[Vec<T>], n: usize) -> Self {
        let ends = tree.subtree_ends();
        let values = table(tree.nodes(), &ends, columns, n);
        Self { n, ends, values }
    }

    pub fn root(&self) -> &[T] {
        &self.values[..self.n]
    }

    /// Strict ancestors of node `at`, root first.
    fn path_to(&self, tree: &ExprTree<T>, at: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut i = 0;
        while i != at {
            path.push(i);
            i = match tree.nodes()[i] {
                Node::Binary(_) if at >= self.ends[i + 1] => self.ends[i + 1],
                _ => i + 1,
            };
        }
        path
    }

    /// Root values of `tree` with the subtree at `at` replaced by `fresh`.
    /// `tree` must be the tree this table was built for.
    pub fn with_replacement(&self, tree: &ExprTree<T>, at: usize, fresh: &ExprTree<T>, columns: &[Vec<T>]) -> Vec<T> {
        let n = self.n;
        let mut cur = fresh.eval_columns(columns, n);
        let node = |c: usize| &self.values[c * n..(c + 1) * n];
        for &a in self.path_to(tree, at).iter().rev() {
            match tree.nodes()[a] {
                Node::Unary(op) => apply_unary(op, &mut cur),
                Node::Binary(op) => {
                    let second = self.ends[a + 1];
                    if at < second {
                        apply_binary(op, &mut cur, node(second), false);
                    } else {
                        apply_binary(op, &mut cur, node(a + 1), true);
                    }
                }
                _ => unreachable!("ancestors are operators"),
            }
        }
        cur
    }

    /// Moves the table from `tree` to `replaced`, which is `tree` with the
    /// subtree at `at` swapped for one of `fresh_len` nodes.
    pub fn adopt(&mut self, tree: &ExprTree<T>, replaced: &ExprTree<T>, at: usize, fresh_len: usize, columns: &[Vec<T>]) {
        let n = self.n;
        let path = self.path_to(tree, at);
        let end = self.ends[at];
        let ends = replaced.subtree_ends();
        let fresh_nodes = &replaced.nodes()[at..at + fresh_len];
        let fresh_ends: Vec<usize> = ends[at..at + fresh_len].iter().map(|e| e - at).collect();
        let fresh = table(fresh_nodes, &fresh_ends, columns, n);
        self.values.splice(at * n..end * n, fresh);
        for &a in path.iter().rev() {
            fill(&mut self.values, replaced.nodes(), &ends, a, columns, n);
        }
        self.ends = ends;
    }
}
