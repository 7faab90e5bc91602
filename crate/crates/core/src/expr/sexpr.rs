//! Canonical s-expression text form, e.g. `(+ (sin x0) 0.5)`.

use std::fmt;
use std::str::FromStr;

use crate::error::ExprError;
use crate::expr::ops::{BinaryOp, UnaryOp};
use crate::expr::tree::{ExprTree, Node};
use crate::Scalar;

impl<T: Scalar> fmt::Display for ExprTree<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // prefix order: open a paren per operator, close when its operands are done
        let mut open: Vec<usize> = Vec::new();
        for (i, node) in self.nodes().iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match node {
                Node::Unary(op) => write!(f, "({op}")?,
                Node::Binary(op) => write!(f, "({op}")?,
                Node::Var(v) => write!(f, "x{v}")?,
                Node::Const(c) => write!(f, "{c}")?,
            }
            if node.arity() > 0 {
                open.push(node.arity());
                continue;
            }
            while let Some(top) = open.last_mut() {
                *top -= 1;
                if *top == 0 {
                    open.pop();
                    f.write_str(")")?;
                } else {
                    break;
                }
            }
        }
        Ok(())
    }
}

fn tokenize(s: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | ')' => {
                if let Some(st) = start.take() {
                    tokens.push(&s[st..i]);
                }
                tokens.push(&s[i..i + 1]);
            }
            c if c.is_whitespace() => {
                if let Some(st) = start.take() {
                    tokens.push(&s[st..i]);
                }
            }
            _ => {
                if start.is_none() {
                    start = Some(i);
                }
            }
        }
    }
    if let Some(st) = start {
        tokens.push(&s[st..]);
    }
    tokens
}

fn parse_atom<T: Scalar>(tok: &str) -> Result<Node<T>, ExprError> {
    if let Some(idx) = tok.strip_prefix('x') {
        return idx
            .parse::<usize>()
            .map(Node::Var)
            .map_err(|_| ExprError::Parse(format!("bad variable `{tok}`")));
    }
    tok.parse::<T>()
        .map(Node::Const)
        .map_err(|_| ExprError::Parse(format!("bad token `{tok}`")))
}

impl<T: Scalar> FromStr for ExprTree<T> {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens = tokenize(s);
        let mut nodes = Vec::new();
        // operand counts still expected by each open paren
        let mut open: Vec<usize> = Vec::new();
        let mut iter = tokens.into_iter().peekable();
        while let Some(tok) = iter.next() {
            match tok {
                "(" => {
                    let head = iter.next().ok_or_else(|| ExprError::Parse("unexpected end after `(`".into()))?;
                    if let Ok(op) = head.parse::<UnaryOp>() {
                        nodes.push(Node::Unary(op));
                        open.push(1);
                    } else if let Ok(op) = head.parse::<BinaryOp>() {
                        nodes.push(Node::Binary(op));
                        open.push(2);
                    } else {
                        return Err(ExprError::UnknownOperator(head.to_string()));
                    }
                }
                ")" => match open.pop() {
                    Some(0) => {}
                    Some(_) => return Err(ExprError::Parse("operator is missing operands".into())),
                    None => return Err(ExprError::Parse("unbalanced `)`".into())),
                },
                atom => {
                    nodes.push(parse_atom(atom)?);
                    if let Some(top) = open.last_mut() {
                        if *top == 0 {
                            return Err(ExprError::Parse("too many operands".into()));
                        }
                        *top -= 1;
                    }
                }
            }
            // a closed operator counts as an operand of its parent
            if tok == ")" {
                if let Some(top) = open.last_mut() {
                    if *top == 0 {
                        return Err(ExprError::Parse("too many operands".into()));
                    }
                    *top -= 1;
                }
            }
        }
        if !open.is_empty() {
            return Err(ExprError::Parse("unbalanced `(`".into()));
        }
        ExprTree::from_prefix(nodes)
    }
}
