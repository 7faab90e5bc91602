//! Randomized composition of elementary operators.
//!
//! An adaptation of ramped half-and-half: per call, draw `p̃ ∈ {p, 1}` and a
//! nesting bound `ũ ∈ {l, …, u}` uniformly, then fill the tree breadth-first.
//! A slot at depth `d` becomes
//!
//! * an operator from `U ∪ B` (uniformly) if `d < l`;
//! * an operator with probability `p̃`, else a terminal, if `l ≤ d < ũ`;
//! * a terminal if `d ≥ ũ`.
//!
//! Terminals pick projection vs. constant with equal probability and then
//! uniformly within the chosen family. With `p̃ = 1` this is the "full"
//! method; otherwise it is "grow".

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ExprError;
use crate::expr::ops::{Internal, OperatorSet};
use crate::expr::tree::{ExprTree, Node};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    /// Probability of an operator between the two depth bounds.
    pub p: f64,
    /// Minimal nesting depth.
    pub l: usize,
    /// Maximal nesting depth.
    pub u: usize,
}

impl GenParams {
    pub fn new(p: f64, l: usize, u: usize) -> Result<Self, ExprError> {
        let params = Self { p, l, u };
        params.check()?;
        Ok(params)
    }

    pub fn check(&self) -> Result<(), ExprError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(ExprError::InvalidParams(format!("p = {} outside [0, 1]", self.p)));
        }
        if self.l < 1 || self.l > self.u {
            return Err(ExprError::InvalidParams(format!("need 1 <= l <= u, got l = {}, u = {}", self.l, self.u)));
        }
        Ok(())
    }
}

impl Default for GenParams {
    fn default() -> Self {
        Self { p: 0.5, l: 1, u: 9 }
    }
}

/// Per-call parameters drawn at the start of a composition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RampDraw {
    pub p: f64,
    pub u: usize,
}

impl RampDraw {
    pub fn sample<R: Rng + ?Sized>(params: &GenParams, rng: &mut R) -> Self {
        let p = if rng.gen_bool(0.5) { params.p } else { 1.0 };
        let u = rng.gen_range(params.l..=params.u);
        Self { p, u }
    }
}

enum Slot<T> {
    Op(Internal),
    Leaf(Node<T>),
}

fn sample_slot<T: Scalar, R: Rng + ?Sized>(
    opset: &OperatorSet<T>,
    draw: RampDraw,
    l: usize,
    depth: usize,
    rng: &mut R,
) -> Slot<T> {
    let internal = if depth < l {
        true
    } else if depth < draw.u {
        rng.gen_bool(draw.p)
    } else {
        false
    };
    if internal {
        Slot::Op(opset.sample_internal(rng))
    } else {
        Slot::Leaf(opset.sample_terminal(rng))
    }
}

/// Draws a random composition.
pub fn generate_composition<T: Scalar, R: Rng + ?Sized>(
    opset: &OperatorSet<T>,
    params: &GenParams,
    rng: &mut R,
) -> ExprTree<T> {
    let draw = RampDraw::sample(params, rng);
    generate_with_draw(opset, params.l, draw, rng)
}

/// Breadth-first construction for fixed `p̃` and `ũ`.
pub fn generate_with_draw<T: Scalar, R: Rng + ?Sized>(
    opset: &OperatorSet<T>,
    l: usize,
    draw: RampDraw,
    rng: &mut R,
) -> ExprTree<T> {
    // slots in BFS order, each with its depth and child slot indices
    let mut slots: Vec<(Slot<T>, usize)> = vec![(sample_slot(opset, draw, l, 0, rng), 0)];
    let mut children: Vec<[usize; 2]> = vec![[0, 0]];
    let mut i = 0;
    while i < slots.len() {
        let depth = slots[i].1;
        let arity = match &slots[i].0 {
            Slot::Op(Internal::Unary(_)) => 1,
            Slot::Op(Internal::Binary(_)) => 2,
            Slot::Leaf(_) => 0,
        };
        for c in 0..arity {
            let j = slots.len();
            children[i][c] = j;
            slots.push((sample_slot(opset, draw, l, depth + 1, rng), depth + 1));
            children.push([0, 0]);
        }
        i += 1;
    }

    let mut nodes = Vec::with_capacity(slots.len());
    let mut stack = vec![0usize];
    while let Some(s) = stack.pop() {
        match &slots[s].0 {
            Slot::Op(Internal::Unary(op)) => {
                nodes.push(Node::Unary(*op));
                stack.push(children[s][0]);
            }
            Slot::Op(Internal::Binary(op)) => {
                nodes.push(Node::Binary(*op));
                stack.push(children[s][1]);
                stack.push(children[s][0]);
            }
            Slot::Leaf(leaf) => nodes.push(*leaf),
        }
    }
    ExprTree::from_prefix(nodes).expect("generator builds proper trees")
}
