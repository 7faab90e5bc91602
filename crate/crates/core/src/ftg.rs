//! Fourier Tree Growing.
//!
//! Grows a basis of random compositions, starting from the constant 1. A
//! candidate `v_k` is kept only when it is not orthogonal to the current
//! residual (`|⟨F - F̂_{k-1}, v_k⟩| > ε₂`) and the bordered Gram matrix
//! passes the `ε₁` inverse check; the model is then re-projected onto the
//! enlarged span. Each accepted element strictly lowers the loss.
//!
//! Traversal accounting per run:
//!
//! * 2 for the initial constant fit (`⟨1, 1⟩` and `⟨F, 1⟩`);
//! * per outer iteration: 1 for the loss check, 1 per residual test, and
//!   `2k` per Gram extension at basis size `k` (failed `ε₁` checks included).

use num_traits::{Float, One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::BudgetExhausted;
use crate::expr::{generate_composition, BinaryOp, ExprTree, GenParams, OperatorSet};
use crate::hilbert::{BudgetMeter, DataSet, SampleSpace};
use crate::linalg::Matrix;
use crate::projection::{invert_checked, CheckedInverse, GramState, InnerProductSpace};
use crate::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct FtgConfig<T> {
    /// Entrywise tolerance of the `G · Ĝ⁻¹ ≈ I` check.
    pub eps1: T,
    /// Residual inner products at or below this count as zero.
    pub eps2: T,
    pub gen: GenParams,
    /// Traversal cap.
    pub budget: u64,
    /// A loss below this counts as exactly zero.
    pub zero_loss: T,
    /// Optional early exit once the loss drops below this value.
    pub stop_below: Option<T>,
    /// Keep a per-extension log (accepted and rejected).
    pub log_gram: bool,
}

impl<T: Scalar> Default for FtgConfig<T> {
    fn default() -> Self {
        Self {
            eps1: T::lit(1e-4),
            eps2: T::lit(1e-3),
            gen: GenParams::default(),
            budget: 100_000,
            zero_loss: T::lit(1e-14),
            stop_below: None,
            log_gram: false,
        }
    }
}

impl<T: Scalar> FtgConfig<T> {
    pub fn check(&self) -> Result<(), String> {
        if !(self.eps1 > T::zero() && self.eps2 > T::zero() && self.zero_loss >= T::zero()) {
            return Err("tolerances must be positive".into());
        }
        if self.budget < 3 {
            return Err("budget must allow at least 3 traversals".into());
        }
        self.gen.check().map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ConvergedZeroLoss,
    Budget,
    Tolerance,
}

/// Loss of `F̂` with `basis_size` elements, checked at traversal `traversals`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossPoint<T> {
    pub basis_size: usize,
    pub loss: T,
    pub traversals: u64,
}

/// One Gram extension attempt.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GramEvent<T> {
    pub k: usize,
    pub cond_estimate: T,
    pub accepted: bool,
    pub traversals: u64,
}

/// Work done in the outer iteration that looked for basis element `k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IterationCost {
    pub k: usize,
    pub loss_checks: u64,
    pub residual_tests: u64,
    pub extensions: u64,
}

impl IterationCost {
    pub fn traversals(&self) -> u64 {
        self.loss_checks + self.residual_tests + self.extensions * 2 * self.k as u64
    }
}

#[derive(Clone, Debug)]
pub struct FtgResult<T> {
    /// `Σ αᵢ vᵢ` as a single tree.
    pub model: ExprTree<T>,
    pub basis: Vec<ExprTree<T>>,
    pub alpha: Vec<T>,
    /// Loss after each accepted extension, as checked by the loop.
    pub loss_trace: Vec<LossPoint<T>>,
    /// Loss of `model`, computed outside the budget.
    pub final_loss: T,
    pub termination: Termination,
    pub traversals: u64,
    pub costs: Vec<IterationCost>,
    pub gram_log: Vec<GramEvent<T>>,
}

impl<T: Scalar> FtgResult<T> {
    pub fn basis_size(&self) -> usize {
        self.basis.len()
    }
}

/// `|⟨residual, v⟩| > ε₂`. One traversal. Non-finite products count as zero.
pub fn independence_test<S: InnerProductSpace>(
    space: &S,
    residual: &S::Element,
    v: &S::Element,
    eps2: S::Scalar,
    meter: &mut BudgetMeter,
) -> Result<bool, BudgetExhausted> {
    meter.charge(1)?;
    let ip = space.inner(residual, v);
    Ok(ip.is_finite() && ip.abs() > eps2)
}

/// Right-leaning sum `(+ (* α₁ v₁) (+ (* α₂ v₂) …))`.
pub fn assemble_model<T: Scalar>(basis: &[ExprTree<T>], alpha: &[T]) -> ExprTree<T> {
    assert_eq!(basis.len(), alpha.len(), "one coefficient per basis element");
    assert!(!basis.is_empty(), "empty basis");
    let term = |i: usize| ExprTree::binary(BinaryOp::Mul, ExprTree::constant(alpha[i]), basis[i].clone());
    let last = basis.len() - 1;
    (0..last).rev().fold(term(last), |acc, i| ExprTree::binary(BinaryOp::Add, term(i), acc))
}

struct Run<'a, S: InnerProductSpace> {
    space: &'a S,
    target: &'a S::Element,
    state: GramState<S>,
    trees: Vec<ExprTree<S::Scalar>>,
    fhat: S::Element,
}

impl<S: InnerProductSpace> Run<'_, S> {
    fn loss_of_fhat(&self) -> S::Scalar {
        let r = self.space.sub(self.target, &self.fhat);
        self.space.inner(&r, &r).nan_to_inf()
    }
}

/// The loop in an arbitrary inner-product space.
///
/// `constant` is the class of the constant function 1 and `candidate` draws
/// a random composition together with its class.
pub fn run_ftg_in<S, R, G>(
    space: &S,
    target: &S::Element,
    constant: S::Element,
    mut candidate: G,
    config: &FtgConfig<S::Scalar>,
    rng: &mut R,
) -> FtgResult<S::Scalar>
where
    S: InnerProductSpace,
    R: Rng + ?Sized,
    G: FnMut(&mut R) -> (ExprTree<S::Scalar>, S::Element),
{
    let mut meter = BudgetMeter::new(config.budget);
    let mut loss_trace = Vec::new();
    let mut costs = Vec::new();
    let mut gram_log = Vec::new();

    let mut run = Run {
        space,
        target,
        state: GramState::new(),
        trees: Vec::new(),
        fhat: constant.clone(),
    };

    // F̂₁ = ⟨1,1⟩⁻¹ ⟨F,1⟩ · 1
    let first = run.state.extend(space, constant, target, &mut meter);
    let termination = 'outer: {
        let Ok(ext) = first else { break 'outer Termination::Budget };
        match invert_checked(&ext.gram, config.eps1) {
            Ok(inv) => run.state.accept(ext, inv),
            // ⟨1,1⟩ vanishes only on a degenerate domain; fall back to α = 0
            Err(rej) => run.state.accept(
                ext,
                CheckedInverse {
                    inverse: Matrix::zeros(1, 1),
                    cond_estimate: rej.cond_estimate,
                    max_deviation: rej.max_deviation,
                },
            ),
        }
        run.trees.push(ExprTree::constant(S::Scalar::one()));
        run.state.solve_coefficients();
        run.state.refine(space, target);
        run.fhat = run.state.projection(space);

        loop {
            let k = run.state.len() + 1;
            let mut cost = IterationCost { k, ..Default::default() };

            cost.loss_checks += 1;
            if meter.charge(1).is_err() {
                costs.push(cost);
                break 'outer Termination::Budget;
            }
            let loss = run.loss_of_fhat();
            loss_trace.push(LossPoint { basis_size: k - 1, loss, traversals: meter.traverses() });
            if loss < config.zero_loss {
                costs.push(cost);
                break 'outer Termination::ConvergedZeroLoss;
            }
            if config.stop_below.is_some_and(|tol| loss < tol) {
                costs.push(cost);
                break 'outer Termination::Tolerance;
            }

            let residual = space.sub(target, &run.fhat);
            loop {
                let (tree, v) = candidate(rng);
                cost.residual_tests += 1;
                match independence_test(space, &residual, &v, config.eps2, &mut meter) {
                    Err(_) => {
                        costs.push(cost);
                        break 'outer Termination::Budget;
                    }
                    Ok(false) => continue,
                    Ok(true) => {}
                }
                cost.extensions += 1;
                let Ok(ext) = run.state.extend(space, v, target, &mut meter) else {
                    costs.push(cost);
                    break 'outer Termination::Budget;
                };
                match invert_checked(&ext.gram, config.eps1) {
                    Ok(inv) => {
                        if config.log_gram {
                            gram_log.push(GramEvent {
                                k,
                                cond_estimate: inv.cond_estimate,
                                accepted: true,
                                traversals: meter.traverses(),
                            });
                        }
                        run.state.accept(ext, inv);
                        run.trees.push(tree);
                        break;
                    }
                    Err(rej) => {
                        if config.log_gram {
                            gram_log.push(GramEvent {
                                k,
                                cond_estimate: rej.cond_estimate,
                                accepted: false,
                                traversals: meter.traverses(),
                            });
                        }
                    }
                }
            }
            costs.push(cost);
            run.state.solve_coefficients();
            run.state.refine(space, target);
            run.fhat = run.state.projection(space);
        }
    };

    let alpha = run.state.alpha().to_vec();
    let (model, final_loss) = if run.trees.is_empty() {
        (ExprTree::constant(S::Scalar::zero()), S::Scalar::infinity())
    } else {
        (assemble_model(&run.trees, &alpha), run.loss_of_fhat())
    };
    FtgResult {
        model,
        basis: run.trees,
        alpha,
        loss_trace,
        final_loss,
        termination,
        traversals: meter.traverses().min(config.budget),
        costs,
        gram_log,
    }
}

/// FTG on a finite training set.
pub fn run_ftg<T: Scalar, R: Rng + ?Sized>(
    data: &DataSet<T>,
    opset: &OperatorSet<T>,
    config: &FtgConfig<T>,
    rng: &mut R,
) -> FtgResult<T> {
    let space = SampleSpace::new();
    let target = data.target_vector();
    let constant = data.eval_uncharged(&ExprTree::constant(T::one()));
    run_ftg_in(
        &space,
        &target,
        constant,
        |rng: &mut R| {
            let tree = generate_composition(opset, &config.gen, rng);
            let v = data.eval_uncharged(&tree);
            (tree, v)
        },
        config,
        rng,
    )
}
