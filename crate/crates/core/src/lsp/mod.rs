//! Large-scale polynomial benchmark.
//!
//! The domain is the whole interval `[a, b]`, candidates are `{+, *}` trees
//! over `x` with the constant 1, and the loss is the exact squared `L²`
//! distance to the target, computed by integrating polynomials in closed form.

mod lower;
mod poly;

use std::io;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::BudgetExhausted;
use crate::expr::{generate_composition, ConstantSampler, ExprTree, GenParams, OperatorSet};
use crate::ftg::{assemble_model, run_ftg_in, FtgConfig};
use crate::gp::{run_gp_observed, Fitness, GenerationView, GpConfig};
use crate::hilbert::BudgetMeter;
use crate::projection::InnerProductSpace;
use crate::Scalar;

pub use lower::{tree_to_poly, tree_to_poly_guarded, DEGREE_GUARD};
pub use poly::{l2_inner, poly_add, poly_mul, poly_sub, Poly};

/// `L²(a, b)` restricted to polynomials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L2Interval<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> InnerProductSpace for L2Interval<T> {
    type Scalar = T;
    type Element = Poly<T>;

    fn inner(&self, u: &Poly<T>, v: &Poly<T>) -> T {
        l2_inner(u, v, self.a, self.b)
    }

    fn combine(&self, terms: &[(T, &Poly<T>)]) -> Poly<T> {
        Poly::linear_combination(terms)
    }

    fn sub(&self, u: &Poly<T>, v: &Poly<T>) -> Poly<T> {
        u - v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LspProblem<T> {
    pub a: T,
    pub b: T,
    pub target: Poly<T>,
}

impl<T: Scalar> LspProblem<T> {
    pub fn new(a: T, b: T, target: Poly<T>) -> Result<Self, String> {
        if !(a < b) {
            return Err("need a < b".into());
        }
        if !target.is_finite() {
            return Err("target has non-finite coefficients".into());
        }
        Ok(Self { a, b, target })
    }

    /// `Σ_{i=0}^{k} xⁱ` on `[0, 1]`.
    pub fn geometric(k: usize) -> Self {
        Self { a: T::zero(), b: T::one(), target: Poly::geometric(k) }
    }

    pub fn space(&self) -> L2Interval<T> {
        L2Interval { a: self.a, b: self.b }
    }

    /// `{+, *}` over one variable with the constant 1.
    pub fn operator_set() -> OperatorSet<T> {
        OperatorSet::polynomial().with_constants(ConstantSampler::Choice(vec![T::one()]))
    }

    /// `‖F - p‖²`; +inf when non-finite.
    pub fn distance_sq(&self, p: &Poly<T>) -> T {
        let r = &self.target - p;
        l2_inner(&r, &r, self.a, self.b).nan_to_inf()
    }
}

impl<T: Scalar> Fitness<T> for LspProblem<T> {
    fn loss(&self, tree: &ExprTree<T>) -> T {
        match tree_to_poly(tree) {
            Ok(p) => self.distance_sq(&p),
            Err(_) => T::infinity(),
        }
    }
}

/// Squared `L²` distance of `candidate` to the target. One traversal; +inf
/// for trees that do not lower to a valid polynomial.
pub fn lsp_loss<T: Scalar>(
    candidate: &ExprTree<T>,
    problem: &LspProblem<T>,
    meter: &mut BudgetMeter,
) -> Result<T, BudgetExhausted> {
    meter.charge(1)?;
    Ok(problem.loss(candidate))
}

pub fn span_size<T: Scalar>(p: &Poly<T>) -> usize {
    p.span_size()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LspAlgorithm {
    Ftg,
    OnePlusLambda,
    Canonical,
}

impl std::str::FromStr for LspAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ftg" => Ok(Self::Ftg),
            "gp1l" | "one-plus-lambda" => Ok(Self::OnePlusLambda),
            "canonical" => Ok(Self::Canonical),
            other => Err(format!("unknown LSP algorithm `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LspConfig {
    pub budget: u64,
    pub lambda: usize,
    pub gen: GenParams,
}

impl Default for LspConfig {
    fn default() -> Self {
        Self { budget: 100_000, lambda: 500, gen: GenParams::default() }
    }
}

/// One generation. For FTG a generation is an outer iteration: generation 0
/// is the constant fit and the span is the basis size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LspGeneration {
    pub generation: usize,
    pub fe: u64,
    pub loss: f64,
    pub span: usize,
    pub nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LspTrace {
    pub algorithm: LspAlgorithm,
    pub generations: Vec<LspGeneration>,
    /// Evaluations that beat the previous best loss while spanning more dimensions.
    pub dual_improvements: u64,
}

impl LspTrace {
    pub fn at(&self, generation: usize) -> Option<&LspGeneration> {
        self.generations.iter().take_while(|g| g.generation <= generation).last()
    }

    pub fn last(&self) -> Option<&LspGeneration> {
        self.generations.last()
    }
}

fn span_of<T: Scalar>(tree: &ExprTree<T>) -> usize {
    tree_to_poly(tree).map(|p| p.span_size()).unwrap_or(0)
}

pub fn run_lsp_experiment<T: Scalar, R: Rng + ?Sized>(
    algorithm: LspAlgorithm,
    problem: &LspProblem<T>,
    config: &LspConfig,
    rng: &mut R,
) -> LspTrace {
    let opset = LspProblem::<T>::operator_set();
    match algorithm {
        LspAlgorithm::Ftg => {
            let ftg = FtgConfig { gen: config.gen.clone(), budget: config.budget, ..FtgConfig::default() };
            let space = problem.space();
            let r = run_ftg_in(
                &space,
                &problem.target,
                Poly::constant(T::one()),
                |rng: &mut R| {
                    let tree = generate_composition(&opset, &ftg.gen, rng);
                    // an unlowerable candidate gets a NaN class, which fails the residual test
                    let v = tree_to_poly(&tree).unwrap_or_else(|_| Poly::constant(T::nan()));
                    (tree, v)
                },
                &ftg,
                rng,
            );
            let ones = vec![T::one(); r.basis.len()];
            let generations = r
                .loss_trace
                .iter()
                .map(|p| LspGeneration {
                    generation: p.basis_size - 1,
                    fe: p.traversals,
                    loss: p.loss.to_f64_lossy(),
                    span: p.basis_size,
                    nodes: assemble_model(&r.basis[..p.basis_size], &ones[..p.basis_size]).size(),
                })
                .collect();
            LspTrace { algorithm, generations, dual_improvements: r.basis.len().saturating_sub(1) as u64 }
        }
        LspAlgorithm::OnePlusLambda | LspAlgorithm::Canonical => {
            let mut gp = if algorithm == LspAlgorithm::Canonical {
                GpConfig::canonical()
            } else {
                GpConfig::one_plus_lambda(config.lambda)
            };
            gp.gen = config.gen.clone();
            gp.budget = config.budget;
            let mut generations = Vec::new();
            let mut dual = 0u64;
            run_gp_observed(problem, &opset, &gp, rng, |v: &GenerationView<T>| {
                let best_span = span_of(&v.best.tree);
                if let Some(prev) = v.previous_best {
                    let prev_span = span_of(&prev.tree);
                    dual += v
                        .evaluated
                        .iter()
                        .filter(|i| i.loss < prev.loss && span_of(&i.tree) > prev_span)
                        .count() as u64;
                }
                generations.push(LspGeneration {
                    generation: v.generation,
                    fe: v.fe,
                    loss: v.best.loss.to_f64_lossy(),
                    span: best_span,
                    nodes: v.best.tree.size(),
                });
            });
            LspTrace { algorithm, generations, dual_improvements: dual }
        }
    }
}

/// `run_id,generation,fe,loss,span,nodes`
pub fn write_trace_csv<W: io::Write>(traces: &[LspTrace], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["run_id", "generation", "fe", "loss", "span", "nodes"])?;
    for (run, t) in traces.iter().enumerate() {
        for g in &t.generations {
            w.write_record([
                run.to_string(),
                g.generation.to_string(),
                g.fe.to_string(),
                crate::harness::fmt_f64(g.loss),
                g.span.to_string(),
                g.nodes.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Dual-improvement counter mean and population SD over runs.
pub fn dual_improvement_summary(traces: &[LspTrace]) -> (f64, f64) {
    let xs: Vec<f64> = traces.iter().map(|t| t.dual_improvements as f64).collect();
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `algorithm,degree,runs,dual_mean,dual_sd,final_loss_mean,final_span_mean`
pub fn write_summary_csv<W: io::Write>(traces: &[LspTrace], degree: usize, writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["algorithm", "degree", "runs", "dual_mean", "dual_sd", "final_loss_mean", "final_span_mean"])?;
    let (mean, sd) = dual_improvement_summary(traces);
    let n = traces.len().max(1) as f64;
    let loss = traces.iter().filter_map(|t| t.last()).map(|g| g.loss).sum::<f64>() / n;
    let span = traces.iter().filter_map(|t| t.last()).map(|g| g.span as f64).sum::<f64>() / n;
    let name = traces
        .first()
        .map(|t| serde_json::to_value(t.algorithm).ok().and_then(|v| v.as_str().map(String::from)))
        .flatten()
        .unwrap_or_default();
    w.write_record([
        name,
        degree.to_string(),
        traces.len().to_string(),
        crate::harness::fmt_f64(mean),
        crate::harness::fmt_f64(sd),
        crate::harness::fmt_f64(loss),
        crate::harness::fmt_f64(span),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn save_outputs(traces: &[LspTrace], degree: usize, dir: &Path) -> Result<(), crate::HarnessError> {
    std::fs::create_dir_all(dir)?;
    write_trace_csv(traces, std::fs::File::create(dir.join("lsp_trace.csv"))?)?;
    write_summary_csv(traces, degree, std::fs::File::create(dir.join("lsp_summary.csv"))?)?;
    Ok(())
}
