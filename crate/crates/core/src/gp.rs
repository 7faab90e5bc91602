//! Genetic-programming baselines: the elitist `(1+λ)` mutation-only chain
//! (`λ = 1` gives `(1+1)`) and canonical generational GP with binary
//! tournaments.
//!
//! Evaluations are charged one traversal each and whole generations at a
//! time, so recorded FE values are `1 + gλ` and `500g` exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::BudgetExhausted;
use crate::expr::{
    generate_composition, random_subtree, subtree_crossover, subtree_mutation, ExprTree, GenParams, NodeValues, OperatorSet,
};
use crate::hilbert::{sum_sq_error, BudgetMeter, DataSet};
use crate::Scalar;

/// Loss of a candidate tree, without budget accounting.
pub trait Fitness<T: Scalar> {
    fn loss(&self, tree: &ExprTree<T>) -> T;

    /// The training sample behind a sum-of-squares loss, if any. Lets mutation
    /// chains re-evaluate only the changed path of a tree.
    fn sample(&self) -> Option<&DataSet<T>> {
        None
    }
}

impl<T: Scalar> Fitness<T> for DataSet<T> {
    fn loss(&self, tree: &ExprTree<T>) -> T {
        sum_sq_error(self.targets(), self.eval_uncharged(tree).values())
    }

    fn sample(&self) -> Option<&DataSet<T>> {
        Some(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual<T> {
    pub tree: ExprTree<T>,
    /// Sum of squared errors; +inf for non-finite output.
    pub loss: T,
    /// Traversal count right after this individual was evaluated.
    pub fe_stamp: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// One parent, `λ` mutants, best mutant replaces the parent if not worse.
    Elitist,
    /// Tournament selection, crossover then mutation, full replacement.
    Generational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpConfig {
    pub scheme: Scheme,
    pub population: usize,
    pub offspring: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub tournament: usize,
    pub gen: GenParams,
    pub budget: u64,
    pub stop_below: Option<f64>,
    pub max_generations: Option<usize>,
}

impl GpConfig {
    pub fn one_plus_one() -> Self {
        Self::one_plus_lambda(1)
    }

    pub fn one_plus_lambda(lambda: usize) -> Self {
        Self {
            scheme: Scheme::Elitist,
            population: 1,
            offspring: lambda,
            mutation_rate: 1.0,
            crossover_rate: 0.0,
            tournament: 1,
            gen: GenParams::default(),
            budget: 100_000,
            stop_below: None,
            max_generations: None,
        }
    }

    pub fn canonical() -> Self {
        Self {
            scheme: Scheme::Generational,
            population: 500,
            offspring: 500,
            mutation_rate: 0.1,
            crossover_rate: 0.9,
            tournament: 2,
            gen: GenParams::default(),
            budget: 100_000,
            stop_below: None,
            max_generations: None,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        self.gen.check().map_err(|e| e.to_string())?;
        if self.offspring == 0 || self.population == 0 {
            return Err("population and offspring must be positive".into());
        }
        if self.scheme == Scheme::Generational && (self.tournament == 0 || self.population != self.offspring) {
            return Err("generational GP needs a tournament size and offspring = population".into());
        }
        for r in [self.mutation_rate, self.crossover_rate] {
            if !(0.0..=1.0).contains(&r) {
                return Err(format!("rate {r} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GpTermination {
    Budget,
    Tolerance,
    GenerationCap,
}

/// Population statistics at the end of a generation (0 is initialization).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats<T> {
    pub generation: usize,
    pub fe: u64,
    pub best_loss: T,
    /// Mean over the finite losses of this generation's evaluations.
    pub mean_loss: T,
    pub mean_size: f64,
}

#[derive(Clone, Debug)]
pub struct GpResult<T> {
    pub best: Individual<T>,
    pub trace: Vec<GenerationStats<T>>,
    pub fe: u64,
    pub generations: usize,
    pub termination: GpTermination,
}

impl<T: Scalar> GpResult<T> {
    /// FE at the end of the first generation whose best-so-far loss is below `tol`.
    pub fn first_hit(&self, tol: T) -> Option<u64> {
        self.trace.iter().find(|g| g.best_loss < tol).map(|g| g.fe)
    }
}

/// What an observer sees after each generation.
pub struct GenerationView<'a, T> {
    pub generation: usize,
    pub fe: u64,
    /// Individuals evaluated in this generation.
    pub evaluated: &'a [Individual<T>],
    pub best: &'a Individual<T>,
    /// Best-so-far before this generation; `None` at initialization.
    pub previous_best: Option<&'a Individual<T>>,
}

/// `size` uniform draws with replacement; the lowest loss wins, ties broken uniformly.
pub fn tournament_select<'a, T: Scalar, R: Rng + ?Sized>(
    pop: &'a [Individual<T>],
    size: usize,
    rng: &mut R,
) -> &'a Individual<T> {
    assert!(!pop.is_empty(), "empty population");
    let mut best: Vec<usize> = Vec::with_capacity(size);
    for _ in 0..size.max(1) {
        let i = rng.gen_range(0..pop.len());
        match best.first() {
            None => best.push(i),
            Some(&b) if pop[i].loss < pop[b].loss => {
                best.clear();
                best.push(i);
            }
            Some(&b) if pop[i].loss == pop[b].loss => best.push(i),
            _ => {}
        }
    }
    let pick = if best.len() == 1 { best[0] } else { best[rng.gen_range(0..best.len())] };
    &pop[pick]
}

fn evaluate<T: Scalar, F: Fitness<T> + ?Sized>(
    fitness: &F,
    trees: Vec<ExprTree<T>>,
    meter: &mut BudgetMeter,
) -> Result<Vec<Individual<T>>, BudgetExhausted> {
    meter.charge(trees.len() as u64)?;
    let base = meter.traverses() - trees.len() as u64;
    Ok(trees
        .into_iter()
        .enumerate()
        .map(|(i, tree)| {
            let loss = fitness.loss(&tree).nan_to_inf();
            Individual { tree, loss, fe_stamp: base + i as u64 + 1 }
        })
        .collect())
}

fn stats<T: Scalar>(generation: usize, fe: u64, best: &Individual<T>, evaluated: &[Individual<T>]) -> GenerationStats<T> {
    let finite: Vec<T> = evaluated.iter().map(|i| i.loss).filter(|l| l.is_finite()).collect();
    let mean_loss = if finite.is_empty() {
        T::infinity()
    } else {
        finite.iter().fold(T::zero(), |a, &b| a + b) / T::lit(finite.len() as f64)
    };
    let mean_size = evaluated.iter().map(|i| i.tree.size() as f64).sum::<f64>() / evaluated.len().max(1) as f64;
    GenerationStats { generation, fe, best_loss: best.loss, mean_loss, mean_size }
}

fn argmin<T: Scalar>(pop: &[Individual<T>]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate() {
        if ind.loss < pop[best].loss {
            best = i;
        }
    }
    best
}

struct Loop<'c, T> {
    config: &'c GpConfig,
    meter: BudgetMeter,
    trace: Vec<GenerationStats<T>>,
}

impl<T: Scalar> Loop<'_, T> {
    fn record<O: FnMut(&GenerationView<T>)>(
        &mut self,
        generation: usize,
        evaluated: &[Individual<T>],
        best: &Individual<T>,
        previous_best: Option<&Individual<T>>,
        observer: &mut O,
    ) -> Option<GpTermination> {
        let fe = self.meter.traverses();
        self.trace.push(stats(generation, fe, best, evaluated));
        observer(&GenerationView { generation, fe, evaluated, best, previous_best });
        if self.config.stop_below.is_some_and(|tol| best.loss.to_f64_lossy() < tol) {
            return Some(GpTermination::Tolerance);
        }
        if self.config.max_generations.is_some_and(|cap| generation >= cap) {
            return Some(GpTermination::GenerationCap);
        }
        None
    }
}

/// Runs whichever scheme `config` names.
pub fn run_gp<T, F, R>(fitness: &F, opset: &OperatorSet<T>, config: &GpConfig, rng: &mut R) -> GpResult<T>
where
    T: Scalar,
    F: Fitness<T> + ?Sized,
    R: Rng + ?Sized,
{
    run_gp_observed(fitness, opset, config, rng, |_| {})
}

pub fn run_gp_observed<T, F, R, O>(
    fitness: &F,
    opset: &OperatorSet<T>,
    config: &GpConfig,
    rng: &mut R,
    observer: O,
) -> GpResult<T>
where
    T: Scalar,
    F: Fitness<T> + ?Sized,
    R: Rng + ?Sized,
    O: FnMut(&GenerationView<T>),
{
    match config.scheme {
        Scheme::Elitist => run_one_plus_lambda_observed(fitness, opset, config, rng, observer),
        Scheme::Generational => run_canonical_observed(fitness, opset, config, rng, observer),
    }
}

pub fn run_one_plus_lambda<T, F, R>(fitness: &F, opset: &OperatorSet<T>, config: &GpConfig, rng: &mut R) -> GpResult<T>
where
    T: Scalar,
    F: Fitness<T> + ?Sized,
    R: Rng + ?Sized,
{
    run_one_plus_lambda_observed(fitness, opset, config, rng, |_| {})
}

pub fn run_one_plus_lambda_observed<T, F, R, O>(
    fitness: &F,
    opset: &OperatorSet<T>,
    config: &GpConfig,
    rng: &mut R,
    mut observer: O,
) -> GpResult<T>
where
    T: Scalar,
    F: Fitness<T> + ?Sized,
    R: Rng + ?Sized,
    O: FnMut(&GenerationView<T>),
{
    let mut run = Loop { config, meter: BudgetMeter::new(config.budget), trace: Vec::new() };
    let init = generate_composition(opset, &config.gen, rng);
    let Ok(mut first) = evaluate(fitness, vec![init.clone()], &mut run.meter) else {
        // not even one evaluation fits
        let best = Individual { tree: init, loss: T::infinity(), fe_stamp: 0 };
        return GpResult { best, trace: run.trace, fe: 0, generations: 0, termination: GpTermination::Budget };
    };
    let mut parent = first.pop().expect("one individual");
    let mut cache = fitness.sample().map(|d| NodeValues::new(&parent.tree, d.columns(), d.len()));
    let mut generation = 0;
    let mut termination = run.record(0, std::slice::from_ref(&parent), &parent, None, &mut observer);

    while termination.is_none() {
        let lambda = config.offspring as u64;
        if run.meter.traverses() + lambda > run.meter.limit() {
            termination = Some(GpTermination::Budget);
            break;
        }
        generation += 1;
        let (edits, trees): (Vec<_>, Vec<_>) = (0..config.offspring)
            .map(|_| {
                let at = random_subtree(&parent.tree, rng);
                let fresh = generate_composition(opset, &config.gen, rng);
                let tree = parent.tree.replace_subtree(at, &fresh).expect("fresh handle");
                ((at.index(), fresh), tree)
            })
            .unzip();
        run.meter.charge(lambda).expect("budget checked");
        let base = run.meter.traverses() - lambda;
        let mutants: Vec<_> = trees
            .into_iter()
            .zip(&edits)
            .enumerate()
            .map(|(i, (tree, (at, fresh)))| {
                let loss = match (&cache, fitness.sample()) {
                    (Some(c), Some(data)) => {
                        sum_sq_error(data.targets(), &c.with_replacement(&parent.tree, *at, fresh, data.columns()))
                    }
                    _ => fitness.loss(&tree),
                };
                Individual { tree, loss: loss.nan_to_inf(), fe_stamp: base + i as u64 + 1 }
            })
            .collect();
        let mut mutants = mutants;
        let best = argmin(&mutants);
        if mutants[best].loss <= parent.loss {
            if let (Some(c), Some(data)) = (cache.as_mut(), fitness.sample()) {
                let (at, fresh) = &edits[best];
                c.adopt(&parent.tree, &mutants[best].tree, *at, fresh.len(), data.columns());
            }
            termination = run.record(generation, &mutants, &mutants[best], Some(&parent), &mut observer);
            parent = mutants.swap_remove(best);
        } else {
            termination = run.record(generation, &mutants, &parent, Some(&parent), &mut observer);
        }
    }

    GpResult {
        best: parent,
        fe: run.meter.traverses(),
        trace: run.trace,
        generations: generation,
        termination: termination.expect("loop exits with a reason"),
    }
}

pub fn run_canonical<T, F, R>(fitness: &F, opset: &OperatorSet<T>, config: &GpConfig, rng: &mut R) -> GpResult<T>
where
    T: Scalar,
    F: Fitness<T> + ?Sized,
    R: Rng + ?Sized,
{
    run_canonical_observed(fitness, opset, config, rng, |_| {})
}

pub fn run_canonical_observed<T, F, R, O>(
    fitness: &F,
    opset: &OperatorSet<T>,
    config: &GpConfig,
    rng: &mut R,
    mut observer: O,
) -> GpResult<T>
where
    T: Scalar,
    F: Fitness<T> + ?Sized,
    R: Rng + ?Sized,
    O: FnMut(&GenerationView<T>),
{
    let mut run = Loop { config, meter: BudgetMeter::new(config.budget), trace: Vec::new() };
    let size = config.population as u64;
    if size > run.meter.limit() {
        let best = Individual { tree: ExprTree::constant(T::zero()), loss: T::infinity(), fe_stamp: 0 };
        return GpResult { best, trace: run.trace, fe: 0, generations: 0, termination: GpTermination::Budget };
    }
    let trees = (0..config.population).map(|_| generate_composition(opset, &config.gen, rng)).collect();
    let mut pop = evaluate(fitness, trees, &mut run.meter).expect("budget checked");
    let mut best = pop[argmin(&pop)].clone();
    let mut generation = 0;
    let mut termination = run.record(0, &pop, &best, None, &mut observer);

    while termination.is_none() {
        if run.meter.traverses() + size > run.meter.limit() {
            termination = Some(GpTermination::Budget);
            break;
        }
        generation += 1;
        let trees: Vec<_> = (0..config.offspring)
            .map(|_| {
                let first = tournament_select(&pop, config.tournament, rng);
                let mut child = if rng.gen_bool(config.crossover_rate) {
                    let second = tournament_select(&pop, config.tournament, rng);
                    subtree_crossover(&first.tree, &second.tree, rng)
                } else {
                    first.tree.clone()
                };
                if rng.gen_bool(config.mutation_rate) {
                    child = subtree_mutation(&child, opset, &config.gen, rng);
                }
                child
            })
            .collect();
        pop = evaluate(fitness, trees, &mut run.meter).expect("budget checked");
        let previous = best.clone();
        let champion = &pop[argmin(&pop)];
        if champion.loss < best.loss {
            best = champion.clone();
        }
        termination = run.record(generation, &pop, &best, Some(&previous), &mut observer);
    }

    GpResult {
        best,
        fe: run.meter.traverses(),
        trace: run.trace,
        generations: generation,
        termination: termination.expect("loop exits with a reason"),
    }
}
