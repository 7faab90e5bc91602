//! Every module invariant as a property check over a fixed number of cases.
//!
//! Each function drives a deterministic proptest runner and returns the
//! failure description, so the same check backs a regular test and the
//! acceptance summary.

use std::fmt::Debug;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use ftg::expr::{
    eval_tree, generate_composition, subtree_crossover, subtree_mutation, BinaryOp, ExprTree, GenParams, Node,
    OperatorSet,
};
use ftg::ftg::{run_ftg, FtgConfig};
use ftg::gp::{run_canonical_observed, run_one_plus_lambda, Fitness, GenerationView, GpConfig};
use ftg::harness::{self, Algorithm};
use ftg::hilbert::{evaluate_class, BudgetMeter, DataSet, EvalVector, SampleSpace};
use ftg::linalg::svd;
use ftg::lsp::{l2_inner, tree_to_poly, Poly};
use ftg::projection::{invert_checked, GramState, InnerProductSpace};
use rand::Rng;

use super::{adaptive_quad, lsp_tree, random_poly, random_tree, rng};

pub const CASES: u32 = 1000;

pub type Check = fn(u32) -> Result<(), String>;

fn check<S, F>(cases: u32, strategy: S, test: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

/// `(name, check)` for every invariant, grouped by module.
pub fn all() -> Vec<(&'static str, Check)> {
    vec![
        ("expr: depth bound", expr_depth_bound),
        ("expr: terminal closure", expr_terminal_closure),
        ("expr: determinism", expr_determinism),
        ("expr: totality", expr_totality),
        ("hilbert: vector-space laws", hilbert_vector_space_laws),
        ("hilbert: cauchy-schwarz", hilbert_cauchy_schwarz),
        ("hilbert: budget exactness", hilbert_budget_exactness),
        ("projection: residual orthogonality", projection_residual_orthogonality),
        ("projection: monotone subspace", projection_monotone_subspace),
        ("projection: positive definite retained gram", projection_psd),
        ("projection: extension accounting", projection_accounting),
        ("ftg: strict descent", ftg_strict_descent),
        ("ftg: exact fit", ftg_exact_fit),
        ("ftg: accounting identity", ftg_accounting_identity),
        ("ftg: determinism", ftg_determinism),
        ("gp: elitist chains non-increasing", gp_elitist_non_increasing),
        ("gp: canonical population constant", gp_canonical_population),
        ("gp: fe granularity", gp_fe_granularity),
        ("gp: offspring are proper trees", gp_offspring_valid),
        ("lsp: ring laws", lsp_ring_laws),
        ("lsp: l2 bilinearity and positivity", lsp_l2_bilinear_positive),
        ("lsp: lowering homomorphism", lsp_lowering_homomorphism),
        ("lsp: quadrature agreement", lsp_quadrature_agreement),
        ("harness: reproducibility", harness_reproducibility),
        ("harness: success-rate monotonicity", harness_success_monotone),
        ("harness: cross-algorithm seed sharing", harness_seed_sharing),
    ]
}

fn params() -> impl Strategy<Value = GenParams> {
    (0.0..=1.0f64, 1usize..=9, 1usize..=9).prop_map(|(p, a, b)| GenParams::new(p, a.min(b), a.max(b)).unwrap())
}

fn opset(conventional: bool) -> OperatorSet<f64> {
    if conventional {
        OperatorSet::conventional()
    } else {
        OperatorSet::polynomial()
    }
}

pub fn expr_depth_bound(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), params(), any::<bool>()), |(seed, params, conv)| {
        let t = generate_composition(&opset(conv), &params, &mut rng(seed));
        prop_assert!(t.depth() <= params.u, "depth {} > u {}", t.depth(), params.u);
        prop_assert!(t.depth() >= params.l);
        Ok(())
    })
}

pub fn expr_terminal_closure(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), params(), any::<bool>()), |(seed, params, conv)| {
        let ops = opset(conv);
        let t = generate_composition(&ops, &params, &mut rng(seed));
        prop_assert!(t.validate(ops.n_vars()).is_ok());
        for n in t.nodes() {
            match n {
                Node::Var(i) => prop_assert!(*i < ops.n_vars()),
                Node::Const(c) => prop_assert!((-1.0..=1.0).contains(c)),
                Node::Unary(op) => prop_assert!(ops.unary().contains(op)),
                Node::Binary(op) => prop_assert!(ops.binary().contains(op)),
            }
        }
        Ok(())
    })
}

pub fn expr_determinism(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), params()), |(seed, params)| {
        let ops = OperatorSet::conventional();
        let a = generate_composition(&ops, &params, &mut rng(seed));
        let b = generate_composition(&ops, &params, &mut rng(seed));
        prop_assert_eq!(a.to_string(), b.to_string());
        let back: ExprTree<f64> = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
        Ok(())
    })
}

pub fn expr_totality(cases: u32) -> Result<(), String> {
    let x = prop_oneof![Just(0.0), Just(-0.0), -1e6..1e6f64, Just(f64::INFINITY), Just(f64::NAN)];
    check(cases, (any::<u64>(), x), |(seed, x)| {
        let t = random_tree(&mut rng(seed));
        let _ = eval_tree(&t, &[x]);
        // protections keep finite inputs away from division and log poles
        prop_assert_eq!(BinaryOp::Div.apply(x, 0.0), 1.0);
        prop_assert_eq!(ftg::expr::UnaryOp::Ln.apply(0.0f64), 0.0);
        Ok(())
    })
}

fn data_for(seed: u64, n: usize) -> DataSet<f64> {
    DataSet::sample(vec![(-1.0, 1.0)], n, |x: &[f64]| x[0].sin(), &mut rng(seed)).unwrap()
}

pub fn hilbert_vector_space_laws(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), -10.0..10.0f64), |(seed, r)| {
        let mut g = rng(seed);
        let data = data_for(g.gen(), 20);
        let (f, h) = (random_tree(&mut g), random_tree(&mut g));
        let mut m = BudgetMeter::unlimited();
        let pf = evaluate_class(&f, &data, &mut m).unwrap();
        let ph = evaluate_class(&h, &data, &mut m).unwrap();
        let sum = evaluate_class(&ExprTree::binary(BinaryOp::Add, f.clone(), h), &data, &mut m).unwrap();
        let scaled = evaluate_class(&ExprTree::binary(BinaryOp::Mul, ExprTree::constant(r), f), &data, &mut m).unwrap();
        prop_assert_eq!(m.traverses(), 4);
        let expect_sum = &pf + &ph;
        let expect_scaled = &pf * r;
        for (a, b) in sum.values().iter().zip(expect_sum.values()).chain(scaled.values().iter().zip(expect_scaled.values())) {
            prop_assert!(a == b || (a.is_nan() && b.is_nan()) || (a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        Ok(())
    })
}

pub fn hilbert_cauchy_schwarz(cases: u32) -> Result<(), String> {
    let vecs = (1usize..60).prop_flat_map(|n| {
        (prop::collection::vec(-1e3..1e3f64, n), prop::collection::vec(-1e3..1e3f64, n))
    });
    check(cases, vecs, |(u, v)| {
        let (u, v) = (EvalVector(u), EvalVector(v));
        let lhs = u.dot(&v).powi(2);
        let rhs = u.norm_sq() * v.norm_sq();
        prop_assert!(lhs <= rhs * (1.0 + 1e-9), "{lhs} > {rhs}");
        Ok(())
    })
}

pub fn hilbert_budget_exactness(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), -100.0..100.0f64, 1usize..50), |(seed, c, n)| {
        let mut g = rng(seed);
        let points: Vec<Vec<f64>> = (0..n).map(|_| vec![g.gen_range(-1.0..1.0)]).collect();
        let data = DataSet::new(points, vec![c; n], vec![(-1.0, 1.0)]).unwrap();
        let r = run_ftg(&data, &OperatorSet::conventional(), &FtgConfig::default(), &mut g);
        prop_assert_eq!(r.traversals, 3);
        prop_assert_eq!(r.basis_size(), 1);
        Ok(())
    })
}

fn gaussian_columns(seed: u64, k: usize, n: usize) -> (Vec<EvalVector<f64>>, EvalVector<f64>) {
    let mut g = rng(seed);
    let col = |g: &mut rand_chacha::ChaCha8Rng| EvalVector((0..n).map(|_| g.gen_range(-1.0..1.0)).collect());
    let cols = (0..k).map(|_| col(&mut g)).collect();
    (cols, col(&mut g))
}

fn grow(
    space: &SampleSpace<f64>,
    cols: &[EvalVector<f64>],
    target: &EvalVector<f64>,
) -> Vec<(GramState<SampleSpace<f64>>, u64)> {
    let mut state = GramState::new();
    let mut meter = BudgetMeter::unlimited();
    let mut out = Vec::new();
    for v in cols {
        let before = meter.traverses();
        let ext = state.extend(space, v.clone(), target, &mut meter).unwrap();
        let spent = meter.traverses() - before;
        let Ok(inv) = invert_checked(&ext.gram, 1e-4) else { break };
        state.accept(ext, inv);
        state.solve_coefficients();
        out.push((state.clone(), spent));
    }
    out
}

pub fn projection_residual_orthogonality(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 1usize..=5), |(seed, k)| {
        let space = SampleSpace::new();
        let (cols, target) = gaussian_columns(seed, k, 20);
        for (state, _) in grow(&space, &cols, &target) {
            if state.cond_estimate() > 1e8 {
                continue;
            }
            let residual = space.sub(&target, &state.projection(&space));
            for v in state.basis() {
                let bound = 1e-6 * target.norm_sq().sqrt() * v.norm_sq().sqrt();
                prop_assert!(residual.dot(v).abs() <= bound);
            }
        }
        Ok(())
    })
}

pub fn projection_monotone_subspace(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 1usize..=8), |(seed, k)| {
        let space = SampleSpace::new();
        let (cols, target) = gaussian_columns(seed, k, 20);
        let losses: Vec<f64> = grow(&space, &cols, &target)
            .iter()
            .map(|(s, _)| space.sub(&target, &s.projection(&space)).norm_sq())
            .collect();
        for w in losses.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{:?}", losses);
        }
        Ok(())
    })
}

pub fn projection_psd(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 1usize..=8, 2usize..30), |(seed, k, n)| {
        let space = SampleSpace::new();
        let (cols, target) = gaussian_columns(seed, k, n);
        for (state, _) in grow(&space, &cols, &target) {
            let s = svd(state.gram());
            prop_assert!(s.sigma.iter().all(|&x| x > 0.0));
            prop_assert!(state.cond_estimate().is_finite());
        }
        Ok(())
    })
}

pub fn projection_accounting(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 1usize..=8), |(seed, k)| {
        let space = SampleSpace::new();
        let (cols, target) = gaussian_columns(seed, k, 20);
        for (i, (_, spent)) in grow(&space, &cols, &target).iter().enumerate() {
            prop_assert_eq!(*spent, 2 * (i as u64 + 1));
        }
        Ok(())
    })
}

fn small_ftg(seed: u64, budget: u64) -> (DataSet<f64>, ftg::ftg::FtgResult<f64>) {
    let problems = harness::load_problems();
    let p = &problems[(seed % problems.len() as u64) as usize];
    let data = p.sample(&mut harness::dataset_rng(seed));
    let config = FtgConfig { budget, ..FtgConfig::default() };
    let r = run_ftg(&data, &p.operator_set(), &config, &mut harness::algorithm_rng(seed));
    (data, r)
}

pub fn ftg_strict_descent(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 50u64..3000), |(seed, budget)| {
        let (_, r) = small_ftg(seed, budget);
        for w in r.loss_trace.windows(2) {
            prop_assert!(w[1].loss - w[0].loss <= 1e-12, "{} -> {}", w[0].loss, w[1].loss);
            prop_assert!(w[1].traversals > w[0].traversals);
        }
        Ok(())
    })
}

pub fn ftg_exact_fit(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 2usize..=6), |(seed, n)| {
        let mut g = rng(seed);
        let points: Vec<Vec<f64>> = (0..n).map(|_| vec![g.gen_range(-1.0..1.0)]).collect();
        let targets: Vec<f64> = (0..n).map(|_| g.gen_range(-2.0..2.0)).collect();
        let data = DataSet::new(points, targets, vec![(-1.0, 1.0)]).unwrap();
        let config = FtgConfig { budget: 20_000, ..FtgConfig::default() };
        let r = run_ftg(&data, &OperatorSet::polynomial(), &config, &mut g);
        if r.basis_size() >= n {
            prop_assert!(r.final_loss < 1e-10, "loss {} with {} elements", r.final_loss, r.basis_size());
        }
        Ok(())
    })
}

pub fn ftg_accounting_identity(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 3u64..3000), |(seed, budget)| {
        let (_, r) = small_ftg(seed, budget);
        let predicted = 2 + r.costs.iter().map(|c| c.traversals()).sum::<u64>();
        prop_assert_eq!(predicted.min(budget), r.traversals);
        for c in &r.costs {
            prop_assert!(c.extensions <= c.residual_tests);
        }
        Ok(())
    })
}

pub fn ftg_determinism(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 3u64..2000), |(seed, budget)| {
        let (_, a) = small_ftg(seed, budget);
        let (_, b) = small_ftg(seed, budget);
        prop_assert_eq!(a.model.to_string(), b.model.to_string());
        prop_assert_eq!(a.loss_trace, b.loss_trace);
        prop_assert_eq!(a.traversals, b.traversals);
        Ok(())
    })
}

pub fn gp_elitist_non_increasing(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 1usize..20, 1u64..300), |(seed, lambda, budget)| {
        let data = data_for(seed, 20);
        let config = GpConfig { budget, ..GpConfig::one_plus_lambda(lambda) };
        let r = run_one_plus_lambda(&data, &OperatorSet::conventional(), &config, &mut rng(seed));
        for w in r.trace.windows(2) {
            prop_assert!(w[1].best_loss <= w[0].best_loss);
        }
        if !r.trace.is_empty() {
            prop_assert_eq!(r.best.loss, data.loss(&r.best.tree));
        }
        Ok(())
    })
}

pub fn gp_canonical_population(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 500u64..1600), |(seed, budget)| {
        let data = data_for(seed, 20);
        let config = GpConfig { budget, ..GpConfig::canonical() };
        let mut sizes = Vec::new();
        run_canonical_observed(&data, &OperatorSet::conventional(), &config, &mut rng(seed), |v: &GenerationView<f64>| {
            sizes.push(v.evaluated.len())
        });
        prop_assert_eq!(sizes.len() as u64, budget / 500);
        prop_assert!(sizes.iter().all(|&s| s == 500));
        Ok(())
    })
}

pub fn gp_fe_granularity(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 1usize..50, 1u64..400), |(seed, lambda, budget)| {
        let data = data_for(seed, 20);
        let config = GpConfig { budget, ..GpConfig::one_plus_lambda(lambda) };
        let r = run_one_plus_lambda(&data, &OperatorSet::conventional(), &config, &mut rng(seed));
        for (g, s) in r.trace.iter().enumerate() {
            prop_assert_eq!(s.fe, 1 + (g * lambda) as u64);
        }
        prop_assert!(r.fe <= budget);
        Ok(())
    })
}

pub fn gp_offspring_valid(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), any::<bool>()), |(seed, conv)| {
        let mut g = rng(seed);
        let ops = opset(conv);
        let params = GenParams::default();
        let a = generate_composition(&ops, &params, &mut g);
        let b = generate_composition(&ops, &params, &mut g);
        let c = subtree_crossover(&a, &b, &mut g);
        let m = subtree_mutation(&c, &ops, &params, &mut g);
        for t in [&c, &m] {
            prop_assert!(t.validate(ops.n_vars()).is_ok());
            prop_assert!(ExprTree::from_prefix(t.nodes().to_vec()).is_ok());
        }
        Ok(())
    })
}

fn coeff_close(p: &Poly<f64>, q: &Poly<f64>, rel: f64) -> bool {
    let n = p.coeffs().len().max(q.coeffs().len());
    let scale = p.coeffs().iter().chain(q.coeffs()).fold(1.0f64, |a, &b| a.max(b.abs()));
    (0..n).all(|i| {
        let a = p.coeffs().get(i).copied().unwrap_or(0.0);
        let b = q.coeffs().get(i).copied().unwrap_or(0.0);
        (a - b).abs() <= rel * scale
    })
}

pub fn lsp_ring_laws(cases: u32) -> Result<(), String> {
    check(cases, any::<u64>(), |seed| {
        let mut g = rng(seed);
        let (p, q, r) = (random_poly(&mut g, 6), random_poly(&mut g, 6), random_poly(&mut g, 6));
        prop_assert!(coeff_close(&(&p + &q), &(&q + &p), 1e-12));
        prop_assert!(coeff_close(&(&p * &q), &(&q * &p), 1e-12));
        prop_assert!(coeff_close(&(&(&p + &q) + &r), &(&p + &(&q + &r)), 1e-12));
        prop_assert!(coeff_close(&(&(&p * &q) * &r), &(&p * &(&q * &r)), 1e-12));
        prop_assert!(coeff_close(&(&p * &(&q + &r)), &(&(&p * &q) + &(&p * &r)), 1e-12));
        Ok(())
    })
}

pub fn lsp_l2_bilinear_positive(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), -2.0..2.0f64, 0.05..2.0f64, -3.0..3.0f64, -3.0..3.0f64), |(seed, a, w, s, t)| {
        let b = a + w;
        let mut g = rng(seed);
        let (p, q, r) = (random_poly(&mut g, 6), random_poly(&mut g, 6), random_poly(&mut g, 6));
        let combo = &p.scale(s) + &q.scale(t);
        let lhs = l2_inner(&combo, &r, a, b);
        let rhs = s * l2_inner(&p, &r, a, b) + t * l2_inner(&q, &r, a, b);
        let scale = (l2_inner(&combo, &combo, a, b) * l2_inner(&r, &r, a, b)).sqrt()
            + (s.abs() + t.abs()) * (l2_inner(&p, &p, a, b) + l2_inner(&q, &q, a, b) + l2_inner(&r, &r, a, b));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1e-300));
        prop_assert!((l2_inner(&p, &q, a, b) - l2_inner(&q, &p, a, b)).abs() <= 1e-12 * scale.max(1.0));
        if !p.is_zero() {
            prop_assert!(l2_inner(&p, &p, a, b) > 0.0);
        }
        Ok(())
    })
}

pub fn lsp_lowering_homomorphism(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 0.0..1.0f64), |(seed, x)| {
        let mut g = rng(seed);
        let params = GenParams::new(0.5, 1, 5).unwrap();
        let (f, h) = (lsp_tree(&mut g, &params), lsp_tree(&mut g, &params));
        let (pf, ph) = (tree_to_poly(&f).unwrap(), tree_to_poly(&h).unwrap());
        for (op, expect) in [(BinaryOp::Add, &pf + &ph), (BinaryOp::Mul, &pf * &ph)] {
            let lowered = tree_to_poly(&ExprTree::binary(op, f.clone(), h.clone())).unwrap();
            let (a, b) = (lowered.eval(x), expect.eval(x));
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            prop_assert!(coeff_close(&lowered, &expect, 1e-12));
        }
        Ok(())
    })
}

pub fn lsp_quadrature_agreement(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), -1.0..1.0f64, 0.1..1.0f64), |(seed, a, w)| {
        let b = a + w;
        let mut g = rng(seed);
        let (p, q) = (random_poly(&mut g, 12), random_poly(&mut g, 12));
        let exact = l2_inner(&p, &q, a, b);
        let quad = adaptive_quad(&|x| p.eval(x) * q.eval(x), a, b, 1e-14);
        let norm = (l2_inner(&p, &p, a, b) * l2_inner(&q, &q, a, b)).sqrt();
        prop_assert!((exact - quad).abs() <= 1e-8 * quad.abs().max(norm), "{exact} vs {quad}");
        Ok(())
    })
}

fn tiny_sweep(seed: u64, algorithms: &[Algorithm], budget: u64) -> Vec<harness::RunRecord> {
    let problems = harness::load_problems();
    let p = problems[(seed % 9) as usize].clone();
    harness::run_sweep(&[p], algorithms, 2, budget, seed, &harness::tolerance_grid())
}

pub fn harness_reproducibility(cases: u32) -> Result<(), String> {
    check(cases, any::<u64>(), |seed| {
        let bytes = || {
            let records = tiny_sweep(seed, &[Algorithm::Ftg, Algorithm::Gp11, Algorithm::Gp1l], 300);
            let mut json = Vec::new();
            harness::write_records_json(&records, &mut json).unwrap();
            let mut csv = Vec::new();
            harness::write_stats_csv(&harness::aggregate(&records), &mut csv).unwrap();
            (json, csv)
        };
        prop_assert!(bytes() == bytes());
        Ok(())
    })
}

pub fn harness_success_monotone(cases: u32) -> Result<(), String> {
    check(cases, any::<u64>(), |seed| {
        let records = tiny_sweep(seed, &[Algorithm::Ftg, Algorithm::Gp11], 400);
        for r in &records {
            let fe: Vec<f64> = r.fe.iter().map(|x| x.map_or(f64::INFINITY, |v| v as f64)).collect();
            prop_assert!(fe.windows(2).all(|w| w[0] <= w[1]), "{:?}", r.fe);
        }
        let stats = harness::aggregate(&records);
        for w in stats.windows(2) {
            if w[0].problem == w[1].problem && w[0].algorithm == w[1].algorithm {
                prop_assert!(w[1].tolerance < w[0].tolerance);
                prop_assert!(w[1].success_rate <= w[0].success_rate);
            }
            prop_assert!(w[0].q1 <= w[0].median && w[0].median <= w[0].q3);
            prop_assert!((0.0..=100.0).contains(&w[0].success_rate));
        }
        Ok(())
    })
}

pub fn harness_seed_sharing(cases: u32) -> Result<(), String> {
    check(cases, (any::<u64>(), 0usize..9, 0usize..100), |(master, pi, run)| {
        let problems = harness::load_problems();
        let seed = harness::derive_seed(master, pi, run);
        let records: Vec<_> = Algorithm::ALL
            .iter()
            .map(|&a| harness::run_single(&problems[pi], a, run, seed, 1, &[1.0]))
            .collect();
        prop_assert!(records.iter().all(|r| r.seed == seed));
        let first = problems[pi].sample(&mut harness::dataset_rng(seed));
        for _ in 0..3 {
            prop_assert_eq!(&problems[pi].sample(&mut harness::dataset_rng(seed)), &first);
        }
        Ok(())
    })
}
