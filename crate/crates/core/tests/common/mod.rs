//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

pub mod invariants;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ftg::expr::{generate_composition, ExprTree, GenParams, OperatorSet};
use ftg::hilbert::DataSet;
use ftg::lsp::{LspProblem, Poly};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn koza1(x: f64) -> f64 {
    x.powi(4) + x.powi(3) + x.powi(2) + x
}

pub fn koza1_data(seed: u64) -> DataSet<f64> {
    DataSet::sample(vec![(-1.0, 1.0)], 20, |x: &[f64]| koza1(x[0]), &mut rng(seed)).unwrap()
}

/// Gauss-Jordan inverse with partial pivoting; `None` when a pivot vanishes.
pub fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        let p = m[col][col];
        m[col].iter_mut().for_each(|x| *x /= p);
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Least-squares coefficients of `target` on the given columns, via nalgebra's SVD.
pub fn lstsq(columns: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let n = target.len();
    let a = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
    let b = DVector::from_column_slice(target);
    let x = a.svd(true, true).solve(&b, 1e-14).expect("svd solve");
    x.iter().copied().collect()
}

/// Condition number of the Gram matrix of `columns`, via nalgebra.
pub fn gram_condition(columns: &[Vec<f64>]) -> f64 {
    let n = columns[0].len();
    let a = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
    let g = a.transpose() * &a;
    let s = g.singular_values();
    let hi = s.max();
    let lo = s.min();
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Rank by row reduction with relative pivot threshold `tol`.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let scale = m.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())) else { break };
        if m[p][c].abs() <= tol * scale {
            continue;
        }
        m.swap(r, p);
        for i in r + 1..m.len() {
            let f = m[i][c] / m[r][c];
            for j in c..cols {
                m[i][j] -= f * m[r][j];
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Gauss-Kronrod 7/15 estimate and error on `[a, b]`.
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let (mut k, mut g) = (WGK[7] * fc, WG[3] * fc);
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature. A piece is accepted once its error
/// estimate is below `tol` times its own magnitude or its share of `∫|f|`.
pub fn adaptive_quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn go(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, density: f64, depth: u32) -> f64 {
        let (k, err) = gk15(f, a, b);
        if depth == 0 || err <= tol * k.abs().max(density * (b - a)) {
            return k;
        }
        let m = 0.5 * (a + b);
        go(f, a, m, tol, density, depth - 1) + go(f, m, b, tol, density, depth - 1)
    }
    let (abs, _) = gk15(&|x| f(x).abs(), a, b);
    go(f, a, b, tol, abs / (b - a), 24)
}

pub fn random_poly(rng: &mut impl Rng, max_degree: usize) -> Poly<f64> {
    let d = rng.gen_range(0..=max_degree);
    Poly::new((0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

/// Pointwise evaluation in plain f64, independent of the library's Horner.
pub fn eval_naive(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().enumerate().map(|(i, c)| c * x.powi(i as i32)).sum()
}

pub fn lsp_tree(rng: &mut impl Rng, params: &GenParams) -> ExprTree<f64> {
    generate_composition(&LspProblem::<f64>::operator_set(), params, rng)
}

pub fn random_tree(rng: &mut impl Rng) -> ExprTree<f64> {
    generate_composition(&OperatorSet::conventional(), &GenParams::default(), rng)
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn median(xs: &[f64]) -> f64 {
    ftg::harness::quantile(&sorted(xs), 0.5)
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}
