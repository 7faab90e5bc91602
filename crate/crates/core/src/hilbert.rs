//! The finite-dimensional Hilbert space of functions modulo agreement on
//! the training points.
//!
//! Two functions are identified when they agree on every training point, so
//! a class is represented exactly by its vector of values there
//! ([`EvalVector`]), with `⟨f, g⟩ = Σ f(x)·g(x)`.
//!
//! Time is counted in dataset traversals: every inner product and every
//! loss computation costs one unit on the [`BudgetMeter`].

use std::io;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use crate::error::{BudgetExhausted, HilbertError};
use crate::expr::ExprTree;
use crate::projection::InnerProductSpace;
use crate::Scalar;

/// Counts dataset traversals against a cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BudgetMeter {
    traverses: u64,
    limit: u64,
}

impl BudgetMeter {
    pub fn new(limit: u64) -> Self {
        Self { traverses: 0, limit }
    }

    pub fn unlimited() -> Self {
        Self::new(u64::MAX)
    }

    pub fn traverses(&self) -> u64 {
        self.traverses
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn exhausted(&self) -> bool {
        self.traverses >= self.limit
    }

    /// Spends `n` traversals. Fails once the count moves past the limit; the
    /// increment still happens, so the count records the crossing.
    pub fn charge(&mut self, n: u64) -> Result<(), BudgetExhausted> {
        self.traverses = self.traverses.saturating_add(n);
        if self.traverses > self.limit {
            Err(BudgetExhausted { limit: self.limit })
        } else {
            Ok(())
        }
    }
}

/// Training data: ordered points in `ℝⁿ`, their target values and the
/// sampling box.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSet<T> {
    /// `columns[i][j]`: coordinate `i` of point `j`.
    columns: Vec<Vec<T>>,
    targets: Vec<T>,
    bounds: Vec<(T, T)>,
}

impl<T: Scalar> DataSet<T> {
    pub fn new(points: Vec<Vec<T>>, targets: Vec<T>, bounds: Vec<(T, T)>) -> Result<Self, HilbertError> {
        if points.is_empty() {
            return Err(HilbertError::InvalidDataSet("no points".into()));
        }
        if points.len() != targets.len() {
            return Err(HilbertError::LengthMismatch { left: points.len(), right: targets.len() });
        }
        let n = bounds.len();
        if n == 0 {
            return Err(HilbertError::InvalidDataSet("zero-dimensional domain".into()));
        }
        let mut columns = vec![Vec::with_capacity(points.len()); n];
        for (j, p) in points.iter().enumerate() {
            if p.len() != n {
                return Err(HilbertError::LengthMismatch { left: p.len(), right: n });
            }
            for (i, (&x, &(lo, hi))) in p.iter().zip(&bounds).enumerate() {
                if !(lo <= x && x <= hi) {
                    return Err(HilbertError::InvalidDataSet(format!("point {j} coordinate {i} = {x} outside [{lo}, {hi}]")));
                }
                columns[i].push(x);
            }
        }
        Ok(Self { columns, targets, bounds })
    }

    /// Samples `n_points` i.i.d. uniform points in `bounds` and labels them with `target`.
    pub fn sample<R, F>(bounds: Vec<(T, T)>, n_points: usize, target: F, rng: &mut R) -> Result<Self, HilbertError>
    where
        R: rand::Rng + ?Sized,
        F: Fn(&[T]) -> T,
    {
        let points: Vec<Vec<T>> = (0..n_points)
            .map(|_| bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect())
            .collect();
        let targets = points.iter().map(|p| target(p)).collect();
        Self::new(points, targets, bounds)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn bounds(&self) -> &[(T, T)] {
        &self.bounds
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn point(&self, j: usize) -> Vec<T> {
        self.columns.iter().map(|c| c[j]).collect()
    }

    /// The target's class.
    pub fn target_vector(&self) -> EvalVector<T> {
        EvalVector(self.targets.clone())
    }

    /// Values of `tree` on the points, without touching any meter. Callers
    /// that account for the traversal through an inner product use this.
    pub fn eval_uncharged(&self, tree: &ExprTree<T>) -> EvalVector<T> {
        EvalVector(tree.eval_columns(&self.columns, self.len()))
    }

    /// Writes `x0,…,x{n-1},target` rows.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.dim()).map(|i| format!("x{i}")).collect();
        header.push("target".into());
        w.write_record(&header)?;
        for j in 0..self.len() {
            let mut row: Vec<String> = self.columns.iter().map(|c| c[j].to_string()).collect();
            row.push(self.targets[j].to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), csv::Error> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// A class's representative: the function's values on the training points.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalVector<T>(pub Vec<T>);

impl<T: Scalar> EvalVector<T> {
    pub fn zeros(n: usize) -> Self {
        Self(vec![T::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn dot(&self, other: &Self) -> T {
        self.0.iter().zip(&other.0).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn scale(&self, r: T) -> Self {
        Self(self.0.iter().map(|&a| a * r).collect())
    }

    /// `self += r · other`
    pub fn axpy(&mut self, r: T, other: &Self) {
        self.0.iter_mut().zip(&other.0).for_each(|(a, &b)| *a = *a + r * b);
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl<T: Scalar> Add for &EvalVector<T> {
    type Output = EvalVector<T>;

    fn add(self, rhs: Self) -> EvalVector<T> {
        EvalVector(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a + b).collect())
    }
}

impl<T: Scalar> Sub for &EvalVector<T> {
    type Output = EvalVector<T>;

    fn sub(self, rhs: Self) -> EvalVector<T> {
        EvalVector(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a - b).collect())
    }
}

impl<T: Scalar> Mul<T> for &EvalVector<T> {
    type Output = EvalVector<T>;

    fn mul(self, r: T) -> EvalVector<T> {
        self.scale(r)
    }
}

/// `π(⟦f⟧)`: evaluates `tree` on every training point. One traversal.
pub fn evaluate_class<T: Scalar>(
    tree: &ExprTree<T>,
    data: &DataSet<T>,
    meter: &mut BudgetMeter,
) -> Result<EvalVector<T>, HilbertError> {
    if tree.var_bound() > data.dim() {
        return Err(HilbertError::InvalidDataSet(format!(
            "tree uses x{} but the data has {} coordinates",
            tree.var_bound() - 1,
            data.dim()
        )));
    }
    meter.charge(1)?;
    Ok(data.eval_uncharged(tree))
}

fn check_len<T>(u: &EvalVector<T>, v: &EvalVector<T>) -> Result<(), HilbertError> {
    if u.0.len() != v.0.len() {
        Err(HilbertError::LengthMismatch { left: u.0.len(), right: v.0.len() })
    } else {
        Ok(())
    }
}

/// `⟨u, v⟩ = Σ uᵢ vᵢ`. One traversal.
pub fn inner<T: Scalar>(u: &EvalVector<T>, v: &EvalVector<T>, meter: &mut BudgetMeter) -> Result<T, HilbertError> {
    check_len(u, v)?;
    meter.charge(1)?;
    Ok(u.dot(v))
}

/// `d²(u, v) = Σ (uᵢ - vᵢ)²`. One traversal.
pub fn sq_distance<T: Scalar>(u: &EvalVector<T>, v: &EvalVector<T>, meter: &mut BudgetMeter) -> Result<T, HilbertError> {
    check_len(u, v)?;
    meter.charge(1)?;
    Ok(sum_sq_error(u.values(), v.values()))
}

pub(crate) fn sum_sq_error<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| {
            let d = x - y;
            acc + d * d
        })
        .nan_to_inf()
}

/// Sum of squared errors of `tree` against the targets; +inf for non-finite
/// outputs. One traversal.
pub fn loss_sum<T: Scalar>(tree: &ExprTree<T>, data: &DataSet<T>, meter: &mut BudgetMeter) -> Result<T, HilbertError> {
    meter.charge(1)?;
    let values = data.eval_uncharged(tree);
    Ok(sum_sq_error(data.targets(), values.values()))
}

/// The sample space `ℝᴺ` with the plain dot product.
#[derive(Clone, Copy, Debug, Default)]
pub struct SampleSpace<T>(std::marker::PhantomData<T>);

impl<T> SampleSpace<T> {
    pub fn new() -> Self {
        Self(std::marker::PhantomData)
    }
}

impl<T: Scalar> InnerProductSpace for SampleSpace<T> {
    type Scalar = T;
    type Element = EvalVector<T>;

    fn inner(&self, u: &EvalVector<T>, v: &EvalVector<T>) -> T {
        debug_assert_eq!(u.len(), v.len());
        u.dot(v)
    }

    fn combine(&self, terms: &[(T, &EvalVector<T>)]) -> EvalVector<T> {
        let n = terms.first().map(|(_, v)| v.len()).unwrap_or(0);
        let mut out = EvalVector::zeros(n);
        for (c, v) in terms {
            out.axpy(*c, v);
        }
        out
    }

    fn sub(&self, u: &EvalVector<T>, v: &EvalVector<T>) -> EvalVector<T> {
        u - v
    }
}
