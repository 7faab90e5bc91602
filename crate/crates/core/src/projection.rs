//! Least-squares projection onto the span of a growing basis.
//!
//! The best approximation of `F` in `span{v₁, …, v_k}` has coefficients
//! `α = G⁻¹ · (⟨F, v₁⟩, …, ⟨F, v_k⟩)ᵀ` with `G = (⟨vᵢ, vⱼ⟩)` the Gram matrix.
//! The inverse comes from an SVD and is only trusted when `G · Ĝ⁻¹` is
//! within `ε₁` of the identity entrywise.

use num_traits::One;

use crate::error::BudgetExhausted;
use crate::hilbert::BudgetMeter;
use crate::linalg::{svd, Matrix};
use crate::Scalar;

/// A real inner-product space with the linear operations the projection needs.
pub trait InnerProductSpace {
    type Scalar: Scalar;
    type Element: Clone;

    fn inner(&self, u: &Self::Element, v: &Self::Element) -> Self::Scalar;

    /// `Σ cᵢ · vᵢ`
    fn combine(&self, terms: &[(Self::Scalar, &Self::Element)]) -> Self::Element;

    fn sub(&self, u: &Self::Element, v: &Self::Element) -> Self::Element;
}

/// A successful checked inversion.
#[derive(Clone, Debug)]
pub struct CheckedInverse<T> {
    pub inverse: Matrix<T>,
    pub cond_estimate: T,
    pub max_deviation: T,
}

/// The inverse failed the identity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rejection<T> {
    pub cond_estimate: T,
    pub max_deviation: T,
}

/// Inverts a symmetric matrix through its SVD and accepts the result only if
/// every entry of `G · Ĝ⁻¹` is within `eps1` of the identity.
pub fn invert_checked<T: Scalar>(g: &Matrix<T>, eps1: T) -> Result<CheckedInverse<T>, Rejection<T>> {
    let decomposition = svd(g);
    let cond_estimate = decomposition.condition_number();
    let inverse = decomposition.inverse();
    let max_deviation = g.matmul(&inverse).max_identity_deviation();
    if max_deviation < eps1 {
        Ok(CheckedInverse { inverse, cond_estimate, max_deviation })
    } else {
        Err(Rejection { cond_estimate, max_deviation })
    }
}

/// A candidate basis extension: the bordered Gram matrix and right-hand side.
#[derive(Clone, Debug)]
pub struct Extension<T, E> {
    pub gram: Matrix<T>,
    pub rhs: Vec<T>,
    pub element: E,
}

/// Basis, Gram matrix, its checked inverse and the solved coefficients.
#[derive(Clone, Debug)]
pub struct GramState<S: InnerProductSpace> {
    basis: Vec<S::Element>,
    gram: Matrix<S::Scalar>,
    inverse: Matrix<S::Scalar>,
    rhs: Vec<S::Scalar>,
    alpha: Vec<S::Scalar>,
    cond_estimate: S::Scalar,
}

impl<S: InnerProductSpace> Default for GramState<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: InnerProductSpace> GramState<S> {
    pub fn new() -> Self {
        Self {
            basis: Vec::new(),
            gram: Matrix::zeros(0, 0),
            inverse: Matrix::zeros(0, 0),
            rhs: Vec::new(),
            alpha: Vec::new(),
            cond_estimate: S::Scalar::one(),
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[S::Element] {
        &self.basis
    }

    pub fn gram(&self) -> &Matrix<S::Scalar> {
        &self.gram
    }

    pub fn inverse(&self) -> &Matrix<S::Scalar> {
        &self.inverse
    }

    pub fn rhs(&self) -> &[S::Scalar] {
        &self.rhs
    }

    pub fn alpha(&self) -> &[S::Scalar] {
        &self.alpha
    }

    pub fn cond_estimate(&self) -> S::Scalar {
        self.cond_estimate
    }

    /// Borders the Gram matrix with `v`, going from `k - 1` to `k` elements.
    ///
    /// Charges `2k - 1` traversals for the new row and column (the symmetric
    /// entries are computed once, charged twice) and one for `⟨F, v⟩`.
    pub fn extend(
        &self,
        space: &S,
        v: S::Element,
        target: &S::Element,
        meter: &mut BudgetMeter,
    ) -> Result<Extension<S::Scalar, S::Element>, BudgetExhausted> {
        let k = self.basis.len() + 1;
        meter.charge(2 * k as u64)?;
        let mut gram = self.gram.bordered();
        for (i, b) in self.basis.iter().enumerate() {
            let g = space.inner(b, &v);
            gram[(i, k - 1)] = g;
            gram[(k - 1, i)] = g;
        }
        gram[(k - 1, k - 1)] = space.inner(&v, &v);
        let mut rhs = self.rhs.clone();
        rhs.push(space.inner(target, &v));
        Ok(Extension { gram, rhs, element: v })
    }

    /// Adopts an extension whose Gram matrix passed [`invert_checked`].
    pub fn accept(&mut self, ext: Extension<S::Scalar, S::Element>, inv: CheckedInverse<S::Scalar>) {
        self.basis.push(ext.element);
        self.gram = ext.gram;
        self.rhs = ext.rhs;
        self.inverse = inv.inverse;
        self.cond_estimate = inv.cond_estimate;
        self.alpha.clear();
    }

    /// `α = Ĝ⁻¹ · rhs`.
    pub fn solve_coefficients(&mut self) -> &[S::Scalar] {
        self.alpha = self.inverse.matvec(&self.rhs);
        &self.alpha
    }

    /// One step of iterative refinement: `α += Ĝ⁻¹ · (⟨F − Σ αᵢ vᵢ, vⱼ⟩)ⱼ`.
    /// Recovers the accuracy the normal equations lose on ill-conditioned bases.
    pub fn refine(&mut self, space: &S, target: &S::Element) -> &[S::Scalar] {
        let residual = space.sub(target, &self.projection(space));
        let r: Vec<_> = self.basis.iter().map(|b| space.inner(&residual, b)).collect();
        let delta = self.inverse.matvec(&r);
        for (a, d) in self.alpha.iter_mut().zip(delta) {
            *a = *a + d;
        }
        &self.alpha
    }

    /// `Σ αᵢ vᵢ` for the current coefficients.
    pub fn projection(&self, space: &S) -> S::Element {
        let terms: Vec<_> = self.alpha.iter().copied().zip(self.basis.iter()).collect();
        space.combine(&terms)
    }
}
