use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Num;

use crate::Scalar;

/// Dense univariate polynomial `Σ cᵢ xⁱ` in normal form: the leading
/// coefficient is nonzero, and the zero polynomial has no coefficients.
///
/// Ring operations only need `T: Num + Clone`, so exact coefficient types
/// work as well as floats.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Num + Clone> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `xⁱ`
    pub fn monomial(i: usize) -> Self {
        let mut coeffs = vec![T::zero(); i + 1];
        coeffs[i] = T::one();
        Self { coeffs }
    }

    /// `Σ_{i=0}^{k} xⁱ`
    pub fn geometric(k: usize) -> Self {
        Self { coeffs: vec![T::one(); k + 1] }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Number of nonzero coefficients.
    pub fn span_size(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn scale(&self, r: T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * r.clone()).collect())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[T], i: usize| v.get(i).cloned().unwrap_or_else(T::zero);
        Self::new((0..n).map(|i| f(get(&self.coeffs, i), get(&other.coeffs, i))).collect())
    }
}

impl<T: Num + Clone> Add for &Poly<T> {
    type Output = Poly<T>;

    fn add(self, rhs: Self) -> Poly<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Num + Clone> Sub for &Poly<T> {
    type Output = Poly<T>;

    fn sub(self, rhs: Self) -> Poly<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Num + Clone> Mul for &Poly<T> {
    type Output = Poly<T>;

    fn mul(self, rhs: Self) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }
}

impl<T: Num + Clone + Neg<Output = T>> Neg for &Poly<T> {
    type Output = Poly<T>;

    fn neg(self) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

pub fn poly_add<T: Num + Clone>(p: &Poly<T>, q: &Poly<T>) -> Poly<T> {
    p + q
}

pub fn poly_sub<T: Num + Clone>(p: &Poly<T>, q: &Poly<T>) -> Poly<T> {
    p - q
}

pub fn poly_mul<T: Num + Clone>(p: &Poly<T>, q: &Poly<T>) -> Poly<T> {
    p * q
}

impl<T: Scalar> Poly<T> {
    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// `∫_a^b p(x) dx = Σ cᵢ/(i+1) · (b^{i+1} - a^{i+1})`
    pub fn integrate(&self, a: T, b: T) -> T {
        let (mut pa, mut pb) = (a, b);
        let mut acc = T::zero();
        for (i, &c) in self.coeffs.iter().enumerate() {
            acc = acc + c / T::lit((i + 1) as f64) * (pb - pa);
            pa = pa * a;
            pb = pb * b;
        }
        acc
    }

    /// Linear combination `Σ cᵢ pᵢ`.
    pub fn linear_combination(terms: &[(T, &Poly<T>)]) -> Self {
        let n = terms.iter().map(|(_, p)| p.coeffs.len()).max().unwrap_or(0);
        let mut out = vec![T::zero(); n];
        for (c, p) in terms {
            for (o, &x) in out.iter_mut().zip(&p.coeffs) {
                *o = *o + *c * x;
            }
        }
        Poly::new(out)
    }
}

/// `⟨p, q⟩ = ∫_a^b p(x) q(x) dx`, exact up to rounding.
pub fn l2_inner<T: Scalar>(p: &Poly<T>, q: &Poly<T>, a: T, b: T) -> T {
    (p * q).integrate(a, b)
}
