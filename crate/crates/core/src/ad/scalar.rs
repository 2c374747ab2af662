use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::jet::Jet;

/// Arithmetic shared by plain `f64` evaluation and jet evaluation.
///
/// Metric, spray and field rules are written once against this trait so the
/// same code path yields values and exact derivatives.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + 'static
{
    /// A constant living in the same space as `self`.
    fn constant_like(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, p: f64) -> Self;
    fn recip(&self) -> Self {
        self.constant_like(1.0) / self.clone()
    }
    /// Evaluates a type-erased rule at this scalar type.
    fn eval_dyn(rule: &dyn DynRule, x: &[Self], y: &[Self]) -> Vec<Self>;
}

/// Object-safe view of a generic rule `(x, y) -> outputs`.
pub trait DynRule: Send + Sync {
    fn eval_f64(&self, x: &[f64], y: &[f64]) -> Vec<f64>;
    fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Vec<Jet>;
}

impl Scalar for f64 {
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
    fn eval_dyn(rule: &dyn DynRule, x: &[Self], y: &[Self]) -> Vec<Self> {
        rule.eval_f64(x, y)
    }
}

impl Scalar for Jet {
    fn constant_like(&self, c: f64) -> Self {
        Jet::constant(self.space(), c)
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn sqrt(&self) -> Self {
        Jet::sqrt(self)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn ln(&self) -> Self {
        Jet::ln(self)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn powi(&self, n: i32) -> Self {
        Jet::powi(self, n)
    }
    fn powf(&self, p: f64) -> Self {
        Jet::powf(self, p)
    }
    fn recip(&self) -> Self {
        Jet::recip(self)
    }
    fn eval_dyn(rule: &dyn DynRule, x: &[Self], y: &[Self]) -> Vec<Self> {
        rule.eval_jet(x, y)
    }
}

/// `Σ a_i b_i`; panics on empty input.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = a[0].clone() * b[0].clone();
    for (u, v) in a.iter().zip(b).skip(1) {
        acc = acc + u.clone() * v.clone();
    }
    acc
}

/// `Σ_ij m_ij a_i b_j` for a plain coefficient matrix.
pub fn quad_form<S: Scalar>(m: &[Vec<S>], a: &[S], b: &[S]) -> S {
    let mut acc: Option<S> = None;
    for (i, row) in m.iter().enumerate() {
        for (j, mij) in row.iter().enumerate() {
            let term = mij.clone() * a[i].clone() * b[j].clone();
            acc = Some(match acc {
                Some(s) => s + term,
                None => term,
            });
        }
    }
    acc.expect("non-empty matrix")
}

/// `Σ_i c_i a_i` with plain coefficients.
pub fn linear<S: Scalar>(c: &[f64], a: &[S]) -> S {
    let mut acc = a[0].clone() * c[0];
    for (ci, ai) in c.iter().zip(a).skip(1) {
        acc = acc + ai.clone() * *ci;
    }
    acc
}
