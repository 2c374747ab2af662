//! Multivariate truncated Taylor jets.
//!
//! A [`Jet`] holds the Taylor coefficients `f_α = ∂^α f / α!` of a scalar map
//! for every multi-index `|α| <= order`. Arithmetic is exact truncated
//! polynomial arithmetic; transcendental functions are applied by composing
//! their univariate Taylor series with the nilpotent part of the argument.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{FinslerError, Result};

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 4;

/// Monomial layout and product table shared by all jets with the same
/// number of variables and truncation order.
pub struct JetSpace {
    nvars: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    /// `(a, b, out)` with `α_a + α_b = α_out`, grouped by `out`.
    products: Vec<(u32, u32, u32)>,
    /// Index of the first monomial of each degree, plus a final sentinel.
    degree_start: Vec<usize>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("len", &self.monomials.len())
            .finish()
    }
}

fn compositions(nvars: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() == nvars - 1 {
        prefix.push(degree as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for d in (0..=degree).rev() {
        prefix.push(d as u8);
        compositions(nvars, degree - d, prefix, out);
        prefix.pop();
    }
}

type SpaceCache = HashMap<(usize, usize), Arc<JetSpace>>;

impl JetSpace {
    fn build(nvars: usize, order: usize) -> Self {
        assert!(nvars > 0, "a jet needs at least one variable");
        let mut monomials = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for d in 0..=order {
            degree_start.push(monomials.len());
            compositions(nvars, d, &mut Vec::with_capacity(nvars), &mut monomials);
        }
        degree_start.push(monomials.len());
        let lookup: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();

        let mut products = Vec::new();
        for (out, gamma) in monomials.iter().enumerate() {
            // enumerate every α <= γ componentwise
            let mut alpha = vec![0u8; nvars];
            loop {
                let beta: Vec<u8> = gamma.iter().zip(&alpha).map(|(g, a)| g - a).collect();
                products.push((lookup[&alpha] as u32, lookup[&beta] as u32, out as u32));
                let mut k = 0;
                loop {
                    if k == nvars {
                        break;
                    }
                    if alpha[k] < gamma[k] {
                        alpha[k] += 1;
                        break;
                    }
                    alpha[k] = 0;
                    k += 1;
                }
                if k == nvars {
                    break;
                }
            }
        }
        Self {
            nvars,
            order,
            monomials,
            lookup,
            products,
            degree_start,
        }
    }

    /// Shared space for `nvars` variables truncated at `order`.
    pub fn get(nvars: usize, order: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<SpaceCache>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet space cache poisoned");
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetSpace::build(nvars, order)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Vec<u8>] {
        &self.monomials
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

/// Truncated multivariate Taylor expansion around a center point.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.space.nvars)
            .field("order", &self.space.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

fn factorial(k: u8) -> f64 {
    (1..=k as u64).product::<u64>() as f64
}

fn multi_factorial(alpha: &[u8]) -> f64 {
    alpha.iter().map(|&a| factorial(a)).product()
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, c: f64) -> Self {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = c;
        Self {
            space: space.clone(),
            coeffs,
        }
    }

    /// The coordinate function `x_var` expanded around `value`.
    pub fn variable(space: &Arc<JetSpace>, value: f64, var: usize) -> Self {
        assert!(var < space.nvars, "variable index out of range");
        let mut jet = Self::constant(space, value);
        if space.order >= 1 {
            let mut alpha = vec![0u8; space.nvars];
            alpha[var] = 1;
            jet.coeffs[space.lookup[&alpha]] = 1.0;
        }
        jet
    }

    /// One independent variable per center coordinate.
    pub fn variables(center: &[f64], order: usize) -> Vec<Jet> {
        let space = JetSpace::get(center.len(), order);
        center
            .iter()
            .enumerate()
            .map(|(i, &c)| Jet::variable(&space, c, i))
            .collect()
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.space.order
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient `∂^α f / α!`.
    pub fn coeff(&self, alpha: &[u8]) -> Result<f64> {
        self.check_alpha(alpha)?;
        Ok(self.coeffs[self.space.index_of(alpha).expect("checked multi-index")])
    }

    /// Raw partial derivative `∂^α f`.
    pub fn partial(&self, alpha: &[u8]) -> Result<f64> {
        Ok(self.coeff(alpha)? * multi_factorial(alpha))
    }

    /// Partial derivative along a list of variables, e.g. `[0, 0, 3]` is
    /// `∂³f / ∂x0² ∂x3`.
    pub fn derivative(&self, vars: &[usize]) -> Result<f64> {
        let mut alpha = vec![0u8; self.space.nvars];
        for &v in vars {
            if v >= self.space.nvars {
                return Err(FinslerError::Index(format!(
                    "variable {v} out of range for {} variables",
                    self.space.nvars
                )));
            }
            alpha[v] += 1;
        }
        self.partial(&alpha)
    }

    fn check_alpha(&self, alpha: &[u8]) -> Result<()> {
        if alpha.len() != self.space.nvars {
            return Err(FinslerError::Index(format!(
                "multi-index has {} entries, jet has {} variables",
                alpha.len(),
                self.space.nvars
            )));
        }
        let degree: usize = alpha.iter().map(|&a| a as usize).sum();
        if degree > self.space.order {
            return Err(FinslerError::Index(format!(
                "|alpha| = {degree} exceeds jet order {}",
                self.space.order
            )));
        }
        Ok(())
    }

    /// Jet of `∂f/∂x_var`, one order lower.
    pub fn differentiate(&self, var: usize) -> Jet {
        assert!(self.space.order >= 1, "cannot differentiate an order-0 jet");
        let target = JetSpace::get(self.space.nvars, self.space.order - 1);
        let mut coeffs = vec![0.0; target.len()];
        let mut raised = vec![0u8; self.space.nvars];
        for (i, beta) in target.monomials.iter().enumerate() {
            raised.copy_from_slice(beta);
            raised[var] += 1;
            let j = self.space.index_of(&raised).expect("raised index in space");
            coeffs[i] = raised[var] as f64 * self.coeffs[j];
        }
        Jet {
            space: target,
            coeffs,
        }
    }

    /// Drops all terms above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.space.order, "truncate cannot raise the order");
        if order == self.space.order {
            return self.clone();
        }
        let target = JetSpace::get(self.space.nvars, order);
        let coeffs = self.coeffs[..target.len()].to_vec();
        Jet {
            space: target,
            coeffs,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn same_space(&self, other: &Jet) {
        assert!(
            Arc::ptr_eq(&self.space, &other.space),
            "jets from different spaces cannot be combined"
        );
    }

    fn mul_ref(&self, other: &Jet) -> Jet {
        self.same_space(other);
        let mut coeffs = vec![0.0; self.coeffs.len()];
        let a = &self.coeffs;
        let b = &other.coeffs;
        for &(i, j, k) in &self.space.products {
            coeffs[k as usize] += a[i as usize] * b[j as usize];
        }
        Jet {
            space: self.space.clone(),
            coeffs,
        }
    }

    /// Evaluates `Σ_k series[k] h^k` where `h` is the non-constant part of
    /// `self` and `series[k] = f^{(k)}(value)/k!`.
    pub fn compose(&self, series: &[f64]) -> Jet {
        let order = self.space.order;
        debug_assert!(series.len() > order);
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut acc = Jet::constant(&self.space, series[order]);
        for k in (0..order).rev() {
            acc = acc.mul_ref(&h);
            acc.coeffs[0] += series[k];
        }
        acc
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut term = 1.0 / a;
        for _ in 0..=self.order() {
            series.push(term);
            term *= -1.0 / a;
        }
        self.compose(&series)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn powf(&self, p: f64) -> Jet {
        let a = self.value();
        let mut series = Vec::with_capacity(self.order() + 1);
        // binomial(p, k) a^(p-k)
        let mut binom = 1.0;
        for k in 0..=self.order() {
            series.push(binom * a.powf(p - k as f64));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&series)
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Jet::constant(&self.space, 1.0);
        for _ in 0..n {
            acc = acc.mul_ref(self);
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let series: Vec<f64> = (0..=self.order()).map(|k| e / factorial(k as u8)).collect();
        self.compose(&series)
    }

    pub fn ln(&self) -> Jet {
        let a = self.value();
        let mut series = vec![a.ln()];
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sign / (k as f64 * a.powi(k as i32)));
        }
        self.compose(&series)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let series: Vec<f64> = (0..=self.order())
            .map(|k| cycle[k % 4] / factorial(k as u8))
            .collect();
        self.compose(&series)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let series: Vec<f64> = (0..=self.order())
            .map(|k| cycle[k % 4] / factorial(k as u8))
            .collect();
        self.compose(&series)
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        self.same_space(other);
        Jet {
            space: self.space.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|&a| f(a)).collect(),
        }
    }

    /// Degree-`d` homogeneous slice of the coefficient vector.
    pub fn degree_coeffs(&self, d: usize) -> &[f64] {
        let s = &self.space.degree_start;
        &self.coeffs[s[d]..s[d + 1]]
    }
}

/// Expands `f` around `center` to the given order.
pub fn jet_lift<F>(f: F, center: &[f64], order: usize) -> Result<Jet>
where
    F: FnOnce(&[Jet]) -> Jet,
{
    if order > MAX_ORDER {
        return Err(FinslerError::Index(format!(
            "jet order {order} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    let vars = Jet::variables(center, order);
    let jet = f(&vars);
    if !jet.is_finite() {
        return Err(FinslerError::Domain(format!(
            "evaluation is singular at {center:?}"
        )));
    }
    Ok(jet)
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| a.zip_with(b, |x, y| x + y));
jet_binop!(Sub, sub, |a, b| a.zip_with(b, |x, y| x - y));
jet_binop!(Mul, mul, |a, b| a.mul_ref(b));
jet_binop!(Div, div, |a, b| a.mul_ref(&b.recip()));

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.map(|a| a * rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.map(|a| a / rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.map(|a| a * rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map(|a| -a)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map(|a| -a)
    }
}
