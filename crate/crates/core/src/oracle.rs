//! Reference computations used to cross-check the engine.
//!
//! Nothing in the main pipeline calls into this module. The Riemannian
//! routines work from the coefficient matrix `g_ij(x)` with the classical
//! Levi-Civita formulas, never from `F²` or the spray. The finite-difference
//! helpers use fourth-order central stencils.

use crate::ad::{jet_lift, Jet, Scalar};
use crate::error::Result;
use crate::metric::RiemannianField;
use crate::tensor::{guarded_inverse, Matrix, Tensor3, Vector};

/// `Γ^i_jk` and `∂_l Γ^i_jk` of a Riemannian coefficient field.
#[derive(Debug, Clone)]
pub struct LeviCivita {
    /// `[i][j][k] = Γ^i_jk`.
    pub gamma: Tensor3,
    /// `d_gamma[l]` is `∂_l Γ`.
    pub d_gamma: Vec<Tensor3>,
}

/// Expands each `g_ij` to second order at `x`.
fn metric_jets(field: &RiemannianField, x: &[f64]) -> Result<Vec<Vec<Jet>>> {
    let n = field.dim();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            row.push(jet_lift(
                |v: &[Jet]| {
                    let e = |k: usize| -> Vec<Jet> {
                        (0..n).map(|m| v[0].constant_like(if m == k { 1.0 } else { 0.0 })).collect()
                    };
                    field.pairing(v, &e(i), &e(j))
                },
                x,
                2,
            )?);
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn levi_civita(field: &RiemannianField, x: &[f64]) -> Result<LeviCivita> {
    let n = field.dim();
    let gj = metric_jets(field, x)?;
    let g = Matrix::from_fn(n, n, |i, j| gj[i][j].value());
    let ginv = guarded_inverse(&g)?;
    // dg[l][(i, j)] = ∂_l g_ij, ddg[l][m][(i, j)] = ∂_l ∂_m g_ij
    let dg: Vec<Matrix> = (0..n)
        .map(|l| Matrix::from_fn(n, n, |i, j| gj[i][j].derivative(&[l]).expect("order 2")))
        .collect();
    let ddg: Vec<Vec<Matrix>> = (0..n)
        .map(|l| {
            (0..n)
                .map(|m| Matrix::from_fn(n, n, |i, j| gj[i][j].derivative(&[l, m]).expect("order 2")))
                .collect()
        })
        .collect();
    // first kind: Γ_ljk = ½(∂_j g_lk + ∂_k g_lj − ∂_l g_jk)
    let first = |d: &dyn Fn(usize) -> Matrix| {
        let d: Vec<Matrix> = (0..n).map(d).collect();
        Tensor3::from_fn(n, |l, j, k| 0.5 * (d[j][(l, k)] + d[k][(l, j)] - d[l][(j, k)]))
    };
    let gamma_first = first(&|l| dg[l].clone());
    let gamma = gamma_first.raise_first(&ginv);
    // ∂_m Γ^i_jk = g^il ∂_m Γ_ljk − g^ia (∂_m g_ab) Γ^b_jk
    let d_gamma = (0..n)
        .map(|m| {
            let d_first = first(&|l| ddg[l][m].clone());
            let raised = d_first.raise_first(&ginv);
            let correction = Tensor3::from_fn(n, |i, j, k| {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        acc += ginv[(i, a)] * dg[m][(a, b)] * gamma.get(b, j, k);
                    }
                }
                acc
            });
            raised.sub(&correction)
        })
        .collect();
    Ok(LeviCivita { gamma, d_gamma })
}

/// `u ↦ R(u, w) w` for the Levi-Civita connection, with
/// `R(X, Y) Z = ∇_X ∇_Y Z − ∇_Y ∇_X Z − ∇_[X,Y] Z`.
pub fn riemann_operator(field: &RiemannianField, x: &[f64], w: &Vector) -> Result<Matrix> {
    let n = field.dim();
    let lc = levi_civita(field, x)?;
    let (g, dg) = (&lc.gamma, &lc.d_gamma);
    // R^i_jkl = ∂_k Γ^i_lj − ∂_l Γ^i_kj + Γ^i_km Γ^m_lj − Γ^i_lm Γ^m_kj,
    // R(∂_k, ∂_l) ∂_j = R^i_jkl ∂_i
    let riemann = |i: usize, j: usize, k: usize, l: usize| {
        let mut r = dg[k].get(i, l, j) - dg[l].get(i, k, j);
        for m in 0..n {
            r += g.get(i, k, m) * g.get(m, l, j) - g.get(i, l, m) * g.get(m, k, j);
        }
        r
    };
    Ok(Matrix::from_fn(n, n, |i, k| {
        let mut acc = 0.0;
        for j in 0..n {
            for l in 0..n {
                acc += riemann(i, j, k, l) * w[l] * w[j];
            }
        }
        acc
    }))
}

/// Fourth-order central difference `d/dt f(t)` at `t`.
pub fn derivative<F>(f: F, t: f64, h: f64) -> Result<Vector>
where
    F: Fn(f64) -> Result<Vector>,
{
    Ok((f(t - 2.0 * h)? - f(t + 2.0 * h)? + (f(t + h)? - f(t - h)?) * 8.0) / (12.0 * h))
}

/// Fourth-order central difference `d²/dt² f(t)` at `t`.
pub fn second_derivative<F>(f: F, t: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let f0 = f(t)?;
    Ok((-f(t - 2.0 * h)? - f(t + 2.0 * h)? + 16.0 * (f(t + h)? + f(t - h)?) - 30.0 * f0) / (12.0 * h * h))
}

/// Directional derivative of a vector field `x ↦ f(x)` along `u`.
pub fn directional<F>(f: F, x: &Vector, u: &Vector, h: f64) -> Result<Vector>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    derivative(|t| f(&(x + u * t)), 0.0, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_metric_has_no_symbols() {
        let f = RiemannianField::Constant(Matrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]));
        let lc = levi_civita(&f, &[0.4, -0.2]).unwrap();
        assert_eq!(lc.gamma.max_abs(), 0.0);
    }

    #[test]
    fn sphere_symbols_closed_form() {
        // conformal factor e^{2φ}, φ = ln 2 − ln(1 + |x|²): Γ^i_jk = δ_ij φ_k + δ_ik φ_j − δ_jk φ_i
        let x = [0.3, -0.5];
        let r2 = x[0] * x[0] + x[1] * x[1];
        let phi = [-2.0 * x[0] / (1.0 + r2), -2.0 * x[1] / (1.0 + r2)];
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let lc = levi_civita(&RiemannianField::Sphere { dim: 2 }, &x).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let expect = d(i, j) * phi[k] + d(i, k) * phi[j] - d(j, k) * phi[i];
                    assert!((lc.gamma.get(i, j, k) - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn gauss_curvature_of_model_spaces() {
        let x = [0.2, 0.1];
        for (field, k) in [
            (RiemannianField::Sphere { dim: 2 }, 1.0),
            (RiemannianField::Hyperbolic { dim: 2 }, -1.0),
        ] {
            let g = field.matrix(&x);
            let w = Vector::from_column_slice(&[0.7, 0.2]);
            let u = Vector::from_column_slice(&[-0.1, 0.9]);
            let r = riemann_operator(&field, &x, &w).unwrap();
            let area = w.dot(&(&g * &w)) * u.dot(&(&g * &u)) - w.dot(&(&g * &u)).powi(2);
            assert!(((&r * &u).dot(&(&g * &u)) / area - k).abs() < 1e-12);
        }
    }

    #[test]
    fn stencils_are_fourth_order() {
        let d = derivative(|t| Ok(Vector::from_element(1, t.sin())), 0.4, 1e-2).unwrap();
        assert!((d[0] - 0.4f64.cos()).abs() < 1e-9);
        let dd = second_derivative(|t| Ok(t.exp()), 0.0, 1e-2).unwrap();
        assert!((dd - 1.0).abs() < 1e-8);
    }
}
