//! Forward-mode differentiation through truncated Taylor jets.

mod jet;
mod scalar;

pub use jet::{jet_lift, Jet, JetSpace, MAX_ORDER};
pub use scalar::{dot, linear, quad_form, DynRule, Scalar};

/// Gauss-Jordan solve `A X = B` over jets, pivoting on constant terms.
///
/// `a` is row-major `n x n`, `b` is `n x m`. Returns `None` when a pivot's
/// constant term vanishes.
pub fn solve_jets(mut a: Vec<Vec<Jet>>, mut b: Vec<Vec<Jet>>) -> Option<Vec<Vec<Jet>>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .value()
                .abs()
                .total_cmp(&a[j][col].value().abs())
        })?;
        if a[pivot][col].value().abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for k in 0..n {
            a[col][k] = &a[col][k] * &inv;
        }
        for k in 0..b[col].len() {
            b[col][k] = &b[col][k] * &inv;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col].clone();
            for k in 0..n {
                a[row][k] = &a[row][k] - &(&factor * &a[col][k]);
            }
            for k in 0..b[row].len() {
                b[row][k] = &b[row][k] - &(&factor * &b[col][k]);
            }
        }
    }
    Some(b)
}
