//! Small dense tensors and guarded linear algebra for chart computations.

use nalgebra::{DMatrix, DVector};

use crate::error::{FinslerError, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Largest accepted 1-norm condition estimate before a matrix is treated
/// as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Dense `n x n x n` array indexed `[i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    t.data[(i * n + j) * n + k] = f(i, j, k);
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] += v;
    }

    /// `Σ T[i][j][k] a_i b_j c_k`.
    pub fn trilinear(&self, a: &Vector, b: &Vector, c: &Vector) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    acc += self.get(i, j, k) * a[i] * b[j] * c[k];
                }
            }
        }
        acc
    }

    /// Vector with components `Σ_jk T[i][j][k] a_j b_k` (first index free).
    pub fn contract_last_two(&self, a: &Vector, b: &Vector) -> Vector {
        let n = self.n;
        Vector::from_fn(n, |i, _| {
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    acc += self.get(i, j, k) * a[j] * b[k];
                }
            }
            acc
        })
    }

    /// Matrix `M[i][k] = Σ_j T[i][j][k] a_j`.
    pub fn contract_middle(&self, a: &Vector) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, n, |i, k| (0..n).map(|j| self.get(i, j, k) * a[j]).sum())
    }

    /// Matrix `M[j][k] = Σ_i T[i][j][k] a_i`.
    pub fn contract_first(&self, a: &Vector) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, n, |j, k| (0..n).map(|i| self.get(i, j, k) * a[i]).sum())
    }

    /// Matrix `M[i][j] = Σ_k T[i][j][k] a_k`.
    pub fn contract_last(&self, a: &Vector) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, n, |i, j| (0..n).map(|k| self.get(i, j, k) * a[k]).sum())
    }

    /// Raises the first index: `Σ_l ginv[i][l] T[l][j][k]`.
    pub fn raise_first(&self, ginv: &Matrix) -> Tensor3 {
        let n = self.n;
        Tensor3::from_fn(n, |i, j, k| (0..n).map(|l| ginv[(i, l)] * self.get(l, j, k)).sum())
    }

    /// Lowers the first index with `g`.
    pub fn lower_first(&self, g: &Matrix) -> Tensor3 {
        self.raise_first(g)
    }

    /// Permutes slots so that `out[a][b][c] = self[p(a,b,c)]`, where `perm`
    /// lists which source slot feeds each output slot.
    pub fn permuted(&self, perm: [usize; 3]) -> Tensor3 {
        Tensor3::from_fn(self.n, |a, b, c| {
            let idx = [a, b, c];
            let mut src = [0usize; 3];
            for (out_slot, &src_slot) in perm.iter().enumerate() {
                src[src_slot] = idx[out_slot];
            }
            self.get(src[0], src[1], src[2])
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &Tensor3) -> Tensor3 {
        Tensor3 {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Tensor3) -> Tensor3 {
        Tensor3 {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Tensor3 {
        Tensor3 {
            n: self.n,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Largest deviation from total symmetry over all slot permutations.
    pub fn symmetry_defect(&self) -> f64 {
        const PERMS: [[usize; 3]; 5] = [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        PERMS
            .iter()
            .map(|&p| self.sub(&self.permuted(p)).max_abs())
            .fold(0.0, f64::max)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl std::ops::Neg for Tensor3 {
    type Output = Tensor3;
    fn neg(self) -> Tensor3 {
        self.scale(-1.0)
    }
}

/// 1-norm condition estimate `‖A‖₁ ‖A⁻¹‖₁`.
pub fn condition_estimate(a: &Matrix, inv: &Matrix) -> f64 {
    let norm1 = |m: &Matrix| {
        (0..m.ncols())
            .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    norm1(a) * norm1(inv)
}

/// Inverse via pivoted LU, rejecting matrices whose condition estimate
/// exceeds [`MAX_CONDITION`].
pub fn guarded_inverse(a: &Matrix) -> Result<Matrix> {
    let inv = a
        .clone()
        .lu()
        .try_inverse()
        .ok_or(FinslerError::IllConditioned(f64::INFINITY))?;
    let cond = condition_estimate(a, &inv);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(FinslerError::IllConditioned(cond));
    }
    Ok(inv)
}

/// Solves `A x = b` with the same guard as [`guarded_inverse`].
pub fn guarded_solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    Ok(guarded_inverse(a)? * b)
}

/// True when the symmetric matrix admits a Cholesky factorization.
pub fn is_positive_definite(a: &Matrix) -> bool {
    a.clone().cholesky().is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_and_symmetry() {
        let t = Tensor3::from_fn(2, |i, j, k| (i + 2 * j + 4 * k) as f64);
        let p = t.permuted([1, 0, 2]);
        assert_eq!(p.get(0, 1, 0), t.get(1, 0, 0));
        assert!(t.symmetry_defect() > 0.0);
        let s = Tensor3::from_fn(3, |i, j, k| (i + j + k) as f64);
        assert_eq!(s.symmetry_defect(), 0.0);
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0 + 1e-15]);
        assert!(matches!(guarded_inverse(&a), Err(FinslerError::IllConditioned(_))));
        let b = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let inv = guarded_inverse(&b).unwrap();
        assert!((&b * inv - Matrix::identity(2, 2)).amax() < 1e-15);
    }
}
