//! Sampled curves and vector fields along them.

use serde::Serialize;

use crate::error::{FinslerError, Result};
use crate::metric::NULL_DIRECTION_SCALE;
use crate::tensor::Vector;

/// A regular curve sampled on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub grid: Vec<f64>,
    pub points: Vec<Vector>,
    pub velocities: Vec<Vector>,
}

/// A vector field along a curve, sampled on the curve's grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldAlongCurve {
    pub grid: Vec<f64>,
    pub values: Vec<Vector>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(FinslerError::Grid("a grid needs at least two nodes".into()));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(FinslerError::Grid(format!(
            "grid is not strictly increasing near t = {}",
            w[0]
        )));
    }
    Ok(())
}

impl Curve {
    pub fn new(grid: Vec<f64>, points: Vec<Vector>, velocities: Vec<Vector>) -> Result<Self> {
        check_grid(&grid)?;
        if points.len() != grid.len() || velocities.len() != grid.len() {
            return Err(FinslerError::Grid(format!(
                "{} nodes but {} points and {} velocities",
                grid.len(),
                points.len(),
                velocities.len()
            )));
        }
        Ok(Self {
            grid,
            points,
            velocities,
        })
    }

    /// Samples `t ↦ (p(t), p′(t))` on `nodes` uniform nodes of `[a, b]`.
    pub fn from_fn(
        a: f64,
        b: f64,
        nodes: usize,
        p: impl Fn(f64) -> Vector,
        dp: impl Fn(f64) -> Vector,
    ) -> Result<Self> {
        let grid = uniform_grid(a, b, nodes);
        let points = grid.iter().map(|&t| p(t)).collect();
        let velocities = grid.iter().map(|&t| dp(t)).collect();
        Self::new(grid, points, velocities)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Index of the first node with a null velocity, if any.
    pub fn first_null_velocity(&self) -> Option<usize> {
        self.velocities
            .iter()
            .position(|v| v.norm() < NULL_DIRECTION_SCALE)
    }

    pub fn velocity_field(&self) -> FieldAlongCurve {
        FieldAlongCurve {
            grid: self.grid.clone(),
            values: self.velocities.clone(),
        }
    }

    /// Cubic Hermite interpolation of the point and velocity at `t`.
    pub fn sample(&self, t: f64) -> (Vector, Vector) {
        let g = &self.grid;
        let i = match g.partition_point(|&s| s <= t) {
            0 => 0,
            k if k >= g.len() => g.len() - 2,
            k => k - 1,
        };
        let (t0, t1) = (g[i], g[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (p0, p1) = (&self.points[i], &self.points[i + 1]);
        let (m0, m1) = (&self.velocities[i] * h, &self.velocities[i + 1] * h);
        let (s2, s3) = (s * s, s * s * s);
        let p = p0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + &m0 * (s3 - 2.0 * s2 + s)
            + p1 * (-2.0 * s3 + 3.0 * s2)
            + &m1 * (s3 - s2);
        let dp = (p0 * (6.0 * s2 - 6.0 * s)
            + &m0 * (3.0 * s2 - 4.0 * s + 1.0)
            + p1 * (-6.0 * s2 + 6.0 * s)
            + &m1 * (3.0 * s2 - 2.0 * s))
            / h;
        (p, dp)
    }

    /// Resamples onto `nodes` uniform nodes spanning the same interval.
    pub fn resample(&self, nodes: usize) -> Curve {
        let grid = uniform_grid(self.grid[0], *self.grid.last().unwrap(), nodes);
        let (points, velocities) = grid.iter().map(|&t| self.sample(t)).unzip();
        Curve {
            grid,
            points,
            velocities,
        }
    }
}

impl FieldAlongCurve {
    pub fn new(grid: Vec<f64>, values: Vec<Vector>) -> Result<Self> {
        check_grid(&grid)?;
        if values.len() != grid.len() {
            return Err(FinslerError::Grid(format!(
                "{} nodes but {} values",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &[f64], f: impl Fn(f64) -> Vector) -> Result<Self> {
        Self::new(grid.to_vec(), grid.iter().map(|&t| f(t)).collect())
    }

    /// Nodewise time derivative by finite differences: five-point central
    /// stencils in the interior, four-point one-sided stencils at the two
    /// nodes nearest each end.
    pub fn derivative(&self) -> Result<FieldAlongCurve> {
        let n = self.grid.len();
        if n < 5 {
            return Err(FinslerError::Grid(format!(
                "differentiation needs at least 5 nodes, got {n}"
            )));
        }
        let values = (0..n)
            .map(|i| {
                let idx: Vec<usize> = if i < 2 {
                    (0..4).collect()
                } else if i + 2 >= n {
                    (n - 4..n).collect()
                } else {
                    (i - 2..=i + 2).collect()
                };
                let nodes: Vec<f64> = idx.iter().map(|&k| self.grid[k]).collect();
                let w = first_derivative_weights(self.grid[i], &nodes);
                idx.iter()
                    .zip(&w)
                    .fold(Vector::zeros(self.values[0].len()), |acc, (&k, &c)| {
                        acc + &self.values[k] * c
                    })
            })
            .collect();
        Ok(FieldAlongCurve {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.amax()).fold(0.0, f64::max)
    }

    /// Sup-norm distance; grids must coincide.
    pub fn distance(&self, other: &FieldAlongCurve) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max))
    }
}

pub(crate) fn same_grid(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() || a.iter().zip(b).any(|(s, t)| (s - t).abs() > 1e-12 * (1.0 + s.abs())) {
        return Err(FinslerError::Grid("fields are sampled on different grids".into()));
    }
    Ok(())
}

pub fn uniform_grid(a: f64, b: f64, nodes: usize) -> Vec<f64> {
    let nodes = nodes.max(2);
    let h = (b - a) / (nodes - 1) as f64;
    (0..nodes)
        .map(|i| if i == nodes - 1 { b } else { a + h * i as f64 })
        .collect()
}

/// Weights of the first-derivative Lagrange stencil at `t` over `nodes`.
fn first_derivative_weights(t: f64, nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    (0..m)
        .map(|j| {
            let denom: f64 = (0..m).filter(|&k| k != j).map(|k| nodes[j] - nodes[k]).product();
            let numer: f64 = (0..m)
                .filter(|&k| k != j)
                .map(|skip| {
                    (0..m)
                        .filter(|&k| k != j && k != skip)
                        .map(|k| t - nodes[k])
                        .product::<f64>()
                })
                .sum();
            numer / denom
        })
        .collect()
}

/// Composite Simpson rule on a uniform grid with an even number of
/// intervals.
pub fn simpson(grid: &[f64], values: &[f64]) -> Result<f64> {
    let n = grid.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(FinslerError::Grid(format!(
            "Simpson quadrature needs an odd node count of at least 3, got {n}"
        )));
    }
    let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    if grid
        .windows(2)
        .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300))
    {
        return Err(FinslerError::Grid("Simpson quadrature needs a uniform grid".into()));
    }
    let mut acc = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(acc * h / 3.0)
}
