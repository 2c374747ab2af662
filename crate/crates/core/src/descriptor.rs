//! Serializable metric descriptors used by scenario files.

use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::expr::Expr;
use crate::metric::{CovectorField, Domain, MetricSpec, RiemannianField};
use crate::tensor::{Matrix, Vector};

/// Quadratic part `α` of a Randers metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlphaDescriptor {
    #[default]
    Euclidean,
    Sphere,
    Hyperbolic,
    /// Constant symmetric positive-definite coefficients, row-major rows.
    Constant { matrix: Vec<Vec<f64>> },
}

/// A metric by name and parameters, e.g.
/// `{"name": "randers", "b": [0.5, 0.0]}` or
/// `{"name": "custom", "dim": 2, "f2": "norm2(y) + 0.1 * y1^2"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricDescriptor {
    Euclidean {
        #[serde(default = "two")]
        dim: usize,
    },
    Sphere {
        #[serde(default = "two")]
        dim: usize,
    },
    Hyperbolic {
        #[serde(default = "two")]
        dim: usize,
    },
    Riemannian { matrix: Vec<Vec<f64>> },
    /// `F = α(y) + b(x)·y` with `b(x) = b + slope x`.
    Randers {
        #[serde(default)]
        alpha: AlphaDescriptor,
        b: Vec<f64>,
        #[serde(default)]
        slope: Option<Vec<Vec<f64>>>,
    },
    /// The planar non-Berwald Randers metric used throughout the test suite.
    RandersDefault,
    Funk {
        #[serde(default = "two")]
        dim: usize,
    },
    Custom {
        dim: usize,
        f2: String,
        /// Restricts the chart to the ball `|x| < ball_radius`.
        #[serde(default)]
        ball_radius: Option<f64>,
        #[serde(default)]
        label: Option<String>,
    },
}

fn two() -> usize {
    2
}

fn square(rows: &[Vec<f64>], what: &str) -> Result<Matrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(FinslerError::Dimension(format!("{what} must be a non-empty square matrix")));
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn positive_definite(m: &Matrix, what: &str) -> Result<()> {
    if (m - m.transpose()).amax() > 1e-12 * (1.0 + m.amax()) || m.clone().cholesky().is_none() {
        return Err(FinslerError::Domain(format!("{what} must be symmetric positive definite")));
    }
    Ok(())
}

impl AlphaDescriptor {
    fn build(&self, dim: usize) -> Result<RiemannianField> {
        Ok(match self {
            Self::Euclidean => RiemannianField::Constant(Matrix::identity(dim, dim)),
            Self::Sphere => RiemannianField::Sphere { dim },
            Self::Hyperbolic => RiemannianField::Hyperbolic { dim },
            Self::Constant { matrix } => {
                let m = square(matrix, "alpha.matrix")?;
                if m.nrows() != dim {
                    return Err(FinslerError::Dimension(format!(
                        "alpha.matrix is {}x{} but b has {dim} components",
                        m.nrows(),
                        m.nrows()
                    )));
                }
                positive_definite(&m, "alpha.matrix")?;
                RiemannianField::Constant(m)
            }
        })
    }
}

impl MetricDescriptor {
    pub fn build(&self) -> Result<MetricSpec> {
        let nonzero = |dim: usize| {
            if dim == 0 {
                Err(FinslerError::Dimension("dim must be positive".into()))
            } else {
                Ok(dim)
            }
        };
        Ok(match self {
            Self::Euclidean { dim } => MetricSpec::euclidean(nonzero(*dim)?),
            Self::Sphere { dim } => MetricSpec::sphere(nonzero(*dim)?),
            Self::Hyperbolic { dim } => MetricSpec::hyperbolic(nonzero(*dim)?),
            Self::Funk { dim } => MetricSpec::funk(nonzero(*dim)?),
            Self::Riemannian { matrix } => {
                let m = square(matrix, "matrix")?;
                positive_definite(&m, "matrix")?;
                MetricSpec::riemannian("riemannian", RiemannianField::Constant(m))
            }
            Self::RandersDefault => MetricSpec::randers_default(),
            Self::Randers { alpha, b, slope } => {
                let n = nonzero(b.len())?;
                let slope = match slope {
                    Some(rows) => {
                        let m = square(rows, "slope")?;
                        if m.nrows() != n {
                            return Err(FinslerError::Dimension(format!(
                                "slope must be {n}x{n} to match b"
                            )));
                        }
                        m
                    }
                    None => Matrix::zeros(n, n),
                };
                MetricSpec::randers(
                    alpha.build(n)?,
                    CovectorField {
                        b0: Vector::from_column_slice(b),
                        slope,
                    },
                )
            }
            Self::Custom {
                dim,
                f2,
                ball_radius,
                label,
            } => {
                let expr = Expr::parse(f2, nonzero(*dim)?).map_err(|e| FinslerError::Domain(format!("f2: {e}")))?;
                let domain = match ball_radius {
                    Some(r) if *r > 0.0 => Domain::Ball { radius: *r },
                    Some(r) => return Err(FinslerError::Domain(format!("ball_radius must be positive, got {r}"))),
                    None => Domain::Whole,
                };
                MetricSpec::custom(label.as_deref().unwrap_or("custom"), *dim, expr.into_rule(), domain)
            }
        })
    }
}
