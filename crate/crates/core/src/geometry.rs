//! Everything the connection layer needs at one point of the slit bundle,
//! evaluated from a single fourth-order jet of `F²`.

use crate::error::{FinslerError, Result};
use crate::metric::{fundamental_with_inverse, MetricJet, MetricSpec, TangentVector};
use crate::spray::{metric_spray_jets, spray_coefficients, Spray, SprayData};
use crate::tensor::{Matrix, Tensor3};

/// Metric data at `w`.
#[derive(Debug, Clone)]
pub struct MetricData {
    pub g: Matrix,
    pub ginv: Matrix,
    /// `[i][j][k] = ∂g_ij/∂x^k`.
    pub dg_dx: Tensor3,
    /// Cartan tensor `C_w`.
    pub cartan: Tensor3,
    /// `C′_w`, the rate of change of the Cartan tensor along the geodesic
    /// flow, with the orientation fixed so that the classical connections
    /// satisfy their characterising metric conditions (see [`cprime_from_jet`]).
    pub cprime: Tensor3,
}

#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub at: TangentVector,
    pub spray: SprayData,
    pub metric: Option<MetricData>,
}

impl PointGeometry {
    pub fn new(s: &dyn Spray, w: &TangentVector) -> Result<Self> {
        match s.as_metric() {
            Some(m) => Self::of_metric(m, w),
            None => Ok(Self {
                at: w.clone(),
                spray: spray_coefficients(s, w)?,
                metric: None,
            }),
        }
    }

    pub fn of_metric(m: &MetricSpec, w: &TangentVector) -> Result<Self> {
        let mj = MetricJet::new(m, w, 4)?;
        let (g, ginv) = fundamental_with_inverse(&mj)?;
        let spray = SprayData::from_jets(w, &metric_spray_jets(&mj)?);
        let cprime = cprime_from_jet(&mj, &spray);
        Ok(Self {
            at: w.clone(),
            metric: Some(MetricData {
                g,
                ginv,
                dg_dx: mj.fundamental_dx(),
                cartan: mj.cartan(),
                cprime,
            }),
            spray,
        })
    }

    pub fn dim(&self) -> usize {
        self.at.dim()
    }

    pub fn metric(&self) -> Result<&MetricData> {
        self.metric
            .as_ref()
            .ok_or_else(|| FinslerError::Domain("operation needs a metric spray".into()))
    }
}

/// Derivative of the Cartan tensor along the geodesic flow, written out by
/// the chain rule with Berwald-parallel arguments:
///
/// `L_klm = y^j ∂_{x^j} C_klm - 2 G^s ∂_{y^s} C_klm
///          - N^s_k C_slm - N^s_l C_ksm - N^s_m C_kls`.
///
/// The returned tensor is `C′ = -L`. With this orientation the Berwald
/// horizontal derivative of `g` equals `2C′`, which is what the Chern-Rund,
/// Hashiguchi and Berwald characterisations require.
pub(crate) fn cprime_from_jet(mj: &MetricJet, s: &SprayData) -> Tensor3 {
    -landsberg_from_jet(mj, s)
}

pub(crate) fn landsberg_from_jet(mj: &MetricJet, s: &SprayData) -> Tensor3 {
    let n = mj.dim();
    let y = &mj.at.y;
    let c = mj.cartan();
    Tensor3::from_fn(n, |k, l, m| {
        let mut acc = 0.0;
        for j in 0..n {
            acc += y[j] * 0.25 * mj.d(&[j], &[k, l, m]);
            acc -= 2.0 * s.g[j] * 0.25 * mj.d(&[], &[j, k, l, m]);
            acc -= s.n[(j, k)] * c.get(j, l, m) + s.n[(j, l)] * c.get(k, j, m) + s.n[(j, m)] * c.get(k, l, j);
        }
        acc
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CPrimeTensor {
    pub at: TangentVector,
    pub cp: Tensor3,
}

impl CPrimeTensor {
    pub fn apply(&self, u: &crate::tensor::Vector, v: &crate::tensor::Vector, z: &crate::tensor::Vector) -> f64 {
        self.cp.trilinear(u, v, z)
    }
}

pub fn cprime_tensor(m: &MetricSpec, w: &TangentVector) -> Result<CPrimeTensor> {
    let geo = PointGeometry::of_metric(m, w)?;
    Ok(CPrimeTensor {
        at: w.clone(),
        cp: geo.metric.expect("metric geometry").cprime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::seeded_rng;

    #[test]
    fn riemannian_cprime_vanishes() {
        let m = MetricSpec::hyperbolic(2);
        let w = TangentVector::from_slices(&[0.2, 0.3], &[0.5, -1.0]);
        assert!(cprime_tensor(&m, &w).unwrap().cp.max_abs() < 1e-12);
    }

    #[test]
    fn minkowski_cprime_vanishes() {
        let m = MetricSpec::randers_constant(&[0.3, -0.2]);
        let mut rng = seeded_rng(2);
        for _ in 0..10 {
            let w = m.sample_tangent(&mut rng);
            assert!(cprime_tensor(&m, &w).unwrap().cp.max_abs() < 1e-12);
        }
    }

    #[test]
    fn cprime_symmetric_and_null_on_w() {
        for m in [MetricSpec::randers_default(), MetricSpec::funk(2)] {
            let mut rng = seeded_rng(9);
            for _ in 0..10 {
                let w = m.sample_tangent(&mut rng);
                let cp = cprime_tensor(&m, &w).unwrap().cp;
                assert!(cp.max_abs() > 1e-6);
                assert!(cp.symmetry_defect() < 1e-10);
                assert!(cp.contract_last(&w.y).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn bare_geometry_has_no_metric() {
        let s = crate::spray::BareSpray {
            name: "zero".into(),
            dim: 2,
            rule: std::sync::Arc::new(Zero),
        };
        struct Zero;
        impl crate::ad::DynRule for Zero {
            fn eval_f64(&self, _x: &[f64], y: &[f64]) -> Vec<f64> {
                vec![0.0; y.len()]
            }
            fn eval_jet(&self, _x: &[crate::ad::Jet], y: &[crate::ad::Jet]) -> Vec<crate::ad::Jet> {
                y.iter().map(|v| v.clone() * 0.0).collect()
            }
        }
        let geo = PointGeometry::new(&s, &TangentVector::from_slices(&[0.0, 0.0], &[1.0, 0.0])).unwrap();
        assert!(geo.metric().is_err());
    }
}
