use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::gauge::GaugeStructure;
use crate::lattice::SiteDoublet;

/// The orbit metric `D = -Δ + g0² |f̃|²` with its factorization.
///
/// The physical metric on the orbit is `d = spacing^dim · D`; only
/// derivatives of `ln det` enter the reduction, so the constant
/// `V ln spacing^dim` is dropped and `logdet` refers to `D`.
#[derive(Debug, Clone)]
pub struct OrbitMetric {
    pub d: DMatrix<f64>,
    pub dinv: DMatrix<f64>,
    pub logdet: f64,
    factor: Cholesky<f64, Dyn>,
}

impl OrbitMetric {
    pub fn new(gs: &GaugeStructure, f: &SiteDoublet, g0: f64) -> Result<Self> {
        let norms = f.norm_squared();
        if norms.iter().all(|&n| n == 0.0) {
            return Err(Error::SingularOrbitMetric(
                "scalar field vanishes identically; the constant gauge mode has zero norm".into(),
            ));
        }
        let mut d = -&gs.faddeev_popov().matrix;
        for (x, n) in norms.iter().enumerate() {
            d[(x, x)] += g0 * g0 * n;
        }
        let factor = d.clone().cholesky().ok_or_else(|| {
            Error::SingularOrbitMetric("orbit metric is not positive definite".into())
        })?;
        let logdet = 2.0
            * factor
                .l_dirty()
                .diagonal()
                .iter()
                .map(|v| v.ln())
                .sum::<f64>();
        let mut dinv = factor.inverse();
        dinv = (&dinv + dinv.transpose()) * 0.5;
        Ok(Self {
            d,
            dinv,
            logdet,
            factor,
        })
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(rhs)
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }
}

/// `σ = ln det D` and its derivatives with respect to `f̃`.
#[derive(Debug, Clone)]
pub struct SigmaDerivatives {
    pub sigma: f64,
    /// `σ_a(x) = 2 g0² f̃^a(x) D⁻¹(x, x)`.
    pub grad_f: SiteDoublet,
    /// `σ_ab(x, y) = 2 g0² δ_ab δ_xy D⁻¹(x, x) - 4 g0⁴ f̃^a(x) f̃^b(y) D⁻¹(x, y)²`.
    pub hess_ff: DMatrix<f64>,
}

impl SigmaDerivatives {
    pub fn new(metric: &OrbitMetric, f: &SiteDoublet, g0: f64) -> Self {
        let v = metric.dim();
        let g2 = g0 * g0;
        let dinv = &metric.dinv;
        let grad = DVector::from_fn(2 * v, |i, _| 2.0 * g2 * f.0[i] * dinv[(i / 2, i / 2)]);
        let mut hess = DMatrix::zeros(2 * v, 2 * v);
        for x in 0..v {
            for y in 0..v {
                let dxy2 = dinv[(x, y)] * dinv[(x, y)];
                for a in 0..2 {
                    for b in 0..2 {
                        let mut val = -4.0 * g2 * g2 * f.0[2 * x + a] * f.0[2 * y + b] * dxy2;
                        if x == y && a == b {
                            val += 2.0 * g2 * dinv[(x, x)];
                        }
                        hess[(2 * x + a, 2 * y + b)] = val;
                    }
                }
            }
        }
        Self {
            sigma: metric.logdet,
            grad_f: SiteDoublet(grad),
            hess_ff: hess,
        }
    }
}
