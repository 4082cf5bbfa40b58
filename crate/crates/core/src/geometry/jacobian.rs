use nalgebra::DVector;

use super::OrbitGeometry;
use crate::error::{Error, Result};

/// Physical constants entering the Jacobian: `μ`, `κ` and the mass `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionConstants {
    pub mu: f64,
    pub kappa: f64,
    pub mass: f64,
}

impl ReductionConstants {
    pub fn new(mu: f64, kappa: f64, mass: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("kappa", kappa), ("mass", mass)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self { mu, kappa, mass })
    }

    /// `μ²κ`, the diffusion coefficient.
    pub fn diffusion(&self) -> f64 {
        self.mu * self.mu * self.kappa
    }
}

/// Terms of the reduction Jacobian `J = -⅛ μ²κ (Δσ + ¼ |∇σ|²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianReport {
    /// `ln det D`.
    pub logdet: f64,
    /// `h^{ab} σ_ab - T^a σ_a`.
    pub laplace_term: f64,
    /// `h^{ab} σ_a σ_b`.
    pub grad_term: f64,
    /// Laplacian over all reduced indices, including the `σ_A = 0` blocks.
    pub laplace_term_full: f64,
    /// Squared gradient over all reduced indices.
    pub grad_term_full: f64,
    pub j: f64,
    /// `-(μ²κ / 8m)(Δσ + ¼ |∇σ|²)`.
    pub v_correction: f64,
}

impl OrbitGeometry<'_> {
    pub fn reduction_jacobian(&self, constants: ReductionConstants) -> JacobianReport {
        let sigma = self.sigma_derivatives();
        let t = self.christoffel_contraction();
        let s_f = &sigma.grad_f.0;

        let laplace_term =
            self.h_ff.component_mul(&sigma.hess_ff.transpose()).sum() - t.scalar.dot(s_f);
        let grad_term = s_f.dot(&(&self.h_ff * s_f));

        let sv = self.h_aa.nrows();
        let tv = self.h_ff.nrows();
        let h = self.h_full();
        let mut s_full = DVector::zeros(sv + tv);
        s_full.rows_mut(sv, tv).copy_from(s_f);
        let mut hess_full = nalgebra::DMatrix::zeros(sv + tv, sv + tv);
        hess_full
            .view_mut((sv, sv), (tv, tv))
            .copy_from(&sigma.hess_ff);
        let mut t_full = DVector::zeros(sv + tv);
        t_full.rows_mut(0, sv).copy_from(&t.gauge);
        t_full.rows_mut(sv, tv).copy_from(&t.scalar);
        let laplace_term_full = (&h * &hess_full).trace() - t_full.dot(&s_full);
        let grad_term_full = s_full.dot(&(&h * &s_full));

        let bracket = laplace_term + 0.25 * grad_term;
        let diffusion = constants.diffusion();
        JacobianReport {
            logdet: sigma.sigma,
            laplace_term,
            grad_term,
            laplace_term_full,
            grad_term_full,
            j: -0.125 * diffusion * bracket,
            v_correction: -diffusion / (8.0 * constants.mass) * bracket,
        }
    }
}
