//! Independent reference values for the Monte Carlo estimators: a
//! finite-difference solver of the backward Kolmogorov equation on at most
//! three degrees of freedom, and closed-form Gaussian kernels.

mod closed_form;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::stochastic::FkEstimate;

pub use closed_form::{heat_gaussian, mehler_gaussian};

/// Desk-scale limit on the number of grid dimensions.
pub const MAX_DOF: usize = 3;

/// Boundary leak above which a result is flagged.
pub const LEAK_WARNING: f64 = 1e-3;

/// Grid parameters. Points per axis sit at `-L + h (k + 1)`,
/// `k = 0..n`, with `h = 2L / (n + 1)`; the exterior is Dirichlet zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dof: usize,
    pub grid_points_per_dof: usize,
    pub box_halfwidth: f64,
    /// `μ²κ`.
    pub diffusion: f64,
}

/// The discretized generator `½ μ²κ Δ_h + (1/μ²κ) diag(V)`, stored as a
/// stencil plus potential diagonal.
#[derive(Debug, Clone)]
pub struct GridPde {
    spec: GridSpec,
    h: f64,
    potential: DVector<f64>,
    strides: Vec<usize>,
}

/// A propagated grid function with the boundary diagnostic.
#[derive(Debug, Clone)]
pub struct Evolved {
    pub values: DVector<f64>,
    /// Set when [`GridPde::boundary_leak`] at the evaluation point exceeds
    /// [`LEAK_WARNING`].
    pub boundary_warning: bool,
}

impl GridPde {
    /// Build the generator for the potential `v` (evaluated on grid points).
    pub fn build<V>(spec: GridSpec, v: V) -> Result<Self>
    where
        V: Fn(&[f64]) -> f64,
    {
        if spec.dof == 0 || spec.dof > MAX_DOF {
            return Err(Error::TooManyDof {
                dof: spec.dof,
                limit: MAX_DOF,
            });
        }
        if spec.grid_points_per_dof < 3 {
            return Err(Error::InvalidParameter(
                "need at least 3 grid points per dof".into(),
            ));
        }
        for (name, x) in [
            ("box_halfwidth", spec.box_halfwidth),
            ("diffusion", spec.diffusion),
        ] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {x}"
                )));
            }
        }
        let n = spec.grid_points_per_dof;
        let h = 2.0 * spec.box_halfwidth / (n + 1) as f64;
        let total = n.pow(spec.dof as u32);
        let strides: Vec<usize> = (0..spec.dof)
            .map(|d| n.pow((spec.dof - 1 - d) as u32))
            .collect();
        let mut pde = Self {
            spec,
            h,
            potential: DVector::zeros(total),
            strides,
        };
        let inv_d = 1.0 / spec.diffusion;
        let pot = DVector::from_fn(total, |i, _| v(&pde.point(i)) * inv_d);
        pde.potential = pot;
        Ok(pde)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.potential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potential.is_empty()
    }

    /// Coordinate of grid point `k` along one axis.
    pub fn axis(&self, k: usize) -> f64 {
        -self.spec.box_halfwidth + self.h * (k + 1) as f64
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        let n = self.spec.grid_points_per_dof;
        self.strides
            .iter()
            .map(|s| self.axis((i / s) % n))
            .collect()
    }

    /// Sample `f` on the grid.
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> DVector<f64> {
        DVector::from_fn(self.len(), |i, _| f(&self.point(i)))
    }

    /// `G ψ`.
    pub fn apply(&self, psi: &DVector<f64>) -> DVector<f64> {
        let n = self.spec.grid_points_per_dof;
        let c = 0.5 * self.spec.diffusion / (self.h * self.h);
        let dof = self.spec.dof as f64;
        DVector::from_fn(psi.len(), |i, _| {
            let mut acc = (self.potential[i] - 2.0 * dof * c) * psi[i];
            for &s in &self.strides {
                let k = (i / s) % n;
                if k > 0 {
                    acc += c * psi[i - s];
                }
                if k + 1 < n {
                    acc += c * psi[i + s];
                }
            }
            acc
        })
    }

    /// Dense generator; only for small grids.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.len();
        let mut g = DMatrix::zeros(m, m);
        let mut e = DVector::zeros(m);
        for j in 0..m {
            e[j] = 1.0;
            g.set_column(j, &self.apply(&e));
            e[j] = 0.0;
        }
        g
    }

    /// Upper bound on `‖G‖_∞`.
    fn norm_bound(&self) -> f64 {
        let c = 0.5 * self.spec.diffusion / (self.h * self.h);
        4.0 * self.spec.dof as f64 * c + self.potential.amax()
    }

    /// `exp(T G) φ0` by sub-stepping with truncated Taylor series.
    pub fn propagate(&self, phi0: &DVector<f64>, t: f64) -> DVector<f64> {
        if t == 0.0 {
            return phi0.clone();
        }
        let steps = (t * self.norm_bound()).ceil().max(1.0) as usize;
        let tau = t / steps as f64;
        let mut psi = phi0.clone();
        for _ in 0..steps {
            let mut term = psi.clone();
            let mut sum = psi.clone();
            for k in 1..=60 {
                term = self.apply(&term) * (tau / k as f64);
                sum += &term;
                if term.amax() <= 1e-17 * sum.amax() {
                    break;
                }
            }
            psi = sum;
        }
        psi
    }

    /// `1 - ψ(x0)` for `φ ≡ 1` under the `V ≡ 0` semigroup: the survival
    /// deficit caused by the absorbing box.
    pub fn boundary_leak(&self, x0: &[f64], t: f64) -> f64 {
        let free = Self {
            potential: DVector::zeros(self.len()),
            ..self.clone()
        };
        let ones = DVector::from_element(self.len(), 1.0);
        1.0 - free.interpolate(&free.propagate(&ones, t), x0)
    }

    pub fn evolve(&self, phi0: &DVector<f64>, t: f64, x0: &[f64]) -> Evolved {
        Evolved {
            values: self.propagate(phi0, t),
            boundary_warning: self.boundary_leak(x0, t) > LEAK_WARNING,
        }
    }

    /// Multilinear interpolation; zero outside the grid hull, matching the
    /// Dirichlet exterior at the box edges.
    pub fn interpolate(&self, psi: &DVector<f64>, x: &[f64]) -> f64 {
        let n = self.spec.grid_points_per_dof as isize;
        let mut base = Vec::with_capacity(x.len());
        let mut frac = Vec::with_capacity(x.len());
        for &xi in x {
            let u = (xi + self.spec.box_halfwidth) / self.h - 1.0;
            let k = u.floor();
            base.push(k as isize);
            frac.push(u - k);
        }
        let dof = self.spec.dof;
        let mut total = 0.0;
        for corner in 0..(1usize << dof) {
            let mut weight = 1.0;
            let mut idx = 0usize;
            let mut inside = true;
            for d in 0..dof {
                let bit = (corner >> d) & 1;
                let k = base[d] + bit as isize;
                weight *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
                if k < 0 || k >= n {
                    inside = false;
                    break;
                }
                idx += k as usize * self.strides[d];
            }
            if inside && weight != 0.0 {
                total += weight * psi[idx];
            }
        }
        total
    }

    /// `ψ(x0)` on the grid of `spec` and on the nested grid with half the
    /// spacing. Returns the fine value, `|coarse - fine|` as the
    /// discretization budget, and the fine grid's boundary warning.
    pub fn value_with_budget<V, F>(
        spec: GridSpec,
        v: V,
        phi0: F,
        t: f64,
        x0: &[f64],
    ) -> Result<(f64, f64, bool)>
    where
        V: Fn(&[f64]) -> f64 + Copy,
        F: Fn(&[f64]) -> f64 + Copy,
    {
        let coarse = Self::build(spec, v)?;
        let fine = Self::build(
            GridSpec {
                grid_points_per_dof: 2 * spec.grid_points_per_dof + 1,
                ..spec
            },
            v,
        )?;
        let c = coarse.evolve(&coarse.sample(phi0), t, x0);
        let f = fine.evolve(&fine.sample(phi0), t, x0);
        let vc = coarse.interpolate(&c.values, x0);
        let vf = fine.interpolate(&f.values, x0);
        Ok((vf, (vc - vf).abs(), f.boundary_warning))
    }
}

/// Eigenvalues of the `V ≡ 0` one-dimensional generator on `n` points:
/// `-½ μ²κ (4/h²) sin²(π k / (2(n + 1)))`, `k = 1..=n`.
pub fn free_grid_eigenvalues(n: usize, box_halfwidth: f64, diffusion: f64) -> Vec<f64> {
    let h = 2.0 * box_halfwidth / (n + 1) as f64;
    (1..=n)
        .map(|k| {
            let s = (std::f64::consts::PI * k as f64 / (2.0 * (n + 1) as f64)).sin();
            -0.5 * diffusion * 4.0 / (h * h) * s * s
        })
        .collect()
}

/// Outcome of comparing a Monte Carlo estimate with a reference value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub mc: f64,
    pub std_error: f64,
    pub reference: f64,
    pub budget: f64,
    pub difference: f64,
}

/// PASS iff `|mc - ref| ≤ 3 se + budget`.
pub fn compare(fk: &FkEstimate, reference: f64, budget: f64) -> Verdict {
    let difference = (fk.mean - reference).abs();
    Verdict {
        pass: difference <= 3.0 * fk.std_error + budget,
        mc: fk.mean,
        std_error: fk.std_error,
        reference,
        budget,
        difference,
    }
}
