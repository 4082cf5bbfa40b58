//! Euler-Maruyama integration of the original and reduced SDEs, Wiener
//! increments, Feynman-Kac estimation and Girsanov reweighting.
//!
//! Every path draws from its own ChaCha8 stream `(seed, path_index)`, paths
//! run on the rayon pool, and results are reduced in path order with a
//! pairwise sum. Estimates are therefore bitwise identical for any thread
//! count.

mod estimator;
mod process;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub use estimator::{
    coupled_level_differences, feynman_kac, girsanov_check, FkEstimate, FkReport, GirsanovReport,
    LevelDifference, Quadrature, EXPONENT_LIMIT,
};
pub use process::{
    euler_step_original, euler_step_reduced, simulate_path, Brownian, DriftedBrownian,
    OriginalProcess, PathResult, Process, ReducedProcess, SdePath, ABORT_THRESHOLD,
};

/// Integration parameters shared by all processes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeConfig {
    pub mu: f64,
    pub kappa: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
}

impl SdeConfig {
    /// `mu = 0` is accepted (a frozen process); Feynman-Kac weights need
    /// `mu > 0` and check it themselves.
    pub fn new(
        mu: f64,
        kappa: f64,
        dt: f64,
        n_steps: usize,
        n_paths: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mu must be >= 0, got {mu}"
            )));
        }
        for (name, v) in [("kappa", kappa), ("dt", dt)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if n_steps == 0 || n_paths == 0 {
            return Err(Error::InvalidParameter(
                "n_steps and n_paths must be >= 1".into(),
            ));
        }
        Ok(Self {
            mu,
            kappa,
            dt,
            n_steps,
            n_paths,
            seed,
        })
    }

    /// `T = dt · n_steps`.
    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    /// `μ²κ`.
    pub fn diffusion(&self) -> f64 {
        self.mu * self.mu * self.kappa
    }

    /// `μ√κ`.
    pub fn noise(&self) -> f64 {
        self.mu * self.kappa.sqrt()
    }
}

/// The generator for path `path` of a run seeded with `seed`.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// `n` i.i.d. `N(0, dt)` draws.
pub fn wiener_increments<R: Rng + ?Sized>(n: usize, dt: f64, rng: &mut R) -> Vec<f64> {
    let s = dt.sqrt();
    (0..n)
        .map(|_| s * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Lattice Wiener increments with `E[dw(x) dw(y)] = dt δ_xy / w`.
pub fn lattice_increments<R: Rng + ?Sized>(
    n: usize,
    dt: f64,
    weight: f64,
    rng: &mut R,
) -> DVector<f64> {
    let s = (dt / weight).sqrt();
    DVector::from_fn(n, |_, _| s * rng.sample::<f64, _>(StandardNormal))
}

/// Cascade summation in a fixed order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}
