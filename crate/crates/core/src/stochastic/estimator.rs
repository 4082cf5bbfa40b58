use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{pairwise_sum, path_rng, Process, SdeConfig};
use crate::error::{Error, Result};

/// Paths whose weight exponent exceeds this are flagged, not averaged.
pub const EXPONENT_LIMIT: f64 = 700.0;

/// Toy dimension cap for Girsanov checks.
const GIRSANOV_MAX_DOF: usize = 8;

/// Rule for the path integral `∫ V du`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    #[default]
    Trapezoid,
    /// `Σ V(x_k) dt`, the product of local semigroups.
    LeftPoint,
}

impl Quadrature {
    fn increment(self, v_prev: f64, v_next: f64, dt: f64) -> f64 {
        match self {
            Quadrature::Trapezoid => 0.5 * (v_prev + v_next) * dt,
            Quadrature::LeftPoint => v_prev * dt,
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

impl FkEstimate {
    /// Mean and `sample-std / sqrt(n)` with fixed-order summation. Fewer
    /// than two samples give a zero standard error.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                n_paths: 0,
            };
        }
        let mean = pairwise_sum(xs) / n as f64;
        let std_error = if n < 2 {
            0.0
        } else {
            let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&sq) / (n - 1) as f64 / n as f64).sqrt()
        };
        Self {
            mean,
            std_error,
            n_paths: n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    Value { value: f64, exponent: f64 },
    Flagged { exponent: f64 },
    Aborted,
}

/// A Feynman-Kac estimate with path diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FkReport {
    pub estimate: FkEstimate,
    pub n_requested: usize,
    pub n_aborted: usize,
    pub n_flagged: usize,
    /// Largest weight exponent seen on any completed path.
    pub max_exponent: f64,
}

impl FkReport {
    pub fn abort_fraction(&self) -> f64 {
        self.n_aborted as f64 / self.n_requested as f64
    }

    /// False when any path overflowed or none survived.
    pub fn reliable(&self) -> bool {
        self.n_flagged == 0 && self.estimate.n_paths > 0
    }

    fn collect(outcomes: &[Outcome]) -> Self {
        let mut values = Vec::with_capacity(outcomes.len());
        let mut n_aborted = 0;
        let mut n_flagged = 0;
        let mut max_exponent = f64::NEG_INFINITY;
        for o in outcomes {
            match *o {
                Outcome::Value { value, exponent } => {
                    values.push(value);
                    max_exponent = max_exponent.max(exponent);
                }
                Outcome::Flagged { exponent } => {
                    n_flagged += 1;
                    max_exponent = max_exponent.max(exponent);
                }
                Outcome::Aborted => n_aborted += 1,
            }
        }
        Self {
            estimate: FkEstimate::from_samples(&values),
            n_requested: outcomes.len(),
            n_aborted,
            n_flagged,
            max_exponent,
        }
    }
}

fn weigh(value: f64, exponent: f64) -> Outcome {
    if exponent > EXPONENT_LIMIT {
        Outcome::Flagged { exponent }
    } else {
        Outcome::Value {
            value: value * exponent.exp(),
            exponent,
        }
    }
}

/// `E[φ0(x_T) exp{(1/μ²κ) ∫₀ᵀ V(x_u) du}]` over `cfg.n_paths` paths.
pub fn feynman_kac<P, Phi, V>(
    process: &P,
    cfg: &SdeConfig,
    initial: &P::State,
    phi0: Phi,
    v: V,
    quadrature: Quadrature,
) -> Result<FkReport>
where
    P: Process,
    Phi: Fn(&P::State) -> f64 + Sync,
    V: Fn(&P::State) -> f64 + Sync,
{
    let diffusion = cfg.diffusion();
    if diffusion <= 0.0 {
        return Err(Error::InvalidParameter(
            "Feynman-Kac weights need mu > 0".into(),
        ));
    }
    let outcomes: Vec<Outcome> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, i);
            let mut x = initial.clone();
            let mut v_prev = v(&x);
            let mut integral = 0.0;
            for _ in 0..cfg.n_steps {
                x = match process.step(&x, cfg.dt, &mut rng) {
                    Ok(next) => next,
                    Err(_) => return Outcome::Aborted,
                };
                let v_next = v(&x);
                integral += quadrature.increment(v_prev, v_next, cfg.dt);
                v_prev = v_next;
            }
            weigh(phi0(&x), integral / diffusion)
        })
        .collect();
    Ok(FkReport::collect(&outcomes))
}

/// Drifted expectation and reweighted driftless expectation of `φ0(x_T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GirsanovReport {
    pub drifted: FkReport,
    pub reweighted: FkReport,
}

impl GirsanovReport {
    /// `sqrt(se_1² + se_2²)`.
    pub fn combined_std_error(&self) -> f64 {
        self.drifted
            .estimate
            .std_error
            .hypot(self.reweighted.estimate.std_error)
    }

    pub fn discrepancy(&self) -> f64 {
        (self.drifted.estimate.mean - self.reweighted.estimate.mean).abs()
    }
}

/// Compare `dx = b dt + s dW` against `dy = s dW` weighted by
/// `exp{Σ (b/s)·ΔW - ½ |b/s|² dt}`, which is the exact likelihood ratio of
/// the two Euler chains. Path `i` of both runs uses the same increments.
pub fn girsanov_check<B, Phi>(
    cfg: &SdeConfig,
    scale: f64,
    initial: &DVector<f64>,
    drift: B,
    phi0: Phi,
) -> Result<GirsanovReport>
where
    B: Fn(&DVector<f64>) -> Result<DVector<f64>> + Sync,
    Phi: Fn(&DVector<f64>) -> f64 + Sync,
{
    let dof = initial.len();
    if dof > GIRSANOV_MAX_DOF {
        return Err(Error::TooManyDof {
            dof,
            limit: GIRSANOV_MAX_DOF,
        });
    }
    if scale.is_nan() || scale <= 0.0 {
        return Err(Error::InvalidParameter(
            "noise scale must be positive".into(),
        ));
    }
    let sqrt_dt = cfg.dt.sqrt();
    let pairs: Vec<(Outcome, Outcome)> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, i);
            let mut x = initial.clone();
            let mut y = initial.clone();
            let mut log_density = 0.0;
            let mut x_alive = true;
            let mut y_alive = true;
            for _ in 0..cfg.n_steps {
                let dw =
                    DVector::from_fn(dof, |_, _| sqrt_dt * rng.sample::<f64, _>(StandardNormal));
                if x_alive {
                    match drift(&x) {
                        Ok(b) => x += b * cfg.dt + &dw * scale,
                        Err(_) => x_alive = false,
                    }
                }
                if y_alive {
                    match drift(&y) {
                        Ok(b) => {
                            let u = b / scale;
                            log_density += u.dot(&dw) - 0.5 * u.norm_squared() * cfg.dt;
                            y += &dw * scale;
                        }
                        Err(_) => y_alive = false,
                    }
                }
            }
            let drifted = if x_alive {
                weigh(phi0(&x), 0.0)
            } else {
                Outcome::Aborted
            };
            let reweighted = if y_alive {
                weigh(phi0(&y), log_density)
            } else {
                Outcome::Aborted
            };
            (drifted, reweighted)
        })
        .collect();
    let (d, r): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok(GirsanovReport {
        drifted: FkReport::collect(&d),
        reweighted: FkReport::collect(&r),
    })
}

/// Mean of `F_dt - F_ref` for one coarse level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelDifference {
    pub dt: f64,
    pub mean: f64,
    pub std_error: f64,
}

/// Weak-error profile of the Feynman-Kac functional for `dx = s dW` in
/// `R^dim`. Each path draws reference increments at `cfg.dt`; level `r`
/// sums them in blocks of `r`, so all levels share the same Brownian path.
/// Returns, per ratio, the mean and standard error of `F_level - F_ref`.
#[allow(clippy::too_many_arguments)]
pub fn coupled_level_differences<Phi, V>(
    cfg: &SdeConfig,
    dim: usize,
    scale: f64,
    initial: &DVector<f64>,
    phi0: Phi,
    v: V,
    quadrature: Quadrature,
    ratios: &[usize],
) -> Result<Vec<LevelDifference>>
where
    Phi: Fn(&DVector<f64>) -> f64 + Sync,
    V: Fn(&DVector<f64>) -> f64 + Sync,
{
    let diffusion = cfg.diffusion();
    if diffusion <= 0.0 {
        return Err(Error::InvalidParameter(
            "Feynman-Kac weights need mu > 0".into(),
        ));
    }
    if initial.len() != dim {
        return Err(Error::LengthMismatch {
            kind: "initial state",
            expected: dim,
            found: initial.len(),
        });
    }
    if let Some(&r) = ratios
        .iter()
        .find(|&&r| r == 0 || !cfg.n_steps.is_multiple_of(r))
    {
        return Err(Error::InvalidParameter(format!(
            "ratio {r} does not divide n_steps = {}",
            cfg.n_steps
        )));
    }
    // `dw` holds `n_steps` consecutive blocks of `dim` reference increments.
    let functional = |dw: &[f64], block: usize| {
        let dt = cfg.dt * block as f64;
        let mut x = initial.clone();
        let mut v_prev = v(&x);
        let mut integral = 0.0;
        for chunk in dw.chunks(block * dim) {
            for (i, d) in chunk.iter().enumerate() {
                x[i % dim] += scale * d;
            }
            let v_next = v(&x);
            integral += quadrature.increment(v_prev, v_next, dt);
            v_prev = v_next;
        }
        phi0(&x) * (integral / diffusion).exp()
    };
    let sqrt_dt = cfg.dt.sqrt();
    let rows: Vec<Vec<f64>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, i);
            let dw: Vec<f64> = (0..cfg.n_steps * dim)
                .map(|_| sqrt_dt * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let reference = functional(&dw, 1);
            ratios
                .iter()
                .map(|&r| functional(&dw, r) - reference)
                .collect()
        })
        .collect();
    Ok(ratios
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let col: Vec<f64> = rows.iter().map(|row| row[k]).collect();
            let e = FkEstimate::from_samples(&col);
            LevelDifference {
                dt: cfg.dt * r as f64,
                mean: e.mean,
                std_error: e.std_error,
            }
        })
        .collect())
}
