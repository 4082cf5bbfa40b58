use nalgebra::DVector;
use rand_chacha::ChaCha8Rng;

use super::{lattice_increments, SdeConfig};
use crate::error::{Error, Result};
use crate::gauge::{AdaptedCoords, FieldPair, GaugeStructure};
use crate::geometry::OrbitGeometry;
use crate::lattice::{Lattice, SiteDoublet, SiteVector};

/// Reduced paths with `min_x |f̃(x)|²` below this value are aborted.
pub const ABORT_THRESHOLD: f64 = 1e-10;

/// One Euler-Maruyama step of a Markov process.
pub trait Process: Sync {
    type State: Clone + Send + Sync;

    /// Advance by `dt`. An error aborts the path.
    fn step(&self, x: &Self::State, dt: f64, rng: &mut ChaCha8Rng) -> Result<Self::State>;
}

/// `dx = scale · dW` in `R^dim`.
#[derive(Debug, Clone, Copy)]
pub struct Brownian {
    pub dim: usize,
    pub scale: f64,
}

impl Process for Brownian {
    type State = DVector<f64>;

    fn step(&self, x: &DVector<f64>, dt: f64, rng: &mut ChaCha8Rng) -> Result<DVector<f64>> {
        Ok(x + lattice_increments(self.dim, dt, 1.0, rng) * self.scale)
    }
}

/// `dx = b(x) dt + scale · dW` in `R^dim`.
#[derive(Debug, Clone, Copy)]
pub struct DriftedBrownian<F> {
    pub scale: f64,
    pub drift: F,
}

impl<F> Process for DriftedBrownian<F>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>> + Sync,
{
    type State = DVector<f64>;

    fn step(&self, x: &DVector<f64>, dt: f64, rng: &mut ChaCha8Rng) -> Result<DVector<f64>> {
        let b = (self.drift)(x)?;
        Ok(x + b * dt + lattice_increments(x.len(), dt, 1.0, rng) * self.scale)
    }
}

/// The flat-metric process on `(A, f)`: pure diffusion.
#[derive(Debug, Clone, Copy)]
pub struct OriginalProcess<'a> {
    pub lattice: &'a Lattice,
    pub noise: f64,
}

impl<'a> OriginalProcess<'a> {
    pub fn new(lattice: &'a Lattice, cfg: &SdeConfig) -> Self {
        Self {
            lattice,
            noise: cfg.noise(),
        }
    }
}

impl Process for OriginalProcess<'_> {
    type State = FieldPair;

    fn step(&self, p: &FieldPair, dt: f64, rng: &mut ChaCha8Rng) -> Result<FieldPair> {
        let w = self.lattice.cell_volume();
        let dw_a = lattice_increments(p.a.len(), dt, w, rng);
        let dw_f = lattice_increments(p.f.len(), dt, w, rng);
        Ok(FieldPair {
            a: SiteVector(&p.a.0 + dw_a * self.noise),
            f: SiteDoublet(&p.f.0 + dw_f * self.noise),
            g0: p.g0,
        })
    }
}

pub fn euler_step_original(
    lattice: &Lattice,
    p: &FieldPair,
    cfg: &SdeConfig,
    rng: &mut ChaCha8Rng,
) -> FieldPair {
    OriginalProcess::new(lattice, cfg)
        .step(p, cfg.dt, rng)
        .expect("flat diffusion cannot fail")
}

/// The reduced process on the Coulomb surface.
#[derive(Debug, Clone, Copy)]
pub struct ReducedProcess<'a> {
    pub gs: &'a GaugeStructure,
    pub g0: f64,
    pub diffusion: f64,
    pub noise: f64,
    /// Drop `-½hΓ + j_I + j_II`, leaving projected Brownian motion.
    pub flat_override: bool,
}

impl<'a> ReducedProcess<'a> {
    pub fn new(gs: &'a GaugeStructure, g0: f64, cfg: &SdeConfig) -> Self {
        Self {
            gs,
            g0,
            diffusion: cfg.diffusion(),
            noise: cfg.noise(),
            flat_override: false,
        }
    }

    fn check(&self, f: &SiteDoublet) -> Result<()> {
        let min = f.norm_squared().into_iter().fold(f64::INFINITY, f64::min);
        if min < ABORT_THRESHOLD {
            return Err(Error::SingularOrbitMetric(format!(
                "min |f̃|² = {min:e} fell below {ABORT_THRESHOLD:e}"
            )));
        }
        Ok(())
    }
}

impl Process for ReducedProcess<'_> {
    type State = AdaptedCoords;

    fn step(&self, c: &AdaptedCoords, dt: f64, rng: &mut ChaCha8Rng) -> Result<AdaptedCoords> {
        self.check(&c.f_tilde)?;
        let geo = OrbitGeometry::new(self.gs, &c.f_tilde, self.g0)?;
        let (drift_a, drift_f) = if self.flat_override {
            (
                DVector::zeros(c.a_star.len()),
                DVector::zeros(c.f_tilde.len()),
            )
        } else {
            let (a, f) = geo.reduced_drift();
            (a.0, f.0)
        };
        let w = geo.weight();
        let p_perp = self.gs.transverse_projector();
        let dw_a = lattice_increments(c.a_star.len(), dt, w, rng);
        let dw_f = lattice_increments(c.f_tilde.len(), dt, w, rng);

        let a = &c.a_star.0 + drift_a * (self.diffusion * dt) + p_perp * &dw_a * self.noise;
        let a = p_perp * a;
        let f = &c.f_tilde.0
            + drift_f * (self.diffusion * dt)
            + (geo.n_scalar() * dw_a + dw_f) * self.noise;
        let f = SiteDoublet(f);
        self.check(&f)?;
        Ok(AdaptedCoords {
            a_star: SiteVector(a),
            f_tilde: f,
            a: c.a.clone(),
        })
    }
}

pub fn euler_step_reduced(
    gs: &GaugeStructure,
    c: &AdaptedCoords,
    g0: f64,
    cfg: &SdeConfig,
    rng: &mut ChaCha8Rng,
) -> Result<AdaptedCoords> {
    ReducedProcess::new(gs, g0, cfg).step(c, cfg.dt, rng)
}

/// A stored trajectory with the running trapezoidal `∫ V du`.
#[derive(Debug, Clone)]
pub struct SdePath<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub accumulated_potential: Vec<f64>,
}

/// A finished path, or the error that stopped it with the prefix so far.
pub type PathResult<S> = std::result::Result<SdePath<S>, (Error, SdePath<S>)>;

/// Integrate one path of `process`, keeping every state. Stops at the
/// first failed step and returns the error together with the prefix.
pub fn simulate_path<P, V>(
    process: &P,
    initial: &P::State,
    dt: f64,
    n_steps: usize,
    v: V,
    rng: &mut ChaCha8Rng,
) -> PathResult<P::State>
where
    P: Process,
    V: Fn(&P::State) -> f64,
{
    let mut path = SdePath {
        times: vec![0.0],
        states: vec![initial.clone()],
        accumulated_potential: vec![0.0],
    };
    let mut v_prev = v(initial);
    for k in 1..=n_steps {
        let next = match process.step(path.states.last().expect("non-empty"), dt, rng) {
            Ok(s) => s,
            Err(e) => return Err((e, path)),
        };
        let v_next = v(&next);
        let acc = path.accumulated_potential[k - 1] + 0.5 * (v_prev + v_next) * dt;
        v_prev = v_next;
        path.times.push(k as f64 * dt);
        path.states.push(next);
        path.accumulated_potential.push(acc);
    }
    Ok(path)
}
