//! The invariant suite behind `gauge-reduce check`.
//!
//! Each check returns a residual; a check passes when the residual is finite
//! and at most its tolerance. Random inputs come from a seeded generator so
//! reruns give identical residuals.

use gauge_reduce::gauge::quartic_v0;
use gauge_reduce::geometry::{
    horizontal_metric, reduction_jacobian, sigma_derivatives, OrbitGeometry, ReductionConstants,
};
use gauge_reduce::{
    AdaptedCoords, FieldPair, GaugeStructure, Lattice, LatticeSpec, Result, SiteDoublet,
    SiteScalar, SiteVector,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Config, Fault};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl CheckRow {
    pub fn pass(&self) -> bool {
        self.residual.is_finite() && self.residual <= self.tolerance
    }
}

fn uniform(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_pair(gs: &GaugeStructure, g0: f64, rng: &mut ChaCha8Rng) -> FieldPair {
    let v = gs.num_sites();
    FieldPair {
        a: SiteVector(uniform(gs.lattice().dim() * v, rng)),
        f: SiteDoublet(uniform(2 * v, rng)),
        g0,
    }
}

/// A point of the gauge surface with a random mean-zero gauge parameter.
pub fn random_adapted(gs: &GaugeStructure, rng: &mut ChaCha8Rng) -> AdaptedCoords {
    let v = gs.num_sites();
    let a_star = gs.transverse_projector() * uniform(gs.lattice().dim() * v, rng);
    let mut a = uniform(v, rng);
    let mean = a.mean();
    a.add_scalar_mut(-mean);
    AdaptedCoords {
        a_star: SiteVector(a_star),
        f_tilde: SiteDoublet(uniform(2 * v, rng)),
        a: SiteScalar(a),
    }
}

/// `max |V(gauge_transform(p, ε)) - V(p)| / (1 + |V(p)|)` with the quartic
/// self-interaction `λ(|f|² - v²)²`.
pub fn gauge_invariance(
    gs: &GaugeStructure,
    g0: f64,
    lambda: f64,
    vev: f64,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let v0 = quartic_v0(lambda, vev);
    (0..samples)
        .map(|_| {
            let p = random_pair(gs, g0, rng);
            let eps = SiteScalar(uniform(gs.num_sites(), rng) * 2.0);
            let before = gs.potential(&p, v0);
            let after = gs.potential(&gs.gauge_transform(&p, &eps), v0);
            (after - before).abs() / (1.0 + before.abs())
        })
        .fold(0.0, f64::max)
}

/// Residuals of `P² = P`, `div P = 0`, `P grad = 0` for a candidate
/// transverse projector `p`, and of `N^A_B = P⊥`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorResiduals {
    pub idempotent: f64,
    pub divergence: f64,
    pub gradient: f64,
    pub n_gauge: f64,
}

pub fn projector_residuals(
    gs: &GaugeStructure,
    p: &DMatrix<f64>,
    g0: f64,
    rng: &mut ChaCha8Rng,
) -> ProjectorResiduals {
    let c = random_adapted(gs, rng);
    ProjectorResiduals {
        idempotent: (p * p - p).amax(),
        divergence: (gs.divergence_matrix() * p).amax(),
        gradient: (p * gs.gradient_matrix()).amax(),
        n_gauge: (&gs.projector_n(&c, g0).gauge - p).amax(),
    }
}

/// `‖Φ Φ⁻¹ - (I - 11ᵀ/V)‖_max`.
pub fn fp_inverse_residual(gs: &GaugeStructure) -> f64 {
    let fp = gs.faddeev_popov();
    let v = fp.matrix.nrows();
    let target = DMatrix::identity(v, v) - DMatrix::from_element(v, v, 1.0 / v as f64);
    (&fp.matrix * &fp.green - target).amax()
}

/// `max ‖from_adapted(to_adapted(p)) - p‖_max`.
pub fn round_trip(gs: &GaugeStructure, g0: f64, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    (0..samples)
        .map(|_| {
            let p = random_pair(gs, g0, rng);
            gs.from_adapted(&gs.to_adapted(&p), g0).max_abs_diff(&p)
        })
        .fold(0.0, f64::max)
}

fn rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / b.amax().max(f64::MIN_POSITIVE)
}

/// Closed-form `σ_a` against central differences of `ln det D`, and `σ_ab`
/// against central differences of `σ_a`. Errors are `‖a - b‖_∞ / ‖b‖_∞`
/// per random `f̃`; the maximum over samples is returned.
pub fn sigma_residuals(
    gs: &GaugeStructure,
    g0: f64,
    samples: usize,
    step: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let f = SiteDoublet(uniform(2 * gs.num_sites(), rng));
        let sd = sigma_derivatives(gs, &f, g0)?;
        let n = f.len();
        let mut fd_grad = DVector::zeros(n);
        let mut fd_hess = DMatrix::zeros(n, n);
        for i in 0..n {
            let shifted = |s: f64| {
                let mut g = f.clone();
                g.0[i] += s;
                sigma_derivatives(gs, &g, g0)
            };
            let (p, m) = (shifted(step)?, shifted(-step)?);
            fd_grad[i] = (p.sigma - m.sigma) / (2.0 * step);
            fd_hess.set_column(i, &((&p.grad_f.0 - &m.grad_f.0) / (2.0 * step)));
        }
        let hess_rel = (&sd.hess_ff - &fd_hess).amax() / fd_hess.amax().max(f64::MIN_POSITIVE);
        worst = (
            worst.0.max(rel(&sd.grad_f.0, &fd_grad)),
            worst.1.max(hess_rel),
        );
    }
    Ok(worst)
}

/// `max ‖G̃^{AD} G̃_{DB} - blockdiag(P⊥, I, Π0)‖_max` over random adapted points.
pub fn pseudo_inverse_residual(
    gs: &GaugeStructure,
    g0: f64,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let c = random_adapted(gs, rng);
        worst =
            worst.max(horizontal_metric(gs, &c, g0)?.identity_residual(gs.transverse_projector()));
    }
    Ok(worst)
}

/// `max ‖𝒜(K ε) - ε‖_max` and the horizontality residual
/// `max(‖𝒜 Π_H v‖_max, ‖𝒜_A P⊥‖_max)` over random points and directions.
pub fn connection_residuals(
    gs: &GaugeStructure,
    g0: f64,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let f = SiteDoublet(uniform(2 * gs.num_sites(), rng));
        let geo = OrbitGeometry::new(gs, &f, g0)?;
        let conn = geo.connection().full();
        let k = gs.killing_matrix(&f, g0);
        let eps = uniform(gs.num_sites(), rng);
        let repro = (&conn * (&k * &eps) - &eps).amax();
        let probe = uniform(k.nrows(), rng);
        let horiz = (&conn * (geo.horizontal_projector() * probe))
            .amax()
            .max((&geo.connection().gauge * gs.transverse_projector()).amax());
        worst = (worst.0.max(repro), worst.1.max(horiz));
    }
    Ok(worst)
}

/// `J` on the two-site `s = 1` lattice with `|f̃|² = ρ` at both sites:
/// `-μ²κ g0² d0 (1 - 5/4 m² d0)` with `m² = g0² ρ` and
/// `d0 = ½ (1/m² + 1/(4 + m²))`.
pub fn two_site_closed_form(g0: f64, rho: f64, diffusion: f64) -> f64 {
    let m2 = g0 * g0 * rho;
    let d0 = 0.5 * (1.0 / m2 + 1.0 / (4.0 + m2));
    -diffusion * g0 * g0 * d0 * (1.0 - 1.25 * m2 * d0)
}

/// Relative deviation of the module `J` from [`two_site_closed_form`]; the
/// doublet phases differ between the sites, which must not matter.
pub fn two_site_jacobian(
    g0: f64,
    rho: f64,
    phase: f64,
    constants: ReductionConstants,
) -> Result<f64> {
    let gs = GaugeStructure::new(Lattice::new(LatticeSpec::cubic(1, 2)?)?)?;
    let r = rho.sqrt();
    let f = SiteDoublet(DVector::from_vec(vec![
        r,
        0.0,
        r * phase.cos(),
        r * phase.sin(),
    ]));
    let c = AdaptedCoords::on_surface(SiteVector(DVector::zeros(2)), f);
    let got = reduction_jacobian(&gs, &c, g0, constants)?.j;
    let want = two_site_closed_form(g0, rho, constants.diffusion());
    Ok((got - want).abs() / want.abs())
}

/// Run the whole suite on the configured lattice.
pub fn run_suite(cfg: &Config) -> Result<Vec<CheckRow>> {
    let gs = GaugeStructure::new(Lattice::new(cfg.lattice)?)?;
    let g0 = cfg.g0;
    let n = cfg.check.samples;
    let rng = |k: u64| gauge_reduce::stochastic::path_rng(cfg.check.seed, k);

    let mut p = gs.transverse_projector().clone();
    if cfg.check.inject_fault == Fault::Projector {
        p[(0, 0)] += 1e-6;
    }
    let pr = projector_residuals(&gs, &p, g0, &mut rng(1));
    let (sigma_a, sigma_ab) = sigma_residuals(&gs, g0, n, 1e-5, &mut rng(4))?;
    let (repro, horiz) = connection_residuals(&gs, g0, n, &mut rng(6))?;
    let constants = ReductionConstants::new(cfg.mu, cfg.kappa, cfg.mass)?;

    let row = |name, residual, tolerance| CheckRow {
        name,
        residual,
        tolerance,
    };
    Ok(vec![
        row(
            "gauge_invariance",
            gauge_invariance(&gs, g0, cfg.fk.lambda, cfg.fk.vev, n, &mut rng(0)),
            1e-9,
        ),
        row("projector_idempotent", pr.idempotent, 1e-10),
        row("projector_divergence_free", pr.divergence, 1e-10),
        row("projector_kills_gradients", pr.gradient, 1e-10),
        row("projector_n_gauge_block", pr.n_gauge, 1e-12),
        row("faddeev_popov_inverse", fp_inverse_residual(&gs), 1e-10),
        row(
            "adapted_round_trip",
            round_trip(&gs, g0, n, &mut rng(3)),
            1e-10,
        ),
        row("sigma_gradient", sigma_a, 1e-6),
        row("sigma_hessian", sigma_ab, 1e-4),
        row(
            "pseudo_inverse_identity",
            pseudo_inverse_residual(&gs, g0, n, &mut rng(5))?,
            1e-9,
        ),
        row("connection_reproduces_killing", repro, 1e-9),
        row("connection_horizontality", horiz, 1e-9),
        row(
            "two_site_jacobian",
            two_site_jacobian(g0, 1.0, 0.4, constants)?,
            1e-10,
        ),
    ])
}
