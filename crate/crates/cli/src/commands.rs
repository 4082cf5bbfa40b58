//! The four subcommands. Each builds one [`Table`] and an exit status; the
//! caller writes the table.

use gauge_reduce::gauge::quartic_v0;
use gauge_reduce::geometry::{OrbitGeometry, ReductionConstants};
use gauge_reduce::oracle::{compare, GridPde, GridSpec, Verdict};
use gauge_reduce::stochastic::{
    feynman_kac, girsanov_check, Brownian, FkReport, GirsanovReport, OriginalProcess,
    ReducedProcess, ABORT_THRESHOLD,
};
use gauge_reduce::{
    AdaptedCoords, Error, FieldPair, GaugeStructure, Lattice, SiteDoublet, SiteVector,
};
use nalgebra::DVector;

use crate::checks::run_suite;
use crate::config::{Config, FkSpec, Observable, OracleKind, PotentialKind, ProcessKind};
use crate::fields::{scalar_field, FieldError};
use crate::output::{real, Table};

/// Failures that are the user's to fix (exit 2) as opposed to numerical
/// failures reported in the output (exit 1).
#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Core(#[from] Error),
}

/// A finished command: its table, file name, provenance seed and status.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub file_name: &'static str,
    pub seed: u64,
    pub success: bool,
}

fn yes_no(b: bool) -> String {
    b.to_string()
}

fn structure(cfg: &Config) -> Result<GaugeStructure, Error> {
    GaugeStructure::new(Lattice::new(cfg.lattice)?)
}

pub fn check(cfg: &Config) -> Result<Outcome, CommandError> {
    let rows = run_suite(cfg)?;
    let mut table = Table::new(&["check_name", "residual", "tolerance", "pass"]);
    for r in &rows {
        table.push(vec![
            r.name.into(),
            real(r.residual),
            real(r.tolerance),
            yes_no(r.pass()),
        ]);
    }
    Ok(Outcome {
        table,
        file_name: "check.csv",
        seed: cfg.check.seed,
        success: rows.iter().all(|r| r.pass()),
    })
}

pub fn jacobian(cfg: &Config) -> Result<Outcome, CommandError> {
    let gs = structure(cfg)?;
    let f = scalar_field(&cfg.field, gs.lattice())?;
    let norms = f.norm_squared();
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let max = norms.iter().copied().fold(0.0, f64::max);
    let mean = norms.iter().sum::<f64>() / norms.len() as f64;
    let constants = ReductionConstants::new(cfg.mu, cfg.kappa, cfg.mass)?;
    let mut table = Table::new(&[
        "source",
        "sites",
        "min_norm2",
        "mean_norm2",
        "max_norm2",
        "logdet",
        "laplace_term",
        "grad_term",
        "j",
        "v_correction",
        "status",
    ]);
    let mut row = vec![
        cfg.field.source.to_string(),
        gs.num_sites().to_string(),
        real(min),
        real(mean),
        real(max),
    ];
    let success = match OrbitGeometry::new(&gs, &f, cfg.g0) {
        Ok(geo) => {
            let r = geo.reduction_jacobian(constants);
            row.extend([r.logdet, r.laplace_term, r.grad_term, r.j, r.v_correction].map(real));
            row.push("ok".into());
            true
        }
        Err(e @ Error::SingularOrbitMetric(_)) => {
            row.extend(std::iter::repeat_n(String::new(), 5));
            row.push(e.to_string());
            false
        }
        Err(e) => return Err(e.into()),
    };
    table.push(row);
    Ok(Outcome {
        table,
        file_name: "jacobian.csv",
        seed: cfg.field.seed,
        success,
    })
}

pub fn observe(kind: Observable, alpha: f64, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    match kind {
        Observable::One => 1.0,
        Observable::Gaussian => (-alpha * r2).exp(),
        Observable::Square => r2,
        Observable::First => x[0],
    }
}

/// The Feynman-Kac potential on a flat state vector; `None` for the lattice
/// potential, which needs the field pair.
fn vector_potential(fk: &FkSpec, x: &[f64]) -> Option<f64> {
    match fk.potential {
        PotentialKind::Zero => Some(0.0),
        PotentialKind::Constant => Some(fk.c),
        PotentialKind::Harmonic => {
            Some(-0.5 * fk.omega * fk.omega * x.iter().map(|v| v * v).sum::<f64>())
        }
        PotentialKind::Lattice => None,
    }
}

fn stack(a: &DVector<f64>, b: &DVector<f64>) -> Vec<f64> {
    a.iter().chain(b.iter()).copied().collect()
}

/// Run the configured Feynman-Kac estimate.
///
/// The `lattice` potential is `-V[A, f]` with the quartic
/// self-interaction `λ(|f|² - v²)²`; on the reduced process it is evaluated
/// at `from_adapted(A*, f̃)`, which has the same value by gauge invariance.
pub fn fk_simulation(cfg: &Config) -> Result<FkReport, CommandError> {
    let fk = &cfg.fk;
    let sde = &cfg.sde;
    let phi = |x: &[f64]| observe(fk.observable, fk.alpha, x);
    match fk.process {
        ProcessKind::Brownian => {
            if fk.potential == PotentialKind::Lattice {
                return Err(CommandError::Usage(
                    "fk.potential = lattice needs a lattice process".into(),
                ));
            }
            let b = Brownian {
                dim: fk.dof,
                scale: sde.noise(),
            };
            let x0 = DVector::from_vec(fk.initial.clone());
            let v = |x: &DVector<f64>| vector_potential(fk, x.as_slice()).expect("checked above");
            Ok(feynman_kac(
                &b,
                sde,
                &x0,
                |x| phi(x.as_slice()),
                v,
                fk.quadrature,
            )?)
        }
        ProcessKind::Original => {
            let gs = structure(cfg)?;
            let v0 = quartic_v0(fk.lambda, fk.vev);
            let p0 = FieldPair::new(
                SiteVector::zeros(gs.lattice()),
                scalar_field(&cfg.field, gs.lattice())?,
                cfg.g0,
            )?;
            let proc = OriginalProcess::new(gs.lattice(), sde);
            let v = |p: &FieldPair| {
                vector_potential(fk, &stack(&p.a.0, &p.f.0)).unwrap_or_else(|| -gs.potential(p, v0))
            };
            Ok(feynman_kac(
                &proc,
                sde,
                &p0,
                |p| phi(&stack(&p.a.0, &p.f.0)),
                v,
                fk.quadrature,
            )?)
        }
        ProcessKind::Reduced => {
            let gs = structure(cfg)?;
            let v0 = quartic_v0(fk.lambda, fk.vev);
            let c0 = AdaptedCoords::on_surface(
                SiteVector::zeros(gs.lattice()),
                scalar_field(&cfg.field, gs.lattice())?,
            );
            let proc = ReducedProcess::new(&gs, cfg.g0, sde);
            let v = |c: &AdaptedCoords| {
                vector_potential(fk, &stack(&c.a_star.0, &c.f_tilde.0))
                    .unwrap_or_else(|| -gs.potential(&gs.from_adapted(c, cfg.g0), v0))
            };
            Ok(feynman_kac(
                &proc,
                sde,
                &c0,
                |c| phi(&stack(&c.a_star.0, &c.f_tilde.0)),
                v,
                fk.quadrature,
            )?)
        }
    }
}

pub fn simulate(cfg: &Config) -> Result<Outcome, CommandError> {
    let r = fk_simulation(cfg)?;
    let mut table = Table::new(&[
        "process",
        "observable",
        "potential",
        "horizon",
        "n_requested",
        "n_used",
        "n_aborted",
        "abort_fraction",
        "n_flagged",
        "max_exponent",
        "mean",
        "std_error",
        "reliable",
    ]);
    table.push(vec![
        cfg.fk.process.to_string(),
        cfg.fk.observable.to_string(),
        cfg.fk.potential.to_string(),
        real(cfg.sde.horizon()),
        r.n_requested.to_string(),
        r.estimate.n_paths.to_string(),
        r.n_aborted.to_string(),
        real(r.abort_fraction()),
        r.n_flagged.to_string(),
        real(r.max_exponent),
        real(r.estimate.mean),
        real(r.estimate.std_error),
        yes_no(r.reliable()),
    ]);
    Ok(Outcome {
        table,
        file_name: "simulate.csv",
        seed: cfg.sde.seed,
        success: r.reliable(),
    })
}

/// A Brownian Feynman-Kac estimate next to the grid solution.
#[derive(Debug, Clone)]
pub struct PdeComparison {
    pub report: FkReport,
    pub verdict: Verdict,
    pub boundary_warning: bool,
}

impl PdeComparison {
    /// Verdict passes, every path is usable and the box is wide enough.
    pub fn pass(&self) -> bool {
        self.verdict.pass && self.report.reliable() && !self.boundary_warning
    }
}

/// The grid value on `oracle.grid_points` and on the nested grid with
/// `2n + 1` points; `|coarse - fine|` is the discretization budget.
pub fn pde_comparison(cfg: &Config) -> Result<PdeComparison, CommandError> {
    let fk = &cfg.fk;
    if fk.process != ProcessKind::Brownian || fk.potential == PotentialKind::Lattice {
        return Err(CommandError::Usage(
            "oracle.kind = pde needs fk.process = brownian and a non-lattice potential".into(),
        ));
    }
    let report = fk_simulation(cfg)?;
    let spec = GridSpec {
        dof: fk.dof,
        grid_points_per_dof: cfg.oracle.grid_points,
        box_halfwidth: cfg.oracle.box_halfwidth,
        diffusion: cfg.sde.diffusion(),
    };
    let (reference, budget, boundary_warning) = GridPde::value_with_budget(
        spec,
        |x: &[f64]| vector_potential(fk, x).expect("checked above"),
        |x: &[f64]| observe(fk.observable, fk.alpha, x),
        cfg.sde.horizon(),
        &fk.initial,
    )?;
    Ok(PdeComparison {
        verdict: compare(&report.estimate, reference, budget),
        report,
        boundary_warning,
    })
}

/// Drifted process `df̃ = μ²κ j_II^f dt + μ√κ dw` against the reweighted
/// driftless process on the scalar sector of the configured lattice, with
/// `A* = 0`. Paths whose `min |f̃|²` drops below the abort threshold stop.
pub fn girsanov_comparison(cfg: &Config) -> Result<GirsanovReport, CommandError> {
    let gs = structure(cfg)?;
    let f0 = scalar_field(&cfg.field, gs.lattice())?;
    let diffusion = cfg.sde.diffusion();
    let scale = cfg.sde.noise() / gs.lattice().cell_volume().sqrt();
    let drift = |f: &DVector<f64>| {
        let f = SiteDoublet(f.clone());
        let min = f.norm_squared().into_iter().fold(f64::INFINITY, f64::min);
        if min < ABORT_THRESHOLD {
            return Err(Error::SingularOrbitMetric(format!("min |f̃|² = {min:e}")));
        }
        Ok(OrbitGeometry::new(&gs, &f, cfg.g0)?
            .mean_curvature()
            .j2_scalar
            .0
            * diffusion)
    };
    let fk = &cfg.fk;
    Ok(girsanov_check(&cfg.sde, scale, &f0.0, drift, |f| {
        observe(fk.observable, fk.alpha, f.as_slice())
    })?)
}

pub fn compare_oracle(cfg: &Config) -> Result<Outcome, CommandError> {
    let mut table = Table::new(&[
        "kind",
        "estimate",
        "estimate_std_error",
        "reference",
        "reference_std_error",
        "budget",
        "difference",
        "allowed",
        "n_aborted",
        "n_flagged",
        "boundary_warning",
        "pass",
    ]);
    let success = match cfg.oracle.kind {
        OracleKind::Pde => {
            let c = pde_comparison(cfg)?;
            let v = c.verdict;
            table.push(vec![
                "pde".into(),
                real(v.mc),
                real(v.std_error),
                real(v.reference),
                real(0.0),
                real(v.budget),
                real(v.difference),
                real(3.0 * v.std_error + v.budget),
                c.report.n_aborted.to_string(),
                c.report.n_flagged.to_string(),
                yes_no(c.boundary_warning),
                yes_no(c.pass()),
            ]);
            c.pass()
        }
        OracleKind::Girsanov => {
            let g = girsanov_comparison(cfg)?;
            let allowed = 3.0 * g.combined_std_error();
            let pass =
                g.drifted.reliable() && g.reweighted.reliable() && g.discrepancy() <= allowed;
            table.push(vec![
                "girsanov".into(),
                real(g.drifted.estimate.mean),
                real(g.drifted.estimate.std_error),
                real(g.reweighted.estimate.mean),
                real(g.reweighted.estimate.std_error),
                real(0.0),
                real(g.discrepancy()),
                real(allowed),
                (g.drifted.n_aborted + g.reweighted.n_aborted).to_string(),
                (g.drifted.n_flagged + g.reweighted.n_flagged).to_string(),
                yes_no(false),
                yes_no(pass),
            ]);
            pass
        }
    };
    Ok(Outcome {
        table,
        file_name: "compare_oracle.csv",
        seed: cfg.sde.seed,
        success,
    })
}
