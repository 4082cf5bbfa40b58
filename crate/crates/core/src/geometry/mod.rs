//! Orbit geometry of the Coulomb-gauge bundle.
//!
//! All quantities are finite matrices over the lattice truncation. The flat
//! metric on `(A, f)` is `G = w I` with `w = spacing^dim`, the Killing
//! matrix is `K = [grad; K_f]`, and the orbit metric is `d = Kᵀ G K = w D`.
//! [`OrbitGeometry`] evaluates everything that depends on the point `f̃` once
//! and exposes the connection, horizontal metric, Christoffel contraction,
//! mean curvatures and the reduction Jacobian.

mod christoffel;
mod jacobian;
mod metric;

use nalgebra::{DMatrix, DVector};

pub use christoffel::{ChristoffelContraction, MeanCurvature};
pub use jacobian::{JacobianReport, ReductionConstants};
pub use metric::{OrbitMetric, SigmaDerivatives};

use crate::error::Result;
use crate::gauge::{AdaptedCoords, GaugeStructure};
use crate::lattice::{SiteDoublet, SiteVector};

/// The Coulomb (mechanical) connection `𝒜 = d⁻¹ Kᵀ G = D⁻¹ Kᵀ`.
#[derive(Debug, Clone)]
pub struct MechanicalConnection {
    /// `𝒜^(x)_(j,y) = ∂_j(y) d^(x,y)`, `V x (dim V)`.
    pub gauge: DMatrix<f64>,
    /// `𝒜^(x)_(a,y) = d^(x,y) g0 (J̄f̃)_a(y)`, `V x 2V`.
    pub scalar: DMatrix<f64>,
}

impl MechanicalConnection {
    /// Contract with a tangent vector `(δA, δf)`.
    pub fn apply(&self, da: &DVector<f64>, df: &DVector<f64>) -> DVector<f64> {
        &self.gauge * da + &self.scalar * df
    }

    /// `[𝒜_A | 𝒜_f]` as one `V x (dim V + 2V)` matrix.
    pub fn full(&self) -> DMatrix<f64> {
        let (v, sv) = self.gauge.shape();
        let mut m = DMatrix::zeros(v, sv + 2 * v);
        m.view_mut((0, 0), (v, sv)).copy_from(&self.gauge);
        m.view_mut((0, sv), (v, 2 * v)).copy_from(&self.scalar);
        m
    }
}

/// The metric in adapted coordinates `(A*, f̃, a)` and its pseudo-inverse.
///
/// The gauge-parameter sector is the mean-zero subspace, so its identity is
/// `Π0 = I - 11ᵀ/V`.
#[derive(Debug, Clone)]
pub struct HorizontalMetric {
    pub metric: DMatrix<f64>,
    pub pseudo_inverse: DMatrix<f64>,
    gauge_dim: usize,
    sites: usize,
}

impl HorizontalMetric {
    /// `blockdiag(P⊥, I, Π0)`, the expected value of `G̃^{AD} G̃_{DB}`.
    pub fn expected_product(&self, p_perp: &DMatrix<f64>) -> DMatrix<f64> {
        let (sv, v) = (self.gauge_dim, self.sites);
        let n = sv + 3 * v;
        let mut e = DMatrix::zeros(n, n);
        e.view_mut((0, 0), (sv, sv)).copy_from(p_perp);
        e.view_mut((sv, sv), (2 * v, 2 * v))
            .copy_from(&DMatrix::identity(2 * v, 2 * v));
        let pi0 = DMatrix::identity(v, v) - DMatrix::from_element(v, v, 1.0 / v as f64);
        e.view_mut((sv + 2 * v, sv + 2 * v), (v, v)).copy_from(&pi0);
        e
    }

    /// `‖G̃^{AD} G̃_{DB} - blockdiag(P⊥, I, Π0)‖_max`.
    pub fn identity_residual(&self, p_perp: &DMatrix<f64>) -> f64 {
        (&self.pseudo_inverse * &self.metric - self.expected_product(p_perp)).amax()
    }
}

/// Everything the reduction needs at one point `f̃` of the gauge surface.
#[derive(Debug, Clone)]
pub struct OrbitGeometry<'a> {
    gs: &'a GaugeStructure,
    g0: f64,
    weight: f64,
    f: SiteDoublet,
    metric: OrbitMetric,
    k_f: DMatrix<f64>,
    lambda: DMatrix<f64>,
    n_f: DMatrix<f64>,
    connection: MechanicalConnection,
    h_aa: DMatrix<f64>,
    h_af: DMatrix<f64>,
    h_ff: DMatrix<f64>,
}

impl<'a> OrbitGeometry<'a> {
    pub fn new(gs: &'a GaugeStructure, f_tilde: &SiteDoublet, g0: f64) -> Result<Self> {
        let metric = OrbitMetric::new(gs, f_tilde, g0)?;
        let weight = gs.lattice().cell_volume();
        let k_f = gs.scalar_killing_matrix(f_tilde, g0);
        let lambda = &gs.faddeev_popov().green * gs.divergence_matrix();
        let n_f = -&k_f * &lambda;
        let p_perp = gs.transverse_projector();
        let connection = MechanicalConnection {
            gauge: &metric.dinv * gs.gradient_matrix().transpose(),
            scalar: &metric.dinv * k_f.transpose(),
        };
        let two_v = n_f.nrows();
        let h_aa = p_perp / weight;
        let h_af = p_perp * n_f.transpose() / weight;
        let mut h_ff = (DMatrix::identity(two_v, two_v) + &n_f * n_f.transpose()) / weight;
        h_ff = (&h_ff + h_ff.transpose()) * 0.5;
        Ok(Self {
            gs,
            g0,
            weight,
            f: f_tilde.clone(),
            metric,
            k_f,
            lambda,
            n_f,
            connection,
            h_aa,
            h_af,
            h_ff,
        })
    }

    pub fn at(gs: &'a GaugeStructure, c: &AdaptedCoords, g0: f64) -> Result<Self> {
        Self::new(gs, &c.f_tilde, g0)
    }

    pub fn structure(&self) -> &GaugeStructure {
        self.gs
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    /// Flat metric weight `spacing^dim`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn f_tilde(&self) -> &SiteDoublet {
        &self.f
    }

    pub fn orbit_metric(&self) -> &OrbitMetric {
        &self.metric
    }

    pub fn connection(&self) -> &MechanicalConnection {
        &self.connection
    }

    pub fn scalar_killing(&self) -> &DMatrix<f64> {
        &self.k_f
    }

    /// `Λ = Φ⁻¹ χ`, `V x (dim V)`.
    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    /// `N^a_B = -K_f Λ`.
    pub fn n_scalar(&self) -> &DMatrix<f64> {
        &self.n_f
    }

    /// `h^{AB} = P⊥ / w`.
    pub fn h_gauge(&self) -> &DMatrix<f64> {
        &self.h_aa
    }

    /// `h^{Ab} = P⊥ (N^b)ᵀ / w`; vanishes identically in Coulomb gauge.
    pub fn h_mixed(&self) -> &DMatrix<f64> {
        &self.h_af
    }

    /// `h^{ab} = (I + N^a (N^b)ᵀ) / w`.
    pub fn h_scalar(&self) -> &DMatrix<f64> {
        &self.h_ff
    }

    /// The reduced-space pseudo-inverse `h` on `(A*, f̃)` as one matrix.
    pub fn h_full(&self) -> DMatrix<f64> {
        let sv = self.h_aa.nrows();
        let tv = self.h_ff.nrows();
        let mut h = DMatrix::zeros(sv + tv, sv + tv);
        h.view_mut((0, 0), (sv, sv)).copy_from(&self.h_aa);
        h.view_mut((0, sv), (sv, tv)).copy_from(&self.h_af);
        h.view_mut((sv, 0), (tv, sv))
            .copy_from(&self.h_af.transpose());
        h.view_mut((sv, sv), (tv, tv)).copy_from(&self.h_ff);
        h
    }

    pub fn sigma_derivatives(&self) -> SigmaDerivatives {
        SigmaDerivatives::new(&self.metric, &self.f, self.g0)
    }

    /// Projector onto the `G`-orthogonal complement of the Killing
    /// directions in ambient `(A, f)` coordinates, `I - K 𝒜`.
    pub fn horizontal_projector(&self) -> DMatrix<f64> {
        let k = self.gs.killing_matrix(&self.f, self.g0);
        let n = k.nrows();
        DMatrix::identity(n, n) - k * self.connection.full()
    }

    /// `G̃` of the adapted frame and its pseudo-inverse `h`.
    pub fn horizontal_metric(&self) -> HorizontalMetric {
        let gs = self.gs;
        let w = self.weight;
        let p_perp = gs.transverse_projector();
        let sv = p_perp.nrows();
        let v = gs.num_sites();
        let tv = 2 * v;
        let n = sv + tv + v;
        let pi0 = gs.faddeev_popov().mean_zero_projector();

        let mut g = DMatrix::zeros(n, n);
        g.view_mut((0, 0), (sv, sv)).copy_from(&(p_perp * w));
        g.view_mut((sv, sv), (tv, tv))
            .copy_from(&(DMatrix::identity(tv, tv) * w));
        let g_az = p_perp * gs.gradient_matrix() * &pi0 * w;
        let g_fz = &self.k_f * &pi0 * w;
        let g_zz = &pi0 * &self.metric.d * &pi0 * w;
        g.view_mut((0, sv + tv), (sv, v)).copy_from(&g_az);
        g.view_mut((sv + tv, 0), (v, sv))
            .copy_from(&g_az.transpose());
        g.view_mut((sv, sv + tv), (tv, v)).copy_from(&g_fz);
        g.view_mut((sv + tv, sv), (v, tv))
            .copy_from(&g_fz.transpose());
        g.view_mut((sv + tv, sv + tv), (v, v)).copy_from(&g_zz);

        let mut h = DMatrix::zeros(n, n);
        h.view_mut((0, 0), (sv + tv, sv + tv))
            .copy_from(&self.h_full());
        let h_az = p_perp * self.lambda.transpose() / w;
        let h_fz = &self.n_f * self.lambda.transpose() / w;
        let h_zz = &self.lambda * self.lambda.transpose() / w;
        h.view_mut((0, sv + tv), (sv, v)).copy_from(&h_az);
        h.view_mut((sv + tv, 0), (v, sv))
            .copy_from(&h_az.transpose());
        h.view_mut((sv, sv + tv), (tv, v)).copy_from(&h_fz);
        h.view_mut((sv + tv, sv), (v, tv))
            .copy_from(&h_fz.transpose());
        h.view_mut((sv + tv, sv + tv), (v, v)).copy_from(&h_zz);

        HorizontalMetric {
            metric: g,
            pseudo_inverse: h,
            gauge_dim: sv,
            sites: v,
        }
    }

    /// Drift of `(A*, f̃) = (P⊥ A, D̄(-g0 a(A)) f)` obtained by applying Itô's
    /// formula to the flat Brownian motion in `(A, f)`, divided by `μ²κ`:
    /// `(0, -(g0² / 2w) G(x, x) f̃(x))` with `G = -Φ⁺` the Faddeev-Popov
    /// Green function. Agrees with [`OrbitGeometry::reduced_drift`] up to the
    /// vertical direction `K·1`.
    pub fn section_ito_drift(&self) -> (SiteVector, SiteDoublet) {
        let green = &self.gs.faddeev_popov().green;
        let coef = -0.5 * self.g0 * self.g0 / self.weight;
        let fd = DVector::from_fn(self.f.len(), |i, _| {
            let x = i / 2;
            coef * (-green[(x, x)]) * self.f.0[i]
        });
        (
            SiteVector(DVector::zeros(self.gs.gradient_matrix().nrows())),
            SiteDoublet(fd),
        )
    }
}

/// `D = -Δ + g0²|f̃|²`, factorized.
pub fn orbit_metric(gs: &GaugeStructure, f_tilde: &SiteDoublet, g0: f64) -> Result<OrbitMetric> {
    OrbitMetric::new(gs, f_tilde, g0)
}

pub fn sigma_derivatives(
    gs: &GaugeStructure,
    f_tilde: &SiteDoublet,
    g0: f64,
) -> Result<SigmaDerivatives> {
    let metric = OrbitMetric::new(gs, f_tilde, g0)?;
    Ok(SigmaDerivatives::new(&metric, f_tilde, g0))
}

pub fn mechanical_connection(
    gs: &GaugeStructure,
    f_tilde: &SiteDoublet,
    g0: f64,
) -> Result<MechanicalConnection> {
    Ok(OrbitGeometry::new(gs, f_tilde, g0)?.connection)
}

pub fn horizontal_metric(
    gs: &GaugeStructure,
    c: &AdaptedCoords,
    g0: f64,
) -> Result<HorizontalMetric> {
    Ok(OrbitGeometry::at(gs, c, g0)?.horizontal_metric())
}

fn is_vacuum(f: &SiteDoublet) -> bool {
    f.0.iter().all(|&v| v == 0.0)
}

/// `-½ h^{B̃M̃} Γ^R_{B̃M̃}` split into gauge and scalar sectors. At `f̃ ≡ 0`
/// every term of the table carries `f̃` or `tr J̄ = 0`, so the result is zero.
pub fn christoffel_drift(
    gs: &GaugeStructure,
    c: &AdaptedCoords,
    g0: f64,
) -> Result<(SiteVector, SiteDoublet)> {
    if is_vacuum(&c.f_tilde) {
        return Ok((
            SiteVector(DVector::zeros(c.a_star.len())),
            SiteDoublet(DVector::zeros(c.f_tilde.len())),
        ));
    }
    Ok(OrbitGeometry::at(gs, c, g0)?.christoffel_drift())
}

/// Mean-curvature drifts `j_I` and `j_II`; zero at `f̃ ≡ 0`.
pub fn mean_curvature_terms(
    gs: &GaugeStructure,
    c: &AdaptedCoords,
    g0: f64,
) -> Result<MeanCurvature> {
    if is_vacuum(&c.f_tilde) {
        return Ok(MeanCurvature::zeros(c.a_star.len(), c.f_tilde.len()));
    }
    Ok(OrbitGeometry::at(gs, c, g0)?.mean_curvature())
}

pub fn reduction_jacobian(
    gs: &GaugeStructure,
    c: &AdaptedCoords,
    g0: f64,
    constants: ReductionConstants,
) -> Result<JacobianReport> {
    Ok(OrbitGeometry::at(gs, c, g0)?.reduction_jacobian(constants))
}

/// `V[from_adapted(c)] + V_correction`.
pub fn effective_potential<F>(
    gs: &GaugeStructure,
    c: &AdaptedCoords,
    g0: f64,
    v0: F,
    constants: ReductionConstants,
) -> Result<f64>
where
    F: Fn(&[f64], [f64; 2]) -> f64,
{
    let report = reduction_jacobian(gs, c, g0, constants)?;
    let p = gs.from_adapted(c, g0);
    Ok(gs.potential(&p, v0) + report.v_correction)
}

/// `G^H = w (I - K D⁻¹ Kᵀ)` in ambient `(A, f)` coordinates: the flat
/// metric restricted to directions orthogonal to the gauge orbit.
pub fn ambient_horizontal_metric(
    gs: &GaugeStructure,
    f_tilde: &SiteDoublet,
    g0: f64,
) -> Result<DMatrix<f64>> {
    let metric = OrbitMetric::new(gs, f_tilde, g0)?;
    let k = gs.killing_matrix(f_tilde, g0);
    let n = k.nrows();
    let w = gs.lattice().cell_volume();
    Ok((DMatrix::identity(n, n) - &k * &metric.dinv * k.transpose()) * w)
}
