//! U(1) gauge action, Coulomb-gauge adapted coordinates, Faddeev-Popov
//! operator and the projectors onto the gauge surface.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, SiteDoublet, SiteField, SiteScalar, SiteVector};

/// The generator `J̄ = [[0, 1], [-1, 0]]` applied to a doublet.
#[inline]
pub fn j_bar(f: [f64; 2]) -> [f64; 2] {
    [f[1], -f[0]]
}

/// Sitewise rotation `f(x) ↦ [[cos θ, sin θ], [-sin θ, cos θ]] f(x)` with
/// `θ = angles[x]`, i.e. `exp(θ J̄)`.
pub fn rotate(f: &SiteDoublet, angles: &[f64]) -> SiteDoublet {
    let mut out = f.0.clone();
    for (x, &theta) in angles.iter().enumerate() {
        let (s, c) = theta.sin_cos();
        let (f0, f1) = (f.0[2 * x], f.0[2 * x + 1]);
        out[2 * x] = c * f0 + s * f1;
        out[2 * x + 1] = -s * f0 + c * f1;
    }
    SiteDoublet(out)
}

/// A point `(A, f)` of the product of gauge potentials and scalar doublets.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub a: SiteVector,
    pub f: SiteDoublet,
    pub g0: f64,
}

impl FieldPair {
    pub fn new(a: SiteVector, f: SiteDoublet, g0: f64) -> Result<Self> {
        if !(g0.is_finite() && g0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coupling g0 must be positive, got {g0}"
            )));
        }
        if !a.is_finite() {
            return Err(Error::NonFinite(SiteVector::KIND));
        }
        if !f.is_finite() {
            return Err(Error::NonFinite(SiteDoublet::KIND));
        }
        Ok(Self { a, f, g0 })
    }

    pub fn max_abs_diff(&self, other: &FieldPair) -> f64 {
        (&self.a.0 - &other.a.0)
            .amax()
            .max((&self.f.0 - &other.f.0).amax())
    }
}

/// Bundle coordinates `(A*, f̃, a)`: transverse potential, rotated doublet
/// and mean-zero gauge parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedCoords {
    pub a_star: SiteVector,
    pub f_tilde: SiteDoublet,
    pub a: SiteScalar,
}

impl AdaptedCoords {
    /// A point on the gauge surface with zero gauge parameter.
    pub fn on_surface(a_star: SiteVector, f_tilde: SiteDoublet) -> Self {
        let v = f_tilde.len() / 2;
        Self {
            a_star,
            f_tilde,
            a: SiteScalar(DVector::zeros(v)),
        }
    }
}

/// The Faddeev-Popov matrix of the Coulomb gauge and its Green function.
///
/// On the torus the Laplacian annihilates constants, so `green` is the
/// pseudo-inverse on mean-zero functions: `matrix · green = I - 11ᵀ/V`.
#[derive(Debug, Clone)]
pub struct FaddeevPopov {
    pub matrix: DMatrix<f64>,
    pub green: DMatrix<f64>,
}

impl FaddeevPopov {
    pub fn from_laplacian(laplacian: DMatrix<f64>) -> Result<Self> {
        let v = laplacian.nrows();
        let pc = DMatrix::from_element(v, v, 1.0 / v as f64);
        // -Δ + 11ᵀ/V is positive definite; its inverse is -Δ⁺ + 11ᵀ/V.
        let shifted = -&laplacian + &pc;
        let chol = shifted.cholesky().ok_or_else(|| {
            Error::InvalidLattice("Laplacian has a kernel beyond constants".into())
        })?;
        let mut green = pc - chol.inverse();
        green = (&green + green.transpose()) * 0.5;
        Ok(Self {
            matrix: laplacian,
            green,
        })
    }

    /// `I - 11ᵀ/V`, the projector onto mean-zero functions.
    pub fn mean_zero_projector(&self) -> DMatrix<f64> {
        let v = self.matrix.nrows();
        DMatrix::identity(v, v) - DMatrix::from_element(v, v, 1.0 / v as f64)
    }
}

/// Lattice-level matrices shared by all gauge and orbit computations.
#[derive(Debug, Clone)]
pub struct GaugeStructure {
    lattice: Lattice,
    grad: DMatrix<f64>,
    div: DMatrix<f64>,
    fp: FaddeevPopov,
    p_perp: DMatrix<f64>,
}

impl GaugeStructure {
    pub fn new(lattice: Lattice) -> Result<Self> {
        let grad = lattice.gradient_matrix()?;
        let div = lattice.divergence_matrix()?;
        let fp = FaddeevPopov::from_laplacian(lattice.laplacian_matrix()?)?;
        let sv = grad.nrows();
        let mut p_perp = DMatrix::identity(sv, sv) - &grad * &fp.green * &div;
        p_perp = (&p_perp + p_perp.transpose()) * 0.5;
        Ok(Self {
            lattice,
            grad,
            div,
            fp,
            p_perp,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn gradient_matrix(&self) -> &DMatrix<f64> {
        &self.grad
    }

    pub fn divergence_matrix(&self) -> &DMatrix<f64> {
        &self.div
    }

    pub fn faddeev_popov(&self) -> &FaddeevPopov {
        &self.fp
    }

    /// `P⊥ = I - grad · Φ⁻¹ · div`, projector onto divergence-free potentials.
    pub fn transverse_projector(&self) -> &DMatrix<f64> {
        &self.p_perp
    }

    pub fn num_sites(&self) -> usize {
        self.lattice.num_sites()
    }

    /// `(A + ∂ε, D̄(g0 ε) f)`.
    pub fn gauge_transform(&self, p: &FieldPair, eps: &SiteScalar) -> FieldPair {
        let grad = self.lattice.gradient(eps);
        let angles: Vec<f64> = eps.0.iter().map(|e| p.g0 * e).collect();
        FieldPair {
            a: SiteVector(&p.a.0 + grad.0),
            f: rotate(&p.f, &angles),
            g0: p.g0,
        }
    }

    /// Generator of the gauge action along `eps`: `(∂ε, g0 ε J̄ f)`.
    pub fn killing_vector(&self, p: &FieldPair, eps: &SiteScalar) -> (SiteVector, SiteDoublet) {
        let ka = self.lattice.gradient(eps);
        let mut kf = DVector::zeros(p.f.len());
        for x in 0..self.num_sites() {
            let jf = j_bar(p.f.site(x));
            kf[2 * x] = p.g0 * eps.0[x] * jf[0];
            kf[2 * x + 1] = p.g0 * eps.0[x] * jf[1];
        }
        (ka, SiteDoublet(kf))
    }

    /// Scalar block of the Killing matrix, `K_f[(a,x), y] = g0 (J̄f)^a(x) δ_xy`.
    pub fn scalar_killing_matrix(&self, f: &SiteDoublet, g0: f64) -> DMatrix<f64> {
        let v = self.num_sites();
        let mut k = DMatrix::zeros(2 * v, v);
        for x in 0..v {
            let jf = j_bar(f.site(x));
            k[(2 * x, x)] = g0 * jf[0];
            k[(2 * x + 1, x)] = g0 * jf[1];
        }
        k
    }

    /// Full Killing matrix, gauge rows stacked over scalar rows.
    pub fn killing_matrix(&self, f: &SiteDoublet, g0: f64) -> DMatrix<f64> {
        let sv = self.grad.nrows();
        let v = self.num_sites();
        let mut k = DMatrix::zeros(sv + 2 * v, v);
        k.view_mut((0, 0), (sv, v)).copy_from(&self.grad);
        k.view_mut((sv, 0), (2 * v, v))
            .copy_from(&self.scalar_killing_matrix(f, g0));
        k
    }

    /// Mean-zero `a` with `Δa = div A`, so that `A - ∂a` is divergence free.
    pub fn solve_gauge_parameter(&self, a: &SiteVector) -> SiteScalar {
        let div = self.lattice.divergence(a);
        let mut sol = &self.fp.green * div.0;
        let mean = sol.mean();
        sol.add_scalar_mut(-mean);
        SiteScalar(sol)
    }

    pub fn to_adapted(&self, p: &FieldPair) -> AdaptedCoords {
        let a = self.solve_gauge_parameter(&p.a);
        let a_star = SiteVector(&p.a.0 - self.lattice.gradient(&a).0);
        let angles: Vec<f64> = a.0.iter().map(|v| -p.g0 * v).collect();
        let f_tilde = rotate(&p.f, &angles);
        AdaptedCoords { a_star, f_tilde, a }
    }

    pub fn from_adapted(&self, c: &AdaptedCoords, g0: f64) -> FieldPair {
        let a = SiteVector(&c.a_star.0 + self.lattice.gradient(&c.a).0);
        let angles: Vec<f64> = c.a.0.iter().map(|v| g0 * v).collect();
        FieldPair {
            a,
            f: rotate(&c.f_tilde, &angles),
            g0,
        }
    }

    /// `N^A_B = I - K_A Φ⁻¹ χ` and `N^a_B = -K_f Φ⁻¹ χ` at a point of the
    /// gauge surface, with `χ` the divergence matrix.
    pub fn projector_n(&self, c: &AdaptedCoords, g0: f64) -> ProjectorN {
        let lambda = &self.fp.green * &self.div;
        let sv = self.grad.nrows();
        let gauge = DMatrix::identity(sv, sv) - &self.grad * &lambda;
        let scalar = -self.scalar_killing_matrix(&c.f_tilde, g0) * &lambda;
        ProjectorN { gauge, scalar }
    }

    /// Field potential `V[A, f]`; see [`potential`].
    pub fn potential<F>(&self, p: &FieldPair, v0: F) -> f64
    where
        F: Fn(&[f64], [f64; 2]) -> f64,
    {
        potential(&self.lattice, p, v0)
    }
}

/// Blocks of the projector `N` onto the complement of the Killing directions.
#[derive(Debug, Clone)]
pub struct ProjectorN {
    /// `N^A_B`, `(dim V) x (dim V)`.
    pub gauge: DMatrix<f64>,
    /// `N^a_B`, `2V x (dim V)`.
    pub scalar: DMatrix<f64>,
}

/// `V[A, f] = spacing^dim Σ_x [ ¼ Σ_ij F_ij² + ½ Σ_i |∇_i f|² + V₀(A(x), f(x)) ]`.
///
/// `F_ij` is the forward-difference field strength and the covariant
/// difference is the link form `(D̄(-g0 h A_i(x)) f(x + e_i) - f(x)) / h`,
/// which is exactly gauge covariant on the lattice. `v0` receives the
/// potential components and the doublet at one site and must itself be
/// gauge invariant.
pub fn potential<F>(lattice: &Lattice, p: &FieldPair, v0: F) -> f64
where
    F: Fn(&[f64], [f64; 2]) -> f64,
{
    let d = lattice.dim();
    let h = lattice.spacing();
    let a = p.a.as_slice();
    let mut total = 0.0;
    for x in 0..lattice.num_sites() {
        let mut site = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let f_ij = (a[lattice.forward(x, i) * d + j] - a[x * d + j]) / h
                    - (a[lattice.forward(x, j) * d + i] - a[x * d + i]) / h;
                site += 0.25 * f_ij * f_ij;
            }
            let (s, c) = (-p.g0 * h * a[x * d + i]).sin_cos();
            let fy = p.f.site(lattice.forward(x, i));
            let fx = p.f.site(x);
            let transported = [c * fy[0] + s * fy[1], -s * fy[0] + c * fy[1]];
            let cov0 = (transported[0] - fx[0]) / h;
            let cov1 = (transported[1] - fx[1]) / h;
            site += 0.5 * (cov0 * cov0 + cov1 * cov1);
        }
        site += v0(&a[x * d..(x + 1) * d], p.f.site(x));
        total += site;
    }
    total * lattice.cell_volume()
}

/// Gauge-invariant quartic self-interaction `λ (|f|² - v²)²`.
pub fn quartic_v0(lambda: f64, vev: f64) -> impl Fn(&[f64], [f64; 2]) -> f64 + Copy {
    move |_a, f| {
        let r = f[0] * f[0] + f[1] * f[1] - vev * vev;
        lambda * r * r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn structure(d: usize, n: usize, h: f64) -> GaugeStructure {
        GaugeStructure::new(Lattice::new(LatticeSpec::new(d, n, h).unwrap()).unwrap()).unwrap()
    }

    fn rvec(len: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
        DVector::from_fn(len, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_pair(gs: &GaugeStructure, rng: &mut ChaCha8Rng) -> FieldPair {
        let v = gs.num_sites();
        let d = gs.lattice().dim();
        FieldPair::new(
            SiteVector(rvec(v * d, rng)),
            SiteDoublet(rvec(2 * v, rng)),
            rng.random_range(0.5..1.5),
        )
        .unwrap()
    }

    fn mean_zero(v: usize, rng: &mut ChaCha8Rng) -> SiteScalar {
        let mut e = rvec(v, rng);
        let m = e.mean();
        e.add_scalar_mut(-m);
        SiteScalar(e)
    }

    #[test]
    fn gauge_transform_identity_and_constant() {
        let gs = structure(2, 3, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_pair(&gs, &mut rng);
        let zero = SiteScalar(DVector::zeros(9));
        assert_eq!(gs.gauge_transform(&p, &zero), p);
        let c = SiteScalar(DVector::from_element(9, 0.4));
        let q = gs.gauge_transform(&p, &c);
        assert_eq!(q.a, p.a);
        let rot = rotate(&p.f, &[p.g0 * 0.4; 9]);
        assert!((q.f.0 - rot.0).amax() < 1e-15);
    }

    #[test]
    fn gauge_transform_is_abelian_group_action() {
        let gs = structure(2, 4, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let p = random_pair(&gs, &mut rng);
            let e1 = SiteScalar(rvec(16, &mut rng) * 3.0);
            let e2 = SiteScalar(rvec(16, &mut rng) * 3.0);
            let two = gs.gauge_transform(&gs.gauge_transform(&p, &e1), &e2);
            let one = gs.gauge_transform(&p, &SiteScalar(&e1.0 + &e2.0));
            assert!(two.max_abs_diff(&one) < 1e-12);
        }
    }

    #[test]
    fn killing_vector_is_derivative_of_action() {
        let gs = structure(2, 3, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_pair(&gs, &mut rng);
        let eps = SiteScalar(rvec(9, &mut rng));
        let (ka, kf) = gs.killing_vector(&p, &eps);
        let h = 1e-6;
        let q = gs.gauge_transform(&p, &SiteScalar(&eps.0 * h));
        let fd_a = (&q.a.0 - &p.a.0) / h;
        let fd_f = (&q.f.0 - &p.f.0) / h;
        assert!((fd_a - &ka.0).amax() <= 1e-5 * ka.0.amax().max(1.0));
        assert!((fd_f - &kf.0).amax() <= 1e-5 * kf.0.amax().max(1.0));

        let zero = SiteScalar(DVector::zeros(9));
        let (za, zf) = gs.killing_vector(&p, &zero);
        assert_eq!(za.0.amax(), 0.0);
        assert_eq!(zf.0.amax(), 0.0);
        let q0 = FieldPair {
            f: SiteDoublet(DVector::zeros(18)),
            ..p.clone()
        };
        assert_eq!(gs.killing_vector(&q0, &eps).1 .0.amax(), 0.0);

        let k = gs.killing_matrix(&p.f, p.g0);
        let stacked = &k * &eps.0;
        assert!((stacked.rows(0, 18) - ka.0).amax() < 1e-15);
        assert!((stacked.rows(18, 18) - kf.0).amax() < 1e-15);
    }

    #[test]
    fn faddeev_popov_green_function() {
        for (d, n, h) in [(1, 2, 1.0), (2, 4, 1.0), (3, 3, 0.5)] {
            let gs = structure(d, n, h);
            let fp = gs.faddeev_popov();
            let v = gs.num_sites();
            let res = &fp.matrix * &fp.green - fp.mean_zero_projector();
            assert!(res.amax() < 1e-10);
            let res2 = &fp.green * &fp.matrix - fp.mean_zero_projector();
            assert!(res2.amax() < 1e-10);
            assert_eq!(fp.green, fp.green.transpose());
            assert!((&fp.green * DVector::from_element(v, 1.0)).amax() < 1e-12);
        }
    }

    #[test]
    fn gauge_parameter_solves_coulomb_condition() {
        let gs = structure(2, 4, 1.0);
        let lat = gs.lattice().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = mean_zero(16, &mut rng);
        let pure = lat.gradient(&b);
        let a = gs.solve_gauge_parameter(&pure);
        assert!((a.0 - &b.0).amax() < 1e-10);

        let transverse = SiteVector(gs.transverse_projector() * rvec(32, &mut rng));
        assert!(gs.solve_gauge_parameter(&transverse).0.amax() < 1e-10);

        for _ in 0..10 {
            let a_field = SiteVector(rvec(32, &mut rng));
            let a = gs.solve_gauge_parameter(&a_field);
            assert!(a.0.sum().abs() < 1e-12);
            let rest = SiteVector(&a_field.0 - lat.gradient(&a).0);
            assert!(lat.divergence(&rest).0.amax() < 1e-10);
        }
    }

    #[test]
    fn adapted_round_trip_and_orbit_invariance() {
        let gs = structure(2, 4, 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p = random_pair(&gs, &mut rng);
            let c = gs.to_adapted(&p);
            assert!(gs.lattice().divergence(&c.a_star).0.amax() < 1e-10);
            assert!(c.a.0.mean().abs() < 1e-15);
            assert!(gs.from_adapted(&c, p.g0).max_abs_diff(&p) < 1e-10);

            let eps = mean_zero(16, &mut rng);
            let c2 = gs.to_adapted(&gs.gauge_transform(&p, &eps));
            assert!((&c2.a_star.0 - &c.a_star.0).amax() < 1e-9);
            assert!((&c2.f_tilde.0 - &c.f_tilde.0).amax() < 1e-9);
            assert!((&c2.a.0 - &c.a.0 - &eps.0).amax() < 1e-9);

            // the section is a fixed point
            let on = FieldPair {
                a: c.a_star.clone(),
                f: c.f_tilde.clone(),
                g0: p.g0,
            };
            let c3 = gs.to_adapted(&on);
            assert!(c3.a.0.amax() < 1e-10);
            assert!((c3.a_star.0 - &c.a_star.0).amax() < 1e-10);
        }
    }

    #[test]
    fn transverse_pair_is_already_adapted() {
        let gs = structure(2, 3, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = SiteVector(gs.transverse_projector() * rvec(18, &mut rng));
        let p = FieldPair::new(a, SiteDoublet(rvec(18, &mut rng)), 1.0).unwrap();
        let c = gs.to_adapted(&p);
        assert!(c.a.0.amax() < 1e-12);
        assert!((c.a_star.0 - &p.a.0).amax() < 1e-12);
        assert!((c.f_tilde.0 - &p.f.0).amax() < 1e-12);
    }

    #[test]
    fn transverse_projector_properties() {
        let gs = structure(2, 4, 1.0);
        let p = gs.transverse_projector();
        assert!((p * p - p).amax() < 1e-10);
        assert!((gs.divergence_matrix() * p).amax() < 1e-10);
        assert!((p * gs.gradient_matrix()).amax() < 1e-10);
        assert_eq!(*p, p.transpose());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lat = gs.lattice();
        for _ in 0..5 {
            let dir = SiteVector(p * rvec(32, &mut rng));
            let eps = SiteScalar(rvec(16, &mut rng));
            assert!(lat.inner(&dir, &lat.gradient(&eps)).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn projector_n_blocks() {
        let gs = structure(2, 4, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = random_pair(&gs, &mut rng);
        let c = gs.to_adapted(&p);
        let n = gs.projector_n(&c, p.g0);
        assert!((&n.gauge * &n.gauge - &n.gauge).amax() < 1e-10);
        assert!((&n.gauge - gs.transverse_projector()).amax() < 1e-12);
        let zero = AdaptedCoords {
            f_tilde: SiteDoublet(DVector::zeros(32)),
            ..c
        };
        assert_eq!(gs.projector_n(&zero, p.g0).scalar.amax(), 0.0);
    }

    #[test]
    fn potential_vanishes_on_vacuum() {
        let gs = structure(2, 3, 1.0);
        let p = FieldPair::new(
            SiteVector::zeros(gs.lattice()),
            SiteDoublet(DVector::from_fn(
                18,
                |i, _| if i % 2 == 0 { 0.6 } else { -0.3 },
            )),
            1.2,
        )
        .unwrap();
        assert!(gs.potential(&p, |_, _| 0.0).abs() < 1e-15);
    }

    #[test]
    fn potential_is_gauge_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (d, n, h) in [(1, 4, 1.0), (2, 4, 1.0), (3, 3, 0.7)] {
            let gs = structure(d, n, h);
            let v0 = quartic_v0(0.3, 0.8);
            for _ in 0..20 {
                let p = random_pair(&gs, &mut rng);
                let eps = SiteScalar(rvec(gs.num_sites(), &mut rng) * 4.0);
                let before = gs.potential(&p, v0);
                let after = gs.potential(&gs.gauge_transform(&p, &eps), v0);
                assert!((after - before).abs() / (1.0 + before.abs()) < 1e-9);
            }
        }
    }

    #[test]
    fn pure_gauge_field_energy_matches_direct_sum() {
        let gs = structure(3, 3, 1.0);
        let lat = gs.lattice();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = rvec(81, &mut rng);
        let p =
            FieldPair::new(SiteVector(a.clone()), SiteDoublet(DVector::zeros(54)), 1.0).unwrap();
        // ¼ Σ_{i≠j} F_ij² = ½ Σ_{i<j} F_ij², built from site coordinates
        let mut expected = 0.0;
        for x in 0..27 {
            let c = lat.coords(x);
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let mut ci = c.clone();
                    ci[i] = (c[i] + 1) % 3;
                    let mut cj = c.clone();
                    cj[j] = (c[j] + 1) % 3;
                    let f = a[lat.index(&ci) * 3 + j] - a[x * 3 + j] - a[lat.index(&cj) * 3 + i]
                        + a[x * 3 + i];
                    expected += 0.5 * f * f;
                }
            }
        }
        assert!((gs.potential(&p, |_, _| 0.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn field_pair_validation() {
        let gs = structure(1, 2, 1.0);
        let a = SiteVector::zeros(gs.lattice());
        let f = SiteDoublet::zeros(gs.lattice());
        assert!(FieldPair::new(a.clone(), f.clone(), 0.0).is_err());
        let mut bad = a.clone();
        bad.0[0] = f64::NAN;
        assert!(FieldPair::new(bad, f, 1.0).is_err());
    }
}
