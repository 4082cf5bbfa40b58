//! Contraction `T^R = h^{X̃Ỹ} Γ^R_{X̃Ỹ}` of the horizontal Christoffel table
//! and the mean-curvature drifts built from it.
//!
//! Index conventions: capital indices run over `A` components `(i, x)`,
//! lower-case ones over doublet components `(a, x)`, Greek ones over sites.
//! The nonzero table rows are evaluated in closed form using
//!
//! * `K^r_β = g0 (J̄f̃)^a(x) δ_xβ`, `K^r_{β,(e,z)} = g0 J_ae δ_xβ δ_xz`,
//! * `K^r_{μ,p} K^p_σ = -g0² f̃^a(x) δ_xμ δ_xσ`,
//! * `𝒜^β_{B,(c,y)} = -2 g0² f̃^c(y) D⁻¹(β,y) 𝒜_A[y,B]`,
//! * `𝒜^β_{(c,y),(e,z)} = -2 g0² f̃^e(z) D⁻¹(β,z) 𝒜_f[z,(c,y)] + g0 D⁻¹(β,y) J_ce δ_yz`,
//!
//! with `J = [[0, 1], [-1, 0]]`. Everything reduces to `O(V³)` matrix work.

use nalgebra::{DMatrix, DVector};

use super::OrbitGeometry;
use crate::lattice::{SiteDoublet, SiteVector};

const J: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];

/// `T^R` split into the gauge (`dim V`) and scalar (`2V`) sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelContraction {
    pub gauge: DVector<f64>,
    pub scalar: DVector<f64>,
}

/// Mean-curvature drift contributions `j_I` and `j_II`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanCurvature {
    pub j1_gauge: SiteVector,
    pub j1_scalar: SiteDoublet,
    pub j2_gauge: SiteVector,
    pub j2_scalar: SiteDoublet,
}

impl MeanCurvature {
    pub fn zeros(gauge_len: usize, scalar_len: usize) -> Self {
        Self {
            j1_gauge: SiteVector(DVector::zeros(gauge_len)),
            j1_scalar: SiteDoublet(DVector::zeros(scalar_len)),
            j2_gauge: SiteVector(DVector::zeros(gauge_len)),
            j2_scalar: SiteDoublet(DVector::zeros(scalar_len)),
        }
    }
}

impl OrbitGeometry<'_> {
    fn jf(&self, x: usize) -> [f64; 2] {
        let f = self.f.site(x);
        [f[1], -f[0]]
    }

    /// `Γ^r_{AB}` against an `(A, A)` weight block.
    fn contract_gauge_gauge(&self, h: &DMatrix<f64>, out_f: &mut DVector<f64>) {
        let g2 = self.g0 * self.g0;
        let aa = &self.connection.gauge;
        let m = aa * h;
        for x in 0..self.gs.num_sites() {
            let mxx = m.row(x).dot(&aa.row(x));
            let f = self.f.site(x);
            for a in 0..2 {
                out_f[2 * x + a] -= g2 * f[a] * mxx;
            }
        }
    }

    /// `Γ^A_{Bm}`, `Γ^A_{mB} = 0` and `Γ^r_{pB} = Γ^r_{Bp}` against the
    /// mixed weight block `H^{Bm}` and its transpose.
    fn contract_mixed(&self, h: &DMatrix<f64>, out_a: &mut DVector<f64>, out_f: &mut DVector<f64>) {
        let g0 = self.g0;
        let g2 = g0 * g0;
        let v = self.gs.num_sites();
        let af = &self.connection.scalar;
        let ah = &self.connection.gauge * h;
        let u = DVector::from_fn(v, |y, _| {
            let f = self.f.site(y);
            f[0] * ah[(y, 2 * y)] + f[1] * ah[(y, 2 * y + 1)]
        });
        let e = self.metric.solve(&u) * (-2.0 * g2);
        *out_a -= self.gs.gradient_matrix() * &e * 0.5;
        for x in 0..v {
            let jf = self.jf(x);
            let f = self.f.site(x);
            let third = af.row(x).dot(&ah.row(x));
            for a in 0..2 {
                let second: f64 = (0..2).map(|c| J[a][c] * ah[(x, 2 * x + c)]).sum();
                let t = -0.5 * g0 * jf[a] * e[x] - g0 * second - g2 * f[a] * third;
                out_f[2 * x + a] += 2.0 * t;
            }
        }
    }

    /// `Γ^A_{pq}` and `Γ^r_{pq}` against an `(f, f)` weight block.
    fn contract_scalar_scalar(
        &self,
        h: &DMatrix<f64>,
        out_a: &mut DVector<f64>,
        out_f: &mut DVector<f64>,
    ) {
        let g0 = self.g0;
        let g2 = g0 * g0;
        let v = self.gs.num_sites();
        let af = &self.connection.scalar;
        let ht = h.transpose();
        let afh = af * h;
        let afht = af * &ht;
        let c_of = |m: &DMatrix<f64>, w: &DMatrix<f64>| {
            let q = DVector::from_fn(v, |z, _| {
                let f = self.f.site(z);
                f[0] * m[(z, 2 * z)] + f[1] * m[(z, 2 * z + 1)]
            });
            let s = DVector::from_fn(v, |y, _| {
                let mut acc = 0.0;
                for (c, row) in J.iter().enumerate() {
                    for (e, jce) in row.iter().enumerate() {
                        acc += w[(2 * y + c, 2 * y + e)] * jce;
                    }
                }
                acc
            });
            self.metric.solve(&(q * (-2.0 * g2) + s * g0))
        };
        let c_sum = c_of(&afh, h) + c_of(&afht, &ht);
        *out_a -= self.gs.gradient_matrix() * &c_sum * 0.5;
        for x in 0..v {
            let jf = self.jf(x);
            let f = self.f.site(x);
            let mxx = afh.row(x).dot(&af.row(x));
            for a in 0..2 {
                let second: f64 = (0..2)
                    .map(|e| J[a][e] * (afh[(x, 2 * x + e)] + afht[(x, 2 * x + e)]))
                    .sum();
                out_f[2 * x + a] += -0.5 * g0 * jf[a] * c_sum[x] - g0 * second - g2 * f[a] * mxx;
            }
        }
    }

    /// `T^R = h^{X̃Ỹ} Γ^R_{X̃Ỹ}` over all sector pairs.
    pub fn christoffel_contraction(&self) -> ChristoffelContraction {
        self.contract_table(&self.h_aa, &self.h_af, &self.h_ff)
    }

    /// The table contracted with arbitrary weight blocks; the `(f, A)` block
    /// is taken to be the transpose of `h_af`.
    pub(crate) fn contract_table(
        &self,
        h_aa: &DMatrix<f64>,
        h_af: &DMatrix<f64>,
        h_ff: &DMatrix<f64>,
    ) -> ChristoffelContraction {
        let mut t_a = DVector::zeros(h_aa.nrows());
        let mut t_f = DVector::zeros(h_ff.nrows());
        self.contract_gauge_gauge(h_aa, &mut t_f);
        self.contract_mixed(h_af, &mut t_a, &mut t_f);
        self.contract_scalar_scalar(h_ff, &mut t_a, &mut t_f);
        ChristoffelContraction {
            gauge: t_a,
            scalar: t_f,
        }
    }

    /// `-½ T`.
    pub fn christoffel_drift(&self) -> (SiteVector, SiteDoublet) {
        let t = self.christoffel_contraction();
        (SiteVector(t.gauge * -0.5), SiteDoublet(t.scalar * -0.5))
    }

    /// `j_I` and `j_II`. The `N` blocks do not depend on `A*`, so of the
    /// derivative terms only `½ h^{Cm} ∂_m N^a_C` survives, and it is
    /// weighted by the (vanishing) mixed block of `h`.
    pub fn mean_curvature(&self) -> MeanCurvature {
        self.mean_curvature_with(&self.christoffel_contraction())
    }

    fn mean_curvature_with(&self, t: &ChristoffelContraction) -> MeanCurvature {
        let g0 = self.g0;
        let v = self.gs.num_sites();
        let sigma = self.sigma_derivatives();
        let p_perp = self.gs.transverse_projector();

        let j1_a = (&t.gauge - p_perp * &t.gauge) * 0.5;
        let mut j1_f = &self.n_f * &t.gauge * -0.5;
        let lh = &self.lambda * &self.h_af;
        for x in 0..v {
            for a in 0..2 {
                let d: f64 = (0..2).map(|c| J[a][c] * lh[(x, 2 * x + c)]).sum();
                j1_f[2 * x + a] -= 0.5 * g0 * d;
            }
        }
        let j2_a = &self.h_af * &sigma.grad_f.0 * 0.25;
        let j2_f = &self.h_ff * &sigma.grad_f.0 * 0.25;
        MeanCurvature {
            j1_gauge: SiteVector(j1_a),
            j1_scalar: SiteDoublet(j1_f),
            j2_gauge: SiteVector(j2_a),
            j2_scalar: SiteDoublet(j2_f),
        }
    }

    /// Total drift of the reduced process divided by `μ²κ`:
    /// `-½ T + j_I + j_II`.
    pub fn reduced_drift(&self) -> (SiteVector, SiteDoublet) {
        let t = self.christoffel_contraction();
        let j = self.mean_curvature_with(&t);
        let a = t.gauge * -0.5 + j.j1_gauge.0 + j.j2_gauge.0;
        let f = t.scalar * -0.5 + j.j1_scalar.0 + j.j2_scalar.0;
        (SiteVector(a), SiteDoublet(f))
    }
}
