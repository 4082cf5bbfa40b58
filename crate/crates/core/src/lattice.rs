//! Periodic cubic lattices and the finite-difference calculus on them.
//!
//! Sites are numbered lexicographically, `x = c_0 + N c_1 + N^2 c_2`.
//! Vector fields store `A_i(x)` at `x * dim + i`, doublets store `f^a(x)`
//! at `2 * x + a`.
//!
//! The gradient is the forward difference and the divergence the backward
//! difference, so that `divergence` is exactly minus the adjoint of
//! `gradient` under [`Lattice::inner`] and `divergence ∘ gradient` is the
//! standard `2 dim + 1` point Laplacian. The Faddeev-Popov operator, the
//! transverse projector and the orbit metric all rely on that identity.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest lattice (in sites) for which dense matrices are assembled.
pub const MAX_DENSE_SITES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub dim: usize,
    pub sites_per_dim: usize,
    pub spacing: f64,
}

impl LatticeSpec {
    pub fn new(dim: usize, sites_per_dim: usize, spacing: f64) -> Result<Self> {
        let spec = Self {
            dim,
            sites_per_dim,
            spacing,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit spacing.
    pub fn cubic(dim: usize, sites_per_dim: usize) -> Result<Self> {
        Self::new(dim, sites_per_dim, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidLattice(format!(
                "dimension must be 1, 2 or 3, got {}",
                self.dim
            )));
        }
        if self.sites_per_dim < 2 {
            return Err(Error::InvalidLattice(format!(
                "need at least 2 sites per dimension, got {}",
                self.sites_per_dim
            )));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::InvalidLattice(format!(
                "spacing must be positive and finite, got {}",
                self.spacing
            )));
        }
        Ok(())
    }

    pub fn num_sites(&self) -> usize {
        self.sites_per_dim.pow(self.dim as u32)
    }

    /// Cell volume `spacing^dim`; the weight of the flat L² metric.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }
}

/// Common access to the per-site field containers.
pub trait SiteField {
    const KIND: &'static str;
    /// Reals stored per site.
    fn components(dim: usize) -> usize;
    fn values(&self) -> &DVector<f64>;
}

macro_rules! site_field {
    ($(#[$meta:meta])* $name:ident, $kind:literal, |$d:ident| $ncomp:expr) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(pub DVector<f64>);

        impl $name {
            pub fn zeros(lattice: &Lattice) -> Self {
                Self(DVector::zeros(Self::len_on(lattice)))
            }

            pub fn len_on(lattice: &Lattice) -> usize {
                lattice.num_sites() * <Self as SiteField>::components(lattice.dim())
            }

            /// Wraps `values`, checking the length against `lattice` and
            /// rejecting non-finite entries.
            pub fn from_vec(lattice: &Lattice, values: Vec<f64>) -> Result<Self> {
                let expected = Self::len_on(lattice);
                if values.len() != expected {
                    return Err(Error::LengthMismatch {
                        kind: $kind,
                        expected,
                        found: values.len(),
                    });
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite($kind));
                }
                Ok(Self(DVector::from_vec(values)))
            }

            pub fn as_slice(&self) -> &[f64] {
                self.0.as_slice()
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|v| v.is_finite())
            }
        }

        impl SiteField for $name {
            const KIND: &'static str = $kind;
            fn components($d: usize) -> usize {
                $ncomp
            }
            fn values(&self) -> &DVector<f64> {
                &self.0
            }
        }
    };
}

site_field!(
    /// One real per site (gauge parameters, densities).
    SiteScalar, "scalar", |_d| 1
);
site_field!(
    /// `dim` reals per site, the gauge potential `A_i(x)`.
    SiteVector, "vector", |d| d
);
site_field!(
    /// Two reals per site, the scalar doublet `f^a(x)`.
    SiteDoublet, "doublet", |_d| 2
);

impl SiteDoublet {
    /// `|f(x)|²` per site.
    pub fn norm_squared(&self) -> Vec<f64> {
        self.0
            .as_slice()
            .chunks_exact(2)
            .map(|c| c[0] * c[0] + c[1] * c[1])
            .collect()
    }

    pub fn site(&self, x: usize) -> [f64; 2] {
        [self.0[2 * x], self.0[2 * x + 1]]
    }
}

/// A periodic cubic lattice with precomputed neighbour tables.
#[derive(Debug, Clone)]
pub struct Lattice {
    spec: LatticeSpec,
    forward: Vec<usize>,
    backward: Vec<usize>,
}

impl Lattice {
    pub fn new(spec: LatticeSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.sites_per_dim;
        let v = spec.num_sites();
        let d = spec.dim;
        let mut forward = vec![0; v * d];
        let mut backward = vec![0; v * d];
        for x in 0..v {
            let coords = coords_of(x, n, d);
            for i in 0..d {
                let mut c = coords.clone();
                c[i] = (coords[i] + 1) % n;
                forward[x * d + i] = index_of(&c, n);
                c[i] = (coords[i] + n - 1) % n;
                backward[x * d + i] = index_of(&c, n);
            }
        }
        Ok(Self {
            spec,
            forward,
            backward,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn num_sites(&self) -> usize {
        self.spec.num_sites()
    }

    pub fn spacing(&self) -> f64 {
        self.spec.spacing
    }

    pub fn cell_volume(&self) -> f64 {
        self.spec.cell_volume()
    }

    pub fn coords(&self, x: usize) -> Vec<usize> {
        coords_of(x, self.spec.sites_per_dim, self.spec.dim)
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        index_of(coords, self.spec.sites_per_dim)
    }

    /// Site `x + e_dir`.
    pub fn forward(&self, x: usize, dir: usize) -> usize {
        self.forward[x * self.spec.dim + dir]
    }

    /// Site `x - e_dir`.
    pub fn backward(&self, x: usize, dir: usize) -> usize {
        self.backward[x * self.spec.dim + dir]
    }

    /// Forward difference `(u(x + e_i) - u(x)) / spacing`.
    pub fn gradient(&self, u: &SiteScalar) -> SiteVector {
        let d = self.dim();
        let h = self.spacing();
        let mut out = DVector::zeros(self.num_sites() * d);
        for x in 0..self.num_sites() {
            for i in 0..d {
                out[x * d + i] = (u.0[self.forward(x, i)] - u.0[x]) / h;
            }
        }
        SiteVector(out)
    }

    /// Backward-difference divergence, `Σ_i (v_i(x) - v_i(x - e_i)) / spacing`.
    pub fn divergence(&self, v: &SiteVector) -> SiteScalar {
        let d = self.dim();
        let h = self.spacing();
        let mut out = DVector::zeros(self.num_sites());
        for x in 0..self.num_sites() {
            let mut acc = 0.0;
            for i in 0..d {
                acc += v.0[x * d + i] - v.0[self.backward(x, i) * d + i];
            }
            out[x] = acc / h;
        }
        SiteScalar(out)
    }

    /// `(Σ_neighbours u - 2 dim u(x)) / spacing²`.
    pub fn laplacian(&self, u: &SiteScalar) -> SiteScalar {
        let d = self.dim();
        let h2 = self.spacing() * self.spacing();
        let mut out = DVector::zeros(self.num_sites());
        for x in 0..self.num_sites() {
            let mut acc = -2.0 * d as f64 * u.0[x];
            for i in 0..d {
                acc += u.0[self.forward(x, i)] + u.0[self.backward(x, i)];
            }
            out[x] = acc / h2;
        }
        SiteScalar(out)
    }

    fn check_dense(&self) -> Result<()> {
        if self.num_sites() > MAX_DENSE_SITES {
            return Err(Error::TooLarge {
                sites: self.num_sites(),
                limit: MAX_DENSE_SITES,
            });
        }
        Ok(())
    }

    /// `V x V` matrix of [`Lattice::laplacian`].
    pub fn laplacian_matrix(&self) -> Result<DMatrix<f64>> {
        self.check_dense()?;
        let v = self.num_sites();
        let d = self.dim();
        let h2 = self.spacing() * self.spacing();
        let mut m = DMatrix::zeros(v, v);
        for x in 0..v {
            m[(x, x)] -= 2.0 * d as f64 / h2;
            for i in 0..d {
                m[(x, self.forward(x, i))] += 1.0 / h2;
                m[(x, self.backward(x, i))] += 1.0 / h2;
            }
        }
        Ok(m)
    }

    /// `(dim V) x V` matrix of [`Lattice::gradient`].
    pub fn gradient_matrix(&self) -> Result<DMatrix<f64>> {
        self.check_dense()?;
        let v = self.num_sites();
        let d = self.dim();
        let h = self.spacing();
        let mut m = DMatrix::zeros(v * d, v);
        for x in 0..v {
            for i in 0..d {
                m[(x * d + i, self.forward(x, i))] += 1.0 / h;
                m[(x * d + i, x)] -= 1.0 / h;
            }
        }
        Ok(m)
    }

    /// `V x (dim V)` matrix of [`Lattice::divergence`]; equals `-gradient_matrixᵀ`.
    pub fn divergence_matrix(&self) -> Result<DMatrix<f64>> {
        self.check_dense()?;
        let v = self.num_sites();
        let d = self.dim();
        let h = self.spacing();
        let mut m = DMatrix::zeros(v, v * d);
        for x in 0..v {
            for i in 0..d {
                m[(x, x * d + i)] += 1.0 / h;
                m[(x, self.backward(x, i) * d + i)] -= 1.0 / h;
            }
        }
        Ok(m)
    }

    /// Flat L² product `spacing^dim Σ u v`. Errors when the kinds differ or
    /// a field does not live on this lattice.
    pub fn inner<U: SiteField, W: SiteField>(&self, u: &U, w: &W) -> Result<f64> {
        if U::KIND != W::KIND {
            return Err(Error::KindMismatch {
                left: U::KIND,
                right: W::KIND,
            });
        }
        let expected = self.num_sites() * U::components(self.dim());
        for len in [u.values().len(), w.values().len()] {
            if len != expected {
                return Err(Error::LengthMismatch {
                    kind: U::KIND,
                    expected,
                    found: len,
                });
            }
        }
        Ok(self.cell_volume() * u.values().dot(w.values()))
    }

    /// Shift a per-site array with `ncomp` components by one site along `dir`:
    /// `out(x) = u(x - e_dir)`.
    pub fn translate(&self, u: &DVector<f64>, ncomp: usize, dir: usize) -> DVector<f64> {
        let mut out = DVector::zeros(u.len());
        for x in 0..self.num_sites() {
            let src = self.backward(x, dir);
            for c in 0..ncomp {
                out[x * ncomp + c] = u[src * ncomp + c];
            }
        }
        out
    }
}

fn coords_of(mut x: usize, n: usize, d: usize) -> Vec<usize> {
    let mut c = Vec::with_capacity(d);
    for _ in 0..d {
        c.push(x % n);
        x /= n;
    }
    c
}

fn index_of(coords: &[usize], n: usize) -> usize {
    coords.iter().rev().fold(0, |acc, &c| acc * n + c)
}
