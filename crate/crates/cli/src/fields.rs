//! Plain-text field files and the named field generators.
//!
//! ```text
//! # optional comment lines
//! 2 4 doublet
//! 0.93 -0.12
//! ...
//! ```
//! The header gives `dim N kind`; then one line per site in lattice order
//! with whitespace-separated components (1, `dim` or 2 for `scalar`,
//! `vector`, `doublet`).

use std::fmt::Write as _;
use std::path::Path;

use gauge_reduce::{Lattice, SiteDoublet};
use nalgebra::DVector;
use rand::Rng;

use crate::config::{FieldSource, FieldSpec};

#[derive(Debug, thiserror::Error)]
pub enum FieldError {
    #[error("field file {path}: {reason}")]
    Format { path: String, reason: String },
    #[error("cannot read field file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn components(kind: &str, dim: usize) -> Option<usize> {
    match kind {
        "scalar" => Some(1),
        "vector" => Some(dim),
        "doublet" => Some(2),
        _ => None,
    }
}

/// Parse a field file of the given `kind` on `lattice`, in site-major order.
pub fn parse_field(
    text: &str,
    lattice: &Lattice,
    kind: &str,
    path: &str,
) -> Result<Vec<f64>, FieldError> {
    let fail = |reason: String| FieldError::Format {
        path: path.to_string(),
        reason,
    };
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| fail("missing header".into()))?
        .split_whitespace()
        .collect();
    let [dim, n, file_kind] = header[..] else {
        return Err(fail(format!("header must be `dim N kind`, got {header:?}")));
    };
    let dim: usize = dim.parse().map_err(|_| fail(format!("bad dim {dim:?}")))?;
    let n: usize = n.parse().map_err(|_| fail(format!("bad N {n:?}")))?;
    if dim != lattice.dim() || n != lattice.spec().sites_per_dim {
        return Err(fail(format!(
            "header says dim={dim}, N={n}; lattice has dim={}, N={}",
            lattice.dim(),
            lattice.spec().sites_per_dim
        )));
    }
    if file_kind != kind {
        return Err(fail(format!(
            "expected a {kind} field, header says {file_kind}"
        )));
    }
    let ncomp = components(kind, dim).ok_or_else(|| fail(format!("unknown kind {kind}")))?;
    let mut values = Vec::with_capacity(ncomp * lattice.num_sites());
    let mut sites = 0;
    for (i, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| fail(format!("site {i}: {e}")))?;
        if row.len() != ncomp {
            return Err(fail(format!(
                "site {i}: expected {ncomp} components, got {}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(fail(format!("site {i}: non-finite component")));
        }
        values.extend(row);
        sites += 1;
    }
    if sites != lattice.num_sites() {
        return Err(fail(format!(
            "expected {} sites, got {sites}",
            lattice.num_sites()
        )));
    }
    Ok(values)
}

/// Render values in the field-file format; round-trips through [`parse_field`].
pub fn format_field(values: &[f64], lattice: &Lattice, kind: &str) -> String {
    let ncomp = components(kind, lattice.dim()).expect("known kind");
    let mut s = format!(
        "{} {} {kind}\n",
        lattice.dim(),
        lattice.spec().sites_per_dim
    );
    for site in values.chunks(ncomp) {
        let parts: Vec<String> = site.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(s, "{}", parts.join(" "));
    }
    s
}

/// The scalar doublet named by `spec`.
///
/// `uniform` puts `(amplitude, 0)` on every site; `random` draws each
/// component uniformly from `[-amplitude, amplitude]` with `spec.seed`.
pub fn scalar_field(spec: &FieldSpec, lattice: &Lattice) -> Result<SiteDoublet, FieldError> {
    let v = lattice.num_sites();
    let values = match spec.source {
        FieldSource::Uniform => {
            DVector::from_fn(2 * v, |i, _| if i % 2 == 0 { spec.amplitude } else { 0.0 })
        }
        FieldSource::Random => {
            let mut rng = gauge_reduce::stochastic::path_rng(spec.seed, 0);
            let a = spec.amplitude.abs();
            DVector::from_fn(2 * v, |_, _| {
                if a > 0.0 {
                    rng.random_range(-a..=a)
                } else {
                    0.0
                }
            })
        }
        FieldSource::File => {
            let path = spec.file.as_deref().expect("validated at parse");
            DVector::from_vec(read_field(path, lattice, "doublet")?)
        }
    };
    Ok(SiteDoublet(values))
}

pub fn read_field(path: &Path, lattice: &Lattice, kind: &str) -> Result<Vec<f64>, FieldError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| FieldError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_field(&text, lattice, kind, &shown)
}
