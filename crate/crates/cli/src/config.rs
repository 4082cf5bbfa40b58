//! Flat `key = value` experiment configs with dotted section keys.
//!
//! Blank lines and lines starting with `#` are ignored. Every key has a
//! default; unknown and repeated keys are rejected. The resolved values
//! (not the file bytes) are hashed, so formatting does not change the hash.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use gauge_reduce::stochastic::{Quadrature, SdeConfig};
use gauge_reduce::LatticeSpec;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("key {0} given twice")]
    Duplicate(String),
    #[error("unknown key {0}")]
    UnknownKey(String),
    #[error("{key}: cannot parse {value:?}: {reason}")]
    Value {
        key: String,
        value: String,
        reason: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

macro_rules! keyword_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $word:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($word => Ok(Self::$variant),)+
                    _ => Err(format!("expected one of: {}", [$($word),+].join(", "))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $word),+ })
            }
        }
    };
}

keyword_enum!(
    /// Where the scalar doublet of a lattice run comes from.
    FieldSource { Uniform => "uniform", Random => "random", File => "file" }
);
keyword_enum!(
    ProcessKind { Brownian => "brownian", Original => "original", Reduced => "reduced" }
);
keyword_enum!(
    Observable { One => "one", Gaussian => "gaussian", Square => "square", First => "first" }
);
keyword_enum!(
    PotentialKind { Zero => "zero", Constant => "constant", Harmonic => "harmonic", Lattice => "lattice" }
);
keyword_enum!(QuadratureKind { Trapezoid => "trapezoid", Left => "left" });
keyword_enum!(OracleKind { Pde => "pde", Girsanov => "girsanov" });
keyword_enum!(
    /// Test hook for the check suite.
    Fault { None => "none", Projector => "projector" }
);

impl From<QuadratureKind> for Quadrature {
    fn from(q: QuadratureKind) -> Self {
        match q {
            QuadratureKind::Trapezoid => Quadrature::Trapezoid,
            QuadratureKind::Left => Quadrature::LeftPoint,
        }
    }
}

/// Comma-separated reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealList(pub Vec<f64>);

impl FromStr for RealList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(RealList)
    }
}

impl fmt::Display for RealList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(f64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub source: FieldSource,
    pub amplitude: f64,
    pub seed: u64,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FkSpec {
    pub process: ProcessKind,
    pub dof: usize,
    pub initial: Vec<f64>,
    pub observable: Observable,
    pub alpha: f64,
    pub potential: PotentialKind,
    pub c: f64,
    pub omega: f64,
    pub quadrature: Quadrature,
    pub lambda: f64,
    pub vev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSpec {
    pub kind: OracleKind,
    pub grid_points: usize,
    pub box_halfwidth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSpec {
    pub seed: u64,
    pub samples: usize,
    pub inject_fault: Fault,
}

/// A fully resolved and validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub lattice: LatticeSpec,
    pub g0: f64,
    pub mu: f64,
    pub kappa: f64,
    pub mass: f64,
    pub sde: SdeConfig,
    pub output_dir: PathBuf,
    pub field: FieldSpec,
    pub fk: FkSpec,
    pub oracle: OracleSpec,
    pub check: CheckSpec,
    hash: String,
}

/// `(key, default)` for every accepted key, in documentation order.
pub const SCHEMA: &[(&str, &str)] = &[
    ("lattice.dim", "2"),
    ("lattice.n", "4"),
    ("lattice.spacing", "1"),
    ("model.g0", "1"),
    ("model.mu", "1"),
    ("model.kappa", "1"),
    ("model.mass", "1"),
    ("sde.dt", "0.001"),
    ("sde.n_steps", "500"),
    ("sde.n_paths", "10000"),
    ("sde.seed", "1"),
    ("output.dir", "."),
    ("field.source", "uniform"),
    ("field.amplitude", "1"),
    ("field.seed", "1"),
    ("field.file", ""),
    ("fk.process", "brownian"),
    ("fk.dof", "1"),
    ("fk.initial", "0"),
    ("fk.observable", "gaussian"),
    ("fk.alpha", "0.5"),
    ("fk.potential", "harmonic"),
    ("fk.c", "0"),
    ("fk.omega", "1"),
    ("fk.quadrature", "trapezoid"),
    ("fk.lambda", "0.25"),
    ("fk.vev", "1"),
    ("oracle.kind", "pde"),
    ("oracle.grid_points", "101"),
    ("oracle.box_halfwidth", "6"),
    ("check.seed", "1"),
    ("check.samples", "20"),
    ("check.inject_fault", "none"),
];

/// Keys left out of the hash: they move files, not numbers.
const UNHASHED: &[&str] = &["output.dir"];

/// `(line number, key, value)` triples of a config text.
pub fn parse_entries(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let syntax = || ConfigError::Syntax {
            line: i + 1,
            text: line.to_string(),
        };
        let (k, v) = t.split_once('=').ok_or_else(syntax)?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(syntax());
        }
        out.push((i + 1, k.to_string(), v.to_string()));
    }
    Ok(out)
}

struct Reader {
    raw: BTreeMap<String, String>,
    canonical: BTreeMap<&'static str, String>,
}

impl Reader {
    fn get<T>(&mut self, key: &'static str) -> Result<T, ConfigError>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        let default = SCHEMA
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, d)| *d)
            .expect("key missing from schema");
        let value = self.raw.remove(key).unwrap_or_else(|| default.to_string());
        let parsed = value.parse::<T>().map_err(|e| ConfigError::Value {
            key: key.to_string(),
            value: value.clone(),
            reason: e.to_string(),
        })?;
        self.canonical.insert(key, parsed.to_string());
        Ok(parsed)
    }

    fn positive(&mut self, key: &'static str) -> Result<f64, ConfigError> {
        let v: f64 = self.get(key)?;
        if !(v.is_finite() && v > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "{key} must be positive, got {v}"
            )));
        }
        Ok(v)
    }
}

impl Config {
    /// Parse `text`, then apply `overrides` (which may replace file keys).
    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut raw = BTreeMap::new();
        for (_, k, v) in parse_entries(text)? {
            if raw.insert(k.clone(), v).is_some() {
                return Err(ConfigError::Duplicate(k));
            }
        }
        for (k, v) in overrides {
            raw.insert(k.clone(), v.clone());
        }
        if let Some(k) = raw.keys().find(|k| !SCHEMA.iter().any(|(s, _)| s == k)) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        let mut r = Reader {
            raw,
            canonical: BTreeMap::new(),
        };
        Self::resolve(&mut r)
    }

    pub fn from_file(
        path: &std::path::Path,
        overrides: &[(String, String)],
    ) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, overrides)
    }

    fn resolve(r: &mut Reader) -> Result<Self, ConfigError> {
        let invalid = |e: gauge_reduce::Error| ConfigError::Invalid(e.to_string());
        let lattice = LatticeSpec::new(
            r.get("lattice.dim")?,
            r.get("lattice.n")?,
            r.get("lattice.spacing")?,
        )
        .map_err(invalid)?;
        let g0 = r.positive("model.g0")?;
        let mu = r.positive("model.mu")?;
        let kappa = r.positive("model.kappa")?;
        let mass = r.positive("model.mass")?;
        let sde = SdeConfig::new(
            mu,
            kappa,
            r.get("sde.dt")?,
            r.get("sde.n_steps")?,
            r.get("sde.n_paths")?,
            r.get("sde.seed")?,
        )
        .map_err(invalid)?;
        let output_dir = PathBuf::from(r.get::<String>("output.dir")?);

        let source = r.get("field.source")?;
        let amplitude: f64 = r.get("field.amplitude")?;
        let field_seed = r.get("field.seed")?;
        let file: String = r.get("field.file")?;
        let file = (!file.is_empty()).then(|| PathBuf::from(file));
        if source == FieldSource::File && file.is_none() {
            return Err(ConfigError::Invalid(
                "field.source = file needs field.file".into(),
            ));
        }
        if !amplitude.is_finite() {
            return Err(ConfigError::Invalid(
                "field.amplitude must be finite".into(),
            ));
        }

        let process = r.get("fk.process")?;
        let dof: usize = r.get("fk.dof")?;
        if dof == 0 {
            return Err(ConfigError::Invalid("fk.dof must be >= 1".into()));
        }
        let initial = r.get::<RealList>("fk.initial")?.0;
        let initial = match initial.len() {
            1 => vec![initial[0]; dof],
            n if n == dof => initial,
            n => {
                return Err(ConfigError::Invalid(format!(
                    "fk.initial has {n} entries, fk.dof = {dof}"
                )))
            }
        };
        let fk = FkSpec {
            process,
            dof,
            initial,
            observable: r.get("fk.observable")?,
            alpha: r.get("fk.alpha")?,
            potential: r.get("fk.potential")?,
            c: r.get("fk.c")?,
            omega: r.get("fk.omega")?,
            quadrature: r.get::<QuadratureKind>("fk.quadrature")?.into(),
            lambda: r.get("fk.lambda")?,
            vev: r.get("fk.vev")?,
        };
        let oracle = OracleSpec {
            kind: r.get("oracle.kind")?,
            grid_points: r.get("oracle.grid_points")?,
            box_halfwidth: r.positive("oracle.box_halfwidth")?,
        };
        let check = CheckSpec {
            seed: r.get("check.seed")?,
            samples: r.get("check.samples")?,
            inject_fault: r.get("check.inject_fault")?,
        };
        if check.samples == 0 {
            return Err(ConfigError::Invalid("check.samples must be >= 1".into()));
        }

        let mut hasher = Sha256::new();
        for (k, v) in &r.canonical {
            if !UNHASHED.contains(k) {
                hasher.update(format!("{k}={v}\n").as_bytes());
            }
        }
        Ok(Self {
            lattice,
            g0,
            mu,
            kappa,
            mass,
            sde,
            output_dir,
            field: FieldSpec {
                source,
                amplitude,
                seed: field_seed,
                file,
            },
            fk,
            oracle,
            check,
            hash: hex::encode(hasher.finalize()),
        })
    }

    /// SHA-256 of the resolved `key=value` lines, `output.dir` excluded.
    pub fn hash(&self) -> &str {
        &self.hash
    }
}
