//! CSV tables with a provenance comment line.

use std::path::{Path, PathBuf};

/// `gauge-reduce <version>`.
pub fn version() -> String {
    format!("gauge-reduce {}", env!("CARGO_PKG_VERSION"))
}

/// An in-memory RFC-4180 table, written to disk in one piece.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// `# gauge-reduce <version> config_hash=<hash> seed=<seed>`, then the
    /// header row and the data rows.
    pub fn render(&self, config_hash: &str, seed: u64) -> Result<Vec<u8>, csv::Error> {
        let mut out =
            format!("# {} config_hash={config_hash} seed={seed}\n", version()).into_bytes();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        out.extend(w.into_inner().map_err(|e| e.into_error())?);
        Ok(out)
    }

    pub fn write(
        &self,
        dir: &Path,
        name: &str,
        config_hash: &str,
        seed: u64,
    ) -> Result<PathBuf, std::io::Error> {
        let bytes = self
            .render(config_hash, seed)
            .map_err(std::io::Error::other)?;
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        std::fs::write(&path, bytes)?;
        Ok(path)
    }
}

/// Shortest round-trip representation, so equal values give equal bytes.
pub fn real(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_has_provenance_and_quoting() {
        let mut t = Table::new(&["name", "value"]);
        t.push(vec!["a,b".into(), real(0.5)]);
        let s = String::from_utf8(t.render("abc", 7).unwrap()).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# gauge-reduce "));
        assert!(lines[0].ends_with("config_hash=abc seed=7"));
        assert_eq!(lines[1], "name,value");
        assert_eq!(lines[2], "\"a,b\",5e-1");
    }

    #[test]
    fn reals_round_trip() {
        for x in [0.1, -3.25e-17, 1.0 / 3.0, 0.0] {
            assert_eq!(real(x).parse::<f64>().unwrap(), x);
        }
    }
}
