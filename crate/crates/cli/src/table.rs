//! Header-addressed numeric CSV tables.

use crate::error::CliError;
use extreme_conformal::serde_inf::parse_token;
use std::path::Path;

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::data("io", format!("{}: {e}", path.display())))?;
        Self::parse(&bytes, &path.display().to_string())
    }

    pub fn parse(bytes: &[u8], name: &str) -> Result<Self, CliError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(bytes);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .enumerate()
                .map(|(j, field)| {
                    parse_token(field).filter(|v| !v.is_nan()).ok_or_else(|| {
                        CliError::data(
                            "parse",
                            format!(
                                "{name}: row {}, column '{}': cannot parse '{field}'",
                                i + 1,
                                header[j]
                            ),
                        )
                    })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn has(&self, name: &str) -> bool {
        self.header.iter().any(|h| h == name)
    }

    /// A named column; `finite` rejects infinite entries.
    pub fn column(&self, name: &str, finite: bool) -> Result<Vec<f64>, CliError> {
        let j = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::data("schema", format!("missing column '{name}'")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let v = r[j];
                if finite && !v.is_finite() {
                    Err(CliError::data(
                        "parse",
                        format!("row {}, column '{name}': {v} is not finite", i + 1),
                    ))
                } else {
                    Ok(v)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tokens_and_rejects_garbage() {
        let t = Table::parse(b"a, b\n1,-inf\n2.5, inf\n", "t").unwrap();
        assert_eq!(t.header, vec!["a", "b"]);
        assert_eq!(t.column("a", true).unwrap(), vec![1.0, 2.5]);
        assert!(t.column("b", true).is_err());
        assert_eq!(
            t.column("b", false).unwrap(),
            vec![f64::NEG_INFINITY, f64::INFINITY]
        );
        assert!(t.column("c", false).is_err());
        assert!(Table::parse(b"a\nx\n", "t").is_err());
        assert!(Table::parse(b"a\nnan\n", "t").is_err());
        assert!(Table::parse(b"a,b\n1\n", "t").is_err());
    }
}
