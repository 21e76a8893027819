//! Count-series ingestion.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use bellgarch::CountSeries;
use sha2::{Digest, Sha256};

/// Parses a single-column CSV of non-negative integers. A non-numeric first
/// row is taken as a header; blank lines are skipped. Errors name the line.
pub fn parse_series(text: &str) -> Result<CountSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.context("malformed CSV")?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 1 {
            bail!("line {line}: expected one column, found {}", record.len());
        }
        let field = &record[0];
        match field.parse::<u64>() {
            Ok(v) => values.push(v),
            Err(_) if first && field.parse::<f64>().is_err() && !field.starts_with('-') => {}
            Err(_) => bail!("line {line}: expected a non-negative integer, got {field:?}"),
        }
        first = false;
    }
    if values.is_empty() {
        bail!("line 1: no observations found");
    }
    CountSeries::new(values).map_err(|e| anyhow!(e))
}

/// Reads and parses a series file, returning it with the file's SHA-256.
pub fn read_series(path: &Path) -> Result<(CountSeries, String)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let text = std::str::from_utf8(&bytes)
        .with_context(|| format!("{} is not valid UTF-8", path.display()))?;
    let series = parse_series(text).with_context(|| format!("in {}", path.display()))?;
    Ok((series, sha256_hex(&bytes)))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_crlf() {
        let s = parse_series("count\r\n1\r\n0\r\n\r\n7\r\n").unwrap();
        assert_eq!(s.values(), &[1, 0, 7]);
        assert_eq!(parse_series("3\n4").unwrap().values(), &[3, 4]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_series("x\n1\n-2\n").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        let e = parse_series("1\n2.5\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = parse_series("1,2\n").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
        assert!(parse_series("").unwrap_err().to_string().contains("line 1"));
        assert!(parse_series("count\n").is_err());
    }
}
