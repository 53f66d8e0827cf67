//! Maass form data files.
//!
//! CSV:
//!
//! ```text
//! # normalization: hecke-unit
//! # source: where the numbers came from
//! t,parity,norm_sq,lambda_2,lambda_3,lambda_4
//! 9.53,odd,1.0,0.31,-0.82,-0.9039
//! ```
//!
//! Empty cells are missing coefficients; a missing or empty `norm_sq`
//! defaults to 1.0 with a warning. JSON mirrors it:
//! `{"normalization": "hecke-unit", "source": "...", "records": [{"t": ..,
//! "parity": "odd", "norm_sq": .., "lambdas": {"2": ..}}]}`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lowlying_core::maassdata::{normalize_records, MaassFormRecord, Parity, HECKE_UNIT};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

/// Search directory for data files given by relative path.
pub const DATA_DIR_VAR: &str = "MAASS_DATA_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => DataFormat::Json,
            _ => DataFormat::Csv,
        }
    }
}

impl FromStr for DataFormat {
    type Err = AppError;
    fn from_str(s: &str) -> AppResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(DataFormat::Csv),
            "json" => Ok(DataFormat::Json),
            _ => Err(AppError::Usage(format!("unknown data format `{s}` (csv or json)"))),
        }
    }
}

/// The path itself if it exists, else the same relative path under
/// `$MAASS_DATA_DIR`.
pub fn resolve_data_path(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(DATA_DIR_VAR) {
        Some(dir) => {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                candidate
            } else {
                path.to_path_buf()
            }
        }
        None => path.to_path_buf(),
    }
}

/// Reads, validates the declared normalization, sorts by t and rejects
/// duplicates.
pub fn parse_records(path: &Path, format: Option<DataFormat>) -> AppResult<Vec<MaassFormRecord>> {
    let path = resolve_data_path(path);
    let text = fs::read_to_string(&path).map_err(|e| AppError::io(&path, e))?;
    let format = format.unwrap_or_else(|| DataFormat::from_path(&path));
    let records = match format {
        DataFormat::Csv => parse_csv(&text, &path)?,
        DataFormat::Json => parse_json(&text, &path)?,
    };
    Ok(normalize_records(records)?)
}

pub fn parse_csv(text: &str, path: &Path) -> AppResult<Vec<MaassFormRecord>> {
    let mut normalization = None;
    let mut source = String::new();
    let mut body_start = 0;
    let mut header_line = 0;
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(meta) = trimmed.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once(':') {
                match k.trim() {
                    "normalization" => normalization = Some(v.trim().to_string()),
                    "source" => source = v.trim().to_string(),
                    _ => {}
                }
            }
            body_start += line.len() + 1;
            continue;
        }
        if trimmed.is_empty() {
            body_start += line.len() + 1;
            continue;
        }
        header_line = i + 1;
        break;
    }
    let body = text.get(body_start.min(text.len())..).unwrap_or("");
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    check_normalization(normalization.as_deref(), path)?;

    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let t_col = column("t").ok_or_else(|| AppError::parse(path, header_line, "t", "missing column"))?;
    let parity_col = column("parity").ok_or_else(|| AppError::parse(path, header_line, "parity", "missing column"))?;
    let norm_col = column("norm_sq");
    let mut lambda_cols = Vec::new();
    for (j, h) in headers.iter().enumerate() {
        if let Some(idx) = h.strip_prefix("lambda_") {
            let n: u64 = idx
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| AppError::parse(path, header_line, h, "index must be a positive integer"))?;
            lambda_cols.push((j, n));
        }
    }
    if norm_col.is_none() {
        log::warn!("{}: no norm_sq column; every ‖u‖² defaults to 1.0", path.display());
    }

    let mut out = Vec::new();
    for (k, row) in reader.records().enumerate() {
        let row = row?;
        let line = header_line + 1 + k;
        let field = |j: usize| row.get(j).unwrap_or("");
        let t = parse_f64(field(t_col), path, line, "t")?;
        let parity = Parity::from_str(field(parity_col)).map_err(|e| AppError::parse(path, line, "parity", e.to_string()))?;
        let norm_sq = match norm_col.map(field).filter(|s| !s.is_empty()) {
            Some(s) => parse_f64(s, path, line, "norm_sq")?,
            None => {
                if norm_col.is_some() {
                    log::warn!("{}:{line}: empty norm_sq; defaulting to 1.0", path.display());
                }
                1.0
            }
        };
        let mut lambdas = BTreeMap::new();
        for &(j, n) in &lambda_cols {
            let s = field(j);
            if !s.is_empty() {
                lambdas.insert(n, parse_f64(s, path, line, &format!("lambda_{n}"))?);
            }
        }
        out.push(MaassFormRecord { t, parity, lambdas, norm_sq, source: source.clone() });
    }
    Ok(out)
}

fn parse_f64(s: &str, path: &Path, line: usize, field: &str) -> AppResult<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| AppError::parse(path, line, field, format!("expected a finite number, found `{s}`")))
}

fn check_normalization(declared: Option<&str>, path: &Path) -> AppResult<()> {
    match declared {
        Some(HECKE_UNIT) => Ok(()),
        Some(other) => Err(AppError::parse(
            path,
            1,
            "normalization",
            format!("`{other}` is not supported; convert the file to `{HECKE_UNIT}` (λ₁ = 1)"),
        )),
        None => Err(AppError::parse(path, 1, "normalization", format!("the file must declare `normalization: {HECKE_UNIT}`"))),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonFile {
    normalization: Option<String>,
    #[serde(default)]
    source: String,
    #[serde(default)]
    records: Vec<JsonRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonRecord {
    t: f64,
    parity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    norm_sq: Option<f64>,
    #[serde(default)]
    lambdas: BTreeMap<String, f64>,
}

pub fn parse_json(text: &str, path: &Path) -> AppResult<Vec<MaassFormRecord>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let file: JsonFile = serde_json::from_str(text).map_err(|e| AppError::parse(path, e.line(), "json", e.to_string()))?;
    if file.records.is_empty() {
        return Ok(Vec::new());
    }
    check_normalization(file.normalization.as_deref(), path)?;
    let mut out = Vec::new();
    for (i, r) in file.records.into_iter().enumerate() {
        let at = |field: &str, msg: String| AppError::parse(path, i + 1, format!("records[{i}].{field}"), msg);
        let parity = Parity::from_str(&r.parity).map_err(|e| at("parity", e.to_string()))?;
        let norm_sq = r.norm_sq.unwrap_or_else(|| {
            log::warn!("{}: record {i} has no norm_sq; defaulting to 1.0", path.display());
            1.0
        });
        let mut lambdas = BTreeMap::new();
        for (k, v) in r.lambdas {
            let n: u64 = k.parse().ok().filter(|&n| n >= 1).ok_or_else(|| at("lambdas", format!("bad index `{k}`")))?;
            lambdas.insert(n, v);
        }
        out.push(MaassFormRecord { t: r.t, parity, lambdas, norm_sq, source: file.source.clone() });
    }
    Ok(out)
}

fn common_source(records: &[MaassFormRecord]) -> &str {
    records.first().map(|r| r.source.as_str()).unwrap_or("")
}

pub fn to_csv(records: &[MaassFormRecord]) -> String {
    let mut s = format!("# normalization: {HECKE_UNIT}\n");
    let source = common_source(records);
    if !source.is_empty() {
        s.push_str(&format!("# source: {source}\n"));
    }
    let indices: Vec<u64> = records
        .iter()
        .flat_map(|r| r.lambdas.keys().copied())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    s.push_str("t,parity,norm_sq");
    for n in &indices {
        s.push_str(&format!(",lambda_{n}"));
    }
    s.push('\n');
    for r in records {
        s.push_str(&format!("{},{},{}", r.t, r.parity, r.norm_sq));
        for n in &indices {
            match r.lambdas.get(n) {
                Some(v) => s.push_str(&format!(",{v}")),
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

pub fn to_json(records: &[MaassFormRecord]) -> AppResult<String> {
    let file = JsonFile {
        normalization: Some(HECKE_UNIT.to_string()),
        source: common_source(records).to_string(),
        records: records
            .iter()
            .map(|r| JsonRecord {
                t: r.t,
                parity: r.parity.to_string(),
                norm_sq: Some(r.norm_sq),
                lambdas: r.lambdas.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

pub fn serialize_records(records: &[MaassFormRecord], format: DataFormat) -> AppResult<String> {
    match format {
        DataFormat::Csv => Ok(to_csv(records)),
        DataFormat::Json => to_json(records),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test.csv")
    }

    #[test]
    fn empty_inputs() {
        assert!(parse_csv("", p()).unwrap().is_empty());
        assert!(parse_csv("# normalization: hecke-unit\n", p()).unwrap().is_empty());
        assert!(parse_json("", p()).unwrap().is_empty());
    }

    #[test]
    fn normalization_must_be_declared() {
        let body = "t,parity\n9.5,odd\n";
        assert!(matches!(parse_csv(body, p()), Err(AppError::Parse { .. })));
        let other = format!("# normalization: cosh-scaled\n{body}");
        let err = parse_csv(&other, p()).unwrap_err().to_string();
        assert!(err.contains("cosh-scaled"), "{err}");
    }

    #[test]
    fn parse_errors_name_line_and_field() {
        let text = "# normalization: hecke-unit\nt,parity,norm_sq,lambda_2\n9.5,odd,1,0.3\n12.1,even,1,abc\n";
        match parse_csv(text, p()) {
            Err(AppError::Parse { line, field, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(field, "lambda_2");
            }
            other => panic!("{other:?}"),
        }
        let bad_parity = "# normalization: hecke-unit\nt,parity\n9.5,sideways\n";
        assert!(matches!(parse_csv(bad_parity, p()), Err(AppError::Parse { line: 3, .. })));
    }

    #[test]
    fn missing_cells_and_norms() {
        let text = "# normalization: hecke-unit\n# source: hand typed\nt,parity,norm_sq,lambda_2,lambda_3\n9.5,odd,,0.3,\n";
        let r = parse_csv(text, p()).unwrap();
        assert_eq!(r[0].norm_sq, 1.0);
        assert_eq!(r[0].lambda(2), Some(0.3));
        assert_eq!(r[0].lambda(3), None);
        assert_eq!(r[0].source, "hand typed");
    }

    #[test]
    fn json_mirrors_csv() {
        let text = "# normalization: hecke-unit\n# source: s\nt,parity,norm_sq,lambda_2\n9.5,odd,2.5,0.3\n";
        let a = parse_csv(text, p()).unwrap();
        let b = parse_json(&to_json(&a).unwrap(), Path::new("x.json")).unwrap();
        assert_eq!(a, b);
    }
}
