//! Matrix Market and dense-vector files, and result records in JSON or CSV.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlmc::MlmcResult;
use crate::spmat::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn parse_header(line: &str) -> Result<Symmetry> {
    let fields: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::parse(1, format!("malformed Matrix Market header `{line}`")));
    }
    if fields[2] != "coordinate" {
        return Err(Error::Unsupported(format!("Matrix Market format `{}`", fields[2])));
    }
    match fields[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(Error::Unsupported(format!("Matrix Market field `{other}`"))),
    }
    match fields[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        "skew-symmetric" => Ok(Symmetry::SkewSymmetric),
        other => Err(Error::Unsupported(format!("Matrix Market symmetry `{other}`"))),
    }
}

fn field<T: FromStr>(token: Option<&str>, line: usize, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{token}`")))
}

/// Parses coordinate Matrix Market text. Symmetric storage is expanded and
/// duplicate entries are summed.
pub fn parse_matrix_market(reader: impl BufRead) -> Result<SparseMatrix> {
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));
    let symmetry = match lines.next() {
        Some((_, line)) => parse_header(line?.trim())?,
        None => return Err(Error::parse(1, "empty file")),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    let mut last_line = 1;
    for (no, line) in lines {
        let line = line?;
        last_line = no;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        let mut tokens = text.split_whitespace();
        match size {
            None => {
                let rows = field(tokens.next(), no, "row count")?;
                let cols = field(tokens.next(), no, "column count")?;
                let nnz = field(tokens.next(), no, "entry count")?;
                if symmetry != Symmetry::General && rows != cols {
                    return Err(Error::parse(no, "symmetric storage needs a square matrix"));
                }
                entries.reserve(nnz);
                size = Some((rows, cols, nnz));
            }
            Some((rows, cols, nnz)) => {
                let i: usize = field(tokens.next(), no, "row index")?;
                let j: usize = field(tokens.next(), no, "column index")?;
                let v: f64 = match tokens.next() {
                    Some(t) => field(Some(t), no, "value")?,
                    None => {
                        return Err(Error::Unsupported(format!(
                            "line {no}: entry without a value (pattern matrices are not supported)"
                        )))
                    }
                };
                if tokens.next().is_some() {
                    return Err(Error::parse(no, "trailing fields after value"));
                }
                if i == 0 || i > rows || j == 0 || j > cols {
                    return Err(Error::parse(no, format!("index ({i}, {j}) outside {rows}x{cols}")));
                }
                if !v.is_finite() {
                    return Err(Error::parse(no, format!("non-finite value {v}")));
                }
                if entries.len() >= nnz * if symmetry == Symmetry::General { 1 } else { 2 } {
                    return Err(Error::parse(no, format!("more than the declared {nnz} entries")));
                }
                entries.push((i - 1, j - 1, v));
                if i != j {
                    match symmetry {
                        Symmetry::General => {}
                        Symmetry::Symmetric => entries.push((j - 1, i - 1, v)),
                        Symmetry::SkewSymmetric => entries.push((j - 1, i - 1, -v)),
                    }
                } else if symmetry == Symmetry::SkewSymmetric {
                    return Err(Error::parse(no, "diagonal entry in skew-symmetric storage"));
                }
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| Error::parse(last_line, "missing size line"))?;
    let stored = match symmetry {
        Symmetry::General => entries.len(),
        _ => entries.iter().filter(|(i, j, _)| i >= j).count(),
    };
    if stored != nnz {
        return Err(Error::parse(last_line, format!("declared {nnz} entries, found {stored}")));
    }
    SparseMatrix::from_triplets(rows, cols, entries)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    parse_matrix_market(BufReader::new(File::open(path)?))
}

/// Writes general coordinate storage with shortest round-trip values.
pub fn write_matrix_market_to(a: &SparseMatrix, mut w: impl Write) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn write_matrix_market(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market_to(a, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Whitespace-separated reals; lines starting with `%` or `#` are comments.
pub fn parse_vector(mut reader: impl Read) -> Result<Vec<f64>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('%') || line.starts_with('#') {
            continue;
        }
        for token in line.split_whitespace() {
            let v: f64 = field(Some(token), k + 1, "number")?;
            if !v.is_finite() {
                return Err(Error::parse(k + 1, format!("non-finite value {v}")));
            }
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(Error::parse(text.lines().count().max(1), "vector file holds no values"));
    }
    Ok(out)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_vector(File::open(path)?)
}

pub fn write_vector(x: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in x {
        writeln!(w, "{v:e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Non-finite floats are written as `null` and read back as NaN.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: u32,
    #[serde(with = "nullable")]
    pub dt: f64,
    pub samples: u64,
    #[serde(with = "nullable")]
    pub mean: f64,
    #[serde(with = "nullable")]
    pub variance: f64,
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    #[serde(with = "nullable")]
    pub estimate: f64,
    #[serde(with = "nullable")]
    pub statistical_error: f64,
    #[serde(with = "nullable")]
    pub bias_estimate: f64,
    pub total_cost: u64,
    #[serde(with = "nullable")]
    pub wall_time_seconds: f64,
    pub converged: bool,
    pub levels: Vec<LevelRow>,
    pub config: BTreeMap<String, String>,
}

impl ResultRecord {
    /// Record for an MLMC run whose finest step at level `l` is `beta / 2^l`.
    pub fn from_mlmc(result: &MlmcResult, beta: f64, wall_time_seconds: f64) -> Self {
        Self {
            estimate: result.estimate,
            statistical_error: result.statistical_error,
            bias_estimate: result.bias_estimate,
            total_cost: result.total_cost,
            wall_time_seconds,
            converged: result.converged,
            levels: result
                .levels
                .iter()
                .map(|s| LevelRow {
                    level: s.level,
                    dt: beta / 2f64.powi(s.level as i32),
                    samples: s.samples,
                    mean: s.mean(),
                    variance: s.variance(),
                    cost: s.cost,
                })
                .collect(),
            config: BTreeMap::new(),
        }
    }

    pub fn with_config(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.config.insert(key.into(), value.to_string());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown format `{other}` (json or csv)"))),
        }
    }
}

fn float_text(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        "null".to_owned()
    }
}

fn float_value(text: &str, line: usize) -> Result<f64> {
    if text == "null" {
        Ok(f64::NAN)
    } else {
        field(Some(text), line, "number")
    }
}

/// Long-form CSV: `section,level,key,value` with sections `summary`,
/// `level` and `config`.
fn write_csv(record: &ResultRecord, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["section", "level", "key", "value"])?;
    let summary = [
        ("estimate", float_text(record.estimate)),
        ("statistical_error", float_text(record.statistical_error)),
        ("bias_estimate", float_text(record.bias_estimate)),
        ("total_cost", record.total_cost.to_string()),
        ("wall_time_seconds", float_text(record.wall_time_seconds)),
        ("converged", record.converged.to_string()),
    ];
    for (k, v) in summary {
        out.write_record(["summary", "", k, &v])?;
    }
    for row in &record.levels {
        let l = row.level.to_string();
        let cells = [
            ("dt", float_text(row.dt)),
            ("samples", row.samples.to_string()),
            ("mean", float_text(row.mean)),
            ("variance", float_text(row.variance)),
            ("cost", row.cost.to_string()),
        ];
        for (k, v) in cells {
            out.write_record(["level", &l, k, &v])?;
        }
    }
    for (k, v) in &record.config {
        out.write_record(["config", "", k, v])?;
    }
    out.flush()?;
    Ok(())
}

fn read_csv(r: impl Read) -> Result<ResultRecord> {
    let mut record = ResultRecord {
        estimate: f64::NAN,
        statistical_error: f64::NAN,
        bias_estimate: f64::NAN,
        total_cost: 0,
        wall_time_seconds: f64::NAN,
        converged: false,
        levels: Vec::new(),
        config: BTreeMap::new(),
    };
    let mut reader = csv::Reader::from_reader(r);
    for (k, row) in reader.records().enumerate() {
        let row = row?;
        let line = k + 2;
        if row.len() != 4 {
            return Err(Error::parse(line, format!("expected 4 fields, got {}", row.len())));
        }
        let (section, level, key, value) = (&row[0], &row[1], &row[2], &row[3]);
        match section {
            "summary" => match key {
                "estimate" => record.estimate = float_value(value, line)?,
                "statistical_error" => record.statistical_error = float_value(value, line)?,
                "bias_estimate" => record.bias_estimate = float_value(value, line)?,
                "total_cost" => record.total_cost = field(Some(value), line, "cost")?,
                "wall_time_seconds" => record.wall_time_seconds = float_value(value, line)?,
                "converged" => record.converged = field(Some(value), line, "flag")?,
                other => return Err(Error::parse(line, format!("unknown summary key `{other}`"))),
            },
            "level" => {
                let l: u32 = field(Some(level), line, "level")?;
                // every row block opens with `dt`
                if key == "dt" || record.levels.last().map_or(true, |r| r.level != l) {
                    record.levels.push(LevelRow {
                        level: l,
                        dt: f64::NAN,
                        samples: 0,
                        mean: f64::NAN,
                        variance: f64::NAN,
                        cost: 0,
                    });
                }
                let r = record.levels.last_mut().expect("pushed above");
                match key {
                    "dt" => r.dt = float_value(value, line)?,
                    "samples" => r.samples = field(Some(value), line, "count")?,
                    "mean" => r.mean = float_value(value, line)?,
                    "variance" => r.variance = float_value(value, line)?,
                    "cost" => r.cost = field(Some(value), line, "cost")?,
                    other => return Err(Error::parse(line, format!("unknown level key `{other}`"))),
                }
            }
            "config" => {
                record.config.insert(key.to_owned(), value.to_owned());
            }
            other => return Err(Error::parse(line, format!("unknown section `{other}`"))),
        }
    }
    Ok(record)
}

pub fn write_result_to(record: &ResultRecord, w: impl Write, format: Format) -> Result<()> {
    match format {
        Format::Json => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, record)?;
            writeln!(w)?;
            Ok(())
        }
        Format::Csv => write_csv(record, w),
    }
}

pub fn write_result(record: &ResultRecord, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_result_to(record, &mut w, format)?;
    w.flush()?;
    Ok(())
}

pub fn read_result_from(r: impl Read, format: Format) -> Result<ResultRecord> {
    match format {
        Format::Json => Ok(serde_json::from_reader(r)?),
        Format::Csv => read_csv(r),
    }
}

pub fn read_result(path: impl AsRef<Path>, format: Format) -> Result<ResultRecord> {
    read_result_from(BufReader::new(File::open(path)?), format)
}
