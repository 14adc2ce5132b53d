//! Reading and writing the CSV artifacts. Machine-readable numbers carry 17
//! significant digits; human tables carry 7.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use rnml_core::{Dataset, DistributionEstimate, Matrix};

use crate::CliError;

/// 17 significant digits, always in exponent form: `3.3333333333333331e-1`.
pub fn num17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Shortest `%g`-style rendering with 7 significant digits.
pub fn num7(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.6e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..7).contains(&exp) {
        let decimals = (6 - exp) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| CliError::io(path, e))?;
    Ok(s)
}

fn header_names(prefix: &str, d: usize) -> Vec<String> {
    (0..d).map(|q| format!("{prefix}{q}")).collect()
}

/// `# comment` lines, then `x0,…,x{d-1},y`, then one row per observation.
pub fn write_dataset<W: Write>(mut w: W, data: &Dataset, comments: &[String]) -> io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    let mut header = header_names("x", data.dim());
    header.push("y".into());
    writeln!(w, "{}", header.join(","))?;
    for (x, y) in data.rows() {
        let mut fields: Vec<String> = x.iter().map(|&v| num17(v)).collect();
        fields.push(num17(y));
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()
}

/// Parsed numeric table with its header.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_table(text: &str) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| CliError::CsvParse {
                    line,
                    message: format!("`{field}` is not a number"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

fn csv_error(e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    CliError::CsvParse {
        line,
        message: e.to_string(),
    }
}

fn check_x_header(header: &[String]) -> Result<(), CliError> {
    for (q, name) in header.iter().enumerate() {
        if *name != format!("x{q}") {
            return Err(CliError::CsvParse {
                line: 1,
                message: format!("expected column `x{q}`, found `{name}`"),
            });
        }
    }
    Ok(())
}

pub fn parse_dataset(text: &str) -> Result<Dataset, CliError> {
    let table = read_table(text)?;
    match table.header.split_last() {
        Some((last, xs)) if last == "y" && !xs.is_empty() => check_x_header(xs)?,
        _ => {
            return Err(CliError::CsvParse {
                line: 1,
                message: "header must be x0,…,x{d-1},y".into(),
            })
        }
    }
    let d = table.header.len() - 1;
    let mut features = Vec::with_capacity(table.rows.len() * d);
    let mut labels = Vec::with_capacity(table.rows.len());
    for mut row in table.rows {
        labels.push(row.pop().expect("non-empty row"));
        features.extend(row);
    }
    Ok(Dataset::new(d, features, labels)?)
}

pub fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    parse_dataset(&read_to_string(path)?)
}

/// Query vectors: an `x0,…` header with an optional trailing `y` that is dropped.
pub fn read_queries(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let table = read_table(&read_to_string(path)?)?;
    let keep = match table.header.last() {
        Some(last) if last == "y" => table.header.len() - 1,
        _ => table.header.len(),
    };
    check_x_header(&table.header[..keep])?;
    Ok(table
        .rows
        .into_iter()
        .map(|mut r| {
            r.truncate(keep);
            r
        })
        .collect())
}

/// Rows of `t` under an `x0,…` header, preceded by comment lines.
pub fn write_matrix<W: Write>(mut w: W, t: &Matrix, comments: &[String]) -> io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "{}", header_names("x", t.cols()).join(","))?;
    for r in 0..t.rows() {
        let fields: Vec<String> = t.row(r).iter().map(|&v| num17(v)).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()
}

pub fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    let table = read_table(&read_to_string(path)?)?;
    check_x_header(&table.header)?;
    let cols = table.header.len();
    let rows = table.rows.len();
    if rows == 0 {
        return Err(CliError::CsvParse {
            line: 1,
            message: "transform has no rows".into(),
        });
    }
    Ok(Matrix::from_vec(rows, cols, table.rows.concat())?)
}

/// One sweep row: the query key, both estimators and all probabilities.
pub struct SweepRow {
    pub key: String,
    pub a_ls: f64,
    pub a_rn: f64,
    pub probabilities: Vec<f64>,
}

/// `t|id,a_ls,a_rn,p0,…,p{d-1}`
pub fn write_sweep<W: Write>(mut w: W, key: &str, d: usize, rows: &[SweepRow]) -> io::Result<()> {
    let mut header = vec![key.to_string(), "a_ls".into(), "a_rn".into()];
    header.extend(header_names("p", d));
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let mut fields = vec![row.key.clone(), num17(row.a_ls), num17(row.a_rn)];
        fields.extend(row.probabilities.iter().map(|&p| num17(p)));
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()
}

/// `node,weight` rows, then `# sum_weight=…,m=…`.
pub fn write_distribution<W: Write>(mut w: W, dist: &DistributionEstimate, m: usize) -> io::Result<()> {
    writeln!(w, "node,weight")?;
    for (node, weight) in dist.pairs() {
        writeln!(w, "{},{}", num17(node), num17(weight))?;
    }
    writeln!(w, "# sum_weight={},m={m}", num17(dist.total_weight()))?;
    w.flush()
}
