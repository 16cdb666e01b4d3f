use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A matrix with row and column identifiers, as stored on disk.
///
/// The first header cell is a free label (e.g. `gene`); the rest are column ids.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledMatrix {
    pub corner: String,
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub values: Matrix,
}

impl LabeledMatrix {
    pub fn new(corner: impl Into<String>, row_ids: Vec<String>, col_ids: Vec<String>, values: Matrix) -> Result<Self> {
        if values.rows() != row_ids.len() || values.cols() != col_ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} values with {} row ids and {} column ids",
                values.rows(),
                values.cols(),
                row_ids.len(),
                col_ids.len()
            )));
        }
        Ok(LabeledMatrix {
            corner: corner.into(),
            row_ids,
            col_ids,
            values,
        })
    }

    pub fn row_index(&self) -> HashMap<&str, usize> {
        self.row_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()
    }

    pub fn col_index(&self) -> HashMap<&str, usize> {
        self.col_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()
    }
}

/// Parsed table where empty cells are kept as `None`.
#[derive(Clone, Debug)]
pub(crate) struct RawTable {
    pub corner: String,
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
    /// 1-based source line of each data row.
    pub lines: Vec<usize>,
}

/// Real numbers are written with 17 significant digits so they parse back exactly.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Non-blank, non-comment lines with their 1-based numbers. Handles CRLF.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

pub(crate) fn parse_real(path: &Path, line: usize, cell: &str) -> Result<f64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("non-numeric cell {cell:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite cell {cell:?}")));
    }
    Ok(v)
}

pub(crate) fn parse_table(path: &Path, text: &str) -> Result<RawTable> {
    let mut lines = content_lines(text);
    let (header_line, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let mut head = header.split('\t');
    let corner = head.next().unwrap_or_default().trim().to_string();
    let col_ids: Vec<String> = head.map(|s| s.trim().to_string()).collect();
    if col_ids.is_empty() {
        return Err(parse_err(path, header_line, "header has no columns"));
    }
    let mut seen = HashMap::new();
    for id in &col_ids {
        if id.is_empty() {
            return Err(parse_err(path, header_line, "empty column id"));
        }
        if seen.insert(id.as_str(), ()).is_some() {
            return Err(parse_err(path, header_line, format!("duplicate column id {id:?}")));
        }
    }

    let mut row_ids = Vec::new();
    let mut cells = Vec::new();
    let mut numbers = Vec::new();
    let mut row_seen: HashMap<String, usize> = HashMap::new();
    for (line, l) in lines {
        let fields: Vec<&str> = l.split('\t').collect();
        if fields.len() != col_ids.len() + 1 {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, found {}", col_ids.len() + 1, fields.len()),
            ));
        }
        let id = fields[0].trim().to_string();
        if id.is_empty() {
            return Err(parse_err(path, line, "empty row id"));
        }
        if let Some(first) = row_seen.insert(id.clone(), line) {
            return Err(parse_err(
                path,
                line,
                format!("duplicate row id {id:?} (first on line {first})"),
            ));
        }
        let row = fields[1..]
            .iter()
            .map(|c| {
                if c.trim().is_empty() {
                    Ok(None)
                } else {
                    parse_real(path, line, c).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        row_ids.push(id);
        cells.push(row);
        numbers.push(line);
    }
    if row_ids.is_empty() {
        return Err(parse_err(path, header_line, "no data rows"));
    }
    Ok(RawTable {
        corner,
        row_ids,
        col_ids,
        cells,
        lines: numbers,
    })
}

impl RawTable {
    /// Fails on the first missing cell.
    pub fn complete(self, path: &Path) -> Result<LabeledMatrix> {
        let mut data = Vec::with_capacity(self.row_ids.len() * self.col_ids.len());
        for (row, &line) in self.cells.iter().zip(&self.lines) {
            for (c, v) in row.iter().enumerate() {
                data.push(
                    v.ok_or_else(|| parse_err(path, line, format!("missing value in column {:?}", self.col_ids[c])))?,
                );
            }
        }
        let values = Matrix::from_vec(self.row_ids.len(), self.col_ids.len(), data)?;
        LabeledMatrix::new(self.corner, self.row_ids, self.col_ids, values)
    }
}

pub fn read_matrix(path: &Path) -> Result<LabeledMatrix> {
    parse_table(path, &read_text(path)?)?.complete(path)
}

pub fn matrix_to_tsv(m: &LabeledMatrix) -> String {
    let mut out = String::new();
    out.push_str(&m.corner);
    for c in &m.col_ids {
        out.push('\t');
        out.push_str(c);
    }
    out.push('\n');
    for (i, id) in m.row_ids.iter().enumerate() {
        out.push_str(id);
        for v in m.values.row(i) {
            out.push('\t');
            out.push_str(&format_real(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, m: &LabeledMatrix) -> Result<()> {
    write_text(path, &matrix_to_tsv(m))
}

/// Two-column `key<TAB>value` file with a header line.
pub(crate) fn parse_pairs<'a>(path: &Path, text: &'a str) -> Result<Vec<(usize, &'a str, &'a str)>> {
    let mut out = Vec::new();
    for (k, (line, l)) in content_lines(text).enumerate() {
        if k == 0 {
            continue;
        }
        let mut parts = l.split('\t');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) if !a.trim().is_empty() && !b.trim().is_empty() => {
                out.push((line, a.trim(), b.trim()))
            }
            _ => return Err(parse_err(path, line, "expected two non-empty tab-separated fields")),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let values = Matrix::from_rows(&[vec![0.1, 1.0 / 3.0], vec![-2.5e-300, 1.7976931348623157e308]]).unwrap();
        let m = LabeledMatrix::new(
            "gene",
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
            values,
        )
        .unwrap();
        let text = matrix_to_tsv(&m);
        let back = parse_table(Path::new("t"), &text)
            .unwrap()
            .complete(Path::new("t"))
            .unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = parse_table(Path::new("t.tsv"), "gene\te1\te2\ng1\t1\t2\ng2\t1\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn bad_cell_is_reported() {
        let err = parse_table(Path::new("t.tsv"), "gene\te1\ng1\tabc\n").unwrap_err();
        assert!(err.to_string().contains("t.tsv:2"), "{err}");
    }
}
