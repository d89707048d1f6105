//! Byte-stable text output: CSV rows, OBJ records and JSON documents.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Shortest decimal that reads back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let mut buf = ryu::Buffer::new();
    buf.format(x).to_owned()
}

pub fn csv_row(out: &mut String, fields: &[f64]) {
    let mut first = true;
    for &x in fields {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&fmt_f64(x));
    }
    out.push('\n');
}

/// Parses a CSV document written by [`csv_row`] back into its header and rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let header: Vec<String> =
        lines.next().ok_or("empty csv")?.split(',').map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|f| f.parse::<f64>().map_err(|e| format!("row {}: {e}", k + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != header.len() {
            return Err(format!("row {} has {} fields, header has {}", k + 1, row.len(), header.len()));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Re-emits parsed CSV; identical to the input for files this crate wrote.
pub fn write_csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        csv_row(&mut out, r);
    }
    out
}

pub fn obj_vertex(out: &mut String, p: [f64; 3]) {
    let _ = writeln!(out, "v {} {} {}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2]));
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        }
    }
    fs::write(path, contents).map_err(CliError::io(path))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObjFile {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<Vec<usize>>,
    pub lines: Vec<Vec<usize>>,
}

/// Reads `v`, `f` and `l` records with 1-based indices; anything else is an
/// error.
pub fn parse_obj(text: &str) -> Result<ObjFile, String> {
    let mut obj = ObjFile::default();
    for (k, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        let tag = match it.next() {
            Some(t) => t,
            None => continue,
        };
        let rest: Vec<&str> = it.collect();
        match tag {
            "v" => {
                if rest.len() != 3 {
                    return Err(format!("line {}: vertex needs 3 coordinates", k + 1));
                }
                let mut p = [0.0f64; 3];
                for (slot, s) in p.iter_mut().zip(&rest) {
                    *slot = s.parse().map_err(|e| format!("line {}: {e}", k + 1))?;
                    if !slot.is_finite() {
                        return Err(format!("line {}: non-finite coordinate", k + 1));
                    }
                }
                obj.vertices.push(p);
            }
            "f" | "l" => {
                let idx = rest
                    .iter()
                    .map(|s| s.parse::<usize>().map_err(|e| format!("line {}: {e}", k + 1)))
                    .collect::<Result<Vec<_>, _>>()?;
                let min = if tag == "f" { 3 } else { 2 };
                if idx.len() < min {
                    return Err(format!("line {}: too few indices", k + 1));
                }
                if idx.iter().any(|&i| i == 0 || i > obj.vertices.len()) {
                    return Err(format!("line {}: index out of range", k + 1));
                }
                if tag == "f" {
                    obj.faces.push(idx);
                } else {
                    obj.lines.push(idx);
                }
            }
            other => return Err(format!("line {}: unexpected record `{other}`", k + 1)),
        }
    }
    Ok(obj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for &x in &[0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
            let digits = s.chars().filter(|c| c.is_ascii_digit()).count();
            assert!(digits <= 17 + 3, "{s}");
        }
        assert_eq!(fmt_f64(0.5), "0.5");
    }

    #[test]
    fn csv_round_trip() {
        let mut s = String::from("a,b\n");
        csv_row(&mut s, &[1.0, 1.0 / 3.0]);
        csv_row(&mut s, &[-0.0, 1e-300]);
        let (h, rows) = parse_csv(&s).unwrap();
        assert_eq!(write_csv(&h, &rows), s);
        assert!(parse_csv("a,b\n1.0\n").is_err());
    }

    #[test]
    fn obj_parsing() {
        let o = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\nl 1 2\n").unwrap();
        assert_eq!((o.vertices.len(), o.faces.len(), o.lines.len()), (3, 1, 1));
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
        assert!(parse_obj("vn 0 0 1\n").is_err());
        assert!(parse_obj("v 0 0\n").is_err());
    }
}
