//! Text formats: matrix files and result CSVs.
//!
//! A matrix file is
//!
//! ```text
//! NBQC-MATRIX 1
//! kind degree
//! rows 2
//! cols 3
//! lifting 4
//! field 2
//! data
//! 0 -1 3
//! 1 2 -1
//! ```
//!
//! `kind` is `base`, `degree` or `coeff`; `lifting` and `field` are optional
//! and, when present, bound the entries of degree and coefficient files.
//! `-1` marks an absent entry. Blank lines and lines starting with `#` are
//! ignored.

use std::fmt::Write as _;

use crate::bounds::BoundPoint;
use crate::error::{Error, Result};
use crate::matrix::{BinaryMatrix, IntMatrix};
use crate::sim::FerReport;
use crate::spectrum::WeightSpectrum;

pub const MATRIX_MAGIC: &str = "NBQC-MATRIX 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Base,
    Degree,
    Coeff,
}

impl MatrixKind {
    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Base => "base",
            MatrixKind::Degree => "degree",
            MatrixKind::Coeff => "coeff",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "base" => Some(MatrixKind::Base),
            "degree" => Some(MatrixKind::Degree),
            "coeff" => Some(MatrixKind::Coeff),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixFile {
    pub kind: MatrixKind,
    pub lifting: Option<usize>,
    pub field: Option<u32>,
    pub data: IntMatrix,
}

impl MatrixFile {
    pub fn base(b: &BinaryMatrix) -> Self {
        let rows: Vec<Vec<i32>> = b
            .to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(i32::from).collect())
            .collect();
        MatrixFile {
            kind: MatrixKind::Base,
            lifting: None,
            field: None,
            data: IntMatrix::from_rows(&rows),
        }
    }

    pub fn degrees(d: &IntMatrix, lifting: usize) -> Self {
        MatrixFile {
            kind: MatrixKind::Degree,
            lifting: Some(lifting),
            field: None,
            data: d.clone(),
        }
    }

    pub fn coeffs(a: &IntMatrix, field: u32) -> Self {
        MatrixFile {
            kind: MatrixKind::Coeff,
            lifting: None,
            field: Some(field),
            data: a.clone(),
        }
    }

    pub fn to_base(&self) -> Result<BinaryMatrix> {
        if self.kind != MatrixKind::Base {
            return Err(parse_err(
                0,
                format!("expected a base matrix, found kind {}", self.kind.name()),
            ));
        }
        let rows: Vec<Vec<u8>> = (0..self.data.rows())
            .map(|i| self.data.row(i).iter().map(|&v| v as u8).collect())
            .collect();
        Ok(BinaryMatrix::from_rows(&rows))
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{MATRIX_MAGIC}").unwrap();
        writeln!(s, "kind {}", self.kind.name()).unwrap();
        writeln!(s, "rows {}", self.data.rows()).unwrap();
        writeln!(s, "cols {}", self.data.cols()).unwrap();
        if let Some(l) = self.lifting {
            writeln!(s, "lifting {l}").unwrap();
        }
        if let Some(m) = self.field {
            writeln!(s, "field {m}").unwrap();
        }
        s.push_str("data\n");
        for i in 0..self.data.rows() {
            let row: Vec<String> = self.data.row(i).iter().map(|v| v.to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, l)) if l == MATRIX_MAGIC => {}
            Some((n, l)) => return Err(parse_err(n, format!("expected '{MATRIX_MAGIC}', found '{l}'"))),
            None => return Err(parse_err(0, "empty file".into())),
        }
        let (mut kind, mut rows, mut cols, mut lifting, mut field) = (None, None, None, None, None);
        let mut header_end = 0;
        for (n, l) in lines.by_ref() {
            if l == "data" {
                header_end = n;
                break;
            }
            let (key, val) = l
                .split_once(char::is_whitespace)
                .ok_or_else(|| parse_err(n, format!("malformed header line '{l}'")))?;
            let val = val.trim();
            let num = || {
                val.parse::<usize>()
                    .map_err(|_| parse_err(n, format!("'{val}' is not a nonnegative integer")))
            };
            match key {
                "kind" => {
                    kind = Some(MatrixKind::parse(val).ok_or_else(|| parse_err(n, format!("unknown kind '{val}'")))?)
                }
                "rows" => rows = Some(num()?),
                "cols" => cols = Some(num()?),
                "lifting" => lifting = Some(num()?),
                "field" => field = Some(num()? as u32),
                _ => return Err(parse_err(n, format!("unknown header key '{key}'"))),
            }
        }
        let kind = kind.ok_or_else(|| parse_err(header_end, "missing 'kind'".into()))?;
        let rows = rows.ok_or_else(|| parse_err(header_end, "missing 'rows'".into()))?;
        let cols = cols.ok_or_else(|| parse_err(header_end, "missing 'cols'".into()))?;
        if header_end == 0 {
            return Err(parse_err(0, "missing 'data' line".into()));
        }
        if lifting == Some(0) {
            return Err(parse_err(header_end, "lifting must be positive".into()));
        }
        if let Some(m) = field {
            if !(1..=crate::gf::MAX_DEGREE).contains(&m) {
                return Err(Error::FieldDegree(m));
            }
        }
        let mut data = IntMatrix::filled(rows, cols, IntMatrix::ABSENT);
        let mut r = 0;
        for (n, l) in lines {
            if r == rows {
                return Err(parse_err(n, format!("more than {rows} data rows")));
            }
            let vals: Vec<i32> = l
                .split_whitespace()
                .map(|t| {
                    t.parse::<i32>()
                        .map_err(|_| parse_err(n, format!("'{t}' is not an integer")))
                })
                .collect::<Result<_>>()?;
            if vals.len() != cols {
                return Err(parse_err(n, format!("expected {cols} entries, found {}", vals.len())));
            }
            for (c, &v) in vals.iter().enumerate() {
                let ok = match kind {
                    MatrixKind::Base => v == 0 || v == 1,
                    MatrixKind::Degree => v == -1 || (v >= 0 && lifting.is_none_or(|l| (v as usize) < l)),
                    MatrixKind::Coeff => v == -1 || (v >= 0 && field.is_none_or(|m| v < (1 << m) - 1)),
                };
                if !ok {
                    return Err(parse_err(
                        n,
                        format!("entry {v} out of range for a {} file", kind.name()),
                    ));
                }
                data.set(r, c, v);
            }
            r += 1;
        }
        if r != rows {
            return Err(parse_err(0, format!("expected {rows} data rows, found {r}")));
        }
        Ok(MatrixFile {
            kind,
            lifting,
            field,
            data,
        })
    }
}

fn parse_err(line: usize, msg: String) -> Error {
    Error::Parse { line, msg }
}

pub const SPECTRUM_HEADER: &str = "w,log_avg_multiplicity";
pub const FER_HEADER: &str = "snr_db,frames,frame_errors,fer,avg_iters";
pub const BOUND_HEADER: &str = "snr_db,log10_fer_lower,log10_fer_upper";

/// One row per weight, natural-log multiplicities (`-inf` for zero).
pub fn spectrum_csv(s: &WeightSpectrum) -> String {
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for (w, v) in s.log_coeffs().iter().enumerate() {
        writeln!(out, "{w},{v}").unwrap();
    }
    out
}

pub fn parse_spectrum_csv(text: &str) -> Result<WeightSpectrum> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == SPECTRUM_HEADER => {}
        _ => return Err(parse_err(1, format!("expected header '{SPECTRUM_HEADER}'"))),
    }
    let mut coeffs = Vec::new();
    for (i, l) in lines {
        let (w, v) = l
            .trim()
            .split_once(',')
            .ok_or_else(|| parse_err(i + 1, "expected two fields".into()))?;
        let w: usize = w.parse().map_err(|_| parse_err(i + 1, format!("bad weight '{w}'")))?;
        if w != coeffs.len() {
            return Err(parse_err(i + 1, format!("weights must run 0,1,2,...; found {w}")));
        }
        let v: f64 = v.parse().map_err(|_| parse_err(i + 1, format!("bad value '{v}'")))?;
        coeffs.push(v);
    }
    WeightSpectrum::from_log(coeffs)
}

pub fn fer_csv(r: &FerReport) -> String {
    let mut out = format!("{FER_HEADER}\n");
    for rec in &r.records {
        writeln!(
            out,
            "{},{},{},{},{}",
            rec.snr_db, rec.frames, rec.frame_errors, rec.fer, rec.avg_iters
        )
        .unwrap();
    }
    out
}

pub fn bound_csv(points: &[BoundPoint]) -> String {
    let mut out = format!("{BOUND_HEADER}\n");
    for p in points {
        writeln!(out, "{},{},{}", p.snr_db, p.log10_lower, p.log10_upper).unwrap();
    }
    out
}
