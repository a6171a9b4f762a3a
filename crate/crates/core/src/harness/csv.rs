//! CSV rows with a fixed header. Floats are written as `{:.16e}` (17 significant
//! digits) so a write/read cycle is lossless.

use std::io::{Read, Write};

use super::sweep::SweepPoint;
use crate::error::{Error, Result};
use crate::upscaling::{Model, UpscalingReport};

/// Maximum number of value / reference components (`d×3` with `d ≤ 2`).
pub const COMPONENTS: usize = 6;

pub fn header() -> String {
    let mut h = vec![
        "model", "epsilon", "mu", "eta", "alpha", "px", "qx", "pt", "qt", "N", "dt", "error",
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>();
    h.extend((0..COMPONENTS).map(|i| format!("F_{i}")));
    h.extend((0..COMPONENTS).map(|i| format!("ref_{i}")));
    h.push("status".into());
    h.join(",")
}

/// One CSV row. Failed points carry NaN for `dt` and `error` and no components.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub model: Model,
    pub epsilon: f64,
    pub mu: f64,
    pub eta: f64,
    pub alpha: f64,
    pub px: usize,
    pub qx: usize,
    pub pt: usize,
    pub qt: usize,
    pub n: usize,
    pub dt: f64,
    pub error: f64,
    pub value: Vec<f64>,
    pub reference: Vec<f64>,
    /// `ok`, `unseparated`, or `failed:<reason>`.
    pub status: String,
}

impl Record {
    pub fn from_report(r: &UpscalingReport) -> Self {
        let p = &r.params;
        Self {
            model: r.model,
            epsilon: p.eps,
            mu: p.mu,
            eta: p.eta,
            alpha: p.alpha,
            px: p.px,
            qx: p.qx,
            pt: p.pt,
            qt: p.qt,
            n: p.n,
            dt: p.dt,
            error: r.error,
            value: r.value.clone(),
            reference: r.reference.clone(),
            status: if r.separated {
                "ok".into()
            } else {
                "unseparated".into()
            },
        }
    }

    pub fn failed(model: Model, p: &SweepPoint, n: usize, e: &Error) -> Self {
        Self {
            model,
            epsilon: p.eps,
            mu: p.mu,
            eta: p.eta,
            alpha: p.alpha,
            px: p.kernel[0],
            qx: p.kernel[1],
            pt: p.kernel[2],
            qt: p.kernel[3],
            n,
            dt: f64::NAN,
            error: f64::NAN,
            value: vec![],
            reference: vec![],
            status: format!("failed:{e}"),
        }
    }

    pub fn kernel(&self) -> [usize; 4] {
        [self.px, self.qx, self.pt, self.qt]
    }

    pub fn is_ok(&self) -> bool {
        !self.status.starts_with("failed")
    }

    fn fields(&self) -> Vec<String> {
        let f = |x: f64| format!("{x:.16e}");
        let mut cols = vec![
            self.model.to_string(),
            f(self.epsilon),
            f(self.mu),
            f(self.eta),
            f(self.alpha),
            self.px.to_string(),
            self.qx.to_string(),
            self.pt.to_string(),
            self.qt.to_string(),
            self.n.to_string(),
            f(self.dt),
            f(self.error),
        ];
        for v in [&self.value, &self.reference] {
            for i in 0..COMPONENTS {
                cols.push(v.get(i).map(|x| f(*x)).unwrap_or_default());
            }
        }
        cols.push(self.status.clone());
        cols
    }

    fn from_fields(cols: &::csv::StringRecord, line: u64) -> Result<Self> {
        let expected = 13 + 2 * COMPONENTS;
        let bad = |what: &str| Error::Parse(format!("line {line}: {what}"));
        if cols.len() != expected {
            return Err(bad(&format!(
                "expected {expected} columns, found {}",
                cols.len()
            )));
        }
        let num = |i: usize| {
            cols[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| bad(&format!("bad number '{}'", &cols[i])))
        };
        let int = |i: usize| {
            cols[i]
                .trim()
                .parse::<usize>()
                .map_err(|_| bad(&format!("bad integer '{}'", &cols[i])))
        };
        let comps = |start: usize| -> Result<Vec<f64>> {
            let mut out = vec![];
            for i in start..start + COMPONENTS {
                if !cols[i].trim().is_empty() {
                    out.push(num(i)?);
                }
            }
            Ok(out)
        };
        Ok(Self {
            model: cols[0]
                .parse()
                .map_err(|_| bad(&format!("bad model '{}'", &cols[0])))?,
            epsilon: num(1)?,
            mu: num(2)?,
            eta: num(3)?,
            alpha: num(4)?,
            px: int(5)?,
            qx: int(6)?,
            pt: int(7)?,
            qt: int(8)?,
            n: int(9)?,
            dt: num(10)?,
            error: num(11)?,
            value: comps(12)?,
            reference: comps(12 + COMPONENTS)?,
            status: cols[12 + 2 * COMPONENTS].to_string(),
        })
    }
}

fn csv_error(e: ::csv::Error) -> Error {
    if e.is_io_error() {
        Error::Io(e.to_string())
    } else {
        Error::Parse(e.to_string())
    }
}

pub fn emit<W: Write>(w: W, rows: &[Record]) -> Result<()> {
    let mut out = ::csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(w);
    out.write_record(header().split(',')).map_err(csv_error)?;
    for r in rows {
        out.write_record(r.fields()).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn load<R: Read>(r: R) -> Result<Vec<Record>> {
    let mut input = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(r);
    let head = input.headers().map_err(csv_error)?;
    if head.iter().collect::<Vec<_>>().join(",") != header() {
        return Err(Error::Parse("unexpected CSV header".into()));
    }
    let mut out = vec![];
    for rec in input.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push(Record::from_fields(&rec, line)?);
    }
    Ok(out)
}

pub fn emit_to_path(path: &std::path::Path, rows: &[Record]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    emit(std::io::BufWriter::new(file), rows)
}

pub fn load_from_path(path: &std::path::Path) -> Result<Vec<Record>> {
    load(std::io::BufReader::new(std::fs::File::open(path)?))
}
