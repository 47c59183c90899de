//! Output files: series, atom and quadrature CSVs, the run manifest, and
//! SVG line plots. Every file is written to a temporary sibling first and
//! renamed into place, so an interrupted run leaves no partial output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::averages::AverageSeries;
use crate::error::{Error, Result};
use crate::geometry::BoundaryPoint;
use crate::patterson::{Atom, AtomicBoundaryMeasure, QuadratureEstimate};

pub const SERIES_HEADER: [&str; 5] = ["abscissa", "value", "reference", "experiment_id", "seed"];
pub const ATOMS_HEADER: [&str; 2] = ["xi", "log_weight"];
pub const QUADRATURE_HEADER: [&str; 4] = ["psi_id", "estimate", "n_cells", "grid_h"];

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("output path {} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let map = |e: csv::Error| Error::Numeric(format!("csv encoding: {e}"));
    w.write_record(header).map_err(map)?;
    for row in rows {
        w.write_record(&row).map_err(map)?;
    }
    w.into_inner()
        .map_err(|e| Error::Numeric(format!("csv encoding: {e}")))
}

fn csv_rows(path: &Path, text: &str, header: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let got = r.headers().map_err(|e| parse_err(1, e.to_string()))?;
    if got.iter().collect::<Vec<_>>() != header {
        return Err(parse_err(
            1,
            format!("expected header `{}`", header.join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.push((line, rec));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, rec: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("bad `{name}` value `{}`", rec.get(i).unwrap_or("")),
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn series_csv(series: &[AverageSeries]) -> Result<Vec<u8>> {
    let rows = series.iter().flat_map(|s| {
        s.abscissae.iter().zip(&s.values).map(move |(x, v)| {
            vec![
                x.to_string(),
                v.to_string(),
                s.reference.to_string(),
                s.experiment_id.clone(),
                s.seed.map(|v| v.to_string()).unwrap_or_default(),
            ]
        })
    });
    csv_bytes(&SERIES_HEADER, rows)
}

/// Reads a series CSV back, grouping consecutive rows by experiment id.
pub fn read_series_csv(path: &Path) -> Result<Vec<AverageSeries>> {
    let text = read_text(path)?;
    let mut out: Vec<AverageSeries> = Vec::new();
    for (line, rec) in csv_rows(path, &text, &SERIES_HEADER)? {
        let x: f64 = field(path, line, &rec, 0, "abscissa")?;
        let v: f64 = field(path, line, &rec, 1, "value")?;
        let reference: f64 = field(path, line, &rec, 2, "reference")?;
        let id = rec.get(3).unwrap_or("").to_string();
        let seed = match rec.get(4).unwrap_or("") {
            "" => None,
            _ => Some(field::<u64>(path, line, &rec, 4, "seed")?),
        };
        match out.last_mut() {
            Some(s) if s.experiment_id == id => {
                s.abscissae.push(x);
                s.values.push(v);
            }
            _ => out.push(AverageSeries {
                abscissae: vec![x],
                values: vec![v],
                reference,
                experiment_id: id,
                seed,
            }),
        }
    }
    out.into_iter()
        .map(|s| AverageSeries::new(s.abscissae, s.values, s.reference, s.experiment_id, s.seed))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })
}

pub fn atoms_csv(measure: &AtomicBoundaryMeasure) -> Result<Vec<u8>> {
    let rows = measure
        .atoms()
        .iter()
        .map(|a| vec![a.point.to_string(), a.log_weight.to_string()]);
    csv_bytes(&ATOMS_HEADER, rows)
}

pub fn read_atoms_csv(path: &Path, exponent: f64) -> Result<AtomicBoundaryMeasure> {
    let text = read_text(path)?;
    let mut atoms = Vec::new();
    for (line, rec) in csv_rows(path, &text, &ATOMS_HEADER)? {
        let point = rec
            .get(0)
            .and_then(BoundaryPoint::parse)
            .ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("bad boundary point `{}`", rec.get(0).unwrap_or("")),
            })?;
        let log_weight = field(path, line, &rec, 1, "log_weight")?;
        atoms.push(Atom { point, log_weight });
    }
    AtomicBoundaryMeasure::from_atoms(atoms, exponent)
}

pub fn quadrature_csv(rows: &[(String, QuadratureEstimate)]) -> Result<Vec<u8>> {
    let rows = rows.iter().map(|(id, q)| {
        vec![
            id.clone(),
            q.estimate.to_string(),
            q.n_cells.to_string(),
            q.grid_h.to_string(),
        ]
    });
    csv_bytes(&QUADRATURE_HEADER, rows)
}

pub fn read_quadrature_csv(path: &Path) -> Result<Vec<(String, QuadratureEstimate)>> {
    let text = read_text(path)?;
    csv_rows(path, &text, &QUADRATURE_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok((
                rec.get(0).unwrap_or("").to_string(),
                QuadratureEstimate {
                    estimate: field(path, line, &rec, 1, "estimate")?,
                    n_cells: field(path, line, &rec, 2, "n_cells")?,
                    grid_h: field(path, line, &rec, 3, "grid_h")?,
                },
            ))
        })
        .collect()
}

/// Plain-text `key = value` lines under `[section]` headers, readable by
/// [`crate::kv::Document`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    pub sections: Vec<(String, Vec<(String, String)>)>,
}

impl Manifest {
    pub fn section(&mut self, name: &str) -> &mut Vec<(String, String)> {
        if let Some(i) = self.sections.iter().position(|(n, _)| n == name) {
            return &mut self.sections[i].1;
        }
        self.sections.push((name.to_string(), Vec::new()));
        &mut self.sections.last_mut().expect("just pushed").1
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl ToString) {
        let entries = self.section(section);
        let value = value.to_string();
        match entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|(n, _)| n == section)?
            .1
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, (name, entries)) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{name}]");
            for (k, v) in entries {
                let _ = writeln!(out, "{k} = {}", v.replace('#', "%23"));
            }
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        let doc = crate::kv::Document::read(path)?;
        Ok(Manifest {
            sections: doc
                .sections
                .into_iter()
                .map(|s| {
                    let entries = s
                        .entries
                        .into_iter()
                        .map(|e| (e.key, e.value.replace("%23", "#")))
                        .collect();
                    (s.name, entries)
                })
                .collect(),
        })
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line plot of several series against a log-scaled abscissa when all
/// abscissae are positive and span more than a decade, linear otherwise.
/// References are drawn dashed in the series color.
pub fn series_svg(title: &str, series: &[AverageSeries]) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let xs: Vec<f64> = series.iter().flat_map(|s| s.abscissae.iter().copied()).collect();
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.values.iter().copied().chain([s.reference]))
        .filter(|v| v.is_finite())
        .collect();
    let log_x = xs.iter().all(|x| *x > 0.0)
        && xs.iter().copied().fold(f64::INFINITY, f64::min) * 10.0
            < xs.iter().copied().fold(0.0, f64::max);
    let tx = |x: f64| if log_x { x.ln() } else { x };
    let (x0, x1) = bounds(xs.iter().map(|&x| tx(x)));
    let (y0, y1) = bounds(ys.iter().copied());
    let px = |x: f64| pad + (tx(x) - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{pad}" y="25" font-size="14">{}</text>"#,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<path d="M{pad} {pad} V{} H{}" stroke="black" fill="none"/>"#,
        h - pad,
        w - pad
    );
    for (v, anchor, x, y) in [
        (y0, "end", pad - 5.0, h - pad),
        (y1, "end", pad - 5.0, pad + 4.0),
    ] {
        let _ = writeln!(out, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.3}</text>"#);
    }
    let label = |v: f64| if log_x { format!("{:.3}", v.exp()) } else { format!("{v:.3}") };
    let _ = writeln!(out, r#"<text x="{pad}" y="{}">{}</text>"#, h - pad + 18.0, label(x0));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        w - pad,
        h - pad + 18.0,
        label(x1)
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .abscissae
            .iter()
            .zip(&s.values)
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        if s.reference.is_finite() {
            let y = py(s.reference);
            let _ = writeln!(
                out,
                r#"<line x1="{pad}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="{color}" stroke-dasharray="4 3"/>"#,
                w - pad
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            w - pad - 150.0,
            pad + 15.0 * i as f64,
            escape(&s.experiment_id)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
