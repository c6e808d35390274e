//! CSV, PGM and JSON products.

use crate::elastic::{FarFieldPattern, PatternSource};
use crate::error::{Error, Result};
use crate::factorization::IndicatorGrid;
use crate::forward::ScanGrid;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

pub const FARFIELD_HEADER: [&str; 7] = ["m", "dirx", "diry", "re_up", "im_up", "re_us", "im_us"];
pub const GRID_HEADER: [&str; 4] = ["x", "y", "value", "mask"];

/// 17 significant digits; parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse { line, message: e.to_string() }
}

fn parse_field(rec: &csv::StringRecord, i: usize, line: usize) -> Result<f64> {
    let s = rec.get(i).unwrap_or("");
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse { line, message: format!("column {} is not a number: `{s}`", i + 1) })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, message: format!("column {} is not finite", i + 1) });
    }
    Ok(v)
}

fn reader<'a>(text: &'a str, header: &[&str]) -> Result<csv::Reader<&'a [u8]>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let got = rdr.headers().map_err(csv_error)?;
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::Parse { line: 1, message: format!("header must be `{}`", header.join(",")) });
    }
    Ok(rdr)
}

fn lines_to_string(header: &[&str], rows: impl Iterator<Item = String>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

pub fn farfield_to_csv(ffp: &FarFieldPattern) -> String {
    lines_to_string(
        &FARFIELD_HEADER,
        (0..ffp.len()).map(|m| {
            let d = ffp.directions[m];
            [d[0], d[1], ffp.up[m].re, ffp.up[m].im, ffp.us[m].re, ffp.us[m].im]
                .iter()
                .fold(m.to_string(), |acc, v| acc + "," + &fmt_f64(*v))
        }),
    )
}

/// Parses a far-field CSV; rows must be numbered `0..M` with unit directions.
/// Weights are set to `2 pi / M`.
pub fn farfield_from_csv(text: &str) -> Result<FarFieldPattern> {
    let mut rdr = reader(text, &FARFIELD_HEADER)?;
    let (mut directions, mut up, mut us) = (Vec::new(), Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(k + 2);
        let idx: usize = rec[0].trim().parse().map_err(|_| Error::Parse { line, message: format!("bad index `{}`", &rec[0]) })?;
        if idx != k {
            return Err(Error::Parse { line, message: format!("index {idx}, expected {k}") });
        }
        let v: Vec<f64> = (1..7).map(|i| parse_field(&rec, i, line)).collect::<Result<_>>()?;
        if ((v[0].hypot(v[1])) - 1.0).abs() > 1e-9 {
            return Err(Error::Parse { line, message: "direction is not a unit vector".into() });
        }
        directions.push([v[0], v[1]]);
        up.push(Complex64::new(v[2], v[3]));
        us.push(Complex64::new(v[4], v[5]));
    }
    if directions.is_empty() {
        return Err(Error::Parse { line: 1, message: "no rows".into() });
    }
    let m = directions.len();
    Ok(FarFieldPattern { directions, weights: vec![2.0 * PI / m as f64; m], up, us, source: PatternSource::Other })
}

pub fn write_farfield(ffp: &FarFieldPattern, path: &Path) -> Result<()> {
    fs::write(path, farfield_to_csv(ffp))?;
    Ok(())
}

pub fn read_farfield(path: &Path) -> Result<FarFieldPattern> {
    farfield_from_csv(&fs::read_to_string(path)?)
}

/// Min-max bounds and layout of a grid image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSidecar {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub nx: usize,
    pub ny: usize,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub masked: usize,
    /// PGM levels: masked 0, values mapped linearly onto 1..=65535.
    pub pgm_maxval: u16,
}

/// Paths written by [`write_grid`].
#[derive(Clone, Debug)]
pub struct GridFiles {
    pub csv: PathBuf,
    pub pgm: PathBuf,
    pub json: PathBuf,
}

fn with_suffix(base: &Path, ext: &str) -> PathBuf {
    let mut s = OsString::from(base.as_os_str());
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// CSV rows in storage order (`j` outer, `i` inner); masked and non-finite cells
/// are written with value 0 and mask 1.
pub fn grid_to_csv(g: &IndicatorGrid) -> String {
    lines_to_string(
        &GRID_HEADER,
        (0..g.len()).map(|k| {
            let p = g.point(k);
            let v = g.get(k % g.grid.nx, k / g.grid.nx);
            format!("{},{},{},{}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(v.unwrap_or(0.0)), u8::from(v.is_none()))
        }),
    )
}

/// Binary 16-bit PGM, top row first (largest `y`).
pub fn grid_to_pgm(g: &IndicatorGrid) -> Vec<u8> {
    let (nx, ny) = (g.grid.nx, g.grid.ny);
    let mut out = format!("P5\n{nx} {ny}\n65535\n").into_bytes();
    let range = g.range();
    for j in (0..ny).rev() {
        for i in 0..nx {
            let level: u16 = match (g.get(i, j), range) {
                (Some(v), Some((lo, hi))) if hi > lo => 1 + ((v - lo) / (hi - lo) * 65534.0).round() as u16,
                (Some(_), _) => 65535,
                (None, _) => 0,
            };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    out
}

pub fn grid_sidecar(g: &IndicatorGrid) -> GridSidecar {
    let range = g.range();
    GridSidecar {
        min: range.map(|r| r.0),
        max: range.map(|r| r.1),
        nx: g.grid.nx,
        ny: g.grid.ny,
        x_range: [g.grid.min[0], g.grid.max[0]],
        y_range: [g.grid.min[1], g.grid.max[1]],
        masked: (0..g.len()).filter(|&k| g.get(k % g.grid.nx, k / g.grid.nx).is_none()).count(),
        pgm_maxval: 65535,
    }
}

/// Writes `<base>.csv`, `<base>.pgm` and `<base>.json`.
pub fn write_grid(g: &IndicatorGrid, base: &Path) -> Result<GridFiles> {
    let files = GridFiles { csv: with_suffix(base, "csv"), pgm: with_suffix(base, "pgm"), json: with_suffix(base, "json") };
    fs::write(&files.csv, grid_to_csv(g))?;
    fs::write(&files.pgm, grid_to_pgm(g))?;
    fs::write(&files.json, serde_json::to_string_pretty(&grid_sidecar(g))? + "\n")?;
    Ok(files)
}

/// Reloads a grid CSV; the grid box and size are recovered from the coordinates.
pub fn grid_from_csv(text: &str) -> Result<IndicatorGrid> {
    let mut rdr = reader(text, &GRID_HEADER)?;
    let mut rows: Vec<(f64, f64, f64, bool, usize)> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(k + 2);
        let (x, y, v) = (parse_field(&rec, 0, line)?, parse_field(&rec, 1, line)?, parse_field(&rec, 2, line)?);
        let mask = match rec[3].trim() {
            "0" => false,
            "1" => true,
            other => return Err(Error::Parse { line, message: format!("mask must be 0 or 1, got `{other}`") }),
        };
        rows.push((x, y, v, mask, line));
    }
    let nx = rows.iter().take_while(|r| r.1 == rows[0].1).count();
    if nx < 2 || rows.len() % nx != 0 || rows.len() / nx < 2 {
        return Err(Error::Parse { line: 1, message: format!("{} rows do not form a grid with at least 2x2 cells", rows.len()) });
    }
    let ny = rows.len() / nx;
    let (first, last) = (rows[0], rows[rows.len() - 1]);
    let grid = ScanGrid::new([first.0, first.1], [last.0, last.1], nx, ny)
        .map_err(|e| Error::Parse { line: 2, message: e.to_string() })?;
    let scale = (last.0 - first.0).abs().max((last.1 - first.1).abs()).max(first.0.abs()).max(first.1.abs());
    let mut cells = Vec::with_capacity(rows.len());
    for (k, r) in rows.iter().enumerate() {
        let p = grid.point(k % nx, k / nx);
        if (p[0] - r.0).abs() > 1e-9 * scale || (p[1] - r.1).abs() > 1e-9 * scale {
            return Err(Error::Parse { line: r.4, message: "coordinates do not follow the grid".into() });
        }
        cells.push((!r.3).then_some(r.2));
    }
    Ok(IndicatorGrid::from_cells(grid, cells))
}

pub fn read_grid(path: &Path) -> Result<IndicatorGrid> {
    grid_from_csv(&fs::read_to_string(path)?)
}

/// Generic CSV with a header row and preformatted cells.
pub fn table_to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    lines_to_string(header, rows.iter().map(|r| r.join(",")))
}
