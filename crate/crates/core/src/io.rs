//! Line-oriented text formats: quadruple grids, sampled patches, and
//! Wavefront meshes.
//!
//! Numbers are written in their shortest round-trip form, so a write/read
//! cycle is lossless.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix2, Vector2};

use crate::ambient::{AmbientPoint, ModelSpace};
use crate::error::{Error, Result};
use crate::immersion::{Grid, QuadrupleField, QuadruplePoint, Rect, SurfacePatch};

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{x:?}");
    match s.strip_suffix(".0") {
        Some(t) => t.to_string(),
        None => s,
    }
}

fn header(tag: &str, m: &ModelSpace, grid: &Grid) -> String {
    let r = grid.rect;
    format!(
        "#{tag} kappa={} tau={} nu={} nv={} u0={} u1={} v0={} v1={}\n",
        fmt_num(m.kappa()),
        fmt_num(m.tau()),
        grid.nu,
        grid.nv,
        fmt_num(r.u0),
        fmt_num(r.u1),
        fmt_num(r.v0),
        fmt_num(r.v1)
    )
}

fn quadruple_row(out: &mut String, grid: &Grid, k: usize, p: &QuadruplePoint) {
    let (i, j) = grid.coords(k);
    let vals = [
        grid.u(i),
        grid.v(j),
        p.g[(0, 0)],
        p.g[(0, 1)],
        p.g[(1, 1)],
        p.s[(0, 0)],
        p.s[(0, 1)],
        p.s[(1, 1)],
        p.t[0],
        p.t[1],
        p.nu,
    ];
    let line: Vec<String> = vals.iter().map(|&x| fmt_num(x)).collect();
    out.push_str(&line.join(" "));
}

pub fn quadruple_to_string(q: &QuadrupleField) -> String {
    let mut out = header("quadruple", &q.model, &q.grid);
    for (k, p) in q.points.iter().enumerate() {
        quadruple_row(&mut out, &q.grid, k, p);
        out.push('\n');
    }
    out
}

/// Sampled-patch format: quadruple rows followed by the chart coordinates.
pub fn patch_to_string(q: &QuadrupleField, points: &[AmbientPoint]) -> String {
    let mut out = header("patch", &q.model, &q.grid);
    for (k, p) in q.points.iter().enumerate() {
        quadruple_row(&mut out, &q.grid, k, p);
        let x = &points[k];
        let _ = writeln!(out, " {} {} {}", fmt_num(x.x), fmt_num(x.y), fmt_num(x.z));
    }
    out
}

struct Parsed {
    model: ModelSpace,
    grid: Grid,
    rows: Vec<Vec<f64>>,
}

fn parse(text: &str, tag: &str, columns: usize) -> Result<Parsed> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let mut words = head.split_whitespace();
    if words.next() != Some(&format!("#{tag}")[..]) {
        return Err(Error::Parse { line: 1, msg: format!("expected '#{tag}' header") });
    }
    let mut kv = HashMap::new();
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or(Error::Parse { line: 1, msg: format!("malformed header field '{w}'") })?;
        kv.insert(k, v);
    }
    let get = |k: &str| -> Result<&str> {
        kv.get(k).copied().ok_or(Error::Parse { line: 1, msg: format!("missing header field '{k}'") })
    };
    let real = |k: &str| -> Result<f64> {
        get(k)?.parse().map_err(|_| Error::Parse { line: 1, msg: format!("bad number for '{k}'") })
    };
    let int = |k: &str| -> Result<usize> {
        get(k)?.parse().map_err(|_| Error::Parse { line: 1, msg: format!("bad integer for '{k}'") })
    };
    let model = ModelSpace::new(real("kappa")?, real("tau")?)?;
    let rect = Rect::new(real("u0")?, real("u1")?, real("v0")?, real("v1")?);
    let grid = Grid::new(int("nu")?, int("nv")?, rect)?;
    let mut rows = Vec::with_capacity(grid.len());
    for (ln, line) in lines {
        let vals: std::result::Result<Vec<f64>, _> =
            line.split_whitespace().map(str::parse::<f64>).collect();
        let vals = vals.map_err(|e| Error::Parse { line: ln + 1, msg: e.to_string() })?;
        if vals.len() != columns {
            return Err(Error::Parse {
                line: ln + 1,
                msg: format!("expected {columns} columns, got {}", vals.len()),
            });
        }
        rows.push(vals);
    }
    if rows.len() != grid.len() {
        return Err(Error::Parse {
            line: rows.len() + 1,
            msg: format!("expected {} rows, got {}", grid.len(), rows.len()),
        });
    }
    let tol = 1e-9 * (1.0 + rect.u1.abs().max(rect.u0.abs()).max(rect.v0.abs()).max(rect.v1.abs()));
    for (k, r) in rows.iter().enumerate() {
        let (i, j) = grid.coords(k);
        if (r[0] - grid.u(i)).abs() > tol || (r[1] - grid.v(j)).abs() > tol {
            return Err(Error::Parse { line: k + 2, msg: "row out of grid order".into() });
        }
    }
    Ok(Parsed { model, grid, rows })
}

fn record(r: &[f64]) -> QuadruplePoint {
    QuadruplePoint {
        g: Matrix2::new(r[2], r[3], r[3], r[4]),
        s: Matrix2::new(r[5], r[6], r[6], r[7]),
        t: Vector2::new(r[8], r[9]),
        nu: r[10],
    }
}

pub fn quadruple_from_str(text: &str) -> Result<QuadrupleField> {
    let p = parse(text, "quadruple", 11)?;
    QuadrupleField::new(p.model, p.grid, p.rows.iter().map(|r| record(r)).collect())
}

/// Reads a sampled-patch file into its quadruple and the patch itself.
pub fn patch_from_str(text: &str) -> Result<(QuadrupleField, SurfacePatch)> {
    let p = parse(text, "patch", 14)?;
    let q = QuadrupleField::new(p.model, p.grid, p.rows.iter().map(|r| record(r)).collect())?;
    let pts = p.rows.iter().map(|r| AmbientPoint::new(r[11], r[12], r[13])).collect();
    let patch = SurfacePatch::sampled(p.model, p.grid, pts)?;
    Ok((q, patch))
}

/// Wavefront mesh: `v` lines in grid order, then two triangles per cell
/// with 1-based indices.
pub fn obj_to_string(grid: &Grid, points: &[AmbientPoint]) -> String {
    let mut out = String::new();
    for p in points {
        let _ = writeln!(out, "v {} {} {}", fmt_num(p.x), fmt_num(p.y), fmt_num(p.z));
    }
    for j in 0..grid.nv - 1 {
        for i in 0..grid.nu - 1 {
            let a = 1 + grid.index(i, j);
            let b = a + 1;
            let c = a + grid.nu;
            let d = c + 1;
            let _ = writeln!(out, "f {a} {b} {c}");
            let _ = writeln!(out, "f {b} {d} {c}");
        }
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
