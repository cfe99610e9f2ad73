//! Plain-ASCII output formats. Text keeps the artifact toolchain-free, and
//! 17 significant digits make every f64 round-trip exactly, so snapshots
//! double as regression fixtures.

use ppct_core::ct_fd::{discrete_divergence, magnetic_field};
use ppct_core::grid::FieldGrid;
use ppct_core::splitting::StepRecord;
use ppct_core::state::{cons_to_prim, GasModel};
use ppct_core::vec3::Vec3;
use std::fmt::Write as _;
use std::path::Path;

/// One snapshot as text: a '#' header naming the columns and the time, then
/// one row per interior cell, x fastest. Columns:
/// `x y [z] rho vx vy vz Bx By Bz p E divB`. Ghosts must be filled (the
/// divergence column reads neighbors).
pub fn render_snapshot(field: &FieldGrid, t: f64, gas: GasModel) -> String {
    let geom = field.geom;
    let div = discrete_divergence(&magnetic_field(field));
    let mut out = String::new();
    let coord_names = if geom.dim == 3 { "x y z" } else { "x y" };
    let _ = writeln!(
        out,
        "# t = {t:.16e} columns: {coord_names} rho vx vy vz Bx By Bz p E divB"
    );
    for p in geom.interior() {
        let c = geom.center(p);
        let cell = field.at(p);
        let w = cons_to_prim(&cell.euler(), gas).expect("snapshot of inadmissible field");
        let _ = write!(out, "{:.16e} {:.16e}", c.x, c.y);
        if geom.dim == 3 {
            let _ = write!(out, " {:.16e}", c.z);
        }
        let _ = writeln!(
            out,
            " {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            cell.rho,
            w.v.x,
            w.v.y,
            w.v.z,
            cell.mag.x,
            cell.mag.y,
            cell.mag.z,
            w.p,
            cell.energy,
            div[geom.index(p)]
        );
    }
    out
}

pub fn write_snapshot(field: &FieldGrid, t: f64, gas: GasModel, path: &Path) -> Result<(), String> {
    std::fs::write(path, render_snapshot(field, t, gas))
        .map_err(|e| format!("cannot write snapshot {}: {e}", path.display()))
}

/// A parsed snapshot row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRow {
    pub pos: Vec3,
    pub rho: f64,
    pub v: Vec3,
    pub b: Vec3,
    pub p: f64,
    pub energy: f64,
    pub div_b: f64,
}

/// A parsed snapshot: the time from the header plus all rows in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub dim: usize,
    pub rows: Vec<SnapshotRow>,
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty snapshot")?;
    let t = header
        .split_whitespace()
        .skip_while(|w| *w != "=")
        .nth(1)
        .and_then(|w| w.parse::<f64>().ok())
        .ok_or_else(|| format!("malformed snapshot header: '{header}'"))?;
    let mut rows = Vec::new();
    let mut dim = 0usize;
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|w| {
                w.parse::<f64>()
                    .map_err(|_| format!("row {}: bad number '{w}'", i + 1))
            })
            .collect::<Result<_, _>>()?;
        let d = match vals.len() {
            12 => 2,
            13 => 3,
            n => return Err(format!("row {}: expected 12 or 13 columns, got {n}", i + 1)),
        };
        if dim == 0 {
            dim = d;
        } else if dim != d {
            return Err(format!("row {}: inconsistent column count", i + 1));
        }
        let z = if d == 3 { vals[2] } else { 0.0 };
        let o = d; // index of rho
        rows.push(SnapshotRow {
            pos: Vec3::new(vals[0], vals[1], z),
            rho: vals[o],
            v: Vec3::new(vals[o + 1], vals[o + 2], vals[o + 3]),
            b: Vec3::new(vals[o + 4], vals[o + 5], vals[o + 6]),
            p: vals[o + 7],
            energy: vals[o + 8],
            div_b: vals[o + 9],
        });
    }
    Ok(Snapshot { t, dim, rows })
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read snapshot {}: {e}", path.display()))?;
    parse_snapshot(&text)
}

/// Diagnostics time series: one row per accepted step.
pub fn render_diagnostics(records: &[StepRecord]) -> String {
    let mut out = String::from("# t dt ct_iters min_rho min_p max_divB mass total_energy\n");
    for r in records {
        let _ = writeln!(
            out,
            "{:.16e} {:.16e} {} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            r.t,
            r.dt,
            r.ct_iterations,
            r.min_rho,
            r.min_p,
            r.max_abs_div_b,
            r.total_mass,
            r.total_energy
        );
    }
    out
}

pub fn write_diagnostics(records: &[StepRecord], path: &Path) -> Result<(), String> {
    std::fs::write(path, render_diagnostics(records))
        .map_err(|e| format!("cannot write diagnostics {}: {e}", path.display()))
}
