//! Grid-refinement study harness for the smooth vortex, the one problem
//! with an exact solution. Produces the error/order tables used both by the
//! `convergence` subcommand and the acceptance suite.

use ppct_core::diagnostics::convergence_order;
use ppct_core::problems::{self, VortexErrors};
use ppct_core::splitting::{run, RunConfig};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub n: usize,
    pub errors: VortexErrors,
    pub mean_ct_iterations: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct StudySetup {
    pub mu: f64,
    pub q: f64,
    /// Defaults to `2/q` when `None`.
    pub cfl: Option<f64>,
    pub t_end: f64,
}

impl StudySetup {
    pub fn new(mu: f64, q: f64) -> Self {
        StudySetup {
            mu,
            q,
            cfl: None,
            t_end: 0.05,
        }
    }
}

/// Runs the vortex on each grid and measures the errors against the
/// advected profile at the final time.
pub fn vortex_convergence(
    setup: &StudySetup,
    grids: &[usize],
) -> Result<Vec<ConvergenceRow>, String> {
    let problem = problems::vortex(setup.mu);
    let mut rows = Vec::new();
    for &n in grids {
        let mut config = RunConfig::new(problem.gas, setup.q);
        if let Some(cfl) = setup.cfl {
            config.cfl = cfl;
        }
        config.t_end = setup.t_end;
        let out = run(&problem, &config, [n, n, 1]).map_err(|e| e.to_string())?;
        let (t, field) = out
            .snapshots
            .last()
            .ok_or("run produced no final snapshot")?;
        let errors = problems::exact_vortex_error(field, *t, setup.mu);
        let iters: usize = out.records.iter().map(|r| r.ct_iterations).sum();
        let mean = iters as f64 / out.records.len().max(1) as f64;
        rows.push(ConvergenceRow {
            n,
            errors,
            mean_ct_iterations: mean,
        });
    }
    Ok(rows)
}

/// Orders between successive rows for one norm sequence.
pub fn orders(errs: &[f64]) -> Vec<f64> {
    convergence_order(errs)
}

/// Error/order table in the usual benchmark layout, one block per field.
pub fn render_table(setup: &StudySetup, rows: &[ConvergenceRow]) -> String {
    let mut out = String::new();
    let cfl = setup.cfl.unwrap_or(2.0 / setup.q);
    let _ = writeln!(
        out,
        "# vortex mu = {} q = {} cfl = {:.4} t = {}: errors vs advected profile",
        setup.mu, setup.q, cfl, setup.t_end
    );
    let _ = writeln!(
        out,
        "# {:>5} {:>10} {:>6} {:>10} {:>6} {:>10} {:>6} {:>6}",
        "N", "l1", "order", "l2", "order", "linf", "order", "ite"
    );
    for (label, pick) in [("B", 0usize), ("v", 1usize)] {
        let _ = writeln!(out, "# field {label}");
        let series = |i: usize, which: usize| {
            let e = &rows[i].errors;
            let n = if pick == 0 { &e.b } else { &e.v };
            match which {
                0 => n.l1,
                1 => n.l2,
                _ => n.linf,
            }
        };
        for i in 0..rows.len() {
            let ord = |which: usize| -> String {
                if i == 0 {
                    "-".to_string()
                } else {
                    format!("{:6.2}", (series(i - 1, which) / series(i, which)).log2())
                }
            };
            let _ = writeln!(
                out,
                "{:>7} {:10.2e} {:>6} {:10.2e} {:>6} {:10.2e} {:>6} {:6.1}",
                rows[i].n,
                series(i, 0),
                ord(0),
                series(i, 1),
                ord(1),
                series(i, 2),
                ord(2),
                rows[i].mean_ct_iterations
            );
        }
    }
    out
}

/// Convenience accessors for acceptance checks.
pub fn norm_series(rows: &[ConvergenceRow], field: char, norm: &str) -> Vec<f64> {
    rows.iter()
        .map(|r| {
            let n = if field == 'b' {
                &r.errors.b
            } else {
                &r.errors.v
            };
            match norm {
                "l1" => n.l1,
                "l2" => n.l2,
                "linf" => n.linf,
                other => panic!("unknown norm {other}"),
            }
        })
        .collect()
}
