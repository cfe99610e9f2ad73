//! Strang-split time stepping: each step advances the Euler subsystem half a
//! step, the magnetic subsystem a full step, then the Euler subsystem the
//! remaining half (`S_A^{dt/2} . S_B^{dt} . S_A^{dt/2}`), so the costlier
//! magnetic substep runs once per step. The step size obeys
//! `dt (alpha_1/dx + alpha_2/dy [+ alpha_3/dz]) <= 2/q`, which gives each
//! Euler half-step exactly its positivity CFL budget `1/q`.
//!
//! `dt` is chosen once per step from the step-start field; if wave speeds
//! grow mid-step and a stage fails its own CFL check (or the magnetic solve
//! stalls), the whole step is rejected and retried at half the size rather
//! than silently inflating the viscosity.

use crate::ct_fd::{ct_solve, IterationReport};
use crate::diagnostics::{divergence_report, positivity_report, totals};
use crate::error::{MhdError, Result};
use crate::euler_fv::{compute_wave_speeds, euler_ssprk2_step};
use crate::grid::{apply_boundaries, BoundarySpec, FieldGrid};
use crate::problems::ProblemSpec;
use crate::state::GasModel;

/// Most halvings attempted before a rejected step aborts the run.
pub const MAX_HALVINGS: u32 = 5;

/// Physics and scheme parameters of a run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub gas: GasModel,
    /// Positivity limiter parameter, any value in (2, inf).
    pub q: f64,
    /// CFL constant in (0, 2/q].
    pub cfl: f64,
    /// Stopping tolerance of the magnetic fixed-point iteration.
    pub eps_tol: f64,
    pub max_ct_iter: usize,
    pub t_end: f64,
    /// Times at which to emit snapshots; the final time is always emitted.
    pub snapshot_times: Vec<f64>,
    /// Extra multiplier in (0, 1] on the selected step size.
    pub safety: f64,
}

impl RunConfig {
    pub fn new(gas: GasModel, q: f64) -> Self {
        RunConfig {
            gas,
            q,
            cfl: 2.0 / q,
            eps_tol: 1e-10,
            max_ct_iter: 100,
            t_end: 0.0,
            snapshot_times: Vec::new(),
            safety: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gas.gamma > 1.0) {
            return Err(MhdError::Config(format!(
                "adiabatic index must be > 1, got {}",
                self.gas.gamma
            )));
        }
        if !(self.q > 2.0) {
            return Err(MhdError::Config(format!("q must exceed 2, got {}", self.q)));
        }
        if !(self.cfl > 0.0) || self.cfl > 2.0 / self.q + 1e-15 {
            return Err(MhdError::Config(format!(
                "CFL constant must lie in (0, 2/q] = (0, {:.6}], got {}",
                2.0 / self.q,
                self.cfl
            )));
        }
        if !(self.eps_tol > 0.0) {
            return Err(MhdError::Config(format!(
                "eps_tol must be positive, got {}",
                self.eps_tol
            )));
        }
        if !(self.safety > 0.0) || self.safety > 1.0 {
            return Err(MhdError::Config(format!(
                "safety must lie in (0, 1], got {}",
                self.safety
            )));
        }
        if !(self.t_end >= 0.0) {
            return Err(MhdError::Config(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        Ok(())
    }
}

/// Per-step diagnostics, appended once per accepted step. `t` is the time
/// reached after the step.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub ct_iterations: usize,
    pub min_rho: f64,
    pub min_p: f64,
    pub max_abs_div_b: f64,
    pub total_mass: f64,
    pub total_energy: f64,
}

/// Smallest emission time strictly after `t` (snapshots first, then the
/// final time).
fn next_emit_time(config: &RunConfig, t: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &s in config
        .snapshot_times
        .iter()
        .chain(std::iter::once(&config.t_end))
    {
        if s > t && s <= config.t_end && best.is_none_or(|b| s < b) {
            best = Some(s);
        }
    }
    best
}

/// Step size `safety * cfl / sum(alpha_a / dx_a)` from the current field,
/// clipped so the step lands exactly on the next snapshot or final time.
pub fn select_dt(
    field: &FieldGrid,
    spec: &BoundarySpec,
    config: &RunConfig,
    t: f64,
) -> Result<f64> {
    let mut work = field.clone();
    apply_boundaries(&mut work, spec)?;
    let speeds = compute_wave_speeds(&work, config.gas)?;
    let csum = speeds.cfl_sum(&field.geom);
    if !(csum > 0.0) || !csum.is_finite() {
        return Err(MhdError::Config(format!(
            "cannot select a time step: wave-speed sum is {csum}"
        )));
    }
    let mut dt = config.safety * config.cfl / csum;
    if let Some(target) = next_emit_time(config, t) {
        let remaining = target - t;
        if dt >= remaining - 1e-12 * remaining.abs().max(dt) {
            dt = remaining;
        }
    }
    Ok(dt)
}

fn attempt_step(
    field: &FieldGrid,
    dt: f64,
    config: &RunConfig,
    spec: &BoundarySpec,
) -> Result<(FieldGrid, IterationReport)> {
    let half = 0.5 * dt;
    let first = euler_ssprk2_step(field, half, spec, config.q, config.gas)?;
    let (magnetic, report) = ct_solve(&first, dt, spec, config.eps_tol, config.max_ct_iter)?;
    let second = euler_ssprk2_step(&magnetic, half, spec, config.q, config.gas)?;
    Ok((second, report))
}

/// One full Strang step at the requested `dt`, retrying at half size (up to
/// [`MAX_HALVINGS`] times) when a substep rejects the step or the magnetic
/// solve fails to converge. Returns the advanced field, the diagnostics
/// record (with `record.t = t + accepted dt`), and the magnetic-solve
/// iteration report.
pub fn ppct_step(
    field: &FieldGrid,
    t: f64,
    dt: f64,
    config: &RunConfig,
    spec: &BoundarySpec,
) -> Result<(FieldGrid, StepRecord, IterationReport)> {
    let mut dt_try = dt;
    let mut attempt = 0u32;
    loop {
        match attempt_step(field, dt_try, config, spec) {
            Ok((out, report)) => {
                let record = make_record(&out, t + dt_try, dt_try, &report, config, spec)?;
                return Ok((out, record, report));
            }
            Err(e) if e.is_retryable() && attempt < MAX_HALVINGS => {
                attempt += 1;
                dt_try *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
}

fn make_record(
    field: &FieldGrid,
    t: f64,
    dt: f64,
    report: &IterationReport,
    config: &RunConfig,
    spec: &BoundarySpec,
) -> Result<StepRecord> {
    let mut filled = field.clone();
    apply_boundaries(&mut filled, spec)?;
    let pos = positivity_report(&filled, config.gas);
    let div = divergence_report(&filled);
    let tot = totals(&filled);
    Ok(StepRecord {
        t,
        dt,
        ct_iterations: report.iterations,
        min_rho: pos.min_rho,
        min_p: pos.min_p,
        max_abs_div_b: div.max_abs,
        total_mass: tot.mass,
        total_energy: tot.total_energy,
    })
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// `(time, field)` pairs at the requested snapshot times (ghosts filled).
    pub snapshots: Vec<(f64, FieldGrid)>,
    pub records: Vec<StepRecord>,
    /// Setup findings worth surfacing, e.g. an initial field whose discrete
    /// divergence is not zero (only a zero one is preserved).
    pub warnings: Vec<String>,
}

/// Advances `problem` from `t = 0` to `config.t_end` on an `n` interior
/// grid, emitting snapshots at the requested times. Deterministic: identical
/// inputs produce bitwise-identical outputs.
pub fn run(problem: &ProblemSpec, config: &RunConfig, n: [usize; 3]) -> Result<RunOutput> {
    config.validate()?;
    let spec = problem.boundaries(config.gas);
    let mut field = problem.initial_field(n, config.gas)?;

    let mut warnings = Vec::new();
    {
        let mut filled = field.clone();
        apply_boundaries(&mut filled, &spec)?;
        let div = divergence_report(&filled);
        let b_inf = filled
            .geom
            .interior()
            .map(|p| filled.at(p).mag.max_abs())
            .fold(0.0f64, f64::max);
        if b_inf > 0.0 {
            let scaled = div.max_abs * filled.geom.min_dx() / b_inf;
            if scaled > 1e-12 {
                warnings.push(format!(
                    "initial magnetic field is not discretely divergence-free \
                     (scaled max |div B| = {scaled:.3e}); only a zero divergence is preserved"
                ));
            }
        }
    }

    let mut snapshots = Vec::new();
    let mut records = Vec::new();
    let mut t = 0.0f64;

    let wants_zero = config.t_end == 0.0 || config.snapshot_times.contains(&0.0);
    if wants_zero {
        let mut filled = field.clone();
        apply_boundaries(&mut filled, &spec)?;
        snapshots.push((0.0, filled));
    }

    while let Some(target) = next_emit_time(config, t) {
        let dt = select_dt(&field, &spec, config, t)?;
        let (next, mut record, _report) = ppct_step(&field, t, dt, config, &spec)?;
        let mut t_new = t + record.dt;
        if t_new == t {
            return Err(MhdError::Invariant(format!(
                "time step underflow at t = {t}: dt = {} no longer advances time",
                record.dt
            )));
        }
        // the clipped step was constructed to land on the target; snap away
        // the last-ulp rounding so emission times are exact
        if record.dt == dt && (t_new - target).abs() <= 4.0 * f64::EPSILON * target.abs() {
            t_new = target;
        }
        record.t = t_new;
        t = t_new;
        field = next;
        records.push(record);
        if t == target {
            let mut filled = field.clone();
            apply_boundaries(&mut filled, &spec)?;
            snapshots.push((t, filled));
        }
    }

    Ok(RunOutput {
        snapshots,
        records,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{FieldGrid, GridGeometry};
    use crate::problems;
    use crate::state::{CellState, PrimitiveState};
    use crate::vec3::Vec3;

    const GAS: GasModel = GasModel { gamma: 5.0 / 3.0 };

    fn config(q: f64) -> RunConfig {
        RunConfig::new(GAS, q)
    }

    #[test]
    fn config_validation() {
        assert!(config(3.0).validate().is_ok());
        assert!(config(2.0).validate().is_err());
        let mut c = config(3.0);
        c.cfl = 0.9; // above 2/3
        assert!(c.validate().is_err());
        let mut c = config(3.0);
        c.safety = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn select_dt_arithmetic() {
        // sound speed 1 (p = rho / gamma), at rest: alpha = 1 per axis
        let geom = GridGeometry::new_2d([100, 100], [0.0, 0.0], [1.0, 1.0]).unwrap();
        let f = FieldGrid::uniform(
            geom,
            CellState::from_primitive(
                &PrimitiveState::new(1.0, Vec3::ZERO, 1.0 / GAS.gamma),
                Vec3::ZERO,
                GAS,
            ),
        );
        let mut c = config(3.0);
        c.t_end = 1.0;
        let dt = select_dt(&f, &BoundarySpec::all_periodic(), &c, 0.0).unwrap();
        assert!(
            (dt - (2.0 / 3.0) / 200.0).abs() < 1e-12,
            "dt = {dt}, expected 1/300"
        );

        // clipping to the final time
        c.t_end = 1e-6;
        let dt = select_dt(&f, &BoundarySpec::all_periodic(), &c, 0.0).unwrap();
        assert_eq!(dt, 1e-6);
    }

    #[test]
    fn select_dt_includes_all_axes_in_3d() {
        let geom = GridGeometry::new_3d([10, 10, 10], [0.0; 3], [1.0; 3]).unwrap();
        let f = FieldGrid::uniform(
            geom,
            CellState::from_primitive(
                &PrimitiveState::new(1.0, Vec3::ZERO, 1.0 / GAS.gamma),
                Vec3::ZERO,
                GAS,
            ),
        );
        let mut c = config(3.0);
        c.t_end = 1.0;
        let dt = select_dt(&f, &BoundarySpec::all_periodic(), &c, 0.0).unwrap();
        // three axes each contribute alpha/dx = 10
        assert!((dt - (2.0 / 3.0) / 30.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_state_is_a_fixed_point_of_the_full_step() {
        let geom = GridGeometry::new_2d([6, 6], [0.0, 0.0], [1.0, 1.0]).unwrap();
        let f = FieldGrid::uniform(
            geom,
            CellState::from_primitive(
                &PrimitiveState::new(1.0, Vec3::ZERO, 1.0),
                Vec3::new(0.5, -0.2, 0.1),
                GAS,
            ),
        );
        let mut c = config(3.0);
        c.t_end = 1.0;
        let spec = BoundarySpec::all_periodic();
        let dt = select_dt(&f, &spec, &c, 0.0).unwrap();
        let (out, record, report) = ppct_step(&f, 0.0, dt, &c, &spec).unwrap();
        assert_eq!(report.iterations, 1);
        for p in geom.interior() {
            assert_eq!(out.at(p), f.at(p));
        }
        assert_eq!(record.dt, dt);
        assert!(record.min_p > 0.0);
    }

    #[test]
    fn oversized_step_is_halved_until_accepted() {
        let geom = GridGeometry::new_2d([6, 6], [0.0, 0.0], [1.0, 1.0]).unwrap();
        let f = FieldGrid::uniform(
            geom,
            CellState::from_primitive(&PrimitiveState::new(1.0, Vec3::ZERO, 1.0), Vec3::ZERO, GAS),
        );
        let mut c = config(3.0);
        c.t_end = 1.0;
        let spec = BoundarySpec::all_periodic();
        let dt = select_dt(&f, &spec, &c, 0.0).unwrap();
        let (_, record, _) = ppct_step(&f, 0.0, 4.0 * dt, &c, &spec).unwrap();
        assert!((record.dt - dt).abs() < 1e-15, "accepted {}", record.dt);
    }

    #[test]
    fn orszag_tang_steps_conserve_and_stay_divergence_free() {
        let problem = problems::orszag_tang();
        let mut c = config(3.0);
        c.t_end = 0.3;
        let out = run(&problem, &c, [16, 16, 1]).unwrap();
        assert!(out.warnings.is_empty(), "{:?}", out.warnings);
        assert!(out.records.len() >= 2);
        let first = &out.records[0];
        let last = out.records.last().unwrap();
        assert!(((last.total_mass - first.total_mass) / first.total_mass).abs() < 1e-12);
        assert!(((last.total_energy - first.total_energy) / first.total_energy).abs() < 1e-10);
        for r in &out.records {
            assert!(r.min_rho > 0.0 && r.min_p > 0.0);
            // scaled divergence stays at rounding level
            assert!(r.max_abs_div_b * (2.0 * std::f64::consts::PI / 16.0) < 1e-11);
        }
    }

    #[test]
    fn zero_t_end_yields_initial_snapshot_only() {
        let problem = problems::orszag_tang();
        let c = config(3.0);
        let out = run(&problem, &c, [8, 8, 1]).unwrap();
        assert_eq!(out.records.len(), 0);
        assert_eq!(out.snapshots.len(), 1);
        assert_eq!(out.snapshots[0].0, 0.0);
    }

    #[test]
    fn runs_are_deterministic() {
        let problem = problems::orszag_tang();
        let mut c = config(3.0);
        c.t_end = 0.02;
        let a = run(&problem, &c, [8, 8, 1]).unwrap();
        let b = run(&problem, &c, [8, 8, 1]).unwrap();
        assert_eq!(a.snapshots.len(), b.snapshots.len());
        for ((ta, fa), (tb, fb)) in a.snapshots.iter().zip(&b.snapshots) {
            assert_eq!(ta, tb);
            assert_eq!(fa.cells(), fb.cells());
        }
    }

    #[test]
    fn magnetic_field_is_untouched_by_the_euler_substeps() {
        let problem = problems::orszag_tang();
        let f = problem.initial_field([8, 8, 1], GAS).unwrap();
        let spec = problem.boundaries(GAS);
        let out = euler_ssprk2_step(&f, 1e-3, &spec, 3.0, GAS).unwrap();
        for p in f.geom.interior() {
            assert_eq!(out.at(p).mag, f.at(p).mag);
            assert!(out.at(p).mag.x.to_bits() == f.at(p).mag.x.to_bits());
        }
    }
}
