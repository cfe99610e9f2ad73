//! Physical state representations, equation-of-state conversions, and the
//! admissibility algebra shared by every other module.
//!
//! The stored energy variable is the total *mechanical* energy
//! `E = rho*e + rho*|v|^2/2` (internal plus kinetic, excluding magnetic
//! energy); the total energy `E + |B|^2/2` is always derived, never stored.
//! Conversions never clip or floor: an inadmissible state is returned as-is
//! so callers can detect and report it.

use crate::error::{MhdError, Result};
use crate::vec3::Vec3;
use std::ops::{Add, AddAssign, Mul, Sub};

/// Ideal-gas equation of state with adiabatic index `gamma > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    pub gamma: f64,
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(MhdError::Config(format!(
                "adiabatic index must be > 1, got {gamma}"
            )));
        }
        Ok(GasModel { gamma })
    }
}

/// Conserved variables of the Euler subsystem: density, momentum, and
/// mechanical energy. The momentum stays a 3-vector in 2D runs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerState {
    pub rho: f64,
    pub mom: Vec3,
    pub energy: f64,
}

impl EulerState {
    pub const ZERO: EulerState = EulerState {
        rho: 0.0,
        mom: Vec3::ZERO,
        energy: 0.0,
    };

    pub fn new(rho: f64, mom: Vec3, energy: f64) -> Self {
        EulerState { rho, mom, energy }
    }

    /// Internal energy `E - |m|^2 / (2 rho)`. Negative when inadmissible.
    pub fn internal_energy(&self) -> f64 {
        self.energy - self.mom.norm_sq() / (2.0 * self.rho)
    }

    /// True iff `rho > 0` and the internal energy is strictly positive.
    pub fn is_admissible(&self) -> bool {
        self.rho > 0.0 && self.internal_energy() > 0.0
    }
}

impl Add for EulerState {
    type Output = EulerState;
    fn add(self, o: EulerState) -> EulerState {
        EulerState::new(self.rho + o.rho, self.mom + o.mom, self.energy + o.energy)
    }
}

impl Sub for EulerState {
    type Output = EulerState;
    fn sub(self, o: EulerState) -> EulerState {
        EulerState::new(self.rho - o.rho, self.mom - o.mom, self.energy - o.energy)
    }
}

impl Mul<f64> for EulerState {
    type Output = EulerState;
    fn mul(self, s: f64) -> EulerState {
        EulerState::new(self.rho * s, self.mom * s, self.energy * s)
    }
}

impl AddAssign for EulerState {
    fn add_assign(&mut self, o: EulerState) {
        *self = *self + o;
    }
}

/// Primitive variables (density, velocity, thermal pressure), used by the
/// reconstruction and the positivity limiter.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrimitiveState {
    pub rho: f64,
    pub v: Vec3,
    pub p: f64,
}

impl PrimitiveState {
    pub fn new(rho: f64, v: Vec3, p: f64) -> Self {
        PrimitiveState { rho, v, p }
    }
}

/// Full per-cell MHD state. `energy` is mechanical (internal + kinetic);
/// the magnetic contribution `|B|^2/2` is added only by [`CellState::total_energy`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellState {
    pub rho: f64,
    pub mom: Vec3,
    pub mag: Vec3,
    pub energy: f64,
}

impl CellState {
    pub fn new(rho: f64, mom: Vec3, mag: Vec3, energy: f64) -> Self {
        CellState {
            rho,
            mom,
            mag,
            energy,
        }
    }

    pub fn from_primitive(w: &PrimitiveState, mag: Vec3, gas: GasModel) -> Self {
        let q = prim_to_cons(w, gas);
        CellState::new(q.rho, q.mom, mag, q.energy)
    }

    /// Projection onto the Euler subsystem (drops the magnetic field).
    pub fn euler(&self) -> EulerState {
        EulerState::new(self.rho, self.mom, self.energy)
    }

    /// Replaces the hydrodynamic part, keeping `B` bitwise unchanged.
    pub fn with_euler(&self, q: EulerState) -> CellState {
        CellState::new(q.rho, q.mom, self.mag, q.energy)
    }

    pub fn velocity(&self) -> Vec3 {
        self.mom / self.rho
    }

    pub fn total_energy(&self) -> f64 {
        self.energy + 0.5 * self.mag.norm_sq()
    }

    pub fn is_admissible(&self) -> bool {
        self.euler().is_admissible()
    }
}

/// Free auxiliary velocity defining the linear admissibility constraint
/// `Q . n_* > 0` with `n_* = (|v_*|^2/2, -v_*, 1)`. Together with
/// `n_1 = (1,0,0,0,0)` these linear constraints over all `v_*` are exactly
/// equivalent to the nonlinear admissible set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GqlDirection {
    pub v_star: Vec3,
}

impl GqlDirection {
    pub fn new(v_star: Vec3) -> Self {
        GqlDirection { v_star }
    }
}

/// `Q . n_* = (|v_*|^2/2) rho - v_* . m + E`.
///
/// The minimum over all `v_star` equals the internal energy and is attained
/// at `v_star = m / rho`.
pub fn gql_dot(q: &EulerState, dir: GqlDirection) -> f64 {
    0.5 * dir.v_star.norm_sq() * q.rho - dir.v_star.dot(q.mom) + q.energy
}

/// Conserved -> primitive. No clipping: a negative pressure is returned
/// as-is so callers can detect inadmissibility.
pub fn cons_to_prim(q: &EulerState, gas: GasModel) -> Result<PrimitiveState> {
    if !(q.rho > 0.0) {
        return Err(MhdError::NonPhysical {
            location: "state".to_string(),
            reason: format!("density {} is not positive", q.rho),
        });
    }
    let v = q.mom / q.rho;
    let p = (gas.gamma - 1.0) * (q.energy - q.mom.norm_sq() / (2.0 * q.rho));
    Ok(PrimitiveState::new(q.rho, v, p))
}

/// Primitive -> conserved: `m = rho v`, `E = p/(gamma-1) + rho |v|^2 / 2`.
/// Accepts any reals; admissibility is the caller's concern.
pub fn prim_to_cons(w: &PrimitiveState, gas: GasModel) -> EulerState {
    EulerState::new(
        w.rho,
        w.v * w.rho,
        w.p / (gas.gamma - 1.0) + 0.5 * w.rho * w.v.norm_sq(),
    )
}

/// Sound speed `c = sqrt(gamma p / rho)`.
pub fn sound_speed(w: &PrimitiveState, gas: GasModel) -> Result<f64> {
    if !(w.rho > 0.0) || !(w.p > 0.0) {
        return Err(MhdError::NonPhysical {
            location: "state".to_string(),
            reason: format!(
                "sound speed needs rho > 0 and p > 0, got rho = {}, p = {}",
                w.rho, w.p
            ),
        });
    }
    Ok((gas.gamma * w.p / w.rho).sqrt())
}
