//! Strain-space feedback laws and Lyapunov instrumentation.
//!
//! Every law regulates `q̃ = q − q_ref(t)`. In position mode `q_ref = q_d`;
//! in velocity mode the reference is the ramp `q_ref(t) = q₀ + q̇_d·t` with
//! rate `q̇_d`, so the same PD structure tracks a strain-rate setpoint.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::dynamics::{Dynamics, TipLoad};
use crate::error::{check_len, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Gains {
    pub kp: DMatrix<f64>,
    pub kd: DMatrix<f64>,
    pub ki: DMatrix<f64>,
}

impl Gains {
    pub fn diagonal(kp: &DVector<f64>, kd: &DVector<f64>, ki: &DVector<f64>) -> Self {
        Gains {
            kp: DMatrix::from_diagonal(kp),
            kd: DMatrix::from_diagonal(kd),
            ki: DMatrix::from_diagonal(ki),
        }
    }

    /// Scalar gains on every coordinate of a `dof`-dimensional system.
    pub fn uniform(dof: usize, kp: f64, kd: f64, ki: f64) -> Self {
        Gains::diagonal(
            &DVector::from_element(dof, kp),
            &DVector::from_element(dof, kd),
            &DVector::from_element(dof, ki),
        )
    }

    /// The same 6-entry diagonal block on each of `sections` sections.
    pub fn per_block(sections: usize, kp: [f64; 6], kd: [f64; 6], ki: [f64; 6]) -> Self {
        let tile = |b: [f64; 6]| DVector::from_fn(6 * sections, |r, _| b[r % 6]);
        Gains::diagonal(&tile(kp), &tile(kd), &tile(ki))
    }

    pub fn dof(&self) -> usize {
        self.kp.nrows()
    }

    pub fn validate(&self, dof: usize) -> Result<()> {
        for (name, m) in [("K_p", &self.kp), ("K_D", &self.kd), ("K_I", &self.ki)] {
            if m.nrows() != dof || m.ncols() != dof {
                return Err(Error::DimensionMismatch {
                    expected: dof,
                    found: m.nrows(),
                });
            }
            if (m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
                return Err(Error::InvalidParameter(format!("{name} is not symmetric")));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} is not finite")));
            }
        }
        for (name, m) in [("K_p", &self.kp), ("K_D", &self.kd)] {
            if Cholesky::new(m.clone()).is_none() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive definite"
                )));
            }
        }
        let min = self.ki.clone().symmetric_eigenvalues().min();
        if min < -1e-12 * self.ki.amax().max(1.0) {
            return Err(Error::InvalidParameter(
                "K_I must be positive semidefinite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetpointMode {
    Position,
    Velocity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Setpoint {
    pub mode: SetpointMode,
    /// `q_d` in position mode, `q̇_d` in velocity mode.
    pub target: DVector<f64>,
    /// Start of the ramp reference in velocity mode; equal to `target` in
    /// position mode.
    pub origin: DVector<f64>,
}

/// Instantaneous reference `(q_ref, q̇_ref)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackingReference {
    pub position: DVector<f64>,
    pub rate: DVector<f64>,
}

impl Setpoint {
    pub fn position(q_d: DVector<f64>) -> Self {
        Setpoint {
            mode: SetpointMode::Position,
            origin: q_d.clone(),
            target: q_d,
        }
    }

    pub fn velocity(q0: DVector<f64>, qdot_d: DVector<f64>) -> Self {
        Setpoint {
            mode: SetpointMode::Velocity,
            target: qdot_d,
            origin: q0,
        }
    }

    pub fn dof(&self) -> usize {
        self.target.len()
    }

    /// `q_d`; only defined in position mode.
    pub fn position_target(&self) -> Result<&DVector<f64>> {
        match self.mode {
            SetpointMode::Position => Ok(&self.target),
            SetpointMode::Velocity => Err(Error::ModeMismatch(
                "a strain-rate setpoint has no fixed position target".into(),
            )),
        }
    }

    pub fn reference(&self, t: f64) -> TrackingReference {
        match self.mode {
            SetpointMode::Position => TrackingReference {
                position: self.target.clone(),
                rate: DVector::zeros(self.target.len()),
            },
            SetpointMode::Velocity => TrackingReference {
                position: &self.origin + &self.target * t,
                rate: self.target.clone(),
            },
        }
    }

    pub fn validate(&self, dof: usize) -> Result<()> {
        check_len(dof, self.target.len())?;
        check_len(dof, self.origin.len())?;
        if self.target.iter().chain(self.origin.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("setpoint is not finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControllerKind {
    /// Open loop, `u = 0`.
    None,
    /// PD with tip-load cancellation.
    PdCable,
    /// PD without any feedforward.
    PdFluid,
    /// PD with tip-load and gravity/buoyancy cancellation.
    PdGravComp,
    /// PID with tip-load and gravity/buoyancy cancellation.
    PidGravComp,
}

impl ControllerKind {
    pub fn cancels_tip_load(self) -> bool {
        matches!(
            self,
            ControllerKind::PdCable | ControllerKind::PdGravComp | ControllerKind::PidGravComp
        )
    }

    pub fn cancels_gravity(self) -> bool {
        matches!(self, ControllerKind::PdGravComp | ControllerKind::PidGravComp)
    }

    pub fn integrates(self) -> bool {
        self == ControllerKind::PidGravComp
    }
}

fn pd(gains: &Gains, q: &DVector<f64>, qdot: &DVector<f64>, r: &TrackingReference) -> DVector<f64> {
    -(&gains.kp * (q - &r.position)) - &gains.kd * (qdot - &r.rate)
}

/// `u = −K_p q̃ − K_D q̇̃ − F(q)`.
pub fn control_pd_cable(
    gains: &Gains,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    reference: &TrackingReference,
    tip_force: &DVector<f64>,
) -> DVector<f64> {
    pd(gains, q, qdot, reference) - tip_force
}

/// `u = −K_p q̃ − K_D q̇̃`.
pub fn control_pd_fluid(
    gains: &Gains,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    reference: &TrackingReference,
) -> DVector<f64> {
    pd(gains, q, qdot, reference)
}

/// `u = −K_p q̃ − K_D q̇̃ − F(q) − N(q)·Ad⁻¹_{g_r}𝒢`.
pub fn control_pd_grav(
    gains: &Gains,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    reference: &TrackingReference,
    tip_force: &DVector<f64>,
    gravity: &DVector<f64>,
) -> DVector<f64> {
    pd(gains, q, qdot, reference) - tip_force - gravity
}

/// `u = −K_p q̃ − K_I ∫q̃ − K_D q̇̃ − F(q) − N(q)·Ad⁻¹_{g_r}𝒢`.
pub fn control_pid_grav(
    gains: &Gains,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    reference: &TrackingReference,
    tip_force: &DVector<f64>,
    gravity: &DVector<f64>,
    error_integral: &DVector<f64>,
) -> DVector<f64> {
    control_pd_grav(gains, q, qdot, reference, tip_force, gravity) - &gains.ki * error_integral
}

/// A feedback law with its gains and setpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct Controller {
    pub kind: ControllerKind,
    pub gains: Gains,
    pub setpoint: Setpoint,
    /// Elementwise bound on the error integral; `None` disables clamping.
    pub integral_limit: Option<f64>,
}

impl Controller {
    pub fn new(kind: ControllerKind, gains: Gains, setpoint: Setpoint) -> Self {
        Controller {
            kind,
            gains,
            setpoint,
            integral_limit: None,
        }
    }

    pub fn validate(&self, dof: usize) -> Result<()> {
        self.setpoint.validate(dof)?;
        if self.kind != ControllerKind::None {
            self.gains.validate(dof)?;
        }
        if let Some(l) = self.integral_limit {
            if !(l > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "integral limit must be positive, got {l}"
                )));
            }
        }
        Ok(())
    }

    pub fn reference(&self, t: f64) -> TrackingReference {
        self.setpoint.reference(t)
    }

    /// Evaluate the law. `tip_force` and `gravity` are the controller's
    /// model of `F(q)` and `N(q)·Ad⁻¹_{g_r}𝒢`.
    pub fn law(
        &self,
        t: f64,
        q: &DVector<f64>,
        qdot: &DVector<f64>,
        integral: &DVector<f64>,
        tip_force: &DVector<f64>,
        gravity: &DVector<f64>,
    ) -> DVector<f64> {
        let r = self.reference(t);
        match self.kind {
            ControllerKind::None => DVector::zeros(q.len()),
            ControllerKind::PdCable => control_pd_cable(&self.gains, q, qdot, &r, tip_force),
            ControllerKind::PdFluid => control_pd_fluid(&self.gains, q, qdot, &r),
            ControllerKind::PdGravComp => {
                control_pd_grav(&self.gains, q, qdot, &r, tip_force, gravity)
            }
            ControllerKind::PidGravComp => {
                control_pid_grav(&self.gains, q, qdot, &r, tip_force, gravity, integral)
            }
        }
    }

    /// Time derivative of the error integral: `q̃`, held at zero on
    /// components that sit at the clamp and would grow further.
    pub fn integral_rate(&self, t: f64, q: &DVector<f64>, integral: &DVector<f64>) -> DVector<f64> {
        if !self.kind.integrates() {
            return DVector::zeros(q.len());
        }
        let mut e = q - self.reference(t).position;
        if let Some(limit) = self.integral_limit {
            for (ei, zi) in e.iter_mut().zip(integral.iter()) {
                if (*zi >= limit && *ei > 0.0) || (*zi <= -limit && *ei < 0.0) {
                    *ei = 0.0;
                }
            }
        }
        e
    }

    /// Anchor for the potential terms of [`Lyapunov`]: `q_d` in position
    /// mode, the ramp origin in velocity mode.
    pub fn anchor(&self) -> &DVector<f64> {
        &self.setpoint.origin
    }
}

/// Weights of the plant potentials that the control law does not cancel.
///
/// With every weight at zero the Lyapunov candidate reduces to
/// `½q̇ᵀMq̇ + ½q̃ᵀK_p q̃ + ½zᵀK_I z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantPotentials {
    pub elastic: bool,
    pub gravity_weight: f64,
    pub tip_weight: f64,
}

impl PlantPotentials {
    pub fn none() -> Self {
        PlantPotentials {
            elastic: false,
            gravity_weight: 0.0,
            tip_weight: 0.0,
        }
    }

    /// Potentials left in the closed loop of `kind` on a plant whose gravity
    /// is `gravity_scale` times the controller's model.
    pub fn uncompensated(kind: ControllerKind, gravity_scale: f64) -> Self {
        PlantPotentials {
            elastic: true,
            gravity_weight: if kind.cancels_gravity() {
                gravity_scale - 1.0
            } else {
                gravity_scale
            },
            tip_weight: if kind.cancels_tip_load() { 0.0 } else { 1.0 },
        }
    }
}

/// Lyapunov candidate of the closed loop and its exact time derivative.
#[derive(Clone, Debug)]
pub struct Lyapunov<'a> {
    pub plant: &'a Dynamics,
    pub gravity_scale: f64,
    pub load: TipLoad,
    pub gains: &'a Gains,
    pub potentials: PlantPotentials,
    pub anchor: DVector<f64>,
}

impl<'a> Lyapunov<'a> {
    /// Bare candidate: kinetic energy plus gain-weighted errors.
    pub fn bare(plant: &'a Dynamics, gains: &'a Gains) -> Self {
        Lyapunov {
            plant,
            gravity_scale: 1.0,
            load: TipLoad::none(),
            gains,
            potentials: PlantPotentials::none(),
            anchor: DVector::zeros(plant.dof()),
        }
    }

    fn potential(&self, q: &DVector<f64>) -> Result<f64> {
        let p = &self.potentials;
        let mut v = 0.0;
        if p.elastic {
            v += self.plant.elastic_energy(q)?;
        }
        if p.gravity_weight != 0.0 {
            v += p.gravity_weight * self.plant.gravity_potential(q)?;
        }
        if p.tip_weight != 0.0 {
            v += p.tip_weight * self.plant.tip_potential(q, &self.load)?;
        }
        Ok(v)
    }

    /// `V = ½q̇ᵀMq̇ + ½q̃ᵀK_p q̃ + ½zᵀK_I z + Σ wᵢ(Uᵢ(q) − Uᵢ(anchor))`.
    pub fn value(
        &self,
        q: &DVector<f64>,
        qdot: &DVector<f64>,
        reference: &TrackingReference,
        integral: &DVector<f64>,
    ) -> Result<f64> {
        let m = self.plant.mass_matrix(q)?;
        check_len(q.len(), integral.len())?;
        let e = q - &reference.position;
        let mut v = 0.5 * qdot.dot(&(m * qdot))
            + 0.5 * e.dot(&(&self.gains.kp * &e))
            + 0.5 * integral.dot(&(&self.gains.ki * integral));
        if self.potentials != PlantPotentials::none() {
            v += self.potential(q)? - self.potential(&self.anchor)?;
        }
        Ok(v)
    }

    /// Exact `dV/dt` along the closed loop driven by `u`, with `integral_rate`
    /// the derivative of `z`.
    pub fn rate(
        &self,
        q: &DVector<f64>,
        qdot: &DVector<f64>,
        reference: &TrackingReference,
        integral: &DVector<f64>,
        integral_rate: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<f64> {
        let ev = self.plant.evaluate(q, qdot, &self.load)?;
        check_len(q.len(), u.len())?;
        let e = q - &reference.position;
        let p = &self.potentials;
        let gravity = &ev.gravity * self.gravity_scale;
        // q̇ᵀ M q̈ + ½ q̇ᵀ Ṁ q̇ reduces to the external power because
        // Ṁ − 2(C1 + C2) is skew-symmetric
        let mut power = qdot.dot(&(u + &ev.internal + &ev.tip + &gravity)) - ev.drag_power;
        if p.elastic {
            power -= qdot.dot(&self.plant.elastic_force(q)?);
        }
        power -= p.gravity_weight * qdot.dot(&ev.gravity);
        power -= p.tip_weight * qdot.dot(&ev.tip);
        Ok(power
            + (qdot - &reference.rate).dot(&(&self.gains.kp * &e))
            + integral.dot(&(&self.gains.ki * integral_rate)))
    }

    /// `−q̇ᵀ[K_D + D + Υ̂]q̇`, where `Υ̂` is the generalized viscosity. Equal to
    /// [`Lyapunov::rate`] for every PD law under its matching potentials
    /// when the reference is at rest.
    pub fn dissipation(&self, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<f64> {
        let ev = self.plant.evaluate(q, qdot, &self.load)?;
        Ok(-qdot.dot(&(&self.gains.kd * qdot)) - ev.drag_power
            + qdot.dot(&self.plant.viscous_force(qdot)?))
    }
}
