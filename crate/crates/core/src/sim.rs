//! Adaptive Runge–Kutta–Fehlberg 4(5) integration of the closed loop,
//! trajectory sampling and steady-state metrics.

use nalgebra::DVector;

use crate::control::{Controller, Lyapunov, PlantPotentials, SetpointMode};
use crate::dynamics::{Dynamics, TipLoad};
use crate::error::{check_len, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RkfSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub safety: f64,
}

impl Default for RkfSettings {
    fn default() -> Self {
        RkfSettings {
            rel_tol: 1e-7,
            abs_tol: 1e-9,
            h_init: 1e-4,
            h_min: 1e-12,
            h_max: 0.1,
            safety: 0.9,
        }
    }
}

impl RkfSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.h_min > 0.0
            && self.h_min <= self.h_init
            && self.h_init <= self.h_max
            && self.safety > 0.0
            && self.safety <= 1.0
            && [self.rel_tol, self.abs_tol, self.h_init, self.h_min, self.h_max]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "integrator settings need positive tolerances, 0 < h_min <= h_init <= h_max and 0 < safety <= 1: {self:?}"
            )))
        }
    }
}

// Fehlberg tableau
const C: [f64; 6] = [0.0, 0.25, 3.0 / 8.0, 12.0 / 13.0, 1.0, 0.5];
const A: [[f64; 5]; 6] = [
    [0.0; 5],
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
const B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -1.0 / 5.0,
    0.0,
];

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    /// Fifth-order solution; meaningful only if `accepted`.
    pub state: DVector<f64>,
    pub h_next: f64,
    pub accepted: bool,
    pub error_ratio: f64,
}

/// One attempted RKF4(5) step of size `h` from `(t, y)`.
pub fn rkf45_step<F>(
    f: &mut F,
    t: f64,
    y: &DVector<f64>,
    h: f64,
    settings: &RkfSettings,
) -> Result<StepOutcome>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let mut k: Vec<DVector<f64>> = Vec::with_capacity(6);
    for i in 0..6 {
        let mut yi = y.clone();
        for (j, kj) in k.iter().enumerate() {
            if A[i][j] != 0.0 {
                yi.axpy(h * A[i][j], kj, 1.0);
            }
        }
        k.push(f(t + C[i] * h, &yi)?);
    }
    let mut y5 = y.clone();
    let mut err = DVector::zeros(y.len());
    for i in 0..6 {
        y5.axpy(h * B5[i], &k[i], 1.0);
        err.axpy(h * (B5[i] - B4[i]), &k[i], 1.0);
    }
    let mut ratio: f64 = 0.0;
    for i in 0..y.len() {
        let scale = settings.abs_tol + settings.rel_tol * y[i].abs().max(y5[i].abs());
        ratio = ratio.max(err[i].abs() / scale);
    }
    if !ratio.is_finite() {
        ratio = f64::INFINITY;
    }
    let accepted = ratio <= 1.0;
    let factor = if ratio == 0.0 {
        5.0
    } else {
        (settings.safety * ratio.powf(-0.2)).clamp(0.2, 5.0)
    };
    let h_next = (h * factor).clamp(settings.h_min, settings.h_max);
    if !accepted && h <= settings.h_min {
        return Err(Error::StepUnderflow {
            t,
            h,
            h_min: settings.h_min,
            error_ratio: ratio,
        });
    }
    Ok(StepOutcome {
        state: y5,
        h_next,
        accepted,
        error_ratio: ratio,
    })
}

/// Step counters of one output interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepCounts {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrate `ẏ = f(t, y)` from `t0` to `t_end`, landing exactly on every
/// multiple of `cadence` and calling `sample` there (and at `t0`).
pub fn integrate<F, S>(
    mut f: F,
    t0: f64,
    y0: DVector<f64>,
    t_end: f64,
    cadence: f64,
    settings: &RkfSettings,
    mut sample: S,
) -> Result<StepCounts>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
    S: FnMut(f64, &DVector<f64>, StepCounts) -> Result<()>,
{
    settings.validate()?;
    if !(cadence > 0.0) || !(t_end >= t0) {
        return Err(Error::InvalidParameter(format!(
            "need cadence > 0 and t_end >= t0 (cadence {cadence}, t0 {t0}, t_end {t_end})"
        )));
    }
    check_finite(t0, &y0)?;
    sample(t0, &y0, StepCounts::default())?;
    let mut t = t0;
    let mut y = y0;
    let mut h = settings.h_init;
    let mut total = StepCounts::default();
    let mut interval = StepCounts::default();
    let mut out_index = 1usize;
    let tiny = 1e-12 * t_end.abs().max(1.0);
    while t < t_end - tiny {
        let t_out = (t0 + out_index as f64 * cadence).min(t_end);
        let remaining = t_out - t;
        let lands = h >= remaining;
        let step = if lands { remaining } else { h };
        let out = rkf45_step(&mut f, t, &y, step, settings)?;
        if out.accepted {
            check_finite(t + step, &out.state)?;
            y = out.state;
            t = if lands { t_out } else { t + step };
            total.accepted += 1;
            interval.accepted += 1;
            // a short landing step must not shrink the next regular step
            h = if lands { out.h_next.max(h) } else { out.h_next };
            h = h.min(settings.h_max);
            if lands {
                sample(t, &y, interval)?;
                interval = StepCounts::default();
                out_index += 1;
            }
        } else {
            total.rejected += 1;
            interval.rejected += 1;
            h = out.h_next.min(step);
        }
    }
    Ok(total)
}

fn check_finite(t: f64, y: &DVector<f64>) -> Result<()> {
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            t,
            details: format!(
                "state component {i} is {} (|y|_inf over finite entries = {:e})",
                y[i],
                y.iter().filter(|v| v.is_finite()).fold(0.0f64, |a, v| a.max(v.abs()))
            ),
        });
    }
    Ok(())
}

/// How the closed loop starts.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    /// `q(0) = q0`, `q̇(0) = 0`.
    Rest(DVector<f64>),
    /// Explicit position and rate.
    State(DVector<f64>, DVector<f64>),
    /// At rest in the static equilibrium of the open-loop plant under its
    /// elastic, gravitational and tip loads, searched from `q0`.
    LoadedEquilibrium(DVector<f64>),
}

/// Everything needed to run one closed-loop simulation.
#[derive(Clone, Debug)]
pub struct SimConfig {
    /// Plant model; its gravity is the controller's nominal model.
    pub plant: Dynamics,
    /// Ratio of the true plant gravity to the nominal one.
    pub gravity_scale: f64,
    pub load: TipLoad,
    pub controller: Controller,
    pub settings: RkfSettings,
    pub t_end: f64,
    pub cadence: f64,
    pub initial: InitialCondition,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// Steps accepted and rejected since the previous sample.
    pub steps: StepCounts,
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
    pub q_ref: DVector<f64>,
    pub qdot_ref: DVector<f64>,
    pub integral: DVector<f64>,
    pub u: DVector<f64>,
    pub v: f64,
    pub vdot: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub totals: StepCounts,
    pub mode: SetpointMode,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }
}

/// Static equilibrium `τ_el(q) + s·G(q) + F(q) = 0` by damped Newton with a
/// finite-difference Jacobian.
pub fn static_equilibrium(
    plant: &Dynamics,
    gravity_scale: f64,
    load: &TipLoad,
    q_guess: &DVector<f64>,
) -> Result<DVector<f64>> {
    let residual = |q: &DVector<f64>| -> Result<DVector<f64>> {
        Ok(plant.elastic_force(q)?
            + plant.gravity_buoyancy(q)? * gravity_scale
            + plant.tip_force(q, load)?)
    };
    let n = q_guess.len();
    let mut q = q_guess.clone();
    let mut r = residual(&q)?;
    let scale = plant
        .tensors()
        .iter()
        .zip(&plant.rod().sections)
        .map(|(t, s)| t.stiffness.max() * s.length)
        .fold(0.0, f64::max);
    let tol = 1e-12 * scale;
    const MAX_ITER: usize = 50;
    for _ in 0..MAX_ITER {
        if r.amax() < tol {
            return Ok(q);
        }
        let mut jac = nalgebra::DMatrix::zeros(n, n);
        for k in 0..n {
            let h = 1e-7 * q[k].abs().max(1.0);
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[k] += h;
            qm[k] -= h;
            let d = (residual(&qp)? - residual(&qm)?) / (2.0 * h);
            jac.set_column(k, &d);
        }
        let step = jac
            .lu()
            .solve(&(-&r))
            .ok_or_else(|| Error::NoConvergence {
                iterations: 0,
                residual: r.amax(),
            })?;
        let mut alpha = 1.0;
        loop {
            let trial = &q + &step * alpha;
            let rt = residual(&trial)?;
            if rt.amax() < r.amax() || alpha < 1e-4 {
                q = trial;
                r = rt;
                break;
            }
            alpha *= 0.5;
        }
    }
    if r.amax() < tol * 1e3 {
        return Ok(q);
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
        residual: r.amax(),
    })
}

/// Integrate the closed loop with state `[q, q̇, z]`, where `z` is the
/// error integral.
pub fn simulate(config: &SimConfig) -> Result<Trajectory> {
    let plant = &config.plant;
    let n = plant.dof();
    config.controller.validate(n)?;
    let (q0, qd0) = match &config.initial {
        InitialCondition::Rest(q) => (q.clone(), DVector::zeros(n)),
        InitialCondition::State(q, qd) => (q.clone(), qd.clone()),
        InitialCondition::LoadedEquilibrium(guess) => (
            static_equilibrium(plant, config.gravity_scale, &config.load, guess)?,
            DVector::zeros(n),
        ),
    };
    check_len(n, q0.len())?;
    check_len(n, qd0.len())?;
    let controller = &config.controller;
    let load = config.load;
    let scale = config.gravity_scale;

    let rhs = |t: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
        let q = y.rows(0, n).into_owned();
        let qd = y.rows(n, n).into_owned();
        let z = y.rows(2 * n, n).into_owned();
        let ev = plant.evaluate(&q, &qd, &load)?;
        let u = controller.law(t, &q, &qd, &z, &ev.tip, &ev.gravity);
        let qdd = ev.acceleration(&u, scale)?;
        let zd = controller.integral_rate(t, &q, &z);
        let mut out = DVector::zeros(3 * n);
        out.rows_mut(0, n).copy_from(&qd);
        out.rows_mut(n, n).copy_from(&qdd);
        out.rows_mut(2 * n, n).copy_from(&zd);
        Ok(out)
    };

    let lyap = Lyapunov {
        plant,
        gravity_scale: scale,
        load,
        gains: &controller.gains,
        potentials: PlantPotentials::uncompensated(controller.kind, scale),
        anchor: controller.anchor().clone(),
    };
    let mut samples = Vec::new();
    let record = |t: f64, y: &DVector<f64>, steps: StepCounts| -> Result<()> {
        let q = y.rows(0, n).into_owned();
        let qd = y.rows(n, n).into_owned();
        let z = y.rows(2 * n, n).into_owned();
        let r = controller.reference(t);
        let ev = plant.evaluate(&q, &qd, &load)?;
        let u = controller.law(t, &q, &qd, &z, &ev.tip, &ev.gravity);
        let zd = controller.integral_rate(t, &q, &z);
        let v = lyap.value(&q, &qd, &r, &z)?;
        let vdot = lyap.rate(&q, &qd, &r, &z, &zd, &u)?;
        samples.push(Sample {
            t,
            steps,
            q,
            qdot: qd,
            q_ref: r.position,
            qdot_ref: r.rate,
            integral: z,
            u,
            v,
            vdot,
        });
        Ok(())
    };

    let mut y0 = DVector::zeros(3 * n);
    y0.rows_mut(0, n).copy_from(&q0);
    y0.rows_mut(n, n).copy_from(&qd0);
    let totals = integrate(
        rhs,
        0.0,
        y0,
        config.t_end,
        config.cadence,
        &config.settings,
        record,
    )?;
    Ok(Trajectory {
        samples,
        totals,
        mode: controller.setpoint.mode,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState {
    /// Mean regulation error over the final window.
    pub ss_error: DVector<f64>,
    pub settled: bool,
    /// First time whose trailing window satisfies the settling test.
    pub settle_time: Option<f64>,
}

/// Rate bound of the settling test.
pub const SETTLE_RATE: f64 = 1e-4;
/// Bound on the spread of every error component across the window.
pub const SETTLE_SPREAD: f64 = 1e-5;

fn regulation_error(s: &Sample, mode: SetpointMode) -> DVector<f64> {
    match mode {
        SetpointMode::Position => &s.q - &s.q_ref,
        SetpointMode::Velocity => &s.qdot - &s.qdot_ref,
    }
}

fn window_settled(samples: &[Sample], mode: SetpointMode) -> bool {
    if samples.is_empty() {
        return false;
    }
    if samples.iter().any(|s| s.qdot.amax() >= SETTLE_RATE) {
        return false;
    }
    let errors: Vec<DVector<f64>> = samples.iter().map(|s| regulation_error(s, mode)).collect();
    (0..errors[0].len()).all(|i| {
        let (lo, hi) = errors
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                (lo.min(e[i]), hi.max(e[i]))
            });
        hi - lo < SETTLE_SPREAD
    })
}

/// Error is `q − q_ref` in position mode and `q̇ − q̇_ref` in velocity mode.
pub fn steady_state_metrics(traj: &Trajectory, window: f64) -> Result<SteadyState> {
    let samples = &traj.samples;
    let t0 = samples.first().map_or(0.0, |s| s.t);
    let t_end = samples.last().map_or(0.0, |s| s.t);
    let span = t_end - t0;
    let eps = 1e-9 * window.max(1.0);
    if samples.len() < 2 || window > span + eps || !(window > 0.0) {
        return Err(Error::WindowTooLong { window, span });
    }
    let start = |t: f64| samples.partition_point(|s| s.t < t - window - eps);
    let tail = &samples[start(t_end)..];
    let mut ss_error = DVector::zeros(samples[0].q.len());
    for s in tail {
        ss_error += regulation_error(s, traj.mode);
    }
    ss_error /= tail.len() as f64;
    let settled = window_settled(tail, traj.mode);
    let settle_time = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| s.t >= t0 + window - eps)
        .find(|(i, s)| window_settled(&samples[start(s.t)..=*i], traj.mode))
        .map(|(_, s)| s.t);
    Ok(SteadyState {
        ss_error,
        settled,
        settle_time,
    })
}

/// Largest `‖e(t)‖∞` over the trajectory.
pub fn peak_error(traj: &Trajectory) -> f64 {
    traj.samples
        .iter()
        .map(|s| regulation_error(s, traj.mode).amax())
        .fold(0.0, f64::max)
}

/// Deadband used when counting oscillations.
pub const CROSSING_DEADBAND: f64 = 1e-3;

/// Sign changes of every regulation-error component, summed. Values within
/// `rel_deadband` of the largest error magnitude over all components and
/// samples do not count as a sign.
pub fn zero_crossings(traj: &Trajectory, rel_deadband: f64) -> usize {
    let errors: Vec<DVector<f64>> = traj
        .samples
        .iter()
        .map(|s| regulation_error(s, traj.mode))
        .collect();
    let Some(first) = errors.first() else {
        return 0;
    };
    let band = rel_deadband * errors.iter().map(|e| e.amax()).fold(0.0, f64::max);
    let mut count = 0;
    for i in 0..first.len() {
        let mut sign = 0.0;
        for e in &errors {
            if e[i].abs() <= band {
                continue;
            }
            let s = e[i].signum();
            if sign != 0.0 && s != sign {
                count += 1;
            }
            sign = s;
        }
    }
    count
}

/// `‖e‖∞ / ‖q_d − q₀‖∞` restricted to `coords`.
pub fn relative_offset(
    error: &DVector<f64>,
    target: &DVector<f64>,
    start: &DVector<f64>,
    coords: &[usize],
) -> f64 {
    let num = coords.iter().map(|&i| error[i].abs()).fold(0.0, f64::max);
    let den = coords
        .iter()
        .map(|&i| (target[i] - start[i]).abs())
        .fold(0.0, f64::max);
    num / den
}

/// Indices of the bending `κ_z` and lateral-shear `ν_y` strains of every
/// section; these carry an in-plane load along the base `y` axis.
pub fn loaded_coordinates(sections: usize) -> Vec<usize> {
    (0..sections).flat_map(|i| [6 * i + 2, 6 * i + 4]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{ControllerKind, Gains, Setpoint};
    use crate::kinematics::Configuration;
    use crate::rod::RodSpec;

    #[test]
    fn exponential_decay() {
        let s = RkfSettings::default();
        let mut last = 0.0;
        integrate(
            |_, y| Ok(-y),
            0.0,
            DVector::from_element(1, 1.0),
            1.0,
            1.0,
            &s,
            |t, y, _| {
                if t == 1.0 {
                    last = y[0];
                }
                Ok(())
            },
        )
        .unwrap();
        assert!((last - (-1.0f64).exp()).abs() < 10.0 * (s.abs_tol + s.rel_tol));
    }

    #[test]
    fn constant_state_grows_step_to_max() {
        let s = RkfSettings::default();
        let y = DVector::from_element(2, 3.0);
        let mut f = |_: f64, y: &DVector<f64>| Ok(DVector::zeros(y.len()));
        let mut h = s.h_init;
        let mut state = y.clone();
        for _ in 0..20 {
            let out = rkf45_step(&mut f, 0.0, &state, h, &s).unwrap();
            assert!(out.accepted);
            state = out.state;
            h = out.h_next;
        }
        assert_eq!(state, y);
        assert_eq!(h, s.h_max);
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let s = RkfSettings::default();
        let w = 2.0 * std::f64::consts::PI;
        let mut energies = Vec::new();
        integrate(
            |_, y| Ok(DVector::from_row_slice(&[y[1], -w * w * y[0]])),
            0.0,
            DVector::from_row_slice(&[1.0, 0.0]),
            10.0,
            0.5,
            &s,
            |_, y, _| {
                energies.push(0.5 * y[1] * y[1] + 0.5 * w * w * y[0] * y[0]);
                Ok(())
            },
        )
        .unwrap();
        let e0 = energies[0];
        for e in energies {
            assert!(((e - e0) / e0).abs() < 1e-5);
        }
    }

    #[test]
    fn underflow_and_non_finite_abort() {
        let s = RkfSettings {
            h_min: 1e-3,
            h_init: 1e-3,
            ..Default::default()
        };
        let r = integrate(
            |_, y| Ok(y * 1e6),
            0.0,
            DVector::from_element(1, 1.0),
            1.0,
            0.1,
            &s,
            |_, _, _| Ok(()),
        );
        assert!(matches!(r, Err(Error::StepUnderflow { .. })));
        let r = integrate(
            |_, y| Ok(DVector::from_element(y.len(), f64::NAN)),
            0.0,
            DVector::from_element(1, 1.0),
            1.0,
            0.1,
            &RkfSettings::default(),
            |_, _, _| Ok(()),
        );
        assert!(r.is_err());
    }

    #[test]
    fn samples_land_on_cadence() {
        let mut ts = Vec::new();
        integrate(
            |_, y| Ok(-y),
            0.0,
            DVector::from_element(1, 1.0),
            1.0,
            0.1,
            &RkfSettings::default(),
            |t, _, _| {
                ts.push(t);
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(ts.len(), 11);
        for (i, t) in ts.iter().enumerate() {
            assert!((t - 0.1 * i as f64).abs() < 1e-12);
        }
    }

    fn idle_config() -> SimConfig {
        let plant = Dynamics::new(RodSpec::reference())
            .unwrap()
            .with_gravity(nalgebra::Vector6::zeros());
        let q0 = Configuration::straight(4).to_vector();
        SimConfig {
            plant,
            gravity_scale: 1.0,
            load: TipLoad::none(),
            controller: Controller::new(
                ControllerKind::PdFluid,
                Gains::uniform(24, 0.0, 0.0, 0.0),
                Setpoint::position(q0.clone()),
            ),
            settings: RkfSettings::default(),
            t_end: 0.5,
            cadence: 0.1,
            initial: InitialCondition::Rest(q0),
        }
    }

    #[test]
    fn zero_force_rest_start_stays_put() {
        let mut cfg = idle_config();
        cfg.controller.kind = ControllerKind::None;
        let traj = simulate(&cfg).unwrap();
        let q0 = &traj.samples[0].q;
        assert_eq!(traj.samples.len(), 6);
        for s in &traj.samples {
            assert_eq!(&s.q, q0);
            assert_eq!(s.qdot.amax(), 0.0);
        }
        let ss = steady_state_metrics(&traj, 0.2).unwrap();
        assert_eq!(ss.ss_error.amax(), 0.0);
        assert!(ss.settled);
        assert!((ss.settle_time.unwrap() - 0.2).abs() < 1e-12);
        assert!(matches!(
            steady_state_metrics(&traj, 1.0),
            Err(Error::WindowTooLong { .. })
        ));
    }

    #[test]
    fn loaded_equilibrium_balances_loads() {
        let plant = Dynamics::new(RodSpec::reference()).unwrap();
        let load = TipLoad::force(10.0, 1);
        let q0 = Configuration::straight(4).to_vector();
        let q = static_equilibrium(&plant, 1.0, &load, &q0).unwrap();
        let r = plant.elastic_force(&q).unwrap()
            + plant.gravity_buoyancy(&q).unwrap()
            + plant.tip_force(&q, &load).unwrap();
        assert!(r.amax() < 1e-6);
        // loads along base +y bend the rod about +z
        assert!(q[2] > 0.0);
    }

    #[test]
    fn crossings_ignore_deadband() {
        let sample = |t: f64, v: f64| Sample {
            t,
            steps: StepCounts::default(),
            q: DVector::from_element(1, 0.0),
            qdot: DVector::from_element(1, v),
            q_ref: DVector::zeros(1),
            qdot_ref: DVector::zeros(1),
            integral: DVector::zeros(1),
            u: DVector::zeros(1),
            v: 0.0,
            vdot: 0.0,
        };
        let values = [1.0, -0.5, 0.001, -0.001, 0.2, 0.0];
        let traj = Trajectory {
            samples: values.iter().enumerate().map(|(i, &v)| sample(i as f64, v)).collect(),
            totals: StepCounts::default(),
            mode: SetpointMode::Velocity,
        };
        assert_eq!(zero_crossings(&traj, 0.0), 4);
        assert_eq!(zero_crossings(&traj, 0.01), 2);
    }

    #[test]
    fn relative_offset_on_loaded_coordinates() {
        let coords = loaded_coordinates(2);
        assert_eq!(coords, vec![2, 4, 8, 10]);
        let target = DVector::zeros(12);
        let mut start = DVector::zeros(12);
        start[2] = 2.0;
        let mut err = DVector::zeros(12);
        err[8] = 0.4;
        err[0] = 100.0;
        assert!((relative_offset(&err, &target, &start, &coords) - 0.2).abs() < 1e-15);
    }
}
