//! Numerical certificates of the structural properties of the generalized
//! dynamics, sampled with fixed seeds.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::{Controller, ControllerKind, Gains, Setpoint};
use crate::dynamics::{Dynamics, TipLoad};
use crate::error::{Error, Result};
use crate::rod::{MaterialParams, Medium, RodSpec};
use crate::sim::{simulate, InitialCondition, RkfSettings, SimConfig};

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Random states over the certificate domain: angular strains in `[-10, 10]`,
/// stretch in `[0.5, 1.5]`, shear in `[-0.5, 0.5]`, rates in `[-1, 1]`.
pub struct StateSampler {
    rng: ChaCha8Rng,
    sections: usize,
}

impl StateSampler {
    pub fn new(seed: u64, sections: usize) -> Self {
        StateSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            sections,
        }
    }

    pub fn strain(&mut self) -> DVector<f64> {
        let mut q = DVector::zeros(6 * self.sections);
        for i in 0..self.sections {
            for k in 0..3 {
                q[6 * i + k] = self.rng.random_range(-10.0..=10.0);
            }
            q[6 * i + 3] = self.rng.random_range(0.5..=1.5);
            q[6 * i + 4] = self.rng.random_range(-0.5..=0.5);
            q[6 * i + 5] = self.rng.random_range(-0.5..=0.5);
        }
        q
    }

    /// Entries uniform in `[-1, 1]`.
    pub fn unit(&mut self) -> DVector<f64> {
        DVector::from_fn(6 * self.sections, |_, _| self.rng.random_range(-1.0..=1.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Spd,
    Bound,
    Skew,
    Linparam,
    Energy,
    Passivity,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Spd,
        Suite::Bound,
        Suite::Skew,
        Suite::Linparam,
        Suite::Energy,
        Suite::Passivity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Spd => "spd",
            Suite::Bound => "bound",
            Suite::Skew => "skew",
            Suite::Linparam => "linparam",
            Suite::Energy => "energy",
            Suite::Passivity => "passivity",
        }
    }

    pub fn default_samples(self) -> usize {
        match self {
            Suite::Bound => 10_000,
            Suite::Energy => 1,
            _ => 100,
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub samples: usize,
    pub passed: bool,
    /// Named statistics, printed in order.
    pub stats: Vec<(&'static str, f64)>,
    /// Worst sample, printed on failure.
    pub offending: Option<String>,
}

impl Report {
    pub fn stat(&self, name: &str) -> Option<f64> {
        self.stats.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} seed={} samples={}",
            self.suite.name(),
            if self.passed { "PASS" } else { "FAIL" },
            self.seed,
            self.samples
        )?;
        for (n, v) in &self.stats {
            write!(f, " {n}={v:.3e}")?;
        }
        if let (false, Some(o)) = (self.passed, &self.offending) {
            write!(f, "\n  offending sample: {o}")?;
        }
        Ok(())
    }
}

fn describe(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// Symmetry to `1e-10` relative and positive smallest eigenvalue.
pub fn certify_spd(plant: &Dynamics, seed: u64, samples: usize) -> Result<Report> {
    let mut sampler = StateSampler::new(seed, plant.rod().section_count());
    let mut worst_asym: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut offending = None;
    for _ in 0..samples {
        let q = sampler.strain();
        let m = plant.mass_matrix(&q)?;
        let asym = (&m - m.transpose()).norm() / m.norm();
        let eig = min_eigenvalue(&m);
        if asym > worst_asym || eig < min_eig {
            offending = Some(format!("q={}", describe(&q)));
        }
        worst_asym = worst_asym.max(asym);
        min_eig = min_eig.min(eig);
    }
    Ok(Report {
        suite: Suite::Spd,
        seed,
        samples,
        passed: worst_asym < 1e-10 && min_eig > 0.0,
        stats: vec![("max_rel_asymmetry", worst_asym), ("min_eigenvalue", min_eig)],
        offending,
    })
}

/// Empirical uniform lower bound of `eig_min(M)`, required to exceed `1e-8`.
pub fn certify_bound(plant: &Dynamics, seed: u64, samples: usize) -> Result<Report> {
    let mut sampler = StateSampler::new(seed, plant.rod().section_count());
    let mut inf = f64::INFINITY;
    let mut offending = None;
    for _ in 0..samples {
        let q = sampler.strain();
        let eig = min_eigenvalue(&plant.mass_matrix(&q)?);
        if eig < inf {
            inf = eig;
            offending = Some(format!("q={}", describe(&q)));
        }
    }
    Ok(Report {
        suite: Suite::Bound,
        seed,
        samples,
        passed: inf > 1e-8,
        stats: vec![("empirical_lower_bound", inf)],
        offending,
    })
}

/// `|vᵀ(Ṁ − 2(C1 + C2))v| / (‖v‖²‖Ṁ‖_F) < 1e-5` with `Ṁ` by central
/// differences along `q̇`.
pub fn certify_skew(plant: &Dynamics, seed: u64, samples: usize) -> Result<Report> {
    const H: f64 = 1e-6;
    let mut sampler = StateSampler::new(seed, plant.rod().section_count());
    let mut worst: f64 = 0.0;
    let mut worst_frob: f64 = 0.0;
    let mut offending = None;
    for _ in 0..samples {
        let q = sampler.strain();
        let qd = sampler.unit();
        let v = sampler.unit();
        let mdot = (plant.mass_matrix(&(&q + &qd * H))? - plant.mass_matrix(&(&q - &qd * H))?)
            / (2.0 * H);
        let c = plant.coriolis1(&q, &qd)? + plant.coriolis2(&q, &qd)?;
        let n = &mdot - &c * 2.0;
        let stat = (v.transpose() * &n * &v)[0].abs() / (v.norm_squared() * mdot.norm());
        let frob = (&mdot - &c - c.transpose()).norm() / mdot.norm();
        if stat > worst {
            worst = stat;
            offending = Some(format!("q={} qdot={} v={}", describe(&q), describe(&qd), describe(&v)));
        }
        worst_frob = worst_frob.max(frob);
    }
    Ok(Report {
        suite: Suite::Skew,
        seed,
        samples,
        passed: worst < 1e-5,
        stats: vec![
            ("max_normalized_quadratic", worst),
            ("max_rel_symmetric_residual", worst_frob),
        ],
        offending,
    })
}

/// `Y(q, q̇, q̈)Θ` against the explicitly assembled terms, and exact
/// linearity under `Θ → 2Θ`.
pub fn certify_linparam(plant: &Dynamics, seed: u64, samples: usize) -> Result<Report> {
    let mut sampler = StateSampler::new(seed, plant.rod().section_count());
    let mut worst: f64 = 0.0;
    let mut doubling_exact = true;
    let mut offending = None;
    for _ in 0..samples {
        let q = sampler.strain();
        let qd = sampler.unit();
        let qdd = sampler.unit();
        let terms = plant.terms(&q, &qd, &TipLoad::none())?;
        let lhs = &terms.mass * &qdd
            + (&terms.coriolis1 + &terms.coriolis2 + &terms.drag) * &qd
            - &terms.gravity
            - &terms.internal;
        let (y, theta) = plant.regressor(&q, &qd, &qdd)?;
        let out = &y * &theta;
        let rel = (&out - &lhs).norm() / lhs.norm();
        if rel > worst {
            worst = rel;
            offending = Some(format!("q={} qdot={} qddot={}", describe(&q), describe(&qd), describe(&qdd)));
        }
        let doubled = &y * (&theta * 2.0);
        if doubled != &out * 2.0 {
            doubling_exact = false;
        }
    }
    Ok(Report {
        suite: Suite::Linparam,
        seed,
        samples,
        passed: worst < 1e-8 && doubling_exact,
        stats: vec![
            ("max_rel_error", worst),
            ("doubling_exact", if doubling_exact { 1.0 } else { 0.0 }),
        ],
        offending,
    })
}

/// Plant for the conservation run: no viscosity, air, zero gravity.
pub fn conservative_plant(sections: usize) -> Result<Dynamics> {
    let rod = RodSpec::uniform(sections, 0.1, 0.2, 41)
        .with_material(MaterialParams {
            shear_viscosity: 0.0,
            ..MaterialParams::default()
        })
        .with_medium(Medium::air());
    Ok(Dynamics::new(rod)?.with_gravity(nalgebra::Vector6::zeros()))
}

/// Free undamped rod released from a perturbed state; relative drift of
/// `½q̇ᵀMq̇ + U` over `t_end` at tolerances `1e-9/1e-11`, required `< 1e-4`.
pub fn certify_energy(seed: u64, t_end: f64) -> Result<Report> {
    let plant = conservative_plant(4)?;
    let n = plant.dof();
    let mut sampler = StateSampler::new(seed, 4);
    let base = crate::kinematics::Configuration::straight(4).to_vector();
    let angular = DVector::from_fn(n, |i, _| if i % 6 < 3 { 1.0 } else { 0.05 });
    let q0 = &base + sampler.unit().component_mul(&angular);
    let qd0 = sampler.unit().component_mul(&angular);
    let config = SimConfig {
        controller: Controller::new(
            ControllerKind::None,
            Gains::uniform(n, 1.0, 1.0, 0.0),
            Setpoint::position(base),
        ),
        plant,
        gravity_scale: 1.0,
        load: TipLoad::none(),
        settings: RkfSettings {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            ..Default::default()
        },
        t_end,
        cadence: (t_end / 100.0).max(1e-6),
        initial: InitialCondition::State(q0.clone(), qd0.clone()),
    };
    let traj = simulate(&config)?;
    let energy = |q: &DVector<f64>, qd: &DVector<f64>| -> Result<f64> {
        Ok(config.plant.kinetic_energy(q, qd)? + config.plant.elastic_energy(q)?)
    };
    let e0 = energy(&q0, &qd0)?;
    let mut drift: f64 = 0.0;
    for s in &traj.samples {
        drift = drift.max((energy(&s.q, &s.qdot)? - e0).abs() / e0);
    }
    Ok(Report {
        suite: Suite::Energy,
        seed,
        samples: traj.samples.len(),
        passed: drift < 1e-4,
        stats: vec![
            ("max_rel_drift", drift),
            ("initial_energy", e0),
            ("accepted_steps", traj.totals.accepted as f64),
        ],
        offending: Some(format!("q0={} qdot0={}", describe(&q0), describe(&qd0))),
    })
}

/// `q̇ᵀD q̇ ≥ 0` and `⟨τ_visc, q̇⟩ ≤ 0`, up to rounding, in water where the
/// drag is largest.
pub fn certify_passivity(seed: u64, samples: usize) -> Result<Report> {
    let plant = Dynamics::new(RodSpec::reference().with_medium(Medium::water()))?;
    let mut sampler = StateSampler::new(seed, 4);
    let mut worst_drag: f64 = f64::INFINITY;
    let mut worst_visc: f64 = f64::NEG_INFINITY;
    let mut offending = None;
    for _ in 0..samples {
        let q = sampler.strain();
        let qd = sampler.unit();
        let d = plant.drag_matrix(&q, &qd)?;
        let drag = (qd.transpose() * &d * &qd)[0] / (d.norm() * qd.norm_squared()).max(f64::MIN_POSITIVE);
        let visc = plant.viscous_force(&qd)?.dot(&qd);
        if drag < worst_drag || visc > worst_visc {
            offending = Some(format!("q={} qdot={}", describe(&q), describe(&qd)));
        }
        worst_drag = worst_drag.min(drag);
        worst_visc = worst_visc.max(visc);
    }
    Ok(Report {
        suite: Suite::Passivity,
        seed,
        samples,
        passed: worst_drag >= -1e-12 && worst_visc <= 0.0,
        stats: vec![
            ("min_normalized_drag_power", worst_drag),
            ("max_viscous_power", worst_visc),
        ],
        offending,
    })
}

/// Run one suite at the reference rod; `samples` of `None` uses the suite
/// default. For `energy` the sample count is ignored.
pub fn run(suite: Suite, seed: u64, samples: Option<usize>) -> Result<Report> {
    let samples = samples.unwrap_or(suite.default_samples());
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let plant = || Dynamics::new(RodSpec::reference());
    match suite {
        Suite::Spd => certify_spd(&plant()?, seed, samples),
        Suite::Bound => certify_bound(&plant()?, seed, samples),
        Suite::Skew => certify_skew(&plant()?, seed, samples),
        Suite::Linparam => certify_linparam(&plant()?, seed, samples),
        Suite::Energy => certify_energy(seed, 1.0),
        Suite::Passivity => certify_passivity(seed, samples),
    }
}
