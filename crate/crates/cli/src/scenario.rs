//! Scenario files: strict TOML with a default for every key.
//!
//! ```toml
//! [rod]
//! sections = 4
//! radius = 0.1
//! length = 0.2          # total arm length
//! microsolids = 41      # per section
//!
//! [material]
//! E = 110e3
//! mu = 3e3
//! poisson = 0.45
//! rho = 2000.0
//!
//! [medium]
//! kind = "water"        # air | water; fluid terms default per kind
//!
//! [actuation]
//! kind = "cable"        # cable | fluid
//! tip_load_N = 10.0
//! tip_load_axis = "y"   # base frame
//!
//! [controller]
//! kind = "pd_cable"     # none | pd_cable | pd_fluid | pd_grav | pid_grav
//! mode = "velocity"     # position | velocity
//! K_p = [1.2, 1.7, 1.7, 690.0, 240.0, 240.0]   # scalar, per block or full
//! K_D = 0.1
//! ```

use std::path::{Path, PathBuf};

use cosserat::control::{Controller, ControllerKind, Gains, Setpoint, SetpointMode};
use cosserat::dynamics::{Dynamics, TipLoad};
use cosserat::kinematics::Configuration;
use cosserat::rod::{MaterialParams, Medium, MediumKind, RodSpec, GRAVITY};
use cosserat::sim::{
    loaded_coordinates, peak_error, relative_offset, simulate, static_equilibrium,
    steady_state_metrics, zero_crossings, InitialCondition, RkfSettings, SimConfig, SteadyState,
    Trajectory, CROSSING_DEADBAND,
};
use nalgebra::{DVector, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Per-block default gains: four times each coordinate's section stiffness
/// `Σ·ℓ` at the reference rod, rounded.
pub const DEFAULT_KP: [f64; 6] = [1.2, 1.7, 1.7, 690.0, 240.0, 240.0];
pub const DEFAULT_KD: f64 = 0.1;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub rod: RodTable,
    #[serde(default)]
    pub material: MaterialTable,
    #[serde(default)]
    pub medium: MediumTable,
    #[serde(default)]
    pub actuation: ActuationTable,
    #[serde(default)]
    pub controller: ControllerTable,
    #[serde(default)]
    pub setpoint: SetpointTable,
    #[serde(default)]
    pub initial: InitialTable,
    #[serde(default)]
    pub plant: PlantTable,
    #[serde(default)]
    pub integrator: IntegratorTable,
    #[serde(default)]
    pub metrics: MetricsTable,
    #[serde(default)]
    pub output: OutputTable,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RodTable {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sections: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub microsolids: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialTable {
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    pub youngs_modulus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poisson: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediumName {
    Air,
    Water,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MediumTable {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<MediumName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActuationName {
    Cable,
    Fluid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActuationTable {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ActuationName>,
    #[serde(rename = "tip_load_N", skip_serializing_if = "Option::is_none")]
    pub tip_load_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tip_load_axis: Option<Axis>,
    #[serde(rename = "X_bar", skip_serializing_if = "Option::is_none")]
    pub x_bar: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerName {
    None,
    PdCable,
    PdFluid,
    PdGrav,
    PidGrav,
}

impl From<ControllerName> for ControllerKind {
    fn from(n: ControllerName) -> Self {
        match n {
            ControllerName::None => ControllerKind::None,
            ControllerName::PdCable => ControllerKind::PdCable,
            ControllerName::PdFluid => ControllerKind::PdFluid,
            ControllerName::PdGrav => ControllerKind::PdGravComp,
            ControllerName::PidGrav => ControllerKind::PidGravComp,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Position,
    Velocity,
}

/// A gain diagonal: one scalar, one 6-vector repeated per section, or the
/// full diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainSpec {
    Scalar(f64),
    List(Vec<f64>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerTable {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ControllerName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeName>,
    #[serde(rename = "K_p", skip_serializing_if = "Option::is_none")]
    pub kp: Option<GainSpec>,
    #[serde(rename = "K_D", skip_serializing_if = "Option::is_none")]
    pub kd: Option<GainSpec>,
    #[serde(rename = "K_I", skip_serializing_if = "Option::is_none")]
    pub ki: Option<GainSpec>,
    /// Elementwise clamp on the error integral; `inf` disables it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral_limit: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetpointTable {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_d: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qdot_d: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialName {
    /// Start at `q0`, `qdot0`.
    Given,
    /// Start at rest in the open-loop static equilibrium, searched from `q0`.
    LoadedEquilibrium,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialTable {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<InitialName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qdot0: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantTable {
    /// Magnitude of the nominal gravity, m/s².
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gravity: Option<f64>,
    /// True plant gravity over the nominal one seen by the controller.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gravity_scale: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorTable {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cadence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_init: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub safety: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsTable {
    /// Steady-state window, s.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputTable {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot_path: Option<PathBuf>,
}

/// A fully resolved, validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    /// The same scenario with every key spelled out.
    pub explicit: ScenarioFile,
    pub plant: Dynamics,
    pub gravity_scale: f64,
    pub load: TipLoad,
    pub kind: ControllerKind,
    pub mode: SetpointMode,
    pub gains: Gains,
    pub integral_limit: f64,
    pub q_d: DVector<f64>,
    pub qdot_d: DVector<f64>,
    pub initial: InitialName,
    pub q0: DVector<f64>,
    pub qdot0: DVector<f64>,
    pub settings: RkfSettings,
    pub t_end: f64,
    pub cadence: f64,
    pub window: f64,
    pub csv_path: PathBuf,
    pub plot_path: PathBuf,
}

/// Results of one run plus its summary metrics.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub steady: SteadyState,
    /// `q(0)` after any equilibrium search.
    pub start: DVector<f64>,
    /// Position mode only.
    pub relative_offset: Option<f64>,
    pub peak_error: f64,
    pub zero_crossings: usize,
}

fn invalid(msg: String) -> CliError {
    CliError::Validation(msg)
}

fn expand(key: &str, values: &[f64], dof: usize) -> CliResult<DVector<f64>> {
    match values.len() {
        6 => Ok(DVector::from_fn(dof, |i, _| values[i % 6])),
        n if n == dof => Ok(DVector::from_row_slice(values)),
        n => Err(invalid(format!(
            "{key} has {n} entries; expected 6 (per section) or {dof}"
        ))),
    }
}

fn expand_gain(key: &str, spec: &GainSpec, dof: usize) -> CliResult<DVector<f64>> {
    match spec {
        GainSpec::Scalar(v) => Ok(DVector::from_element(dof, *v)),
        GainSpec::List(values) => expand(key, values, dof),
    }
}

fn list(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

impl ScenarioFile {
    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario tables always serialize")
    }

    /// Apply defaults and validate.
    pub fn resolve(&self) -> CliResult<Scenario> {
        let r = &self.rod;
        let sections = r.sections.unwrap_or(4);
        let radius = r.radius.unwrap_or(0.1);
        let length = r.length.unwrap_or(0.2);
        let microsolids = r.microsolids.unwrap_or(41);
        if sections == 0 {
            return Err(invalid("rod.sections must be at least 1".into()));
        }
        let dof = 6 * sections;

        let defaults = MaterialParams::default();
        let material = MaterialParams {
            youngs_modulus: self.material.youngs_modulus.unwrap_or(defaults.youngs_modulus),
            shear_viscosity: self.material.mu.unwrap_or(defaults.shear_viscosity),
            poisson_ratio: self.material.poisson.unwrap_or(defaults.poisson_ratio),
            density: self.material.rho.unwrap_or(defaults.density),
        };

        let medium_name = self.medium.kind.unwrap_or(MediumName::Air);
        let base_medium = match medium_name {
            MediumName::Air => Medium::air(),
            MediumName::Water => Medium::water(),
        };
        let medium = Medium {
            kind: match medium_name {
                MediumName::Air => MediumKind::Air,
                MediumName::Water => MediumKind::Water,
            },
            fluid_density: self.medium.rho_f.unwrap_or(base_medium.fluid_density),
            drag_coefficient: self.medium.c_d.unwrap_or(base_medium.drag_coefficient),
            added_mass_factor: self.medium.kappa.unwrap_or(base_medium.added_mass_factor),
        };

        let actuation = self.actuation.kind.unwrap_or(ActuationName::Cable);
        let tip_n = self.actuation.tip_load_n.unwrap_or(0.0);
        let axis = self.actuation.tip_load_axis.unwrap_or(Axis::Y);
        let x_bar = self.actuation.x_bar.unwrap_or(length);
        if !tip_n.is_finite() {
            return Err(invalid("actuation.tip_load_N must be finite".into()));
        }

        let mut rod = RodSpec::uniform(sections, radius, length, microsolids)
            .with_material(material)
            .with_medium(medium);
        rod.cable_point = x_bar;
        rod.validate().map_err(|e| invalid(e.to_string()))?;

        let gravity = self.plant.gravity.unwrap_or(GRAVITY);
        let gravity_scale = self.plant.gravity_scale.unwrap_or(1.0);
        if !gravity.is_finite() || !gravity_scale.is_finite() {
            return Err(invalid("plant.gravity and plant.gravity_scale must be finite".into()));
        }
        let plant = Dynamics::new(rod)?.with_gravity(Vector6::new(0.0, 0.0, 0.0, -gravity, 0.0, 0.0));
        let load = TipLoad::force(
            tip_n,
            match axis {
                Axis::X => 0,
                Axis::Y => 1,
                Axis::Z => 2,
            },
        );

        let c = &self.controller;
        let controller_name = c.kind.unwrap_or(match actuation {
            ActuationName::Cable => ControllerName::PdCable,
            ActuationName::Fluid => ControllerName::PdFluid,
        });
        let mode_name = c.mode.unwrap_or(ModeName::Position);
        let kp = expand_gain("controller.K_p", c.kp.as_ref().unwrap_or(&GainSpec::List(DEFAULT_KP.to_vec())), dof)?;
        let kd = expand_gain("controller.K_D", c.kd.as_ref().unwrap_or(&GainSpec::Scalar(DEFAULT_KD)), dof)?;
        let ki = expand_gain("controller.K_I", c.ki.as_ref().unwrap_or(&GainSpec::Scalar(0.0)), dof)?;
        let gains = Gains::diagonal(&kp, &kd, &ki);
        gains
            .validate(dof)
            .map_err(|e| invalid(format!("controller gains: {e}")))?;
        let integral_limit = c.integral_limit.unwrap_or(f64::INFINITY);
        if !(integral_limit > 0.0) {
            return Err(invalid("controller.integral_limit must be positive".into()));
        }

        let straight = Configuration::straight(sections).to_vector();
        let q_d = match &self.setpoint.q_d {
            Some(v) => expand("setpoint.q_d", v, dof)?,
            None => straight.clone(),
        };
        let qdot_d = match &self.setpoint.qdot_d {
            Some(v) => expand("setpoint.qdot_d", v, dof)?,
            None => DVector::zeros(dof),
        };
        let initial = self.initial.state.unwrap_or(InitialName::Given);
        let q0 = match &self.initial.q0 {
            Some(v) => expand("initial.q0", v, dof)?,
            None => straight,
        };
        let qdot0 = match &self.initial.qdot0 {
            Some(v) => expand("initial.qdot0", v, dof)?,
            None => DVector::zeros(dof),
        };
        for (key, v) in [("setpoint.q_d", &q_d), ("setpoint.qdot_d", &qdot_d), ("initial.q0", &q0), ("initial.qdot0", &qdot0)] {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!("{key} must be finite")));
            }
        }
        if initial == InitialName::LoadedEquilibrium && qdot0.amax() != 0.0 {
            return Err(invalid("initial.qdot0 must be zero for a loaded_equilibrium start".into()));
        }

        let d = RkfSettings::default();
        let i = &self.integrator;
        let settings = RkfSettings {
            rel_tol: i.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: i.abs_tol.unwrap_or(d.abs_tol),
            h_init: i.h_init.unwrap_or(d.h_init),
            h_min: i.h_min.unwrap_or(d.h_min),
            h_max: i.h_max.unwrap_or(d.h_max),
            safety: i.safety.unwrap_or(d.safety),
        };
        settings.validate().map_err(|e| invalid(e.to_string()))?;
        let t_end = i.t_end.unwrap_or(60.0);
        let cadence = i.cadence.unwrap_or(0.1);
        if !(t_end > 0.0 && t_end.is_finite()) || !(cadence > 0.0 && cadence.is_finite()) {
            return Err(invalid("integrator.t_end and integrator.cadence must be positive".into()));
        }
        let window = self.metrics.window.unwrap_or(1.0);
        if !(window > 0.0) || window > t_end {
            return Err(invalid(format!(
                "metrics.window must lie in (0, t_end = {t_end}], got {window}"
            )));
        }
        let csv_path = self.output.csv_path.clone().unwrap_or_else(|| "trajectory.csv".into());
        let plot_path = self.output.plot_path.clone().unwrap_or_else(|| "trajectory.svg".into());

        let explicit = ScenarioFile {
            rod: RodTable {
                sections: Some(sections),
                radius: Some(radius),
                length: Some(length),
                microsolids: Some(microsolids),
            },
            material: MaterialTable {
                youngs_modulus: Some(material.youngs_modulus),
                mu: Some(material.shear_viscosity),
                poisson: Some(material.poisson_ratio),
                rho: Some(material.density),
            },
            medium: MediumTable {
                kind: Some(medium_name),
                rho_f: Some(medium.fluid_density),
                c_d: Some(medium.drag_coefficient),
                kappa: Some(medium.added_mass_factor),
            },
            actuation: ActuationTable {
                kind: Some(actuation),
                tip_load_n: Some(tip_n),
                tip_load_axis: Some(axis),
                x_bar: Some(x_bar),
            },
            controller: ControllerTable {
                kind: Some(controller_name),
                mode: Some(mode_name),
                kp: Some(GainSpec::List(list(&kp))),
                kd: Some(GainSpec::List(list(&kd))),
                ki: Some(GainSpec::List(list(&ki))),
                integral_limit: Some(integral_limit),
            },
            setpoint: SetpointTable {
                q_d: Some(list(&q_d)),
                qdot_d: Some(list(&qdot_d)),
            },
            initial: InitialTable {
                state: Some(initial),
                q0: Some(list(&q0)),
                qdot0: Some(list(&qdot0)),
            },
            plant: PlantTable {
                gravity: Some(gravity),
                gravity_scale: Some(gravity_scale),
            },
            integrator: IntegratorTable {
                rel_tol: Some(settings.rel_tol),
                abs_tol: Some(settings.abs_tol),
                t_end: Some(t_end),
                cadence: Some(cadence),
                h_init: Some(settings.h_init),
                h_min: Some(settings.h_min),
                h_max: Some(settings.h_max),
                safety: Some(settings.safety),
            },
            metrics: MetricsTable { window: Some(window) },
            output: OutputTable {
                csv_path: Some(csv_path.clone()),
                plot_path: Some(plot_path.clone()),
            },
        };

        Ok(Scenario {
            explicit,
            plant,
            gravity_scale,
            load,
            kind: controller_name.into(),
            mode: match mode_name {
                ModeName::Position => SetpointMode::Position,
                ModeName::Velocity => SetpointMode::Velocity,
            },
            gains,
            integral_limit,
            q_d,
            qdot_d,
            initial,
            q0,
            qdot0,
            settings,
            t_end,
            cadence,
            window,
            csv_path,
            plot_path,
        })
    }
}

impl Scenario {
    pub fn load(path: &Path) -> CliResult<Self> {
        ScenarioFile::load(path)?.resolve()
    }

    pub fn sections(&self) -> usize {
        self.plant.rod().section_count()
    }

    /// Initial state, solving for the loaded equilibrium if requested.
    pub fn start(&self) -> CliResult<(DVector<f64>, DVector<f64>)> {
        match self.initial {
            InitialName::Given => Ok((self.q0.clone(), self.qdot0.clone())),
            InitialName::LoadedEquilibrium => Ok((
                static_equilibrium(&self.plant, self.gravity_scale, &self.load, &self.q0)?,
                DVector::zeros(self.q0.len()),
            )),
        }
    }

    pub fn sim_config(&self) -> CliResult<SimConfig> {
        let (q, qd) = self.start()?;
        let setpoint = match self.mode {
            SetpointMode::Position => Setpoint::position(self.q_d.clone()),
            SetpointMode::Velocity => Setpoint::velocity(q.clone(), self.qdot_d.clone()),
        };
        let mut controller = Controller::new(self.kind, self.gains.clone(), setpoint);
        if self.integral_limit.is_finite() {
            controller.integral_limit = Some(self.integral_limit);
        }
        Ok(SimConfig {
            plant: self.plant.clone(),
            gravity_scale: self.gravity_scale,
            load: self.load,
            controller,
            settings: self.settings,
            t_end: self.t_end,
            cadence: self.cadence,
            initial: InitialCondition::State(q, qd),
        })
    }

    pub fn run(&self) -> CliResult<RunOutcome> {
        let config = self.sim_config()?;
        let trajectory = simulate(&config)?;
        let steady = steady_state_metrics(&trajectory, self.window)?;
        let start = trajectory.samples[0].q.clone();
        let relative_offset = match self.mode {
            SetpointMode::Position => Some(relative_offset(
                &steady.ss_error,
                &self.q_d,
                &start,
                &loaded_coordinates(self.sections()),
            )),
            SetpointMode::Velocity => None,
        };
        Ok(RunOutcome {
            peak_error: peak_error(&trajectory),
            zero_crossings: zero_crossings(&trajectory, CROSSING_DEADBAND),
            trajectory,
            steady,
            start,
            relative_offset,
        })
    }
}
