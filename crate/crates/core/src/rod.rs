//! Material, cross-section and medium description of a multisection rod, the
//! per-section screw tensors and the microsolid quadrature grid.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::se3::{Mat6, Pose, Vec6};

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    /// Young's modulus E, Pa.
    pub youngs_modulus: f64,
    /// Shear viscosity μ, Pa·s.
    pub shear_viscosity: f64,
    pub poisson_ratio: f64,
    /// Body density ρ, kg/m³.
    pub density: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            youngs_modulus: 110e3,
            shear_viscosity: 3e3,
            poisson_ratio: 0.45,
            density: 2000.0,
        }
    }
}

impl MaterialParams {
    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.youngs_modulus > 0.0 && self.youngs_modulus.is_finite()) {
            return Err(invalid(format!(
                "Young's modulus must be positive, got {}",
                self.youngs_modulus
            )));
        }
        if !(self.shear_viscosity >= 0.0 && self.shear_viscosity.is_finite()) {
            return Err(invalid(format!(
                "shear viscosity must be non-negative, got {}",
                self.shear_viscosity
            )));
        }
        if !(0.0..0.5).contains(&self.poisson_ratio) {
            return Err(invalid(format!(
                "Poisson ratio must lie in [0, 0.5), got {}",
                self.poisson_ratio
            )));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(invalid(format!(
                "density must be positive, got {}",
                self.density
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionGeometry {
    pub radius: f64,
    pub length: f64,
    pub microsolid_count: usize,
}

impl SectionGeometry {
    pub fn new(radius: f64, length: f64, microsolid_count: usize) -> Self {
        SectionGeometry {
            radius,
            length,
            microsolid_count,
        }
    }

    pub fn area(&self) -> f64 {
        PI * self.radius.powi(2)
    }

    /// Second moment of area about a transverse axis, `πr⁴/4`.
    pub fn bending_inertia(&self) -> f64 {
        PI * self.radius.powi(4) / 4.0
    }

    /// Polar moment `πr⁴/2`.
    pub fn polar_inertia(&self) -> f64 {
        PI * self.radius.powi(4) / 2.0
    }

    /// Zero-length sections are accepted as degenerate links that contribute
    /// the identity transform and no quadrature nodes.
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid(format!(
                "section radius must be positive, got {}",
                self.radius
            )));
        }
        if !(self.length >= 0.0 && self.length.is_finite()) {
            return Err(invalid(format!(
                "section length must be non-negative, got {}",
                self.length
            )));
        }
        if self.length > 0.0 && self.microsolid_count < 2 {
            return Err(invalid(format!(
                "at least 2 microsolids per section are required, got {}",
                self.microsolid_count
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MediumKind {
    Air,
    Water,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Medium {
    pub kind: MediumKind,
    /// Fluid density ρ_f, kg/m³.
    pub fluid_density: f64,
    pub drag_coefficient: f64,
    pub added_mass_factor: f64,
}

impl Medium {
    /// Sparse medium: every fluid term vanishes.
    pub fn air() -> Self {
        Medium {
            kind: MediumKind::Air,
            fluid_density: 0.0,
            drag_coefficient: 0.0,
            added_mass_factor: 0.0,
        }
    }

    pub fn water() -> Self {
        Medium {
            kind: MediumKind::Water,
            fluid_density: 997.0,
            drag_coefficient: 0.82,
            added_mass_factor: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            MediumKind::Air => {
                if self.fluid_density != 0.0
                    || self.drag_coefficient != 0.0
                    || self.added_mass_factor != 0.0
                {
                    return Err(invalid(
                        "air medium must have zero fluid density, drag and added mass".into(),
                    ));
                }
            }
            MediumKind::Water => {
                for (name, v) in [
                    ("fluid density", self.fluid_density),
                    ("drag coefficient", self.drag_coefficient),
                    ("added-mass factor", self.added_mass_factor),
                ] {
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(invalid(format!("{name} must be non-negative, got {v}")));
                    }
                }
            }
        }
        Ok(())
    }
}

impl Default for Medium {
    fn default() -> Self {
        Medium::air()
    }
}

/// Per-unit-length screw tensors of one section. All of them are diagonal
/// and are stored as their diagonals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScrewTensors {
    pub inertia: Vec6,
    pub added_mass: Vec6,
    pub stiffness: Vec6,
    pub viscosity: Vec6,
    pub drag: Vec6,
}

impl ScrewTensors {
    /// `ℳ_a = ℳ + ℳ_f`.
    pub fn apparent_inertia(&self) -> Vec6 {
        self.inertia + self.added_mass
    }

    pub fn inertia_matrix(&self) -> Mat6 {
        Mat6::from_diagonal(&self.inertia)
    }

    pub fn added_mass_matrix(&self) -> Mat6 {
        Mat6::from_diagonal(&self.added_mass)
    }

    pub fn stiffness_matrix(&self) -> Mat6 {
        Mat6::from_diagonal(&self.stiffness)
    }

    pub fn viscosity_matrix(&self) -> Mat6 {
        Mat6::from_diagonal(&self.viscosity)
    }

    pub fn drag_matrix(&self) -> Mat6 {
        Mat6::from_diagonal(&self.drag)
    }
}

pub fn build_screw_tensors(
    geom: &SectionGeometry,
    mat: &MaterialParams,
    med: &Medium,
) -> ScrewTensors {
    let a = geom.area();
    let ib = geom.bending_inertia();
    let ip = geom.polar_inertia();
    let e = mat.youngs_modulus;
    let g = mat.shear_modulus();
    let mu = mat.shear_viscosity;
    let rho_f = med.fluid_density;
    ScrewTensors {
        inertia: Vec6::new(ip, ib, ib, a, a, a) * mat.density,
        added_mass: Vec6::new(0.0, 0.0, 0.0, 0.0, a, a) * (med.added_mass_factor * rho_f),
        stiffness: Vec6::new(g * ip, e * ib, e * ib, e * a, g * a, g * a),
        viscosity: Vec6::new(ip, 3.0 * ib, 3.0 * ib, 3.0 * a, a, a) * mu,
        // ½ρ_f C_d times the projected width 2r on each lateral axis
        drag: Vec6::new(0.0, 0.0, 0.0, 0.0, 1.0, 1.0)
            * (rho_f * med.drag_coefficient * geom.radius),
    }
}

/// Rotation from the base frame to the inertial frame.
pub fn default_base_transform() -> Pose {
    Pose::new(
        Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0),
        Vector3::zeros(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct RodSpec {
    pub sections: Vec<SectionGeometry>,
    pub material: MaterialParams,
    pub medium: Medium,
    pub base_transform: Pose,
    /// Arclength X̄ at which the external point wrench acts.
    pub cable_point: f64,
}

impl RodSpec {
    /// `n` identical sections sharing `total_length`, with the load point at
    /// the tip.
    pub fn uniform(n: usize, radius: f64, total_length: f64, microsolids: usize) -> Self {
        let section = SectionGeometry::new(radius, total_length / n as f64, microsolids);
        RodSpec {
            sections: vec![section; n],
            material: MaterialParams::default(),
            medium: Medium::air(),
            base_transform: default_base_transform(),
            cable_point: total_length,
        }
    }

    /// Four sections of 41 microsolids, r = 0.1 m, L = 0.2 m, in air.
    pub fn reference() -> Self {
        RodSpec::uniform(4, 0.1, 0.2, 41)
    }

    pub fn with_medium(mut self, medium: Medium) -> Self {
        self.medium = medium;
        self
    }

    pub fn with_material(mut self, material: MaterialParams) -> Self {
        self.material = material;
        self
    }

    pub fn section_count(&self) -> usize {
        self.sections.len()
    }

    /// Dimension of the generalized coordinates, `6N`.
    pub fn dof(&self) -> usize {
        6 * self.sections.len()
    }

    pub fn total_length(&self) -> f64 {
        self.sections.iter().map(|s| s.length).sum()
    }

    /// Arclength at the start of every section.
    pub fn section_starts(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.sections
            .iter()
            .map(|s| {
                let start = acc;
                acc += s.length;
                start
            })
            .collect()
    }

    /// `1 − ρ_f/ρ`.
    pub fn buoyancy_factor(&self) -> f64 {
        1.0 - self.medium.fluid_density / self.material.density
    }

    pub fn screw_tensors(&self) -> Vec<ScrewTensors> {
        self.sections
            .iter()
            .map(|g| build_screw_tensors(g, &self.material, &self.medium))
            .collect()
    }

    /// Section index and local arclength for a point on the rod. Points on a
    /// boundary belong to the section that ends there.
    pub fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let total = self.total_length();
        if !(0.0..=total).contains(&x) || self.sections.is_empty() {
            return Err(Error::PointOutsideRod {
                point: x,
                length: total,
            });
        }
        let mut start = 0.0;
        for (i, s) in self.sections.iter().enumerate() {
            let end = start + s.length;
            if x <= end || i + 1 == self.sections.len() {
                return Ok((i, (x - start).clamp(0.0, s.length)));
            }
            start = end;
        }
        unreachable!()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sections.is_empty() {
            return Err(invalid("rod needs at least one section".into()));
        }
        for s in &self.sections {
            s.validate()?;
        }
        if self.total_length() <= 0.0 {
            return Err(invalid("rod has zero total length".into()));
        }
        self.material.validate()?;
        self.medium.validate()?;
        if self.base_transform.orthonormality_error() > 1e-9 {
            return Err(invalid("base transform rotation is not orthonormal".into()));
        }
        let total = self.total_length();
        if !(0.0..=total).contains(&self.cable_point) {
            return Err(Error::PointOutsideRod {
                point: self.cable_point,
                length: total,
            });
        }
        Ok(())
    }
}

/// Midpoint quadrature nodes over the whole rod.
#[derive(Clone, Debug, PartialEq)]
pub struct MicrosolidGrid {
    /// Global arclength of every node, strictly increasing.
    pub abscissae: Vec<f64>,
    pub weights: Vec<f64>,
    pub section: Vec<usize>,
    /// Arclength measured from the start of the owning section.
    pub local: Vec<f64>,
}

impl MicrosolidGrid {
    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }
}

pub fn discretize(rod: &RodSpec) -> MicrosolidGrid {
    let mut grid = MicrosolidGrid {
        abscissae: Vec::new(),
        weights: Vec::new(),
        section: Vec::new(),
        local: Vec::new(),
    };
    let mut start = 0.0;
    for (i, s) in rod.sections.iter().enumerate() {
        if s.length > 0.0 {
            let m = s.microsolid_count;
            let w = s.length / m as f64;
            for k in 0..m {
                let local = (k as f64 + 0.5) * w;
                grid.abscissae.push(start + local);
                grid.weights.push(w);
                grid.section.push(i);
                grid.local.push(local);
            }
        }
        start += s.length;
    }
    grid
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inertia_for_reference_section() {
        let geom = SectionGeometry::new(0.1, 0.05, 41);
        let t = build_screw_tensors(&geom, &MaterialParams::default(), &Medium::air());
        let expected = Vec6::new(
            PI * 1e-4 / 2.0,
            PI * 1e-4 / 4.0,
            PI * 1e-4 / 4.0,
            PI * 1e-2,
            PI * 1e-2,
            PI * 1e-2,
        ) * 2000.0;
        assert!((t.inertia - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn inviscid_and_air_limits() {
        let geom = SectionGeometry::new(0.1, 0.05, 41);
        let mat = MaterialParams {
            shear_viscosity: 0.0,
            ..Default::default()
        };
        let t = build_screw_tensors(&geom, &mat, &Medium::air());
        assert_eq!(t.viscosity, Vec6::zeros());
        assert_eq!(t.added_mass, Vec6::zeros());
        assert_eq!(t.drag, Vec6::zeros());
    }

    #[test]
    fn tensor_signs_and_torsion_softer_than_bending() {
        let geom = SectionGeometry::new(0.1, 0.05, 41);
        for &nu in &[0.0, 0.2, 0.45, 0.499] {
            let mat = MaterialParams {
                poisson_ratio: nu,
                ..Default::default()
            };
            let t = build_screw_tensors(&geom, &mat, &Medium::water());
            assert!(t.inertia.iter().all(|&v| v > 0.0));
            assert!(t.stiffness.iter().all(|&v| v > 0.0));
            assert!(t.viscosity.iter().all(|&v| v >= 0.0));
            assert!(t.added_mass.iter().all(|&v| v >= 0.0));
            assert!(t.drag.iter().all(|&v| v >= 0.0));
            // G·I_x < E·I_y because I_x = 2I_y and G < E/2 for ν > 0
            if nu > 0.0 {
                assert!(t.stiffness[0] < t.stiffness[1]);
            }
            assert!(mat.shear_modulus() < mat.youngs_modulus);
        }
    }

    #[test]
    fn water_tensors() {
        let geom = SectionGeometry::new(0.1, 0.05, 41);
        let t = build_screw_tensors(&geom, &MaterialParams::default(), &Medium::water());
        let a = PI * 0.01;
        assert!((t.added_mass[4] - 997.0 * a).abs() < 1e-12);
        assert_eq!(t.added_mass[3], 0.0);
        assert!((t.drag[5] - 997.0 * 0.82 * 0.1).abs() < 1e-12);
        assert_eq!(t.drag[3], 0.0);
    }

    #[test]
    fn midpoint_grid_single_section() {
        let rod = RodSpec::uniform(1, 0.1, 0.2, 2);
        let grid = discretize(&rod);
        assert_eq!(grid.len(), 2);
        assert!((grid.abscissae[0] - 0.05).abs() < 1e-15);
        assert!((grid.abscissae[1] - 0.15).abs() < 1e-15);
        assert_eq!(grid.weights, vec![0.1, 0.1]);
    }

    #[test]
    fn reference_grid() {
        let rod = RodSpec::reference();
        let grid = discretize(&rod);
        assert_eq!(grid.len(), 164);
        for i in 0..4 {
            let sum: f64 = grid
                .weights
                .iter()
                .zip(&grid.section)
                .filter(|(_, &s)| s == i)
                .map(|(w, _)| w)
                .sum();
            assert!((sum - 0.05).abs() < 1e-15);
        }
        let total: f64 = grid.weights.iter().sum();
        assert!((total - 0.2).abs() < 1e-14);
        assert!(grid.abscissae.windows(2).all(|w| w[0] < w[1]));
        assert!(grid.abscissae[0] > 0.0 && *grid.abscissae.last().unwrap() < 0.2);
    }

    #[test]
    fn zero_length_section_has_no_nodes() {
        let mut rod = RodSpec::reference();
        rod.sections.push(SectionGeometry::new(0.1, 0.0, 41));
        rod.validate().unwrap();
        let grid = discretize(&rod);
        assert_eq!(grid.len(), 164);
    }

    #[test]
    fn locate_points() {
        let rod = RodSpec::reference();
        let (i, s) = rod.locate(0.2).unwrap();
        assert_eq!(i, 3);
        assert!((s - 0.05).abs() < 1e-15);
        let (i, s) = rod.locate(0.05).unwrap();
        assert_eq!((i, s), (0, 0.05));
        let (i, _) = rod.locate(0.07).unwrap();
        assert_eq!(i, 1);
        assert!(matches!(
            rod.locate(0.21),
            Err(Error::PointOutsideRod { .. })
        ));
        assert!(rod.locate(-1e-9).is_err());
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let mut mat = MaterialParams::default();
        mat.poisson_ratio = 0.5;
        assert!(mat.validate().is_err());
        let mut med = Medium::air();
        med.fluid_density = 1.0;
        assert!(med.validate().is_err());
        let geom = SectionGeometry::new(0.1, 0.05, 1);
        assert!(geom.validate().is_err());
        let mut rod = RodSpec::reference();
        rod.cable_point = 0.3;
        assert!(rod.validate().is_err());
    }
}
