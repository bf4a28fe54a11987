//! Generalized dynamics of the PCS rod,
//!
//! ```text
//! M(q) q̈ + [C1 + C2 + D] q̇ = u + τ_int + F + N(q)·Ad⁻¹_{g_r}𝒢
//! ```
//!
//! assembled by midpoint quadrature over the microsolid grid.
//!
//! Two assembly paths exist. [`Dynamics::terms`] forms every per-node
//! Jacobian explicitly and returns the individual matrices; it backs the
//! structural certificates. [`Dynamics::evaluate`] accumulates 6×6 sums per
//! section and maps them through the section-start Jacobian once, which is
//! what the simulator calls every stage.

use std::ops::AddAssign;

use nalgebra::{Cholesky, DMatrix, DVector, Vector3};

use crate::error::{check_len, Error, Result};
use crate::kinematics::{Chain, Jacobian};
use crate::rod::{discretize, MicrosolidGrid, RodSpec, ScrewTensors, GRAVITY};
use crate::se3::{ad, coad, Mat6, Pose, Twist, Vec6, Wrench};

/// Parameters per section in the regressor: diagonals of ℳ, ℳ_b, ℳ_f, Σ,
/// Υ and D̆.
pub const PARAMS_PER_SECTION: usize = 36;

/// Frame in which a point load is expressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadFrame {
    /// Fixed direction in the base frame (a dead load).
    Base,
    /// Follows the cross-section at the load point.
    Body,
}

/// External point wrench acting at the rod's load point `X̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TipLoad {
    pub wrench: Wrench,
    pub frame: LoadFrame,
}

impl TipLoad {
    pub fn none() -> Self {
        TipLoad {
            wrench: Wrench::zero(),
            frame: LoadFrame::Base,
        }
    }

    /// Pure force along a base-frame axis (0 = x, 1 = y, 2 = z).
    pub fn force(newtons: f64, axis: usize) -> Self {
        let mut f = Vector3::zeros();
        f[axis] = newtons;
        TipLoad {
            wrench: Wrench::new(Vector3::zeros(), f),
            frame: LoadFrame::Base,
        }
    }

    /// Body-frame wrench at a cross-section with base-relative pose `g`.
    pub fn body_wrench(&self, g: &Pose) -> Vec6 {
        match self.frame {
            LoadFrame::Body => self.wrench.0,
            LoadFrame::Base => {
                let rt = g.rotation.transpose();
                let m = rt * self.wrench.moment();
                let f = rt * self.wrench.force();
                Vec6::new(m.x, m.y, m.z, f.x, f.y, f.z)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.wrench.0.iter().all(|&v| v == 0.0)
    }
}

impl Default for TipLoad {
    fn default() -> Self {
        TipLoad::none()
    }
}

/// Every generalized term at one state.
#[derive(Clone, Debug)]
pub struct GeneralizedTerms {
    pub mass: DMatrix<f64>,
    pub coriolis1: DMatrix<f64>,
    pub coriolis2: DMatrix<f64>,
    pub drag: DMatrix<f64>,
    /// `N(q)`, 6N×6; multiplies `Ad⁻¹_{g_r}𝒢`.
    pub gravity_map: DMatrix<f64>,
    /// `N(q)·Ad⁻¹_{g_r}𝒢`.
    pub gravity: DVector<f64>,
    pub tip: DVector<f64>,
    pub internal: DVector<f64>,
}

/// Output of the fast assembly path.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub mass: DMatrix<f64>,
    /// `[C1 + C2 + D] q̇`.
    pub velocity_forces: DVector<f64>,
    pub gravity: DVector<f64>,
    pub tip: DVector<f64>,
    pub internal: DVector<f64>,
    /// Drag power `q̇ᵀ D q̇`.
    pub drag_power: f64,
}

impl Evaluation {
    /// Solve `M q̈ = u + τ_int + F + gravity_scale·G − [C1 + C2 + D]q̇`.
    pub fn acceleration(&self, u: &DVector<f64>, gravity_scale: f64) -> Result<DVector<f64>> {
        check_len(self.mass.nrows(), u.len())?;
        let rhs = u + &self.internal + &self.tip + &self.gravity * gravity_scale
            - &self.velocity_forces;
        solve_spd(&self.mass, rhs)
    }
}

pub fn solve_spd(m: &DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    let chol = Cholesky::new(m.clone()).ok_or(Error::SingularMass)?;
    Ok(chol.solve(&rhs))
}

/// A rod together with its derived tensors, quadrature grid and the
/// gravitational acceleration `𝒢` in the inertial frame.
#[derive(Clone, Debug)]
pub struct Dynamics {
    rod: RodSpec,
    tensors: Vec<ScrewTensors>,
    grid: MicrosolidGrid,
    gravity: Vec6,
}

/// Per-node data of the explicit path.
struct NodeData {
    section: usize,
    weight: f64,
    pose: Pose,
    jac: Jacobian,
    jac_rate: Jacobian,
    twist: Vec6,
}

impl Dynamics {
    pub fn new(rod: RodSpec) -> Result<Self> {
        rod.validate()?;
        let tensors = rod.screw_tensors();
        let grid = discretize(&rod);
        Ok(Dynamics {
            rod,
            tensors,
            grid,
            gravity: Vec6::new(0.0, 0.0, 0.0, -GRAVITY, 0.0, 0.0),
        })
    }

    /// Replace the inertial gravity twist `𝒢`.
    pub fn with_gravity(mut self, gravity: Vec6) -> Self {
        self.gravity = gravity;
        self
    }

    pub fn rod(&self) -> &RodSpec {
        &self.rod
    }

    pub fn tensors(&self) -> &[ScrewTensors] {
        &self.tensors
    }

    pub fn grid(&self) -> &MicrosolidGrid {
        &self.grid
    }

    pub fn gravity(&self) -> &Vec6 {
        &self.gravity
    }

    pub fn dof(&self) -> usize {
        self.rod.dof()
    }

    /// `Ad⁻¹_{g_r}𝒢`, gravity expressed in the base frame.
    pub fn base_gravity(&self) -> Vec6 {
        crate::se3::adjoint_inv(&self.rod.base_transform) * self.gravity
    }

    fn base_gravity_linear(&self) -> Vector3<f64> {
        self.base_gravity().fixed_rows::<3>(3).into_owned()
    }

    /// Body-frame gravitational acceleration at a cross-section with
    /// base-relative pose `g`.
    fn body_gravity(&self, g: &Pose) -> Vec6 {
        let a = g.rotation.transpose() * self.base_gravity_linear();
        Vec6::new(0.0, 0.0, 0.0, a.x, a.y, a.z)
    }

    fn nodes(&self, q: &DVector<f64>, qdot: Option<&DVector<f64>>) -> Result<Vec<NodeData>> {
        let chain = Chain::new(&self.rod, q, qdot)?;
        let grid = &self.grid;
        Ok((0..grid.len())
            .map(|k| {
                let (n, s) = (grid.section[k], grid.local[k]);
                let local = chain.local(n, s);
                NodeData {
                    section: n,
                    weight: grid.weights[k],
                    pose: chain.pose(n, &local),
                    jac: chain.jacobian(n, s, &local),
                    jac_rate: if qdot.is_some() {
                        chain.jacobian_rate(n, s, &local)
                    } else {
                        Jacobian::zeros(0)
                    },
                    twist: chain.twist(n, &local),
                }
            })
            .collect())
    }

    /// `Σ w Jᵀ·A·J` for a per-node 6×6 `A`.
    fn quadratic_sum(&self, nodes: &[NodeData], mut f: impl FnMut(&NodeData) -> Mat6) -> DMatrix<f64> {
        let dof = self.dof();
        let mut out = DMatrix::zeros(dof, dof);
        for node in nodes {
            let a = f(node) * node.weight;
            let aj = a * &node.jac;
            out.gemm_tr(1.0, &node.jac, &aj, 1.0);
        }
        out
    }

    pub fn mass_matrix(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(self.evaluate_with(q, None, &TipLoad::none())?.mass)
    }

    /// Mass matrix by explicit per-node Jacobians.
    pub fn mass_matrix_explicit(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        let nodes = self.nodes(q, None)?;
        Ok(self.quadratic_sum(&nodes, |n| {
            Mat6::from_diagonal(&self.tensors[n.section].apparent_inertia())
        }))
    }

    /// `C1 = Σ w Jᵀ(ℳ_a ad_η − ad_ηᵀ ℳ_a)J`, the skew-symmetric factorization
    /// of the gyroscopic term `−Jᵀ coad(η) ℳ_a η`.
    pub fn coriolis1(&self, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DMatrix<f64>> {
        let nodes = self.nodes(q, Some(qdot))?;
        Ok(self.coriolis1_from(&nodes))
    }

    fn coriolis1_from(&self, nodes: &[NodeData]) -> DMatrix<f64> {
        self.quadratic_sum(nodes, |n| {
            let m = Mat6::from_diagonal(&self.tensors[n.section].apparent_inertia());
            let a = ad(&Twist(n.twist));
            m * a - a.transpose() * m
        })
    }

    /// `C2 = Σ w Jᵀ ℳ_a J̇`.
    pub fn coriolis2(&self, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DMatrix<f64>> {
        let nodes = self.nodes(q, Some(qdot))?;
        Ok(self.coriolis2_from(&nodes))
    }

    fn coriolis2_from(&self, nodes: &[NodeData]) -> DMatrix<f64> {
        let dof = self.dof();
        let mut out = DMatrix::zeros(dof, dof);
        for n in nodes {
            let m = self.tensors[n.section].apparent_inertia() * n.weight;
            let mut mjd = n.jac_rate.clone();
            for (r, mut row) in mjd.row_iter_mut().enumerate() {
                row *= m[r];
            }
            out.gemm_tr(1.0, &n.jac, &mjd, 1.0);
        }
        out
    }

    /// `D = Σ w Jᵀ D̆ J ‖η_lin‖`; zero in air.
    pub fn drag_matrix(&self, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DMatrix<f64>> {
        let nodes = self.nodes(q, Some(qdot))?;
        Ok(self.drag_from(&nodes))
    }

    fn drag_from(&self, nodes: &[NodeData]) -> DMatrix<f64> {
        self.quadratic_sum(nodes, |n| {
            let speed = n.twist.fixed_rows::<3>(3).norm();
            Mat6::from_diagonal(&(self.tensors[n.section].drag * speed))
        })
    }

    /// `N(q) = (1 − ρ_f/ρ) Σ w Jᵀ ℳ Ad⁻¹_g`, with `g` the base-relative pose.
    pub fn gravity_map(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        let nodes = self.nodes(q, None)?;
        Ok(self.gravity_map_from(&nodes))
    }

    fn gravity_map_from(&self, nodes: &[NodeData]) -> DMatrix<f64> {
        let buoy = self.rod.buoyancy_factor();
        let mut out = DMatrix::zeros(self.dof(), 6);
        for n in nodes {
            let m = Mat6::from_diagonal(&self.tensors[n.section].inertia);
            let block = m * crate::se3::adjoint_inv(&n.pose) * (n.weight * buoy);
            out.gemm_tr(1.0, &n.jac, &block, 1.0);
        }
        out
    }

    /// Generalized gravity and buoyancy force `N(q)·Ad⁻¹_{g_r}𝒢`.
    pub fn gravity_buoyancy(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.evaluate_with(q, None, &TipLoad::none())?.gravity)
    }

    /// `J(X̄)ᵀ ℱ_p`, with `J` evaluated exactly at the load point.
    pub fn tip_force(&self, q: &DVector<f64>, load: &TipLoad) -> Result<DVector<f64>> {
        let chain = Chain::new(&self.rod, q, None)?;
        self.tip_force_from(&chain, load)
    }

    fn tip_force_from(&self, chain: &Chain, load: &TipLoad) -> Result<DVector<f64>> {
        if load.is_zero() {
            return Ok(DVector::zeros(self.dof()));
        }
        let (n, s) = self.rod.locate(self.rod.cable_point)?;
        let local = chain.local(n, s);
        let w = load.body_wrench(&chain.pose(n, &local));
        Ok(chain.jacobian(n, s, &local).tr_mul(&w))
    }

    /// Elastic part of the internal force, `−ℓᵢ Σ(ξᵢ − ξ₀)`.
    pub fn elastic_force(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.dof(), q.len())?;
        let xi0 = Twist::reference_strain().0;
        let mut out = DVector::zeros(self.dof());
        for (i, (sec, t)) in self.rod.sections.iter().zip(&self.tensors).enumerate() {
            let strain = q.fixed_rows::<6>(6 * i) - xi0;
            out.fixed_rows_mut::<6>(6 * i)
                .copy_from(&(-t.stiffness.component_mul(&strain) * sec.length));
        }
        Ok(out)
    }

    /// Viscous part of the internal force, `−ℓᵢ Υ ξ̇ᵢ`.
    pub fn viscous_force(&self, qdot: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.dof(), qdot.len())?;
        let mut out = DVector::zeros(self.dof());
        for (i, (sec, t)) in self.rod.sections.iter().zip(&self.tensors).enumerate() {
            let rate = qdot.fixed_rows::<6>(6 * i);
            out.fixed_rows_mut::<6>(6 * i)
                .copy_from(&(-t.viscosity.component_mul(&rate) * sec.length));
        }
        Ok(out)
    }

    /// `τ_int = −ℓᵢ [Σ(ξᵢ − ξ₀) + Υ ξ̇ᵢ]` per section.
    pub fn internal_force(&self, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.elastic_force(q)? + self.viscous_force(qdot)?)
    }

    /// Every generalized term, by explicit Jacobians.
    pub fn terms(&self, q: &DVector<f64>, qdot: &DVector<f64>, load: &TipLoad) -> Result<GeneralizedTerms> {
        let nodes = self.nodes(q, Some(qdot))?;
        let chain = Chain::new(&self.rod, q, None)?;
        let gravity_map = self.gravity_map_from(&nodes);
        let gravity = &gravity_map * self.base_gravity();
        Ok(GeneralizedTerms {
            mass: self.quadratic_sum(&nodes, |n| {
                Mat6::from_diagonal(&self.tensors[n.section].apparent_inertia())
            }),
            coriolis1: self.coriolis1_from(&nodes),
            coriolis2: self.coriolis2_from(&nodes),
            drag: self.drag_from(&nodes),
            gravity_map,
            gravity,
            tip: self.tip_force_from(&chain, load)?,
            internal: self.internal_force(q, qdot)?,
        })
    }

    /// Fast assembly of everything the forward dynamics needs.
    pub fn evaluate(&self, q: &DVector<f64>, qdot: &DVector<f64>, load: &TipLoad) -> Result<Evaluation> {
        self.evaluate_with(q, Some(qdot), load)
    }

    fn evaluate_with(
        &self,
        q: &DVector<f64>,
        qdot: Option<&DVector<f64>>,
        load: &TipLoad,
    ) -> Result<Evaluation> {
        let chain = Chain::new(&self.rod, q, qdot)?;
        let dof = self.dof();
        let mut mass = DMatrix::zeros(dof, dof);
        let mut velocity_forces = DVector::zeros(dof);
        let mut gravity = DVector::zeros(dof);
        let buoy = self.rod.buoyancy_factor();
        let g_base = self.base_gravity_linear();
        let has_drag = self.rod.medium.drag_coefficient != 0.0;
        let grid = &self.grid;
        let mut drag_power = 0.0;

        let mut k = 0;
        for n in 0..self.rod.section_count() {
            let t = &self.tensors[n];
            let ma = t.apparent_inertia();
            let start = &chain.starts[n];
            let start_rot_t = start.pose.rotation.transpose();

            let mut s1 = Mat6::zeros();
            let mut s2 = Mat6::zeros();
            let mut s3 = Mat6::zeros();
            let mut wv_start = Vec6::zeros();
            let mut wv_local = Vec6::zeros();
            let mut wg_start = Vec6::zeros();
            let mut wg_local = Vec6::zeros();

            while k < grid.len() && grid.section[k] == n {
                let w = grid.weights[k];
                let s = grid.local[k];
                let local = chain.local(n, s);
                let b = &local.ad_inv;
                let tg = &local.tangent;
                let mut mb = *b;
                let mut mt = *tg;
                for r in 0..6 {
                    let f = ma[r] * w;
                    for c in 0..6 {
                        mb[(r, c)] *= f;
                        mt[(r, c)] *= f;
                    }
                }
                s1 += b.tr_mul(&mb);
                s2 += b.tr_mul(&mt);
                s3 += tg.tr_mul(&mt);

                if qdot.is_some() {
                    let eta = chain.twist(n, &local);
                    let acc = chain.bias(n, s, &local);
                    let p = ma.component_mul(&eta);
                    let mut wrench = ma.component_mul(&acc) - coad(&Twist(eta)) * p;
                    if has_drag {
                        let speed = eta.fixed_rows::<3>(3).norm();
                        let dw = t.drag.component_mul(&eta) * speed;
                        drag_power += w * eta.dot(&dw);
                        wrench += dw;
                    }
                    wrench *= w;
                    wv_start += b.tr_mul(&wrench);
                    wv_local += tg.tr_mul(&wrench);
                }

                // gravity acts at the section's mass centre line
                let rot_t = local.exp.rotation.transpose() * start_rot_t;
                let a = rot_t * g_base;
                let mg = Vec6::new(0.0, 0.0, 0.0, a.x, a.y, a.z).component_mul(&t.inertia) * (w * buoy);
                wg_start += b.tr_mul(&mg);
                wg_local += tg.tr_mul(&mg);
                k += 1;
            }

            let c = 6 * n;
            let mut block = mass.fixed_view_mut::<6, 6>(c, c);
            block += s3;
            velocity_forces.fixed_rows_mut::<6>(c).add_assign(&wv_local);
            gravity.fixed_rows_mut::<6>(c).add_assign(&wg_local);
            if n > 0 {
                let j0 = start.jac.columns(0, c);
                let j0t_s1 = j0.tr_mul(&s1);
                let upper = j0t_s1 * j0;
                let mut m_up = mass.view_mut((0, 0), (c, c));
                m_up += upper;
                let cross = j0.tr_mul(&s2);
                mass.view_mut((0, c), (c, 6)).copy_from(&cross);
                mass.view_mut((c, 0), (6, c)).copy_from(&cross.transpose());
                let mut v_up = velocity_forces.rows_mut(0, c);
                v_up += j0.tr_mul(&wv_start);
                let mut g_up = gravity.rows_mut(0, c);
                g_up += j0.tr_mul(&wg_start);
            }
        }
        let mass = (&mass + mass.transpose()) * 0.5;
        Ok(Evaluation {
            mass,
            velocity_forces,
            gravity,
            tip: self.tip_force_from(&chain, load)?,
            internal: match qdot {
                Some(qd) => self.internal_force(q, qd)?,
                None => self.elastic_force(q)?,
            },
            drag_power,
        })
    }

    /// `q̈` from `M q̈ = u + τ_int + F + N·Ad⁻¹_{g_r}𝒢 − [C1 + C2 + D]q̇`.
    pub fn forward_dynamics(
        &self,
        q: &DVector<f64>,
        qdot: &DVector<f64>,
        u: &DVector<f64>,
        load: &TipLoad,
    ) -> Result<DVector<f64>> {
        self.evaluate(q, qdot, load)?.acceleration(u, 1.0)
    }

    pub fn kinetic_energy(&self, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<f64> {
        let m = self.mass_matrix(q)?;
        check_len(self.dof(), qdot.len())?;
        Ok(0.5 * qdot.dot(&(m * qdot)))
    }

    /// `U = Σ ½ℓᵢ(ξᵢ − ξ₀)ᵀΣ(ξᵢ − ξ₀)`.
    pub fn elastic_energy(&self, q: &DVector<f64>) -> Result<f64> {
        check_len(self.dof(), q.len())?;
        let xi0 = Twist::reference_strain().0;
        Ok(self
            .rod
            .sections
            .iter()
            .zip(&self.tensors)
            .enumerate()
            .map(|(i, (sec, t))| {
                let e = q.fixed_rows::<6>(6 * i) - xi0;
                0.5 * sec.length * e.dot(&t.stiffness.component_mul(&e))
            })
            .sum())
    }

    /// Potential of gravity and buoyancy, `−(1 − ρ_f/ρ) Σ w ρA ⟨g, p⟩`.
    pub fn gravity_potential(&self, q: &DVector<f64>) -> Result<f64> {
        let chain = Chain::new(&self.rod, q, None)?;
        let g = self.base_gravity_linear();
        let buoy = self.rod.buoyancy_factor();
        let grid = &self.grid;
        Ok((0..grid.len())
            .map(|k| {
                let n = grid.section[k];
                let p = chain.pose(n, &chain.local(n, grid.local[k])).position;
                -buoy * grid.weights[k] * self.tensors[n].inertia[3] * g.dot(&p)
            })
            .sum())
    }

    /// Potential of a base-frame point force, `−⟨f, p(X̄)⟩`. Body-frame
    /// loads and applied moments have none; their contribution is zero.
    pub fn tip_potential(&self, q: &DVector<f64>, load: &TipLoad) -> Result<f64> {
        if load.frame == LoadFrame::Body || load.is_zero() {
            check_len(self.dof(), q.len())?;
            return Ok(0.0);
        }
        let chain = Chain::new(&self.rod, q, None)?;
        let (n, s) = self.rod.locate(self.rod.cable_point)?;
        let p = chain.pose(n, &chain.local(n, s)).position;
        Ok(-load.wrench.force().dot(&p))
    }

    /// Parameter vector `Θ` matching [`Dynamics::regressor`].
    pub fn parameters(&self) -> DVector<f64> {
        let ratio = self.rod.medium.fluid_density / self.rod.material.density;
        let mut theta = DVector::zeros(PARAMS_PER_SECTION * self.rod.section_count());
        for (i, t) in self.tensors.iter().enumerate() {
            let blocks = [
                t.inertia,
                t.inertia * ratio,
                t.added_mass,
                t.stiffness,
                t.viscosity,
                t.drag,
            ];
            for (b, v) in blocks.iter().enumerate() {
                theta
                    .fixed_rows_mut::<6>(PARAMS_PER_SECTION * i + 6 * b)
                    .copy_from(v);
            }
        }
        theta
    }

    /// Regressor `Y(q, q̇, q̈)` and parameters `Θ` with
    ///
    /// ```text
    /// Y Θ = M q̈ + [C1 + C2 + D] q̇ − N·Ad⁻¹_{g_r}𝒢 − τ_int,
    /// ```
    ///
    /// which the equations of motion equate to `u + F`.
    pub fn regressor(
        &self,
        q: &DVector<f64>,
        qdot: &DVector<f64>,
        qddot: &DVector<f64>,
    ) -> Result<(DMatrix<f64>, DVector<f64>)> {
        check_len(self.dof(), qddot.len())?;
        let nodes = self.nodes(q, Some(qdot))?;
        let nsec = self.rod.section_count();
        let mut y = DMatrix::zeros(self.dof(), PARAMS_PER_SECTION * nsec);
        for node in &nodes {
            let base = PARAMS_PER_SECTION * node.section;
            let w = node.weight;
            let eta = node.twist;
            let acc = &node.jac * qddot + &node.jac_rate * qdot;
            let coad_eta = coad(&Twist(eta));
            let gb = self.body_gravity(&node.pose);
            let speed = eta.fixed_rows::<3>(3).norm();
            for i in 0..6 {
                // Jᵀ e_i
                let ji = node.jac.row(i).transpose();
                // Jᵀ coad(η) e_i
                let jc = node.jac.tr_mul(&coad_eta.column(i));
                let inertial = &ji * (w * acc[i]) - jc * (w * eta[i]);
                let grav = &ji * (w * gb[i]);
                let mut col = y.column_mut(base + i);
                col += &inertial - &grav;
                let mut col = y.column_mut(base + 6 + i);
                col += &grav;
                let mut col = y.column_mut(base + 12 + i);
                col += &inertial;
                let mut col = y.column_mut(base + 30 + i);
                col += &ji * (w * eta[i] * speed);
            }
        }
        let xi0 = Twist::reference_strain().0;
        for (s, sec) in self.rod.sections.iter().enumerate() {
            let base = PARAMS_PER_SECTION * s;
            for i in 0..6 {
                let row = 6 * s + i;
                y[(row, base + 18 + i)] = sec.length * (q[row] - xi0[i]);
                y[(row, base + 24 + i)] = sec.length * qdot[row];
            }
        }
        Ok((y, self.parameters()))
    }
}
