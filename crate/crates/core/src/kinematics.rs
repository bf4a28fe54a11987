//! Piecewise-constant-strain kinematics: frames, body-frame Jacobians, their
//! time rates and the twist field over the microsolid grid.
//!
//! Within section `n` at local arclength `s` the body Jacobian is
//! `J = Ad⁻¹_{exp(sξₙ)}·J_start + T_{ξₙ}(s)·Φₙ`, where `Φₙ` selects the strain
//! block of section `n`.

use nalgebra::{DVector, Matrix6xX};

use crate::error::{check_len, Error, Result};
use crate::rod::{discretize, MicrosolidGrid, RodSpec};
use crate::se3::{ad, adjoint_inv, exp_se3, AdPowers, Mat6, Pose, TangentCoefficients, Twist, Vec6};

pub type Jacobian = Matrix6xX<f64>;

/// Stacked section strains `q = [ξ₁ᵀ … ξ_Nᵀ]ᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub strains: Vec<Twist>,
}

impl Configuration {
    /// Every section at the reference strain.
    pub fn straight(sections: usize) -> Self {
        Configuration {
            strains: vec![Twist::reference_strain(); sections],
        }
    }

    pub fn from_vector(q: &DVector<f64>) -> Result<Self> {
        if q.len() % 6 != 0 {
            return Err(Error::DimensionMismatch {
                expected: 6 * (q.len() / 6 + 1),
                found: q.len(),
            });
        }
        Ok(Configuration {
            strains: (0..q.len() / 6)
                .map(|i| Twist(q.fixed_rows::<6>(6 * i).into_owned()))
                .collect(),
        })
    }

    pub fn to_vector(&self) -> DVector<f64> {
        let mut q = DVector::zeros(6 * self.strains.len());
        for (i, s) in self.strains.iter().enumerate() {
            q.fixed_rows_mut::<6>(6 * i).copy_from(&s.0);
        }
        q
    }
}

/// Inertial-frame poses at every quadrature node and at the tip.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameField {
    pub nodes: Vec<Pose>,
    pub tip: Pose,
}

/// Body-frame Jacobians at every quadrature node.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianField {
    pub nodes: Vec<Jacobian>,
}

/// State of the serial chain at the start of one section.
#[derive(Clone, Debug)]
pub(crate) struct SectionStart {
    /// Pose relative to the base frame.
    pub pose: Pose,
    pub jac: Jacobian,
    pub jac_rate: Jacobian,
    /// `J q̇` and `J̇ q̇` at the section start.
    pub twist: Vec6,
    pub bias: Vec6,
}

/// Per-node quantities that depend only on the owning section's strain.
pub(crate) struct LocalNode {
    pub exp: Pose,
    pub ad_inv: Mat6,
    pub tangent: Mat6,
    coeff: TangentCoefficients,
}

/// Section-by-section walk along the rod for one `(q, q̇)`.
pub(crate) struct Chain {
    pub strains: Vec<Twist>,
    pub rates: Vec<Vec6>,
    pub powers: Vec<AdPowers>,
    /// `N + 1` entries; the last one is the tip.
    pub starts: Vec<SectionStart>,
}

impl Chain {
    pub fn new(rod: &RodSpec, q: &DVector<f64>, qdot: Option<&DVector<f64>>) -> Result<Chain> {
        let n = rod.section_count();
        check_len(6 * n, q.len())?;
        if let Some(qd) = qdot {
            check_len(6 * n, qd.len())?;
        }
        let strains: Vec<Twist> = (0..n)
            .map(|i| Twist(q.fixed_rows::<6>(6 * i).into_owned()))
            .collect();
        let rates: Vec<Vec6> = (0..n)
            .map(|i| match qdot {
                Some(qd) => qd.fixed_rows::<6>(6 * i).into_owned(),
                None => Vec6::zeros(),
            })
            .collect();
        let powers: Vec<AdPowers> = strains.iter().map(AdPowers::new).collect();
        let mut chain = Chain {
            strains,
            rates,
            powers,
            starts: Vec::with_capacity(n + 1),
        };
        chain.starts.push(SectionStart {
            pose: Pose::identity(),
            jac: Jacobian::zeros(6 * n),
            jac_rate: Jacobian::zeros(6 * n),
            twist: Vec6::zeros(),
            bias: Vec6::zeros(),
        });
        for (i, sec) in rod.sections.iter().enumerate() {
            let s = sec.length;
            let local = chain.local(i, s);
            let start = &chain.starts[i];
            let next = SectionStart {
                pose: start.pose * local.exp,
                jac: chain.jacobian(i, s, &local),
                jac_rate: chain.jacobian_rate(i, s, &local),
                twist: chain.twist(i, &local),
                bias: chain.bias(i, s, &local),
            };
            chain.starts.push(next);
        }
        Ok(chain)
    }

    pub fn local(&self, n: usize, s: f64) -> LocalNode {
        let exp = exp_se3(&self.strains[n], s);
        let coeff = self.powers[n].coefficients(s);
        LocalNode {
            exp,
            ad_inv: adjoint_inv(&exp),
            tangent: self.powers[n].tangent_with(s, &coeff),
            coeff,
        }
    }

    /// Pose relative to the base frame.
    pub fn pose(&self, n: usize, local: &LocalNode) -> Pose {
        self.starts[n].pose * local.exp
    }

    pub fn jacobian(&self, n: usize, _s: f64, local: &LocalNode) -> Jacobian {
        let mut j = local.ad_inv * &self.starts[n].jac;
        let mut block = j.fixed_view_mut::<6, 6>(0, 6 * n);
        block += local.tangent;
        j
    }

    pub fn jacobian_rate(&self, n: usize, s: f64, local: &LocalNode) -> Jacobian {
        let start = &self.starts[n];
        let xi_dot = Twist(self.rates[n]);
        let transported = local.ad_inv * &start.jac;
        let mut jd = local.ad_inv * &start.jac_rate - ad(&Twist(local.tangent * xi_dot.0)) * transported;
        let mut block = jd.fixed_view_mut::<6, 6>(0, 6 * n);
        block += self.powers[n].tangent_derivative(s, &xi_dot);
        jd
    }

    /// `η = J q̇`.
    pub fn twist(&self, n: usize, local: &LocalNode) -> Vec6 {
        local.ad_inv * self.starts[n].twist + local.tangent * self.rates[n]
    }

    /// `J̇ q̇`.
    pub fn bias(&self, n: usize, s: f64, local: &LocalNode) -> Vec6 {
        let start = &self.starts[n];
        let xi_dot = Twist(self.rates[n]);
        let transported = local.ad_inv * start.twist;
        local.ad_inv * start.bias - ad(&Twist(local.tangent * xi_dot.0)) * transported
            + self.powers[n].tangent_derivative_apply_with(s, &local.coeff, &xi_dot, &xi_dot.0)
    }
}

pub fn forward_kinematics(rod: &RodSpec, q: &DVector<f64>) -> Result<FrameField> {
    let chain = Chain::new(rod, q, None)?;
    let grid = discretize(rod);
    let gr = rod.base_transform;
    let nodes = (0..grid.len())
        .map(|k| {
            let local = chain.local(grid.section[k], grid.local[k]);
            gr * chain.pose(grid.section[k], &local)
        })
        .collect();
    Ok(FrameField {
        nodes,
        tip: gr * chain.starts[rod.section_count()].pose,
    })
}

/// Inertial pose `g(X)` at an arbitrary arclength.
pub fn pose_at(rod: &RodSpec, q: &DVector<f64>, x: f64) -> Result<Pose> {
    let (n, s) = rod.locate(x)?;
    let chain = Chain::new(rod, q, None)?;
    Ok(rod.base_transform * chain.pose(n, &chain.local(n, s)))
}

pub fn jacobian_field(rod: &RodSpec, q: &DVector<f64>) -> Result<JacobianField> {
    let chain = Chain::new(rod, q, None)?;
    Ok(JacobianField {
        nodes: map_grid(rod, |n, s| chain.jacobian(n, s, &chain.local(n, s))),
    })
}

pub fn jacobian_at(rod: &RodSpec, q: &DVector<f64>, x: f64) -> Result<Jacobian> {
    let (n, s) = rod.locate(x)?;
    let chain = Chain::new(rod, q, None)?;
    Ok(chain.jacobian(n, s, &chain.local(n, s)))
}

/// `J̇(Xₖ)` at every node.
pub fn jacobian_rate(rod: &RodSpec, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<Vec<Jacobian>> {
    let chain = Chain::new(rod, q, Some(qdot))?;
    Ok(map_grid(rod, |n, s| {
        chain.jacobian_rate(n, s, &chain.local(n, s))
    }))
}

pub fn jacobian_rate_at(
    rod: &RodSpec,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    x: f64,
) -> Result<Jacobian> {
    let (n, s) = rod.locate(x)?;
    let chain = Chain::new(rod, q, Some(qdot))?;
    Ok(chain.jacobian_rate(n, s, &chain.local(n, s)))
}

/// `η(Xₖ) = J(Xₖ) q̇`.
pub fn twist_field(jac: &JacobianField, qdot: &DVector<f64>) -> Result<Vec<Twist>> {
    jac.nodes
        .iter()
        .map(|j| {
            check_len(j.ncols(), qdot.len())?;
            Ok(Twist(Vec6::from_iterator((j * qdot).iter().copied())))
        })
        .collect()
}

fn map_grid<T>(rod: &RodSpec, f: impl Fn(usize, f64) -> T) -> Vec<T> {
    let grid: MicrosolidGrid = discretize(rod);
    (0..grid.len())
        .map(|k| f(grid.section[k], grid.local[k]))
        .collect()
}
