//! SE(3) kernel used by the strain parameterization.
//!
//! Twists and wrenches are flat 6-vectors with the angular (moment) part in
//! slots `0..3` and the linear (force) part in slots `3..6`. The unit-stretch
//! reference strain is therefore `[0, 0, 0, 1, 0, 0]`.
//!
//! Every function here is a pure function of its inputs.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3, Vector6};

use crate::error::{Error, Result};

pub type Mat6 = Matrix6<f64>;
pub type Vec6 = Vector6<f64>;

/// Tolerance used by [`vee`] to accept a 4x4 matrix as an element of se(3).
pub const SE3_MATRIX_TOL: f64 = 1e-12;

/// Below this value of `|ω|·s` the exponential and tangent coefficients are
/// evaluated from their power series.
const SERIES_THRESHOLD: f64 = 1.0;
const SERIES_TERMS: usize = 14;

/// Element of se(3) in coordinates `[ω, ν]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Twist(pub Vec6);

/// Dual of a twist, `[moment, force]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wrench(pub Vec6);

impl Twist {
    pub fn new(angular: Vector3<f64>, linear: Vector3<f64>) -> Self {
        Twist(Vec6::new(
            angular.x, angular.y, angular.z, linear.x, linear.y, linear.z,
        ))
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Twist(Vec6::from_row_slice(&v))
    }

    pub fn zero() -> Self {
        Twist(Vec6::zeros())
    }

    /// Undeformed strain: unit stretch along the body x axis.
    pub fn reference_strain() -> Self {
        Twist::from_array([0.0, 0.0, 0.0, 1.0, 0.0, 0.0])
    }

    pub fn angular(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(0).into_owned()
    }

    pub fn linear(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(3).into_owned()
    }

    pub fn as_vector(&self) -> &Vec6 {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

impl Add for Twist {
    type Output = Twist;
    fn add(self, rhs: Twist) -> Twist {
        Twist(self.0 + rhs.0)
    }
}

impl Sub for Twist {
    type Output = Twist;
    fn sub(self, rhs: Twist) -> Twist {
        Twist(self.0 - rhs.0)
    }
}

impl Neg for Twist {
    type Output = Twist;
    fn neg(self) -> Twist {
        Twist(-self.0)
    }
}

impl Mul<f64> for Twist {
    type Output = Twist;
    fn mul(self, rhs: f64) -> Twist {
        Twist(self.0 * rhs)
    }
}

impl Wrench {
    pub fn new(moment: Vector3<f64>, force: Vector3<f64>) -> Self {
        Wrench(Vec6::new(
            moment.x, moment.y, moment.z, force.x, force.y, force.z,
        ))
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Wrench(Vec6::from_row_slice(&v))
    }

    pub fn zero() -> Self {
        Wrench(Vec6::zeros())
    }

    pub fn moment(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(0).into_owned()
    }

    pub fn force(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(3).into_owned()
    }

    /// Power pairing with a twist.
    pub fn dot(&self, twist: &Twist) -> f64 {
        self.0.dot(&twist.0)
    }
}

impl Mul<f64> for Wrench {
    type Output = Wrench;
    fn mul(self, rhs: f64) -> Wrench {
        Wrench(self.0 * rhs)
    }
}

/// Rigid transform `(R, p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub position: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Matrix3<f64>, position: Vector3<f64>) -> Self {
        Pose { rotation, position }
    }

    pub fn identity() -> Self {
        Pose::new(Matrix3::identity(), Vector3::zeros())
    }

    pub fn from_matrix(m: &Matrix4<f64>) -> Self {
        Pose::new(
            m.fixed_view::<3, 3>(0, 0).into_owned(),
            m.fixed_view::<3, 1>(0, 3).into_owned(),
        )
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        m
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose::new(rt, -(rt * self.position))
    }

    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(
            self.rotation * other.rotation,
            self.rotation * other.position + self.position,
        )
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.position
    }

    /// Largest deviation of `R` from SO(3): `max(‖RᵀR − I‖_F, |det R − 1|)`.
    pub fn orthonormality_error(&self) -> f64 {
        let r = &self.rotation;
        let ortho = (r.transpose() * r - Matrix3::identity()).norm();
        ortho.max((r.determinant() - 1.0).abs())
    }
}

impl Mul for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn hat(v: &Twist) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(&v.angular()));
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&v.linear());
    m
}

pub fn vee(m: &Matrix4<f64>) -> Result<Twist> {
    let w = m.fixed_view::<3, 3>(0, 0);
    let asym = (w + w.transpose()).abs().max();
    if asym > SE3_MATRIX_TOL {
        return Err(Error::NonSe3Matrix(format!(
            "rotation block is not antisymmetric (residual {asym:e})"
        )));
    }
    let diag = w.diagonal().abs().max();
    if diag > SE3_MATRIX_TOL {
        return Err(Error::NonSe3Matrix(format!(
            "rotation block has nonzero diagonal ({diag:e})"
        )));
    }
    let bottom = m.row(3).abs().max();
    if bottom > SE3_MATRIX_TOL {
        return Err(Error::NonSe3Matrix(format!(
            "bottom row is not zero ({bottom:e})"
        )));
    }
    Ok(Twist::new(
        Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]),
        Vector3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]),
    ))
}

/// Coefficients `sin x / x`, `(1 − cos x)/x²`, `(x − sin x)/x³`.
fn rodrigues_coefficients(x: f64) -> (f64, f64, f64) {
    if x < 1e-3 {
        let x2 = x * x;
        (
            1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0)),
            0.5 - x2 / 24.0 * (1.0 - x2 / 30.0 * (1.0 - x2 / 56.0)),
            1.0 / 6.0 - x2 / 120.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)),
        )
    } else {
        let (s, c) = x.sin_cos();
        (s / x, (1.0 - c) / (x * x), (x - s) / (x * x * x))
    }
}

/// `exp(hat(v)·arclen)` in closed form.
pub fn exp_se3(v: &Twist, arclen: f64) -> Pose {
    let w = v.angular() * arclen;
    let u = v.linear() * arclen;
    let x = w.norm();
    let (a, b, c) = rodrigues_coefficients(x);
    let wx = skew(&w);
    let wx2 = wx * wx;
    let rotation = Matrix3::identity() + wx * a + wx2 * b;
    let left_jacobian = Matrix3::identity() + wx * b + wx2 * c;
    Pose::new(rotation, left_jacobian * u)
}

/// `Ad_g = [[R, 0], [p̂R, R]]`.
pub fn adjoint(g: &Pose) -> Mat6 {
    let r = g.rotation;
    let mut m = Mat6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&r);
    m.fixed_view_mut::<3, 3>(3, 0)
        .copy_from(&(skew(&g.position) * r));
    m
}

/// `Ad_g⁻¹ = Ad_{g⁻¹} = [[Rᵀ, 0], [−Rᵀp̂, Rᵀ]]`, assembled from the inverse
/// transform directly.
pub fn adjoint_inv(g: &Pose) -> Mat6 {
    let rt = g.rotation.transpose();
    let mut m = Mat6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rt);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&rt);
    m.fixed_view_mut::<3, 3>(3, 0)
        .copy_from(&(-(rt * skew(&g.position))));
    m
}

/// Little adjoint `ad_v = [[ω̂, 0], [ν̂, ω̂]]`, so that `ad_v w = [v, w]`.
pub fn ad(v: &Twist) -> Mat6 {
    let w = skew(&v.angular());
    let mut m = Mat6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&w);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&w);
    m.fixed_view_mut::<3, 3>(3, 0)
        .copy_from(&skew(&v.linear()));
    m
}

/// Coadjoint action on wrenches, `ad(v)ᵀ`: `⟨coad(v) w, u⟩ = ⟨w, ad(v) u⟩`.
///
/// The rigid-body inertial force in body coordinates reads
/// `ℳ η̇ − coad(η) ℳ η`.
pub fn coad(v: &Twist) -> Mat6 {
    ad(v).transpose()
}

/// Scalar coefficients of the tangent operator and of its sensitivity.
///
/// With `x = |ω|·s`, `A = ad_v`,
///
/// ```text
/// T(s) = s·I − s²f₁A + s³f₂A² − s⁴f₃A³ + s⁵f₄A⁴
/// ```
///
/// and `g_i(x) = f_i'(x)/x`, which stays bounded as `x → 0`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct TangentCoefficients {
    f: [f64; 4],
    g: [f64; 4],
}

const fn factorial(n: usize) -> f64 {
    let mut acc = 1.0;
    let mut k = 2;
    while k <= n {
        acc *= k as f64;
        k += 1;
    }
    acc
}

/// Taylor coefficients of `f_i` in powers of `x²`.
const F_SERIES: [[f64; SERIES_TERMS]; 4] = f_series();
/// Taylor coefficients of `g_i = f_i'(x)/x` in powers of `x²`.
const G_SERIES: [[f64; SERIES_TERMS]; 4] = g_series();

const fn f_series() -> [[f64; SERIES_TERMS]; 4] {
    let mut out = [[0.0; SERIES_TERMS]; 4];
    let mut k = 0;
    while k < SERIES_TERMS {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        out[0][k] = sign * (2.0 - 2.0 * kf) / (2.0 * factorial(2 * k + 2));
        out[1][k] = -sign * (2.0 * kf - 2.0) / (2.0 * factorial(2 * k + 3));
        out[2][k] = sign * (2.0 * kf + 2.0) / (2.0 * factorial(2 * k + 4));
        out[3][k] = sign * (2.0 * kf + 2.0) / (2.0 * factorial(2 * k + 5));
        k += 1;
    }
    out
}

const fn g_series() -> [[f64; SERIES_TERMS]; 4] {
    let f = f_series();
    let mut out = [[0.0; SERIES_TERMS]; 4];
    let mut i = 0;
    while i < 4 {
        let mut k = 0;
        while k + 1 < SERIES_TERMS {
            out[i][k] = 2.0 * (k + 1) as f64 * f[i][k + 1];
            k += 1;
        }
        i += 1;
    }
    out
}

impl TangentCoefficients {
    fn new(x: f64) -> Self {
        if x < SERIES_THRESHOLD {
            Self::series(x)
        } else {
            Self::closed_form(x)
        }
    }

    fn series(x: f64) -> Self {
        let x2 = x * x;
        let mut f = [0.0; 4];
        let mut g = [0.0; 4];
        for i in 0..4 {
            let mut fa = 0.0;
            let mut ga = 0.0;
            for k in (0..SERIES_TERMS).rev() {
                fa = fa * x2 + F_SERIES[i][k];
                ga = ga * x2 + G_SERIES[i][k];
            }
            f[i] = fa;
            g[i] = ga;
        }
        TangentCoefficients { f, g }
    }

    fn closed_form(x: f64) -> Self {
        let (s, c) = x.sin_cos();
        let n1 = 4.0 - 4.0 * c - x * s;
        let n2 = 4.0 * x - 5.0 * s + x * c;
        let n3 = 2.0 - 2.0 * c - x * s;
        let n4 = 2.0 * x - 3.0 * s + x * c;
        let x2 = x * x;
        let x3 = x2 * x;
        let x4 = x3 * x;
        let x5 = x4 * x;
        let x6 = x5 * x;
        let x7 = x6 * x;
        TangentCoefficients {
            f: [
                n1 / (2.0 * x2),
                n2 / (2.0 * x3),
                n3 / (2.0 * x4),
                n4 / (2.0 * x5),
            ],
            g: [
                ((3.0 * s - x * c) * x - 2.0 * n1) / (2.0 * x4),
                (n1 * x - 3.0 * n2) / (2.0 * x5),
                ((s - x * c) * x - 4.0 * n3) / (2.0 * x6),
                (n3 * x - 5.0 * n4) / (2.0 * x7),
            ],
        }
    }
}

const TANGENT_SIGNS: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];

/// Powers `ad_v⁰ … ad_v⁴` of a fixed twist, reused for every arclength along
/// a section of constant strain.
#[derive(Clone, Debug)]
pub struct AdPowers {
    twist: Twist,
    powers: [Mat6; 5],
}

impl AdPowers {
    pub fn new(v: &Twist) -> Self {
        let a = ad(v);
        let a2 = a * a;
        let a3 = a2 * a;
        let a4 = a3 * a;
        AdPowers {
            twist: *v,
            powers: [Mat6::identity(), a, a2, a3, a4],
        }
    }

    pub fn twist(&self) -> &Twist {
        &self.twist
    }

    pub(crate) fn coefficients(&self, s: f64) -> TangentCoefficients {
        TangentCoefficients::new(self.twist.angular().norm() * s.abs())
    }

    /// `T_v(s) = ∫₀^s Ad⁻¹_{exp(r v̂)} dr`.
    pub fn tangent(&self, s: f64) -> Mat6 {
        self.tangent_with(s, &self.coefficients(s))
    }

    pub(crate) fn tangent_with(&self, s: f64, coeff: &TangentCoefficients) -> Mat6 {
        let mut t = self.powers[0] * s;
        let mut sp = s;
        for i in 0..4 {
            sp *= s;
            t += self.powers[i + 1] * (TANGENT_SIGNS[i] * sp * coeff.f[i]);
        }
        t
    }

    /// Directional derivative of [`AdPowers::tangent`] with respect to the
    /// twist, along `delta`.
    pub fn tangent_derivative(&self, s: f64, delta: &Twist) -> Mat6 {
        let da = ad(delta);
        let a = &self.powers;
        // d(Aⁱ)[Ȧ] = Σⱼ Aʲ Ȧ A^{i−1−j}
        let d1 = da;
        let d2 = da * a[1] + a[1] * da;
        let d3 = da * a[2] + a[1] * da * a[1] + a[2] * da;
        let d4 = da * a[3] + a[1] * da * a[2] + a[2] * da * a[1] + a[3] * da;
        let dpow = [d1, d2, d3, d4];
        let coeff = self.coefficients(s);
        self.tangent_derivative_with(s, &coeff, delta, Mat6::zeros(), |i| dpow[i], |i| a[i + 1])
    }

    /// `(∂T/∂v)[delta] · x` without forming the 6×6 derivative.
    pub fn tangent_derivative_apply(&self, s: f64, delta: &Twist, x: &Vec6) -> Vec6 {
        self.tangent_derivative_apply_with(s, &self.coefficients(s), delta, x)
    }

    pub(crate) fn tangent_derivative_apply_with(
        &self,
        s: f64,
        coeff: &TangentCoefficients,
        delta: &Twist,
        x: &Vec6,
    ) -> Vec6 {
        let da = ad(delta);
        let a = &self.powers;
        let y = [x.clone_owned(), a[1] * x, a[2] * x, a[3] * x];
        let z = [da * y[0], da * y[1], da * y[2], da * y[3]];
        let d = [
            z[0],
            z[1] + a[1] * z[0],
            z[2] + a[1] * z[1] + a[2] * z[0],
            z[3] + a[1] * z[2] + a[2] * z[1] + a[3] * z[0],
        ];
        let p = [a[1] * x, y[2], y[3], a[4] * x];
        self.tangent_derivative_with(s, coeff, delta, Vec6::zeros(), |i| d[i], |i| p[i])
    }

    fn tangent_derivative_with<T, F, G>(
        &self,
        s: f64,
        coeff: &TangentCoefficients,
        delta: &Twist,
        zero: T,
        dpow: F,
        pow: G,
    ) -> T
    where
        T: AddAssign + Mul<f64, Output = T> + Copy,
        F: Fn(usize) -> T,
        G: Fn(usize) -> T,
    {
        let wdw = self.twist.angular().dot(&delta.angular());
        let mut out = zero;
        let mut sp = s;
        for i in 0..4 {
            sp *= s; // s^{i+2}
            let scale = TANGENT_SIGNS[i] * sp;
            out += dpow(i) * (scale * coeff.f[i]);
            out += pow(i) * (scale * s * s * coeff.g[i] * wdw);
        }
        out
    }
}

/// `T_v(ℓ) = ∫₀^ℓ Ad⁻¹_{exp(s v̂)} ds`, the operator that maps a strain rate
/// to the body twist it produces at arclength `ℓ`.
pub fn exp_tangent(v: &Twist, arclen: f64) -> Mat6 {
    AdPowers::new(v).tangent(arclen)
}

/// Sensitivity of [`exp_tangent`] to the twist along `delta`.
pub fn exp_tangent_derivative(v: &Twist, arclen: f64, delta: &Twist) -> Mat6 {
    AdPowers::new(v).tangent_derivative(arclen, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_twist(rng: &mut ChaCha8Rng, scale: f64) -> Twist {
        Twist(Vec6::from_fn(|_, _| rng.random_range(-scale..scale)))
    }

    fn random_pose(rng: &mut ChaCha8Rng) -> Pose {
        exp_se3(&random_twist(rng, 2.0), 1.0)
    }

    fn matrix_exp_series(m: &Matrix4<f64>, terms: usize) -> Matrix4<f64> {
        let mut sum = Matrix4::identity();
        let mut term = Matrix4::identity();
        for k in 1..terms {
            term = term * m / k as f64;
            sum += term;
        }
        sum
    }

    /// Composite Gauss–Legendre (5 points per panel) of `s ↦ Ad⁻¹_{exp(s v)}`.
    fn tangent_quadrature(v: &Twist, len: f64, panels: usize) -> Mat6 {
        let nodes = [
            0.0,
            -0.538_469_310_105_683,
            0.538_469_310_105_683,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        let weights = [
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
            0.236_926_885_056_189,
        ];
        let h = len / panels as f64;
        let mut acc = Mat6::zeros();
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in nodes.iter().zip(weights.iter()) {
                let s = mid + 0.5 * h * x;
                acc += adjoint_inv(&exp_se3(v, s)) * (0.5 * h * w);
            }
        }
        acc
    }

    #[test]
    fn hat_examples() {
        assert_eq!(hat(&Twist::zero()), Matrix4::zeros());
        let m = hat(&Twist::reference_strain());
        let mut expected = Matrix4::zeros();
        expected[(0, 3)] = 1.0;
        assert_eq!(m, expected);
    }

    #[test]
    fn vee_examples() {
        assert_eq!(vee(&Matrix4::zeros()).unwrap(), Twist::zero());
        let xi0 = Twist::reference_strain();
        assert_eq!(vee(&hat(&xi0)).unwrap(), xi0);
    }

    #[test]
    fn vee_rejects_non_algebra_matrices() {
        let mut m = hat(&Twist::from_array([0.1, 0.2, 0.3, 1.0, 2.0, 3.0]));
        m[(0, 1)] += 1e-6;
        assert!(matches!(vee(&m), Err(Error::NonSe3Matrix(_))));
        let mut m = Matrix4::zeros();
        m[(3, 3)] = 1.0;
        assert!(matches!(vee(&m), Err(Error::NonSe3Matrix(_))));
        let mut m = Matrix4::zeros();
        m[(1, 1)] = 0.5;
        assert!(vee(&m).is_err());
    }

    #[test]
    fn hat_vee_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let v = random_twist(&mut rng, 10.0);
            assert_eq!(vee(&hat(&v)).unwrap(), v);
            let m = hat(&v);
            assert_eq!(hat(&vee(&m).unwrap()), m);
        }
    }

    #[test]
    fn exp_zero_arclength_is_identity() {
        let v = Twist::from_array([1.0, -2.0, 0.5, 1.0, 0.2, 0.3]);
        let g = exp_se3(&v, 0.0);
        assert_eq!(g.rotation, Matrix3::identity());
        assert_eq!(g.position, Vector3::zeros());
    }

    #[test]
    fn exp_pure_stretch_is_translation() {
        let g = exp_se3(&Twist::reference_strain(), 0.2);
        assert_eq!(g.rotation, Matrix3::identity());
        assert!((g.position - Vector3::new(0.2, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn exp_matches_truncated_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let v = random_twist(&mut rng, 5.0);
            let len: f64 = rng.random_range(0.0..1.0);
            // keep ‖v‖ℓ ≤ π
            let len = len.min(std::f64::consts::PI / v.norm());
            let g = exp_se3(&v, len);
            // 20 terms leave a remainder of π²⁰/20! ≈ 4e-9 at the boundary
            let series = matrix_exp_series(&(hat(&v) * len), 30);
            worst = worst.max((g.to_matrix() - series).norm());
            assert!(g.orthonormality_error() < 1e-9);
        }
        assert!(worst < 1e-10, "worst {worst:e}");
    }

    #[test]
    fn exp_small_angle_branch_is_continuous() {
        let dir = Twist::from_array([0.3, -0.4, 0.5, 1.0, 0.1, -0.2]);
        for &eps in &[1e-12, 1e-9, 1e-6, 9.99e-4, 1.001e-3, 1e-2] {
            let v = Twist::new(dir.angular() * eps, dir.linear());
            let g = exp_se3(&v, 1.0);
            let series = matrix_exp_series(&hat(&v), 20);
            assert!((g.to_matrix() - series).norm() < 1e-14, "eps {eps}");
        }
    }

    #[test]
    fn adjoint_of_identity() {
        assert_eq!(adjoint(&Pose::identity()), Mat6::identity());
        assert_eq!(adjoint_inv(&Pose::identity()), Mat6::identity());
    }

    #[test]
    fn adjoint_of_base_transform() {
        let r = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let gr = Pose::new(r, Vector3::zeros());
        let a = adjoint(&gr);
        let mut expected = Mat6::zeros();
        expected.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
        expected.fixed_view_mut::<3, 3>(3, 3).copy_from(&r);
        assert_eq!(a, expected);
        assert!((adjoint_inv(&gr) * a - Mat6::identity()).norm() < 1e-15);
    }

    #[test]
    fn adjoint_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let g1 = random_pose(&mut rng);
            let g2 = random_pose(&mut rng);
            let lhs = adjoint(&(g1 * g2));
            let rhs = adjoint(&g1) * adjoint(&g2);
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn adjoint_inverse_is_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let g = random_pose(&mut rng);
            assert!((adjoint(&g) * adjoint_inv(&g) - Mat6::identity()).norm() < 1e-10);
            assert!((adjoint_inv(&g) - adjoint(&g.inverse())).norm() < 1e-12);
        }
    }

    #[test]
    fn little_adjoint_basics() {
        assert_eq!(ad(&Twist::zero()), Mat6::zeros());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let v = random_twist(&mut rng, 3.0);
            let w = random_twist(&mut rng, 3.0);
            assert!((ad(&v) * v.0).norm() < 1e-12);
            assert!((ad(&v) * w.0 + ad(&w) * v.0).norm() < 1e-12);
        }
    }

    #[test]
    fn little_adjoint_is_derivative_of_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = 1e-5;
        for _ in 0..100 {
            let v = random_twist(&mut rng, 2.0);
            let fd = (adjoint(&exp_se3(&v, h)) - adjoint(&exp_se3(&v, -h))) / (2.0 * h);
            assert!((fd - ad(&v)).norm() < 1e-6 * (1.0 + ad(&v).norm()));
        }
    }

    #[test]
    fn little_adjoint_matches_matrix_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let v = random_twist(&mut rng, 2.0);
            let w = random_twist(&mut rng, 2.0);
            let bracket = hat(&v) * hat(&w) - hat(&w) * hat(&v);
            let lhs = hat(&Twist(ad(&v) * w.0));
            assert!((lhs - bracket).norm() < 1e-12);
        }
    }

    #[test]
    fn coadjoint_duality() {
        assert_eq!(coad(&Twist::zero()), Mat6::zeros());
        let xi0 = Twist::reference_strain();
        assert_eq!(coad(&xi0), ad(&xi0).transpose());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let v = random_twist(&mut rng, 2.0);
            let u = random_twist(&mut rng, 2.0);
            let w = Wrench(random_twist(&mut rng, 2.0).0);
            let lhs = (coad(&v) * w.0).dot(&u.0);
            let rhs = w.0.dot(&(ad(&v) * u.0));
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn tangent_at_zero_is_zero() {
        let v = Twist::from_array([1.0, 2.0, 3.0, 1.0, 0.0, 0.0]);
        assert_eq!(exp_tangent(&v, 0.0), Mat6::zeros());
    }

    #[test]
    fn tangent_of_reference_strain_matches_quadrature() {
        let v = Twist::reference_strain();
        let t = exp_tangent(&v, 0.2);
        // 64 Gauss points
        let q = tangent_quadrature(&v, 0.2, 13);
        assert!((t - q).norm() < 1e-12);
        // pure translation: T = ℓI − ℓ²/2 ad(ξ₀)
        let closed = Mat6::identity() * 0.2 - ad(&v) * 0.02;
        assert!((t - closed).norm() < 1e-15);
    }

    #[test]
    fn tangent_matches_quadrature_and_riemann_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let v = random_twist(&mut rng, 8.0);
            let len = rng.random_range(0.0..0.5);
            let t = exp_tangent(&v, len);
            let q = tangent_quadrature(&v, len, 40);
            assert!((t - q).norm() < 1e-10, "quadrature {:e}", (t - q).norm());
            let n = 10_000;
            let h = len / n as f64;
            let mut riemann = Mat6::zeros();
            for k in 0..n {
                riemann += adjoint_inv(&exp_se3(&v, (k as f64 + 0.5) * h)) * h;
            }
            assert!((t - riemann).norm() < 1e-8 * (1.0 + t.norm()));
        }
    }

    #[test]
    fn tangent_branches_agree_near_threshold() {
        let dir = Twist::from_array([0.6, -0.8, 0.0, 1.0, 0.3, -0.1]);
        for &x in &[0.999_999, 1.000_001] {
            let v = Twist::new(dir.angular() * x, dir.linear());
            let q = tangent_quadrature(&v, 1.0, 40);
            assert!((exp_tangent(&v, 1.0) - q).norm() < 1e-12);
        }
        let lo = TangentCoefficients::series(1.0);
        let hi = TangentCoefficients::closed_form(1.0);
        for i in 0..4 {
            assert!((lo.f[i] - hi.f[i]).abs() < 1e-13);
            assert!((lo.g[i] - hi.g[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn tangent_derivative_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for &scale in &[1e-6, 0.5, 3.0, 12.0] {
            for _ in 0..20 {
                let v = Twist::new(
                    random_twist(&mut rng, 1.0).angular() * scale,
                    random_twist(&mut rng, 1.0).linear(),
                );
                let delta = random_twist(&mut rng, 1.0);
                let len = rng.random_range(0.01..0.4);
                let h = 1e-6;
                let fd = (exp_tangent(&(v + delta * h), len) - exp_tangent(&(v - delta * h), len))
                    / (2.0 * h);
                let dt = exp_tangent_derivative(&v, len, &delta);
                assert!((fd - dt).norm() < 1e-7, "scale {scale}: {:e}", (fd - dt).norm());
                let x = random_twist(&mut rng, 1.0).0;
                let applied = AdPowers::new(&v).tangent_derivative_apply(len, &delta, &x);
                assert!((applied - dt * x).norm() < 1e-13);
            }
        }
    }
}
