//! `SO(3)` and `SE(3)` primitives: hat/vee maps, the Rodrigues exponential,
//! the matrix logarithm with both singular branches handled, geodesics,
//! geodesic scaling, the `SE(3)` inner product, Euler-angle conversion and
//! Frenet-Serret frames from position traces.
//!
//! Conventions:
//! - `hat(x, y, z)` is the right-handed skew map `[[0,-z,y],[z,0,-x],[-y,x,0]]`,
//!   so `exp_map(hat(v))` agrees with the Rodrigues formula.
//! - Euler angles are extrinsic X-Y-Z: `from_euler(a, b, c) = Rz(c) Ry(b) Rx(a)`.
//! - Rotation matrices are row-major; the geodesic distance is the Frobenius
//!   norm of the relative logarithm, i.e. `sqrt(2)` times the rotation angle.

use crate::error::{Error, Result};
use crate::scalar::{cst, Scalar};
use std::ops::{Add, Div, Index, Mul, Neg, Sub};

/// Validation tolerance for the rotation invariants (orthonormality and
/// determinant, per entry).
pub const ROTATION_TOL: f64 = 1e-9;

/// Angle below which exponential/logarithm coefficients switch to their
/// second-order Taylor expansions.
pub const TAYLOR_CUTOFF: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Vec3
// ---------------------------------------------------------------------------

/// Point in `R^3`, also used for rotation vectors (radians) and tangents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Scalar> Vec3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero(), S::zero())
    }

    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> S {
        self.dot(self)
    }

    pub fn norm(self) -> S {
        self.norm_squared().sqrt()
    }

    pub fn normalized(self) -> Self {
        self / self.norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(self) -> S {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn to_array(self) -> [S; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [S; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl<S: Scalar> Add for Vec3<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<S: Scalar> Sub for Vec3<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<S: Scalar> Neg for Vec3<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<S: Scalar> Mul<S> for Vec3<S> {
    type Output = Self;
    fn mul(self, s: S) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<S: Scalar> Div<S> for Vec3<S> {
    type Output = Self;
    fn div(self, s: S) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<S> Index<usize> for Vec3<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

// ---------------------------------------------------------------------------
// Mat3
// ---------------------------------------------------------------------------

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<S> {
    pub m: [[S; 3]; 3],
}

impl<S: Scalar> Mat3<S> {
    pub fn new(m: [[S; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn zero() -> Self {
        Self::new([[S::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = [[S::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = S::one();
        }
        Self::new(m)
    }

    /// Build from three column vectors.
    pub fn from_columns(c0: Vec3<S>, c1: Vec3<S>, c2: Vec3<S>) -> Self {
        Self::new([
            [c0.x, c1.x, c2.x],
            [c0.y, c1.y, c2.y],
            [c0.z, c1.z, c2.z],
        ])
    }

    pub fn column(&self, j: usize) -> Vec3<S> {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn transpose(&self) -> Self {
        let mut t = [[S::zero(); 3]; 3];
        for (i, row) in self.m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                t[j][i] = v;
            }
        }
        Self::new(t)
    }

    pub fn trace(&self) -> S {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> S {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn inverse(&self) -> Self {
        let m = &self.m;
        let det = self.det();
        let adj = [
            [
                m[1][1] * m[2][2] - m[1][2] * m[2][1],
                m[0][2] * m[2][1] - m[0][1] * m[2][2],
                m[0][1] * m[1][2] - m[0][2] * m[1][1],
            ],
            [
                m[1][2] * m[2][0] - m[1][0] * m[2][2],
                m[0][0] * m[2][2] - m[0][2] * m[2][0],
                m[0][2] * m[1][0] - m[0][0] * m[1][2],
            ],
            [
                m[1][0] * m[2][1] - m[1][1] * m[2][0],
                m[0][1] * m[2][0] - m[0][0] * m[2][1],
                m[0][0] * m[1][1] - m[0][1] * m[1][0],
            ],
        ];
        let mut out = [[S::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = adj[i][j] / det;
            }
        }
        Self::new(out)
    }

    pub fn mul_vec(&self, v: Vec3<S>) -> Vec3<S> {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }

    pub fn frobenius_norm(&self) -> S {
        let mut s = S::zero();
        for row in &self.m {
            for &v in row {
                s += v * v;
            }
        }
        s.sqrt()
    }

    pub fn max_abs_entry(&self) -> S {
        let mut best = S::zero();
        for row in &self.m {
            for &v in row {
                best = best.max(v.abs());
            }
        }
        best
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }
}

impl<S: Scalar> Add for Mat3<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut m = [[S::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.m[i][j] + o.m[i][j];
            }
        }
        Self::new(m)
    }
}

impl<S: Scalar> Sub for Mat3<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut m = [[S::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.m[i][j] - o.m[i][j];
            }
        }
        Self::new(m)
    }
}

impl<S: Scalar> Mul for Mat3<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut m = [[S::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = S::zero();
                for (k, row) in o.m.iter().enumerate() {
                    acc += self.m[i][k] * row[j];
                }
                m[i][j] = acc;
            }
        }
        Self::new(m)
    }
}

impl<S: Scalar> Mul<S> for Mat3<S> {
    type Output = Self;
    fn mul(self, s: S) -> Self {
        let mut m = self.m;
        for row in &mut m {
            for v in row {
                *v = *v * s;
            }
        }
        Self::new(m)
    }
}

// ---------------------------------------------------------------------------
// Rotation
// ---------------------------------------------------------------------------

/// Element of `SO(3)`: orthonormal within [`ROTATION_TOL`] per entry with
/// determinant +1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation<S> {
    m: Mat3<S>,
}

impl<S: Scalar> Rotation<S> {
    pub fn identity() -> Self {
        Self {
            m: Mat3::identity(),
        }
    }

    /// Validating constructor.
    pub fn from_matrix(m: Mat3<S>) -> Result<Self> {
        match Self::validity_defect(&m) {
            None => Ok(Self { m }),
            Some(reason) => Err(Error::InvalidRotation { reason }),
        }
    }

    /// Constructor for matrices known to be rotations. The invariants are
    /// still asserted in debug builds so every rotation flowing through the
    /// paradigms is checked during tests.
    pub fn from_matrix_unchecked(m: Mat3<S>) -> Self {
        debug_assert!(
            Self::validity_defect(&m).is_none(),
            "invalid rotation: {:?}",
            Self::validity_defect(&m)
        );
        Self { m }
    }

    fn validity_defect(m: &Mat3<S>) -> Option<String> {
        if !m.is_finite() {
            return Some("non-finite entry".to_string());
        }
        // 1e-9 is the f64 contract; wider scalars would keep it, narrower
        // ones fall back to a multiple of their epsilon.
        let tol = cst::<S>(ROTATION_TOL).max(S::epsilon() * cst(100.0));
        let gram_defect = (m.transpose() * *m - Mat3::identity()).max_abs_entry();
        if gram_defect > tol {
            return Some(format!("orthonormality defect {:e}", gram_defect.to_f64().unwrap_or(f64::NAN)));
        }
        let det_defect = (m.det() - S::one()).abs();
        if det_defect > tol {
            return Some(format!("determinant defect {:e}", det_defect.to_f64().unwrap_or(f64::NAN)));
        }
        None
    }

    pub fn is_valid(&self) -> bool {
        Self::validity_defect(&self.m).is_none()
    }

    pub fn matrix(&self) -> &Mat3<S> {
        &self.m
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: self.m.transpose(),
        }
    }

    pub fn rotate(&self, v: Vec3<S>) -> Vec3<S> {
        self.m.mul_vec(v)
    }

    /// Rotation angle in [0, pi].
    pub fn angle(&self) -> S {
        let half = cst::<S>(0.5);
        let c = ((self.m.trace() - S::one()) * half).clamp(-S::one(), S::one());
        c.acos()
    }

    /// Row-major flattening, `[r11, r12, r13, r21, ..., r33]`.
    pub fn flatten(&self) -> [S; 9] {
        let m = &self.m.m;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn from_flat(v: &[S]) -> Result<Self> {
        if v.len() != 9 {
            return Err(Error::InvalidRotation {
                reason: format!("expected 9 entries, got {}", v.len()),
            });
        }
        Self::from_matrix(Mat3::new([
            [v[0], v[1], v[2]],
            [v[3], v[4], v[5]],
            [v[6], v[7], v[8]],
        ]))
    }
}

impl<S: Scalar> Mul for Rotation<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Rotation::from_matrix_unchecked(self.m * o.m)
    }
}

// ---------------------------------------------------------------------------
// RigidTransform and the SE(3) inner product
// ---------------------------------------------------------------------------

/// Rigid-body transform: a rotation plus a translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform<S> {
    pub rotation: Rotation<S>,
    pub translation: Vec3<S>,
}

impl<S: Scalar> RigidTransform<S> {
    pub fn new(rotation: Rotation<S>, translation: Vec3<S>) -> Self {
        Self {
            rotation,
            translation,
        }
    }
}

/// Inner product on `SE(3)`: `tr(r r'^T) / 2` on the rotation block plus the
/// Euclidean inner product of the translations.
pub fn se3_inner<S: Scalar>(a: &RigidTransform<S>, b: &RigidTransform<S>) -> S {
    let rot = (*a.rotation.matrix() * b.rotation.matrix().transpose()).trace() * cst::<S>(0.5);
    rot + a.translation.dot(b.translation)
}

// ---------------------------------------------------------------------------
// hat / vee / exp / log
// ---------------------------------------------------------------------------

/// Skew-symmetric matrix of a rotation vector (right-handed convention).
pub fn hat<S: Scalar>(phi: Vec3<S>) -> Mat3<S> {
    let z = S::zero();
    Mat3::new([
        [z, -phi.z, phi.y],
        [phi.z, z, -phi.x],
        [-phi.y, phi.x, z],
    ])
}

/// Inverse of [`hat`]. Reads only the lower triangle.
pub fn vee<S: Scalar>(m: &Mat3<S>) -> Vec3<S> {
    Vec3::new(m.m[2][1], m.m[0][2], m.m[1][0])
}

/// Rodrigues exponential: rotation vector to rotation matrix.
///
/// Below [`TAYLOR_CUTOFF`] the two Rodrigues coefficients use their
/// second-order expansions, so the zero vector maps exactly to the identity.
pub fn exp_map<S: Scalar>(phi: Vec3<S>) -> Rotation<S> {
    let theta2 = phi.norm_squared();
    let cutoff2 = cst::<S>(TAYLOR_CUTOFF * TAYLOR_CUTOFF);
    let (a, b) = if theta2 < cutoff2 {
        (
            S::one() - theta2 / cst(6.0),
            cst::<S>(0.5) - theta2 / cst(24.0),
        )
    } else {
        let theta = theta2.sqrt();
        (theta.sin() / theta, (S::one() - theta.cos()) / theta2)
    };
    let k = hat(phi);
    let k2 = k * k;
    Rotation::from_matrix_unchecked(Mat3::identity() + k * a + k2 * b)
}

/// Matrix logarithm: rotation matrix to rotation vector with angle in [0, pi].
///
/// Both singular ends are handled: angles below [`TAYLOR_CUTOFF`] use the
/// Taylor form of `omega / (2 sin omega)`, and angles with `trace <= -1 + 1e-6`
/// extract the axis from the diagonally dominant column of the symmetric part.
pub fn log_map<S: Scalar>(r: &Rotation<S>) -> Vec3<S> {
    let m = r.matrix();
    let half = cst::<S>(0.5);
    let tr = m.trace();
    let cos_w = ((tr - S::one()) * half).clamp(-S::one(), S::one());
    let omega = cos_w.acos();

    if tr <= cst::<S>(-1.0 + 1e-6) {
        return log_near_pi(m, cos_w, omega);
    }

    // Half the antisymmetric part: sin(omega) * axis.
    let w = Vec3::new(
        (m.m[2][1] - m.m[1][2]) * half,
        (m.m[0][2] - m.m[2][0]) * half,
        (m.m[1][0] - m.m[0][1]) * half,
    );
    let factor = if omega < cst(TAYLOR_CUTOFF) {
        S::one() + omega * omega / cst(6.0)
    } else {
        omega / omega.sin()
    };
    w * factor
}

fn log_near_pi<S: Scalar>(m: &Mat3<S>, cos_w: S, omega: S) -> Vec3<S> {
    let half = cst::<S>(0.5);
    // (sym(m) + I) / 2 = n n^T (1 - c) + c I  with  c = (1 + cos omega) / 2.
    let sym = (*m + m.transpose()) * half;
    let s = (sym + Mat3::identity()) * half;
    let c = (S::one() + cos_w) * half;
    let one_minus_c = S::one() - c;

    let diag = [
        ((s.m[0][0] - c) / one_minus_c).max(S::zero()),
        ((s.m[1][1] - c) / one_minus_c).max(S::zero()),
        ((s.m[2][2] - c) / one_minus_c).max(S::zero()),
    ];
    let mut lead = 0;
    for (i, d) in diag.iter().enumerate() {
        if *d > diag[lead] {
            lead = i;
        }
    }
    let mut n = [S::zero(); 3];
    n[lead] = diag[lead].sqrt();
    for j in 0..3 {
        if j != lead {
            n[j] = s.m[j][lead] / (one_minus_c * n[lead]);
        }
    }
    let mut axis = Vec3::new(n[0], n[1], n[2]).normalized();

    // Orient along the antisymmetric part (sin(omega) >= 0 on [0, pi]);
    // at omega exactly pi it vanishes and either sign is a valid logarithm.
    let w = Vec3::new(
        (m.m[2][1] - m.m[1][2]) * half,
        (m.m[0][2] - m.m[2][0]) * half,
        (m.m[1][0] - m.m[0][1]) * half,
    );
    if axis.dot(w) < S::zero() {
        axis = -axis;
    }
    axis * omega
}

// ---------------------------------------------------------------------------
// Geodesics, scaling, distance
// ---------------------------------------------------------------------------

/// Geodesic from `r0` (t = 0) to `r1` (t = 1).
pub fn geodesic<S: Scalar>(r0: &Rotation<S>, r1: &Rotation<S>, t: S) -> Rotation<S> {
    let rel = log_map(&(r0.transpose() * *r1));
    *r0 * exp_map(rel * t)
}

/// Geodesic scaling `exp(c log r)`: identity at c = 0, `r` at c = 1.
pub fn scale_rotation<S: Scalar>(c: S, r: &Rotation<S>) -> Rotation<S> {
    exp_map(log_map(r) * c)
}

/// Geodesic distance `||log(r0^T r1)||_F = sqrt(2) * angle`.
pub fn distance_so3<S: Scalar>(r0: &Rotation<S>, r1: &Rotation<S>) -> S {
    let rel = r0.transpose() * *r1;
    cst::<S>(std::f64::consts::SQRT_2) * rel.angle()
}

// ---------------------------------------------------------------------------
// Nearest rotation (polar projection)
// ---------------------------------------------------------------------------

/// Project an arbitrary 3x3 matrix onto `SO(3)` (nearest rotation in the
/// Frobenius sense, the polar factor with a determinant correction).
///
/// Degenerate inputs whose leading singular value is below 1e-12 project to
/// the identity; this is the well-defined fallback for the zero-initialized
/// network head.
pub fn nearest_rotation<S: Scalar>(m: &Mat3<S>) -> Rotation<S> {
    let a = m.transpose() * *m;
    let (vecs, vals) = sym_eigen_3x3(&a);
    let sigma0 = vals[0].max(S::zero()).sqrt();
    if sigma0 < cst(1e-12) || !m.is_finite() {
        return Rotation::identity();
    }

    let v0 = vecs.column(0);
    let v1 = vecs.column(1);
    let u0 = m.mul_vec(v0).normalized();
    let mut u1 = m.mul_vec(v1);
    u1 = u1 - u0 * u0.dot(u1);
    let u1_norm = u1.norm();
    u1 = if u1_norm > cst(1e-12) {
        u1 / u1_norm
    } else {
        orthogonal_complement(u0)
    };
    let u2 = u0.cross(u1);
    // With proper V, choosing u2 = u0 x u1 flips the smallest singular
    // direction exactly when det(m) < 0, which is the nearest-rotation rule.
    let v2 = v0.cross(v1);
    let u = Mat3::from_columns(u0, u1, u2);
    let v = Mat3::from_columns(v0, v1, v2);
    let mut r = u * v.transpose();

    // Two Newton polar iterations clean up the orthogonality loss that an
    // ill-conditioned singular spectrum leaves behind.
    for _ in 0..2 {
        r = (r + r.inverse().transpose()) * cst::<S>(0.5);
    }
    Rotation::from_matrix_unchecked(r)
}

fn orthogonal_complement<S: Scalar>(u: Vec3<S>) -> Vec3<S> {
    let trial = if u.x.abs() < cst(0.9) {
        Vec3::new(S::one(), S::zero(), S::zero())
    } else {
        Vec3::new(S::zero(), S::one(), S::zero())
    };
    (trial - u * u.dot(trial)).normalized()
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi sweeps.
/// Returns (eigenvector columns, eigenvalues) sorted descending.
fn sym_eigen_3x3<S: Scalar>(a: &Mat3<S>) -> (Mat3<S>, [S; 3]) {
    let mut d = *a;
    let mut v = Mat3::identity();
    for _ in 0..30 {
        let off = (d.m[0][1] * d.m[0][1] + d.m[0][2] * d.m[0][2] + d.m[1][2] * d.m[1][2])
            .sqrt();
        if off < cst(1e-30) {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = d.m[p][q];
            if apq.abs() < cst(1e-300) {
                continue;
            }
            let theta = (d.m[q][q] - d.m[p][p]) / (cst::<S>(2.0) * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt());
            let c = S::one() / (t * t + S::one()).sqrt();
            let s = t * c;
            let mut rot = Mat3::identity();
            rot.m[p][p] = c;
            rot.m[q][q] = c;
            rot.m[p][q] = s;
            rot.m[q][p] = -s;
            d = rot.transpose() * d * rot;
            v = v * rot;
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| {
        d.m[j][j]
            .partial_cmp(&d.m[i][i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vecs = Mat3::from_columns(
        v.column(order[0]),
        v.column(order[1]),
        v.column(order[2]),
    );
    (
        vecs,
        [
            d.m[order[0]][order[0]],
            d.m[order[1]][order[1]],
            d.m[order[2]][order[2]],
        ],
    )
}

// ---------------------------------------------------------------------------
// Euler angles (extrinsic X-Y-Z)
// ---------------------------------------------------------------------------

/// Extrinsic X-Y-Z Euler angles; `alpha, gamma` in [-pi, pi], `beta` in
/// [-pi/2, pi/2]. Used for visualization dumps only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles<S> {
    pub alpha: S,
    pub beta: S,
    pub gamma: S,
}

impl<S: Scalar> EulerAngles<S> {
    pub fn new(alpha: S, beta: S, gamma: S) -> Self {
        Self { alpha, beta, gamma }
    }
}

/// Compose `Rz(gamma) Ry(beta) Rx(alpha)`.
pub fn from_euler<S: Scalar>(e: EulerAngles<S>) -> Rotation<S> {
    let (sa, ca) = (e.alpha.sin(), e.alpha.cos());
    let (sb, cb) = (e.beta.sin(), e.beta.cos());
    let (sc, cc) = (e.gamma.sin(), e.gamma.cos());
    Rotation::from_matrix_unchecked(Mat3::new([
        [cc * cb, cc * sb * sa - sc * ca, cc * sb * ca + sc * sa],
        [sc * cb, sc * sb * sa + cc * ca, sc * sb * ca - cc * sa],
        [-sb, cb * sa, cb * ca],
    ]))
}

/// Invert [`from_euler`]. At gimbal lock (`|beta|` within ~1e-4 of pi/2)
/// gamma is set to zero and alpha absorbs the remaining angle.
pub fn to_euler<S: Scalar>(r: &Rotation<S>) -> EulerAngles<S> {
    let m = &r.matrix().m;
    let sb = (-m[2][0]).clamp(-S::one(), S::one());
    // sin(pi/2 - 1e-4) = 1 - 5e-9; anything closer than that to +-1 is lock.
    if S::one() - sb.abs() < cst(5e-9) {
        let beta = sb.asin();
        let alpha = if sb > S::zero() {
            m[0][1].atan2(m[1][1])
        } else {
            (-m[0][1]).atan2(m[1][1])
        };
        return EulerAngles::new(alpha, beta, S::zero());
    }
    EulerAngles::new(
        m[2][1].atan2(m[2][2]),
        sb.asin(),
        m[1][0].atan2(m[0][0]),
    )
}

// ---------------------------------------------------------------------------
// Frenet-Serret frames
// ---------------------------------------------------------------------------

/// Build one orthonormal frame per trace point from consecutive positions.
///
/// Interior frames use the tangent/binormal/normal construction
/// `t_i = normalize(x_{i+1} - x_i)`, `b_i = normalize(t_{i-1} x t_i)`,
/// `n_i = b_i x t_i`. The rotation stores the columns as `[t, n, b]`, which
/// is the proper (det +1) ordering of that triad. Boundary frames copy the
/// rotation of the nearest interior frame and keep their own translation.
pub fn fs_frames<S: Scalar>(coords: &[Vec3<S>]) -> Result<Vec<RigidTransform<S>>> {
    let n = coords.len();
    if n < 3 {
        return Err(Error::InvalidConfig(format!(
            "Frenet-Serret frames need at least 3 points, got {n}"
        )));
    }
    let degenerate = cst::<S>(1e-9);

    let mut tangents = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let d = coords[i + 1] - coords[i];
        let len = d.norm();
        if len <= degenerate {
            return Err(Error::CoincidentPoints {
                index: i,
                sep: len.to_f64().unwrap_or(0.0),
            });
        }
        tangents.push(d / len);
    }

    let mut rotations: Vec<Option<Rotation<S>>> = vec![None; n];
    for i in 1..n - 1 {
        let cross = tangents[i - 1].cross(tangents[i]);
        let cross_norm = cross.norm();
        if cross_norm < degenerate {
            return Err(Error::CollinearTriple {
                index: i,
                norm: cross_norm.to_f64().unwrap_or(0.0),
            });
        }
        let t = tangents[i];
        let b = cross / cross_norm;
        let nv = b.cross(t);
        rotations[i] = Some(Rotation::from_matrix_unchecked(Mat3::from_columns(
            t, nv, b,
        )));
    }
    rotations[0] = rotations[1];
    rotations[n - 1] = rotations[n - 2];

    Ok(coords
        .iter()
        .zip(rotations)
        .map(|(&x, r)| RigidTransform::new(r.expect("all frames assigned"), x))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_rotvec(rng: &mut ChaCha8Rng, max_angle: f64) -> Vec3<f64> {
        let axis = random_axis(rng);
        axis * rng.random_range(0.0..max_angle)
    }

    fn random_axis(rng: &mut ChaCha8Rng) -> Vec3<f64> {
        loop {
            let v = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 1e-3 {
                return v / n;
            }
        }
    }

    fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation<f64> {
        exp_map(random_rotvec(rng, PI - 1e-3))
    }

    #[test]
    fn hat_of_zero_is_zero() {
        assert_eq!(hat(Vec3::<f64>::zero()), Mat3::zero());
    }

    #[test]
    fn hat_convention_matches_right_handed_form() {
        let m = hat(Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(
            m,
            Mat3::new([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        );
    }

    #[test]
    fn hat_is_skew_symmetric_and_vee_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let v = Vec3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            );
            let h = hat(v);
            assert_eq!((h + h.transpose()).max_abs_entry(), 0.0);
            assert_eq!(vee(&h), v);
        }
    }

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(exp_map(Vec3::<f64>::zero()), Rotation::identity());
    }

    #[test]
    fn exp_quarter_turn_about_x() {
        let r = exp_map(Vec3::new(FRAC_PI_2, 0.0, 0.0));
        let expected = Mat3::new([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]);
        assert!((*r.matrix() - expected).max_abs_entry() < 1e-15);
    }

    #[test]
    fn exp_map_outputs_are_valid_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let r = exp_map(random_rotvec(&mut rng, 2.0 * PI));
            let m = r.matrix();
            assert!((m.transpose() * *m - Mat3::identity()).max_abs_entry() < 1e-12);
            assert!((m.det() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_of_identity_is_zero() {
        assert_eq!(log_map(&Rotation::<f64>::identity()), Vec3::zero());
    }

    #[test]
    fn log_of_half_turn_about_x() {
        let r = Rotation::from_matrix(Mat3::new([
            [1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, -1.0],
        ]))
        .unwrap();
        let v: Vec3<f64> = log_map(&r);
        assert_abs_diff_eq!(v.x.abs(), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(v.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn log_exp_roundtrip_over_regular_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let axis = random_axis(&mut rng);
            let angle = rng.random_range(1e-4..PI - 1e-3);
            let v = axis * angle;
            let back = log_map(&exp_map(v));
            assert!(
                (back - v).max_abs() < 1e-9,
                "roundtrip defect {:e} at angle {angle}",
                (back - v).max_abs()
            );
        }
    }

    #[test]
    fn exp_log_roundtrip_near_pi_branch() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2_000 {
            let axis = random_axis(&mut rng);
            let angle = rng.random_range(PI - 1e-3..=PI);
            let r = exp_map(axis * angle);
            let rt = exp_map(log_map(&r));
            assert!(
                (*rt.matrix() - *r.matrix()).max_abs_entry() < 1e-8,
                "pi-branch reconstruction failed at angle {angle}"
            );
        }
    }

    #[test]
    fn geodesic_hits_both_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let r0 = random_rotation(&mut rng);
            let r1 = random_rotation(&mut rng);
            let g0 = geodesic(&r0, &r1, 0.0);
            let g1 = geodesic(&r0, &r1, 1.0);
            assert!((*g0.matrix() - *r0.matrix()).max_abs_entry() < 1e-9);
            assert!((*g1.matrix() - *r1.matrix()).max_abs_entry() < 1e-9);
        }
    }

    #[test]
    fn geodesic_halves_a_single_axis_turn() {
        let theta = 1.2;
        let r1 = exp_map(Vec3::new(0.0, 0.0, theta));
        let mid = geodesic(&Rotation::identity(), &r1, 0.5);
        let expected = exp_map(Vec3::new(0.0, 0.0, theta / 2.0));
        assert!((*mid.matrix() - *expected.matrix()).max_abs_entry() < 1e-12);
    }

    #[test]
    fn scale_rotation_endpoints_and_axis_scaling() {
        let r = exp_map(Vec3::new(0.0, 0.3, 0.0));
        let s0 = scale_rotation(0.0, &r);
        let s1 = scale_rotation(1.0, &r);
        let s2 = scale_rotation(2.0, &r);
        assert!((*s0.matrix() - Mat3::identity()).max_abs_entry() < 1e-12);
        assert!((*s1.matrix() - *r.matrix()).max_abs_entry() < 1e-12);
        let expected = exp_map(Vec3::new(0.0, 0.6, 0.0));
        assert!((*s2.matrix() - *expected.matrix()).max_abs_entry() < 1e-12);
    }

    #[test]
    fn scale_commutes_with_exp() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..500 {
            let v = random_rotvec(&mut rng, 1.5);
            let c = rng.random_range(0.0..2.0);
            if v.norm() * c >= PI {
                continue;
            }
            let a = scale_rotation(c, &exp_map(v));
            let b = exp_map(v * c);
            assert!((*a.matrix() - *b.matrix()).max_abs_entry() < 1e-10);
        }
    }

    #[test]
    fn distance_is_sqrt2_times_angle() {
        let r = exp_map(Vec3::new(FRAC_PI_2, 0.0, 0.0));
        let d = distance_so3(&Rotation::identity(), &r);
        assert_abs_diff_eq!(d, std::f64::consts::SQRT_2 * FRAC_PI_2, epsilon = 1e-12);
        assert_eq!(distance_so3(&r, &r), 0.0);
    }

    #[test]
    fn distance_satisfies_metric_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1_000 {
            let a = random_rotation(&mut rng);
            let b = random_rotation(&mut rng);
            let c = random_rotation(&mut rng);
            let dab = distance_so3(&a, &b);
            let dba = distance_so3(&b, &a);
            let dac = distance_so3(&a, &c);
            let dcb = distance_so3(&c, &b);
            assert!(dab >= 0.0);
            assert_abs_diff_eq!(dab, dba, epsilon = 1e-10);
            assert!(dab <= dac + dcb + 1e-9);
        }
    }

    #[test]
    fn geodesic_additivity_on_fixed_axis() {
        let axis = Vec3::new(0.6, -0.8, 0.0);
        let theta = 2.0;
        let r = exp_map(axis * theta);
        let i = Rotation::identity();
        for (s, t) in [(0.2, 0.3), (0.5, 0.4), (0.1, 0.85)] {
            let combined = geodesic(&i, &r, s) * geodesic(&i, &r, t);
            let expected = exp_map(axis * (theta * (s + t)));
            assert!((*combined.matrix() - *expected.matrix()).max_abs_entry() < 1e-10);
        }
    }

    #[test]
    fn se3_inner_basic_values_and_symmetry() {
        let i = RigidTransform::new(Rotation::<f64>::identity(), Vec3::zero());
        assert_abs_diff_eq!(se3_inner(&i, &i), 1.5, epsilon = 1e-15);

        let a = RigidTransform::new(Rotation::identity(), Vec3::new(1.0, 2.0, 3.0));
        let b = RigidTransform::new(Rotation::identity(), Vec3::new(1.0, 1.0, 1.0));
        assert_abs_diff_eq!(se3_inner(&a, &b), 7.5, epsilon = 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let p = RigidTransform::new(random_rotation(&mut rng), random_rotvec(&mut rng, 3.0));
            let q = RigidTransform::new(random_rotation(&mut rng), random_rotvec(&mut rng, 3.0));
            assert_abs_diff_eq!(se3_inner(&p, &q), se3_inner(&q, &p), epsilon = 1e-12);
        }
    }

    #[test]
    fn se3_inner_decomposes_into_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let ra = random_rotation(&mut rng);
            let rb = random_rotation(&mut rng);
            let ta = random_rotvec(&mut rng, 2.0);
            let tb = random_rotvec(&mut rng, 2.0);
            let whole = se3_inner(
                &RigidTransform::new(ra, ta),
                &RigidTransform::new(rb, tb),
            );
            let rot_part = (*ra.matrix() * rb.matrix().transpose()).trace() / 2.0;
            assert_abs_diff_eq!(whole, rot_part + ta.dot(tb), epsilon = 1e-12);
        }
    }

    #[test]
    fn rotation_self_inner_is_three_halves() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let r = RigidTransform::new(random_rotation(&mut rng), Vec3::zero());
            assert_abs_diff_eq!(se3_inner(&r, &r), 1.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn fs_frames_match_hand_evaluated_example() {
        let coords = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(2.0, 1.0, 0.0),
        ];
        let frames = fs_frames(&coords).unwrap();
        assert_eq!(frames.len(), 4);
        // Interior frame at the third point (index 2): t = (0,1,0) points to
        // the next position, b = t_prev x t = (0,0,1), n = b x t = (-1,0,0).
        let r = frames[1].rotation.matrix();
        let t = r.column(0);
        let nv = r.column(1);
        let b = r.column(2);
        assert!((t - Vec3::new(0.0, 1.0, 0.0)).max_abs() < 1e-15);
        assert!((b - Vec3::new(0.0, 0.0, 1.0)).max_abs() < 1e-15);
        assert!((nv - Vec3::new(-1.0, 0.0, 0.0)).max_abs() < 1e-15);
        assert_eq!(frames[1].translation, coords[1]);
        for f in &frames {
            assert!(f.rotation.is_valid());
        }
        // Boundaries copy the nearest interior rotation.
        assert_eq!(frames[0].rotation, frames[1].rotation);
        assert_eq!(frames[3].rotation, frames[2].rotation);
    }

    #[test]
    fn fs_frames_reject_collinear_and_coincident_points() {
        let collinear = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        assert!(matches!(
            fs_frames(&collinear),
            Err(Error::CollinearTriple { .. })
        ));

        let coincident = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        ];
        assert!(matches!(
            fs_frames(&coincident),
            Err(Error::CoincidentPoints { .. })
        ));
    }

    #[test]
    fn euler_identity_and_axis_aligned_cases() {
        let e = to_euler(&Rotation::<f64>::identity());
        assert_eq!((e.alpha, e.beta, e.gamma), (0.0, 0.0, 0.0));

        let r = from_euler(EulerAngles::new(0.0, FRAC_PI_2, 0.0));
        let back = to_euler(&r);
        assert_eq!(back.beta, FRAC_PI_2);
        assert_eq!(back.gamma, 0.0);
    }

    #[test]
    fn euler_roundtrip_away_from_lock() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 10_000 {
            let r = random_rotation(&mut rng);
            let e = to_euler(&r);
            if e.beta.abs() >= FRAC_PI_2 - 1e-4 {
                continue;
            }
            checked += 1;
            let back = from_euler(e);
            assert!(
                (*back.matrix() - *r.matrix()).max_abs_entry() < 1e-8,
                "roundtrip defect at beta = {}",
                e.beta
            );
        }
    }

    #[test]
    fn nearest_rotation_recovers_polar_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for flip in [false, true] {
            for _ in 0..500 {
                let r_true = random_rotation(&mut rng);
                // Symmetric PSD (or one negative eigenvalue when `flip`)
                // right factor: the nearest rotation to r_true * s is r_true.
                let q = random_rotation(&mut rng);
                let mut lams = [
                    rng.random_range(0.5..2.0),
                    rng.random_range(0.3..0.5),
                    rng.random_range(0.05..0.3),
                ];
                if flip {
                    lams[2] = -lams[2];
                }
                let diag = Mat3::new([
                    [lams[0], 0.0, 0.0],
                    [0.0, lams[1], 0.0],
                    [0.0, 0.0, lams[2]],
                ]);
                let s = *q.matrix() * diag * q.matrix().transpose();
                let m = *r_true.matrix() * s;
                let projected = nearest_rotation(&m);
                assert!(
                    (*projected.matrix() - *r_true.matrix()).max_abs_entry() < 1e-8,
                    "projection failed (flip = {flip})"
                );
            }
        }
    }

    #[test]
    fn nearest_rotation_handles_degenerate_input() {
        let zero = nearest_rotation(&Mat3::<f64>::zero());
        assert_eq!(zero, Rotation::identity());
        let rank1 = Mat3::new([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        assert!(nearest_rotation(&rank1).is_valid());
    }

    #[test]
    fn rotation_products_stay_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut acc = Rotation::<f64>::identity();
        for _ in 0..2_000 {
            acc = acc * random_rotation(&mut rng);
        }
        assert!(acc.is_valid());
    }

    #[test]
    fn generic_core_instantiates_at_f32() {
        let v = super::Vec3::<f32>::new(0.3, -0.2, 0.1);
        let r = super::exp_map(v);
        let back = super::log_map(&r);
        assert!((back - v).max_abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn prop_vee_hat_roundtrip(x in -10.0f64..10.0, y in -10.0f64..10.0, z in -10.0f64..10.0) {
            let v = Vec3::new(x, y, z);
            prop_assert_eq!(vee(&hat(v)), v);
        }

        #[test]
        fn prop_exp_log_inverse(nx in -1.0f64..1.0, ny in -1.0f64..1.0, nz in -1.0f64..1.0,
                                angle in 1e-4f64..3.14) {
            let n = Vec3::new(nx, ny, nz);
            prop_assume!(n.norm() > 1e-2);
            let v = n.normalized() * angle;
            let back = log_map(&exp_map(v));
            prop_assert!((back - v).max_abs() < 1e-9);
        }
    }
}
