//! Vectors on the celestial sphere, rotation matrices and TRIAD.
//!
//! Attitudes follow the inertial-to-body convention: for an attitude `A`,
//! a catalog vector `r` is observed at `A * r` in the image.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::catalog::CatalogStar;
use crate::error::{Error, Result};

const RAD: f64 = core::f64::consts::PI / 180.0;

/// Tolerance below which two unit vectors are treated as coincident.
pub const COINCIDENT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vector3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, other: &Vector3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Vector3) -> Vector3 {
        Vector3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vector3 {
    type Output = Vector3;
    fn add(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vector3 {
    type Output = Vector3;
    fn sub(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vector3 {
    type Output = Vector3;
    fn mul(self, s: f64) -> Vector3 {
        Vector3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    fn neg(self) -> Vector3 {
        Vector3::new(-self.x, -self.y, -self.z)
    }
}

/// A direction on the unit sphere. Every constructor normalizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3(Vector3);

impl UnitVector3 {
    /// Normalizes `(x, y, z)`. Returns `None` for the zero vector.
    pub fn new(x: f64, y: f64, z: f64) -> Option<Self> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3) -> Option<Self> {
        let n = v.norm();
        if n <= f64::MIN_POSITIVE || !n.is_finite() {
            return None;
        }
        Some(Self(v * (1.0 / n)))
    }


    pub const X: UnitVector3 = UnitVector3(Vector3::new(1.0, 0.0, 0.0));
    pub const Y: UnitVector3 = UnitVector3(Vector3::new(0.0, 1.0, 0.0));
    pub const Z: UnitVector3 = UnitVector3(Vector3::new(0.0, 0.0, 1.0));

    pub fn x(&self) -> f64 {
        self.0.x
    }
    pub fn y(&self) -> f64 {
        self.0.y
    }
    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn as_vector(&self) -> Vector3 {
        self.0
    }

    pub fn dot(&self, other: &UnitVector3) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn cross(&self, other: &UnitVector3) -> Vector3 {
        self.0.cross(&other.0)
    }

    /// Normalized mean of a set of directions.
    pub fn centroid(vs: &[UnitVector3]) -> Option<UnitVector3> {
        let sum = vs.iter().fold(Vector3::default(), |acc, v| acc + v.0);
        UnitVector3::from_vector(sum)
    }
}

/// Great-circle separation in degrees.
pub fn angular_separation(u: &UnitVector3, v: &UnitVector3) -> f64 {
    u.dot(v).clamp(-1.0, 1.0).acos() / RAD
}

/// Angle at `center` between the arcs towards `p` and `q`, in degrees.
///
/// The offsets `p - center` and `q - center` are projected onto the plane
/// tangent to the sphere at `center` before measuring, so `p` and `q`
/// straddling `center` on one great circle give 180.
pub fn interior_angle(center: &UnitVector3, p: &UnitVector3, q: &UnitVector3) -> Result<f64> {
    let c = center.as_vector();
    let dp = p.as_vector() - c;
    let dq = q.as_vector() - c;
    if dp.norm() < COINCIDENT_EPS || dq.norm() < COINCIDENT_EPS {
        return Err(Error::DegenerateGeometry("interior angle vertex coincides with an arm"));
    }
    let tp = dp - c * dp.dot(&c);
    let tq = dq - c * dq.dot(&c);
    if tp.norm() < COINCIDENT_EPS || tq.norm() < COINCIDENT_EPS {
        return Err(Error::DegenerateGeometry("interior angle arm is antipodal to the vertex"));
    }
    Ok(tp.cross(&tq).norm().atan2(tp.dot(&tq)) / RAD)
}

/// Row-major 3x3 rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix {
    rows: [[f64; 3]; 3],
}

impl RotationMatrix {
    pub const IDENTITY: RotationMatrix = RotationMatrix {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Builds from rows without checking orthonormality.
    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        self.rows
    }

    /// The nine entries in row-major order.
    pub fn to_flat(&self) -> [f64; 9] {
        let r = &self.rows;
        [r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2]]
    }

    pub fn from_flat(v: [f64; 9]) -> Self {
        Self::from_rows([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
    }

    /// Matrix whose columns are `a`, `b`, `c`.
    fn from_columns(a: Vector3, b: Vector3, c: Vector3) -> Self {
        Self::from_rows([[a.x, b.x, c.x], [a.y, b.y, c.y], [a.z, b.z, c.z]])
    }

    /// Rotation by `angle_deg` about `axis` (right hand rule).
    pub fn from_axis_angle(axis: &UnitVector3, angle_deg: f64) -> Self {
        let (s, c) = (angle_deg * RAD).sin_cos();
        let t = 1.0 - c;
        let (x, y, z) = (axis.x(), axis.y(), axis.z());
        Self::from_rows([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    /// Rotation from a quaternion `(w, x, y, z)`; the quaternion is normalized first.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        Self::from_rows([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ])
    }

    pub fn transpose(&self) -> Self {
        let r = &self.rows;
        Self::from_rows([[r[0][0], r[1][0], r[2][0]], [r[0][1], r[1][1], r[2][1]], [r[0][2], r[1][2], r[2][2]]])
    }

    pub fn mul_vector(&self, v: &Vector3) -> Vector3 {
        let r = &self.rows;
        Vector3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    /// Rotates a direction. The result is renormalized to absorb rounding.
    pub fn rotate(&self, v: &UnitVector3) -> UnitVector3 {
        let w = self.mul_vector(&v.as_vector());
        UnitVector3::from_vector(w).unwrap_or(*v)
    }

    pub fn mul_matrix(&self, other: &RotationMatrix) -> RotationMatrix {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.rows[i][k] * other.rows[k][j]).sum();
            }
        }
        RotationMatrix::from_rows(out)
    }

    pub fn determinant(&self) -> f64 {
        let r = &self.rows;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &RotationMatrix) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((self.rows[i][j] - other.rows[i][j]).abs());
            }
        }
        m
    }

    /// `AᵀA = I` and `det A = +1`, both within `tol`.
    pub fn is_proper_rotation(&self, tol: f64) -> bool {
        self.transpose().mul_matrix(self).max_abs_diff(&Self::IDENTITY) < tol && (self.determinant() - 1.0).abs() < tol
    }
}

/// TRIAD attitude from two body-frame and two inertial-frame observations.
///
/// The returned `A` satisfies `A * r1 = b1` exactly (up to rounding) and
/// places `b2` in the plane spanned by `A * r1` and `A * r2`.
pub fn triad(b1: &UnitVector3, b2: &UnitVector3, r1: &UnitVector3, r2: &UnitVector3) -> Result<RotationMatrix> {
    let body = triad_frame(b1, b2).ok_or(Error::DegenerateGeometry("body observations are parallel"))?;
    let inertial = triad_frame(r1, r2).ok_or(Error::DegenerateGeometry("inertial observations are parallel"))?;
    Ok(body.mul_matrix(&inertial.transpose()))
}

fn triad_frame(v1: &UnitVector3, v2: &UnitVector3) -> Option<RotationMatrix> {
    let t1 = v1.as_vector();
    let t2 = UnitVector3::from_vector(v1.cross(v2)).filter(|_| v1.cross(v2).norm() > COINCIDENT_EPS)?;
    let t3 = t1.cross(&t2.as_vector());
    Some(RotationMatrix::from_columns(t1, t2.as_vector(), t3))
}

/// Weighted Wahba loss `½ Σ w ‖I − A K‖²` over `(w, body, inertial)` triples.
pub fn wahba_loss(attitude: &RotationMatrix, pairs: &[(f64, UnitVector3, UnitVector3)]) -> f64 {
    0.5 * pairs
        .iter()
        .map(|(w, body, inertial)| {
            let d = body.as_vector() - attitude.mul_vector(&inertial.as_vector());
            w * d.dot(&d)
        })
        .sum::<f64>()
}

/// Catalog stars of `candidates` that some image star lands on once the
/// image is carried into the catalog frame by the inverse of `attitude`.
///
/// A star overlays when the separation is strictly below `3 * sigma_overlay`.
pub fn find_positive_overlay<'a>(
    candidates: &'a [CatalogStar],
    image: &[UnitVector3],
    attitude: &RotationMatrix,
    sigma_overlay: f64,
) -> Vec<&'a CatalogStar> {
    let inverse = attitude.transpose();
    let rotated: Vec<UnitVector3> = image.iter().map(|b| inverse.rotate(b)).collect();
    let limit = 3.0 * sigma_overlay;
    candidates
        .iter()
        .filter(|p| rotated.iter().any(|i| angular_separation(i, &p.v) < limit))
        .collect()
}
