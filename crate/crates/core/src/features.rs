//! Area and polar moment of star trios, on the sphere and in chord space.
//!
//! Spherical features are in steradians (area) and steradian-radian² (moment).
//! Planar features use the Euclidean chord triangle between the three unit
//! vectors; its moment is the planar polar moment `A (a² + b² + c²) / 36`.

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::geometry::{UnitVector3, Vector3};

/// Default recursion depth for the spherical moment.
pub const DEFAULT_MOMENT_DEPTH: u32 = 3;

/// Triple products below this are treated as a degenerate trio.
const DEGENERATE_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrioFeatures {
    pub area: f64,
    pub moment: f64,
}

impl TrioFeatures {
    pub const DEGENERATE: TrioFeatures = TrioFeatures { area: 0.0, moment: 0.0 };
}

fn arc(u: &UnitVector3, v: &UnitVector3) -> f64 {
    u.cross(v).norm().atan2(u.dot(v))
}

fn sorted_desc(mut s: [f64; 3]) -> [f64; 3] {
    if s[0] < s[1] {
        s.swap(0, 1);
    }
    if s[1] < s[2] {
        s.swap(1, 2);
    }
    if s[0] < s[1] {
        s.swap(0, 1);
    }
    s
}

/// Planar area (Heron, Kahan's ordering) and polar moment of the chord triangle.
pub fn planar_features(v1: &UnitVector3, v2: &UnitVector3, v3: &UnitVector3) -> TrioFeatures {
    let chord = |u: &UnitVector3, v: &UnitVector3| (u.as_vector() - v.as_vector()).norm();
    let [a, b, c] = sorted_desc([chord(v2, v3), chord(v1, v3), chord(v1, v2)]);
    let product = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if product <= 0.0 {
        return TrioFeatures::DEGENERATE;
    }
    let area = 0.25 * product.sqrt();
    TrioFeatures { area, moment: area * (a * a + b * b + c * c) / 36.0 }
}

/// Spherical excess of the triangle through l'Huilier's theorem.
pub fn spherical_area(v1: &UnitVector3, v2: &UnitVector3, v3: &UnitVector3) -> f64 {
    let [a, b, c] = sorted_desc([arc(v2, v3), arc(v1, v3), arc(v1, v2)]);
    let s = 0.5 * (a + b + c);
    let t = (0.5 * s).tan() * (0.5 * (s - a)).max(0.0).tan() * (0.5 * (s - b)).max(0.0).tan() * (0.5 * (s - c)).max(0.0).tan();
    4.0 * t.max(0.0).sqrt().atan()
}

/// Spherical area and the recursive polar moment about the trio's centroid.
///
/// The triangle is split into four at its normalized edge midpoints `depth`
/// times; each leaf contributes `area * θ(leaf centroid, centroid)²` with θ
/// in radians. `depth = 0` gives a zero moment.
pub fn spherical_features(v1: &UnitVector3, v2: &UnitVector3, v3: &UnitVector3, depth: u32) -> TrioFeatures {
    if v1.as_vector().dot(&v2.cross(v3)).abs() < DEGENERATE_EPS {
        return TrioFeatures::DEGENERATE;
    }
    let centroid = match UnitVector3::centroid(&[*v1, *v2, *v3]) {
        Some(c) => c,
        None => return TrioFeatures::DEGENERATE,
    };
    TrioFeatures { area: spherical_area(v1, v2, v3), moment: recursive_moment(v1, v2, v3, &centroid, depth) }
}

fn midpoint(u: &UnitVector3, v: &UnitVector3) -> UnitVector3 {
    UnitVector3::from_vector(u.as_vector() + v.as_vector()).unwrap_or(*u)
}

fn recursive_moment(v1: &UnitVector3, v2: &UnitVector3, v3: &UnitVector3, parent: &UnitVector3, depth: u32) -> f64 {
    if depth == 0 {
        let sum: Vector3 = v1.as_vector() + v2.as_vector() + v3.as_vector();
        let leaf = UnitVector3::from_vector(sum).unwrap_or(*v1);
        let d = arc(&leaf, parent);
        return spherical_area(v1, v2, v3) * d * d;
    }
    let m12 = midpoint(v1, v2);
    let m23 = midpoint(v2, v3);
    let m31 = midpoint(v3, v1);
    recursive_moment(v1, &m12, &m31, parent, depth - 1)
        + recursive_moment(&m12, v2, &m23, parent, depth - 1)
        + recursive_moment(&m31, &m23, v3, parent, depth - 1)
        + recursive_moment(&m12, &m23, &m31, parent, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RotationMatrix;
    use proptest::prelude::*;

    fn uv(x: f64, y: f64, z: f64) -> UnitVector3 {
        UnitVector3::new(x, y, z).unwrap()
    }

    #[test]
    fn planar_octant_closed_form() {
        let f = planar_features(&UnitVector3::X, &UnitVector3::Y, &UnitVector3::Z);
        let s3 = 3f64.sqrt();
        assert!((f.area - s3 / 2.0).abs() < 1e-15);
        assert!((f.moment - s3 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn planar_collinear_is_degenerate() {
        let f = planar_features(&UnitVector3::X, &UnitVector3::X, &uv(-1.0, 0.0, 0.0));
        assert_eq!(f, TrioFeatures::DEGENERATE);
    }

    #[test]
    fn spherical_octant_area() {
        let f = spherical_features(&UnitVector3::X, &UnitVector3::Y, &UnitVector3::Z, 3);
        assert!((f.area - core::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert!(f.moment > 0.0);
    }

    #[test]
    fn spherical_great_circle_is_degenerate() {
        let f = spherical_features(&UnitVector3::X, &uv(1.0, 1.0, 0.0), &UnitVector3::Y, 3);
        assert_eq!(f, TrioFeatures::DEGENERATE);
    }

    #[test]
    fn small_triangle_close_to_planar() {
        let d = 0.4f64.to_radians();
        let a = uv(1.0, 0.0, 0.0);
        let b = uv(d.cos(), d.sin(), 0.0);
        let c = uv(d.cos(), 0.3 * d.sin(), 0.9 * d.sin());
        let s = spherical_area(&a, &b, &c);
        let p = planar_features(&a, &b, &c).area;
        assert!((s - p).abs() / p < 0.01);
    }

    #[test]
    fn moment_subdivision_converges() {
        let a = uv(1.0, 0.0, 0.0);
        let b = uv(1.0, 0.2, 0.05);
        let c = uv(1.0, 0.07, 0.18);
        let m: std::vec::Vec<f64> = (0..7).map(|d| spherical_features(&a, &b, &c, d).moment).collect();
        let diffs: std::vec::Vec<f64> = m.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for w in diffs.windows(2) {
            assert!(w[1] < w[0], "{:?}", diffs);
        }
    }

    fn near_vector() -> impl Strategy<Value = UnitVector3> {
        (-0.15f64..0.15, -0.15f64..0.15).prop_map(|(y, z)| uv(1.0, y, z))
    }

    proptest! {
        #[test]
        fn permutation_invariance(a in near_vector(), b in near_vector(), c in near_vector()) {
            let base_s = spherical_features(&a, &b, &c, 3);
            let base_p = planar_features(&a, &b, &c);
            for (x, y, z) in [(a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                let s = spherical_features(&x, &y, &z, 3);
                let p = planar_features(&x, &y, &z);
                prop_assert!((s.area - base_s.area).abs() <= 1e-15 + 1e-12 * base_s.area);
                prop_assert!((s.moment - base_s.moment).abs() <= 1e-18 + 1e-10 * base_s.moment);
                prop_assert!((p.area - base_p.area).abs() <= 1e-15);
                prop_assert!((p.moment - base_p.moment).abs() <= 1e-17);
            }
        }

        #[test]
        fn rotation_invariance(a in near_vector(), b in near_vector(), c in near_vector(),
                               q in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)) {
            prop_assume!(q.0 * q.0 + q.1 * q.1 + q.2 * q.2 + q.3 * q.3 > 1e-2);
            let r = RotationMatrix::from_quaternion(q.0, q.1, q.2, q.3);
            let (ra, rb, rc) = (r.rotate(&a), r.rotate(&b), r.rotate(&c));
            let s0 = spherical_features(&a, &b, &c, 3);
            let s1 = spherical_features(&ra, &rb, &rc, 3);
            prop_assert!((s0.area - s1.area).abs() < 1e-10);
            prop_assert!((s0.moment - s1.moment).abs() < 1e-10);
            let p0 = planar_features(&a, &b, &c);
            let p1 = planar_features(&ra, &rb, &rc);
            prop_assert!((p0.area - p1.area).abs() < 1e-10);
            prop_assert!((p0.moment - p1.moment).abs() < 1e-10);
        }
    }
}
