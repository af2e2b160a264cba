//! Ground-truth labeled synthetic images.
//!
//! An image is the set of catalog stars within `psi / 2` of a boresight
//! `r_f`, rotated into the body frame by a true attitude. Positional noise
//! moves every star along a great circle toward a random direction by a
//! normally distributed angle; spikes are uniformly placed false stars.
//!
//! All randomness comes from a ChaCha8 stream seeded by a `u64`, so an image
//! is a pure function of its inputs and seed.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::catalog::CatalogStore;
use crate::error::{Error, Result};
use crate::geometry::{angular_separation, RotationMatrix, UnitVector3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StarLabel {
    Catalog(u32),
    Spike,
}

impl fmt::Display for StarLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StarLabel::Catalog(id) => write!(f, "{id}"),
            StarLabel::Spike => f.write_str("SPIKE"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSpec {
    /// Positional noise deviation, degrees.
    pub rho: f64,
    /// Number of false stars.
    pub omega: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticImage {
    pub stars: Vec<UnitVector3>,
    pub labels: Vec<StarLabel>,
    pub psi: f64,
    /// Boresight in the body frame.
    pub center: UnitVector3,
    /// Inertial to body.
    pub attitude: RotationMatrix,
    pub seed: u64,
}

impl SyntheticImage {
    pub fn len(&self) -> usize {
        self.stars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stars.is_empty()
    }

    pub fn true_count(&self) -> usize {
        self.labels.iter().filter(|l| matches!(l, StarLabel::Catalog(_))).count()
    }

    fn in_field(&self, v: &UnitVector3) -> bool {
        angular_separation(v, &self.center) < self.psi / 2.0
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform direction: components drawn from U(-1, 1), kept only inside the
/// unit ball, then normalized.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> UnitVector3 {
    loop {
        let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n <= 1.0 && n > 1e-6 {
            if let Some(u) = UnitVector3::from_vector(v) {
                return u;
            }
        }
    }
}

/// Uniformly distributed rotation (normalized Gaussian quaternion).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> RotationMatrix {
    loop {
        let q: [f64; 4] = core::array::from_fn(|_| StandardNormal.sample(rng));
        if q.iter().map(|x| x * x).sum::<f64>() > 1e-12 {
            return RotationMatrix::from_quaternion(q[0], q[1], q[2], q[3]);
        }
    }
}

/// Rotates every catalog star within `psi / 2` of `r_f` into the body frame.
/// Stars come out in ascending catalog id.
pub fn generate_image(
    store: &CatalogStore,
    psi: f64,
    attitude: &RotationMatrix,
    r_f: &UnitVector3,
    seed: u64,
) -> Result<SyntheticImage> {
    if !(psi > 0.0 && psi <= 180.0) {
        return Err(Error::InvalidConfig("field of view must be in (0, 180]"));
    }
    let mut image = SyntheticImage {
        stars: Vec::new(),
        labels: Vec::new(),
        psi,
        center: attitude.rotate(r_f),
        attitude: *attitude,
        seed,
    };
    for s in store.nearby_stars_uncounted(r_f, psi / 2.0) {
        let b = attitude.rotate(&s.v);
        // a star sitting on the field edge can drift across it in rotation
        if image.in_field(&b) {
            image.stars.push(b);
            image.labels.push(StarLabel::Catalog(s.id));
        }
    }
    if image.is_empty() {
        return Err(Error::EmptyImage);
    }
    Ok(image)
}

/// One noisy draw of `b`: great-circle step toward a random direction by an
/// angle distributed as N(0, rho²) in degrees.
pub fn perturb<R: Rng + ?Sized>(b: &UnitVector3, normal: &Normal<f64>, rng: &mut R) -> UnitVector3 {
    loop {
        let star = random_direction(rng);
        let omega = star.dot(b).clamp(-1.0, 1.0).acos();
        let sin_omega = omega.sin();
        if sin_omega < 1e-9 {
            continue;
        }
        let k = normal.sample(rng) / omega.to_degrees();
        let v = b.as_vector() * (((1.0 - k) * omega).sin() / sin_omega) + star.as_vector() * ((k * omega).sin() / sin_omega);
        if let Some(u) = UnitVector3::from_vector(v) {
            return u;
        }
    }
}

/// Applies positional noise to every star, redrawing any star that leaves
/// the field. `rho = 0` leaves the image untouched.
pub fn apply_gaussian_noise<R: Rng + ?Sized>(image: &mut SyntheticImage, rho: f64, rng: &mut R) -> Result<()> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::InvalidConfig("noise deviation must be non-negative"));
    }
    if rho == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, rho).map_err(|_| Error::InvalidConfig("noise deviation must be non-negative"))?;
    for i in 0..image.stars.len() {
        let b = image.stars[i];
        image.stars[i] = loop {
            let candidate = perturb(&b, &normal, rng);
            if image.in_field(&candidate) {
                break candidate;
            }
        };
    }
    Ok(())
}

/// Appends `omega` false stars placed uniformly inside the field.
pub fn add_spikes<R: Rng + ?Sized>(image: &mut SyntheticImage, omega: usize, rng: &mut R) {
    for _ in 0..omega {
        let v = loop {
            let v = random_direction(rng);
            if image.in_field(&v) {
                break v;
            }
        };
        image.stars.push(v);
        image.labels.push(StarLabel::Spike);
    }
}

/// Random reordering of the image stars, labels kept attached.
pub fn shuffle<R: Rng + ?Sized>(image: &mut SyntheticImage, rng: &mut R) {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..image.stars.len()).collect();
    order.shuffle(rng);
    image.stars = order.iter().map(|&i| image.stars[i]).collect();
    image.labels = order.iter().map(|&i| image.labels[i]).collect();
}

/// A benchmark trial image: uniform attitude and boresight, resampled until
/// the field holds at least `min_stars` catalog stars, then noise, spikes
/// and a shuffle.
pub fn sample_image(store: &CatalogStore, psi: f64, noise: NoiseSpec, min_stars: usize, seed: u64) -> Result<SyntheticImage> {
    if store.stars().len() < min_stars.max(1) {
        return Err(Error::EmptyImage);
    }
    let mut rng = rng_from_seed(seed);
    let mut image = loop {
        let attitude = random_rotation(&mut rng);
        let r_f = random_direction(&mut rng);
        match generate_image(store, psi, &attitude, &r_f, seed) {
            Ok(img) if img.len() >= min_stars => break img,
            Ok(_) | Err(Error::EmptyImage) => continue,
            Err(e) => return Err(e),
        }
    };
    apply_gaussian_noise(&mut image, noise.rho, &mut rng)?;
    add_spikes(&mut image, noise.omega, &mut rng);
    shuffle(&mut image, &mut rng);
    Ok(image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{CatalogParams, CatalogStar};
    use std::vec;

    fn store() -> CatalogStore {
        let mut stars = Vec::new();
        let mut id = 1;
        for a in 0..36 {
            for d in -8..=8 {
                stars.push(CatalogStar::new(id, a as f64 * 10.0 + d as f64, d as f64 * 10.0, 3.0).unwrap());
                id += 1;
            }
        }
        CatalogStore::from_parts(
            stars,
            CatalogParams::default(),
            Default::default(),
            Default::default(),
            Default::default(),
            Default::default(),
        )
    }

    #[test]
    fn identity_image_equals_catalog() {
        let s = store();
        let r_f = UnitVector3::X;
        let img = generate_image(&s, 20.0, &RotationMatrix::IDENTITY, &r_f, 0).unwrap();
        for (v, l) in img.stars.iter().zip(&img.labels) {
            let StarLabel::Catalog(id) = l else { panic!() };
            assert!((v.as_vector() - s.star(*id).unwrap().v.as_vector()).norm() < 1e-15);
        }
    }

    #[test]
    fn inverse_rotation_recovers_catalog() {
        let s = store();
        let mut rng = rng_from_seed(3);
        let a = random_rotation(&mut rng);
        let img = generate_image(&s, 20.0, &a, &UnitVector3::new(0.3, 0.9, 0.1).unwrap(), 0).unwrap();
        assert!(!img.is_empty());
        for (v, l) in img.stars.iter().zip(&img.labels) {
            let StarLabel::Catalog(id) = l else { panic!() };
            let back = a.transpose().rotate(v);
            assert!((back.as_vector() - s.star(*id).unwrap().v.as_vector()).norm() < 1e-12);
            assert!(img.in_field(v));
        }
    }

    #[test]
    fn empty_field_is_an_error() {
        let s = CatalogStore::from_parts(
            vec![CatalogStar::new(1, 0.0, 0.0, 1.0).unwrap()],
            CatalogParams::default(),
            Default::default(),
            Default::default(),
            Default::default(),
            Default::default(),
        );
        let err = generate_image(&s, 20.0, &RotationMatrix::IDENTITY, &UnitVector3::Z, 0).unwrap_err();
        assert_eq!(err, Error::EmptyImage);
    }

    #[test]
    fn zero_noise_is_identity() {
        let s = store();
        let mut img = generate_image(&s, 20.0, &RotationMatrix::IDENTITY, &UnitVector3::X, 0).unwrap();
        let before = img.clone();
        apply_gaussian_noise(&mut img, 0.0, &mut rng_from_seed(1)).unwrap();
        assert_eq!(img, before);
        add_spikes(&mut img, 0, &mut rng_from_seed(1));
        assert_eq!(img, before);
    }

    #[test]
    fn noise_displacement_deviation_matches_rho() {
        let rho = 0.05;
        let normal = Normal::new(0.0, rho).unwrap();
        let mut rng = rng_from_seed(11);
        let b = UnitVector3::new(0.2, -0.4, 0.7).unwrap();
        let n = 100_000;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let v = perturb(&b, &normal, &mut rng);
            assert!((v.as_vector().norm() - 1.0).abs() < 1e-10);
            let d = angular_separation(&b, &v);
            sum_sq += d * d;
        }
        let dev = (sum_sq / n as f64).sqrt();
        assert!((dev - rho).abs() / rho < 0.05, "deviation {dev}");
    }

    #[test]
    fn spikes_counted_and_in_field() {
        let s = store();
        let mut img = generate_image(&s, 20.0, &RotationMatrix::IDENTITY, &UnitVector3::X, 0).unwrap();
        let real = img.len();
        add_spikes(&mut img, 12, &mut rng_from_seed(5));
        assert_eq!(img.len(), real + 12);
        assert_eq!(img.labels.iter().filter(|l| **l == StarLabel::Spike).count(), 12);
        assert!(img.stars.iter().all(|v| img.in_field(v)));
    }

    #[test]
    fn spikes_uniform_over_cap() {
        // Equal-area rings of the cap: 1 - cos(t) splits evenly.
        let psi = 20.0f64;
        let center = UnitVector3::new(0.5, 0.5, 0.7).unwrap();
        let mut img = SyntheticImage {
            stars: Vec::new(),
            labels: Vec::new(),
            psi,
            center,
            attitude: RotationMatrix::IDENTITY,
            seed: 0,
        };
        add_spikes(&mut img, 10_000, &mut rng_from_seed(77));
        let bins = 10;
        let cap = 1.0 - (psi / 2.0).to_radians().cos();
        let mut counts = vec![0usize; bins];
        for v in &img.stars {
            let t = angular_separation(v, &center).to_radians();
            let idx = (((1.0 - t.cos()) / cap) * bins as f64) as usize;
            counts[idx.min(bins - 1)] += 1;
        }
        let expected = 10_000.0 / bins as f64;
        let chi2: f64 = counts.iter().map(|c| (*c as f64 - expected).powi(2) / expected).sum();
        // chi-square critical value, 9 degrees of freedom, alpha = 0.01
        assert!(chi2 < 21.666, "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn seed_determinism() {
        let s = store();
        let noise = NoiseSpec { rho: 1e-3, omega: 3 };
        let a = sample_image(&s, 20.0, noise, 4, 42).unwrap();
        let b = sample_image(&s, 20.0, noise, 4, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_image(&s, 20.0, noise, 4, 43).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.labels.iter().filter(|l| **l == StarLabel::Spike).count(), 3);
        assert!(a.true_count() >= 4);
    }

    #[test]
    fn rotations_are_proper() {
        let mut rng = rng_from_seed(9);
        for _ in 0..100 {
            assert!(random_rotation(&mut rng).is_proper_rotation(1e-12));
        }
    }
}
