//! Plain-text image files.
//!
//! ```text
//! psi=20
//! seed=42
//! attitude=r00 r01 r02 r10 r11 r12 r20 r21 r22
//! center=x y z
//! x y z label
//! ...
//! ```
//!
//! Labels are catalog ids or `SPIKE`. Lines starting with `#` are comments.
//! An image without truth (e.g. real sensor data) may use `?` as label and
//! omit the attitude and center lines.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use starid_core::{RotationMatrix, StarLabel, SyntheticImage, UnitVector3};

use crate::Error;

pub fn format_image(img: &SyntheticImage) -> String {
    let mut s = String::new();
    let a = img.attitude.to_flat();
    let c = img.center;
    writeln!(s, "psi={}", img.psi).unwrap();
    writeln!(s, "seed={}", img.seed).unwrap();
    writeln!(s, "attitude={}", a.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")).unwrap();
    writeln!(s, "center={} {} {}", c.x(), c.y(), c.z()).unwrap();
    for (v, l) in img.stars.iter().zip(&img.labels) {
        writeln!(s, "{} {} {} {l}", v.x(), v.y(), v.z()).unwrap();
    }
    s
}

pub fn write_image(path: &Path, img: &SyntheticImage) -> Result<(), Error> {
    fs::write(path, format_image(img)).map_err(|e| Error::io(path, e))
}

/// A parsed image file. Labels are `None` where the file has `?`.
#[derive(Debug, Clone)]
pub struct ImageFile {
    pub stars: Vec<UnitVector3>,
    pub labels: Vec<Option<StarLabel>>,
    pub psi: f64,
    pub seed: u64,
    pub attitude: Option<RotationMatrix>,
    pub center: Option<UnitVector3>,
}

fn reals<const N: usize>(s: &str, path: &Path, line: usize) -> Result<[f64; N], Error> {
    let v: Vec<f64> = s
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| Error::parse(path, line, "invalid number"))?;
    v.try_into().map_err(|_| Error::parse(path, line, format!("expected {N} numbers")))
}

pub fn parse_image(text: &str, path: &Path) -> Result<ImageFile, Error> {
    let mut img = ImageFile {
        stars: Vec::new(),
        labels: Vec::new(),
        psi: starid_core::DEFAULT_PSI_MAX,
        seed: 0,
        attitude: None,
        center: None,
    };
    for (n, line) in text.lines().enumerate() {
        let n = n + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            match key.trim() {
                "psi" => img.psi = value.trim().parse().map_err(|_| Error::parse(path, n, "invalid psi"))?,
                "seed" => img.seed = value.trim().parse().map_err(|_| Error::parse(path, n, "invalid seed"))?,
                "attitude" => img.attitude = Some(RotationMatrix::from_flat(reals::<9>(value, path, n)?)),
                "center" => {
                    let [x, y, z] = reals::<3>(value, path, n)?;
                    img.center = Some(UnitVector3::new(x, y, z).ok_or_else(|| Error::parse(path, n, "zero center"))?);
                }
                other => return Err(Error::parse(path, n, format!("unknown header `{other}`"))),
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(path, n, "expected `x y z label`"));
        }
        let [x, y, z] = reals::<3>(&fields[..3].join(" "), path, n)?;
        let v = UnitVector3::new(x, y, z).ok_or_else(|| Error::parse(path, n, "zero vector"))?;
        let label = match fields[3] {
            "?" => None,
            "SPIKE" => Some(StarLabel::Spike),
            id => Some(StarLabel::Catalog(id.parse().map_err(|_| Error::parse(path, n, "invalid label"))?)),
        };
        img.stars.push(v);
        img.labels.push(label);
    }
    Ok(img)
}

pub fn read_image(path: &Path) -> Result<ImageFile, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_image(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SyntheticImage {
        let a = RotationMatrix::from_axis_angle(&UnitVector3::new(1.0, 2.0, 3.0).unwrap(), 37.0);
        let stars = vec![UnitVector3::new(0.1, 0.2, 1.0).unwrap(), UnitVector3::new(-0.05, 0.1, 1.0).unwrap()];
        SyntheticImage {
            stars,
            labels: vec![StarLabel::Catalog(32349), StarLabel::Spike],
            psi: 20.0,
            center: UnitVector3::Z,
            attitude: a,
            seed: 99,
        }
    }

    #[test]
    fn round_trip() {
        let img = sample();
        let back = parse_image(&format_image(&img), Path::new("img.txt")).unwrap();
        assert_eq!(back.seed, 99);
        assert_eq!(back.psi, 20.0);
        assert_eq!(back.attitude.unwrap().max_abs_diff(&img.attitude), 0.0);
        assert_eq!(back.labels, vec![Some(StarLabel::Catalog(32349)), Some(StarLabel::Spike)]);
        for (a, b) in back.stars.iter().zip(&img.stars) {
            assert!((a.as_vector() - b.as_vector()).norm() < 1e-15);
        }
    }

    #[test]
    fn unlabeled_stars() {
        let img = parse_image("0 0 1 ?\n0.01 0 1 ?\n", Path::new("x")).unwrap();
        assert_eq!(img.labels, vec![None, None]);
        assert!(img.attitude.is_none());
    }

    #[test]
    fn bad_line_reports_position() {
        let err = parse_image("psi=20\n0 0 1\n", Path::new("x")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
