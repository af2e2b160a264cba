//! On-disk catalog store.
//!
//! A store is a directory holding `manifest.txt` (key=value lines) and one
//! little-endian binary file per table. The manifest records the build
//! parameters, the row counts, the SHA-256 of the source table and of every
//! binary file; loading verifies all of them.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use starid_core::catalog::{CatalogParams, FeatureTable, PairEntry, PermEntry, TrioEntry};
use starid_core::{CatalogStar, CatalogStore};

use crate::Error;

pub const MANIFEST: &str = "manifest.txt";
const FORMAT: &str = "starid-store-1";

trait Record: Sized {
    const SIZE: usize;
    fn encode(&self, out: &mut Vec<u8>);
    fn decode(b: &[u8]) -> Option<Self>;
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

impl Record for CatalogStar {
    const SIZE: usize = 28;
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.id.to_le_bytes());
        out.extend_from_slice(&self.alpha.to_le_bytes());
        out.extend_from_slice(&self.delta.to_le_bytes());
        out.extend_from_slice(&self.magnitude.to_le_bytes());
    }
    fn decode(b: &[u8]) -> Option<Self> {
        CatalogStar::new(u32_at(b, 0), f64_at(b, 4), f64_at(b, 12), f64_at(b, 20))
    }
}

impl Record for PairEntry {
    const SIZE: usize = 16;
    fn encode(&self, out: &mut Vec<u8>) {
        for id in self.ids {
            out.extend_from_slice(&id.to_le_bytes());
        }
        out.extend_from_slice(&self.theta.to_le_bytes());
    }
    fn decode(b: &[u8]) -> Option<Self> {
        Some(PairEntry { ids: [u32_at(b, 0), u32_at(b, 4)], theta: f64_at(b, 8) })
    }
}

impl Record for TrioEntry {
    const SIZE: usize = 28;
    fn encode(&self, out: &mut Vec<u8>) {
        for id in self.ids {
            out.extend_from_slice(&id.to_le_bytes());
        }
        out.extend_from_slice(&self.area.to_le_bytes());
        out.extend_from_slice(&self.moment.to_le_bytes());
    }
    fn decode(b: &[u8]) -> Option<Self> {
        Some(TrioEntry { ids: [u32_at(b, 0), u32_at(b, 4), u32_at(b, 8)], area: f64_at(b, 12), moment: f64_at(b, 20) })
    }
}

impl Record for PermEntry {
    const SIZE: usize = 36;
    fn encode(&self, out: &mut Vec<u8>) {
        for id in self.ids {
            out.extend_from_slice(&id.to_le_bytes());
        }
        out.extend_from_slice(&self.theta1.to_le_bytes());
        out.extend_from_slice(&self.theta2.to_le_bytes());
        out.extend_from_slice(&self.phi.to_le_bytes());
    }
    fn decode(b: &[u8]) -> Option<Self> {
        Some(PermEntry {
            ids: [u32_at(b, 0), u32_at(b, 4), u32_at(b, 8)],
            theta1: f64_at(b, 12),
            theta2: f64_at(b, 20),
            phi: f64_at(b, 28),
        })
    }
}

/// Writes `rows` and returns the hex digest of the bytes written.
fn write_rows<R: Record>(path: &Path, rows: &[R]) -> Result<String, Error> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut hasher = Sha256::new();
    let mut buf = Vec::with_capacity(R::SIZE * 4096);
    for chunk in rows.chunks(4096) {
        buf.clear();
        for r in chunk {
            r.encode(&mut buf);
        }
        hasher.update(&buf);
        w.write_all(&buf).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(hasher.finalize()))
}

fn read_rows<R: Record>(path: &Path, count: usize, sha256: &str) -> Result<Vec<R>, Error> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
    if len != (count * R::SIZE) as u64 {
        return Err(Error::store(path, format!("expected {count} rows ({} bytes), found {len} bytes", count * R::SIZE)));
    }
    let mut r = BufReader::with_capacity(1 << 20, file);
    let mut hasher = Sha256::new();
    let mut rows = Vec::with_capacity(count);
    let mut buf = vec![0u8; R::SIZE * 4096];
    let mut left = count;
    while left > 0 {
        let n = left.min(4096);
        let bytes = &mut buf[..n * R::SIZE];
        r.read_exact(bytes).map_err(|e| Error::io(path, e))?;
        hasher.update(&*bytes);
        for rec in bytes.chunks_exact(R::SIZE) {
            rows.push(R::decode(rec).ok_or_else(|| Error::store(path, "invalid record"))?);
        }
        left -= n;
    }
    if hex::encode(hasher.finalize()) != sha256 {
        return Err(Error::store(path, "checksum mismatch"));
    }
    Ok(rows)
}

pub struct Manifest {
    pub entries: BTreeMap<String, String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self, Error> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let entries = crate::config::parse_key_values(&text, &path)?;
        Ok(Self { entries })
    }

    fn get(&self, dir: &Path, key: &str) -> Result<&str, Error> {
        self.entries.get(key).map(String::as_str).ok_or_else(|| Error::store(&dir.join(MANIFEST), format!("missing `{key}`")))
    }

    fn number<T: std::str::FromStr>(&self, dir: &Path, key: &str) -> Result<T, Error> {
        self.get(dir, key)?.parse().map_err(|_| Error::store(&dir.join(MANIFEST), format!("bad value for `{key}`")))
    }
}

const TABLES: [&str; 5] = ["stars", "pairs", "trios_spherical", "trios_planar", "permutations"];

fn table_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.bin"))
}

/// Writes `store` into `dir`, creating it when needed.
pub fn save_store(store: &CatalogStore, dir: &Path, source_sha256: &str) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let sums = [
        write_rows(&table_path(dir, TABLES[0]), store.stars())?,
        write_rows(&table_path(dir, TABLES[1]), store.pairs.rows())?,
        write_rows(&table_path(dir, TABLES[2]), store.trios_spherical.rows())?,
        write_rows(&table_path(dir, TABLES[3]), store.trios_planar.rows())?,
        write_rows(&table_path(dir, TABLES[4]), store.permutations.rows())?,
    ];
    let counts = [
        store.stars().len(),
        store.pairs.len(),
        store.trios_spherical.len(),
        store.trios_planar.len(),
        store.permutations.len(),
    ];
    let p = store.params;
    let mut text = format!(
        "format={FORMAT}\npsi_max={}\nmagnitude_cutoff={}\nmoment_depth={}\nsource_sha256={source_sha256}\n",
        p.psi_max, p.magnitude_cutoff, p.moment_depth
    );
    for ((name, count), sum) in TABLES.iter().zip(counts).zip(&sums) {
        text.push_str(&format!("{name}={count}\nsha256.{name}={sum}\n"));
    }
    let path = dir.join(MANIFEST);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

pub fn load_store(dir: &Path) -> Result<CatalogStore, Error> {
    if !dir.is_dir() {
        return Err(Error::store(dir, "catalog directory does not exist"));
    }
    let m = Manifest::read(dir)?;
    if m.get(dir, "format")? != FORMAT {
        return Err(Error::store(&dir.join(MANIFEST), "unsupported store format"));
    }
    let params = CatalogParams {
        psi_max: m.number(dir, "psi_max")?,
        magnitude_cutoff: m.number(dir, "magnitude_cutoff")?,
        moment_depth: m.number(dir, "moment_depth")?,
    };
    let load = |name: &str| -> Result<(PathBuf, usize, String), Error> {
        Ok((table_path(dir, name), m.number(dir, name)?, m.get(dir, &format!("sha256.{name}"))?.to_string()))
    };
    let (p, n, s) = load(TABLES[0])?;
    let stars: Vec<CatalogStar> = read_rows(&p, n, &s)?;
    let (p, n, s) = load(TABLES[1])?;
    let pairs = FeatureTable::from_rows(read_rows::<PairEntry>(&p, n, &s)?);
    let (p, n, s) = load(TABLES[2])?;
    let trios_spherical = FeatureTable::from_rows(read_rows::<TrioEntry>(&p, n, &s)?);
    let (p, n, s) = load(TABLES[3])?;
    let trios_planar = FeatureTable::from_rows(read_rows::<TrioEntry>(&p, n, &s)?);
    let (p, n, s) = load(TABLES[4])?;
    let permutations = FeatureTable::from_rows(read_rows::<PermEntry>(&p, n, &s)?);
    Ok(CatalogStore::from_parts(stars, params, pairs, trios_spherical, trios_planar, permutations))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_store() -> CatalogStore {
        let stars = (0..40u32)
            .map(|i| CatalogStar::new(i + 10, (i as f64 * 7.7) % 30.0, ((i as f64 * 5.3) % 20.0) - 10.0, 4.0).unwrap())
            .collect();
        CatalogStore::build(stars, CatalogParams::default())
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = small_store();
        save_store(&store, dir.path(), "abc").unwrap();
        let back = load_store(dir.path()).unwrap();
        assert_eq!(back.stars(), store.stars());
        assert_eq!(back.pairs, store.pairs);
        assert_eq!(back.trios_spherical, store.trios_spherical);
        assert_eq!(back.trios_planar, store.trios_planar);
        assert_eq!(back.permutations, store.permutations);
        assert_eq!(back.params, store.params);
    }

    #[test]
    fn corruption_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        save_store(&small_store(), dir.path(), "abc").unwrap();
        let path = table_path(dir.path(), "pairs");
        let mut bytes = fs::read(&path).unwrap();
        bytes[9] ^= 0x40;
        fs::write(&path, bytes).unwrap();
        assert!(matches!(load_store(dir.path()), Err(Error::Store { .. })));
    }

    #[test]
    fn missing_directory() {
        assert!(matches!(load_store(Path::new("/nonexistent/store")), Err(Error::Store { .. })));
    }
}
