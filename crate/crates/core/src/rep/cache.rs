//! On-disk cache of irrep matrix tables, one file per group.
//!
//! Layout (all integers little-endian `u32`, floats little-endian `f64`):
//!
//! ```text
//! magic        8 bytes  "HSLABIRR"
//! version      u32      CACHE_FORMAT_VERSION
//! descriptor   u32 length + UTF-8 bytes   e.g. "S4"
//! order        u32      |G|
//! count        u32      number of irreps
//! per irrep:
//!   label      u32 length + UTF-8 bytes   e.g. "[3,1]" or "chi[0,1]"
//!   dim        u32      d
//!   matrices   |G|·d·d pairs (re, im), element-index order, each matrix row-major
//! ```
//!
//! Any file that fails to parse, carries another version or descriptor, or
//! has trailing bytes is ignored and rebuilt.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::group::Group;
use crate::linalg::{CMat, C64};
use crate::rep::{irreps, Irrep, IrrepLabel};

pub const CACHE_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"HSLABIRR";

/// Environment variable that overrides [`default_cache_dir`].
pub const CACHE_ENV: &str = "HSLAB_CACHE";

/// `$HSLAB_CACHE` if set, else `hslab-cache` under the system temp directory.
pub fn default_cache_dir() -> PathBuf {
    match std::env::var_os(CACHE_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => std::env::temp_dir().join("hslab-cache"),
    }
}

pub fn cache_path(dir: &Path, group: &Group) -> PathBuf {
    dir.join(format!("{}.irreps", group.descriptor()))
}

pub fn encode(group: &Group, irreps: &[Irrep]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CACHE_FORMAT_VERSION.to_le_bytes());
    put_str(&mut out, &group.descriptor().to_string());
    out.extend_from_slice(&(group.order() as u32).to_le_bytes());
    out.extend_from_slice(&(irreps.len() as u32).to_le_bytes());
    for rho in irreps {
        put_str(&mut out, &rho.label.to_string());
        out.extend_from_slice(&(rho.dim as u32).to_le_bytes());
        for m in &rho.matrices {
            for z in m.as_slice() {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    out
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        if self.buf.len() < n {
            return None;
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Some(head)
    }

    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }

    fn f64(&mut self) -> Option<f64> {
        Some(f64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }

    fn string(&mut self) -> Option<String> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec()).ok()
    }
}

/// Parses a cache image for `group`; `None` if it is unusable.
pub fn decode(group: &Group, bytes: &[u8]) -> Option<Vec<Irrep>> {
    let mut r = Reader { buf: bytes };
    if r.take(8)? != MAGIC || r.u32()? != CACHE_FORMAT_VERSION {
        return None;
    }
    if r.string()? != group.descriptor().to_string() || r.u32()? as usize != group.order() {
        return None;
    }
    let count = r.u32()? as usize;
    if count > group.order() {
        return None;
    }
    let mut out = Vec::with_capacity(count);
    let mut dim_squares = 0;
    for _ in 0..count {
        let label: IrrepLabel = r.string()?.parse().ok()?;
        let dim = r.u32()? as usize;
        dim_squares += dim * dim;
        if dim == 0 || dim_squares > group.order() {
            return None;
        }
        let mut matrices = Vec::with_capacity(group.order());
        for _ in 0..group.order() {
            let mut data = Vec::with_capacity(dim * dim);
            for _ in 0..dim * dim {
                let re = r.f64()?;
                let im = r.f64()?;
                data.push(C64::new(re, im));
            }
            matrices.push(CMat::from_vec(dim, dim, data));
        }
        out.push(Irrep { label, dim, matrices });
    }
    if !r.buf.is_empty() || dim_squares != group.order() {
        return None;
    }
    Some(out)
}

/// Irreps of `group`, read from `dir` when a valid cache file exists and
/// computed (then written back) otherwise.
pub fn irreps_cached(group: &Group, dir: &Path) -> Result<Vec<Irrep>> {
    let path = cache_path(dir, group);
    if let Ok(bytes) = fs::read(&path) {
        if let Some(reps) = decode(group, &bytes) {
            return Ok(reps);
        }
    }
    let reps = irreps(group)?;
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension(format!("irreps.tmp{}", std::process::id()));
    fs::write(&tmp, encode(group, &reps))?;
    fs::rename(&tmp, &path)?;
    Ok(reps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_rebuild() {
        let dir = tempfile::tempdir().unwrap();
        let g = Group::symmetric(4).unwrap();
        let built = irreps_cached(&g, dir.path()).unwrap();
        let path = cache_path(dir.path(), &g);
        assert!(path.exists());
        let loaded = irreps_cached(&g, dir.path()).unwrap();
        assert_eq!(built, loaded);

        // truncate: ignored and rebuilt
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert_eq!(irreps_cached(&g, dir.path()).unwrap(), built);
        assert_eq!(fs::read(&path).unwrap(), bytes);

        // version mismatch
        let mut wrong = bytes.clone();
        wrong[8] = 99;
        assert!(decode(&g, &wrong).is_none());
        fs::write(&path, &wrong).unwrap();
        assert_eq!(irreps_cached(&g, dir.path()).unwrap(), built);

        // file for a different group
        let z = Group::abelian(&[24]).unwrap();
        assert!(decode(&z, &bytes).is_none());
    }

    #[test]
    fn header_layout() {
        let g = Group::abelian(&[2]).unwrap();
        let bytes = encode(&g, &irreps(&g).unwrap());
        assert_eq!(&bytes[..8], b"HSLABIRR");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 2);
        assert_eq!(&bytes[16..18], b"Z2");
        // header + two irreps of (label "chi[x]" + dim + 2 matrices of one complex entry)
        assert_eq!(bytes.len(), 18 + 4 + 4 + 2 * (4 + 6 + 4 + 2 * 16));
    }
}
