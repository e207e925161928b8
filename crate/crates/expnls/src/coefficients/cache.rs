//! Optional on-disk cache for [`CoefficientTables`].
//!
//! Little-endian binary files with a versioned header, keyed by the full
//! parameter set `(grid, h, ν, nodes, alphas)`. The cache is a pure
//! optimization: a loaded table is bit-identical to a freshly computed one,
//! and any mismatch or corruption falls back to recomputation.
//!
//! The cache directory comes from the `EXPNLS_CACHE_DIR` environment variable
//! (see [`precompute_tables_env_cached`]) or is passed explicitly.

use super::{
    precompute_tables, CoefficientTables, CollocationNodes, Propagators, Regime,
};
use crate::spectral::Grid;
use crate::Result;
use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 8] = b"EXNLSTB1";
const VERSION: u32 = 1;

/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "EXPNLS_CACHE_DIR";

fn param_bytes(grid: &Grid, h: f64, nodes: &CollocationNodes, nu: f64, alphas: &[f64]) -> Vec<u8> {
    let mut b = grid.param_bytes();
    b.extend_from_slice(&h.to_bits().to_le_bytes());
    b.extend_from_slice(&nu.to_bits().to_le_bytes());
    b.extend_from_slice(&(nodes.s() as u64).to_le_bytes());
    for &c in nodes.values() {
        b.extend_from_slice(&c.to_bits().to_le_bytes());
    }
    b.extend_from_slice(&(alphas.len() as u64).to_le_bytes());
    for &a in alphas {
        b.extend_from_slice(&a.to_bits().to_le_bytes());
    }
    b
}

fn fnv64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn cache_path(dir: &Path, params: &[u8]) -> PathBuf {
    dir.join(format!("expnls-{:016x}.tables", fnv64(params)))
}

fn write_complex_array(out: &mut Vec<u8>, data: &[Complex64]) {
    for v in data {
        out.extend_from_slice(&v.re.to_bits().to_le_bytes());
        out.extend_from_slice(&v.im.to_bits().to_le_bytes());
    }
}

fn read_u32(bytes: &mut &[u8]) -> Option<u32> {
    let (head, rest) = bytes.split_first_chunk::<4>()?;
    *bytes = rest;
    Some(u32::from_le_bytes(*head))
}

fn read_u64(bytes: &mut &[u8]) -> Option<u64> {
    let (head, rest) = bytes.split_first_chunk::<8>()?;
    *bytes = rest;
    Some(u64::from_le_bytes(*head))
}

fn read_f64(bytes: &mut &[u8]) -> Option<f64> {
    Some(f64::from_bits(read_u64(bytes)?))
}

fn read_complex_array(bytes: &mut &[u8], n: usize) -> Option<Vec<Complex64>> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let re = read_f64(bytes)?;
        let im = read_f64(bytes)?;
        out.push(Complex64::new(re, im));
    }
    Some(out)
}

/// Serialize tables to the cache encoding.
fn encode(tables: &CoefficientTables, params: &[u8]) -> Vec<u8> {
    let s = tables.s();
    let n = tables.b(0).len();
    let alphas = tables.propagators().alphas();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    out.extend_from_slice(params);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(s as u32).to_le_bytes());
    out.extend_from_slice(&(alphas.len() as u32).to_le_bytes());
    out.extend_from_slice(&tables.h().to_bits().to_le_bytes());
    out.extend_from_slice(&tables.nu().to_bits().to_le_bytes());
    for &c in tables.nodes_c() {
        out.extend_from_slice(&c.to_bits().to_le_bytes());
    }
    for &a in alphas {
        out.extend_from_slice(&a.to_bits().to_le_bytes());
    }
    for r in tables.regimes() {
        out.push(match r {
            Regime::Contour => 0,
            Regime::Direct => 1,
        });
    }
    for k in 0..s {
        for l in 0..s {
            write_complex_array(&mut out, tables.a(k, l));
        }
    }
    for k in 0..s {
        write_complex_array(&mut out, tables.b(k));
    }
    for i in 0..alphas.len() {
        write_complex_array(&mut out, tables.propagators().symbols(i));
    }
    out
}

fn decode(mut bytes: &[u8], params: &[u8]) -> Option<CoefficientTables> {
    let (magic, rest) = bytes.split_first_chunk::<8>()?;
    bytes = rest;
    if magic != MAGIC || read_u32(&mut bytes)? != VERSION {
        return None;
    }
    let plen = read_u32(&mut bytes)? as usize;
    if bytes.len() < plen || &bytes[..plen] != params {
        return None;
    }
    bytes = &bytes[plen..];
    let n = read_u64(&mut bytes)? as usize;
    let s = read_u32(&mut bytes)? as usize;
    let n_alpha = read_u32(&mut bytes)? as usize;
    let h = read_f64(&mut bytes)?;
    let nu = read_f64(&mut bytes)?;
    let mut c = Vec::with_capacity(s);
    for _ in 0..s {
        c.push(read_f64(&mut bytes)?);
    }
    let mut alphas = Vec::with_capacity(n_alpha);
    for _ in 0..n_alpha {
        alphas.push(read_f64(&mut bytes)?);
    }
    if bytes.len() < n {
        return None;
    }
    let regimes: Vec<Regime> = bytes[..n]
        .iter()
        .map(|&b| if b == 0 { Regime::Contour } else { Regime::Direct })
        .collect();
    bytes = &bytes[n..];
    let mut a = Vec::with_capacity(s * s);
    for _ in 0..s * s {
        a.push(read_complex_array(&mut bytes, n)?);
    }
    let mut b = Vec::with_capacity(s);
    for _ in 0..s {
        b.push(read_complex_array(&mut bytes, n)?);
    }
    let mut symbols = Vec::with_capacity(n_alpha);
    for _ in 0..n_alpha {
        symbols.push(read_complex_array(&mut bytes, n)?);
    }
    if !bytes.is_empty() {
        return None;
    }
    Some(CoefficientTables {
        s,
        h,
        nu,
        c,
        a,
        b,
        props: Propagators { alphas, symbols },
        regimes,
    })
}

/// Compute tables, consulting/filling the cache under `dir` when given.
pub fn precompute_tables_cached(
    dir: Option<&Path>,
    grid: &Grid,
    h: f64,
    nodes: &CollocationNodes,
    nu: f64,
    alphas: &[f64],
) -> Result<CoefficientTables> {
    let alphas = super::dedup_alphas(alphas);
    let Some(dir) = dir else {
        return precompute_tables(grid, h, nodes, nu, &alphas);
    };
    let params = param_bytes(grid, h, nodes, nu, &alphas);
    let path = cache_path(dir, &params);
    if let Ok(mut f) = std::fs::File::open(&path) {
        let mut buf = Vec::new();
        if f.read_to_end(&mut buf).is_ok() {
            if let Some(tables) = decode(&buf, &params) {
                return Ok(tables);
            }
        }
    }
    let tables = precompute_tables(grid, h, nodes, nu, &alphas)?;
    // best effort: a failed store must not fail the computation
    let _ = std::fs::create_dir_all(dir);
    if let Ok(mut f) = std::fs::File::create(&path) {
        let _ = f.write_all(&encode(&tables, &params));
    }
    Ok(tables)
}

/// Like [`precompute_tables_cached`] with the directory taken from
/// `EXPNLS_CACHE_DIR` (unset or empty disables caching).
pub fn precompute_tables_env_cached(
    grid: &Grid,
    h: f64,
    nodes: &CollocationNodes,
    nu: f64,
    alphas: &[f64],
) -> Result<CoefficientTables> {
    let dir = std::env::var_os(CACHE_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    precompute_tables_cached(dir.as_deref(), grid, h, nodes, nu, alphas)
}
