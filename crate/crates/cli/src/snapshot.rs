//! Bit-exact binary snapshot format (.nsms):
//!
//! - magic "NSMS" (4 bytes)
//! - version u32 = 1, little-endian
//! - u32 d, u32 N, u32 field_count
//! - f64 L, f64 t
//! - per field: 8-byte ASCII name, space-padded ("v1".."v3", "E1".."E3",
//!   "B1".."B3" — one entry per vector component), then N^d coefficients as
//!   (f64 re, f64 im) little-endian pairs, row-major with FFT-standard
//!   per-axis frequency ordering.
//!
//! Save-then-load reproduces every bit; the loader validates magic, version
//! and payload size.

use anyhow::{bail, Context, Result};
use nsm_core::{make_grid, PlasmaState, SpectralField};
use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"NSMS";
const VERSION: u32 = 1;

fn padded_name(name: &str) -> [u8; 8] {
    let mut out = [b' '; 8];
    out[..name.len()].copy_from_slice(name.as_bytes());
    out
}

fn component_names(field: char) -> [String; 3] {
    [1, 2, 3].map(|i| format!("{field}{i}"))
}

pub fn save(path: &Path, state: &PlasmaState) -> Result<()> {
    let grid = state.v.grid();
    let mut fields: Vec<(String, &[Complex64])> = Vec::new();
    for (label, f) in [('v', Some(&state.v)), ('E', state.e.as_ref()), ('B', Some(&state.b))] {
        if let Some(f) = f {
            for (m, name) in component_names(label).into_iter().enumerate() {
                fields.push((name, f.comp(m)));
            }
        }
    }

    let file = std::fs::File::create(path)
        .with_context(|| format!("cannot create snapshot {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(grid.d() as u32).to_le_bytes())?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&(fields.len() as u32).to_le_bytes())?;
    w.write_all(&grid.len().to_le_bytes())?;
    w.write_all(&state.t.to_le_bytes())?;
    for (name, data) in fields {
        w.write_all(&padded_name(&name))?;
        for c in data {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Parsed snapshot header, as printed by `inspect`.
#[derive(Clone, Debug)]
pub struct SnapshotHeader {
    pub d: usize,
    pub n: usize,
    pub field_count: usize,
    pub len: f64,
    pub t: f64,
    pub names: Vec<String>,
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn load(path: &Path) -> Result<(SnapshotHeader, PlasmaState)> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("cannot open snapshot {}", path.display()))?;
    let mut r = std::io::BufReader::new(file);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).context("truncated header")?;
    if &magic != MAGIC {
        bail!("bad magic {magic:?}; not a snapshot file");
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        bail!("unsupported snapshot version {version} (expected {VERSION})");
    }
    let d = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let field_count = read_u32(&mut r)? as usize;
    let len = read_f64(&mut r)?;
    let t = read_f64(&mut r)?;

    let grid = make_grid(d, n, len).map_err(|e| anyhow::anyhow!("snapshot grid invalid: {e}"))?;
    let size = grid.size();

    let mut names = Vec::with_capacity(field_count);
    let mut arrays: Vec<Vec<Complex64>> = Vec::with_capacity(field_count);
    let mut buf = vec![0u8; 16 * size];
    for _ in 0..field_count {
        let mut name = [0u8; 8];
        r.read_exact(&mut name).context("truncated field name")?;
        names.push(String::from_utf8_lossy(&name).trim_end().to_string());
        r.read_exact(&mut buf).context("truncated field payload")?;
        let mut data = Vec::with_capacity(size);
        for chunk in buf.chunks_exact(16) {
            let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
            let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
            data.push(Complex64::new(re, im));
        }
        arrays.push(data);
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        bail!("trailing bytes after {field_count} fields");
    }

    let collect = |label: char| -> Result<Option<SpectralField>> {
        let wanted = component_names(label);
        let found: Vec<usize> = wanted
            .iter()
            .filter_map(|w| names.iter().position(|n| n == w))
            .collect();
        match found.len() {
            0 => Ok(None),
            3 => {
                let comps: [Vec<Complex64>; 3] = [
                    arrays[found[0]].clone(),
                    arrays[found[1]].clone(),
                    arrays[found[2]].clone(),
                ];
                Ok(Some(
                    SpectralField::from_components(&grid, comps)
                        .map_err(|e| anyhow::anyhow!("field {label}: {e}"))?,
                ))
            }
            k => bail!("field {label} has {k} of 3 components"),
        }
    };
    let v = collect('v')?;
    let e = collect('E')?;
    let b = collect('B')?;
    let (v, b) = match (v, b) {
        (Some(v), Some(b)) => (v, b),
        _ => bail!("snapshot must contain v and B fields"),
    };
    let mut state = PlasmaState::new(t, v, e, b);
    state.t = t;
    Ok((
        SnapshotHeader {
            d,
            n,
            field_count,
            len,
            t,
            names,
        },
        state,
    ))
}
