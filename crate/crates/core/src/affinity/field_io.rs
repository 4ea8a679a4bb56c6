//! Field serialization: `SDF1` binary and plot-ready CSV.
//!
//! Binary layout (little endian):
//!   magic `SDF1` (4 bytes), dimension u8, dims 3 x u64, origin 3 x f64,
//!   spacing 3 x f64, params block (sigma, lambda1, lambda2, eps,
//!   probe_radius as f64), shape_id (u32 length + utf8 bytes), then
//!   row-major (x fastest) complex samples as f64 re/im pairs.

use super::{AffinityField, GridSpec, KernelParams};
use num_complex::Complex64;
use std::io::{self, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"SDF1";

pub fn write_field_binary(path: &Path, field: &AffinityField) -> io::Result<()> {
    let mut f = io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(MAGIC)?;
    f.write_all(&[field.dimension()])?;
    let g = field.grid();
    for d in g.dims {
        f.write_all(&(d as u64).to_le_bytes())?;
    }
    for v in g.origin.iter().chain(g.spacing.iter()) {
        f.write_all(&v.to_le_bytes())?;
    }
    let p = field.params();
    for v in [p.sigma, p.lambda1, p.lambda2, p.eps, p.probe_radius] {
        f.write_all(&v.to_le_bytes())?;
    }
    let id = field.shape_id.as_bytes();
    f.write_all(&(id.len() as u32).to_le_bytes())?;
    f.write_all(id)?;
    for z in field.data() {
        f.write_all(&z.re.to_le_bytes())?;
        f.write_all(&z.im.to_le_bytes())?;
    }
    f.flush()
}

pub fn read_field(path: &Path) -> io::Result<AffinityField> {
    let mut f = io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    f.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad SDF1 magic"));
    }
    let mut dim = [0u8; 1];
    f.read_exact(&mut dim)?;
    let mut u64buf = [0u8; 8];
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        f.read_exact(&mut u64buf)?;
        *d = u64::from_le_bytes(u64buf) as usize;
    }
    let read_f64 = |f: &mut dyn Read| -> io::Result<f64> {
        let mut b = [0u8; 8];
        f.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    let mut origin = [0.0; 3];
    let mut spacing = [0.0; 3];
    for v in origin.iter_mut() {
        *v = read_f64(&mut f)?;
    }
    for v in spacing.iter_mut() {
        *v = read_f64(&mut f)?;
    }
    let params = KernelParams {
        sigma: read_f64(&mut f)?,
        lambda1: read_f64(&mut f)?,
        lambda2: read_f64(&mut f)?,
        eps: read_f64(&mut f)?,
        probe_radius: read_f64(&mut f)?,
    };
    let mut u32buf = [0u8; 4];
    f.read_exact(&mut u32buf)?;
    let id_len = u32::from_le_bytes(u32buf) as usize;
    let mut id = vec![0u8; id_len];
    f.read_exact(&mut id)?;
    let shape_id = String::from_utf8(id)
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "bad shape id"))?;
    let grid = GridSpec {
        origin,
        spacing,
        dims,
    };
    let n = grid.node_count();
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        let re = read_f64(&mut f)?;
        let im = read_f64(&mut f)?;
        data.push(Complex64::new(re, im));
    }
    let mut field = AffinityField::new(grid, dim[0], data, params);
    field.shape_id = shape_id;
    Ok(field)
}

/// CSV export: `x,y[,z],re,im` per node, full-precision scientific notation.
pub fn write_field_csv(path: &Path, field: &AffinityField) -> io::Result<()> {
    let mut f = io::BufWriter::new(std::fs::File::create(path)?);
    if field.dimension() == 2 {
        writeln!(f, "x,y,re,im")?;
    } else {
        writeln!(f, "x,y,z,re,im")?;
    }
    for (i, z) in field.data().iter().enumerate() {
        let p = field.grid().node_pos(i);
        if field.dimension() == 2 {
            writeln!(f, "{:e},{:e},{:e},{:e}", p[0], p[1], z.re, z.im)?;
        } else {
            writeln!(f, "{:e},{:e},{:e},{:e},{:e}", p[0], p[1], p[2], z.re, z.im)?;
        }
    }
    f.flush()
}
