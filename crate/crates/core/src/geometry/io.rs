//! Boundary file ingestion.
//!
//! `poly2d`: text format, `loop` opens a loop, `v <x> <y>` adds a vertex
//! (counter-clockwise winding = material on the left), `#` starts a comment.
//! `off3d`: standard OFF triangle mesh.

use super::{BoundarySolid, GeometryError};
use crate::math::Vec3;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryFormat {
    Poly2d,
    Off3d,
}

pub fn load_boundary(
    path: &Path,
    format: BoundaryFormat,
    h_max: f64,
) -> Result<BoundarySolid, GeometryError> {
    let text = std::fs::read_to_string(path)?;
    match format {
        BoundaryFormat::Poly2d => parse_poly2d(&text, h_max),
        BoundaryFormat::Off3d => parse_off3d(&text, h_max),
    }
}

pub fn parse_poly2d(text: &str, h_max: f64) -> Result<BoundarySolid, GeometryError> {
    let mut loops: Vec<Vec<[f64; 2]>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("loop") => loops.push(Vec::new()),
            Some("v") => {
                let mut coord = |what: &str| -> Result<f64, GeometryError> {
                    parts
                        .next()
                        .ok_or_else(|| GeometryError::Parse {
                            line: lineno + 1,
                            msg: format!("missing {what} coordinate"),
                        })?
                        .parse()
                        .map_err(|_| GeometryError::Parse {
                            line: lineno + 1,
                            msg: format!("bad {what} coordinate"),
                        })
                };
                let x = coord("x")?;
                let y = coord("y")?;
                loops
                    .last_mut()
                    .ok_or_else(|| GeometryError::Parse {
                        line: lineno + 1,
                        msg: "vertex before any `loop`".into(),
                    })?
                    .push([x, y]);
            }
            Some(other) => {
                return Err(GeometryError::Parse {
                    line: lineno + 1,
                    msg: format!("unknown directive `{other}`"),
                })
            }
            None => {}
        }
    }
    if loops.is_empty() {
        return Err(GeometryError::Parse {
            line: 0,
            msg: "no loops in poly2d input".into(),
        });
    }
    BoundarySolid::from_loops_2d(&loops, h_max)
}

pub fn parse_off3d(text: &str, h_max: f64) -> Result<BoundarySolid, GeometryError> {
    let mut tokens = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        for t in line.split_whitespace() {
            tokens.push((lineno + 1, t));
        }
    }
    let mut it = tokens.into_iter();
    let (line0, magic) = it.next().ok_or(GeometryError::Parse {
        line: 0,
        msg: "empty OFF file".into(),
    })?;
    if magic != "OFF" {
        return Err(GeometryError::Parse {
            line: line0,
            msg: "missing OFF header".into(),
        });
    }
    let mut next_num = |what: &str| -> Result<(usize, f64), GeometryError> {
        let (line, t) = it.next().ok_or_else(|| GeometryError::Parse {
            line: 0,
            msg: format!("unexpected end of file reading {what}"),
        })?;
        t.parse::<f64>()
            .map(|v| (line, v))
            .map_err(|_| GeometryError::Parse {
                line,
                msg: format!("bad {what}: `{t}`"),
            })
    };
    let nv = next_num("vertex count")?.1 as usize;
    let nf = next_num("face count")?.1 as usize;
    let _ne = next_num("edge count")?.1 as usize;
    let mut vertices: Vec<Vec3> = Vec::with_capacity(nv);
    for _ in 0..nv {
        let x = next_num("x")?.1;
        let y = next_num("y")?.1;
        let z = next_num("z")?.1;
        vertices.push([x, y, z]);
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, k) = next_num("face arity")?;
        let k = k as usize;
        if k != 3 {
            return Err(GeometryError::Parse {
                line,
                msg: format!("only triangle faces supported, got {k}-gon"),
            });
        }
        let mut idx = [0usize; 3];
        for slot in idx.iter_mut() {
            let (line, v) = next_num("face index")?;
            let v = v as usize;
            if v >= nv {
                return Err(GeometryError::Parse {
                    line,
                    msg: format!("face index {v} out of range"),
                });
            }
            *slot = v;
        }
        triangles.push(idx);
    }
    BoundarySolid::from_triangles_3d(vertices, triangles, h_max)
}

/// Writes a triangle mesh as an OFF file.
pub fn write_off3d(path: &Path, vertices: &[Vec3], triangles: &[[usize; 3]]) -> std::io::Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "OFF")?;
    writeln!(f, "{} {} 0", vertices.len(), triangles.len())?;
    for v in vertices {
        writeln!(f, "{:e} {:e} {:e}", v[0], v[1], v[2])?;
    }
    for t in triangles {
        writeln!(f, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    f.flush()
}

/// Writes vertex loops as a poly2d file.
pub fn write_poly2d(path: &Path, loops: &[Vec<[f64; 2]>]) -> std::io::Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for lp in loops {
        writeln!(f, "loop")?;
        for v in lp {
            writeln!(f, "v {:e} {:e}", v[0], v[1])?;
        }
    }
    f.flush()
}
