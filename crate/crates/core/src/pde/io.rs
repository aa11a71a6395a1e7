//! Field dumps and boundary CSV.
//!
//! Binary layout, little-endian: magic `SFLD`, `u32` version, `f64` h,
//! `f64` x0 y0 x1 y1 (bounding box), `u64` nx ny count, then `count` records
//! of `u32` i, `u32` j, `f64` u.

use std::io::{self, Read, Write};

use super::{BoundaryDerivative, Field};
use crate::geometry::Point;

const MAGIC: &[u8; 4] = b"SFLD";
const VERSION: u32 = 1;

/// Header and nodal values read back from a field dump.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDump {
    pub h: f64,
    pub bbox: (Point, Point),
    pub nx: u64,
    pub ny: u64,
    pub nodes: Vec<(u32, u32, f64)>,
}

pub fn write_field<W: Write>(field: &Field, mut out: W) -> io::Result<()> {
    let g = &field.grid;
    let (lo, hi) = g.bbox();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    for v in [g.h, lo.x, lo.y, hi.x, hi.y] {
        out.write_all(&v.to_le_bytes())?;
    }
    for v in [g.nx as u64, g.ny as u64, g.len() as u64] {
        out.write_all(&v.to_le_bytes())?;
    }
    for (s, u) in g.stencils.iter().zip(&field.u) {
        out.write_all(&(s.i as u32).to_le_bytes())?;
        out.write_all(&(s.j as u32).to_le_bytes())?;
        out.write_all(&u.to_le_bytes())?;
    }
    out.flush()
}

pub fn read_field<R: Read>(mut inp: R) -> io::Result<FieldDump> {
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    let mut magic = [0u8; 4];
    inp.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a field dump"));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    inp.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != VERSION {
        return Err(bad("unsupported field dump version"));
    }
    let mut f = || -> io::Result<f64> {
        inp.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let h = f()?;
    let (x0, y0, x1, y1) = (f()?, f()?, f()?, f()?);
    let mut u = || -> io::Result<u64> {
        inp.read_exact(&mut b8)?;
        Ok(u64::from_le_bytes(b8))
    };
    let (nx, ny, count) = (u()?, u()?, u()?);
    if count > nx.saturating_mul(ny) {
        return Err(bad("node count exceeds grid size"));
    }
    let mut nodes = Vec::with_capacity(count as usize);
    for _ in 0..count {
        inp.read_exact(&mut b4)?;
        let i = u32::from_le_bytes(b4);
        inp.read_exact(&mut b4)?;
        let j = u32::from_le_bytes(b4);
        inp.read_exact(&mut b8)?;
        nodes.push((i, j, f64::from_le_bytes(b8)));
    }
    Ok(FieldDump { h, bbox: (Point::new(x0, y0), Point::new(x1, y1)), nx, ny, nodes })
}

/// CSV with columns `angle,x,y,u_nu`.
pub fn write_boundary_csv<W: Write>(samples: &[BoundaryDerivative], mut out: W) -> io::Result<()> {
    writeln!(out, "# angle: rad; x,y: boundary point; u_nu: measured inward normal derivative")?;
    writeln!(out, "angle,x,y,u_nu")?;
    for s in samples {
        writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e}", s.angle, s.point.x, s.point.y, s.u_nu)?;
    }
    out.flush()
}
