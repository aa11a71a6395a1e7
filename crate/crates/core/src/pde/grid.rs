use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{self, signed_distance, DomainSpec, Point};
use crate::numeric::brent_root;

/// Cut fractions below this are treated as the node lying on the boundary.
const MIN_CUT: f64 = 1e-6;
/// Padding of the bounding box, in grid cells.
const PAD: f64 = 3.0;

/// Arm directions in the order east, west, north, south.
pub const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum NodeKind {
    Interior,
    /// Interior node with at least one arm cut by the boundary.
    NearBoundary,
    Exterior,
}

/// Stencil data for one unknown.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Stencil {
    pub i: usize,
    pub j: usize,
    /// Arm lengths as fractions of `h` (E, W, N, S); 1 for a full arm.
    pub cut: [f64; 4],
    /// Neighbor unknown per arm, `None` when the arm ends on the boundary.
    pub neighbor: [Option<usize>; 4],
    pub signed_distance: f64,
}

/// Uniform grid over the bounding box with Shortley–Weller classification.
#[derive(Clone, Debug)]
pub struct Grid {
    pub domain: DomainSpec,
    pub h: f64,
    pub origin: Point,
    pub nx: usize,
    pub ny: usize,
    kinds: Vec<NodeKind>,
    index: Vec<Option<usize>>,
    pub stencils: Vec<Stencil>,
}

impl Grid {
    pub fn node(&self, i: usize, j: usize) -> Point {
        self.origin + Point::new(i as f64 * self.h, j as f64 * self.h)
    }

    pub fn kind(&self, i: usize, j: usize) -> NodeKind {
        self.kinds[j * self.nx + i]
    }

    /// Unknown index of node `(i, j)`, if it is interior.
    pub fn unknown(&self, i: usize, j: usize) -> Option<usize> {
        self.index[j * self.nx + i]
    }

    pub fn unknown_at(&self, i: i64, j: i64) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            None
        } else {
            self.unknown(i as usize, j as usize)
        }
    }

    pub fn len(&self) -> usize {
        self.stencils.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stencils.is_empty()
    }

    pub fn position(&self, k: usize) -> Point {
        let s = &self.stencils[k];
        self.node(s.i, s.j)
    }

    pub fn bbox(&self) -> (Point, Point) {
        (self.origin, self.node(self.nx - 1, self.ny - 1))
    }

    /// Cell containing `p` as the lower-left node index (may be out of range).
    pub fn cell_of(&self, p: &Point) -> (i64, i64) {
        let q = (p - self.origin) / self.h;
        (q.x.floor() as i64, q.y.floor() as i64)
    }

    /// Nearest node to `p`, clamped to the grid.
    pub fn nearest_node(&self, p: &Point) -> (usize, usize) {
        let q = (p - self.origin) / self.h;
        let i = q.x.round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = q.y.round().clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }
}

/// Fits a grid of spacing `h` to the domain; the star center is a node.
pub fn discretize(domain: &DomainSpec, h: f64) -> Result<Grid> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid(format!("grid spacing must be positive, got {h}")));
    }
    let r_omega = geometry::summary(domain)?.r_omega;
    let max = r_omega / 8.0;
    if h > max * (1.0 + 1e-12) {
        return Err(Error::GridTooCoarse { h, max });
    }
    let c = domain.center();
    let reach = domain.guard().max_radius + PAD * h;
    let k = (reach / h).ceil() as usize;
    let n = 2 * k + 1;
    if n > 20_000 {
        return Err(invalid(format!("grid of {n} x {n} nodes is too large")));
    }
    let origin = c - Point::new(k as f64 * h, k as f64 * h);
    let (nx, ny) = (n, n);
    let node = |i: usize, j: usize| origin + Point::new(i as f64 * h, j as f64 * h);

    let level: Vec<f64> = (0..nx * ny).map(|q| domain.level(&node(q % nx, q / nx))).collect();
    let mut inside: Vec<bool> = level.iter().map(|&l| l < 0.0).collect();

    // cut fraction of the arm from (i, j) toward its neighbor in direction d
    let cut = |i: usize, j: usize, d: (i64, i64)| -> f64 {
        let p = node(i, j);
        let dir = Point::new(d.0 as f64, d.1 as f64) * h;
        brent_root(|t| domain.level(&(p + t * dir)), 0.0, 1.0, 1e-15).unwrap_or(1.0)
    };
    let neighbor = |i: usize, j: usize, d: (i64, i64)| -> Option<(usize, usize)> {
        let (a, b) = (i as i64 + d.0, j as i64 + d.1);
        (a >= 0 && b >= 0 && (a as usize) < nx && (b as usize) < ny).then_some((a as usize, b as usize))
    };

    // nodes hugging the boundary are dropped (u = 0 there to within 1e-6 h)
    for j in 0..ny {
        for i in 0..nx {
            if !inside[j * nx + i] {
                continue;
            }
            for d in DIRS {
                if let Some((a, b)) = neighbor(i, j, d) {
                    if level[b * nx + a] >= 0.0 && cut(i, j, d) < MIN_CUT {
                        inside[j * nx + i] = false;
                        break;
                    }
                }
            }
        }
    }

    let mut index = vec![None; nx * ny];
    let mut order = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if inside[j * nx + i] {
                index[j * nx + i] = Some(order.len());
                order.push((i, j));
            }
        }
    }
    if order.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut kinds = vec![NodeKind::Exterior; nx * ny];
    let mut stencils = Vec::with_capacity(order.len());
    for &(i, j) in &order {
        let mut s = Stencil { i, j, cut: [1.0; 4], neighbor: [None; 4], signed_distance: 0.0 };
        let mut near = false;
        for (a, d) in DIRS.iter().enumerate() {
            match neighbor(i, j, *d) {
                Some((p, q)) if inside[q * nx + p] => s.neighbor[a] = index[q * nx + p],
                Some((p, q)) => {
                    near = true;
                    // a dropped node still inside the level set acts as a boundary point
                    s.cut[a] = if level[q * nx + p] >= 0.0 { cut(i, j, *d).max(MIN_CUT) } else { 1.0 };
                }
                None => return Err(invalid("grid padding too small")),
            }
        }
        s.signed_distance = signed_distance(domain, &node(i, j));
        kinds[j * nx + i] = if near { NodeKind::NearBoundary } else { NodeKind::Interior };
        stencils.push(s);
    }
    Ok(Grid { domain: domain.clone(), h, origin, nx, ny, kinds, index, stencils })
}
