//! Hierarchical shape functions on the reference square `[-1, 1]^2`.
//!
//! The local space is the trunk space: four bilinear vertex functions, edge
//! modes of degree `2..=p` on each of the four edges, and internal (bubble)
//! modes `phi_i(xi) * phi_j(eta)` with `i, j >= 2` and `i + j <= p`.
//!
//! Reference vertices are numbered counterclockwise starting at `(-1, -1)`.
//! Local edge `s` runs from vertex `s` to vertex `(s + 1) % 4`, and that
//! direction is the edge-local coordinate of the edge modes.

use crate::error::{Error, Result};

/// Reference coordinates of the four vertices, counterclockwise.
pub const REF_VERTICES: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// Legendre polynomial `L_k(xi)` by the three-term recurrence.
pub fn legendre_eval(k: usize, xi: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, xi);
    if k == 0 {
        return prev;
    }
    for n in 1..k {
        let n = n as f64;
        let next = ((2.0 * n + 1.0) * xi * cur - n * prev) / (n + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Values `L_0(xi) ..= L_kmax(xi)`.
fn legendre_all(kmax: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax >= 1 {
        out.push(xi);
    }
    for n in 1..kmax {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * xi * out[n] - nf * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
    out
}

/// Kernel `phi_k(xi) = (L_k - L_{k-2}) / sqrt(4k - 2)` and its derivative,
/// which simplifies to `sqrt((2k - 1) / 2) * L_{k-1}`.
pub fn kernel_eval(k: usize, xi: f64) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::Domain(format!("kernel degree must be >= 2, got {k}")));
    }
    let l = legendre_all(k, xi);
    Ok(kernel_from_legendre(k, &l))
}

#[inline]
fn kernel_from_legendre(k: usize, l: &[f64]) -> (f64, f64) {
    let kf = k as f64;
    let value = (l[k] - l[k - 2]) / (4.0 * kf - 2.0).sqrt();
    let deriv = ((2.0 * kf - 1.0) / 2.0).sqrt() * l[k - 1];
    (value, deriv)
}

/// Kind of a local shape function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Nodal { node: usize },
    Edge { edge: usize, degree: usize },
    Bubble { i: usize, j: usize },
}

impl ShapeKind {
    pub fn is_nodal(&self) -> bool {
        matches!(self, ShapeKind::Nodal { .. })
    }
}

/// Number of local shape functions of the trunk space of degree `p`.
pub fn n_local(p: usize) -> usize {
    4 + 4 * p.saturating_sub(1) + n_bubbles(p)
}

/// Number of internal modes of the trunk space of degree `p`.
pub fn n_bubbles(p: usize) -> usize {
    if p >= 4 {
        (p - 2) * (p - 3) / 2
    } else {
        0
    }
}

/// Ordered list of local shape functions: vertices, then edge modes by
/// degree and edge, then bubbles by total degree and first index.
pub fn shape_kinds(p: usize) -> Vec<ShapeKind> {
    let mut kinds: Vec<ShapeKind> = (0..4).map(|node| ShapeKind::Nodal { node }).collect();
    for degree in 2..=p {
        kinds.extend((0..4).map(|edge| ShapeKind::Edge { edge, degree }));
    }
    for total in 4..=p {
        for i in 2..=total - 2 {
            kinds.push(ShapeKind::Bubble { i, j: total - i });
        }
    }
    kinds
}

/// Shape function values and reference derivatives tabulated at a point set.
///
/// Arrays are stored row-major as `[n_local x n_points]`.
#[derive(Debug, Clone)]
pub struct ShapeTable {
    pub p: usize,
    pub kinds: Vec<ShapeKind>,
    pub n_points: usize,
    pub values: Vec<f64>,
    pub dxi: Vec<f64>,
    pub deta: Vec<f64>,
}

impl ShapeTable {
    pub fn n_local(&self) -> usize {
        self.kinds.len()
    }

    #[inline]
    pub fn value(&self, m: usize, q: usize) -> f64 {
        self.values[m * self.n_points + q]
    }

    #[inline]
    pub fn grad(&self, m: usize, q: usize) -> [f64; 2] {
        let idx = m * self.n_points + q;
        [self.dxi[idx], self.deta[idx]]
    }
}

/// Evaluate one shape function and its reference gradient at `(xi, eta)`.
///
/// `lx`, `ly` hold Legendre values up to degree `p` at `xi` and `eta`.
fn eval_kind(kind: ShapeKind, xi: f64, eta: f64, lx: &[f64], ly: &[f64], lmx: &[f64], lmy: &[f64]) -> [f64; 3] {
    match kind {
        ShapeKind::Nodal { node } => {
            let [sx, sy] = REF_VERTICES[node];
            let fx = 0.5 * (1.0 + sx * xi);
            let fy = 0.5 * (1.0 + sy * eta);
            [fx * fy, 0.5 * sx * fy, 0.5 * sy * fx]
        }
        ShapeKind::Edge { edge, degree } => match edge {
            0 => {
                let (f, df) = kernel_from_legendre(degree, lx);
                let b = 0.5 * (1.0 - eta);
                [f * b, df * b, -0.5 * f]
            }
            1 => {
                let (f, df) = kernel_from_legendre(degree, ly);
                let b = 0.5 * (1.0 + xi);
                [f * b, 0.5 * f, df * b]
            }
            2 => {
                // edge-local coordinate is -xi
                let (f, df) = kernel_from_legendre(degree, lmx);
                let b = 0.5 * (1.0 + eta);
                [f * b, -df * b, 0.5 * f]
            }
            3 => {
                let (f, df) = kernel_from_legendre(degree, lmy);
                let b = 0.5 * (1.0 - xi);
                [f * b, -0.5 * f, -df * b]
            }
            _ => unreachable!("local edge index out of range"),
        },
        ShapeKind::Bubble { i, j } => {
            let (fi, dfi) = kernel_from_legendre(i, lx);
            let (fj, dfj) = kernel_from_legendre(j, ly);
            [fi * fj, dfi * fj, fi * dfj]
        }
    }
}

/// Tabulate all shape functions of degree `p` at `points`.
pub fn tabulate(p: usize, points: &[[f64; 2]]) -> Result<ShapeTable> {
    if p < 1 {
        return Err(Error::Domain("polynomial degree must be >= 1".into()));
    }
    let kinds = shape_kinds(p);
    let n_points = points.len();
    let n = kinds.len() * n_points;
    let mut values = vec![0.0; n];
    let mut dxi = vec![0.0; n];
    let mut deta = vec![0.0; n];
    for (q, &[xi, eta]) in points.iter().enumerate() {
        let lx = legendre_all(p, xi);
        let ly = legendre_all(p, eta);
        let lmx = legendre_all(p, -xi);
        let lmy = legendre_all(p, -eta);
        for (m, &kind) in kinds.iter().enumerate() {
            let [v, dx, dy] = eval_kind(kind, xi, eta, &lx, &ly, &lmx, &lmy);
            values[m * n_points + q] = v;
            dxi[m * n_points + q] = dx;
            deta[m * n_points + q] = dy;
        }
    }
    Ok(ShapeTable {
        p,
        kinds,
        n_points,
        values,
        dxi,
        deta,
    })
}
