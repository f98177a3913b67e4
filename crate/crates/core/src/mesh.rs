//! Quadrilateral meshes: topology, the two benchmark generators, uniform
//! refinement, and per-element geometry factors at quadrature points.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::basis::ShapeTable;
use crate::error::{Error, Result};
use crate::quadrature::QuadRule;

/// Tag carried by every boundary node and edge.
pub const BOUNDARY_TAG: &str = "boundary";

#[derive(Debug, Clone)]
pub struct QuadMesh {
    pub nodes: Vec<[f64; 2]>,
    /// Counterclockwise corner nodes per element.
    pub elems2nodes: Vec<[usize; 4]>,
    /// Edge endpoints, sorted ascending.
    pub edges2nodes: Vec<[usize; 2]>,
    /// Local edge `s` joins local nodes `s` and `(s + 1) % 4`.
    pub elems2edges: Vec<[usize; 4]>,
    pub boundary_nodes: Vec<usize>,
    pub boundary_edges: Vec<usize>,
    /// Named node sets used to select Dirichlet boundaries.
    pub node_tags: BTreeMap<String, BTreeSet<usize>>,
}

impl QuadMesh {
    /// Build topology from coordinates and counterclockwise element connectivity.
    pub fn from_elements(
        nodes: Vec<[f64; 2]>,
        elems2nodes: Vec<[usize; 4]>,
        mut node_tags: BTreeMap<String, BTreeSet<usize>>,
    ) -> Result<Self> {
        let mut edge_ids: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges2nodes = Vec::new();
        let mut edge_count: Vec<u32> = Vec::new();
        let mut elems2edges = Vec::with_capacity(elems2nodes.len());
        for (t, elem) in elems2nodes.iter().enumerate() {
            if elem.iter().any(|&n| n >= nodes.len()) {
                return Err(Error::Internal(format!("element {t} references a missing node")));
            }
            let mut local = [0; 4];
            for s in 0..4 {
                let (a, b) = (elem[s], elem[(s + 1) % 4]);
                let key = [a.min(b), a.max(b)];
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges2nodes.push(key);
                    edge_count.push(0);
                    edges2nodes.len() - 1
                });
                edge_count[id] += 1;
                local[s] = id;
            }
            elems2edges.push(local);
        }
        if let Some(e) = edge_count.iter().position(|&c| c > 2) {
            return Err(Error::Internal(format!("edge {e} shared by more than two elements")));
        }
        let boundary_edges: Vec<usize> = (0..edges2nodes.len()).filter(|&e| edge_count[e] == 1).collect();
        let boundary_set: BTreeSet<usize> = boundary_edges
            .iter()
            .flat_map(|&e| edges2nodes[e])
            .collect();
        node_tags.insert(BOUNDARY_TAG.to_string(), boundary_set.clone());
        let mesh = QuadMesh {
            nodes,
            elems2nodes,
            edges2nodes,
            elems2edges,
            boundary_nodes: boundary_set.into_iter().collect(),
            boundary_edges,
            node_tags,
        };
        for t in 0..mesh.n_elems() {
            let det = mesh.min_corner_jacobian(t);
            if det <= 0.0 {
                return Err(Error::DegenerateElement { element: t, det_j: det });
            }
        }
        Ok(mesh)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges2nodes.len()
    }

    pub fn n_elems(&self) -> usize {
        self.elems2nodes.len()
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edges.binary_search(&e).is_ok()
    }

    /// Boundary edges whose two endpoints both carry `tag`.
    pub fn tagged_edges(&self, tag: &str) -> Option<Vec<usize>> {
        let nodes = self.node_tags.get(tag)?;
        Some(
            self.boundary_edges
                .iter()
                .copied()
                .filter(|&e| {
                    let [a, b] = self.edges2nodes[e];
                    nodes.contains(&a) && nodes.contains(&b)
                })
                .collect(),
        )
    }

    pub fn corners(&self, t: usize) -> [[f64; 2]; 4] {
        self.elems2nodes[t].map(|n| self.nodes[n])
    }

    /// Smallest bilinear-map Jacobian determinant over the four corners.
    pub fn min_corner_jacobian(&self, t: usize) -> f64 {
        let c = self.corners(t);
        (0..4)
            .map(|s| {
                let p = c[s];
                let next = c[(s + 1) % 4];
                let prev = c[(s + 3) % 4];
                let a = [next[0] - p[0], next[1] - p[1]];
                let b = [prev[0] - p[0], prev[1] - p[1]];
                // corner determinant of the bilinear map, up to the factor 1/4
                0.25 * (a[0] * b[1] - a[1] * b[0])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Area of element `t` (shoelace; exact for the bilinear map).
    pub fn elem_area(&self, t: usize) -> f64 {
        let c = self.corners(t);
        0.5 * (0..4)
            .map(|s| {
                let (a, b) = (c[s], c[(s + 1) % 4]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        (0..self.n_elems()).map(|t| self.elem_area(t)).sum()
    }

    /// Physical point of the bilinear map of element `t` at `(xi, eta)`.
    pub fn map_point(&self, t: usize, xi: f64, eta: f64) -> [f64; 2] {
        let c = self.corners(t);
        let n = bilinear(xi, eta);
        let mut x = [0.0; 2];
        for s in 0..4 {
            x[0] += n[s] * c[s][0];
            x[1] += n[s] * c[s][1];
        }
        x
    }
}

fn bilinear(xi: f64, eta: f64) -> [f64; 4] {
    [
        0.25 * (1.0 - xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 + eta),
        0.25 * (1.0 - xi) * (1.0 + eta),
    ]
}

/// Structured `nx x ny` grid of the rectangle `[x0, x1] x [y0, y1]`.
pub fn make_rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<QuadMesh> {
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = x0 + (x1 - x0) * i as f64 / nx as f64;
            let y = y0 + (y1 - y0) * j as f64 / ny as f64;
            nodes.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elems = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            elems.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let tags = side_tags(&nodes, x0, x1, y0, y1);
    QuadMesh::from_elements(nodes, elems, tags)
}

fn side_tags(nodes: &[[f64; 2]], x0: f64, x1: f64, y0: f64, y1: f64) -> BTreeMap<String, BTreeSet<usize>> {
    let tol = 1e-12 * (x1 - x0).abs().max((y1 - y0).abs());
    let mut tags: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (n, &[x, y]) in nodes.iter().enumerate() {
        for (name, hit) in [
            ("left", (x - x0).abs() < tol),
            ("right", (x - x1).abs() < tol),
            ("bottom", (y - y0).abs() < tol),
            ("top", (y - y1).abs() < tol),
        ] {
            if hit {
                tags.entry(name.to_string()).or_default().insert(n);
            }
        }
    }
    tags
}

/// L-shaped domain `(0,2)^2 \ [1,2] x [0,1]`, 12 squares of side 1/2 at
/// level 0, refined uniformly `level` times.
pub fn make_lshape(level: usize) -> QuadMesh {
    let mut index = [[usize::MAX; 5]; 5];
    let mut nodes = Vec::new();
    for (j, row) in index.iter_mut().enumerate() {
        for (i, slot) in row.iter_mut().enumerate() {
            // nodes only touched by the removed quadrant
            if i >= 3 && j <= 1 {
                continue;
            }
            *slot = nodes.len();
            nodes.push([0.5 * i as f64, 0.5 * j as f64]);
        }
    }
    let mut elems = Vec::new();
    for j in 0..4 {
        for i in 0..4 {
            if i >= 2 && j <= 1 {
                continue;
            }
            elems.push([index[j][i], index[j][i + 1], index[j + 1][i + 1], index[j + 1][i]]);
        }
    }
    let tags = side_tags(&nodes, 0.0, 2.0, 0.0, 2.0);
    let mut mesh = QuadMesh::from_elements(nodes, elems, tags).expect("L-shape mesh is valid");
    for _ in 0..level {
        mesh = refine_uniform(&mesh);
    }
    mesh
}

/// Square `[0,2]^2` with a disk of radius `1/3` removed from its centre.
///
/// Block-structured O-grid: `m = 8 * 2^level` segments per square side and
/// `m / 2` radial layers between the circle and the square, so the mesh has
/// `2 m^2` elements. Hole nodes lie exactly on the circle.
pub fn make_perforated_square(level: usize) -> Result<QuadMesh> {
    const CENTER: [f64; 2] = [1.0, 1.0];
    const RADIUS: f64 = 1.0 / 3.0;
    let m = 8usize << level;
    let layers = m / 2;
    let around = 4 * m;

    // outer square perimeter, counterclockwise from the corner (0, 0)
    let outer = |j: usize| -> [f64; 2] {
        let side = j / m;
        let t = 2.0 * (j % m) as f64 / m as f64;
        match side % 4 {
            0 => [t, 0.0],
            1 => [2.0, t],
            2 => [2.0 - t, 2.0],
            _ => [0.0, 2.0 - t],
        }
    };
    let inner = |j: usize| -> [f64; 2] {
        let theta = 1.25 * std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / around as f64;
        [CENTER[0] + RADIUS * theta.cos(), CENTER[1] + RADIUS * theta.sin()]
    };

    let id = |i: usize, j: usize| i * around + (j % around);
    let mut nodes = Vec::with_capacity((layers + 1) * around);
    for i in 0..=layers {
        let s = i as f64 / layers as f64;
        for j in 0..around {
            let (a, b) = (inner(j), outer(j));
            let p = if i == layers {
                b
            } else if i == 0 {
                a
            } else {
                [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
            };
            nodes.push(p);
        }
    }
    let mut elems = Vec::with_capacity(layers * around);
    for i in 0..layers {
        for j in 0..around {
            elems.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let mut tags = side_tags(&nodes, 0.0, 2.0, 0.0, 2.0);
    tags.insert("hole".to_string(), (0..around).map(|j| id(0, j)).collect());
    QuadMesh::from_elements(nodes, elems, tags)
}

/// Split every quad into four through edge midpoints and the bilinear centre.
pub fn refine_uniform(mesh: &QuadMesh) -> QuadMesh {
    let (nn, ne) = (mesh.n_nodes(), mesh.n_edges());
    let mut nodes = mesh.nodes.clone();
    for &[a, b] in &mesh.edges2nodes {
        let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
        nodes.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
    }
    for t in 0..mesh.n_elems() {
        nodes.push(mesh.map_point(t, 0.0, 0.0));
    }
    let mut elems = Vec::with_capacity(4 * mesh.n_elems());
    for (t, (n, e)) in mesh.elems2nodes.iter().zip(&mesh.elems2edges).enumerate() {
        let mid = e.map(|e| nn + e);
        let c = nn + ne + t;
        elems.push([n[0], mid[0], c, mid[3]]);
        elems.push([mid[0], n[1], mid[1], c]);
        elems.push([c, mid[1], n[2], mid[2]]);
        elems.push([mid[3], c, mid[2], n[3]]);
    }
    let mut tags: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (name, set) in &mesh.node_tags {
        if name == BOUNDARY_TAG {
            continue;
        }
        let mut new_set = set.clone();
        for &e in &mesh.boundary_edges {
            let [a, b] = mesh.edges2nodes[e];
            if set.contains(&a) && set.contains(&b) {
                new_set.insert(nn + e);
            }
        }
        tags.insert(name.clone(), new_set);
    }
    QuadMesh::from_elements(nodes, elems, tags).expect("refinement preserves validity")
}

/// Physical shape-function gradients and weighted Jacobians at every
/// quadrature point of every element.
///
/// Per-element arrays are laid out `[elem][ip][local]` for `dphi_*` and
/// `[elem][ip]` for `wdetj`.
#[derive(Debug, Clone)]
pub struct GeometryFactors {
    pub n_local: usize,
    pub n_ip: usize,
    pub n_elems: usize,
    pub dphi_x: Vec<f64>,
    pub dphi_y: Vec<f64>,
    pub wdetj: Vec<f64>,
    /// Reference values `[local][ip]`, shared by all elements.
    pub phi: Vec<f64>,
}

impl GeometryFactors {
    #[inline]
    pub fn elem_offset(&self, t: usize) -> usize {
        t * self.n_ip * self.n_local
    }

    #[inline]
    pub fn phi(&self, m: usize, q: usize) -> f64 {
        self.phi[m * self.n_ip + q]
    }
}

pub fn geometry_factors(mesh: &QuadMesh, rule: &QuadRule, table: &ShapeTable) -> Result<GeometryFactors> {
    let n_ip = rule.n_ip();
    if table.n_points != n_ip {
        return Err(Error::LengthMismatch {
            expected: n_ip,
            got: table.n_points,
        });
    }
    let n_local = table.n_local();
    let per_elem: Vec<Result<(Vec<f64>, Vec<f64>, Vec<f64>)>> = (0..mesh.n_elems())
        .into_par_iter()
        .map(|t| {
            let c = mesh.corners(t);
            let mut dx = vec![0.0; n_ip * n_local];
            let mut dy = vec![0.0; n_ip * n_local];
            let mut wd = vec![0.0; n_ip];
            for (q, &[xi, eta]) in rule.points.iter().enumerate() {
                // derivatives of the bilinear corner functions
                let dn_dxi = [-0.25 * (1.0 - eta), 0.25 * (1.0 - eta), 0.25 * (1.0 + eta), -0.25 * (1.0 + eta)];
                let dn_deta = [-0.25 * (1.0 - xi), -0.25 * (1.0 + xi), 0.25 * (1.0 + xi), 0.25 * (1.0 - xi)];
                let (mut j11, mut j12, mut j21, mut j22) = (0.0, 0.0, 0.0, 0.0);
                for s in 0..4 {
                    j11 += dn_dxi[s] * c[s][0];
                    j12 += dn_deta[s] * c[s][0];
                    j21 += dn_dxi[s] * c[s][1];
                    j22 += dn_deta[s] * c[s][1];
                }
                let det = j11 * j22 - j12 * j21;
                if det <= 0.0 {
                    return Err(Error::DegenerateElement { element: t, det_j: det });
                }
                wd[q] = rule.weights[q] * det;
                // J^{-T} applied to the reference gradient
                for m in 0..n_local {
                    let [gx, ge] = table.grad(m, q);
                    dx[q * n_local + m] = (j22 * gx - j21 * ge) / det;
                    dy[q * n_local + m] = (-j12 * gx + j11 * ge) / det;
                }
            }
            Ok((dx, dy, wd))
        })
        .collect();
    let mut dphi_x = Vec::with_capacity(mesh.n_elems() * n_ip * n_local);
    let mut dphi_y = Vec::with_capacity(dphi_x.capacity());
    let mut wdetj = Vec::with_capacity(mesh.n_elems() * n_ip);
    for r in per_elem {
        let (dx, dy, wd) = r?;
        dphi_x.extend(dx);
        dphi_y.extend(dy);
        wdetj.extend(wd);
    }
    Ok(GeometryFactors {
        n_local,
        n_ip,
        n_elems: mesh.n_elems(),
        dphi_x,
        dphi_y,
        wdetj,
        phi: table.values.clone(),
    })
}
