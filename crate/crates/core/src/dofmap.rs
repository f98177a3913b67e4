//! Global degrees of freedom for hierarchical elements.
//!
//! Scalar numbering: vertex DOFs by node index, then edge modes by edge
//! index and degree, then bubbles by element index and local bubble order.
//! Vector problems repeat this layout per component (all x, then all y).

use std::fmt;
use std::sync::Arc;

use crate::basis::{n_bubbles, shape_kinds, ShapeKind};
use crate::error::{Error, Result};
use crate::mesh::QuadMesh;
use crate::sparse::SparsityPattern;

/// What a scalar global DOF is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    Node(usize),
    Edge { edge: usize, degree: usize },
    Bubble { elem: usize, i: usize, j: usize },
}

pub type BoundaryFn = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

/// Boundary parts (by node tag) and boundary values for Dirichlet conditions.
#[derive(Clone)]
pub struct DirichletSpec {
    pub tags: Vec<String>,
    pub g: BoundaryFn,
}

impl DirichletSpec {
    pub fn none() -> Self {
        Self::zero(&[])
    }

    pub fn zero(tags: &[&str]) -> Self {
        DirichletSpec {
            tags: tags.iter().map(|s| s.to_string()).collect(),
            g: Arc::new(|_| [0.0, 0.0]),
        }
    }

    /// Deformation pinned to the reference position (zero displacement).
    pub fn identity(tags: &[&str]) -> Self {
        DirichletSpec {
            tags: tags.iter().map(|s| s.to_string()).collect(),
            g: Arc::new(|x| x),
        }
    }

    pub fn with_values(tags: &[&str], g: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static) -> Self {
        DirichletSpec {
            tags: tags.iter().map(|s| s.to_string()).collect(),
            g: Arc::new(g),
        }
    }
}

impl fmt::Debug for DirichletSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirichletSpec").field("tags", &self.tags).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct DofMap {
    pub p: usize,
    pub components: usize,
    /// DOFs per component.
    pub n_scalar: usize,
    pub n_local: usize,
    pub n_elems: usize,
    pub dof_kind: Vec<DofKind>,
    /// Scalar DOF indices `[elem][local]`, aligned with the shape-table order.
    pub elems2dofs: Vec<usize>,
    /// `+1.0` or `-1.0` per `[elem][local]`.
    pub signs: Vec<f64>,
    pub free_dofs: Vec<usize>,
    pub fixed_dofs: Vec<usize>,
    pub fixed_values: Vec<f64>,
    /// Position in `free_dofs`, or `usize::MAX` for fixed DOFs.
    pub free_index: Vec<usize>,
    dof2elems_ptr: Vec<usize>,
    dof2elems: Vec<usize>,
}

impl DofMap {
    /// Total number of global DOFs over all components.
    pub fn n_dofs(&self) -> usize {
        self.n_scalar * self.components
    }

    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }

    #[inline]
    pub fn elem_dofs(&self, t: usize) -> &[usize] {
        &self.elems2dofs[t * self.n_local..(t + 1) * self.n_local]
    }

    #[inline]
    pub fn elem_signs(&self, t: usize) -> &[f64] {
        &self.signs[t * self.n_local..(t + 1) * self.n_local]
    }

    /// Elements on which the scalar DOF `s` is supported.
    pub fn scalar_support(&self, s: usize) -> &[usize] {
        &self.dof2elems[self.dof2elems_ptr[s]..self.dof2elems_ptr[s + 1]]
    }

    /// Split a global DOF into (component, scalar index).
    #[inline]
    pub fn split(&self, dof: usize) -> (usize, usize) {
        (dof / self.n_scalar, dof % self.n_scalar)
    }

    /// Insert fixed values into a free-DOF vector.
    pub fn expand(&self, free: &[f64]) -> Result<Vec<f64>> {
        if free.len() != self.n_free() {
            return Err(Error::LengthMismatch {
                expected: self.n_free(),
                got: free.len(),
            });
        }
        let mut full = vec![0.0; self.n_dofs()];
        for (&d, &v) in self.free_dofs.iter().zip(free) {
            full[d] = v;
        }
        for (&d, &v) in self.fixed_dofs.iter().zip(&self.fixed_values) {
            full[d] = v;
        }
        Ok(full)
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free_dofs.iter().map(|&d| full[d]).collect()
    }

    /// Coefficient vector whose vertex DOFs interpolate `g` and whose higher
    /// modes vanish.
    pub fn nodal_interpolant(&self, mesh: &QuadMesh, g: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_dofs()];
        for (n, &x) in mesh.nodes.iter().enumerate() {
            let v = g(x);
            for c in 0..self.components {
                full[c * self.n_scalar + n] = v[c];
            }
        }
        full
    }
}

pub fn build_dofmap(mesh: &QuadMesh, p: usize, components: usize, dirichlet: &DirichletSpec) -> Result<DofMap> {
    if p < 1 {
        return Err(Error::Domain("polynomial degree must be >= 1".into()));
    }
    if !(1..=2).contains(&components) {
        return Err(Error::Config(format!("components must be 1 or 2, got {components}")));
    }
    let (nn, ne, nt) = (mesh.n_nodes(), mesh.n_edges(), mesh.n_elems());
    let modes = p - 1;
    let nb = n_bubbles(p);
    let edge_base = nn;
    let bubble_base = nn + modes * ne;
    let n_scalar = bubble_base + nb * nt;

    let mut dof_kind = Vec::with_capacity(n_scalar);
    dof_kind.extend((0..nn).map(DofKind::Node));
    for edge in 0..ne {
        dof_kind.extend((2..=p).map(|degree| DofKind::Edge { edge, degree }));
    }
    let kinds = shape_kinds(p);
    let bubble_kinds: Vec<(usize, usize)> = kinds
        .iter()
        .filter_map(|k| match *k {
            ShapeKind::Bubble { i, j } => Some((i, j)),
            _ => None,
        })
        .collect();
    for elem in 0..nt {
        dof_kind.extend(bubble_kinds.iter().map(|&(i, j)| DofKind::Bubble { elem, i, j }));
    }

    let n_local = kinds.len();
    let mut elems2dofs = Vec::with_capacity(nt * n_local);
    let mut signs = Vec::with_capacity(nt * n_local);
    for t in 0..nt {
        let nodes = mesh.elems2nodes[t];
        let mut b = 0;
        for kind in &kinds {
            match *kind {
                ShapeKind::Nodal { node } => {
                    elems2dofs.push(nodes[node]);
                    signs.push(1.0);
                }
                ShapeKind::Edge { edge, degree } => {
                    let e = mesh.elems2edges[t][edge];
                    elems2dofs.push(edge_base + e * modes + (degree - 2));
                    // local direction node s -> s+1 against ascending global order
                    let reversed = nodes[edge] > nodes[(edge + 1) % 4];
                    signs.push(if reversed && degree % 2 == 1 { -1.0 } else { 1.0 });
                }
                ShapeKind::Bubble { .. } => {
                    elems2dofs.push(bubble_base + t * nb + b);
                    signs.push(1.0);
                    b += 1;
                }
            }
        }
    }

    // scalar DOF -> supporting elements
    let mut counts = vec![0usize; n_scalar + 1];
    for &d in &elems2dofs {
        counts[d + 1] += 1;
    }
    for i in 0..n_scalar {
        counts[i + 1] += counts[i];
    }
    let dof2elems_ptr = counts.clone();
    let mut dof2elems = vec![0; elems2dofs.len()];
    let mut fill = counts;
    for t in 0..nt {
        for &d in &elems2dofs[t * n_local..(t + 1) * n_local] {
            dof2elems[fill[d]] = t;
            fill[d] += 1;
        }
    }

    // Dirichlet: vertex values from g, boundary edge modes zero, bubbles free.
    let mut fixed_scalar: Vec<Option<[f64; 2]>> = vec![None; n_scalar];
    for tag in &dirichlet.tags {
        let nodes = mesh
            .node_tags
            .get(tag)
            .ok_or_else(|| Error::Config(format!("unknown boundary tag '{tag}'")))?;
        for &n in nodes {
            fixed_scalar[n] = Some((dirichlet.g)(mesh.nodes[n]));
        }
        for e in mesh.tagged_edges(tag).unwrap_or_default() {
            for k in 0..modes {
                fixed_scalar[edge_base + e * modes + k] = Some([0.0, 0.0]);
            }
        }
    }
    let n_dofs = n_scalar * components;
    let mut free_dofs = Vec::new();
    let mut fixed_dofs = Vec::new();
    let mut fixed_values = Vec::new();
    let mut free_index = vec![usize::MAX; n_dofs];
    for c in 0..components {
        for (s, fixed) in fixed_scalar.iter().enumerate() {
            let d = c * n_scalar + s;
            match fixed {
                Some(v) => {
                    fixed_dofs.push(d);
                    fixed_values.push(v[c]);
                }
                None => {
                    free_index[d] = free_dofs.len();
                    free_dofs.push(d);
                }
            }
        }
    }

    Ok(DofMap {
        p,
        components,
        n_scalar,
        n_local,
        n_elems: nt,
        dof_kind,
        elems2dofs,
        signs,
        free_dofs,
        fixed_dofs,
        fixed_values,
        free_index,
        dof2elems_ptr,
        dof2elems,
    })
}

/// Hessian sparsity over free DOFs: `(i, j)` is present when both DOFs are
/// supported on a common element (any components).
pub fn sparsity_pattern(dofmap: &DofMap) -> SparsityPattern {
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); dofmap.n_free()];
    let mut local = Vec::with_capacity(dofmap.n_local * dofmap.components);
    for t in 0..dofmap.n_elems {
        local.clear();
        for c in 0..dofmap.components {
            for &s in dofmap.elem_dofs(t) {
                let f = dofmap.free_index[c * dofmap.n_scalar + s];
                if f != usize::MAX {
                    local.push(f);
                }
            }
        }
        for &i in &local {
            rows[i].extend_from_slice(&local);
        }
    }
    let n = rows.len();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    row_ptr.push(0);
    for mut r in rows {
        r.sort_unstable();
        r.dedup();
        col_idx.extend(r);
        row_ptr.push(col_idx.len());
    }
    SparsityPattern { n, row_ptr, col_idx }
}
