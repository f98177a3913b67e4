//! Legacy ASCII VTK output of quadrilateral meshes and sampled fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::basis::tabulate;
use crate::dofmap::DofMap;
use crate::error::{Error, Result};
use crate::mesh::QuadMesh;

/// VTK cell type of a linear quadrilateral.
pub const VTK_QUAD: u8 = 9;

/// Point-sampled quadrilateral data ready for output.
#[derive(Debug, Clone, Default)]
pub struct VtkQuads {
    pub points: Vec<[f64; 2]>,
    pub cells: Vec<[usize; 4]>,
    pub point_scalars: Vec<(String, Vec<f64>)>,
    pub cell_scalars: Vec<(String, Vec<f64>)>,
}

impl VtkQuads {
    pub fn write(&self, out: &mut impl Write, title: &str) -> Result<()> {
        for (name, data) in &self.point_scalars {
            if data.len() != self.points.len() {
                return Err(Error::Internal(format!("point field '{name}' has wrong length")));
            }
        }
        for (name, data) in &self.cell_scalars {
            if data.len() != self.cells.len() {
                return Err(Error::Internal(format!("cell field '{name}' has wrong length")));
            }
        }
        writeln!(out, "# vtk DataFile Version 3.0")?;
        writeln!(out, "{}", title.lines().next().unwrap_or(""))?;
        writeln!(out, "ASCII")?;
        writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(out, "POINTS {} double", self.points.len())?;
        for [x, y] in &self.points {
            writeln!(out, "{x:.12e} {y:.12e} 0")?;
        }
        writeln!(out, "CELLS {} {}", self.cells.len(), 5 * self.cells.len())?;
        for c in &self.cells {
            writeln!(out, "4 {} {} {} {}", c[0], c[1], c[2], c[3])?;
        }
        writeln!(out, "CELL_TYPES {}", self.cells.len())?;
        for _ in &self.cells {
            writeln!(out, "{VTK_QUAD}")?;
        }
        if !self.cell_scalars.is_empty() {
            writeln!(out, "CELL_DATA {}", self.cells.len())?;
            for (name, data) in &self.cell_scalars {
                write_scalars(out, name, data)?;
            }
        }
        if !self.point_scalars.is_empty() {
            writeln!(out, "POINT_DATA {}", self.points.len())?;
            for (name, data) in &self.point_scalars {
                write_scalars(out, name, data)?;
            }
        }
        Ok(())
    }

    pub fn write_file(&self, path: &Path, title: &str) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w, title)?;
        w.flush()?;
        Ok(())
    }
}

fn write_scalars(out: &mut impl Write, name: &str, data: &[f64]) -> Result<()> {
    writeln!(out, "SCALARS {name} double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for v in data {
        writeln!(out, "{v:.12e}")?;
    }
    Ok(())
}

/// Plain mesh with optional cell data.
pub fn mesh_quads(mesh: &QuadMesh) -> VtkQuads {
    VtkQuads {
        points: mesh.nodes.clone(),
        cells: mesh.elems2nodes.clone(),
        ..Default::default()
    }
}

/// Sample a scalar hierarchical field on a `(p+1) x (p+1)` point grid per
/// element; every element contributes `p * p` independent sub-quads.
pub fn sampled_scalar_field(mesh: &QuadMesh, dofmap: &DofMap, v_full: &[f64], name: &str) -> Result<VtkQuads> {
    let p = dofmap.p;
    let n = p + 1;
    let grid: Vec<[f64; 2]> = (0..n)
        .flat_map(|j| (0..n).map(move |i| [-1.0 + 2.0 * i as f64 / p as f64, -1.0 + 2.0 * j as f64 / p as f64]))
        .collect();
    let table = tabulate(p, &grid)?;
    let mut out = VtkQuads::default();
    let mut values = Vec::with_capacity(mesh.n_elems() * grid.len());
    for t in 0..mesh.n_elems() {
        let base = out.points.len();
        let dofs = dofmap.elem_dofs(t);
        let signs = dofmap.elem_signs(t);
        for (q, &[xi, eta]) in grid.iter().enumerate() {
            out.points.push(mesh.map_point(t, xi, eta));
            values.push((0..dofmap.n_local).map(|m| signs[m] * v_full[dofs[m]] * table.value(m, q)).sum());
        }
        for j in 0..p {
            for i in 0..p {
                let id = |a: usize, b: usize| base + b * n + a;
                out.cells.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
    }
    out.point_scalars.push((name.to_string(), values));
    Ok(out)
}

/// Deformed mesh: vertex positions from the nodal part of a deformation.
pub fn deformed_mesh(mesh: &QuadMesh, dofmap: &DofMap, v_full: &[f64]) -> VtkQuads {
    let points = (0..mesh.n_nodes()).map(|n| [v_full[n], v_full[dofmap.n_scalar + n]]).collect();
    VtkQuads {
        points,
        cells: mesh.elems2nodes.clone(),
        ..Default::default()
    }
}
