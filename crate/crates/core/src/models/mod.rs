//! Discrete energy functionals evaluated element by element at quadrature
//! points.
//!
//! Every model is an integral of a pointwise density of the gradient minus a
//! linear load term `b_full . v`. Element contributions are computed in
//! parallel and summed in element order, so results do not depend on the
//! thread schedule.

mod neohooke;
mod plaplace;

pub use neohooke::{NeoHookeModel, NeoHookeParams};
pub use plaplace::PLaplaceModel;

use rayon::prelude::*;

use crate::dofmap::DofMap;
use crate::error::{Error, Result};
use crate::mesh::GeometryFactors;

/// An energy that decomposes into per-element densities plus a linear term.
///
/// Local coefficient vectors are component-blocked, `[c * n_local + m]`,
/// with the element sign already applied.
pub trait LocalEnergy: Sync {
    fn dofmap(&self) -> &DofMap;
    fn geometry(&self) -> &GeometryFactors;
    /// Load vector over all DOFs.
    fn load(&self) -> &[f64];

    /// Integrated density of element `t`; `+inf` outside the admissible set.
    fn element_density(&self, t: usize, local: &[f64]) -> f64;

    /// Derivative of [`LocalEnergy::element_density`] with respect to the
    /// local coefficients, written to `out`.
    fn element_gradient(&self, t: usize, local: &[f64], out: &mut [f64]) -> Result<()>;
}

/// Signed local coefficients of element `t`.
pub fn gather(dofmap: &DofMap, t: usize, v_full: &[f64], out: &mut [f64]) {
    let n_local = dofmap.n_local;
    let dofs = dofmap.elem_dofs(t);
    let signs = dofmap.elem_signs(t);
    for c in 0..dofmap.components {
        let base = c * dofmap.n_scalar;
        for m in 0..n_local {
            out[c * n_local + m] = signs[m] * v_full[base + dofs[m]];
        }
    }
}

fn check_len(model: &impl LocalEnergy, v_full: &[f64]) -> Result<()> {
    let n = model.dofmap().n_dofs();
    if v_full.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: v_full.len(),
        });
    }
    Ok(())
}

/// Per-element integrated densities.
pub fn element_densities(model: &impl LocalEnergy, v_full: &[f64]) -> Result<Vec<f64>> {
    check_len(model, v_full)?;
    let d = model.dofmap();
    let width = d.n_local * d.components;
    Ok((0..d.n_elems)
        .into_par_iter()
        .map_init(
            || vec![0.0; width],
            |buf, t| {
                gather(d, t, v_full, buf);
                model.element_density(t, buf)
            },
        )
        .collect())
}

/// Total energy `sum_e density_e - b_full . v_full`.
pub fn energy(model: &impl LocalEnergy, v_full: &[f64]) -> Result<f64> {
    let dens = element_densities(model, v_full)?;
    let mut total = 0.0;
    for e in dens {
        total += e;
    }
    if total.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let linear: f64 = model.load().iter().zip(v_full).map(|(b, v)| b * v).sum();
    Ok(total - linear)
}

/// Explicit gradient over all DOFs.
pub fn gradient(model: &impl LocalEnergy, v_full: &[f64]) -> Result<Vec<f64>> {
    check_len(model, v_full)?;
    let d = model.dofmap();
    let width = d.n_local * d.components;
    let locals: Vec<Result<Vec<f64>>> = (0..d.n_elems)
        .into_par_iter()
        .map_init(
            || vec![0.0; width],
            |buf, t| {
                gather(d, t, v_full, buf);
                let mut out = vec![0.0; width];
                model.element_gradient(t, buf, &mut out)?;
                Ok(out)
            },
        )
        .collect();
    let mut g: Vec<f64> = model.load().iter().map(|b| -b).collect();
    for (t, local) in locals.into_iter().enumerate() {
        let local = local?;
        let dofs = d.elem_dofs(t);
        let signs = d.elem_signs(t);
        for c in 0..d.components {
            let base = c * d.n_scalar;
            for m in 0..d.n_local {
                g[base + dofs[m]] += signs[m] * local[c * d.n_local + m];
            }
        }
    }
    Ok(g)
}

/// Load vector `b[i] = sum_e sum_q wdetj * f_c * phi_i` for a constant
/// per-component source.
pub fn assemble_load(geometry: &GeometryFactors, dofmap: &DofMap, f: [f64; 2]) -> Vec<f64> {
    let mut b = vec![0.0; dofmap.n_dofs()];
    let (n_ip, n_local) = (geometry.n_ip, geometry.n_local);
    // element-independent part: integral of phi_m over the element
    for t in 0..dofmap.n_elems {
        let w = &geometry.wdetj[t * n_ip..(t + 1) * n_ip];
        let dofs = dofmap.elem_dofs(t);
        let signs = dofmap.elem_signs(t);
        for m in 0..n_local {
            let integral: f64 = (0..n_ip).map(|q| w[q] * geometry.phi(m, q)).sum();
            for c in 0..dofmap.components {
                b[c * dofmap.n_scalar + dofs[m]] += signs[m] * f[c] * integral;
            }
        }
    }
    b
}

/// Gradient of the discrete field at every quadrature point.
///
/// `grads[c][t * n_ip + q]` holds `(d/dx, d/dy)` of component `c`; for the
/// vector case row `c` of the deformation gradient.
#[derive(Debug, Clone)]
pub struct GaussField {
    pub n_ip: usize,
    pub n_elems: usize,
    pub grads: Vec<Vec<[f64; 2]>>,
}

impl GaussField {
    #[inline]
    pub fn at(&self, c: usize, t: usize, q: usize) -> [f64; 2] {
        self.grads[c][t * self.n_ip + q]
    }
}

/// Gradient of component values at the quadrature points of one element.
#[inline]
pub(crate) fn local_grad(geo: &GeometryFactors, t: usize, q: usize, coef: &[f64]) -> [f64; 2] {
    let n_local = geo.n_local;
    let off = geo.elem_offset(t) + q * n_local;
    let dx = &geo.dphi_x[off..off + n_local];
    let dy = &geo.dphi_y[off..off + n_local];
    let mut g = [0.0; 2];
    for m in 0..n_local {
        g[0] += coef[m] * dx[m];
        g[1] += coef[m] * dy[m];
    }
    g
}

pub fn evaluate_gradfield(model: &impl LocalEnergy, v_full: &[f64]) -> Result<GaussField> {
    check_len(model, v_full)?;
    let d = model.dofmap();
    let geo = model.geometry();
    let n_ip = geo.n_ip;
    let mut grads = vec![Vec::with_capacity(n_ip * d.n_elems); d.components];
    let mut buf = vec![0.0; d.n_local * d.components];
    for t in 0..d.n_elems {
        gather(d, t, v_full, &mut buf);
        for (c, out) in grads.iter_mut().enumerate() {
            let coef = &buf[c * d.n_local..(c + 1) * d.n_local];
            out.extend((0..n_ip).map(|q| local_grad(geo, t, q, coef)));
        }
    }
    Ok(GaussField {
        n_ip,
        n_elems: d.n_elems,
        grads,
    })
}
