//! Finite-difference derivatives: element-local central-difference
//! gradients and colored sparse Hessian approximation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{gather, LocalEnergy};
use crate::sparse::{CsrMatrix, SparsityPattern};

/// Default relative step for central differences.
pub const CENTRAL_STEP: f64 = 1e-6;

/// Step actually used for coordinate value `v`.
#[inline]
pub fn scaled_step(h: f64, v: f64) -> f64 {
    h * v.abs().max(1.0)
}

/// Central-difference gradient of a [`LocalEnergy`] at the free DOFs.
///
/// Perturbing DOF `i` only changes the densities of the elements supporting
/// it, so only those are re-evaluated; the linear term contributes `-b_i`
/// exactly. Entries at fixed DOFs are zero.
pub fn gradient_central(model: &impl LocalEnergy, v_full: &[f64], h: f64) -> Result<Vec<f64>> {
    if h <= 0.0 {
        return Err(Error::Domain(format!("difference step must be positive, got {h}")));
    }
    let d = model.dofmap();
    if v_full.len() != d.n_dofs() {
        return Err(Error::LengthMismatch {
            expected: d.n_dofs(),
            got: v_full.len(),
        });
    }
    let width = d.n_local * d.components;
    let load = model.load();
    let free: Vec<Result<f64>> = d
        .free_dofs
        .par_iter()
        .map_init(
            || vec![0.0; width],
            |buf, &dof| {
                let (c, s) = d.split(dof);
                let step = scaled_step(h, v_full[dof]);
                let mut diff = 0.0;
                for &t in d.scalar_support(s) {
                    gather(d, t, v_full, buf);
                    let m = d.elem_dofs(t).iter().position(|&x| x == s).expect("support is consistent");
                    let k = c * d.n_local + m;
                    let sign = d.elem_signs(t)[m];
                    let base = buf[k];
                    buf[k] = base + sign * step;
                    let plus = model.element_density(t, buf);
                    buf[k] = base - sign * step;
                    let minus = model.element_density(t, buf);
                    if !(plus.is_finite() && minus.is_finite()) {
                        return Err(Error::Barrier { element: t });
                    }
                    diff += plus - minus;
                }
                Ok(diff / (2.0 * step) - load[dof])
            },
        )
        .collect();
    let mut g = vec![0.0; d.n_dofs()];
    for (&dof, gi) in d.free_dofs.iter().zip(free) {
        g[dof] = gi?;
    }
    Ok(g)
}

/// Plain central differences of an arbitrary energy, re-evaluating it in
/// full for every probe.
pub fn central_difference(energy: impl Fn(&[f64]) -> f64, v: &[f64], h: f64) -> Result<Vec<f64>> {
    if h <= 0.0 {
        return Err(Error::Domain(format!("difference step must be positive, got {h}")));
    }
    let mut w = v.to_vec();
    let mut g = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        let step = scaled_step(h, v[i]);
        w[i] = v[i] + step;
        let plus = energy(&w);
        w[i] = v[i] - step;
        let minus = energy(&w);
        w[i] = v[i];
        if !(plus.is_finite() && minus.is_finite()) {
            return Err(Error::NonFinite(format!("energy at probe of coordinate {i}")));
        }
        g.push((plus - minus) / (2.0 * step));
    }
    Ok(g)
}

/// Column groups with pairwise disjoint row structure.
#[derive(Debug, Clone)]
pub struct ColoredPattern {
    pub pattern: SparsityPattern,
    pub groups: Vec<usize>,
    pub n_groups: usize,
}

impl ColoredPattern {
    /// Members of each group, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_groups];
        for (j, &g) in self.groups.iter().enumerate() {
            out[g].push(j);
        }
        out
    }
}

/// Sequential greedy distance-2 coloring in natural column order.
pub fn greedy_coloring(pattern: &SparsityPattern) -> ColoredPattern {
    let n = pattern.n;
    let mut groups = vec![usize::MAX; n];
    let mut stamp: Vec<usize> = Vec::new();
    let mut n_groups = 0;
    for j in 0..n {
        for &i in pattern.row(j) {
            for &k in pattern.row(i) {
                let g = groups[k];
                if g != usize::MAX {
                    stamp[g] = j;
                }
            }
        }
        let color = (0..n_groups).find(|&g| stamp[g] != j).unwrap_or_else(|| {
            stamp.push(usize::MAX);
            n_groups += 1;
            n_groups - 1
        });
        groups[j] = color;
    }
    ColoredPattern {
        pattern: pattern.clone(),
        groups,
        n_groups,
    }
}

/// Sparse Hessian from forward differences of `grad`, one difference per
/// color group, symmetrized.
pub fn hessian_fd<G>(grad: G, v: &[f64], colored: &ColoredPattern, h: f64) -> Result<CsrMatrix>
where
    G: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    if h <= 0.0 {
        return Err(Error::Domain(format!("difference step must be positive, got {h}")));
    }
    let pattern = &colored.pattern;
    if v.len() != pattern.n {
        return Err(Error::LengthMismatch {
            expected: pattern.n,
            got: v.len(),
        });
    }
    let g0 = grad(v)?;
    let members = colored.members();
    let diffs: Vec<Result<Vec<f64>>> = members
        .par_iter()
        .map(|group| {
            let mut w = v.to_vec();
            for &j in group {
                w[j] += h;
            }
            let g1 = grad(&w)?;
            Ok(g1.iter().zip(&g0).map(|(a, b)| (a - b) / h).collect())
        })
        .collect();
    let mut hess = CsrMatrix::zeros(pattern.clone());
    for (group, diff) in members.iter().zip(diffs) {
        let diff = diff?;
        for &j in group {
            for &i in pattern.row(j) {
                let k = pattern.position(i, j).expect("symmetric pattern");
                hess.values[k] = diff[i];
            }
        }
    }
    hess.symmetrize();
    Ok(hess)
}
