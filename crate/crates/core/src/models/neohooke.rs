use super::{assemble_load, local_grad, LocalEnergy};
use crate::basis::tabulate;
use crate::dofmap::{build_dofmap, DirichletSpec, DofMap};
use crate::error::{Error, Result};
use crate::mesh::{geometry_factors, GeometryFactors, QuadMesh};
use crate::quadrature::rule_for_degree;

/// Material constants of the compressible Neo-Hookean density
/// `W(F) = C1 (|F|^2 - 2 - 2 log det F) + D1 (det F - 1)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeoHookeParams {
    pub c1: f64,
    pub d1: f64,
}

impl NeoHookeParams {
    pub fn new(c1: f64, d1: f64) -> Self {
        NeoHookeParams { c1, d1 }
    }

    /// `C1 = mu / 2`, `D1 = K / 2` with shear modulus `mu = E / (2 (1 + nu))`
    /// and bulk modulus `K = E / (3 (1 - 2 nu))`.
    pub fn from_young_poisson(young: f64, poisson: f64) -> Self {
        let mu = young / (2.0 * (1.0 + poisson));
        let bulk = young / (3.0 * (1.0 - 2.0 * poisson));
        NeoHookeParams {
            c1: mu / 2.0,
            d1: bulk / 2.0,
        }
    }

    /// Stored energy at `F = [[f11, f12], [f21, f22]]`; `+inf` if `det F <= 0`.
    pub fn density(&self, f: [[f64; 2]; 2]) -> f64 {
        let det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
        if det <= 0.0 {
            return f64::INFINITY;
        }
        let i1 = f[0][0] * f[0][0] + f[0][1] * f[0][1] + f[1][0] * f[1][0] + f[1][1] * f[1][1];
        self.c1 * (i1 - 2.0 - 2.0 * det.ln()) + self.d1 * (det - 1.0) * (det - 1.0)
    }

    /// First Piola stress `P = 2 C1 (F - F^-T) + 2 D1 (J - 1) J F^-T`, or
    /// `None` when `det F <= 0`.
    pub fn stress(&self, f: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
        let det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
        if det <= 0.0 {
            return None;
        }
        let inv_t = [[f[1][1] / det, -f[1][0] / det], [-f[0][1] / det, f[0][0] / det]];
        let vol = 2.0 * self.d1 * (det - 1.0) * det;
        let mut p = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                p[r][c] = 2.0 * self.c1 * (f[r][c] - inv_t[r][c]) + vol * inv_t[r][c];
            }
        }
        Some(p)
    }
}

/// `J(v) = int W(grad v) - int f . v` over deformations `v`.
#[derive(Debug, Clone)]
pub struct NeoHookeModel {
    pub params: NeoHookeParams,
    pub f_vec: [f64; 2],
    pub geometry: GeometryFactors,
    pub dofmap: DofMap,
    pub b_full: Vec<f64>,
    identity: Vec<f64>,
}

impl NeoHookeModel {
    pub fn new(
        mesh: &QuadMesh,
        p: usize,
        params: NeoHookeParams,
        f_vec: [f64; 2],
        dirichlet: &DirichletSpec,
    ) -> Result<Self> {
        if !(params.c1 > 0.0 && params.d1 > 0.0) {
            return Err(Error::Domain(format!(
                "material constants must be positive, got C1 = {}, D1 = {}",
                params.c1, params.d1
            )));
        }
        let rule = rule_for_degree(p)?;
        let table = tabulate(p, &rule.points)?;
        let geometry = geometry_factors(mesh, &rule, &table)?;
        let dofmap = build_dofmap(mesh, p, 2, dirichlet)?;
        let b_full = assemble_load(&geometry, &dofmap, f_vec);
        let identity = dofmap.nodal_interpolant(mesh, |x| x);
        Ok(NeoHookeModel {
            params,
            f_vec,
            geometry,
            dofmap,
            b_full,
            identity,
        })
    }

    /// Coefficients of the identity deformation (vertex DOFs at the node
    /// coordinates, higher modes zero).
    pub fn identity(&self) -> Vec<f64> {
        self.identity.clone()
    }

    fn deformation_gradient(&self, t: usize, q: usize, local: &[f64]) -> [[f64; 2]; 2] {
        let n = self.geometry.n_local;
        [
            local_grad(&self.geometry, t, q, &local[..n]),
            local_grad(&self.geometry, t, q, &local[n..2 * n]),
        ]
    }

    /// Smallest `det F` over all quadrature points.
    pub fn min_det(&self, v_full: &[f64]) -> f64 {
        let d = &self.dofmap;
        let mut buf = vec![0.0; 2 * d.n_local];
        let mut min = f64::INFINITY;
        for t in 0..d.n_elems {
            super::gather(d, t, v_full, &mut buf);
            for q in 0..self.geometry.n_ip {
                let f = self.deformation_gradient(t, q, &buf);
                min = min.min(f[0][0] * f[1][1] - f[0][1] * f[1][0]);
            }
        }
        min
    }

    /// Area-weighted mean density per element.
    pub fn mean_density(&self, v_full: &[f64]) -> Result<Vec<f64>> {
        let dens = super::element_densities(self, v_full)?;
        let n_ip = self.geometry.n_ip;
        Ok(dens
            .into_iter()
            .enumerate()
            .map(|(t, e)| e / self.geometry.wdetj[t * n_ip..(t + 1) * n_ip].iter().sum::<f64>())
            .collect())
    }
}

impl LocalEnergy for NeoHookeModel {
    fn dofmap(&self) -> &DofMap {
        &self.dofmap
    }

    fn geometry(&self) -> &GeometryFactors {
        &self.geometry
    }

    fn load(&self) -> &[f64] {
        &self.b_full
    }

    fn element_density(&self, t: usize, local: &[f64]) -> f64 {
        let n_ip = self.geometry.n_ip;
        let mut sum = 0.0;
        for q in 0..n_ip {
            let w = self.params.density(self.deformation_gradient(t, q, local));
            if w.is_infinite() {
                return f64::INFINITY;
            }
            sum += self.geometry.wdetj[t * n_ip + q] * w;
        }
        sum
    }

    fn element_gradient(&self, t: usize, local: &[f64], out: &mut [f64]) -> Result<()> {
        let geo = &self.geometry;
        let n = geo.n_local;
        out[..2 * n].fill(0.0);
        for q in 0..geo.n_ip {
            let f = self.deformation_gradient(t, q, local);
            let p = self.params.stress(f).ok_or(Error::Barrier { element: t })?;
            let w = geo.wdetj[t * geo.n_ip + q];
            let off = geo.elem_offset(t) + q * n;
            for c in 0..2 {
                let (px, py) = (w * p[c][0], w * p[c][1]);
                for m in 0..n {
                    out[c * n + m] += px * geo.dphi_x[off + m] + py * geo.dphi_y[off + m];
                }
            }
        }
        Ok(())
    }
}
