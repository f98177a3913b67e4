use super::{assemble_load, local_grad, LocalEnergy};
use crate::basis::tabulate;
use crate::dofmap::{build_dofmap, DirichletSpec, DofMap};
use crate::error::{Error, Result};
use crate::mesh::{geometry_factors, GeometryFactors, QuadMesh};
use crate::quadrature::rule_for_degree;

/// `J(v) = 1/alpha * int |grad v|^alpha - int f v` with constant `f`.
#[derive(Debug, Clone)]
pub struct PLaplaceModel {
    pub alpha: f64,
    pub f: f64,
    pub geometry: GeometryFactors,
    pub dofmap: DofMap,
    pub b_full: Vec<f64>,
}

impl PLaplaceModel {
    pub fn new(mesh: &QuadMesh, p: usize, alpha: f64, f: f64, dirichlet: &DirichletSpec) -> Result<Self> {
        let rule = rule_for_degree(p)?;
        Self::with_rule(mesh, p, &rule, alpha, f, dirichlet)
    }

    pub fn with_rule(
        mesh: &QuadMesh,
        p: usize,
        rule: &crate::quadrature::QuadRule,
        alpha: f64,
        f: f64,
        dirichlet: &DirichletSpec,
    ) -> Result<Self> {
        if alpha <= 1.0 || !alpha.is_finite() {
            return Err(Error::Domain(format!("p-Laplace power must exceed 1, got {alpha}")));
        }
        let table = tabulate(p, &rule.points)?;
        let geometry = geometry_factors(mesh, rule, &table)?;
        let dofmap = build_dofmap(mesh, p, 1, dirichlet)?;
        let b_full = assemble_load(&geometry, &dofmap, [f, 0.0]);
        Ok(PLaplaceModel {
            alpha,
            f,
            geometry,
            dofmap,
            b_full,
        })
    }
}

impl LocalEnergy for PLaplaceModel {
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
        let geo = &self.geometry;
        let half = 0.5 * self.alpha;
        let w = &geo.wdetj[t * geo.n_ip..(t + 1) * geo.n_ip];
        let mut sum = 0.0;
        for (q, wq) in w.iter().enumerate() {
            let [gx, gy] = local_grad(geo, t, q, local);
            sum += wq * (gx * gx + gy * gy).powf(half);
        }
        sum / self.alpha
    }

    fn element_gradient(&self, t: usize, local: &[f64], out: &mut [f64]) -> Result<()> {
        let geo = &self.geometry;
        let n_local = geo.n_local;
        out[..n_local].fill(0.0);
        for q in 0..geo.n_ip {
            let [gx, gy] = local_grad(geo, t, q, local);
            let sq = gx * gx + gy * gy;
            let factor = if sq == 0.0 {
                if self.alpha < 2.0 {
                    return Err(Error::SingularGradient {
                        alpha: self.alpha,
                        element: t,
                    });
                }
                0.0
            } else {
                sq.powf(0.5 * self.alpha - 1.0)
            };
            let s = geo.wdetj[t * geo.n_ip + q] * factor;
            let off = geo.elem_offset(t) + q * n_local;
            for m in 0..n_local {
                out[m] += s * (gx * geo.dphi_x[off + m] + gy * geo.dphi_y[off + m]);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_lshape, make_rectangle};
    use crate::models::{energy, gradient};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn naive_central(model: &PLaplaceModel, v: &[f64], h: f64) -> Vec<f64> {
        let mut w = v.to_vec();
        (0..v.len())
            .map(|i| {
                w[i] = v[i] + h;
                let ep = energy(model, &w).unwrap();
                w[i] = v[i] - h;
                let em = energy(model, &w).unwrap();
                w[i] = v[i];
                (ep - em) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn zero_state() {
        let mesh = make_lshape(1);
        let m = PLaplaceModel::new(&mesh, 2, 3.0, -10.0, &DirichletSpec::zero(&["boundary"])).unwrap();
        let v = vec![0.0; m.dofmap.n_dofs()];
        assert_eq!(energy(&m, &v).unwrap(), 0.0);
        let m0 = PLaplaceModel::new(&mesh, 2, 3.0, 0.0, &DirichletSpec::zero(&["boundary"])).unwrap();
        assert!(gradient(&m0, &v).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn dirichlet_energy_of_linear_field() {
        let mesh = make_rectangle(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        let m = PLaplaceModel::new(&mesh, 1, 2.0, 0.0, &DirichletSpec::none()).unwrap();
        let v = m.dofmap.nodal_interpolant(&mesh, |x| [x[0], 0.0]);
        assert_abs_diff_eq!(energy(&m, &v).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn rejects_small_alpha() {
        let mesh = make_lshape(0);
        assert!(PLaplaceModel::new(&mesh, 1, 1.0, 0.0, &DirichletSpec::none()).is_err());
    }

    #[test]
    fn singular_gradient_for_alpha_below_two() {
        let mesh = make_lshape(0);
        let m = PLaplaceModel::new(&mesh, 1, 1.5, 0.0, &DirichletSpec::none()).unwrap();
        let err = gradient(&m, &vec![0.0; m.dofmap.n_dofs()]).unwrap_err();
        assert!(matches!(err, Error::SingularGradient { .. }));
    }

    #[test]
    fn explicit_gradient_matches_central_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mesh = make_lshape(1);
        for (p, alpha) in [(1, 3.0), (2, 3.0), (3, 2.5), (2, 1.7)] {
            let m = PLaplaceModel::new(&mesh, p, alpha, -10.0, &DirichletSpec::zero(&["boundary"])).unwrap();
            let v: Vec<f64> = (0..m.dofmap.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = gradient(&m, &v).unwrap();
            let fd = naive_central(&m, &v, 1e-6);
            let scale = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let err = g.iter().zip(&fd).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            assert!(err / scale < 1e-6, "p={p} alpha={alpha} rel err {}", err / scale);
        }
    }

    #[test]
    fn constant_shift_leaves_energy_unchanged() {
        let mesh = make_lshape(1);
        let m = PLaplaceModel::new(&mesh, 3, 3.0, 0.0, &DirichletSpec::none()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let v: Vec<f64> = (0..m.dofmap.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let shift = m.dofmap.nodal_interpolant(&mesh, |_| [2.5, 0.0]);
        let w: Vec<f64> = v.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let (a, b) = (energy(&m, &v).unwrap(), energy(&m, &w).unwrap());
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }
}
