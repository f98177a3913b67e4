//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::process::Command;
use std::time::Instant;

use hpmin_core::basis::{kernel_eval, shape_kinds, tabulate, ShapeKind, REF_VERTICES};
use hpmin_core::bench::{rows_from_csv, run_hyperelasticity, run_plaplace, BenchConfig};
use hpmin_core::dofmap::{build_dofmap, sparsity_pattern, DirichletSpec, DofKind, DofMap};
use hpmin_core::fd::{greedy_coloring, hessian_fd};
use hpmin_core::mesh::{make_lshape, make_perforated_square, QuadMesh};
use hpmin_core::models::{energy, gradient, LocalEnergy, NeoHookeModel, NeoHookeParams, PLaplaceModel};
use hpmin_core::quadrature::{gauss_1d, rule_for_degree};
use hpmin_core::solver::{minimize, predicted_reduction, steihaug_cg, GradientMode, Objective, TrOptions};
use hpmin_core::sparse::{CsrMatrix, SparsityPattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

// ---------------------------------------------------------------------------
// 1. L-shape reference energies through the CLI

const LSHAPE_ENERGIES: [f64; 4] = [-7.9209, -7.9488, -7.9562, -7.9587];
const LSHAPE_TOL: f64 = 5e-4;
const LSHAPE_BUDGET_S: f64 = 60.0;

fn lshape_reference_energies() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_hpmin"))
        .args(["plaplace", "--p", "2", "--alpha", "3", "--f", "-10", "--levels", "1..4", "--out"])
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    let wall = start.elapsed().as_secs_f64();
    ensure(out.status.success(), format!("exit status {:?}", out.status.code()))?;
    let csv = std::fs::read_to_string(dir.path().join("plaplace_p2.csv")).map_err(|e| e.to_string())?;
    let rows = rows_from_csv(&csv).map_err(|e| e.to_string())?;
    ensure(rows.len() == 4, format!("{} rows", rows.len()))?;
    let mut detail = Vec::new();
    for (row, want) in rows.iter().zip(LSHAPE_ENERGIES) {
        let dev = (row.energy - want).abs();
        detail.push(format!("L{} J={:.6} (|dJ|={dev:.1e})", row.level, row.energy));
        ensure(dev <= LSHAPE_TOL, format!("level {} energy {} vs {want}", row.level, row.energy))?;
    }
    ensure(rows[3].dofs == 8961, format!("level 4 has {} free dofs", rows[3].dofs))?;
    ensure(wall < LSHAPE_BUDGET_S, format!("took {wall:.1}s"))?;
    Ok(format!("{}; wall {wall:.1}s", detail.join(", ")))
}

// ---------------------------------------------------------------------------
// 2. explicit vs central-difference gradients give the same minimizer energy

fn gradient_mode_equivalence() -> Check {
    let explicit = run_plaplace(&BenchConfig::plaplace()).map_err(|e| e.to_string())?;
    let central = run_plaplace(&BenchConfig {
        gradient_mode: GradientMode::CentralDiff,
        ..BenchConfig::plaplace()
    })
    .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (a, b) in explicit.iter().zip(&central) {
        ensure(a.converged && b.converged, format!("level {} did not converge", a.row.level))?;
        worst = worst.max((a.row.energy - b.row.energy).abs());
    }
    ensure(worst <= 1e-6, format!("max |dJ| = {worst:.2e}"))?;
    Ok(format!("levels 1..4, max |J_explicit - J_fd| = {worst:.2e}"))
}

// ---------------------------------------------------------------------------
// 3. DOF counts

fn dof_counts() -> Check {
    let d = build_dofmap(&make_lshape(0), 2, 1, &DirichletSpec::none()).map_err(|e| e.to_string())?;
    let nodal = d.dof_kind.iter().filter(|k| matches!(k, DofKind::Node(_))).count();
    let edge = d.dof_kind.iter().filter(|k| matches!(k, DofKind::Edge { .. })).count();
    ensure((d.n_dofs(), nodal, edge) == (53, 21, 32), format!("{} = {nodal} + {edge}", d.n_dofs()))?;
    let d1 = build_dofmap(&make_lshape(1), 2, 1, &DirichletSpec::zero(&["boundary"])).map_err(|e| e.to_string())?;
    ensure(d1.n_free() == 113, format!("level 1 free dofs {}", d1.n_free()))?;
    Ok(format!("n_p = {} ({nodal} nodal + {edge} edge), level-1 free = {}", d.n_dofs(), d1.n_free()))
}

// ---------------------------------------------------------------------------
// 4. the p=2 pattern contains the p=1 pattern on the nodal block

fn sparsity_nesting() -> Check {
    let meshes = [
        ("L-shape level 1", make_lshape(1)),
        ("perforated level 0", make_perforated_square(0).map_err(|e| e.to_string())?),
    ];
    for (name, mesh) in &meshes {
        for components in [1, 2] {
            let fine = sparsity_pattern(&build_dofmap(mesh, 2, components, &DirichletSpec::none()).map_err(|e| e.to_string())?);
            let coarse = build_dofmap(mesh, 1, components, &DirichletSpec::none()).map_err(|e| e.to_string())?;
            let coarse_pattern = sparsity_pattern(&coarse);
            // nodal dofs of component c sit at c * n_scalar + node in both maps
            let n = mesh.n_nodes();
            let fine_scalar = build_dofmap(mesh, 2, 1, &DirichletSpec::none()).map_err(|e| e.to_string())?.n_scalar;
            let lift = |i: usize| (i / n) * fine_scalar + i % n;
            for i in 0..coarse.n_dofs() {
                let want: Vec<usize> = coarse_pattern.row(i).iter().map(|&j| lift(j)).collect();
                let got: Vec<usize> = fine
                    .row(lift(i))
                    .iter()
                    .copied()
                    .filter(|&j| j % fine_scalar < n)
                    .collect();
                ensure(want == got, format!("{name}, {components} comp., row {i} differs"))?;
            }
        }
    }
    Ok("nodal block of p=2 equals p=1 pattern (scalar and vector, 2 meshes)".into())
}

// ---------------------------------------------------------------------------
// 5. gradients against naive central differences; FD Hessian against stiffness

const FD_STEP: f64 = 1e-6;

fn naive_gradient_error(model: &impl LocalEnergy, v: &[f64]) -> Result<f64, String> {
    let d = model.dofmap();
    let g = gradient(model, v).map_err(|e| e.to_string())?;
    let mut w = v.to_vec();
    let mut fd = Vec::with_capacity(d.n_free());
    let mut exact = Vec::with_capacity(d.n_free());
    for &i in &d.free_dofs {
        w[i] = v[i] + FD_STEP;
        let ep = energy(model, &w).map_err(|e| e.to_string())?;
        w[i] = v[i] - FD_STEP;
        let em = energy(model, &w).map_err(|e| e.to_string())?;
        w[i] = v[i];
        fd.push((ep - em) / (2.0 * FD_STEP));
        exact.push(g[i]);
    }
    let diff: Vec<f64> = fd.iter().zip(&exact).map(|(a, b)| a - b).collect();
    Ok(inf_norm(&diff) / inf_norm(&fd).max(f64::MIN_POSITIVE))
}

fn q1_stiffness(mesh: &QuadMesh) -> Vec<Vec<f64>> {
    // bilinear elements on axis-aligned rectangles, 2x2 Gauss
    let n = mesh.n_nodes();
    let mut k = vec![vec![0.0; n]; n];
    let (pts, wts) = gauss_1d(2).unwrap();
    for elem in &mesh.elems2nodes {
        let c = elem.map(|i| mesh.nodes[i]);
        let xs = c.map(|p| p[0]);
        let ys = c.map(|p| p[1]);
        let (x0, hx) = (xs.iter().cloned().fold(f64::INFINITY, f64::min), xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        let (y0, hy) = (ys.iter().cloned().fold(f64::INFINITY, f64::min), ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        let (hx, hy) = (hx - x0, hy - y0);
        for (qi, &s) in pts.iter().enumerate() {
            for (qj, &t) in pts.iter().enumerate() {
                let (x, y) = (x0 + (s + 1.0) * hx / 2.0, y0 + (t + 1.0) * hy / 2.0);
                // hat function of corner a: product of 1D hats in x and y
                let grad = |a: usize| {
                    let (ax, ay) = (c[a][0], c[a][1]);
                    let lx = 1.0 - (x - ax).abs() / hx;
                    let ly = 1.0 - (y - ay).abs() / hy;
                    let sx = if ax > x0 { 1.0 } else { -1.0 } / hx;
                    let sy = if ay > y0 { 1.0 } else { -1.0 } / hy;
                    [sx * ly, lx * sy]
                };
                let w = wts[qi] * wts[qj] * hx * hy / 4.0;
                for a in 0..4 {
                    for b in 0..4 {
                        let (ga, gb) = (grad(a), grad(b));
                        k[elem[a]][elem[b]] += w * (ga[0] * gb[0] + ga[1] * gb[1]);
                    }
                }
            }
        }
    }
    k
}

fn gradient_correctness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_pl = 0.0f64;
    let mut worst_nh = 0.0f64;

    let lshape = make_lshape(1);
    let pl = PLaplaceModel::new(&lshape, 2, 3.0, -10.0, &DirichletSpec::zero(&["boundary"])).map_err(|e| e.to_string())?;
    for _ in 0..5 {
        let mut v = vec![0.0; pl.dofmap.n_dofs()];
        for &i in &pl.dofmap.free_dofs {
            v[i] = rng.gen_range(-1.0..1.0);
        }
        worst_pl = worst_pl.max(naive_gradient_error(&pl, &v)?);
    }

    let perforated = make_perforated_square(0).map_err(|e| e.to_string())?;
    let nh = NeoHookeModel::new(
        &perforated,
        2,
        NeoHookeParams::from_young_poisson(2e8, 0.3),
        [-3.5e7, -3.5e7],
        &DirichletSpec::identity(&["left", "bottom"]),
    )
    .map_err(|e| e.to_string())?;
    for _ in 0..5 {
        let mut v = nh.identity();
        for &i in &nh.dofmap.free_dofs {
            v[i] += rng.gen_range(-0.01..0.01);
        }
        ensure(nh.min_det(&v) > 0.0, "random point not admissible")?;
        worst_nh = worst_nh.max(naive_gradient_error(&nh, &v)?);
    }
    ensure(worst_pl < 1e-6 && worst_nh < 1e-6, format!("relative errors {worst_pl:.2e}, {worst_nh:.2e}"))?;

    // Hessian of the alpha = 2 energy is the stiffness matrix
    let m = PLaplaceModel::new(&lshape, 1, 2.0, -10.0, &DirichletSpec::zero(&["boundary"])).map_err(|e| e.to_string())?;
    let d = &m.dofmap;
    let pattern = sparsity_pattern(d);
    let grad = |w: &[f64]| Ok(d.restrict(&gradient(&m, &d.expand(w)?)?));
    let v: Vec<f64> = (0..d.n_free()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let h = hessian_fd(grad, &v, &greedy_coloring(&pattern), 1e-6).map_err(|e| e.to_string())?;
    let k = q1_stiffness(&lshape);
    let scale = d.free_dofs.iter().flat_map(|&i| d.free_dofs.iter().map(move |&j| (i, j))).fold(0.0f64, |a, (i, j)| a.max(k[i][j].abs()));
    let mut hess_err = 0.0f64;
    for (a, &i) in d.free_dofs.iter().enumerate() {
        for (b, &j) in d.free_dofs.iter().enumerate() {
            hess_err = hess_err.max((h.get(a, b) - k[i][j]).abs());
        }
    }
    let hess_rel = hess_err / scale;
    ensure(hess_rel < 1e-5, format!("Hessian relative error {hess_rel:.2e}"))?;
    Ok(format!(
        "p-Laplace {worst_pl:.2e}, Neo-Hookean {worst_nh:.2e} (5 points each); FD Hessian vs stiffness {hess_rel:.2e}"
    ))
}

// ---------------------------------------------------------------------------
// 6. basis and continuity invariants

fn edge_point(s: usize, u: f64) -> [f64; 2] {
    let (a, b) = (REF_VERTICES[s], REF_VERTICES[(s + 1) % 4]);
    [a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]
}

fn field_on_edge(mesh: &QuadMesh, d: &DofMap, v: &[f64], t: usize, s: usize, ts: &[f64]) -> Vec<f64> {
    // ts are fractions from the lower to the higher global node of the edge
    let nodes = mesh.elems2nodes[t];
    let forward = nodes[s] < nodes[(s + 1) % 4];
    let pts: Vec<[f64; 2]> = ts.iter().map(|&u| edge_point(s, if forward { u } else { 1.0 - u })).collect();
    let table = tabulate(d.p, &pts).unwrap();
    let (dofs, signs) = (d.elem_dofs(t), d.elem_signs(t));
    (0..pts.len())
        .map(|q| (0..d.n_local).map(|m| signs[m] * v[dofs[m]] * table.value(m, q)).sum())
        .collect()
}

fn basis_invariants() -> Check {
    let samples: Vec<f64> = (0..10).map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / 10.0).collect();
    let mut trace = 0.0f64;
    let mut unity = 0.0f64;
    let mut parity = 0.0f64;
    for p in 1..=6 {
        let kinds = shape_kinds(p);
        for s in 0..4 {
            let pts: Vec<[f64; 2]> = samples.iter().map(|&x| edge_point(s, (x + 1.0) / 2.0)).collect();
            let table = tabulate(p, &pts).map_err(|e| e.to_string())?;
            for (m, kind) in kinds.iter().enumerate() {
                let vanishes = match *kind {
                    ShapeKind::Edge { edge, .. } => edge != s,
                    ShapeKind::Bubble { .. } => true,
                    ShapeKind::Nodal { .. } => false,
                };
                if vanishes {
                    for q in 0..pts.len() {
                        trace = trace.max(table.value(m, q).abs());
                    }
                }
            }
        }
        let rule = rule_for_degree(p).map_err(|e| e.to_string())?;
        let table = tabulate(p, &rule.points).map_err(|e| e.to_string())?;
        for q in 0..rule.n_ip() {
            let sum: f64 = (0..4).map(|m| table.value(m, q)).sum();
            unity = unity.max((sum - 1.0).abs());
        }
    }
    for k in 2..=10 {
        for &x in &samples {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            parity = parity.max((kernel_eval(k, -x).unwrap().0 - sign * kernel_eval(k, x).unwrap().0).abs());
        }
    }
    ensure(trace < 1e-12, format!("trace {trace:.2e}"))?;
    ensure(unity < 1e-14, format!("partition of unity {unity:.2e}"))?;
    ensure(parity < 1e-14, format!("kernel parity {parity:.2e}"))?;

    // edge signs follow the local-vs-global orientation of odd modes
    let mesh = make_lshape(1);
    let p = 5;
    let d = build_dofmap(&mesh, p, 1, &DirichletSpec::none()).map_err(|e| e.to_string())?;
    let kinds = shape_kinds(p);
    for t in 0..mesh.n_elems() {
        let nodes = mesh.elems2nodes[t];
        for (m, kind) in kinds.iter().enumerate() {
            if let ShapeKind::Edge { edge, degree } = *kind {
                let flipped = degree % 2 == 1 && nodes[edge] > nodes[(edge + 1) % 4];
                let want = if flipped { -1.0 } else { 1.0 };
                ensure(d.elem_signs(t)[m] == want, format!("sign of element {t}, local {m}"))?;
            }
        }
    }

    // continuity across interior edges, odd modes alone and full fields
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ts: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
    let mut odd_jump = 0.0f64;
    let mut full_jump = 0.0f64;
    let perforated = make_perforated_square(0).map_err(|e| e.to_string())?;
    for mesh in [&mesh, &perforated] {
        let d = build_dofmap(mesh, 4, 1, &DirichletSpec::none()).map_err(|e| e.to_string())?;
        let mut owners = vec![Vec::new(); mesh.n_edges()];
        for t in 0..mesh.n_elems() {
            for s in 0..4 {
                owners[mesh.elems2edges[t][s]].push((t, s));
            }
        }
        let full: Vec<f64> = (0..d.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let odd: Vec<f64> = (0..d.n_dofs())
            .map(|i| match d.dof_kind[i] {
                DofKind::Edge { degree, .. } if degree % 2 == 1 => rng.gen_range(-1.0..1.0),
                _ => 0.0,
            })
            .collect();
        for pair in owners.iter().filter(|o| o.len() == 2) {
            let [(ta, sa), (tb, sb)] = [pair[0], pair[1]];
            for (v, jump) in [(&odd, &mut odd_jump), (&full, &mut full_jump)] {
                let a = field_on_edge(mesh, &d, v, ta, sa, &ts);
                let b = field_on_edge(mesh, &d, v, tb, sb, &ts);
                for (x, y) in a.iter().zip(&b) {
                    *jump = jump.max((x - y).abs());
                }
            }
        }
    }
    ensure(odd_jump < 1e-12, format!("odd-mode jump {odd_jump:.2e}"))?;
    ensure(full_jump < 1e-10, format!("field jump {full_jump:.2e}"))?;
    Ok(format!(
        "trace {trace:.1e}, unity {unity:.1e}, parity {parity:.1e}, signs ok, jumps {odd_jump:.1e}/{full_jump:.1e}"
    ))
}

// ---------------------------------------------------------------------------
// 7. energies decrease under h- and p-enrichment

const NESTING_SLACK: f64 = 1e-10;

fn nestedness() -> Check {
    let levels = vec![0, 1, 2, 3];
    let mut table = Vec::new();
    for p in 1..=4 {
        let runs = run_plaplace(&BenchConfig {
            p,
            levels: levels.clone(),
            ..BenchConfig::plaplace()
        })
        .map_err(|e| e.to_string())?;
        ensure(runs.iter().all(|r| r.converged), format!("p={p} did not converge"))?;
        table.push(runs.iter().map(|r| r.row.energy).collect::<Vec<f64>>());
    }
    for p in 0..3 {
        for l in 0..levels.len() {
            if l + 1 < levels.len() {
                ensure(table[p][l + 1] <= table[p][l] + NESTING_SLACK, format!("p={} level {l}->{}", p + 1, l + 1))?;
            }
            ensure(table[p + 1][l] <= table[p][l] + NESTING_SLACK, format!("level {l}: p={} -> {}", p + 1, p + 2))?;
        }
    }
    Ok(format!(
        "levels 0..3 x p 1..4; level 3: {}",
        table.iter().map(|r| format!("{:.6}", r[3])).collect::<Vec<_>>().join(" > ")
    ))
}

// ---------------------------------------------------------------------------
// 8. hyperelastic benchmark properties

const HYPER_BUDGET_S: f64 = 600.0;

fn hyperelastic_properties() -> Check {
    let start = Instant::now();
    let mut detail = Vec::new();
    for p in [2, 3] {
        let runs = run_hyperelasticity(&BenchConfig {
            p,
            levels: vec![1],
            ..BenchConfig::hyperelasticity()
        })
        .map_err(|e| e.to_string())?;
        let r = &runs[0];
        ensure((500..=2000).contains(&r.run.row.nelems), format!("{} elements", r.run.row.nelems))?;
        ensure(r.run.converged && r.run.grad_norm < r.run.grad_tol, format!("p={p}: |g| {:.3e}", r.run.grad_norm))?;
        ensure(r.min_det > 0.0, format!("p={p}: min det F {}", r.min_det))?;
        let mut prev = r.initial_energy;
        for rec in r.run.history.iter().filter(|h| h.accepted) {
            ensure(rec.energy.is_finite(), "accepted iterate crossed the barrier")?;
            ensure(rec.energy < prev + 1e-14 * prev.abs(), format!("p={p}: energy rose {prev} -> {}", rec.energy))?;
            prev = rec.energy;
        }
        let [ux, uy] = r.mean_displacement;
        ensure(ux < 0.0 && uy < 0.0, format!("p={p}: mean displacement ({ux}, {uy})"))?;
        detail.push(format!(
            "p={p}: {} elems, J={:.6e}, |g|={:.1e}<{:.1e}, min det F={:.3}, mean u=({ux:.3e},{uy:.3e})",
            r.run.row.nelems, r.run.row.energy, r.run.grad_norm, r.run.grad_tol, r.min_det
        ));
    }
    let wall = start.elapsed().as_secs_f64();
    ensure(wall < HYPER_BUDGET_S, format!("took {wall:.0}s"))?;
    Ok(format!("{}; wall {wall:.1}s", detail.join("; ")))
}

// ---------------------------------------------------------------------------
// 9. solver oracles

struct Quadratic {
    a: CsrMatrix,
    b: Vec<f64>,
    pattern: SparsityPattern,
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn energy(&self, x: &[f64]) -> f64 {
        let ax = self.a.mul_vec(x);
        x.iter().zip(&ax).zip(&self.b).map(|((xi, ai), bi)| 0.5 * xi * ai - bi * xi).sum()
    }
    fn gradient(&self, x: &[f64]) -> hpmin_core::Result<Vec<f64>> {
        Ok(self.a.mul_vec(x).iter().zip(&self.b).map(|(a, b)| a - b).collect())
    }
    fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }
}

struct Rosenbrock(SparsityPattern);

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        2
    }
    fn energy(&self, x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }
    fn gradient(&self, x: &[f64]) -> hpmin_core::Result<Vec<f64>> {
        let t = x[1] - x[0] * x[0];
        Ok(vec![-2.0 * (1.0 - x[0]) - 400.0 * x[0] * t, 200.0 * t])
    }
    fn pattern(&self) -> &SparsityPattern {
        &self.0
    }
}

/// Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        x[r] = (b[r] - (r + 1..n).map(|k| a[r][k] * x[k]).sum::<f64>()) / a[r][r];
    }
    x
}

fn solver_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 10;
    let m: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let dense: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| m[i][k] * m[j][k]).sum::<f64>() + if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let q = Quadratic {
        a: CsrMatrix::from_dense(&dense),
        b: b.clone(),
        pattern: SparsityPattern::dense(n),
    };
    let opts = TrOptions {
        grad_tol: 1e-10,
        initial_radius: 100.0,
        ..TrOptions::default()
    };
    let sol = minimize(&q, &vec![0.0; n], &opts).map_err(|e| e.to_string())?;
    let exact = dense_solve(dense, b);
    let x_err = inf_norm(&sol.x.iter().zip(&exact).map(|(a, b)| a - b).collect::<Vec<_>>());
    ensure(sol.converged() && sol.grad_norm < 1e-10, format!("SPD: |g| {:.2e}", sol.grad_norm))?;
    ensure(sol.iterations <= 10, format!("SPD: {} iterations", sol.iterations))?;
    ensure(x_err < 1e-8, format!("SPD: |x - A^-1 b| {x_err:.2e}"))?;

    let r = Rosenbrock(SparsityPattern::dense(2));
    let mut ros = Vec::new();
    for mode in [GradientMode::Explicit, GradientMode::CentralDiff] {
        let s = minimize(
            &r,
            &[-1.2, 1.0],
            &TrOptions {
                grad_tol: 1e-10,
                gradient_mode: mode,
                ..TrOptions::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let err = (s.x[0] - 1.0).abs().max((s.x[1] - 1.0).abs());
        ensure(err < 1e-8, format!("Rosenbrock {mode:?}: error {err:.2e}"))?;
        ros.push(err);
    }

    // Steihaug cases
    let eye = CsrMatrix::identity(3);
    let g = [3.0, -4.0, 12.0];
    let s = steihaug_cg(&eye, &g, 20.0, 1e-8, 10);
    ensure(!s.hit_boundary && s.step.iter().zip(&g).all(|(a, b)| (a + b).abs() < 1e-14), "H=I interior")?;
    let s = steihaug_cg(&eye, &g, 6.5, 1e-8, 10);
    ensure(
        s.hit_boundary && s.step.iter().zip(&g).all(|(a, b)| (a + 6.5 * b / 13.0).abs() < 1e-14),
        "H=I boundary",
    )?;
    // rotate diag(2, -1) by 30 degrees; g along the negative eigenvector
    let (c, sn) = (30f64.to_radians().cos(), 30f64.to_radians().sin());
    let h = CsrMatrix::from_dense(&[
        vec![2.0 * c * c - sn * sn, 3.0 * c * sn],
        vec![3.0 * c * sn, 2.0 * sn * sn - c * c],
    ]);
    let g = [-sn * 0.5, c * 0.5];
    let s = steihaug_cg(&h, &g, 0.7, 1e-8, 10);
    let len = (s.step[0].powi(2) + s.step[1].powi(2)).sqrt();
    ensure(s.hit_boundary && (len - 0.7).abs() < 1e-14, format!("negative curvature: |s| = {len}"))?;
    ensure(predicted_reduction(&h, &g, &s.step) > 0.0, "negative curvature: no model decrease")?;
    Ok(format!(
        "SPD |g|={:.1e} in {} its, |x-x*|={x_err:.1e}; Rosenbrock errors {:.1e}/{:.1e}; Steihaug cases ok",
        sol.grad_norm, sol.iterations, ros[0], ros[1]
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("L-shape p-Laplace energy regression (CLI, levels 1..4)", lshape_reference_energies),
        ("gradient-option equivalence", gradient_mode_equivalence),
        ("DOF bookkeeping oracles", dof_counts),
        ("sparsity nesting", sparsity_nesting),
        ("gradient correctness", gradient_correctness),
        ("basis property suite", basis_invariants),
        ("nestedness monotonicity", nestedness),
        ("hyperelasticity properties", hyperelastic_properties),
        ("solver unit oracles", solver_oracles),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {}. {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {}. {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
