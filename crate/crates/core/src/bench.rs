//! Benchmark drivers: the L-shape p-Laplace convergence study, the
//! perforated-square hyperelasticity run, and element comparisons, with CSV
//! and VTK output.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rayon::prelude::*;

use crate::dofmap::DirichletSpec;
use crate::error::{Error, Result};
use crate::mesh::{make_lshape, make_perforated_square, QuadMesh};
use crate::models::{assemble_load, energy, LocalEnergy, NeoHookeModel, NeoHookeParams, PLaplaceModel};
use crate::problem::EnergyProblem;
use crate::solver::{minimize, GradientMode, TrOptions, TrRecord, TrSolution};
use crate::vtk;

pub const CSV_HEADER: &str = "level,nelems,dofs,time_s,iters,energy";
pub const COMPARE_HEADER: &str = "label,p,level,nelems,dofs,time_s,iters,energy,error";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    PLaplace,
    Hyperelasticity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub problem: ProblemKind,
    pub p: usize,
    pub levels: Vec<usize>,
    pub alpha: f64,
    pub f: f64,
    pub young: f64,
    pub poisson: f64,
    pub f_vec: [f64; 2],
    pub gradient_mode: GradientMode,
    /// `None` selects the problem-specific default.
    pub grad_tol: Option<f64>,
    pub max_iters: usize,
    pub out_dir: Option<PathBuf>,
    pub vtk: bool,
    /// Run levels concurrently; timings are then reported as NaN.
    pub parallel: bool,
    pub label: Option<String>,
}

impl BenchConfig {
    pub fn plaplace() -> Self {
        BenchConfig {
            problem: ProblemKind::PLaplace,
            p: 2,
            levels: vec![1, 2, 3, 4],
            alpha: 3.0,
            f: -10.0,
            young: 2e8,
            poisson: 0.3,
            f_vec: [-3.5e7, -3.5e7],
            gradient_mode: GradientMode::Explicit,
            grad_tol: None,
            max_iters: 200,
            out_dir: None,
            vtk: false,
            parallel: false,
            label: None,
        }
    }

    pub fn hyperelasticity() -> Self {
        BenchConfig {
            problem: ProblemKind::Hyperelasticity,
            levels: vec![1],
            ..Self::plaplace()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::Config("level list is empty".into()));
        }
        if self.p < 1 {
            return Err(Error::Config("p must be >= 1".into()));
        }
        if self.problem == ProblemKind::PLaplace && self.alpha <= 1.0 {
            return Err(Error::Config(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        if self.problem == ProblemKind::Hyperelasticity && !(self.young > 0.0 && self.poisson > -1.0 && self.poisson < 0.5) {
            return Err(Error::Config("need E > 0 and -1 < nu < 0.5".into()));
        }
        if let Some(t) = self.grad_tol {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::Config("grad_tol must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| format!("Q{}", self.p))
    }

    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("invalid value '{value}' for {what}"));
        let num = |what: &str| value.parse::<f64>().map_err(|_| bad(what));
        match key {
            "problem" => {
                self.problem = match value {
                    "plaplace" => ProblemKind::PLaplace,
                    "hyper" | "hyperelasticity" => ProblemKind::Hyperelasticity,
                    _ => return Err(bad("problem")),
                }
            }
            "p" => self.p = value.parse().map_err(|_| bad("p"))?,
            "level" | "levels" => self.levels = parse_levels(value)?,
            "alpha" => self.alpha = num("alpha")?,
            "f" => self.f = num("f")?,
            "E" | "young" => self.young = num("E")?,
            "nu" | "poisson" => self.poisson = num("nu")?,
            "fx" => self.f_vec[0] = num("fx")?,
            "fy" => self.f_vec[1] = num("fy")?,
            "grad" => self.gradient_mode = parse_gradient_mode(value)?,
            "grad_tol" => self.grad_tol = Some(num("grad_tol")?),
            "max_iters" => self.max_iters = value.parse().map_err(|_| bad("max_iters"))?,
            "out" => self.out_dir = Some(PathBuf::from(value)),
            "vtk" => self.vtk = parse_bool(value).ok_or_else(|| bad("vtk"))?,
            "parallel" => self.parallel = parse_bool(value).ok_or_else(|| bad("parallel"))?,
            "label" => self.label = Some(value.to_string()),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}

pub fn parse_gradient_mode(v: &str) -> Result<GradientMode> {
    match v {
        "explicit" => Ok(GradientMode::Explicit),
        "fd" | "central" | "numerical" => Ok(GradientMode::CentralDiff),
        _ => Err(Error::Config(format!("unknown gradient mode '{v}' (explicit|fd)"))),
    }
}

/// `"1..4"` (inclusive), `"3"`, or `"1,3,5"`.
pub fn parse_levels(v: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("invalid level list '{v}'"));
    let v = v.trim();
    let levels: Vec<usize> = if let Some((a, b)) = v.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        v.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if levels.is_empty() {
        return Err(bad());
    }
    Ok(levels)
}

/// Parse `key = value` lines; `#` starts a comment. Returns the pairs in order.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub nelems: usize,
    pub dofs: usize,
    pub time_s: f64,
    pub iters: usize,
    pub energy: f64,
}

/// Round to the ten significant digits used in CSV output.
pub fn round_sig10(x: f64) -> f64 {
    fmt_sig10(x).parse().expect("formatted float parses")
}

impl ConvergenceRow {
    pub fn rounded(&self) -> Self {
        ConvergenceRow {
            time_s: round_sig10(self.time_s),
            energy: round_sig10(self.energy),
            ..self.clone()
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Config(format!("CSV: {e}"))
}

fn fmt_sig10(x: f64) -> String {
    format!("{x:.9e}")
}

fn write_csv(header: &str, records: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let push = |w: &mut csv::Writer<Vec<u8>>, rec: &[String]| w.write_record(rec).expect("in-memory CSV write");
    push(&mut w, &header.split(',').map(String::from).collect::<Vec<_>>());
    for rec in records {
        push(&mut w, &rec);
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

pub fn rows_to_csv(rows: &[ConvergenceRow]) -> String {
    write_csv(
        CSV_HEADER,
        rows.iter().map(|r| {
            vec![
                r.level.to_string(),
                r.nelems.to_string(),
                r.dofs.to_string(),
                fmt_sig10(r.time_s),
                r.iters.to_string(),
                fmt_sig10(r.energy),
            ]
        }),
    )
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ConvergenceRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers().map_err(csv_error)?.iter().map(String::from).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Config("missing convergence CSV header".into()));
    }
    rd.records()
        .map(|rec| {
            let rec = rec.map_err(csv_error)?;
            let bad = || Error::Config(format!("malformed CSV row {:?}", rec.position().map(|p| p.line())));
            let int = |i: usize| rec[i].trim().parse::<usize>().map_err(|_| bad());
            let float = |i: usize| rec[i].trim().parse::<f64>().map_err(|_| bad());
            Ok(ConvergenceRow {
                level: int(0)?,
                nelems: int(1)?,
                dofs: int(2)?,
                time_s: float(3)?,
                iters: int(4)?,
                energy: float(5)?,
            })
        })
        .collect()
}

/// Outcome of one level: the table row plus solver details.
#[derive(Debug, Clone)]
pub struct LevelRun {
    pub row: ConvergenceRow,
    pub converged: bool,
    pub grad_norm: f64,
    pub grad_tol: f64,
    pub history: Vec<TrRecord>,
    /// Full coefficient vector of the minimizer.
    pub solution: Vec<f64>,
}

/// Extra diagnostics of a hyperelastic level.
#[derive(Debug, Clone)]
pub struct HyperRun {
    pub run: LevelRun,
    pub initial_energy: f64,
    /// Smallest det F over all quadrature points at the minimizer.
    pub min_det: f64,
    /// Area-averaged displacement.
    pub mean_displacement: [f64; 2],
}

fn solver_options(cfg: &BenchConfig, grad_tol: f64, initial_radius: f64) -> TrOptions {
    TrOptions {
        grad_tol,
        max_iters: cfg.max_iters,
        initial_radius,
        max_radius: initial_radius.max(1e6),
        gradient_mode: cfg.gradient_mode,
        ..TrOptions::default()
    }
}

fn solve_level<M: LocalEnergy>(model: &M, x0_full: &[f64], opts: &TrOptions, timed: bool) -> Result<(TrSolution, f64)> {
    let problem = EnergyProblem::new(model);
    let x0 = problem.restrict(x0_full);
    let start = Instant::now();
    let sol = minimize(&problem, &x0, opts)?;
    let time = if timed { start.elapsed().as_secs_f64() } else { f64::NAN };
    Ok((sol, time))
}

fn run_levels<T: Send>(cfg: &BenchConfig, job: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    if cfg.parallel {
        cfg.levels.par_iter().map(|&l| job(l)).collect()
    } else {
        cfg.levels.iter().map(|&l| job(l)).collect()
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::from)
}

/// L-shape p-Laplace study with zero Dirichlet data on the whole boundary.
pub fn run_plaplace(cfg: &BenchConfig) -> Result<Vec<LevelRun>> {
    cfg.validate()?;
    let runs = run_levels(cfg, |level| {
        let mesh = make_lshape(level);
        let model = PLaplaceModel::new(&mesh, cfg.p, cfg.alpha, cfg.f, &DirichletSpec::zero(&["boundary"]))?;
        let x0 = vec![0.0; model.dofmap.n_dofs()];
        let grad_tol = cfg.grad_tol.unwrap_or(default_grad_tol(energy(&model, &x0)?, DOMAIN_DIAMETER));
        let opts = solver_options(cfg, grad_tol, 1.0);
        let (sol, time) = solve_level(&model, &x0, &opts, !cfg.parallel)?;
        let solution = model.dofmap.expand(&sol.x)?;
        info!(
            "plaplace p={} level={} dofs={} iters={} J={:.10} |g|={:.3e} {:?}",
            cfg.p,
            level,
            model.dofmap.n_free(),
            sol.iterations,
            sol.energy,
            sol.grad_norm,
            sol.status
        );
        let run = LevelRun {
            row: ConvergenceRow {
                level,
                nelems: mesh.n_elems(),
                dofs: model.dofmap.n_free(),
                time_s: time,
                iters: sol.iterations,
                energy: sol.energy,
            },
            converged: sol.converged(),
            grad_norm: sol.grad_norm,
            grad_tol,
            history: sol.history,
            solution,
        };
        if cfg.vtk {
            if let Some(dir) = &cfg.out_dir {
                ensure_dir(dir)?;
                let q = vtk::sampled_scalar_field(&mesh, &model.dofmap, &run.solution, "u")?;
                q.write_file(&dir.join(format!("plaplace_p{}_level{}.vtk", cfg.p, level)), "p-Laplace solution")?;
            }
        }
        Ok(run)
    })?;
    if let Some(dir) = &cfg.out_dir {
        ensure_dir(dir)?;
        let rows: Vec<ConvergenceRow> = runs.iter().map(|r| r.row.clone()).collect();
        fs::write(dir.join(format!("plaplace_p{}.csv", cfg.p)), rows_to_csv(&rows))?;
    }
    Ok(runs)
}

/// Area-averaged displacement `(1/|Omega|) int (v - x)`.
pub fn mean_displacement(model: &NeoHookeModel, v_full: &[f64]) -> [f64; 2] {
    let ones = assemble_load(&model.geometry, &model.dofmap, [1.0, 1.0]);
    let id = model.identity();
    let n = model.dofmap.n_scalar;
    let area: f64 = model.geometry.wdetj.iter().sum();
    let mut mean = [0.0; 2];
    for (c, m) in mean.iter_mut().enumerate() {
        *m = (c * n..(c + 1) * n).map(|i| ones[i] * (v_full[i] - id[i])).sum::<f64>() / area;
    }
    mean
}

pub fn hyper_model(mesh: &QuadMesh, cfg: &BenchConfig) -> Result<NeoHookeModel> {
    NeoHookeModel::new(
        mesh,
        cfg.p,
        NeoHookeParams::from_young_poisson(cfg.young, cfg.poisson),
        cfg.f_vec,
        &DirichletSpec::identity(&["left", "bottom"]),
    )
}

/// Default gradient tolerance `1e-6 max(1, |J0|) / diam`.
pub fn default_grad_tol(initial_energy: f64, diameter: f64) -> f64 {
    1e-6 * initial_energy.abs().max(1.0) / diameter
}

/// Diameter of both benchmark domains (each fits `[0,2]^2` corner to corner).
pub const DOMAIN_DIAMETER: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Perforated-square Neo-Hookean run from the identity deformation, zero
/// displacement on the left and bottom sides.
pub fn run_hyperelasticity(cfg: &BenchConfig) -> Result<Vec<HyperRun>> {
    cfg.validate()?;
    let runs = run_levels(cfg, |level| {
        let mesh = make_perforated_square(level)?;
        let model = hyper_model(&mesh, cfg)?;
        let x0 = model.identity();
        let initial_energy = energy(&model, &x0)?;
        let grad_tol = cfg.grad_tol.unwrap_or_else(|| default_grad_tol(initial_energy, DOMAIN_DIAMETER));
        let opts = solver_options(cfg, grad_tol, 0.1 * DOMAIN_DIAMETER);
        let (sol, time) = solve_level(&model, &x0, &opts, !cfg.parallel)?;
        let solution = model.dofmap.expand(&sol.x)?;
        let min_det = model.min_det(&solution);
        let mean = mean_displacement(&model, &solution);
        info!(
            "hyper p={} level={} dofs={} iters={} J={:.10e} |g|={:.3e} tol={:.3e} min det F={:.4} {:?}",
            cfg.p,
            level,
            model.dofmap.n_free(),
            sol.iterations,
            sol.energy,
            sol.grad_norm,
            grad_tol,
            min_det,
            sol.status
        );
        if cfg.vtk {
            if let Some(dir) = &cfg.out_dir {
                ensure_dir(dir)?;
                let mut q = vtk::deformed_mesh(&mesh, &model.dofmap, &solution);
                q.cell_scalars.push(("W".into(), model.mean_density(&solution)?));
                q.write_file(&dir.join(format!("hyper_p{}_level{}.vtk", cfg.p, level)), "Neo-Hookean deformation")?;
            }
        }
        Ok(HyperRun {
            run: LevelRun {
                row: ConvergenceRow {
                    level,
                    nelems: mesh.n_elems(),
                    dofs: model.dofmap.n_free(),
                    time_s: time,
                    iters: sol.iterations,
                    energy: sol.energy,
                },
                converged: sol.converged(),
                grad_norm: sol.grad_norm,
                grad_tol,
                history: sol.history,
                solution,
            },
            initial_energy,
            min_det,
            mean_displacement: mean,
        })
    })?;
    if let Some(dir) = &cfg.out_dir {
        ensure_dir(dir)?;
        let rows: Vec<ConvergenceRow> = runs.iter().map(|r| r.run.row.clone()).collect();
        fs::write(dir.join(format!("hyper_p{}.csv", cfg.p)), rows_to_csv(&rows))?;
    }
    Ok(runs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub label: String,
    pub p: usize,
    pub row: ConvergenceRow,
    /// `J(u) - J_ref`.
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub j_ref: f64,
    pub rows: Vec<CompareRow>,
    pub all_converged: bool,
}

/// Reference energy: smallest achieved energy minus `1e-4`.
pub fn reference_energy(energies: &[f64]) -> f64 {
    energies.iter().copied().fold(f64::INFINITY, f64::min) - 1e-4
}

/// Run every configuration and report errors against the common reference.
pub fn compare_elements(configs: &[BenchConfig]) -> Result<Comparison> {
    if configs.len() < 2 {
        return Err(Error::Config("need at least two element configurations to compare".into()));
    }
    let mut raw = Vec::new();
    let mut all_converged = true;
    for cfg in configs {
        let quiet = BenchConfig {
            out_dir: None,
            vtk: false,
            ..cfg.clone()
        };
        let rows: Vec<(ConvergenceRow, bool)> = match cfg.problem {
            ProblemKind::PLaplace => run_plaplace(&quiet)?.into_iter().map(|r| (r.row, r.converged)).collect(),
            ProblemKind::Hyperelasticity => run_hyperelasticity(&quiet)?
                .into_iter()
                .map(|r| (r.run.row, r.run.converged))
                .collect(),
        };
        for (row, ok) in rows {
            all_converged &= ok;
            raw.push((cfg.label(), cfg.p, row));
        }
    }
    let energies: Vec<f64> = raw.iter().map(|(_, _, r)| r.energy).collect();
    let j_ref = reference_energy(&energies);
    let rows = raw
        .into_iter()
        .map(|(label, p, row)| CompareRow {
            label,
            p,
            error: row.energy - j_ref,
            row,
        })
        .collect();
    Ok(Comparison {
        j_ref,
        rows,
        all_converged,
    })
}

pub fn comparison_to_csv(cmp: &Comparison) -> String {
    write_csv(
        COMPARE_HEADER,
        cmp.rows.iter().map(|c| {
            let r = &c.row;
            vec![
                c.label.clone(),
                c.p.to_string(),
                r.level.to_string(),
                r.nelems.to_string(),
                r.dofs.to_string(),
                fmt_sig10(r.time_s),
                r.iters.to_string(),
                fmt_sig10(r.energy),
                fmt_sig10(c.error),
            ]
        }),
    )
}

/// Expand a comparison spec: keys as in [`BenchConfig::set`], except that
/// `p` may list several degrees (`p = 1,2`), one configuration each.
pub fn configs_from_spec(text: &str) -> Result<(Vec<BenchConfig>, Option<PathBuf>)> {
    let pairs = parse_kv(text)?;
    let problem = pairs.iter().find(|(k, _)| k == "problem").map(|(_, v)| v.as_str());
    let mut base = match problem {
        Some("hyper") | Some("hyperelasticity") => BenchConfig::hyperelasticity(),
        _ => BenchConfig::plaplace(),
    };
    let mut degrees = vec![base.p];
    for (k, v) in &pairs {
        if k == "p" {
            degrees = v
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| Error::Config(format!("invalid degree list '{v}'"))))
                .collect::<Result<_>>()?;
        } else {
            base.set(k, v)?;
        }
    }
    let out = base.out_dir.clone();
    let configs: Vec<BenchConfig> = degrees
        .into_iter()
        .map(|p| BenchConfig { p, label: None, ..base.clone() })
        .collect();
    for c in &configs {
        c.validate()?;
    }
    Ok((configs, out))
}
