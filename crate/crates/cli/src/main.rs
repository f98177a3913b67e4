//! `hpmin`: reproduce the p-Laplace and hyperelasticity benchmarks.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hpmin_core::bench::{
    comparison_to_csv, compare_elements, configs_from_spec, parse_gradient_mode, parse_kv, parse_levels,
    run_hyperelasticity, run_plaplace, BenchConfig, ConvergenceRow,
};
use hpmin_core::Error;
use log::warn;

#[derive(Parser)]
#[command(name = "hpmin", version, about = "hp-FEM energy minimization benchmarks")]
struct Cli {
    /// Log solver iterations (debug level).
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// L-shape p-Laplace convergence study.
    Plaplace(PlaplaceArgs),
    /// Perforated-square Neo-Hookean run.
    Hyper(HyperArgs),
    /// Compare element degrees against a common reference energy.
    Compare {
        /// key = value spec; `p` may list several degrees.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// key = value config file, applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<usize>,
    /// Mesh levels: `1..4`, `3` or `1,3`.
    #[arg(long, alias = "level")]
    levels: Option<String>,
    /// Gradient mode: explicit | fd.
    #[arg(long)]
    grad: Option<String>,
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Output directory for CSV (and VTK with --vtk).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    vtk: bool,
    /// Solve levels concurrently (timings are then not reported).
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct PlaplaceArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    f: Option<f64>,
}

#[derive(Args)]
struct HyperArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "E", allow_negative_numbers = true)]
    young: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    fx: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    fy: Option<f64>,
}

const EXIT_SOLVER: u8 = 2;
const EXIT_CONFIG: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::LengthMismatch { .. } => EXIT_CONFIG,
        Error::Io(_) => 1,
        _ => EXIT_SOLVER,
    }
}

fn apply_common(cfg: &mut BenchConfig, c: &Common) -> Result<(), Error> {
    if let Some(path) = &c.config {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for (k, v) in parse_kv(&text)? {
            cfg.set(&k, &v)?;
        }
    }
    if let Some(p) = c.p {
        cfg.p = p;
    }
    if let Some(l) = &c.levels {
        cfg.levels = parse_levels(l)?;
    }
    if let Some(g) = &c.grad {
        cfg.gradient_mode = parse_gradient_mode(g)?;
    }
    if c.grad_tol.is_some() {
        cfg.grad_tol = c.grad_tol;
    }
    if let Some(m) = c.max_iters {
        cfg.max_iters = m;
    }
    if c.out.is_some() {
        cfg.out_dir = c.out.clone();
    }
    cfg.vtk |= c.vtk;
    cfg.parallel |= c.parallel;
    cfg.validate()
}

fn print_table(rows: &[(ConvergenceRow, bool)]) -> bool {
    println!("{:>5} {:>7} {:>8} {:>10} {:>6} {:>18}", "level", "|T|", "dofs", "time[s]", "iters", "J(u)");
    let mut ok = true;
    for (r, conv) in rows {
        println!(
            "{:>5} {:>7} {:>8} {:>10.3} {:>6} {:>18.10e}{}",
            r.level,
            r.nelems,
            r.dofs,
            r.time_s,
            r.iters,
            r.energy,
            if *conv { "" } else { "  NOT CONVERGED" }
        );
        ok &= conv;
    }
    ok
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.cmd {
        Cmd::Plaplace(a) => {
            let mut cfg = BenchConfig::plaplace();
            apply_common(&mut cfg, &a.common)?;
            if let Some(v) = a.alpha {
                cfg.alpha = v;
            }
            if let Some(v) = a.f {
                cfg.f = v;
            }
            cfg.validate()?;
            let runs = run_plaplace(&cfg)?;
            Ok(print_table(&runs.iter().map(|r| (r.row.clone(), r.converged)).collect::<Vec<_>>()))
        }
        Cmd::Hyper(a) => {
            let mut cfg = BenchConfig::hyperelasticity();
            apply_common(&mut cfg, &a.common)?;
            if let Some(v) = a.young {
                cfg.young = v;
            }
            if let Some(v) = a.nu {
                cfg.poisson = v;
            }
            if let Some(v) = a.fx {
                cfg.f_vec[0] = v;
            }
            if let Some(v) = a.fy {
                cfg.f_vec[1] = v;
            }
            cfg.validate()?;
            let runs = run_hyperelasticity(&cfg)?;
            let ok = print_table(&runs.iter().map(|r| (r.run.row.clone(), r.run.converged)).collect::<Vec<_>>());
            for r in &runs {
                println!(
                    "level {}: |g| = {:.3e} (tol {:.3e}), min det F = {:.6}, mean displacement = ({:.6e}, {:.6e})",
                    r.run.row.level, r.run.grad_norm, r.run.grad_tol, r.min_det, r.mean_displacement[0], r.mean_displacement[1]
                );
            }
            Ok(ok)
        }
        Cmd::Compare { spec, out } => {
            let text = fs::read_to_string(&spec).map_err(|e| Error::Config(format!("{}: {e}", spec.display())))?;
            let (configs, spec_out) = configs_from_spec(&text)?;
            let cmp = compare_elements(&configs)?;
            let csv = comparison_to_csv(&cmp);
            if let Some(dir) = out.or(spec_out) {
                fs::create_dir_all(&dir)?;
                fs::write(dir.join("compare.csv"), &csv)?;
            }
            print!("{csv}");
            println!("# J_ref = {:.10e}", cmp.j_ref);
            Ok(cmp.all_converged)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            warn!("solver did not converge on every level");
            ExitCode::from(EXIT_SOLVER)
        }
        Err(e) => {
            eprintln!("hpmin: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
