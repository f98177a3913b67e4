//! Trust-region Newton minimization with truncated (Steihaug-Toint) CG
//! subproblem solves on a finite-difference sparse Hessian.

use log::debug;

use crate::error::{Error, Result};
use crate::fd::{central_difference, greedy_coloring, hessian_fd, ColoredPattern};
use crate::sparse::{CsrMatrix, SparsityPattern};

/// How the solver obtains gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMode {
    #[default]
    Explicit,
    CentralDiff,
}

/// A smooth objective over free unknowns with a known Hessian structure.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    /// Objective value; `+inf` outside the admissible set.
    fn energy(&self, x: &[f64]) -> f64;

    /// Explicit gradient.
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Central-difference gradient with relative step `h`.
    fn gradient_central(&self, x: &[f64], h: f64) -> Result<Vec<f64>> {
        central_difference(|w| self.energy(w), x, h)
    }

    fn pattern(&self) -> &SparsityPattern;
}

#[derive(Debug, Clone)]
pub struct TrOptions {
    /// Stop when the max-norm of the gradient drops below this.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub initial_radius: f64,
    pub max_radius: f64,
    pub eta_accept: f64,
    pub shrink_threshold: f64,
    pub expand_threshold: f64,
    pub shrink_factor: f64,
    pub expand_factor: f64,
    pub cg_tol: f64,
    /// Defaults to twice the problem dimension.
    pub cg_max_iters: Option<usize>,
    /// Relative forward-difference step for the Hessian.
    pub hessian_step: f64,
    /// Relative central-difference step for [`GradientMode::CentralDiff`].
    pub central_step: f64,
    pub gradient_mode: GradientMode,
}

impl Default for TrOptions {
    fn default() -> Self {
        TrOptions {
            grad_tol: 1e-6,
            max_iters: 200,
            initial_radius: 1.0,
            max_radius: 1e10,
            eta_accept: 0.05,
            shrink_threshold: 0.25,
            expand_threshold: 0.75,
            shrink_factor: 0.25,
            expand_factor: 2.0,
            cg_tol: 1e-8,
            cg_max_iters: None,
            hessian_step: 1e-7,
            central_step: crate::fd::CENTRAL_STEP,
            gradient_mode: GradientMode::Explicit,
        }
    }
}

impl TrOptions {
    pub fn validate(&self) -> Result<()> {
        let ordered = 0.0 < self.eta_accept
            && self.eta_accept < self.shrink_threshold
            && self.shrink_threshold < self.expand_threshold
            && self.expand_threshold < 1.0;
        if !ordered {
            return Err(Error::Config(
                "need 0 < eta_accept < shrink_threshold < expand_threshold < 1".into(),
            ));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0 && self.expand_factor > 1.0) {
            return Err(Error::Config("need 0 < shrink_factor < 1 < expand_factor".into()));
        }
        if !(self.initial_radius > 0.0 && self.max_radius >= self.initial_radius) {
            return Err(Error::Config("need 0 < initial_radius <= max_radius".into()));
        }
        if !(self.grad_tol > 0.0 && self.cg_tol > 0.0 && self.hessian_step > 0.0 && self.central_step > 0.0) {
            return Err(Error::Config("tolerances and steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrRecord {
    pub energy: f64,
    pub grad_norm: f64,
    pub radius: f64,
    pub rho: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrStatus {
    Converged,
    MaxIterations,
    /// Trust radius collapsed below resolvable step sizes.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct TrSolution {
    pub x: Vec<f64>,
    pub energy: f64,
    /// Trial steps taken, accepted or not.
    pub iterations: usize,
    pub accepted: usize,
    pub grad_norm: f64,
    pub status: TrStatus,
    pub history: Vec<TrRecord>,
}

impl TrSolution {
    pub fn converged(&self) -> bool {
        self.status == TrStatus::Converged
    }
}

/// Result of a truncated CG solve of the trust-region subproblem.
#[derive(Debug, Clone)]
pub struct SteihaugStep {
    pub step: Vec<f64>,
    pub hit_boundary: bool,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Positive `tau` with `|z + tau d| = radius`.
fn to_boundary(z: &[f64], d: &[f64], radius: f64) -> f64 {
    let a = dot(d, d);
    let b = 2.0 * dot(z, d);
    let c = dot(z, z) - radius * radius;
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    // numerically stable positive root
    if b >= 0.0 {
        -2.0 * c / (b + disc)
    } else {
        (-b + disc) / (2.0 * a)
    }
}

/// Approximately minimize `g.s + s.H s / 2` subject to `|s| <= radius`.
pub fn steihaug_cg(h: &CsrMatrix, g: &[f64], radius: f64, cg_tol: f64, max_iters: usize) -> SteihaugStep {
    let n = g.len();
    let mut z = vec![0.0; n];
    let mut r = g.to_vec();
    let mut d: Vec<f64> = g.iter().map(|x| -x).collect();
    let g_norm = norm(g);
    if g_norm == 0.0 {
        return SteihaugStep {
            step: z,
            hit_boundary: false,
            iterations: 0,
        };
    }
    let mut rr = dot(&r, &r);
    let mut hd = vec![0.0; n];
    for it in 0..max_iters.max(1) {
        h.mul_vec_into(&d, &mut hd);
        let curv = dot(&d, &hd);
        if curv <= 0.0 {
            let tau = to_boundary(&z, &d, radius);
            for (zi, di) in z.iter_mut().zip(&d) {
                *zi += tau * di;
            }
            return SteihaugStep {
                step: z,
                hit_boundary: true,
                iterations: it + 1,
            };
        }
        let alpha = rr / curv;
        let next: Vec<f64> = z.iter().zip(&d).map(|(zi, di)| zi + alpha * di).collect();
        if norm(&next) >= radius {
            let tau = to_boundary(&z, &d, radius);
            for (zi, di) in z.iter_mut().zip(&d) {
                *zi += tau * di;
            }
            return SteihaugStep {
                step: z,
                hit_boundary: true,
                iterations: it + 1,
            };
        }
        z = next;
        for (ri, hdi) in r.iter_mut().zip(&hd) {
            *ri += alpha * hdi;
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= cg_tol * g_norm {
            return SteihaugStep {
                step: z,
                hit_boundary: false,
                iterations: it + 1,
            };
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (di, ri) in d.iter_mut().zip(&r) {
            *di = -ri + beta * *di;
        }
    }
    SteihaugStep {
        step: z,
        hit_boundary: false,
        iterations: max_iters,
    }
}

/// Predicted reduction `-(g.s + s.H s / 2)` of the quadratic model.
pub fn predicted_reduction(h: &CsrMatrix, g: &[f64], s: &[f64]) -> f64 {
    let hs = h.mul_vec(s);
    -(dot(g, s) + 0.5 * dot(s, &hs))
}

pub fn minimize(problem: &impl Objective, x0: &[f64], opts: &TrOptions) -> Result<TrSolution> {
    let colored = greedy_coloring(problem.pattern());
    minimize_colored(problem, x0, opts, &colored)
}

/// [`minimize`] with a precomputed coloring of the Hessian pattern.
pub fn minimize_colored(
    problem: &impl Objective,
    x0: &[f64],
    opts: &TrOptions,
    colored: &ColoredPattern,
) -> Result<TrSolution> {
    opts.validate()?;
    let n = problem.dim();
    if x0.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: x0.len() });
    }
    let grad = |x: &[f64]| -> Result<Vec<f64>> {
        match opts.gradient_mode {
            GradientMode::Explicit => problem.gradient(x),
            GradientMode::CentralDiff => problem.gradient_central(x, opts.central_step),
        }
    };
    let mut x = x0.to_vec();
    let mut f = problem.energy(&x);
    if !f.is_finite() {
        return Err(Error::NonFinite("energy at the initial point".into()));
    }
    let mut g = grad(&x)?;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("gradient at the initial point".into()));
    }
    let cg_max = opts.cg_max_iters.unwrap_or(2 * n.max(1));
    let mut radius = opts.initial_radius;
    let mut history = Vec::new();
    let mut hessian: Option<CsrMatrix> = None;
    let mut accepted = 0;
    let mut status = TrStatus::MaxIterations;

    for iter in 0..=opts.max_iters {
        let g_inf = norm_inf(&g);
        if g_inf < opts.grad_tol {
            status = TrStatus::Converged;
            break;
        }
        if iter == opts.max_iters {
            break;
        }
        if radius < 1e-14 * norm_inf(&x).max(1.0) {
            status = TrStatus::Stalled;
            break;
        }
        if hessian.is_none() {
            let step = opts.hessian_step * norm_inf(&x).max(1.0);
            hessian = Some(hessian_fd(grad, &x, colored, step)?);
        }
        let h = hessian.as_ref().expect("hessian built above");
        let sub = steihaug_cg(h, &g, radius, opts.cg_tol, cg_max);
        let pred = predicted_reduction(h, &g, &sub.step);
        let trial: Vec<f64> = x.iter().zip(&sub.step).map(|(a, b)| a + b).collect();
        let f_trial = problem.energy(&trial);
        let actual = f - f_trial;
        // below this both reductions are dominated by rounding in f
        let noise = 1e-14 * f.abs().max(1.0);
        let rho = if !f_trial.is_finite() || pred <= 0.0 {
            f64::NEG_INFINITY
        } else if pred < noise && actual.abs() < noise {
            // energy differences carry no information here; keep the model step
            1.0
        } else {
            actual / pred
        };

        let mut take = rho > opts.eta_accept;
        let mut g_trial = None;
        if take {
            match grad(&trial) {
                Ok(gt) if gt.iter().all(|v| v.is_finite()) => g_trial = Some(gt),
                Ok(_) => return Err(Error::NonFinite(format!("gradient at iteration {iter}"))),
                Err(Error::Barrier { .. }) => take = false,
                Err(e) => return Err(e),
            }
        }
        debug!(
            target: "hpmin::tr",
            "iter={iter} energy={f:.15e} grad_inf={g_inf:.6e} radius={radius:.6e} rho={rho:.6e} accepted={take} cg_iters={}",
            sub.iterations
        );
        history.push(TrRecord {
            energy: if take { f_trial } else { f },
            grad_norm: g_inf,
            radius,
            rho,
            accepted: take,
        });

        if rho < opts.shrink_threshold || !take {
            radius *= opts.shrink_factor;
        } else if rho > opts.expand_threshold && sub.hit_boundary {
            radius = (radius * opts.expand_factor).min(opts.max_radius);
        }
        if take {
            x = trial;
            f = f_trial;
            g = g_trial.expect("gradient evaluated for accepted step");
            hessian = None;
            accepted += 1;
        }
    }

    Ok(TrSolution {
        grad_norm: norm_inf(&g),
        x,
        energy: f,
        iterations: history.len(),
        accepted,
        status,
        history,
    })
}
