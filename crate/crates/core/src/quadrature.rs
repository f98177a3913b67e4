//! Gauss-Legendre rules on `[-1, 1]` and their tensor products on the
//! reference square.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Tensor-product quadrature rule on `[-1, 1]^2`.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn n_ip(&self) -> usize {
        self.points.len()
    }

    /// Tensor product of the `n`-point Gauss rule with itself.
    pub fn tensor(n: usize) -> Result<Self> {
        let (x, w) = gauss_1d(n)?;
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push([x[i], x[j]]);
                weights.push(w[i] * w[j]);
            }
        }
        Ok(QuadRule { points, weights })
    }
}

/// `n`-point Gauss-Legendre nodes (ascending) and weights.
///
/// Nodes are Newton-refined roots of `L_n`; the negative half is mirrored so
/// the rule is exactly symmetric.
pub fn gauss_1d(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 1 {
        return Err(Error::Domain("Gauss rule needs at least one point".into()));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        // z is the i-th largest root
        x[n - 1 - i] = z;
        x[i] = -z;
        w[n - 1 - i] = weight;
        w[i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * z * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (z * p1 - p0) / (z * z - 1.0);
    if n == 1 {
        (z, 1.0)
    } else {
        (p1, d)
    }
}

/// Rule used for elements of degree `p`: `p + 1` points per direction.
pub fn rule_for_degree(p: usize) -> Result<QuadRule> {
    if p < 1 {
        return Err(Error::Domain("polynomial degree must be >= 1".into()));
    }
    QuadRule::tensor(p + 1)
}
