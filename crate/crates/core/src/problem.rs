//! Minimization problems over the free DOFs of a finite element model.

use crate::dofmap::sparsity_pattern;
use crate::error::Result;
use crate::fd::gradient_central;
use crate::models::{energy, gradient, LocalEnergy};
use crate::solver::Objective;
use crate::sparse::SparsityPattern;

/// Energy of a [`LocalEnergy`] model restricted to its free DOFs, with the
/// Dirichlet values held fixed.
pub struct EnergyProblem<'a, M: LocalEnergy> {
    pub model: &'a M,
    pattern: SparsityPattern,
}

impl<'a, M: LocalEnergy> EnergyProblem<'a, M> {
    pub fn new(model: &'a M) -> Self {
        let pattern = sparsity_pattern(model.dofmap());
        EnergyProblem { model, pattern }
    }

    /// Free part of a full coefficient vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.model.dofmap().restrict(full)
    }

    pub fn expand(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.model.dofmap().expand(x)
    }
}

impl<M: LocalEnergy> Objective for EnergyProblem<'_, M> {
    fn dim(&self) -> usize {
        self.model.dofmap().n_free()
    }

    fn energy(&self, x: &[f64]) -> f64 {
        match self.expand(x).and_then(|full| energy(self.model, &full)) {
            Ok(e) if !e.is_nan() => e,
            _ => f64::INFINITY,
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let full = self.expand(x)?;
        Ok(self.restrict(&gradient(self.model, &full)?))
    }

    fn gradient_central(&self, x: &[f64], h: f64) -> Result<Vec<f64>> {
        let full = self.expand(x)?;
        Ok(self.restrict(&gradient_central(self.model, &full, h)?))
    }

    fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }
}
