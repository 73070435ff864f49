//! Randomized oracle-agreement suite: draws random systems, collects data,
//! and checks that the data-driven subspaces match the model-based ones.
//! Used by the `verify` CLI command and the acceptance tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data_driven::{rstar_dd, sstar_dd, vstar_dd};
use crate::error::Result;
use crate::linalg::Tolerances;
use crate::lti::{collect, ExperimentConfig, LtiSystem};
use crate::oracle::{rstar_model, sstar_model, vstar_model};
use crate::subspace::subspaces_equal;
use crate::systems::random_system;

#[derive(Debug)]
pub struct VerifyReport {
    pub trials: usize,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Draws the trial system for a given index: n ∈ {2..6}, m, p ∈ {1..3},
/// Gaussian entries with A rescaled to spectral radius ≤ 1.
pub fn trial_system(seed: u64, trial: usize) -> LtiSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
    let n = rng.gen_range(2..=6);
    let m = rng.gen_range(1..=3);
    let p = rng.gen_range(1..=3);
    random_system(n, m, p, &mut rng)
}

/// Runs `trials` independent oracle-agreement checks. Each trial compares
/// vstar_dd/sstar_dd/rstar_dd against the model recursions under the
/// subspace-equality predicate.
pub fn oracle_agreement_suite(trials: usize, seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    let mut failures = Vec::new();
    for trial in 0..trials {
        let sys = trial_system(seed, trial);
        let cfg = ExperimentConfig::default_for(&sys, seed.wrapping_add(trial as u64));
        let data = collect(&sys, &cfg, tol)?;
        let pairs = [
            ("V*", vstar_dd(&data, tol)?, vstar_model(&sys, tol)?),
            ("S*", sstar_dd(&data, tol)?, sstar_model(&sys, tol)?),
            ("R*", rstar_dd(&data, tol)?, rstar_model(&sys, tol)?),
        ];
        for (name, dd, model) in pairs {
            if !subspaces_equal(&dd, &model, tol)? {
                failures.push(format!(
                    "trial {trial}: {name} mismatch (data-driven dim {}, model dim {})",
                    dd.dim(),
                    model.dim()
                ));
            }
        }
    }
    Ok(VerifyReport { trials, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let report = oracle_agreement_suite(10, 12345, &Tolerances::default()).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures);
    }
}
