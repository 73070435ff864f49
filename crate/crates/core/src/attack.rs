//! Data-driven stealthy attack design: input sequences that perturb the
//! state while leaving the monitored output untouched, plus the side-by-side
//! nominal/attacked simulation and a threshold detector.

use crate::data_driven::rstar_dd;
use crate::error::{Error, Result};
use crate::linalg::{self, hcat, kron, Mat, Tolerances, Vector};
use crate::lti::{ExperimentData, LtiSystem};
use crate::subspace::Subspace;

/// An admissible stealthy input sequence and the subspace it excites.
#[derive(Debug, Clone)]
pub struct AttackPlan {
    /// Stacked attack input of length mT.
    pub input: Vector,
    /// The R* subspace the attack deviation evolves in.
    pub subspace: Subspace,
    /// Step at which the attack window starts.
    pub onset_step: usize,
    /// Attack window length T.
    pub horizon: usize,
    /// Input dimension m.
    pub input_dim: usize,
}

impl AttackPlan {
    /// Attack input at absolute step `t`, zero outside the window.
    pub fn input_at(&self, t: usize) -> Vector {
        if t >= self.onset_step && t < self.onset_step + self.horizon {
            let k = t - self.onset_step;
            self.input.rows(k * self.input_dim, self.input_dim).into_owned()
        } else {
            Vector::zeros(self.input_dim)
        }
    }
}

/// Nominal and attacked runs recorded side by side.
#[derive(Debug, Clone)]
pub struct AttackOutcome {
    pub nominal_states: Vec<Vector>,
    pub attacked_states: Vec<Vector>,
    pub nominal_outputs: Vec<Vector>,
    pub attacked_outputs: Vec<Vector>,
    /// Per-step norm of the output difference.
    pub output_deviation: Vec<f64>,
    /// Per-step norm of the state difference.
    pub state_deviation: Vec<f64>,
    pub onset_step: usize,
    pub horizon: usize,
}

/// Designs a stealthy attack from data: computes R* = V* ∩ S*, solves
/// `[X K_0  I ⊗ R]·[P; Q] = 0`, and picks the largest admissible generator
/// of Im(U K_0 P) scaled to the requested energy.
pub fn design_attack(
    data: &ExperimentData,
    energy: f64,
    onset_step: usize,
    tol: &Tolerances,
) -> Result<AttackPlan> {
    if energy <= 0.0 {
        return Err(Error::InvalidConfig("attack energy must be positive".into()));
    }
    let rstar = rstar_dd(data, tol)?;
    if rstar.is_trivial() {
        return Err(Error::NoStealthyAttack("R* is trivial".into()));
    }
    let xk0 = &data.x * data.k_0.basis();
    let i_kron_r = kron(&Mat::identity(data.horizon, data.horizon), rstar.basis());
    let stacked = hcat(&xk0, &i_kron_r);
    let kern = linalg::kernel_mat(&stacked, tol)?;
    if kern.ncols() == 0 {
        return Err(Error::NoStealthyAttack("admissibility kernel is empty".into()));
    }
    let p_block = kern.rows(0, data.k_0.dim()).into_owned();
    let generators = &data.u * data.k_0.basis() * p_block;
    // Pick the largest-norm nonzero generator; a zero column means the
    // kernel element produces no input action.
    let mut best: Option<(f64, usize)> = None;
    for j in 0..generators.ncols() {
        let norm = generators.column(j).norm();
        if norm > 1e-9 && best.map(|(b, _)| norm > b).unwrap_or(true) {
            best = Some((norm, j));
        }
    }
    let (norm, j) = best.ok_or_else(|| {
        Error::NoStealthyAttack("all admissible generators are zero".into())
    })?;
    let input = generators.column(j).into_owned() * (energy / norm);
    Ok(AttackPlan {
        input,
        subspace: rstar,
        onset_step,
        horizon: data.horizon,
        input_dim: data.m,
    })
}

/// Runs the nominal and attacked trajectories side by side with a constant
/// nominal input; the attack adds the plan's unstacked input over
/// `[onset, onset + T)`.
pub fn simulate_attack(
    sys: &LtiSystem,
    plan: &AttackPlan,
    nominal_u: &Vector,
    x0: &Vector,
    total_steps: usize,
) -> Result<AttackOutcome> {
    if nominal_u.len() != sys.input_dim() || plan.input_dim != sys.input_dim() {
        return Err(Error::DimensionMismatch(
            "input dimensions must match the system".into(),
        ));
    }
    if plan.onset_step + plan.horizon > total_steps {
        return Err(Error::InvalidConfig(format!(
            "attack window [{}, {}) exceeds the run length {}",
            plan.onset_step,
            plan.onset_step + plan.horizon,
            total_steps
        )));
    }
    let nominal_inputs: Vec<Vector> = (0..total_steps).map(|_| nominal_u.clone()).collect();
    let attacked_inputs: Vec<Vector> = (0..total_steps)
        .map(|t| nominal_u + plan.input_at(t))
        .collect();
    let nominal = sys.simulate(x0, &nominal_inputs)?;
    let attacked = sys.simulate(x0, &attacked_inputs)?;
    let nominal_outputs: Vec<Vector> = nominal.states().iter().map(|x| sys.output(x)).collect();
    let attacked_outputs: Vec<Vector> = attacked.states().iter().map(|x| sys.output(x)).collect();
    let output_deviation = nominal_outputs
        .iter()
        .zip(&attacked_outputs)
        .map(|(a, b)| (a - b).norm())
        .collect();
    let state_deviation = nominal
        .states()
        .iter()
        .zip(attacked.states())
        .map(|(a, b)| (a - b).norm())
        .collect();
    Ok(AttackOutcome {
        nominal_states: nominal.states().to_vec(),
        attacked_states: attacked.states().to_vec(),
        nominal_outputs,
        attacked_outputs,
        output_deviation,
        state_deviation,
        onset_step: plan.onset_step,
        horizon: plan.horizon,
    })
}

/// Threshold monitor: the attack is detected iff any per-step output
/// deviation exceeds the threshold.
pub fn detect(outcome: &AttackOutcome, threshold: f64) -> bool {
    outcome.output_deviation.iter().any(|&d| d > threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{collect, ExperimentConfig, LtiSystem};
    use crate::systems;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn consensus_data(seed: u64) -> ExperimentData {
        let sys = systems::consensus_example();
        collect(&sys, &ExperimentConfig::default_for(&sys, seed), &tol()).unwrap()
    }

    #[test]
    fn no_attack_when_rstar_trivial() {
        let sys = LtiSystem::new(
            Mat::from_row_slice(2, 2, &[0.3, 0.1, 0.0, 0.2]),
            Mat::identity(2, 2),
            Mat::identity(2, 2),
        )
        .unwrap();
        let data = collect(&sys, &ExperimentConfig::default_for(&sys, 1), &tol()).unwrap();
        assert!(matches!(
            design_attack(&data, 1.0, 10, &tol()),
            Err(Error::NoStealthyAttack(_))
        ));
    }

    #[test]
    fn zero_attack_produces_zero_deviation() {
        let sys = systems::consensus_example();
        let plan = AttackPlan {
            input: Vector::zeros(3 * 11),
            subspace: Subspace::trivial(11),
            onset_step: 5,
            horizon: 11,
            input_dim: 3,
        };
        let u = Vector::from_column_slice(&[-2.0, 2.0, 4.0]);
        let outcome = simulate_attack(&sys, &plan, &u, &Vector::zeros(11), 20).unwrap();
        assert!(outcome.output_deviation.iter().all(|&d| d == 0.0));
        assert!(outcome.state_deviation.iter().all(|&d| d == 0.0));
        assert!(!detect(&outcome, 1e-12));
    }

    #[test]
    fn consensus_attack_is_stealthy_but_perturbs_state() {
        let sys = systems::consensus_example();
        let data = consensus_data(24);
        let plan = design_attack(&data, 10.0, 24, &tol()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let x0 = Vector::from_fn(11, |_, _| rng.sample::<f64, _>(StandardNormal));
        let u = Vector::from_column_slice(&[-2.0, 2.0, 4.0]);
        let total = plan.onset_step + plan.horizon;
        let outcome = simulate_attack(&sys, &plan, &u, &x0, total).unwrap();
        assert!(!detect(&outcome, 1e-9), "attack was detectable");
        let max_state_dev = outcome
            .state_deviation
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        assert!(max_state_dev > 0.01, "state deviation {max_state_dev} too small");
    }

    #[test]
    fn deviation_is_superposition_of_attack_response() {
        let sys = systems::consensus_example();
        let data = consensus_data(7);
        let plan = design_attack(&data, 3.0, 4, &tol()).unwrap();
        let u = Vector::from_column_slice(&[-2.0, 2.0, 4.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x0 = Vector::from_fn(11, |_, _| rng.sample::<f64, _>(StandardNormal));
        let total = plan.onset_step + plan.horizon;
        let outcome = simulate_attack(&sys, &plan, &u, &x0, total).unwrap();
        // Forced response to the attack alone from the origin.
        let attack_inputs: Vec<Vector> = (0..total).map(|t| plan.input_at(t)).collect();
        let forced = sys.simulate(&Vector::zeros(11), &attack_inputs).unwrap();
        for (t, xf) in forced.states().iter().enumerate() {
            let dev = &outcome.attacked_states[t] - &outcome.nominal_states[t];
            assert!((dev - xf).norm() <= 1e-9, "superposition failed at step {t}");
        }
    }

    #[test]
    fn deviation_stays_in_rstar_pointwise() {
        let sys = systems::consensus_example();
        let data = consensus_data(11);
        let plan = design_attack(&data, 5.0, 0, &tol()).unwrap();
        let u = Vector::zeros(3);
        let outcome =
            simulate_attack(&sys, &plan, &u, &Vector::zeros(11), plan.horizon).unwrap();
        for t in 0..=plan.horizon {
            let dev = &outcome.attacked_states[t] - &outcome.nominal_states[t];
            assert!(
                plan.subspace.distance(&dev) <= 1e-6,
                "deviation left R* at step {t}"
            );
        }
    }

    #[test]
    fn every_generator_is_output_silent() {
        let sys = systems::consensus_example();
        let data = consensus_data(13);
        let rstar = rstar_dd(&data, &tol()).unwrap();
        let xk0 = &data.x * data.k_0.basis();
        let i_kron_r = kron(&Mat::identity(data.horizon, data.horizon), rstar.basis());
        let kern = linalg::kernel_mat(&hcat(&xk0, &i_kron_r), &tol()).unwrap();
        let p_block = kern.rows(0, data.k_0.dim()).into_owned();
        let generators = &data.u * data.k_0.basis() * p_block;
        for j in 0..generators.ncols() {
            let stacked = generators.column(j).into_owned();
            let inputs: Vec<Vector> = (0..data.horizon)
                .map(|t| stacked.rows(t * 3, 3).into_owned())
                .collect();
            let traj = sys.simulate(&Vector::zeros(11), &inputs).unwrap();
            let y = traj.stacked_outputs(&sys);
            assert!(y.norm() <= 1e-8, "generator {j} excites the output");
        }
    }

    #[test]
    fn random_input_of_equal_energy_is_detected() {
        let sys = systems::consensus_example();
        let data = consensus_data(17);
        let plan = design_attack(&data, 5.0, 2, &tol()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut random_input =
            Vector::from_fn(3 * 11, |_, _| rng.sample::<f64, _>(StandardNormal));
        random_input *= 5.0 / random_input.norm();
        let noisy_plan = AttackPlan {
            input: random_input,
            ..plan.clone()
        };
        let u = Vector::from_column_slice(&[-2.0, 2.0, 4.0]);
        let total = plan.onset_step + plan.horizon;
        let outcome = simulate_attack(&sys, &noisy_plan, &u, &Vector::zeros(11), total).unwrap();
        assert!(detect(&outcome, 1e-6));
    }

    #[test]
    fn window_must_fit_in_run() {
        let sys = systems::consensus_example();
        let plan = AttackPlan {
            input: Vector::zeros(33),
            subspace: Subspace::trivial(11),
            onset_step: 15,
            horizon: 11,
            input_dim: 3,
        };
        let u = Vector::zeros(3);
        assert!(simulate_attack(&sys, &plan, &u, &Vector::zeros(11), 20).is_err());
    }
}
