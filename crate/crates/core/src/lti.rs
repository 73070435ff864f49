//! Ground-truth LTI system representation, trajectory simulation, experiment
//! collection, and the persistency-of-excitation check.
//!
//! The data-driven operations never look at the system matrices; the model
//! here exists to generate data and to verify results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, hcat, rank_tol, vcat, Mat, Tolerances, Vector};
use crate::subspace::{kernel_basis, Subspace};

/// A discrete-time LTI system x(t+1) = A x(t) + B u(t), y(t) = C x(t).
#[derive(Debug, Clone)]
pub struct LtiSystem {
    a: Mat,
    b: Mat,
    c: Mat,
}

impl LtiSystem {
    pub fn new(a: Mat, b: Mat, c: Mat) -> Result<Self> {
        linalg::ensure_finite(&a)?;
        linalg::ensure_finite(&b)?;
        linalg::ensure_finite(&c)?;
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch("A must be square".into()));
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch("B must have n rows".into()));
        }
        if c.ncols() != n {
            return Err(Error::DimensionMismatch("C must have n columns".into()));
        }
        if n == 0 || b.ncols() == 0 || c.nrows() == 0 {
            return Err(Error::DimensionMismatch(
                "state, input, and output dimensions must be at least 1".into(),
            ));
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn b(&self) -> &Mat {
        &self.b
    }

    pub fn c(&self) -> &Mat {
        &self.c
    }

    /// State dimension n.
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension m.
    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    /// Output dimension p.
    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn output(&self, x: &Vector) -> Vector {
        &self.c * x
    }

    /// Runs the state recursion for `inputs.len()` steps.
    pub fn simulate(&self, x0: &Vector, inputs: &[Vector]) -> Result<SingleTrajectory> {
        if x0.len() != self.state_dim() {
            return Err(Error::DimensionMismatch(format!(
                "initial state has length {}, expected {}",
                x0.len(),
                self.state_dim()
            )));
        }
        for u in inputs {
            if u.len() != self.input_dim() {
                return Err(Error::DimensionMismatch(format!(
                    "input has length {}, expected {}",
                    u.len(),
                    self.input_dim()
                )));
            }
        }
        let mut states = Vec::with_capacity(inputs.len() + 1);
        states.push(x0.clone());
        for u in inputs {
            let next = &self.a * states.last().unwrap() + &self.b * u;
            states.push(next);
        }
        Ok(SingleTrajectory {
            states,
            inputs: inputs.to_vec(),
        })
    }

    /// Extended observability block `[A; A^2; ...; A^T]` for the stacked state
    /// trajectory, and its output counterpart `[C; CA; ...; CA^{T-1}]`.
    pub fn stacked_state_maps(&self, horizon: usize) -> (Mat, Mat) {
        let n = self.state_dim();
        let m = self.input_dim();
        let mut obs = Mat::zeros(n * horizon, n);
        let mut power = self.a.clone();
        for t in 0..horizon {
            obs.rows_mut(t * n, n).copy_from(&power);
            power = &self.a * power;
        }
        let mut forced = Mat::zeros(n * horizon, m * horizon);
        // Block Toeplitz: block (t, k) is A^{t-k} B for k <= t.
        let mut powers = vec![Mat::identity(n, n)];
        for _ in 1..horizon {
            powers.push(&self.a * powers.last().unwrap());
        }
        for t in 0..horizon {
            for k in 0..=t {
                let block = &powers[t - k] * &self.b;
                forced.view_mut((t * n, k * m), (n, m)).copy_from(&block);
            }
        }
        (obs, forced)
    }

    /// Output analogue of [`Self::stacked_state_maps`]: `Y_T = O x(0) + F U_T`
    /// with `Y_T` stacking y(0)..y(T−1).
    pub fn stacked_output_maps(&self, horizon: usize) -> (Mat, Mat) {
        let n = self.state_dim();
        let m = self.input_dim();
        let p = self.output_dim();
        let mut obs = Mat::zeros(p * horizon, n);
        let mut power = Mat::identity(n, n);
        for t in 0..horizon {
            obs.rows_mut(t * p, p).copy_from(&(&self.c * &power));
            power = &self.a * power;
        }
        let mut forced = Mat::zeros(p * horizon, m * horizon);
        let mut powers = vec![Mat::identity(n, n)];
        for _ in 1..horizon {
            powers.push(&self.a * powers.last().unwrap());
        }
        for t in 1..horizon {
            for k in 0..t {
                let block = &self.c * &powers[t - 1 - k] * &self.b;
                forced.view_mut((t * p, k * m), (p, m)).copy_from(&block);
            }
        }
        (obs, forced)
    }
}

/// One state/input record used by the feedback and zero computations.
#[derive(Debug, Clone)]
pub struct SingleTrajectory {
    states: Vec<Vector>,
    inputs: Vec<Vector>,
}

impl SingleTrajectory {
    pub fn new(states: Vec<Vector>, inputs: Vec<Vector>) -> Result<Self> {
        if states.len() != inputs.len() + 1 {
            return Err(Error::DimensionMismatch(
                "a trajectory needs exactly one more state than inputs".into(),
            ));
        }
        Ok(Self { states, inputs })
    }

    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }

    pub fn state_dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map(|u| u.len()).unwrap_or(0)
    }

    pub fn states(&self) -> &[Vector] {
        &self.states
    }

    pub fn inputs(&self) -> &[Vector] {
        &self.inputs
    }

    /// `[x(0) x(1) ... x(T−1)]`.
    pub fn x0t(&self) -> Mat {
        Mat::from_columns(&self.states[..self.horizon()])
    }

    /// `[x(1) x(2) ... x(T)]`.
    pub fn x1t(&self) -> Mat {
        Mat::from_columns(&self.states[1..])
    }

    /// `[u(0) u(1) ... u(T−1)]`.
    pub fn u0t(&self) -> Mat {
        Mat::from_columns(&self.inputs)
    }

    /// Stacked state trajectory `[x(1); x(2); ...; x(T)]`.
    pub fn stacked_states(&self) -> Vector {
        let n = self.state_dim();
        let t = self.horizon();
        let mut out = Vector::zeros(n * t);
        for (k, x) in self.states[1..].iter().enumerate() {
            out.rows_mut(k * n, n).copy_from(x);
        }
        out
    }

    /// Stacked input `[u(0); u(1); ...; u(T−1)]`.
    pub fn stacked_inputs(&self) -> Vector {
        let m = self.input_dim();
        let t = self.horizon();
        let mut out = Vector::zeros(m * t);
        for (k, u) in self.inputs.iter().enumerate() {
            out.rows_mut(k * m, m).copy_from(u);
        }
        out
    }

    /// Stacked output `[y(0); y(1); ...; y(T−1)]` under the given system.
    pub fn stacked_outputs(&self, sys: &LtiSystem) -> Vector {
        let p = sys.output_dim();
        let t = self.horizon();
        let mut out = Vector::zeros(p * t);
        for k in 0..t {
            out.rows_mut(k * p, p).copy_from(&sys.output(&self.states[k]));
        }
        out
    }
}

/// Configuration for a batch of open-loop experiments.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Horizon T of each experiment.
    pub horizon: usize,
    /// Number N of experiments.
    pub experiments: usize,
    /// PRNG seed; collection is bit-reproducible given the seed.
    pub seed: u64,
    pub input_scale: f64,
    pub state_scale: f64,
}

impl ExperimentConfig {
    /// Defaults for a given system: T = n and N = n + mT + 2n slack, which
    /// makes the excitation rank condition hold generically.
    pub fn default_for(sys: &LtiSystem, seed: u64) -> Self {
        let n = sys.state_dim();
        let t = n;
        Self {
            horizon: t,
            experiments: n + sys.input_dim() * t + 2 * n,
            seed,
            input_scale: 1.0,
            state_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.experiments == 0 {
            return Err(Error::InvalidConfig(
                "horizon and experiment count must be at least 1".into(),
            ));
        }
        if self.input_scale <= 0.0 || self.state_scale <= 0.0 {
            return Err(Error::InvalidConfig("scales must be positive".into()));
        }
        Ok(())
    }
}

/// The stacked experiment data matrices plus cached kernel bases.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    /// Horizon T.
    pub horizon: usize,
    /// Number of experiments N.
    pub experiments: usize,
    /// nT × N, column i stacks x(1)..x(T) of experiment i.
    pub x: Mat,
    /// n × N initial states.
    pub x0: Mat,
    /// pT × N, column i stacks y(0)..y(T−1).
    pub y: Mat,
    /// mT × N, column i stacks u(0)..u(T−1).
    pub u: Mat,
    /// Ker(U).
    pub k_u: Subspace,
    /// Ker(X0).
    pub k_0: Subspace,
}

impl ExperimentData {
    /// Assembles the record from raw matrices, recomputing the kernels.
    pub fn from_matrices(
        x: Mat,
        x0: Mat,
        y: Mat,
        u: Mat,
        horizon: usize,
        tol: &Tolerances,
    ) -> Result<Self> {
        let experiments = x.ncols();
        if x0.ncols() != experiments || y.ncols() != experiments || u.ncols() != experiments {
            return Err(Error::DimensionMismatch(
                "data matrices must share the experiment count".into(),
            ));
        }
        if horizon == 0
            || x.nrows() % horizon != 0
            || y.nrows() % horizon != 0
            || u.nrows() % horizon != 0
        {
            return Err(Error::DimensionMismatch(
                "stacked row counts must be multiples of the horizon".into(),
            ));
        }
        let n = x.nrows() / horizon;
        if x0.nrows() != n {
            return Err(Error::DimensionMismatch(
                "X0 row count must equal the state dimension".into(),
            ));
        }
        let k_u = kernel_basis(&u, tol)?;
        let k_0 = kernel_basis(&x0, tol)?;
        Ok(Self {
            n,
            m: u.nrows() / horizon,
            p: y.nrows() / horizon,
            horizon,
            experiments,
            x,
            x0,
            y,
            u,
            k_u,
            k_0,
        })
    }
}

/// Runs N open-loop experiments with i.i.d. Gaussian initial states and
/// inputs, assembling the four stacked data matrices. Deterministic given
/// the seed: experiment i draws from stream i of the seeded generator.
pub fn collect(sys: &LtiSystem, cfg: &ExperimentConfig, tol: &Tolerances) -> Result<ExperimentData> {
    cfg.validate()?;
    let (n, m, p, t, count) = (
        sys.state_dim(),
        sys.input_dim(),
        sys.output_dim(),
        cfg.horizon,
        cfg.experiments,
    );
    let mut x = Mat::zeros(n * t, count);
    let mut x0 = Mat::zeros(n, count);
    let mut y = Mat::zeros(p * t, count);
    let mut u = Mat::zeros(m * t, count);
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let xi0 = Vector::from_fn(n, |_, _| {
            cfg.state_scale * rng.sample::<f64, _>(StandardNormal)
        });
        let inputs: Vec<Vector> = (0..t)
            .map(|_| {
                Vector::from_fn(m, |_, _| {
                    cfg.input_scale * rng.sample::<f64, _>(StandardNormal)
                })
            })
            .collect();
        let traj = sys.simulate(&xi0, &inputs)?;
        x.column_mut(i).copy_from(&traj.stacked_states());
        x0.column_mut(i).copy_from(&xi0);
        y.column_mut(i).copy_from(&traj.stacked_outputs(sys));
        u.column_mut(i).copy_from(&traj.stacked_inputs());
    }
    ExperimentData::from_matrices(x, x0, y, u, t, tol)
}

/// Persistency-of-excitation check: rank([X0; U]) = n + mT, plus the two
/// rank-nullity consequences (X0·K_U and U·K_0 full row rank).
pub fn is_persistently_exciting(data: &ExperimentData, tol: &Tolerances) -> Result<bool> {
    let stacked = vcat(&data.x0, &data.u);
    let expected = data.n + data.m * data.horizon;
    if rank_tol(&stacked, tol)? != expected {
        return Ok(false);
    }
    let x0ku = &data.x0 * data.k_u.basis();
    if rank_tol(&x0ku, tol)? != data.n {
        return Ok(false);
    }
    let uk0 = &data.u * data.k_0.basis();
    if rank_tol(&uk0, tol)? != data.m * data.horizon {
        return Ok(false);
    }
    Ok(true)
}

/// Fails fast with a structured error when excitation does not hold.
pub fn require_persistently_exciting(data: &ExperimentData, tol: &Tolerances) -> Result<()> {
    if is_persistently_exciting(data, tol)? {
        Ok(())
    } else {
        let stacked = vcat(&data.x0, &data.u);
        Err(Error::NotPersistentlyExciting {
            rank: rank_tol(&stacked, tol)?,
            expected: data.n + data.m * data.horizon,
        })
    }
}

/// Duplicates one experiment N times; used to exercise the negative branch
/// of the excitation check.
pub fn degenerate_collection(
    sys: &LtiSystem,
    horizon: usize,
    copies: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ExperimentData> {
    let single = collect(
        sys,
        &ExperimentConfig {
            horizon,
            experiments: 1,
            seed,
            input_scale: 1.0,
            state_scale: 1.0,
        },
        tol,
    )?;
    let rep = |m: &Mat| -> Mat {
        let mut out = m.clone();
        for _ in 1..copies {
            out = hcat(&out, m);
        }
        out
    };
    ExperimentData::from_matrices(
        rep(&single.x),
        rep(&single.x0),
        rep(&single.y),
        rep(&single.u),
        horizon,
        tol,
    )
}
