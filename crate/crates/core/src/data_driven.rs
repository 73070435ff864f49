//! Closed-form data-driven computation of V*, S*, R*, trajectory
//! reconstruction, subspace-confining feedback, and invariant zeros.
//! No operation here reads the system matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, complex_kernel_mat, hcat, pinv, rank_tol, sort_complex_lex, vcat, CMat, CVector,
    Mat, Tolerances, Vector,
};
use crate::lti::{require_persistently_exciting, ExperimentData, SingleTrajectory};
use crate::subspace::{image_basis_floor, intersect, Subspace};

/// Coefficients expressing a target trajectory as a combination of the
/// experimental free responses (alpha) and forced responses (beta).
#[derive(Debug, Clone)]
pub struct TrajectoryCoefficients {
    pub alpha: Vector,
    pub beta: Vector,
}

/// Result of the zero membership test for a candidate z.
#[derive(Debug, Clone)]
pub struct ZeroCandidate {
    pub z: Complex64,
    /// Dimension of the kernel of the stacked test matrix.
    pub kernel_dim: usize,
    /// A kernel element split into its (w, v) blocks, present only when a
    /// kernel vector with nonzero v exists.
    pub witness: Option<(CVector, CVector)>,
}

impl ZeroCandidate {
    /// z is declared an invariant zero iff the kernel is nontrivial and
    /// carries a witness with nonzero v; kernel vectors with v = 0 are
    /// spurious.
    pub fn is_zero(&self) -> bool {
        self.witness.is_some()
    }
}

fn check_horizon(data: &ExperimentData) -> Result<()> {
    if data.horizon < data.n {
        return Err(Error::HorizonTooShort {
            horizon: data.horizon,
            state_dim: data.n,
        });
    }
    Ok(())
}

/// Reconstructs the state and output trajectory generated by (x0, u_seq) as
/// a linear combination of the experimental data. Returns the coefficients
/// plus the stacked reconstructions X̄_T (nT) and Ȳ_T (pT).
pub fn reconstruct_trajectory(
    data: &ExperimentData,
    x0: &Vector,
    u_seq: &[Vector],
    tol: &Tolerances,
) -> Result<(TrajectoryCoefficients, Vector, Vector)> {
    require_persistently_exciting(data, tol)?;
    if x0.len() != data.n {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {}, expected {}",
            x0.len(),
            data.n
        )));
    }
    if u_seq.len() != data.horizon || u_seq.iter().any(|u| u.len() != data.m) {
        return Err(Error::DimensionMismatch(
            "input sequence must have T vectors of length m".into(),
        ));
    }
    let mut u_bar = Vector::zeros(data.m * data.horizon);
    for (t, u) in u_seq.iter().enumerate() {
        u_bar.rows_mut(t * data.m, data.m).copy_from(u);
    }
    // X0·K_U and U·K_0 are full row rank under excitation, so the least
    // squares solutions reproduce the targets exactly.
    let x0ku = &data.x0 * data.k_u.basis();
    let uk0 = &data.u * data.k_0.basis();
    let alpha = pinv(&x0ku, tol)? * x0;
    let beta = pinv(&uk0, tol)? * &u_bar;
    let x_bar = &data.x * data.k_u.basis() * &alpha + &data.x * data.k_0.basis() * &beta;
    let y_bar = &data.y * data.k_u.basis() * &alpha + &data.y * data.k_0.basis() * &beta;
    Ok((TrajectoryCoefficients { alpha, beta }, x_bar, y_bar))
}

/// Data-driven V*: the image of `[X0·K_U  0]` applied to the kernel of
/// `[Y·K_U  Y·K_0]`.
pub fn vstar_dd(data: &ExperimentData, tol: &Tolerances) -> Result<Subspace> {
    check_horizon(data)?;
    require_persistently_exciting(data, tol)?;
    let yku = &data.y * data.k_u.basis();
    let yk0 = &data.y * data.k_0.basis();
    let kern = linalg::kernel_mat(&hcat(&yku, &yk0), tol)?;
    let alpha_block = kern.rows(0, data.k_u.dim()).into_owned();
    let x0ku = &data.x0 * data.k_u.basis();
    // The kernel columns are unit vectors, so the products are bounded by
    // the scale of X0·K_U; an all-tiny product means V* = {0}, which a
    // cutoff relative to the product itself would miss.
    let floor = linalg::singular_values(&x0ku)
        .into_iter()
        .fold(0.0, f64::max);
    image_basis_floor(&(x0ku * alpha_block), tol, floor)
}

/// Data-driven S*: the image of `H·X·K_0` applied to the kernel of `Y·K_0`,
/// where H extracts the final state x(T) from the stacked trajectory.
pub fn sstar_dd(data: &ExperimentData, tol: &Tolerances) -> Result<Subspace> {
    check_horizon(data)?;
    require_persistently_exciting(data, tol)?;
    let yk0 = &data.y * data.k_0.basis();
    let kern = linalg::kernel_mat(&yk0, tol)?;
    let xk0 = &data.x * data.k_0.basis();
    let terminal = xk0.rows((data.horizon - 1) * data.n, data.n).into_owned();
    // Floor the rank cutoff at the state-data scale so that an all-tiny
    // terminal map (e.g. nothing reachable silently) reads as S* = {0}.
    let floor = linalg::singular_values(&data.x)
        .into_iter()
        .fold(0.0, f64::max);
    image_basis_floor(&(terminal * kern), tol, floor)
}

/// Data-driven R* = V* ∩ S*.
pub fn rstar_dd(data: &ExperimentData, tol: &Tolerances) -> Result<Subspace> {
    intersect(&vstar_dd(data, tol)?, &sstar_dd(data, tol)?, tol)
}

/// The G = X_{0,T}† + Kγ factor shared by the feedback and zero
/// computations, with γ solving the data-space invariance equation for V.
fn invariance_factor(
    traj: &SingleTrajectory,
    v: &Subspace,
    tol: &Tolerances,
) -> Result<(Mat, f64)> {
    let n = traj.state_dim();
    let m = traj.input_dim();
    let x0t = traj.x0t();
    let x1t = traj.x1t();
    let u0t = traj.u0t();
    if v.ambient_dim() != n {
        return Err(Error::DimensionMismatch(
            "subspace ambient dimension must match the trajectory state dimension".into(),
        ));
    }
    let stacked = vcat(&u0t, &x0t);
    let rank = rank_tol(&stacked, tol)?;
    if rank != n + m {
        return Err(Error::TrajectoryNotInformative {
            rank,
            expected: n + m,
        });
    }
    let k = linalg::kernel_mat(&x0t, tol)?;
    let x0t_pinv = pinv(&x0t, tol)?;
    let proj_out = v.complement_projector();
    let lhs = &proj_out * &x1t * &k;
    let rhs = &proj_out * &x1t * &x0t_pinv * v.projector();
    let gamma = -(pinv(&lhs, tol)? * rhs);
    let g = &x0t_pinv + &k * gamma;
    let residual = (proj_out * &x1t * &g * v.basis()).norm();
    Ok((g, residual))
}

/// Data-driven feedback gain F = U_{0,T}(X_{0,T}† + Kγ) rendering V
/// invariant for the closed loop.
pub fn feedback_dd(traj: &SingleTrajectory, v: &Subspace, tol: &Tolerances) -> Result<Mat> {
    let (g, residual) = invariance_factor(traj, v, tol)?;
    if residual > tol.residual_abs {
        return Err(Error::ResidualExceedsTolerance {
            residual,
            tolerance: tol.residual_abs,
        });
    }
    Ok(traj.u0t() * g)
}

/// Data-space invariance residual ‖(I − VV†)X_{1,T}(X_{0,T}† + Kγ)V‖ for a
/// given trajectory and subspace.
pub fn feedback_residual(traj: &SingleTrajectory, v: &Subspace, tol: &Tolerances) -> Result<f64> {
    Ok(invariance_factor(traj, v, tol)?.1)
}

/// Membership test for a candidate invariant zero z ≠ 0: z is a zero iff
/// some v ≠ 0 makes the geometric trajectory `[zv; z²v; ⋯; z^T v]` both a
/// system trajectory (inside Im X) and confined to V at every step. Both
/// conditions are linear in v, so the test reduces to the kernel of
///
/// ```text
/// [ (I − XX†) S(z) ]            S(z) = [zI; z²I; ⋯; z^T I]
/// [ (I ⊗ (I − VVᵀ)) S(z) ]
/// ```
///
/// For non-degenerate systems the confined dynamics is unique, so a
/// geometric sequence surviving n or more steps forces v to be a
/// closed-loop eigenvector and z the matching invariant zero.
pub fn zero_membership_dd(
    data: &ExperimentData,
    v: &Subspace,
    z: Complex64,
    tol: &Tolerances,
) -> Result<ZeroCandidate> {
    check_horizon(data)?;
    if z.norm() == 0.0 {
        return Err(Error::InvalidConfig(
            "membership at z = 0 is not defined by a geometric trajectory; use the \
             trajectory-based enumeration instead"
                .into(),
        ));
    }
    let rstar = rstar_dd(data, tol)?;
    if !rstar.is_trivial() {
        return Err(Error::DegenerateSystem {
            rstar_dim: rstar.dim(),
        });
    }
    if v.is_trivial() {
        return Ok(ZeroCandidate {
            z,
            kernel_dim: 0,
            witness: None,
        });
    }
    let (n, t) = (data.n, data.horizon);
    let x_pinv = pinv(&data.x, tol)?;
    let px_perp = Mat::identity(n * t, n * t) - &data.x * x_pinv;
    let pv_perp = v.complement_projector();
    let mut mat = CMat::zeros(2 * n * t, n);
    // (I − XX†) is dense across step blocks, so assemble S(z) first.
    let mut s_z = CMat::zeros(n * t, n);
    let mut zp = Complex64::new(1.0, 0.0);
    for k in 0..t {
        zp *= z;
        for i in 0..n {
            s_z[(k * n + i, i)] = zp;
        }
    }
    let px_perp_c = CMat::from_fn(n * t, n * t, |i, j| Complex64::new(px_perp[(i, j)], 0.0));
    let top = &px_perp_c * &s_z;
    for i in 0..n * t {
        for j in 0..n {
            mat[(i, j)] = top[(i, j)];
        }
    }
    // (I ⊗ Pv⊥)S(z) is block diagonal: block k is z^{k+1}·Pv⊥.
    let mut zp = Complex64::new(1.0, 0.0);
    for k in 0..t {
        zp *= z;
        for i in 0..n {
            for j in 0..n {
                mat[(n * t + k * n + i, j)] = zp * pv_perp[(i, j)];
            }
        }
    }
    let kern = complex_kernel_mat(&mat, tol);
    let kernel_dim = kern.ncols();
    // Every kernel vector is a valid v; report the first together with the
    // confinement coefficients w = (I ⊗ Vᵀ)S(z)v.
    let witness = (kernel_dim > 0).then(|| {
        let v_block = kern.column(0).into_owned();
        let traj = &s_z * &v_block;
        let vt = CMat::from_fn(v.dim(), n, |i, j| Complex64::new(v.basis()[(j, i)], 0.0));
        let mut w = CVector::zeros(t * v.dim());
        for k in 0..t {
            let piece = &vt * traj.rows(k * n, n).into_owned();
            w.rows_mut(k * v.dim(), v.dim()).copy_from(&piece);
        }
        (w, v_block)
    });
    Ok(ZeroCandidate {
        z,
        kernel_dim,
        witness,
    })
}

/// Enumerates the invariant zeros from a single informative trajectory: the
/// closed-loop matrix X_{1,T}G is block-triangularized in the coordinates
/// T̂ = [V | V_⊥] and the spectrum of the top-left block is returned.
pub fn zeros_dd(
    traj: &SingleTrajectory,
    v: &Subspace,
    tol: &Tolerances,
) -> Result<Vec<Complex64>> {
    if v.is_trivial() {
        return Ok(Vec::new());
    }
    let n = traj.state_dim();
    let r = v.dim();
    let (g, residual) = invariance_factor(traj, v, tol)?;
    if residual > tol.residual_abs {
        return Err(Error::ResidualExceedsTolerance {
            residual,
            tolerance: tol.residual_abs,
        });
    }
    // Orthonormal complement makes T̂ orthogonal, so its inverse is the
    // transpose.
    let v_perp = linalg::kernel_mat(&v.basis().transpose(), tol)?;
    let t_hat = hcat(v.basis(), &v_perp);
    let closed = traj.x1t() * g;
    let transformed = t_hat.transpose() * closed * &t_hat;
    let lower_left = transformed.view((r, 0), (n - r, r)).norm();
    if lower_left > tol.residual_abs {
        return Err(Error::BlockTriangularizationFailed {
            residual: lower_left,
            tolerance: tol.residual_abs,
        });
    }
    let top_left = transformed.view((0, 0), (r, r)).into_owned();
    let mut zeros: Vec<Complex64> = top_left.complex_eigenvalues().iter().cloned().collect();
    sort_complex_lex(&mut zeros);
    Ok(zeros)
}

/// Kernel-column property behind the V* formula: every kernel column of
/// `[Y K_U  Y K_0]` reconstructs an identically zero output. Returns the
/// per-column output norms.
pub fn vstar_kernel_output_norms(data: &ExperimentData, tol: &Tolerances) -> Result<Vec<f64>> {
    let yku = &data.y * data.k_u.basis();
    let yk0 = &data.y * data.k_0.basis();
    let stacked = hcat(&yku, &yk0);
    let kern = linalg::kernel_mat(&stacked, tol)?;
    Ok((0..kern.ncols())
        .map(|j| (&stacked * kern.column(j)).norm())
        .collect())
}

/// Zero-input-state property behind the S* formula: trajectories
/// parametrized by β ∈ Ker(Y K_0) start at the origin; returns for each β
/// column the initial-state norm and the terminal state.
pub fn sstar_kernel_trajectories(
    data: &ExperimentData,
    tol: &Tolerances,
) -> Result<Vec<(f64, Vector)>> {
    let yk0 = &data.y * data.k_0.basis();
    let kern = linalg::kernel_mat(&yk0, tol)?;
    let xk0 = &data.x * data.k_0.basis();
    let x0k0 = &data.x0 * data.k_0.basis();
    let terminal_rows = xk0.rows((data.horizon - 1) * data.n, data.n).into_owned();
    Ok((0..kern.ncols())
        .map(|j| {
            let beta = kern.column(j).into_owned();
            let initial = (&x0k0 * &beta).norm();
            let terminal = &terminal_rows * &beta;
            (initial, terminal)
        })
        .collect())
}
