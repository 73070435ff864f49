//! Model-based ground truth: the classical recursions for V*, S*, R*, a
//! model-based friend, and model-based invariant zeros. Everything here
//! requires the system matrices and serves to verify the data-driven path.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, hcat, pinv, sort_complex_lex, Mat, Tolerances};
use crate::lti::LtiSystem;
use crate::subspace::{
    image_basis, image_basis_floor, intersect, kernel_basis, subspace_sum, Subspace,
};

/// Set preimage A⁻¹(W) = {x : Ax ∈ W}, computed as the kernel of
/// `[A −Basis(W)]` restricted to the x-block. Avoids inverting a possibly
/// singular A.
pub fn preimage(a: &Mat, w: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    let n = a.ncols();
    if w.is_trivial() {
        return kernel_basis(a, tol);
    }
    let stacked = hcat(a, &(-w.basis()));
    let kern = linalg::kernel_mat(&stacked, tol)?;
    let x_block = kern.rows(0, n).into_owned();
    image_basis(&x_block, tol)
}

/// Image of a subspace under a linear map. The rank cutoff is floored at
/// the scale of the map so that A·V ≈ 0 reads as the trivial subspace.
fn map_subspace(a: &Mat, v: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    let floor = linalg::singular_values(a).into_iter().fold(0.0, f64::max);
    image_basis_floor(&(a * v.basis()), tol, floor)
}

/// Largest (A, Im B)-controlled invariant contained in Ker(C), via the
/// recursion V_0 = Ker(C), V_i = A⁻¹(V_{i−1} + Im B) ∩ Ker(C). Dimensions
/// are non-increasing and fix in at most n steps.
pub fn vstar_model(sys: &LtiSystem, tol: &Tolerances) -> Result<Subspace> {
    let ker_c = kernel_basis(sys.c(), tol)?;
    let im_b = image_basis(sys.b(), tol)?;
    let mut v = ker_c.clone();
    for _ in 0..sys.state_dim() {
        let target = subspace_sum(&v, &im_b, tol)?;
        let next = intersect(&preimage(sys.a(), &target, tol)?, &ker_c, tol)?;
        debug_assert!(next.dim() <= v.dim());
        if next.dim() == v.dim() {
            return Ok(next);
        }
        v = next;
    }
    Ok(v)
}

/// Smallest (A, Ker C)-conditioned invariant containing Im(B), via the
/// recursion S_1 = Im(B), S_i = A(S_{i−1} ∩ Ker C) + Im(B).
pub fn sstar_model(sys: &LtiSystem, tol: &Tolerances) -> Result<Subspace> {
    let ker_c = kernel_basis(sys.c(), tol)?;
    let im_b = image_basis(sys.b(), tol)?;
    let mut s = im_b.clone();
    for _ in 0..sys.state_dim() {
        let mapped = map_subspace(sys.a(), &intersect(&s, &ker_c, tol)?, tol)?;
        let next = subspace_sum(&mapped, &im_b, tol)?;
        debug_assert!(next.dim() >= s.dim());
        if next.dim() == s.dim() {
            return Ok(next);
        }
        s = next;
    }
    Ok(s)
}

/// R* = V* ∩ S*, the states reachable from the origin along
/// output-invisible trajectories.
pub fn rstar_model(sys: &LtiSystem, tol: &Tolerances) -> Result<Subspace> {
    intersect(&vstar_model(sys, tol)?, &sstar_model(sys, tol)?, tol)
}

/// A friend of V: an m×n gain F with (A+BF)V ⊆ V, solved column-wise by
/// least squares on `[B −Basis(V)]` and extended with zeros off V.
pub fn friend_model(sys: &LtiSystem, v: &Subspace, tol: &Tolerances) -> Result<Mat> {
    let (n, m) = (sys.state_dim(), sys.input_dim());
    if v.ambient_dim() != n {
        return Err(Error::DimensionMismatch(
            "subspace ambient dimension must match the state dimension".into(),
        ));
    }
    if v.is_trivial() {
        return Ok(Mat::zeros(m, n));
    }
    // Solve [B −V]·[Fv; W] = −AV so that (A + BF)V = VW ∈ V.
    let av = sys.a() * v.basis();
    let stacked = hcat(sys.b(), &(-v.basis()));
    let sol = pinv(&stacked, tol)? * (-&av); // (m + r) × r
    let f_on_v = sol.rows(0, m).into_owned();
    let f = &f_on_v * v.basis().transpose();
    let closed = sys.a() + sys.b() * &f;
    let residual = (v.complement_projector() * closed * v.basis()).norm();
    if residual > tol.residual_abs {
        return Err(Error::NotControlledInvariant {
            residual,
            tolerance: tol.residual_abs,
        });
    }
    Ok(f)
}

/// Invariant zeros of a non-degenerate system as the eigenvalues of
/// (A + BF) restricted to V*, in the coordinates of Basis(V*). Returns the
/// sorted list; errors when R* is nontrivial.
pub fn invariant_zeros_model(sys: &LtiSystem, tol: &Tolerances) -> Result<Vec<Complex64>> {
    let rstar = rstar_model(sys, tol)?;
    if !rstar.is_trivial() {
        return Err(Error::DegenerateSystem {
            rstar_dim: rstar.dim(),
        });
    }
    let vstar = vstar_model(sys, tol)?;
    if vstar.is_trivial() {
        return Ok(Vec::new());
    }
    let f = friend_model(sys, &vstar, tol)?;
    let closed = sys.a() + sys.b() * f;
    // Basis(V*) is orthonormal and (A+BF)V* ⊆ V*, so the restriction in
    // V*-coordinates is Vᵀ(A+BF)V.
    let restricted = vstar.basis().transpose() * closed * vstar.basis();
    let mut zeros: Vec<Complex64> = restricted.complex_eigenvalues().iter().cloned().collect();
    sort_complex_lex(&mut zeros);
    Ok(zeros)
}
