//! Subspaces of R^n represented by orthonormal bases, plus the lattice
//! operations (intersection, sum) and the principal-angle equality metric.
//!
//! The trivial subspace {0} is represented by an `n × 0` basis so that
//! dimension arithmetic stays uniform downstream.

use std::f64::consts::FRAC_PI_2;


use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Tolerances, Vector};

/// A subspace of R^n, stored as an ambient dimension and an orthonormal
/// basis matrix with `n` rows and `dim` columns.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Mat,
}

impl Subspace {
    /// The trivial subspace {0} of R^n.
    pub fn trivial(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Mat::zeros(ambient_dim, 0),
        }
    }

    /// The full space R^n.
    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Mat::identity(ambient_dim, ambient_dim),
        }
    }

    /// Wraps a matrix whose columns are already orthonormal.
    pub fn from_orthonormal_basis(basis: Mat) -> Result<Self> {
        linalg::ensure_finite(&basis)?;
        let r = basis.ncols();
        let gram = basis.transpose() * &basis;
        if (gram - Mat::identity(r, r)).norm() > 1e-8 {
            return Err(Error::InvalidConfig(
                "basis columns are not orthonormal".into(),
            ));
        }
        Ok(Self {
            ambient_dim: basis.nrows(),
            basis,
        })
    }

    /// Builds the span of arbitrary (possibly dependent) columns.
    pub fn span(columns: &Mat, tol: &Tolerances) -> Result<Self> {
        image_basis(columns, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> Mat {
        &self.basis * self.basis.transpose()
    }

    /// Orthogonal projector onto the complement.
    pub fn complement_projector(&self) -> Mat {
        Mat::identity(self.ambient_dim, self.ambient_dim) - self.projector()
    }

    /// Euclidean distance from a point to the subspace.
    pub fn distance(&self, x: &Vector) -> f64 {
        let residual = x - &self.basis * (self.basis.transpose() * x);
        residual.norm()
    }

    /// Whether the span of `other` is contained in this subspace, measured
    /// by the projection residual of each basis column.
    pub fn contains(&self, other: &Subspace, residual_abs: f64) -> bool {
        (0..other.dim()).all(|j| self.distance(&other.basis.column(j).into_owned()) <= residual_abs)
    }
}

/// Orthonormal basis of the right null space of `m`, as a subspace of
/// R^{cols(m)}.
pub fn kernel_basis(m: &Mat, tol: &Tolerances) -> Result<Subspace> {
    let basis = linalg::kernel_mat(m, tol)?;
    Ok(Subspace {
        ambient_dim: m.ncols(),
        basis,
    })
}

/// Orthonormal basis of the column space of `m`, as a subspace of
/// R^{rows(m)}.
pub fn image_basis(m: &Mat, tol: &Tolerances) -> Result<Subspace> {
    let basis = linalg::image_mat(m, tol)?;
    Ok(Subspace {
        ambient_dim: m.nrows(),
        basis,
    })
}

/// [`image_basis`] with an external scale floor for the rank cutoff; see
/// [`linalg::image_mat_floor`]. Use when `m` is a product that may be tiny
/// relative to the scale of its factors precisely because it represents the
/// zero map.
pub fn image_basis_floor(m: &Mat, tol: &Tolerances, floor: f64) -> Result<Subspace> {
    let basis = linalg::image_mat_floor(m, tol, floor)?;
    Ok(Subspace {
        ambient_dim: m.nrows(),
        basis,
    })
}

fn check_ambient(v1: &Subspace, v2: &Subspace) -> Result<()> {
    if v1.ambient_dim != v2.ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "subspaces live in R^{} and R^{}",
            v1.ambient_dim, v2.ambient_dim
        )));
    }
    Ok(())
}

/// Intersection V1 ∩ V2 via the kernel of `[B1 −B2]`: a vector is in the
/// intersection iff it is `B1 a = B2 b` for some coefficients `[a; b]`.
pub fn intersect(v1: &Subspace, v2: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    check_ambient(v1, v2)?;
    if v1.is_trivial() || v2.is_trivial() {
        return Ok(Subspace::trivial(v1.ambient_dim));
    }
    let stacked = linalg::hcat(v1.basis(), &(-v2.basis()));
    let kern = linalg::kernel_mat(&stacked, tol)?;
    let coeffs = kern.rows(0, v1.dim()).into_owned();
    image_basis(&(v1.basis() * coeffs), tol)
}

/// Sum V1 + V2 as the image of the concatenated bases.
pub fn subspace_sum(v1: &Subspace, v2: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    check_ambient(v1, v2)?;
    image_basis(&linalg::hcat(v1.basis(), v2.basis()), tol)
}

/// Largest principal angle between two subspaces.
///
/// Returns 0 when both are trivial and π/2 when exactly one is trivial.
/// When the dimensions differ, only min-dimensional angles exist; in that
/// case the result is π/2 unless one subspace is contained in the other
/// (all angles ≈ 0), so equality is decided by `dims match AND angle ≤ tol`.
pub fn principal_angle_max(v1: &Subspace, v2: &Subspace) -> Result<f64> {
    check_ambient(v1, v2)?;
    let (r1, r2) = (v1.dim(), v2.dim());
    if r1 == 0 && r2 == 0 {
        return Ok(0.0);
    }
    if r1 == 0 || r2 == 0 {
        return Ok(FRAC_PI_2);
    }
    // sin(θmax) = max ‖(I − Pᵢ)Bⱼ‖₂ over both orderings: the sine form stays
    // accurate for tiny angles where acos of a near-unit cosine loses half
    // the machine digits.
    let off = |a: &Subspace, b: &Subspace| -> f64 {
        let proj = a.basis() * (a.basis().transpose() * b.basis());
        let residual = b.basis() - proj;
        linalg::singular_values(&residual)
            .into_iter()
            .fold(0.0, f64::max)
    };
    let sine = off(v1, v2).max(off(v2, v1));
    let theta = sine.clamp(0.0, 1.0).asin();
    if r1 != r2 && theta > 1e-8 {
        Ok(FRAC_PI_2)
    } else {
        Ok(theta)
    }
}

/// Subspace equality predicate: equal dimension and max principal angle
/// within `tol.subspace_eq`.
pub fn subspaces_equal(v1: &Subspace, v2: &Subspace, tol: &Tolerances) -> Result<bool> {
    if v1.dim() != v2.dim() {
        return Ok(false);
    }
    Ok(principal_angle_max(v1, v2)? <= tol.subspace_eq)
}
