//! Tolerance-aware dense linear algebra primitives.
//!
//! Every downstream computation reduces to the operations here: numerical
//! rank, kernel and image bases, pseudoinverses, and Kronecker products.
//! Rank decisions use a relative singular-value cutoff so that pseudo-kernels
//! introduced by roundoff are suppressed while genuine rank deficiencies of
//! ideal-trajectory products are detected sharply.
//!
//! The SVD backend is a one-sided Jacobi iteration. nalgebra's bidiagonal
//! SVD returns inaccurate factors on rank-deficient inputs with clustered
//! singular values (e.g. orthogonal projectors), which is exactly the regime
//! the kernel computations live in; Jacobi computes small singular values to
//! high relative accuracy and keeps the right factor exactly orthogonal.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense real matrix, the universal currency of the library.
pub type Mat = DMatrix<f64>;
/// Dense real column vector.
pub type Vector = DVector<f64>;
/// Dense complex matrix, used only by the zero computations.
pub type CMat = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Numerical tolerances shared by every operation.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rel: f64,
    /// Maximum principal angle (radians) under which two subspaces are equal.
    pub subspace_eq: f64,
    /// Absolute residual bound for invariance and kernel checks.
    pub residual_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            subspace_eq: 1e-8,
            residual_abs: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if self.rank_rel > 0.0 && self.subspace_eq > 0.0 && self.residual_abs > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "tolerances must be strictly positive".into(),
            ))
        }
    }

    /// Absolute singular-value cutoff for a matrix with the given shape and
    /// largest singular value.
    fn cutoff(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        self.rank_rel * rows.max(cols) as f64 * sigma_max
    }
}

/// Rejects matrices with NaN or infinite entries.
pub fn ensure_finite(m: &Mat) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

const JACOBI_EPS: f64 = 1e-15;
const MAX_SWEEPS: usize = 60;

/// Thin SVD of a tall (rows ≥ cols) matrix: `m = u · diag(sigma) · vᵀ`,
/// with `sigma` sorted in decreasing order, `v` exactly orthogonal
/// (cols × cols), and zero columns in `u` where `sigma` vanishes.
struct JacobiSvd {
    u: Mat,
    sigma: Vec<f64>,
    v: Mat,
}

fn jacobi_svd_tall(m: &Mat) -> JacobiSvd {
    let (rows, cols) = m.shape();
    debug_assert!(rows >= cols);
    let mut w = m.clone();
    let mut v = Mat::identity(cols, cols);
    for _ in 0..MAX_SWEEPS {
        let mut converged = true;
        for i in 0..cols.saturating_sub(1) {
            for j in (i + 1)..cols {
                let a = w.column(i).norm_squared();
                let b = w.column(j).norm_squared();
                let c: f64 = w.column(i).dot(&w.column(j));
                if c.abs() <= JACOBI_EPS * (a * b).sqrt() || a == 0.0 || b == 0.0 {
                    continue;
                }
                converged = false;
                let zeta = (b - a) / (2.0 * c);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for k in 0..rows {
                    let wi = w[(k, i)];
                    let wj = w[(k, j)];
                    w[(k, i)] = cs * wi - sn * wj;
                    w[(k, j)] = sn * wi + cs * wj;
                }
                for k in 0..cols {
                    let vi = v[(k, i)];
                    let vj = v[(k, j)];
                    v[(k, i)] = cs * vi - sn * vj;
                    v[(k, j)] = sn * vi + cs * vj;
                }
            }
        }
        if converged {
            break;
        }
    }
    // Sort by column norm, descending.
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());
    let mut u = Mat::zeros(rows, cols);
    let mut v_sorted = Mat::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > 0.0 {
            u.column_mut(dst).copy_from(&(w.column(src) / s));
        }
        v_sorted.column_mut(dst).copy_from(&v.column(src));
    }
    JacobiSvd {
        u,
        sigma,
        v: v_sorted,
    }
}

/// Singular values of `m`, sorted in decreasing order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    if m.nrows() >= m.ncols() {
        jacobi_svd_tall(m).sigma
    } else {
        jacobi_svd_tall(&m.transpose()).sigma
    }
}

/// Extends an orthonormal set `basis` (n × r) to a full orthonormal basis of
/// R^n, returning the n × (n − r) complement. Pivoted Gram-Schmidt over the
/// coordinate vectors with reorthogonalization.
fn orthonormal_complement(basis: &Mat, want: usize) -> Mat {
    let n = basis.nrows();
    let mut accepted: Vec<Vector> = Vec::with_capacity(want);
    let project_out = |x: &Vector, accepted: &[Vector]| -> Vector {
        let mut r = x - basis * (basis.transpose() * x);
        for a in accepted {
            let coeff = a.dot(&r);
            r -= a * coeff;
        }
        r
    };
    for _ in 0..want {
        let mut best: Option<(f64, Vector)> = None;
        for j in 0..n {
            let mut e = Vector::zeros(n);
            e[j] = 1.0;
            let r = project_out(&e, &accepted);
            let norm = r.norm();
            if best.as_ref().map(|(b, _)| norm > *b).unwrap_or(true) {
                best = Some((norm, r));
            }
        }
        let (_, r) = best.expect("ambient dimension exceeds complement size");
        // One reorthogonalization pass keeps the set orthonormal to machine
        // precision.
        let r = project_out(&(r.clone() / r.norm()), &accepted);
        accepted.push(r.clone() / r.norm());
    }
    if accepted.is_empty() {
        Mat::zeros(n, 0)
    } else {
        Mat::from_columns(&accepted)
    }
}

/// Numerical rank of `m` under the relative cutoff of `tol`.
pub fn rank_tol(m: &Mat, tol: &Tolerances) -> Result<usize> {
    ensure_finite(m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    let sigma = singular_values(m);
    let sigma_max = sigma[0];
    if sigma_max == 0.0 {
        return Ok(0);
    }
    let cut = tol.cutoff(m.nrows(), m.ncols(), sigma_max);
    Ok(sigma.iter().filter(|&&s| s > cut).count())
}

/// Orthonormal basis of the right null space of `m`, returned as a
/// `cols × k` matrix with `k = cols − rank(m)`.
pub fn kernel_mat(m: &Mat, tol: &Tolerances) -> Result<Mat> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    if rows == 0 {
        return Ok(Mat::identity(cols, cols));
    }
    if rows >= cols {
        let svd = jacobi_svd_tall(m);
        let cut = tol.cutoff(rows, cols, svd.sigma[0]);
        let rank = svd.sigma.iter().filter(|&&s| s > cut).count();
        Ok(svd.v.columns(rank, cols - rank).into_owned())
    } else {
        // Wide matrix: the row space is the image of mᵀ, and the kernel is
        // its orthogonal complement.
        let svd = jacobi_svd_tall(&m.transpose());
        let cut = tol.cutoff(rows, cols, svd.sigma[0]);
        let rank = svd.sigma.iter().filter(|&&s| s > cut).count();
        let row_space = svd.u.columns(0, rank).into_owned();
        Ok(orthonormal_complement(&row_space, cols - rank))
    }
}

/// Orthonormal basis of the column space of `m`, returned as a
/// `rows × rank(m)` matrix.
pub fn image_mat(m: &Mat, tol: &Tolerances) -> Result<Mat> {
    image_mat_floor(m, tol, 0.0)
}

/// [`image_mat`] with an external scale floor for the rank cutoff. When `m`
/// is a product whose factors have scale `floor`, an all-tiny result must be
/// read as the zero map rather than ranked relative to its own largest
/// singular value.
pub fn image_mat_floor(m: &Mat, tol: &Tolerances, floor: f64) -> Result<Mat> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Mat::zeros(rows, 0));
    }
    let svd = if rows >= cols {
        jacobi_svd_tall(m)
    } else {
        // The image of m is spanned by the (exactly orthogonal) right factor
        // of mᵀ.
        let t = jacobi_svd_tall(&m.transpose());
        JacobiSvd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        }
    };
    if svd.sigma[0] == 0.0 && floor == 0.0 {
        return Ok(Mat::zeros(rows, 0));
    }
    // The floor guards against ranking pure roundoff: products of factors at
    // scale `floor` carry errors of order eps·floor, well below genuine
    // directions even when those are themselves small.
    let eps_floor = 100.0 * f64::EPSILON * rows.max(cols) as f64 * floor;
    let cut = tol.cutoff(rows, cols, svd.sigma[0]).max(eps_floor);
    let rank = svd.sigma.iter().filter(|&&s| s > cut).count();
    Ok(svd.u.columns(0, rank).into_owned())
}

/// Moore–Penrose pseudoinverse with the same rank cutoff as [`rank_tol`].
pub fn pinv(m: &Mat, tol: &Tolerances) -> Result<Mat> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Mat::zeros(cols, rows));
    }
    if rows < cols {
        return Ok(pinv(&m.transpose(), tol)?.transpose());
    }
    let svd = jacobi_svd_tall(m);
    if svd.sigma[0] == 0.0 {
        return Ok(Mat::zeros(cols, rows));
    }
    let cut = tol.cutoff(rows, cols, svd.sigma[0]);
    let mut scaled_v = Mat::zeros(cols, cols);
    for j in 0..cols {
        if svd.sigma[j] > cut {
            scaled_v
                .column_mut(j)
                .copy_from(&(svd.v.column(j) / svd.sigma[j]));
        }
    }
    Ok(scaled_v * svd.u.transpose())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// Horizontal concatenation `[a b]`.
pub fn hcat(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.nrows(), b.nrows(), "hcat: row count mismatch");
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Vertical concatenation `[a; b]`.
pub fn vcat(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.ncols(), b.ncols(), "vcat: column count mismatch");
    let mut out = Mat::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

struct ComplexJacobiSvd {
    u: CMat,
    sigma: Vec<f64>,
    v: CMat,
}

/// Complex one-sided Jacobi: the cross term is phase-rotated to the real
/// axis, then the real rotation formulas apply.
fn complex_jacobi_svd_tall(m: &CMat) -> ComplexJacobiSvd {
    let (rows, cols) = m.shape();
    debug_assert!(rows >= cols);
    let mut w = m.clone();
    let mut v = CMat::identity(cols, cols);
    for _ in 0..MAX_SWEEPS {
        let mut converged = true;
        for i in 0..cols.saturating_sub(1) {
            for j in (i + 1)..cols {
                let a = w.column(i).norm_squared();
                let b = w.column(j).norm_squared();
                let c: Complex64 = w.column(i).dotc(&w.column(j));
                let cmag = c.norm();
                if cmag <= JACOBI_EPS * (a * b).sqrt() || a == 0.0 || b == 0.0 {
                    continue;
                }
                converged = false;
                let phase = c / cmag;
                let zeta = (b - a) / (2.0 * cmag);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                // Columns (i, j·phase⁻¹) see a real cross term; fold the
                // phase into the rotation coefficients.
                let s_i = sn * phase.conj(); // multiplies column j in the i-update
                let s_j = sn * phase; // multiplies column i in the j-update
                for k in 0..rows {
                    let wi = w[(k, i)];
                    let wj = w[(k, j)];
                    w[(k, i)] = wi * cs - wj * s_i;
                    w[(k, j)] = wi * s_j + wj * cs;
                }
                for k in 0..cols {
                    let vi = v[(k, i)];
                    let vj = v[(k, j)];
                    v[(k, i)] = vi * cs - vj * s_i;
                    v[(k, j)] = vi * s_j + vj * cs;
                }
            }
        }
        if converged {
            break;
        }
    }
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());
    let mut u = CMat::zeros(rows, cols);
    let mut v_sorted = CMat::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > 0.0 {
            u.column_mut(dst)
                .copy_from(&(w.column(src) / Complex64::new(s, 0.0)));
        }
        v_sorted.column_mut(dst).copy_from(&v.column(src));
    }
    ComplexJacobiSvd {
        u,
        sigma,
        v: v_sorted,
    }
}

fn complex_orthonormal_complement(basis: &CMat, want: usize) -> CMat {
    let n = basis.nrows();
    let mut accepted: Vec<CVector> = Vec::with_capacity(want);
    let project_out = |x: &CVector, accepted: &[CVector]| -> CVector {
        let mut r = x - basis * (basis.adjoint() * x);
        for a in accepted {
            let coeff = a.dotc(&r);
            r -= a * coeff;
        }
        r
    };
    for _ in 0..want {
        let mut best: Option<(f64, CVector)> = None;
        for j in 0..n {
            let mut e = CVector::zeros(n);
            e[j] = Complex64::new(1.0, 0.0);
            let r = project_out(&e, &accepted);
            let norm = r.norm();
            if best.as_ref().map(|(b, _)| norm > *b).unwrap_or(true) {
                best = Some((norm, r));
            }
        }
        let (norm, r) = best.expect("ambient dimension exceeds complement size");
        let r = project_out(&(r / Complex64::new(norm, 0.0)), &accepted);
        let rnorm = r.norm();
        accepted.push(r / Complex64::new(rnorm, 0.0));
    }
    if accepted.is_empty() {
        CMat::zeros(n, 0)
    } else {
        CMat::from_columns(&accepted)
    }
}

/// Orthonormal basis of the right null space of a complex matrix.
pub fn complex_kernel_mat(m: &CMat, tol: &Tolerances) -> CMat {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    if rows == 0 {
        return CMat::identity(cols, cols);
    }
    if rows >= cols {
        let svd = complex_jacobi_svd_tall(m);
        let cut = tol.cutoff(rows, cols, svd.sigma[0]);
        let rank = svd.sigma.iter().filter(|&&s| s > cut).count();
        svd.v.columns(rank, cols - rank).into_owned()
    } else {
        let svd = complex_jacobi_svd_tall(&m.adjoint());
        let cut = tol.cutoff(rows, cols, svd.sigma[0]);
        let rank = svd.sigma.iter().filter(|&&s| s > cut).count();
        let row_space = svd.u.columns(0, rank).into_owned();
        complex_orthonormal_complement(&row_space, cols - rank)
    }
}

/// Sorts complex scalars lexicographically by (real, imaginary) part.
pub fn sort_complex_lex(values: &mut [Complex64]) {
    values.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
}

/// Compares two zero multisets after lexicographic sorting, entrywise
/// within `tol`.
pub fn complex_multisets_match(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    sort_complex_lex(&mut a);
    sort_complex_lex(&mut b);
    a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() <= tol)
}
