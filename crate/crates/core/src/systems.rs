//! Builtin systems: the leader-follower consensus network, SISO fixtures
//! with known invariant zeros, and randomized system generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::lti::LtiSystem;

/// The 11-state, 3-input, 2-output leader-follower consensus network.
/// The followers evolve under the weighted averaging dynamics below; the
/// leaders drive through B and nodes 4 and 11 are monitored through C.
pub fn consensus_example() -> LtiSystem {
    #[rustfmt::skip]
    let a = Mat::from_row_slice(11, 11, &[
        0.8, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.2, 0.4, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.2, 0.6, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.6, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.2, 0.4, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.2, 0.6, 0.0, 0.2, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.8, 0.2, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.2, 0.2, 0.2, 0.0, 0.0, 0.2,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.6, 0.2, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.2, 0.6, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.2, 0.0, 0.0, 0.8,
    ]);
    #[rustfmt::skip]
    let b_t = Mat::from_row_slice(3, 11, &[
        0.0, 0.2, 0.0, 0.2, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.2, 0.2, 0.2, 0.0,
        0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ]);
    #[rustfmt::skip]
    let c = Mat::from_row_slice(2, 11, &[
        0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
    ]);
    LtiSystem::new(a, b_t.transpose(), c).expect("consensus matrices are consistent")
}

/// SISO companion-form system whose only invariant zero is 0.5.
///
/// Transfer function (z − 0.5) / (z² − 0.3z + 0.02) in controllable
/// canonical form; the transmission zero of a minimal SISO system equals
/// its invariant zero.
pub fn siso_zero_one() -> LtiSystem {
    // Characteristic polynomial z^2 + a1 z + a0 with a1 = -0.3, a0 = 0.02.
    let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, -0.02, 0.3]);
    let b = Mat::from_column_slice(2, 1, &[0.0, 1.0]);
    // Numerator z - 0.5 read off as [c0 c1].
    let c = Mat::from_row_slice(1, 2, &[-0.5, 1.0]);
    LtiSystem::new(a, b, c).expect("fixture dimensions are consistent")
}

/// SISO companion-form system with invariant zeros {0.5, −0.25}.
///
/// Numerator (z − 0.5)(z + 0.25) = z² − 0.25z − 0.125 over denominator
/// (z − 0.1)(z − 0.2)(z + 0.3).
pub fn siso_zero_two() -> LtiSystem {
    // Denominator z^3 + 0 z^2 - 0.07 z + 0.006.
    let a = Mat::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -0.006, 0.07, 0.0]);
    let b = Mat::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
    let c = Mat::from_row_slice(1, 3, &[-0.125, -0.25, 1.0]);
    LtiSystem::new(a, b, c).expect("fixture dimensions are consistent")
}

/// Random system with Gaussian B and C and Gaussian A rescaled to the given
/// spectral radius.
pub fn random_system(n: usize, m: usize, p: usize, rng: &mut ChaCha8Rng) -> LtiSystem {
    random_system_with_radius(n, m, p, 0.9, rng)
}

pub fn random_system_with_radius(
    n: usize,
    m: usize,
    p: usize,
    spectral_radius: f64,
    rng: &mut ChaCha8Rng,
) -> LtiSystem {
    let mut a = Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let rho = a
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    if rho > 1e-12 {
        a *= spectral_radius / rho;
    }
    let b = Mat::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let c = Mat::from_fn(p, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    LtiSystem::new(a, b, c).expect("generated dimensions are consistent")
}

/// Degenerate fixture with a known two-dimensional R*, obtained by hiding a
/// reachable block from the output and conjugating by a random rotation.
///
/// In the construction coordinates, span{e1, e2} is A-invariant, fully
/// reachable through B, and annihilated by C, so V* ⊇ span{e1,e2},
/// S* ⊇ span{e1,e2}, and R* = span{e1,e2}.
pub fn degenerate_example(seed: u64) -> (LtiSystem, Mat) {
    #[rustfmt::skip]
    let a0 = Mat::from_row_slice(3, 3, &[
        0.5, 0.1, 0.0,
        0.2, 0.3, 0.0,
        0.0, 0.0, 0.4,
    ]);
    let b0 = Mat::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let c0 = Mat::from_row_slice(1, 3, &[0.0, 0.0, 1.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = Mat::from_fn(3, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = random.qr().q();
    let a = &q * a0 * q.transpose();
    let b = &q * b0;
    let c = c0 * q.transpose();
    let rstar_basis = q.columns(0, 2).into_owned();
    (
        LtiSystem::new(a, b, c).expect("fixture dimensions are consistent"),
        rstar_basis,
    )
}

/// Parses a system specification string: a builtin name (`consensus`,
/// `siso-zero-1`, `siso-zero-2`, `random:n,m,p[,seed]`) or a path to a
/// directory containing A.csv, B.csv, C.csv.
pub fn resolve_system(spec: &str) -> Result<LtiSystem> {
    match spec {
        "consensus" => Ok(consensus_example()),
        "siso-zero-1" => Ok(siso_zero_one()),
        "siso-zero-2" => Ok(siso_zero_two()),
        other => {
            if let Some(params) = other.strip_prefix("random:") {
                let parts: Vec<&str> = params.split(',').collect();
                if parts.len() != 3 && parts.len() != 4 {
                    return Err(Error::InvalidConfig(format!(
                        "expected random:n,m,p[,seed], got '{other}'"
                    )));
                }
                let parse = |s: &str| -> Result<usize> {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::InvalidConfig(format!("bad integer '{s}'")))
                };
                let (n, m, p) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
                let seed = if parts.len() == 4 {
                    parse(parts[3])? as u64
                } else {
                    0
                };
                if n == 0 || m == 0 || p == 0 {
                    return Err(Error::InvalidConfig("dimensions must be positive".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(random_system(n, m, p, &mut rng))
            } else {
                let dir = std::path::Path::new(other);
                if dir.is_dir() {
                    crate::io::load_system(dir)
                } else {
                    Err(Error::InvalidConfig(format!(
                        "unknown system '{other}' (not a builtin name or directory)"
                    )))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_system_respects_spectral_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sys = random_system(5, 2, 2, &mut rng);
        let rho = sys
            .a()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        assert!(rho <= 1.0 + 1e-9);
    }

    #[test]
    fn resolve_builtin_names() {
        assert_eq!(resolve_system("consensus").unwrap().state_dim(), 11);
        assert_eq!(resolve_system("siso-zero-1").unwrap().state_dim(), 2);
        assert_eq!(resolve_system("siso-zero-2").unwrap().state_dim(), 3);
        assert_eq!(resolve_system("random:4,2,2,9").unwrap().state_dim(), 4);
        assert!(resolve_system("nope").is_err());
        assert!(resolve_system("random:0,1,1").is_err());
    }
}
