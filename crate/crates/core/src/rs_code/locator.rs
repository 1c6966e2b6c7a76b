//! Error-locator extraction from power-sum syndromes.
//!
//! Syndromes here are sequences `S_k = sum_j c_j z_j^k` over at most `tau`
//! unknown nodes `z_j`. The monic polynomial `prod_j (X - z_j)` annihilates
//! the sequence, so its coefficients span the null space of the Hankel matrix
//! `[S_{i+m}]`. Over exact reals this is what Berlekamp-Massey (Trench)
//! computes recursively; here the null vector is taken from an SVD, which
//! behaves in floating point.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::points::EvaluationPoints;
use crate::error::{Error, Result};
use crate::numerics::{inf_norm, null_vector, numerical_rank, Tolerance};

/// Separation factor required between the last accepted root and the next
/// smallest locator magnitude.
pub const ROOT_SEPARATION: f64 = 10.0;

/// Monic annihilating polynomial, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Locator {
    pub degree: usize,
    pub coefficients: Vec<Complex64>,
    /// `sigma_min / sigma_max` of the Hankel system the locator was taken from.
    pub residual: f64,
}

impl Locator {
    pub fn trivial() -> Self {
        Self {
            degree: 0,
            coefficients: vec![Complex64::new(1.0, 0.0)],
            residual: 0.0,
        }
    }

    pub fn evaluate(&self, x: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }
}

fn hankel(syndromes: &[Complex64], rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |i, m| syndromes[i + m])
}

/// Number of nodes the syndromes carry, read off the rank of the
/// `(L - tau) x (tau + 1)` Hankel matrix and capped at `tau`.
pub fn infer_degree(syndromes: &[Complex64], max_errors: usize, tol: &Tolerance) -> usize {
    if max_errors == 0 || syndromes.len() <= max_errors {
        return 0;
    }
    let k = hankel(syndromes, syndromes.len() - max_errors, max_errors + 1);
    numerical_rank(&k, tol).min(max_errors)
}

/// Monic locator of exactly the given degree, or
/// [`Error::InconsistentSyndromes`] when no such polynomial annihilates the
/// sequence within `residual_tol`.
pub fn locator_of_degree(
    syndromes: &[Complex64],
    degree: usize,
    tol: &Tolerance,
) -> Result<Locator> {
    let len = syndromes.len();
    if degree == 0 {
        let residual = if inf_norm(syndromes) == 0.0 { 0.0 } else { 1.0 };
        if residual > tol.residual_tol {
            return Err(Error::InconsistentSyndromes {
                max_degree: 0,
                best_residual: residual,
            });
        }
        return Ok(Locator::trivial());
    }
    if 2 * degree > len {
        return Err(Error::DimensionMismatch(format!(
            "{len} syndromes cannot determine a degree-{degree} locator"
        )));
    }
    let k = hankel(syndromes, len - degree, degree + 1);
    let nv = null_vector(&k);
    let residual = if nv.sigma_max == 0.0 {
        0.0
    } else {
        nv.sigma_min / nv.sigma_max
    };
    let lead = nv.vector[degree];
    // a vanishing leading coefficient means the null vector is a lower-degree
    // polynomial and cannot be made monic at this degree
    if residual > tol.residual_tol || lead.norm() <= tol.zero_tol {
        return Err(Error::InconsistentSyndromes {
            max_degree: degree,
            best_residual: residual,
        });
    }
    Ok(Locator {
        degree,
        coefficients: nv.vector.iter().map(|c| c / lead).collect(),
        residual,
    })
}

/// Prony/Berlekamp-Massey step: infer the number of nodes (at most
/// `max_errors`) and return the monic locator annihilating the syndromes.
///
/// `reference_scale` is the magnitude of the data the syndromes were computed
/// from; syndromes at or below `zero_tol` times it are treated as all-zero.
pub fn prony_locator(
    syndromes: &[Complex64],
    max_errors: usize,
    reference_scale: f64,
    tol: &Tolerance,
) -> Result<Locator> {
    if syndromes.len() < 2 * max_errors {
        return Err(Error::DimensionMismatch(format!(
            "{} syndromes cannot locate {max_errors} errors",
            syndromes.len()
        )));
    }
    if tol.is_zero(inf_norm(syndromes), reference_scale) {
        return Ok(Locator::trivial());
    }
    let inferred = infer_degree(syndromes, max_errors, tol).max(1);
    let mut best_residual = f64::INFINITY;
    for degree in inferred..=max_errors {
        match locator_of_degree(syndromes, degree, tol) {
            Ok(loc) => return Ok(loc),
            Err(Error::InconsistentSyndromes { best_residual: r, .. }) => {
                best_residual = best_residual.min(r)
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::InconsistentSyndromes {
        max_degree: max_errors,
        best_residual,
    })
}

/// Chooses the `degree` candidates where the locator is smallest.
///
/// Error and spike positions are known to lie among the evaluation points, so
/// instead of root-finding the locator is evaluated at every candidate. The
/// chosen magnitudes must be at most `residual_tol * max |locator|` and at
/// least [`ROOT_SEPARATION`] times below the next candidate.
pub fn locate_roots(
    locator: &Locator,
    candidates: &EvaluationPoints,
    tol: &Tolerance,
) -> Result<Vec<usize>> {
    let nu = locator.degree;
    if nu == 0 {
        return Ok(Vec::new());
    }
    if nu > candidates.len() {
        return Err(Error::RootSeparationFailure(format!(
            "degree {nu} exceeds the {} candidates",
            candidates.len()
        )));
    }
    let magnitudes: Vec<f64> = candidates
        .evaluate(&locator.coefficients)
        .iter()
        .map(|z| z.norm())
        .collect();
    let mut order: Vec<usize> = (0..magnitudes.len()).collect();
    order.sort_by(|&a, &b| magnitudes[a].total_cmp(&magnitudes[b]));
    let max_all = magnitudes.iter().cloned().fold(0.0, f64::max);

    let last = magnitudes[order[nu - 1]];
    if last > tol.residual_tol * max_all {
        return Err(Error::RootSeparationFailure(format!(
            "root {} of {nu} has |locator| = {last:e}, above {:e}",
            nu,
            tol.residual_tol * max_all
        )));
    }
    if let Some(&next) = order.get(nu) {
        let next = magnitudes[next];
        if next == 0.0 || next < ROOT_SEPARATION * last {
            return Err(Error::RootSeparationFailure(format!(
                "candidate magnitudes {last:e} and {next:e} are not separated"
            )));
        }
    }
    let mut roots = order[..nu].to_vec();
    roots.sort_unstable();
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn zero_syndromes_give_trivial_locator() {
        let loc = prony_locator(&[c(0.0); 4], 2, 1.0, &tol()).unwrap();
        assert_eq!(loc.degree, 0);
        assert_eq!(loc.coefficients, vec![c(1.0)]);
    }

    #[test]
    fn single_geometric_sequence() {
        // S_i = 5 * 2^i; Lambda(X) = X - 2 satisfies S_1 - 2 S_0 = 0
        let s = [c(5.0), c(10.0)];
        let loc = prony_locator(&s, 1, 10.0, &tol()).unwrap();
        assert_eq!(loc.degree, 1);
        assert!((loc.coefficients[0] - c(-2.0)).norm() < 1e-12);
        assert!((loc.coefficients[1] - c(1.0)).norm() < 1e-15);
        assert!((s[1] + loc.coefficients[0] * s[0]).norm() < 1e-12);
    }

    #[test]
    fn two_node_sequence() {
        // S_i = 3 * 1^i + 4 * (-1)^i; (X - 1)(X + 1) = X^2 - 1
        let s: Vec<Complex64> = (0..4)
            .map(|i| c(3.0 + 4.0 * (-1.0f64).powi(i)))
            .collect();
        let loc = prony_locator(&s, 2, 7.0, &tol()).unwrap();
        assert_eq!(loc.degree, 2);
        let expected = [c(-1.0), c(0.0), c(1.0)];
        for (a, b) in loc.coefficients.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
        for i in 0..2 {
            let ann: Complex64 = (0..=2).map(|m| loc.coefficients[m] * s[i + m]).sum();
            assert!(ann.norm() < 1e-12);
        }
    }

    #[test]
    fn degree_below_capacity_is_inferred() {
        let s: Vec<Complex64> = (0..6).map(|i| c(2.5 * 0.3f64.powi(i))).collect();
        let loc = prony_locator(&s, 3, 2.5, &tol()).unwrap();
        assert_eq!(loc.degree, 1);
        assert!((loc.coefficients[0] - c(-0.3)).norm() < 1e-12);
    }

    #[test]
    fn full_rank_odd_window_is_inconsistent() {
        // three nodes but capacity one, with an overdetermined 2x2 system
        let s: Vec<Complex64> = (0..3)
            .map(|i| c(1.0 + 2.0 * 0.5f64.powi(i) - 0.7f64.powi(i)))
            .collect();
        assert!(matches!(
            prony_locator(&s, 1, 2.0, &tol()),
            Err(Error::InconsistentSyndromes { .. })
        ));
    }

    #[test]
    fn roots_of_trivial_locator() {
        let pts = EvaluationPoints::generic(vec![0.0, 1.0, 2.0]).unwrap();
        assert!(locate_roots(&Locator::trivial(), &pts, &tol()).unwrap().is_empty());
    }

    #[test]
    fn root_of_linear_locator() {
        let pts = EvaluationPoints::generic(vec![0.0, 1.0, 2.0]).unwrap();
        let loc = Locator {
            degree: 1,
            coefficients: vec![c(-2.0), c(1.0)],
            residual: 0.0,
        };
        assert_eq!(locate_roots(&loc, &pts, &tol()).unwrap(), vec![2]);
    }

    #[test]
    fn two_spikes_on_roots_of_unity() {
        let pts = EvaluationPoints::RootsOfUnity(8);
        // spikes at p = 1 and p = 5 with amplitudes 2 and -0.5
        let s: Vec<Complex64> = (0..4)
            .map(|k| 2.0 * pts.node(1).powu(k) - 0.5 * pts.node(5).powu(k))
            .collect();
        let loc = prony_locator(&s, 2, 2.5, &tol()).unwrap();
        assert_eq!(loc.degree, 2);
        assert_eq!(locate_roots(&loc, &pts, &tol()).unwrap(), vec![1, 5]);
    }

    #[test]
    fn unseparated_roots_are_rejected() {
        // root at 0.5 lies midway between the candidates
        let pts = EvaluationPoints::generic(vec![0.0, 1.0, 2.0]).unwrap();
        let loc = Locator {
            degree: 1,
            coefficients: vec![c(-0.5), c(1.0)],
            residual: 0.0,
        };
        assert!(matches!(
            locate_roots(&loc, &pts, &tol()),
            Err(Error::RootSeparationFailure(_))
        ));
    }
}
