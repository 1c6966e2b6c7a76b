use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::dft_at_frequencies;

/// Minimum spacing accepted between two real evaluation points.
pub const MIN_POINT_GAP: f64 = 1e-12;

/// Standard real point layouts on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFamily {
    /// `-1 + 2j/(n-1)`, `j = 0..n-1`.
    Equispaced,
    /// `cos(pi (2j - 1) / (2n))`, `j = 1..n`.
    Chebyshev,
}

impl PointFamily {
    pub fn points(self, n: usize) -> Vec<f64> {
        match self {
            PointFamily::Equispaced if n == 1 => vec![0.0],
            PointFamily::Equispaced => (0..n)
                .map(|j| -1.0 + 2.0 * j as f64 / (n - 1) as f64)
                .collect(),
            PointFamily::Chebyshev => (1..=n)
                .map(|j| (PI * (2 * j - 1) as f64 / (2 * n) as f64).cos())
                .collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PointFamily::Equispaced => "equispaced",
            PointFamily::Chebyshev => "chebyshev",
        }
    }
}

impl std::str::FromStr for PointFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equispaced" => Ok(PointFamily::Equispaced),
            "chebyshev" => Ok(PointFamily::Chebyshev),
            other => Err(Error::InvalidSpec(format!("unknown point family `{other}`"))),
        }
    }
}

/// Even-indexed entries first, then odd-indexed ones.
///
/// Applied to sorted nodes, any leading block of the result is spread over
/// the whole interval rather than bunched at one end.
pub fn interleave(points: &[f64]) -> Vec<f64> {
    points
        .iter()
        .step_by(2)
        .chain(points.iter().skip(1).step_by(2))
        .copied()
        .collect()
}

/// The point set a Reed-Solomon evaluation code is defined on.
#[derive(Debug, Clone, PartialEq)]
pub enum EvaluationPoints {
    /// Distinct real numbers `a_1..a_n`.
    GenericReal(Vec<f64>),
    /// `exp(2 pi i p / n)`, `p = 0..n-1`.
    RootsOfUnity(usize),
}

impl EvaluationPoints {
    pub fn generic(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSpec("empty point set".into()));
        }
        if let Some(bad) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidSpec(format!("non-finite evaluation point {bad}")));
        }
        let mut sorted = points.clone();
        sorted.sort_by(f64::total_cmp);
        if let Some(w) = sorted.windows(2).find(|w| w[1] - w[0] <= MIN_POINT_GAP) {
            return Err(Error::InvalidSpec(format!(
                "evaluation points {} and {} are not distinct",
                w[0], w[1]
            )));
        }
        Ok(EvaluationPoints::GenericReal(points))
    }

    pub fn roots_of_unity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("roots of unity of order 0".into()));
        }
        Ok(EvaluationPoints::RootsOfUnity(n))
    }

    pub fn len(&self) -> usize {
        match self {
            EvaluationPoints::GenericReal(p) => p.len(),
            EvaluationPoints::RootsOfUnity(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, j: usize) -> Complex64 {
        match self {
            EvaluationPoints::GenericReal(p) => Complex64::new(p[j], 0.0),
            EvaluationPoints::RootsOfUnity(n) => {
                Complex64::from_polar(1.0, 2.0 * PI * j as f64 / *n as f64)
            }
        }
    }

    /// Values of `sum_m c_m X^m` at every point.
    ///
    /// On roots of unity this is one FFT of the conjugated, zero-padded
    /// coefficients; elsewhere it is Horner's rule per point.
    pub fn evaluate(&self, coefficients: &[Complex64]) -> Vec<Complex64> {
        match self {
            EvaluationPoints::GenericReal(points) => points
                .iter()
                .map(|&a| {
                    coefficients
                        .iter()
                        .rev()
                        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * a + c)
                })
                .collect(),
            EvaluationPoints::RootsOfUnity(n) => {
                // sum_m c_m w^{mp} = conj(sum_m conj(c_m) exp(-2 pi i m p / n))
                let mut folded = vec![Complex64::new(0.0, 0.0); *n];
                for (m, c) in coefficients.iter().enumerate() {
                    folded[m % n] += c.conj();
                }
                let freqs: Vec<i64> = (0..*n as i64).collect();
                dft_at_frequencies(&folded, &freqs, *n)
                    .expect("buffer length matches transform length")
                    .into_iter()
                    .map(|z| z.conj())
                    .collect()
            }
        }
    }
}
