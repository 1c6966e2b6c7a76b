//! Reed-Solomon evaluation codes over the reals and their syndrome decoder.
//!
//! Two point layouts are supported: arbitrary distinct reals (codewords are
//! evaluations of polynomials of degree `< k`) and the `n`-th roots of unity
//! written in a real basis (codewords are real trigonometric polynomials with
//! frequencies in `{-s..s}`, `k = 2s + 1`). Both are MDS: `d = n - k + 1`.
//!
//! Decoding is syndrome based. A parity-check matrix whose rows are
//! (weighted) evaluations of `X^i`, or real DFT rows over a window of
//! consecutive frequencies, turns an error pattern into power sums over the
//! error positions; [`locator`] recovers the positions and a least-squares
//! fit on the located columns recovers the values. The same routine,
//! [`syndrome_decode`], also solves the inner sparse-recovery problem of the
//! sensing matrices.

pub mod locator;
pub mod points;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{dft_at_frequencies, inf_norm, solve_on_support, Tolerance};

pub use locator::{infer_degree, locate_roots, locator_of_degree, prony_locator, Locator};
pub use points::{interleave, EvaluationPoints, PointFamily};

/// Real rows of the length-`n` DFT at the given nonnegative frequencies:
/// the all-ones row for 0, a cosine row for the Nyquist frequency `n/2`, and
/// a cosine/sine pair otherwise.
pub fn spectral_rows(n: usize, freqs: &[usize]) -> DMatrix<f64> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let angle = |m: usize, j: usize| 2.0 * std::f64::consts::PI * ((m * j) % n) as f64 / n as f64;
    for &m in freqs {
        rows.push((0..n).map(|j| angle(m, j).cos()).collect());
        if m != 0 && 2 * m != n {
            rows.push((0..n).map(|j| angle(m, j).sin()).collect());
        }
    }
    DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j])
}

/// Structured parity-check matrix whose syndromes are power sums over the
/// positions of the word they are applied to.
#[derive(Debug, Clone, PartialEq)]
pub enum SyndromeMap {
    /// Rows `w_j a_j^i` for `i = 0..rows`; syndrome `i` equals
    /// `sum_j (w_j v_j) a_j^i`.
    Weighted {
        points: Vec<f64>,
        weights: Vec<f64>,
        rows: usize,
    },
    /// Real DFT rows of length `n` over the symmetric window of consecutive
    /// signed frequencies `start, start+1, .., start+len-1` (mod `n`).
    Spectral { n: usize, start: i64, len: usize },
}

impl SyndromeMap {
    /// DFT rows for frequencies `{-s..s}`.
    pub fn spectral_low(n: usize, s: usize) -> Result<Self> {
        if 2 * s + 1 > n {
            return Err(Error::InvalidSpec(format!(
                "frequency band -{s}..{s} does not fit length {n}"
            )));
        }
        Ok(SyndromeMap::Spectral {
            n,
            start: -(s as i64),
            len: 2 * s + 1,
        })
    }

    /// DFT rows for the frequencies outside `{-s..s}`.
    pub fn spectral_high(n: usize, s: usize) -> Result<Self> {
        if 2 * s + 1 > n {
            return Err(Error::InvalidSpec(format!(
                "frequency band -{s}..{s} does not fit length {n}"
            )));
        }
        Ok(SyndromeMap::Spectral {
            n,
            start: s as i64 + 1,
            len: n - 2 * s - 1,
        })
    }

    pub fn length(&self) -> usize {
        match self {
            SyndromeMap::Weighted { points, .. } => points.len(),
            SyndromeMap::Spectral { n, .. } => *n,
        }
    }

    /// Number of syndromes (rows of the real matrix).
    pub fn rows(&self) -> usize {
        match self {
            SyndromeMap::Weighted { rows, .. } => *rows,
            SyndromeMap::Spectral { len, .. } => *len,
        }
    }

    /// Largest number of nonzero positions the power sums can locate.
    pub fn capacity(&self) -> usize {
        self.rows() / 2
    }

    /// Nonnegative frequencies covered by a spectral window, ascending.
    fn nonnegative_freqs(&self) -> Vec<usize> {
        match self {
            SyndromeMap::Weighted { .. } => Vec::new(),
            SyndromeMap::Spectral { n, start, len } => {
                let mut freqs: Vec<usize> = (0..*len as i64)
                    .map(|k| {
                        let m = (start + k).rem_euclid(*n as i64) as usize;
                        m.min(n - m)
                    })
                    .collect();
                freqs.sort_unstable();
                freqs.dedup();
                freqs
            }
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        match self {
            SyndromeMap::Weighted {
                points,
                weights,
                rows,
            } => DMatrix::from_fn(*rows, points.len(), |i, j| {
                weights[j] * points[j].powi(i as i32)
            }),
            SyndromeMap::Spectral { n, .. } => spectral_rows(*n, &self.nonnegative_freqs()),
        }
    }

    /// Nodes the power sums are taken over.
    pub fn candidates(&self) -> EvaluationPoints {
        match self {
            SyndromeMap::Weighted { points, .. } => EvaluationPoints::GenericReal(points.clone()),
            SyndromeMap::Spectral { n, .. } => EvaluationPoints::RootsOfUnity(*n),
        }
    }

    /// Rearranges a real syndrome (this map's matrix times some word) into the
    /// power-sum sequence the locator works on.
    ///
    /// For spectral maps the cosine/sine pairs become `Y_m = C_m + i S_m`,
    /// `Y_{-m} = conj(Y_m)`, listed over the window in increasing order.
    pub fn power_sums(&self, syndrome: &[f64]) -> Result<Vec<Complex64>> {
        if syndrome.len() != self.rows() {
            return Err(Error::DimensionMismatch(format!(
                "syndrome of length {} for a map with {} rows",
                syndrome.len(),
                self.rows()
            )));
        }
        match self {
            SyndromeMap::Weighted { .. } => {
                Ok(syndrome.iter().map(|&s| Complex64::new(s, 0.0)).collect())
            }
            SyndromeMap::Spectral { n, start, len } => {
                let mut by_freq = std::collections::HashMap::new();
                let mut row = 0;
                for m in self.nonnegative_freqs() {
                    let value = if m == 0 || 2 * m == *n {
                        Complex64::new(syndrome[row], 0.0)
                    } else {
                        row += 1;
                        Complex64::new(syndrome[row - 1], syndrome[row])
                    };
                    row += 1;
                    by_freq.insert(m, value);
                }
                Ok((0..*len as i64)
                    .map(|k| {
                        let m = (start + k).rem_euclid(*n as i64) as usize;
                        if m <= n - m {
                            by_freq[&m]
                        } else {
                            by_freq[&(n - m)].conj()
                        }
                    })
                    .collect())
            }
        }
    }

    /// Power sums computed directly from a full-length word. Spectral maps
    /// use one FFT: `Y_m = sum_p v_p exp(2 pi i m p / n)`.
    pub fn power_sums_of_word(&self, word: &[f64]) -> Result<Vec<Complex64>> {
        if word.len() != self.length() {
            return Err(Error::DimensionMismatch(format!(
                "word of length {} for a map of length {}",
                word.len(),
                self.length()
            )));
        }
        match self {
            SyndromeMap::Weighted { .. } => {
                let s = self.matrix() * DVector::from_column_slice(word);
                self.power_sums(s.as_slice())
            }
            SyndromeMap::Spectral { n, start, len } => {
                let freqs: Vec<i64> = (0..*len as i64).map(|k| -(start + k)).collect();
                dft_at_frequencies(word, &freqs, *n)
            }
        }
    }

    /// `max_i sum_j |P_ij| |v_j|`: the size of the terms entering each
    /// syndrome, against which cancellation to zero is judged.
    pub fn syndrome_scale(&self, matrix: &DMatrix<f64>, word: &[f64]) -> f64 {
        matrix
            .row_iter()
            .map(|row| row.iter().zip(word).map(|(p, v)| (p * v).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Sparse solution of a syndrome equation `P v = syndrome`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution {
    pub positions: Vec<usize>,
    pub values: Vec<f64>,
    /// Relative least-squares residual of the accepted fit.
    pub residual: f64,
}

impl SparseSolution {
    fn empty() -> Self {
        Self {
            positions: Vec::new(),
            values: Vec::new(),
            residual: 0.0,
        }
    }
}

/// Finds the sparsest `v` (at most `max_errors` nonzeros) with
/// `check * v = syndrome`, where `check` is `map.matrix()` and `sums` the
/// matching power sums.
///
/// The locator degree starts at the Hankel rank and is raised whenever root
/// location or the least-squares residual gate rejects it; the rank estimate
/// can fall short for tightly clustered positions.
pub fn syndrome_decode(
    map: &SyndromeMap,
    check: &DMatrix<f64>,
    syndrome: &DVector<f64>,
    sums: &[Complex64],
    max_errors: usize,
    scale: f64,
    tol: &Tolerance,
) -> Result<SparseSolution> {
    let tau = max_errors.min(map.capacity());
    if tol.is_zero(inf_norm(sums), scale) && tol.is_zero(inf_norm(syndrome.as_slice()), scale) {
        return Ok(SparseSolution::empty());
    }
    if tau == 0 {
        return Err(Error::DecodingFailure(format!(
            "nonzero syndrome (|s| = {:e}) with no correction capacity",
            inf_norm(sums)
        )));
    }
    let candidates = map.candidates();
    let inferred = infer_degree(sums, tau, tol).max(1);
    let mut last_error = None;
    for degree in inferred..=tau {
        let attempt = locator_of_degree(sums, degree, tol)
            .and_then(|loc| locate_roots(&loc, &candidates, tol))
            .and_then(|positions| {
                let fit = solve_on_support(check, &positions, syndrome, tol)?;
                if fit.residual > tol.residual_tol {
                    return Err(Error::DecodingFailure(format!(
                        "degree-{degree} fit leaves relative residual {:e}",
                        fit.residual
                    )));
                }
                Ok((positions, fit))
            });
        match attempt {
            Ok((positions, fit)) => {
                let values = fit.coefficients.as_slice();
                let value_scale = inf_norm(values);
                let (positions, values) = positions
                    .iter()
                    .zip(values)
                    .filter(|(_, v)| !tol.is_zero(**v, value_scale))
                    .map(|(&p, &v)| (p, v))
                    .unzip();
                return Ok(SparseSolution {
                    positions,
                    values,
                    residual: fit.residual,
                });
            }
            Err(e) => last_error = Some(e),
        }
    }
    Err(Error::DecodingFailure(format!(
        "no locator of degree {inferred}..={tau} passed the gates; last: {}",
        last_error.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// Output of [`RsCode::bounded_distance_decode`].
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub message: DVector<f64>,
    pub codeword: DVector<f64>,
    pub error_positions: Vec<usize>,
    pub error_values: Vec<f64>,
}

/// An `(n, k)` Reed-Solomon evaluation code over the reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RsCode {
    points: EvaluationPoints,
    dimension: usize,
}

impl RsCode {
    /// Roots-of-unity codes need odd `k`: the real basis pairs `+m` with `-m`.
    pub fn new(points: EvaluationPoints, dimension: usize) -> Result<Self> {
        let n = points.len();
        if dimension == 0 || dimension > n {
            return Err(Error::InvalidSpec(format!(
                "dimension {dimension} outside 1..={n}"
            )));
        }
        if matches!(points, EvaluationPoints::RootsOfUnity(_)) && dimension.is_multiple_of(2) {
            return Err(Error::InvalidSpec(format!(
                "roots-of-unity code needs odd dimension, got {dimension}"
            )));
        }
        Ok(Self { points, dimension })
    }

    pub fn points(&self) -> &EvaluationPoints {
        &self.points
    }

    pub fn length(&self) -> usize {
        self.points.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn min_distance(&self) -> usize {
        self.length() - self.dimension + 1
    }

    /// Errors correctable by bounded-distance decoding.
    pub fn capacity(&self) -> usize {
        (self.length() - self.dimension) / 2
    }

    /// `k x n`: monomials `a_j^i` for real points; rows `1, cos, sin` at
    /// frequencies `1..=(k-1)/2` for roots of unity.
    pub fn generator_matrix(&self) -> DMatrix<f64> {
        let k = self.dimension;
        match &self.points {
            EvaluationPoints::GenericReal(a) => {
                DMatrix::from_fn(k, a.len(), |i, j| a[j].powi(i as i32))
            }
            EvaluationPoints::RootsOfUnity(n) => {
                let freqs: Vec<usize> = (0..=(k - 1) / 2).collect();
                spectral_rows(*n, &freqs)
            }
        }
    }

    /// `eta_j = prod_{q != j} (a_j - a_q)^{-1}`, the column weights of the
    /// dual code. Empty for roots of unity.
    pub fn dual_weights(&self) -> Vec<f64> {
        match &self.points {
            EvaluationPoints::GenericReal(a) => (0..a.len())
                .map(|j| {
                    a.iter()
                        .enumerate()
                        .filter(|&(q, _)| q != j)
                        .map(|(_, &aq)| 1.0 / (a[j] - aq))
                        .product()
                })
                .collect(),
            EvaluationPoints::RootsOfUnity(_) => Vec::new(),
        }
    }

    /// Structured parity check: the generalized-RS dual `eta_j a_j^i`,
    /// `i < n - k`, or the DFT rows outside the code's band.
    pub fn syndrome_map(&self) -> SyndromeMap {
        let redundancy = self.length() - self.dimension;
        match &self.points {
            EvaluationPoints::GenericReal(a) => SyndromeMap::Weighted {
                points: a.clone(),
                weights: self.dual_weights(),
                rows: redundancy,
            },
            EvaluationPoints::RootsOfUnity(n) => {
                SyndromeMap::spectral_high(*n, (self.dimension - 1) / 2)
                    .expect("dimension <= n keeps the band inside the spectrum")
            }
        }
    }

    /// `(n - k) x n` matrix `P` with `P G^T = 0`, any `n - k` columns independent.
    pub fn parity_check_matrix(&self) -> Result<DMatrix<f64>> {
        if self.dimension == self.length() {
            return Err(Error::InvalidSpec(
                "a code with k = n has no parity checks".into(),
            ));
        }
        Ok(self.syndrome_map().matrix())
    }

    pub fn encode(&self, message: &DVector<f64>) -> Result<DVector<f64>> {
        if message.len() != self.dimension {
            return Err(Error::DimensionMismatch(format!(
                "message of length {} for dimension {}",
                message.len(),
                self.dimension
            )));
        }
        Ok(self.generator_matrix().tr_mul(message))
    }

    /// Corrects up to `max_errors` arbitrary-magnitude errors
    /// (`2 max_errors <= n - k`).
    ///
    /// Syndromes, locator, candidate search, least-squares error values, then
    /// the message is read back from the corrected word by least squares
    /// against the generator. Every stage is residual gated; more than
    /// `max_errors` errors surface as [`Error::DecodingFailure`] rather than a
    /// wrong codeword passing the gates.
    pub fn bounded_distance_decode(
        &self,
        received: &DVector<f64>,
        max_errors: usize,
        tol: &Tolerance,
    ) -> Result<Decoded> {
        let n = self.length();
        if received.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "received word of length {} for code length {n}",
                received.len()
            )));
        }
        if 2 * max_errors > n - self.dimension {
            return Err(Error::InvalidSpec(format!(
                "an ({n}, {}) code cannot correct {max_errors} errors",
                self.dimension
            )));
        }
        let mut codeword = received.clone();
        let mut solution = SparseSolution::empty();
        if self.dimension < n {
            let map = self.syndrome_map();
            let check = map.matrix();
            let syndrome = &check * received;
            let sums = map.power_sums_of_word(received.as_slice())?;
            let scale = map.syndrome_scale(&check, received.as_slice());
            solution = syndrome_decode(&map, &check, &syndrome, &sums, max_errors, scale, tol)?;
            for (&p, &v) in solution.positions.iter().zip(&solution.values) {
                codeword[p] -= v;
            }
        }
        let generator_t = self.generator_matrix().transpose();
        let all: Vec<usize> = (0..self.dimension).collect();
        let fit = solve_on_support(&generator_t, &all, &codeword, tol)?;
        if fit.residual > tol.residual_tol {
            return Err(Error::DecodingFailure(format!(
                "corrected word is not a codeword (relative residual {:e})",
                fit.residual
            )));
        }
        Ok(Decoded {
            message: fit.coefficients,
            codeword,
            error_positions: solution.positions,
            error_values: solution.values,
        })
    }
}
