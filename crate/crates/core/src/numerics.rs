//! Dense real/complex primitives and the tolerance policy.
//!
//! Every zero test, rank decision and residual gate in the crate goes through
//! this module, so that a single [`Tolerance`] controls how exact-arithmetic
//! statements ("this entry is nonzero", "these columns are independent") are
//! decided in floating point.

use std::cell::RefCell;
use std::f64::consts::PI;

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Thresholds used for approximate decisions.
///
/// * `zero_tol`: an entry is zero when `|v_i| <= zero_tol * max(1, ||v||_inf)`.
/// * `rank_tol`: singular values below `rank_tol * sigma_max` count as zero.
/// * `residual_tol`: a candidate is accepted when its relative residual is at
///   most `residual_tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub zero_tol: f64,
    pub rank_tol: f64,
    pub residual_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            zero_tol: 1e-8,
            rank_tol: 1e-9,
            residual_tol: 1e-7,
        }
    }
}

impl Tolerance {
    pub fn new(zero_tol: f64, rank_tol: f64, residual_tol: f64) -> Result<Self> {
        let tol = Self {
            zero_tol,
            rank_tol,
            residual_tol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("zero_tol", self.zero_tol),
            ("rank_tol", self.rank_tol),
            ("residual_tol", self.residual_tol),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} = {value} must lie in (0, 1)"
                )));
            }
        }
        Ok(())
    }

    /// True when `value` is zero relative to `scale` (floored at 1).
    pub fn is_zero(&self, value: f64, scale: f64) -> bool {
        value.abs() <= self.zero_tol * scale.max(1.0)
    }
}

/// Anything with an absolute value; lets the zero tests run on real and
/// complex data alike.
pub trait Magnitude: Copy {
    fn magnitude(self) -> f64;
}

impl Magnitude for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Magnitude for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

pub fn inf_norm<T: Magnitude>(v: &[T]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.magnitude()))
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Indices of the entries that are nonzero under the scale-aware zero test.
pub fn support_of<T: Magnitude>(v: &[T], tol: &Tolerance) -> Vec<usize> {
    let scale = inf_norm(v);
    v.iter()
        .enumerate()
        .filter(|(_, x)| !tol.is_zero(x.magnitude(), scale))
        .map(|(i, _)| i)
        .collect()
}

/// Number of entries with `|v_i| > zero_tol * max(1, ||v||_inf)`.
pub fn hamming_weight<T: Magnitude>(v: &[T], tol: &Tolerance) -> usize {
    support_of(v, tol).len()
}

pub fn singular_values<T>(m: &DMatrix<T>) -> DVector<f64>
where
    T: ComplexField<RealField = f64>,
{
    if m.is_empty() {
        return DVector::zeros(0);
    }
    m.clone().singular_values()
}

/// Number of singular values above `rank_tol * sigma_max`; 0 for the zero matrix.
pub fn numerical_rank<T>(m: &DMatrix<T>, tol: &Tolerance) -> usize
where
    T: ComplexField<RealField = f64>,
{
    let sv = singular_values(m);
    let sigma_max = sv.iter().cloned().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol.rank_tol * sigma_max).count()
}

/// A unit vector minimizing `||M v||_2`, with the extreme singular values of `M`.
#[derive(Debug, Clone)]
pub struct NullVector<T: ComplexField<RealField = f64>> {
    pub vector: DVector<T>,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Right singular vector of the smallest singular value.
///
/// Wide matrices are padded with zero rows first, since a thin SVD would
/// drop exactly the null directions we are after.
pub fn null_vector<T>(m: &DMatrix<T>) -> NullVector<T>
where
    T: ComplexField<RealField = f64>,
{
    let (rows, cols) = m.shape();
    assert!(cols > 0, "null_vector of a matrix without columns");
    let square = if rows < cols {
        let mut padded = DMatrix::<T>::zeros(cols, cols);
        padded.view_mut((0, 0), (rows, cols)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let (idx, sigma_min) = svd
        .singular_values
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, s)| if s < best.1 { (i, s) } else { best });
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    NullVector {
        vector: v_t.row(idx).adjoint(),
        sigma_min,
        sigma_max,
    }
}

/// Least-squares fit of `b` against a column subset.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    /// One coefficient per selected column, in the order given.
    pub coefficients: DVector<f64>,
    /// `||b - M_S c||_2 / max(1, ||b||_2)`.
    pub residual: f64,
}

/// Solves `min ||b - M[:, columns] c||_2`.
///
/// Fails with [`Error::RankDeficient`] when the selected columns are not
/// numerically independent.
pub fn solve_on_support(
    m: &DMatrix<f64>,
    columns: &[usize],
    b: &DVector<f64>,
    tol: &Tolerance,
) -> Result<LeastSquares> {
    if b.len() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            m.nrows()
        )));
    }
    if let Some(&bad) = columns.iter().find(|&&c| c >= m.ncols()) {
        return Err(Error::DimensionMismatch(format!(
            "column {bad} out of range for {} columns",
            m.ncols()
        )));
    }
    if columns.len() > m.nrows() {
        return Err(Error::RankDeficient {
            rank: m.nrows(),
            columns: columns.len(),
        });
    }
    let b_norm = b.norm();
    if columns.is_empty() {
        return Ok(LeastSquares {
            coefficients: DVector::zeros(0),
            residual: b_norm / b_norm.max(1.0),
        });
    }
    let sub = m.select_columns(columns);
    let rank = numerical_rank(&sub, tol);
    if rank < columns.len() {
        return Err(Error::RankDeficient {
            rank,
            columns: columns.len(),
        });
    }
    let coefficients = sub
        .clone()
        .svd(true, true)
        .solve(b, 0.0)
        .expect("both singular vector sets were computed");
    let residual = (b - &sub * &coefficients).norm() / b_norm.max(1.0);
    Ok(LeastSquares {
        coefficients,
        residual,
    })
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `sum_p v_p exp(-2 pi i m p / n)` for each requested frequency `m`,
/// computed with one length-`n` FFT.
///
/// Frequencies are taken modulo `n`, so both signed and unsigned indexing work.
pub fn dft_at_frequencies<T>(v: &[T], freqs: &[i64], n: usize) -> Result<Vec<Complex64>>
where
    T: Copy + Into<Complex64>,
{
    if v.len() != n || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "dft of a length-{} vector at transform length {n}",
            v.len()
        )));
    }
    let mut buffer: Vec<Complex64> = v.iter().map(|&x| x.into()).collect();
    PLANNER.with(|planner| {
        let fft = planner.borrow_mut().plan_fft_forward(n);
        fft.process(&mut buffer);
    });
    Ok(freqs
        .iter()
        .map(|&m| buffer[m.rem_euclid(n as i64) as usize])
        .collect())
}

/// Direct O(n * |freqs|) evaluation of the same sums as [`dft_at_frequencies`].
pub fn naive_dft<T>(v: &[T], freqs: &[i64], n: usize) -> Vec<Complex64>
where
    T: Copy + Into<Complex64>,
{
    freqs
        .iter()
        .map(|&m| {
            v.iter()
                .enumerate()
                .map(|(p, &x)| {
                    let phase = (m * p as i64).rem_euclid(n as i64) as f64;
                    x.into() * Complex64::from_polar(1.0, -2.0 * PI * phase / n as f64)
                })
                .sum()
        })
        .collect()
}
