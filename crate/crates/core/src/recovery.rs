//! Two-stage recovery of a `t`-sparse `x` from `s_hat = H x + e`, `wt(e) <= l`.
//!
//! `H x = G^T (H_inner x)` is a codeword of the outer code, so `s_hat` is
//! that codeword plus `l` gross errors. Stage one decodes the outer code and
//! reads the inner syndrome `u = H_inner x` off the first `r_inner`
//! coordinates of the corrected word (`G` is systematic). Stage two
//! syndrome-decodes `u` to the sparse `x`. A final check requires
//! `s_hat - H x_hat` to vanish outside the corrected positions.

use std::fmt;
use std::time::{Duration, Instant};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::numerics::{inf_norm, l2_norm, solve_on_support, Tolerance};
use crate::rs_code::syndrome_decode;
use crate::sensing_matrix::CsMatrix;
use crate::simulate::{instance, TrialConfig};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Outer,
    Inner,
    Consistency,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Outer => "outer",
            Stage::Inner => "inner",
            Stage::Consistency => "consistency",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Success,
    DecodingFailure { stage: Stage, diagnostic: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub x_hat: SparseVector,
    /// Corrected inner syndrome.
    pub u: DVector<f64>,
    pub outer_error_positions: Vec<usize>,
    pub outer_error_values: Vec<f64>,
    pub status: Status,
    /// `||s_hat - H x_hat||_2` off the outer error positions, relative to
    /// `max(1, ||s_hat||_2)` over the same positions.
    pub residual: f64,
}

impl RecoveryResult {
    pub fn is_success(&self) -> bool {
        self.status == Status::Success
    }

    fn failed(m: &CsMatrix, stage: Stage, err: Error) -> Self {
        Self {
            x_hat: SparseVector::zeros(m.n()),
            u: DVector::zeros(m.inner_rows()),
            outer_error_positions: Vec::new(),
            outer_error_values: Vec::new(),
            status: Status::DecodingFailure {
                stage,
                diagnostic: err.to_string(),
            },
            residual: f64::INFINITY,
        }
    }
}

/// Result of decoding the outer code.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterDecoded {
    pub codeword: DVector<f64>,
    pub u: DVector<f64>,
    pub error_positions: Vec<usize>,
    pub error_values: Vec<f64>,
}

/// Corrects up to `l` gross errors in `s_hat` and returns the inner syndrome.
pub fn outer_decode(m: &CsMatrix, s_hat: &DVector<f64>, tol: &Tolerance) -> Result<OuterDecoded> {
    let map = m.outer_map();
    let check = m.outer_check();
    let syndrome = check * s_hat;
    let sums = map.power_sums_of_word(s_hat.as_slice())?;
    let scale = map.syndrome_scale(check, s_hat.as_slice());
    let found = syndrome_decode(map, check, &syndrome, &sums, m.l(), scale, tol)?;
    let mut codeword = s_hat.clone();
    for (&p, &v) in found.positions.iter().zip(&found.values) {
        codeword[p] -= v;
    }
    let u = systematic_message(m, &codeword, tol)?;
    Ok(OuterDecoded {
        codeword,
        u,
        error_positions: found.positions,
        error_values: found.values,
    })
}

/// Message of an outer codeword: its leading coordinates when `G` is
/// systematic, otherwise a residual-gated least-squares solve of `G^T u = c`.
fn systematic_message(m: &CsMatrix, codeword: &DVector<f64>, tol: &Tolerance) -> Result<DVector<f64>> {
    let g = m.outer_generator();
    let k = g.nrows();
    if g.columns(0, k).into_owned() == nalgebra::DMatrix::identity(k, k) {
        return Ok(codeword.rows(0, k).into_owned());
    }
    let columns: Vec<usize> = (0..k).collect();
    let fit = solve_on_support(&g.transpose(), &columns, codeword, tol)?;
    if fit.residual > tol.residual_tol {
        return Err(Error::DecodingFailure(format!(
            "corrected word is not an outer codeword (residual {:e})",
            fit.residual
        )));
    }
    Ok(fit.coefficients)
}

/// Sparsest `x` (at most `t` nonzeros) with `H_inner x = u`.
pub fn inner_syndrome_decode(m: &CsMatrix, u: &DVector<f64>, tol: &Tolerance) -> Result<SparseVector> {
    inner_decode_scaled(m, u, inf_norm(u.as_slice()), tol)
}

fn inner_decode_scaled(
    m: &CsMatrix,
    u: &DVector<f64>,
    scale: f64,
    tol: &Tolerance,
) -> Result<SparseVector> {
    if u.len() != m.inner_rows() {
        return Err(Error::DimensionMismatch(format!(
            "inner syndrome of length {} for {} inner rows",
            u.len(),
            m.inner_rows()
        )));
    }
    let map = m.inner_map();
    let sums = map.power_sums(u.as_slice())?;
    let found = syndrome_decode(map, m.inner(), u, &sums, m.t(), scale, tol)?;
    SparseVector::new(m.n(), found.positions, found.values)
}

/// Runs both stages and the end-to-end residual check. Decoding problems are
/// reported in [`RecoveryResult::status`]; `Err` is reserved for malformed
/// input.
pub fn recover(m: &CsMatrix, s_hat: &DVector<f64>, tol: &Tolerance) -> Result<RecoveryResult> {
    tol.validate()?;
    if s_hat.len() != m.r() {
        return Err(Error::DimensionMismatch(format!(
            "measurement of length {} for a matrix with {} rows",
            s_hat.len(),
            m.r()
        )));
    }
    if s_hat.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSpec("measurement has non-finite entries".into()));
    }
    let outer = match outer_decode(m, s_hat, tol) {
        Ok(o) => o,
        Err(e) => return Ok(RecoveryResult::failed(m, Stage::Outer, e)),
    };
    let scale = inf_norm(outer.u.as_slice()).max(tol.zero_tol * inf_norm(s_hat.as_slice()));
    let x_hat = match inner_decode_scaled(m, &outer.u, scale, tol) {
        Ok(x) => x,
        Err(e) => {
            let mut failed = RecoveryResult::failed(m, Stage::Inner, e);
            failed.u = outer.u;
            failed.outer_error_positions = outer.error_positions;
            failed.outer_error_values = outer.error_values;
            return Ok(failed);
        }
    };

    let mut diff = s_hat.clone();
    for (j, v) in x_hat.iter() {
        diff.axpy(-v, &m.h().column(j), 1.0);
    }
    let off: Vec<usize> = (0..m.r())
        .filter(|i| !outer.error_positions.contains(i))
        .collect();
    let off_diff: Vec<f64> = off.iter().map(|&i| diff[i]).collect();
    let off_s: Vec<f64> = off.iter().map(|&i| s_hat[i]).collect();
    let residual = l2_norm(&off_diff) / l2_norm(&off_s).max(1.0);
    let status = if residual <= tol.residual_tol {
        Status::Success
    } else {
        Status::DecodingFailure {
            stage: Stage::Consistency,
            diagnostic: format!(
                "measurements off the corrected positions leave relative residual {residual:e}"
            ),
        }
    };
    Ok(RecoveryResult {
        x_hat,
        u: outer.u,
        outer_error_positions: outer.error_positions,
        outer_error_values: outer.error_values,
        status,
        residual,
    })
}

/// [`recover`] plus its wall-clock time.
pub fn recover_timed(
    m: &CsMatrix,
    s_hat: &DVector<f64>,
    tol: &Tolerance,
) -> Result<(RecoveryResult, Duration)> {
    let start = Instant::now();
    let result = recover(m, s_hat, tol)?;
    Ok((result, start.elapsed()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub n: usize,
    pub trials: usize,
    pub median_micros: f64,
    pub successes: usize,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Median wall time of [`recover`] over random in-budget instances, one row
/// per matrix (in the given order).
pub fn decode_complexity_probe(
    matrices: &[CsMatrix],
    trials: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<Vec<ProbeRow>> {
    if trials == 0 {
        return Err(Error::InvalidSpec("complexity probe needs at least one trial".into()));
    }
    matrices
        .iter()
        .map(|m| {
            let spec = m.spec();
            let mut config = TrialConfig::new(spec.n, spec.t, spec.l, spec.variant);
            config.base_seed = seed;
            let mut times = Vec::with_capacity(trials);
            let mut successes = 0;
            for trial in 0..trials {
                let inst = instance(&config, m, trial)?;
                let (result, elapsed) = recover_timed(m, &inst.measurement.s_hat, tol)?;
                successes += usize::from(result.is_success());
                times.push(elapsed.as_secs_f64() * 1e6);
            }
            Ok(ProbeRow {
                n: spec.n,
                trials,
                median_micros: median(&mut times),
                successes,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing_matrix::{build, CsMatrixSpec, Variant};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn matrix(n: usize, t: usize, l: usize, variant: Variant) -> CsMatrix {
        build(&CsMatrixSpec::new(n, t, l, variant)).unwrap()
    }

    #[test]
    fn zero_measurement() {
        for variant in [Variant::GenericRs, Variant::CyclicFourier] {
            let m = matrix(8, 1, 1, variant);
            let res = recover(&m, &DVector::zeros(m.r()), &tol()).unwrap();
            assert!(res.is_success());
            assert_eq!(res.x_hat.weight(), 0);
            assert!(res.outer_error_positions.is_empty());
        }
    }

    #[test]
    fn single_spike_without_errors() {
        let m = matrix(8, 1, 1, Variant::GenericRs);
        let x = SparseVector::new(8, vec![3], vec![7.0]).unwrap();
        let s = m.measure(&x, &SparseVector::zeros(4), None).unwrap();
        let res = recover(&m, &s.s_hat, &tol()).unwrap();
        assert!(res.is_success(), "{:?}", res.status);
        assert!(res.x_hat.approx_eq(&x, 1e-9));
        assert!(res.outer_error_positions.is_empty());
    }

    #[test]
    fn inner_decode_on_toy_points() {
        // inner points (0, 1, 2, 3): spike 5 at point 2 gives u = (5, 10)
        let spec = CsMatrixSpec::new(4, 1, 1, Variant::GenericRs)
            .with_inner_points(vec![0.0, 1.0, 2.0, 3.0]);
        let m = build(&spec).unwrap();
        let x = inner_syndrome_decode(&m, &DVector::from_vec(vec![5.0, 10.0]), &tol()).unwrap();
        assert_eq!(x.support(), &[2]);
        assert!((x.values()[0] - 5.0).abs() < 1e-12);
        let zero = inner_syndrome_decode(&m, &DVector::zeros(2), &tol()).unwrap();
        assert_eq!(zero.weight(), 0);
    }

    #[test]
    fn signal_and_gross_errors() {
        for variant in [Variant::GenericRs, Variant::CyclicFourier] {
            let m = matrix(16, 2, 2, variant);
            let x = SparseVector::new(16, vec![4, 11], vec![-3.0, 0.25]).unwrap();
            let e = SparseVector::new(m.r(), vec![0, 5], vec![100.0, -0.7]).unwrap();
            let s = m.measure(&x, &e, None).unwrap();
            let res = recover(&m, &s.s_hat, &tol()).unwrap();
            assert!(res.is_success(), "{variant}: {:?}", res.status);
            assert!(res.x_hat.approx_eq(&x, 1e-9));
            assert_eq!(res.outer_error_positions, vec![0, 5]);
            let u = m.inner() * x.to_dense();
            assert!((res.u.clone() - u).amax() < 1e-8);
        }
    }

    #[test]
    fn over_budget_signal_fails_inner_or_consistency() {
        let m = matrix(12, 1, 1, Variant::GenericRs);
        let x = SparseVector::new(12, vec![1, 6, 9], vec![1.0, 2.0, -1.5]).unwrap();
        let s = m.measure(&x, &SparseVector::zeros(4), None).unwrap();
        let res = recover(&m, &s.s_hat, &tol()).unwrap();
        assert!(!res.is_success());
    }

    #[test]
    fn wrong_length_is_an_error() {
        let m = matrix(8, 1, 1, Variant::GenericRs);
        assert!(recover(&m, &DVector::zeros(5), &tol()).is_err());
        assert!(inner_syndrome_decode(&m, &DVector::zeros(3), &tol()).is_err());
    }

    #[test]
    fn probe_contract() {
        let ms = [matrix(8, 1, 1, Variant::GenericRs), matrix(16, 1, 1, Variant::GenericRs)];
        assert!(decode_complexity_probe(&ms, 0, 1, &tol()).is_err());
        let rows = decode_complexity_probe(&ms, 3, 1, &tol()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].n, 16);
        assert!(rows.iter().all(|r| r.successes == 3 && r.median_micros > 0.0));
    }
}
