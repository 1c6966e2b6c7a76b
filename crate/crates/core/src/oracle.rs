//! Brute-force checks of the claims the constructions rest on.
//!
//! Everything here enumerates subsets and is exponential; each routine takes
//! an explicit cap on the number of subset combinations and refuses with
//! [`Error::EnumerationCapExceeded`] instead of sampling.
//!
//! The norm conventions follow the isometry inequality as written without
//! squares, `(1 - delta) ||x|| <= ||H x|| <= (1 + delta) ||x||`, so
//! `delta_D` is `max(1 - sigma_min, sigma_max - 1)` over `D`-column
//! submatrices rather than the usual squared-norm constant.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{
    hamming_weight, inf_norm, null_vector, numerical_rank, singular_values, solve_on_support,
    Tolerance,
};
use crate::simulate::{random_sparse, ValueDistribution};
use crate::sparse::SparseVector;

/// Default bound on enumerated subset combinations.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// Two solutions closer than this (relative, sup norm) are the same solution.
const MERGE_TOL: f64 = 1e-6;

/// Evidence attached to a negative verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Nonzero `z` (unit sup norm) whose image is too sparse.
    Vector(DVector<f64>),
    /// Two vectors violating a pairwise condition.
    Pair(DVector<f64>, DVector<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub verdict: bool,
    pub witness: Option<Witness>,
    /// Check-specific number: the smallest image weight seen, a constant,
    /// or the largest observed distance.
    pub statistic: Option<f64>,
    pub enumeration_count: u64,
}

impl OracleReport {
    fn pass(statistic: Option<f64>, enumeration_count: u64) -> Self {
        Self {
            verdict: true,
            witness: None,
            statistic,
            enumeration_count,
        }
    }

    fn fail(witness: Witness, statistic: Option<f64>, enumeration_count: u64) -> Self {
        Self {
            verdict: false,
            witness: Some(witness),
            statistic,
            enumeration_count,
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn check_cap(requested: u128, cap: u64) -> Result<()> {
    if requested > cap as u128 {
        return Err(Error::EnumerationCapExceeded { requested, cap });
    }
    Ok(())
}

fn submatrix(h: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| h[(rows[i], cols[j])])
}

fn embed(n: usize, support: &[usize], values: &DVector<f64>) -> DVector<f64> {
    let mut z = DVector::zeros(n);
    for (&j, &v) in support.iter().zip(values.iter()) {
        z[j] = v;
    }
    z
}

fn unit_sup(mut z: DVector<f64>) -> DVector<f64> {
    let s = z.amax();
    if s > 0.0 {
        z /= s;
    }
    z
}

/// Exhaustive test of `||H z||_0 >= 2l + 1` for every nonzero `2t`-sparse `z`.
///
/// If some such `z` has `||H z||_0 <= 2l`, pad its support to a set `S` of
/// exactly `2t` columns and let `R` be any `r - 2l` rows where `H z`
/// vanishes; then `H[R, S] z_S = 0` with `z_S != 0`, so `H[R, S]` has rank
/// below `2t`. Conversely a rank-deficient `H[R, S]` has a null vector, which
/// extends by zeros to a `2t`-sparse `z` with `H z` vanishing on `R`, i.e.
/// weight at most `2l`. The property therefore holds iff every
/// `(r - 2l) x 2t` submatrix has numerical rank `2t`.
///
/// `C(n, 2t) * C(r, 2l)` submatrices are examined; on failure the witness is
/// the null vector of the first deficient one.
pub fn verify_cs_property(
    h: &DMatrix<f64>,
    t: usize,
    l: usize,
    cap: u64,
    tol: &Tolerance,
) -> Result<OracleReport> {
    let (r, n) = h.shape();
    if t == 0 || 2 * t > n {
        return Err(Error::InvalidSpec(format!("need 1 <= 2t <= n, got t = {t}, n = {n}")));
    }
    if r < 2 * l + 1 {
        return Err(Error::InvalidSpec(format!(
            "{r} rows cannot carry weight 2l + 1 = {}",
            2 * l + 1
        )));
    }
    let kept = r - 2 * l;
    check_cap(binomial(n, 2 * t) * binomial(r, kept), cap)?;
    let mut count = 0u64;
    for cols in (0..n).combinations(2 * t) {
        let h_s = submatrix(h, &(0..r).collect_vec(), &cols);
        for rows in (0..r).combinations(kept) {
            count += 1;
            let sub = submatrix(&h_s, &rows, &(0..2 * t).collect_vec());
            if numerical_rank(&sub, tol) < 2 * t {
                let z = unit_sup(embed(n, &cols, &null_vector(&sub).vector));
                let weight = hamming_weight((h * &z).as_slice(), tol);
                return Ok(OracleReport::fail(Witness::Vector(z), Some(weight as f64), count));
            }
        }
    }
    Ok(OracleReport::pass(None, count))
}

/// Samples pairs of distinct `t`-sparse vectors and checks
/// `||H x - H y||_0 >= 2l + 1` directly. The statistic is the smallest
/// weight observed.
pub fn pairwise_cs_check(
    h: &DMatrix<f64>,
    t: usize,
    l: usize,
    samples: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<OracleReport> {
    let n = h.ncols();
    if t == 0 || t > n {
        return Err(Error::InvalidSpec(format!("need 1 <= t <= n, got t = {t}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = ValueDistribution::default();
    let mut min_weight = usize::MAX;
    let mut count = 0u64;
    while count < samples as u64 {
        let wx = rng.random_range(0..=t);
        let wy = rng.random_range(0..=t);
        let x = random_sparse(n, wx, &dist, rng.random())?.to_dense();
        let y = random_sparse(n, wy, &dist, rng.random())?.to_dense();
        if x == y {
            continue;
        }
        count += 1;
        let weight = hamming_weight((h * (&x - &y)).as_slice(), tol);
        min_weight = min_weight.min(weight);
        if weight < 2 * l + 1 {
            return Ok(OracleReport::fail(Witness::Pair(x, y), Some(weight as f64), count));
        }
    }
    Ok(OracleReport::pass((count > 0).then_some(min_weight as f64), count))
}

/// Nonzero `z` on the first `2t` coordinates annihilated by the first
/// `2t - 1` rows of `H`, with the weight of `H z`.
///
/// Such a `z` always exists (`2t` unknowns, `2t - 1` equations), so
/// `||H z||_0 <= r - 2t + 1`; a matrix with `r < 2(t + l)` rows thus has an
/// image of weight at most `2l` and cannot be `(t, l)`-CS.
pub fn singleton_witness(
    h: &DMatrix<f64>,
    t: usize,
    tol: &Tolerance,
) -> Result<(DVector<f64>, usize)> {
    let (r, n) = h.shape();
    if t == 0 || n < 2 * t || r + 1 < 2 * t {
        return Err(Error::InvalidSpec(format!(
            "need t >= 1, n >= 2t and r >= 2t - 1 (r = {r}, n = {n}, t = {t})"
        )));
    }
    let cols = (0..2 * t).collect_vec();
    let head = submatrix(h, &(0..2 * t - 1).collect_vec(), &cols);
    let z = unit_sup(embed(n, &cols, &null_vector(&head).vector));
    let weight = hamming_weight((h * &z).as_slice(), tol);
    Ok((z, weight))
}

/// Every `(x, e)` with `wt(x) <= t`, `wt(e) <= l` and `s_hat = H x + e` to
/// relative residual `residual_tol`, by solving `[H_Sx | I_Se]` in least
/// squares for every pair of supports of size at most `t` and `l`.
///
/// Rank-deficient consistent systems have a line of solutions; both its
/// minimum-norm point and a second point along the null direction are
/// returned so that non-uniqueness is never hidden. Solutions whose `x`
/// agree to `1e-6` relative are merged.
pub fn brute_force_recover(
    h: &DMatrix<f64>,
    s_hat: &DVector<f64>,
    t: usize,
    l: usize,
    cap: u64,
    tol: &Tolerance,
) -> Result<Vec<(SparseVector, SparseVector)>> {
    let (r, n) = h.shape();
    if s_hat.len() != r {
        return Err(Error::DimensionMismatch(format!(
            "measurement of length {} for {r} rows",
            s_hat.len()
        )));
    }
    let x_supports: u128 = (0..=t.min(n)).map(|a| binomial(n, a)).sum();
    let e_supports: u128 = (0..=l.min(r)).map(|b| binomial(r, b)).sum();
    check_cap(x_supports * e_supports, cap)?;

    let mut found: Vec<(SparseVector, SparseVector)> = Vec::new();
    for a in 0..=t.min(n) {
        for sx in (0..n).combinations(a) {
            for b in 0..=l.min(r) {
                for se in (0..r).combinations(b) {
                    let joint = DMatrix::from_fn(r, a + b, |i, j| {
                        if j < a {
                            h[(i, sx[j])]
                        } else if i == se[j - a] {
                            1.0
                        } else {
                            0.0
                        }
                    });
                    let columns = (0..a + b).collect_vec();
                    for c in joint_solutions(&joint, &columns, s_hat, tol)? {
                        let x = SparseVector::from_dense(
                            embed(n, &sx, &c.rows(0, a).into_owned()).as_slice(),
                            tol,
                        );
                        let e = SparseVector::from_dense(
                            embed(r, &se, &c.rows(a, b).into_owned()).as_slice(),
                            tol,
                        );
                        merge(&mut found, x, e);
                    }
                }
            }
        }
    }
    Ok(found)
}

fn joint_solutions(
    joint: &DMatrix<f64>,
    columns: &[usize],
    b: &DVector<f64>,
    tol: &Tolerance,
) -> Result<Vec<DVector<f64>>> {
    match solve_on_support(joint, columns, b, tol) {
        Ok(fit) if fit.residual <= tol.residual_tol => Ok(vec![fit.coefficients]),
        Ok(_) => Ok(Vec::new()),
        Err(Error::RankDeficient { .. }) => {
            let svd = joint.clone().svd(true, true);
            let eps = tol.rank_tol * svd.singular_values.max();
            let c = svd.solve(b, eps).map_err(|e| Error::DecodingFailure(e.into()))?;
            let residual = (b - joint * &c).norm() / b.norm().max(1.0);
            if residual > tol.residual_tol {
                return Ok(Vec::new());
            }
            let direction = null_vector(joint).vector;
            let shift = c.amax().max(1.0);
            Ok(vec![c.clone(), c + direction * shift])
        }
        Err(e) => Err(e),
    }
}

fn merge(found: &mut Vec<(SparseVector, SparseVector)>, x: SparseVector, e: SparseVector) {
    let xd = x.to_dense();
    let same = found.iter().any(|(y, _)| {
        let yd = y.to_dense();
        (&xd - &yd).amax() <= MERGE_TOL * xd.amax().max(yd.amax()).max(1.0)
    });
    if !same {
        found.push((x, e));
    }
}

/// Extremes of the singular values of `D`-column submatrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantScan {
    /// `min_S sigma_min(H[:, S])`: the extension constant `lambda_D`.
    pub lambda: f64,
    /// Support attaining `lambda`.
    pub lambda_support: Vec<usize>,
    /// `max_S max(1 - sigma_min, sigma_max - 1)`: the isometry constant `delta_D`.
    pub delta: f64,
    pub enumeration_count: u64,
}

/// Scans all `C(n, D)` column subsets once for both constants.
pub fn scan_constants(h: &DMatrix<f64>, d: usize, cap: u64) -> Result<ConstantScan> {
    let (r, n) = h.shape();
    if d == 0 || d > n {
        return Err(Error::InvalidSpec(format!("need 1 <= D <= n, got D = {d}, n = {n}")));
    }
    check_cap(binomial(n, d), cap)?;
    let all_rows = (0..r).collect_vec();
    let mut scan = ConstantScan {
        lambda: f64::INFINITY,
        lambda_support: Vec::new(),
        delta: 0.0,
        enumeration_count: 0,
    };
    for cols in (0..n).combinations(d) {
        scan.enumeration_count += 1;
        let sv = singular_values(&submatrix(h, &all_rows, &cols));
        let sigma_max = sv.max();
        // fewer rows than columns leaves a zero singular value
        let sigma_min = if d > r { 0.0 } else { sv.min() };
        if sigma_min < scan.lambda {
            scan.lambda = sigma_min;
            scan.lambda_support = cols.clone();
        }
        scan.delta = scan.delta.max(1.0 - sigma_min).max(sigma_max - 1.0);
    }
    Ok(scan)
}

/// Largest `lambda` with `lambda ||x||_2 <= ||H x||_2` for all `D`-sparse `x`.
pub fn extension_constant(h: &DMatrix<f64>, d: usize, cap: u64) -> Result<f64> {
    Ok(scan_constants(h, d, cap)?.lambda)
}

/// Smallest `delta` with `(1 - delta) ||x|| <= ||H x|| <= (1 + delta) ||x||`
/// for all `D`-sparse `x` (norms not squared).
pub fn isometry_constant(h: &DMatrix<f64>, d: usize, cap: u64) -> Result<f64> {
    Ok(scan_constants(h, d, cap)?.delta)
}

/// Checks `||x - x'||_2 <= 2 eps / lambda_2t` for `t`-sparse `x, x'` both
/// consistent with `s_hat = H x + w`, `||w||_2 = eps`.
///
/// For a support `S` the consistent `x'` form the ellipsoid
/// `||s_hat - H_S c||_2 <= eps` around the least-squares point; its points
/// farthest from the centre lie along the smallest right singular vector of
/// `H_S`. Those two extremes (and the centre) of every support, together with
/// the true `x`, are compared pairwise. The statistic is the largest distance
/// divided by the bound.
pub fn proximity_bound_check(
    h: &DMatrix<f64>,
    t: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
    cap: u64,
    tol: &Tolerance,
) -> Result<OracleReport> {
    let (r, n) = h.shape();
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidSpec(format!("bad noise level {epsilon}")));
    }
    let lambda = extension_constant(h, (2 * t).min(n), cap)?;
    if lambda <= 0.0 {
        return Err(Error::InvalidSpec("extension constant is zero".into()));
    }
    let supports: u128 = (0..=t.min(n)).map(|a| binomial(n, a)).sum();
    check_cap(supports * trials as u128, cap)?;
    let bound = 2.0 * epsilon / lambda;
    // absolute floating-point slack on top of the bound
    let slack = 1e-9 * (1.0 + bound);
    let dist = ValueDistribution::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut count = 0u64;
    for _ in 0..trials {
        let x = random_sparse(n, t.min(n), &dist, rng.random())?.to_dense();
        let direction = DVector::from_fn(r, |_, _| rng.random_range(-1.0..=1.0));
        let noise = if direction.norm() > 0.0 {
            &direction * (epsilon / direction.norm())
        } else {
            DVector::zeros(r)
        };
        let s_hat = h * &x + noise;
        let floor = tol.residual_tol * s_hat.norm().max(1.0);

        let mut consistent = vec![x.clone()];
        for a in 0..=t.min(n) {
            for cols in (0..n).combinations(a) {
                count += 1;
                if a == 0 {
                    if s_hat.norm() <= epsilon + floor {
                        consistent.push(DVector::zeros(n));
                    }
                    continue;
                }
                let h_s = submatrix(h, &(0..r).collect_vec(), &cols);
                let svd = h_s.clone().svd(true, true);
                let sigma = &svd.singular_values;
                let (imin, &smin) = sigma
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .expect("nonempty support");
                if smin <= tol.rank_tol * sigma.max() || a > r {
                    // an unbounded consistent set cannot respect any bound
                    return Err(Error::RankDeficient {
                        rank: numerical_rank(&h_s, tol),
                        columns: a,
                    });
                }
                let c = svd
                    .solve(&s_hat, 0.0)
                    .map_err(|e| Error::DecodingFailure(e.into()))?;
                let rho = (&s_hat - &h_s * &c).norm();
                if rho > epsilon + floor {
                    continue;
                }
                let radius = (epsilon * epsilon - rho * rho).max(0.0).sqrt() / smin;
                let v_t = svd.v_t.as_ref().expect("requested");
                let v = v_t.row(imin).transpose();
                for step in [0.0, radius, -radius] {
                    consistent.push(embed(n, &cols, &(&c + &v * step)));
                }
            }
        }
        for (a, b) in consistent.iter().tuple_combinations() {
            let d = (a - b).norm();
            worst = worst.max(d);
            if d > bound + slack {
                return Ok(OracleReport::fail(
                    Witness::Pair(a.clone(), b.clone()),
                    Some(d / bound),
                    count,
                ));
            }
        }
    }
    let ratio = if bound > 0.0 { worst / bound } else { worst };
    Ok(OracleReport::pass(Some(ratio), count))
}

/// Relative sup-norm distance, used to compare oracle and decoder outputs.
pub fn relative_gap(a: &SparseVector, b: &SparseVector) -> f64 {
    let da = a.to_dense();
    let db = b.to_dense();
    (&da - &db).amax() / inf_norm(da.as_slice()).max(inf_norm(db.as_slice())).max(1.0)
}
