//! Seeded random instances and trial batches.
//!
//! Trial `i` of a batch draws everything from `ChaCha8Rng::seed_from_u64(base_seed + i)`,
//! so any single trial can be replayed on its own.

use std::str::FromStr;

use nalgebra::DVector;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::Tolerance;
use crate::recovery::{recover_timed, Stage, Status};
use crate::sensing_matrix::{CsMatrix, Measurement, Variant};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueDistribution {
    /// Magnitude uniform on `[min, max]`, random sign.
    Uniform { min: f64, max: f64 },
    /// `+1` or `-1` with equal probability.
    UnitSign,
}

impl Default for ValueDistribution {
    fn default() -> Self {
        ValueDistribution::Uniform { min: 0.1, max: 10.0 }
    }
}

impl ValueDistribution {
    pub fn min_magnitude(&self) -> f64 {
        match self {
            ValueDistribution::Uniform { min, .. } => *min,
            ValueDistribution::UnitSign => 1.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let magnitude = match self {
            ValueDistribution::Uniform { min, max } => rng.random_range(*min..=*max),
            ValueDistribution::UnitSign => 1.0,
        };
        if rng.random_bool(0.5) {
            magnitude
        } else {
            -magnitude
        }
    }
}

impl FromStr for ValueDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::default()),
            "unit" => Ok(ValueDistribution::UnitSign),
            other => Err(Error::InvalidSpec(format!(
                "unknown value distribution `{other}` (expected uniform or unit)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub n: usize,
    pub t: usize,
    pub l: usize,
    pub variant: Variant,
    pub value_distribution: ValueDistribution,
    /// Dense noise is drawn with `||noise||_2 <= dense_noise_eps`.
    pub dense_noise_eps: f64,
    pub trials: usize,
    pub base_seed: u64,
    /// Nonzeros in `x`; defaults to `t`.
    pub signal_weight: Option<usize>,
    /// Gross errors in `e`; defaults to `l`. Values above `l` exercise the gates.
    pub error_weight: Option<usize>,
}

impl TrialConfig {
    pub fn new(n: usize, t: usize, l: usize, variant: Variant) -> Self {
        Self {
            n,
            t,
            l,
            variant,
            value_distribution: ValueDistribution::default(),
            dense_noise_eps: 0.0,
            trials: 1,
            base_seed: 0,
            signal_weight: None,
            error_weight: None,
        }
    }

    pub fn signal_weight(&self) -> usize {
        self.signal_weight.unwrap_or(self.t)
    }

    pub fn error_weight(&self) -> usize {
        self.error_weight.unwrap_or(self.l)
    }

    pub fn validate(&self, m: &CsMatrix, tol: &Tolerance) -> Result<()> {
        let spec = m.spec();
        if (spec.n, spec.t, spec.l, spec.variant) != (self.n, self.t, self.l, self.variant) {
            return Err(Error::InvalidSpec(format!(
                "trial config (n={}, t={}, l={}, {}) does not match the matrix (n={}, t={}, l={}, {})",
                self.n, self.t, self.l, self.variant, spec.n, spec.t, spec.l, spec.variant
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidSpec("at least one trial is required".into()));
        }
        if self.signal_weight() > self.n || self.error_weight() > m.r() {
            return Err(Error::InvalidSpec("requested weight exceeds the vector length".into()));
        }
        if let ValueDistribution::Uniform { min, max } = self.value_distribution {
            if !(min <= max && min.is_finite() && max.is_finite()) {
                return Err(Error::InvalidSpec(format!("bad magnitude range [{min}, {max}]")));
            }
        }
        if self.value_distribution.min_magnitude() < 10.0 * tol.zero_tol {
            return Err(Error::InvalidSpec(
                "value magnitudes must stay at least 10 * zero_tol away from zero".into(),
            ));
        }
        if !(self.dense_noise_eps >= 0.0 && self.dense_noise_eps.is_finite()) {
            return Err(Error::InvalidSpec("dense_noise_eps must be finite and nonnegative".into()));
        }
        Ok(())
    }

    pub fn seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }
}

fn sparse_from_rng<R: Rng + ?Sized>(
    rng: &mut R,
    length: usize,
    weight: usize,
    distribution: &ValueDistribution,
) -> Result<SparseVector> {
    if weight > length {
        return Err(Error::InvalidSpec(format!(
            "weight {weight} exceeds length {length}"
        )));
    }
    let mut support = sample(rng, length, weight).into_vec();
    support.sort_unstable();
    let values = (0..weight).map(|_| distribution.sample(rng)).collect();
    SparseVector::new(length, support, values)
}

/// Uniformly random support of exactly `weight` indices with i.i.d. values.
pub fn random_sparse(
    length: usize,
    weight: usize,
    distribution: &ValueDistribution,
    seed: u64,
) -> Result<SparseVector> {
    sparse_from_rng(&mut ChaCha8Rng::seed_from_u64(seed), length, weight, distribution)
}

/// A uniformly random direction scaled to a norm uniform on `[0, eps]`.
pub fn random_noise<R: Rng + ?Sized>(rng: &mut R, length: usize, eps: f64) -> DVector<f64> {
    let v = DVector::from_fn(length, |_, _| rng.random_range(-1.0..=1.0));
    let norm = v.norm();
    if eps == 0.0 || norm == 0.0 {
        return DVector::zeros(length);
    }
    v * (eps * rng.random::<f64>() / norm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub seed: u64,
    pub noise: Option<DVector<f64>>,
    pub measurement: Measurement,
}

impl Instance {
    pub fn x(&self) -> &SparseVector {
        self.measurement.x.as_ref().expect("simulated instances record x")
    }

    pub fn e(&self) -> &SparseVector {
        self.measurement.e.as_ref().expect("simulated instances record e")
    }
}

/// The instance of trial `trial`.
pub fn instance(config: &TrialConfig, m: &CsMatrix, trial: usize) -> Result<Instance> {
    let seed = config.seed(trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = &config.value_distribution;
    let x = sparse_from_rng(&mut rng, m.n(), config.signal_weight(), dist)?;
    let e = sparse_from_rng(&mut rng, m.r(), config.error_weight(), dist)?;
    let noise = (config.dense_noise_eps > 0.0)
        .then(|| random_noise(&mut rng, m.r(), config.dense_noise_eps));
    let measurement = m.measure(&x, &e, noise.as_ref())?;
    Ok(Instance {
        seed,
        noise,
        measurement,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    /// Decoder reported success and `x_hat` equals `x` to `1e-6` relative.
    pub success: bool,
    pub residual: f64,
    /// Outer error positions equal the injected error support.
    pub outer_ok: bool,
    pub failed_stage: Option<Stage>,
    pub decode_micros: u64,
}

/// Relative accuracy demanded of a recovered signal.
pub const RECOVERY_ACCURACY: f64 = 1e-6;

/// Runs every trial of the batch, in order.
pub fn run_trials(config: &TrialConfig, m: &CsMatrix, tol: &Tolerance) -> Result<Vec<TrialRecord>> {
    config.validate(m, tol)?;
    (0..config.trials)
        .map(|trial| {
            let inst = instance(config, m, trial)?;
            let (result, elapsed) = recover_timed(m, &inst.measurement.s_hat, tol)?;
            let decoded = result.is_success();
            Ok(TrialRecord {
                trial,
                seed: inst.seed,
                success: decoded && result.x_hat.approx_eq(inst.x(), RECOVERY_ACCURACY),
                residual: result.residual,
                outer_ok: decoded && result.outer_error_positions == inst.e().support(),
                failed_stage: match result.status {
                    Status::Success => None,
                    Status::DecodingFailure { stage, .. } => Some(stage),
                },
                decode_micros: elapsed.as_micros() as u64,
            })
        })
        .collect()
}
