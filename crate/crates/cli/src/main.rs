//! `dscs`: build sensing matrices, simulate and recover measurements, run
//! the brute-force oracles and benchmark the decoder.
//!
//! Exit codes: 0 success (or a true verdict), 1 decoding failure (or a false
//! verdict), 2 usage or input error, 3 enumeration cap exceeded.

mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use dscs::format::Document;
use dscs::oracle::{self, OracleReport, Witness, DEFAULT_CAP};
use dscs::recovery::{recover, RecoveryResult, Status};
use dscs::rs_code::PointFamily;
use dscs::sensing_matrix::singleton_bound;
use dscs::simulate::{instance, run_trials, TrialConfig, TrialRecord, ValueDistribution};
use dscs::{build, CsMatrix, CsMatrixSpec, Error, Measurement, SparseVector, Tolerance, Variant};

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "dscs", version, about = "Doubly sparse compressed sensing with real Reed-Solomon codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Tolerances {
    /// Relative threshold below which an entry counts as zero.
    #[arg(long, default_value_t = 1e-8)]
    zero_tol: f64,
    /// Singular values below this fraction of the largest are treated as zero.
    #[arg(long, default_value_t = 1e-9)]
    rank_tol: f64,
    /// Largest accepted relative residual.
    #[arg(long, default_value_t = 1e-7)]
    residual_tol: f64,
}

impl Tolerances {
    fn get(&self) -> Result<Tolerance, Failure> {
        Ok(Tolerance::new(self.zero_tol, self.rank_tol, self.residual_tol)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Cs,
    Pairwise,
    Singleton,
    Lambda,
    Delta,
    Proximity,
}

#[derive(Clone, Copy, ValueEnum)]
enum Values {
    /// Magnitudes uniform on [0.1, 10], random sign.
    Uniform,
    /// Plus or minus one.
    Unit,
}

impl Values {
    fn distribution(self) -> ValueDistribution {
        match self {
            Values::Uniform => ValueDistribution::default(),
            Values::Unit => ValueDistribution::UnitSign,
        }
    }
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_family(s: &str) -> Result<PointFamily, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Build a measurement matrix and write it as a text document.
    Build {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        l: usize,
        /// generic (r = 2(t+l)) or cyclic (r = 2(t+l+1)).
        #[arg(long, value_parser = parse_variant, default_value = "generic")]
        variant: Variant,
        /// Inner point family for the generic variant: equispaced or chebyshev.
        #[arg(long, value_parser = parse_family)]
        inner_points: Option<PointFamily>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Form s_hat = H x + e from explicit sparse vectors.
    Measure {
        #[arg(long)]
        matrix: PathBuf,
        /// Signal entries as index:value pairs, e.g. 3:7.0,5:-1.
        #[arg(long, default_value = "")]
        x: String,
        /// Gross errors as index:value pairs.
        #[arg(long, default_value = "")]
        e: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the sparse signal from a measurement.
    Recover {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, required_unless_present = "simulate", conflicts_with = "simulate")]
        measurement: Option<PathBuf>,
        /// Draw a random in-budget instance instead of reading one.
        #[arg(long)]
        simulate: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Nonzeros of the simulated signal (default t).
        #[arg(long)]
        signal_weight: Option<usize>,
        /// Gross errors of the simulated instance (default l).
        #[arg(long)]
        error_weight: Option<usize>,
        #[arg(long, value_enum, default_value = "uniform")]
        values: Values,
        /// Dense noise norm of the simulated instance.
        #[arg(long, default_value_t = 0.0)]
        noise_eps: f64,
        #[command(flatten)]
        tol: Tolerances,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a brute-force oracle on a matrix.
    Verify {
        #[arg(long)]
        matrix: PathBuf,
        /// Signal sparsity (default: from the matrix file).
        #[arg(long)]
        t: Option<usize>,
        /// Error sparsity (default: from the matrix file).
        #[arg(long)]
        l: Option<usize>,
        #[arg(long, value_enum, default_value = "cs")]
        check: Check,
        /// Largest number of enumerated subset combinations.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        /// Delete this row of H before checking.
        #[arg(long)]
        drop_row: Option<usize>,
        /// Support size for lambda/delta (default 2t).
        #[arg(long)]
        d: Option<usize>,
        /// Pairs sampled by the pairwise check.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Noise norm for the proximity check.
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        /// Trials for the proximity check.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tol: Tolerances,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recovery trials over several signal lengths, as CSV.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, value_parser = parse_variant, default_value = "generic")]
        variant: Variant,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "uniform")]
        values: Values,
        /// Gross errors per trial (default l).
        #[arg(long)]
        error_weight: Option<usize>,
        /// Leave decode_micros empty so repeated runs are byte-identical.
        #[arg(long)]
        no_timing: bool,
        #[command(flatten)]
        tol: Tolerances,
        /// CSV path; a `.manifest` file is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// An error together with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn decoding(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::EnumerationCapExceeded { .. } => 3,
            Error::DecodingFailure(_)
            | Error::InconsistentSyndromes { .. }
            | Error::RootSeparationFailure(_)
            | Error::RankDeficient { .. } => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn read_document(path: &Path) -> Result<Document, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    Document::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_matrix(path: &Path) -> Result<CsMatrix, Failure> {
    CsMatrix::from_document(&read_document(path)?)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn parse_pairs(text: &str, length: usize) -> Result<SparseVector, Failure> {
    let mut entries: Vec<(usize, f64)> = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (i, v) = item
            .split_once(':')
            .ok_or_else(|| Failure::usage(format!("`{item}` is not index:value")))?;
        let i: usize = i.trim().parse().map_err(|_| Failure::usage(format!("bad index in `{item}`")))?;
        let v: f64 = v.trim().parse().map_err(|_| Failure::usage(format!("bad value in `{item}`")))?;
        entries.push((i, v));
    }
    entries.sort_by_key(|e| e.0);
    let (support, values) = entries.into_iter().unzip();
    Ok(SparseVector::new(length, support, values)?)
}

fn cmd_build(
    n: usize,
    t: usize,
    l: usize,
    variant: Variant,
    inner_points: Option<PointFamily>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let manifest = RunManifest::start("build", None);
    let mut spec = CsMatrixSpec::new(n, t, l, variant);
    if let Some(family) = inner_points {
        if variant == Variant::CyclicFourier {
            return Err(Failure::usage("--inner-points applies to the generic variant only"));
        }
        spec = spec.with_inner_points(family.points(n));
    }
    let m = build(&spec)?;
    let mut doc = m.to_document();
    manifest.embed(&mut doc);
    emit(&doc.render(), out)?;
    let summary = format!("r = {}\nsingleton_bound = {}", m.r(), singleton_bound(t, l));
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn cmd_measure(matrix: &Path, x: &str, e: &str, out: Option<&Path>) -> Result<(), Failure> {
    let manifest = RunManifest::start("measure", None);
    let m = load_matrix(matrix)?;
    let x = parse_pairs(x, m.n())?;
    let e = parse_pairs(e, m.r())?;
    let mut doc = m.measure(&x, &e, None)?.to_document();
    manifest.embed(&mut doc);
    emit(&doc.render(), out)
}

fn result_document(res: &RecoveryResult, truth: Option<&SparseVector>) -> Document {
    let mut doc = Document::new("result");
    match &res.status {
        Status::Success => doc.set("status", "success"),
        Status::DecodingFailure { stage, diagnostic } => {
            doc.set("status", "decoding_failure");
            doc.set("stage", stage);
            doc.set("diagnostic", diagnostic);
        }
    }
    doc.set("n", res.x_hat.len());
    doc.set_indices("support", res.x_hat.support());
    doc.set_floats("values", res.x_hat.values());
    doc.set_indices("outer_error_positions", &res.outer_error_positions);
    doc.set_floats("outer_error_values", &res.outer_error_values);
    doc.set_floats("u", res.u.as_slice());
    doc.set("residual", dscs::format::format_float(res.residual));
    if let Some(x) = truth {
        doc.set("matches_truth", res.is_success() && res.x_hat.approx_eq(x, dscs::simulate::RECOVERY_ACCURACY));
    }
    doc
}

#[allow(clippy::too_many_arguments)]
fn cmd_recover(
    matrix: &Path,
    measurement: Option<&Path>,
    seed: u64,
    signal_weight: Option<usize>,
    error_weight: Option<usize>,
    values: Values,
    noise_eps: f64,
    tol: &Tolerance,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let m = load_matrix(matrix)?;
    let (meas, manifest) = match measurement {
        Some(path) => (
            Measurement::from_document(&read_document(path)?)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
            RunManifest::start("recover", None),
        ),
        None => {
            let spec = m.spec();
            let mut config = TrialConfig::new(spec.n, spec.t, spec.l, spec.variant);
            config.base_seed = seed;
            config.signal_weight = signal_weight;
            config.error_weight = error_weight;
            config.value_distribution = values.distribution();
            config.dense_noise_eps = noise_eps;
            config.validate(&m, tol)?;
            (instance(&config, &m, 0)?.measurement, RunManifest::start("recover", Some(seed)))
        }
    };
    let res = recover(&m, &meas.s_hat, tol)?;
    let mut doc = result_document(&res, meas.x.as_ref());
    if measurement.is_none() {
        for (key, value) in meas.to_document().entries() {
            if key != "kind" {
                doc.set(&format!("instance.{key}"), value);
            }
        }
    }
    manifest.embed(&mut doc);
    emit(&doc.render(), out)?;
    match &res.status {
        Status::DecodingFailure { stage, diagnostic } => Err(Failure::decoding(format!(
            "decoding failure (stage {stage}): {diagnostic}"
        ))),
        Status::Success => match &meas.x {
            Some(x) if !res.x_hat.approx_eq(x, dscs::simulate::RECOVERY_ACCURACY) => Err(
                Failure::decoding("decoder succeeded but differs from the recorded signal"),
            ),
            _ => Ok(()),
        },
    }
}

fn witness_entries(doc: &mut Document, report: &OracleReport, h: &DMatrix<f64>, tol: &Tolerance) {
    match &report.witness {
        Some(Witness::Vector(z)) => {
            doc.set_floats("witness", z.as_slice());
            let weight = dscs::numerics::hamming_weight((h * z).as_slice(), tol);
            doc.set("witness_image_weight", weight);
        }
        Some(Witness::Pair(x, y)) => {
            doc.set_floats("witness_x", x.as_slice());
            doc.set_floats("witness_y", y.as_slice());
        }
        None => {}
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    matrix: &Path,
    t: Option<usize>,
    l: Option<usize>,
    check: Check,
    cap: u64,
    drop_row: Option<usize>,
    d: Option<usize>,
    samples: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
    tol: &Tolerance,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let manifest = RunManifest::start("verify", Some(seed));
    let source = read_document(matrix)?;
    let mut h = source
        .block("H")
        .map_err(|e| Failure::usage(format!("{}: {e}", matrix.display())))?
        .clone();
    let from_file = |key: &str, given: Option<usize>| -> Result<usize, Failure> {
        match given {
            Some(v) => Ok(v),
            None => source
                .value(key)
                .map_err(|_| Failure::usage(format!("--{key} is required (not in the matrix file)"))),
        }
    };
    let t = from_file("t", t)?;
    let l = from_file("l", l)?;
    if let Some(row) = drop_row {
        if row >= h.nrows() {
            return Err(Failure::usage(format!("row {row} out of range for {} rows", h.nrows())));
        }
        h = h.remove_row(row);
    }

    let mut doc = Document::new("report");
    doc.set("rows", h.nrows());
    doc.set("cols", h.ncols());
    doc.set("t", t);
    doc.set("l", l);
    let mut message = String::new();
    let verdict = match check {
        Check::Cs | Check::Pairwise | Check::Proximity => {
            let (name, report) = match check {
                Check::Cs => ("cs", oracle::verify_cs_property(&h, t, l, cap, tol)?),
                Check::Pairwise => ("pairwise", oracle::pairwise_cs_check(&h, t, l, samples, seed, tol)?),
                _ => (
                    "proximity",
                    oracle::proximity_bound_check(&h, t, epsilon, trials, seed, cap, tol)?,
                ),
            };
            doc.set("check", name);
            doc.set("enumeration_count", report.enumeration_count);
            if let Some(s) = report.statistic {
                doc.set("statistic", s);
            }
            witness_entries(&mut doc, &report, &h, tol);
            let _ = write!(
                message,
                "{name}: {} after {} cases",
                if report.verdict { "holds" } else { "fails" },
                report.enumeration_count
            );
            report.verdict
        }
        Check::Singleton => {
            let (z, weight) = oracle::singleton_witness(&h, t, tol)?;
            doc.set("check", "singleton");
            doc.set_floats("witness", z.as_slice());
            doc.set("witness_image_weight", weight);
            let _ = write!(message, "singleton witness image weight {weight} (2l + 1 = {})", 2 * l + 1);
            weight > 2 * l
        }
        Check::Lambda | Check::Delta => {
            let d = d.unwrap_or(2 * t);
            let scan = oracle::scan_constants(&h, d, cap)?;
            doc.set("d", d);
            doc.set("enumeration_count", scan.enumeration_count);
            if let Check::Lambda = check {
                doc.set("check", "lambda");
                doc.set("statistic", dscs::format::format_float(scan.lambda));
                doc.set_indices("lambda_support", &scan.lambda_support);
                let _ = write!(message, "lambda_{d} = {:e}", scan.lambda);
                scan.lambda > 1e-12
            } else {
                doc.set("check", "delta");
                doc.set("statistic", dscs::format::format_float(scan.delta));
                let _ = write!(message, "delta_{d} = {:e}", scan.delta);
                true
            }
        }
    };
    doc.set("verdict", verdict);
    manifest.embed(&mut doc);
    emit(&doc.render(), out)?;
    if out.is_some() {
        println!("{message}");
    } else {
        eprintln!("{message}");
    }
    if verdict {
        Ok(())
    } else {
        Err(Failure::decoding(format!("verdict false: {message}")))
    }
}

const CSV_HEADER: &str = "n,t,l,variant,trial,seed,success,residual,outer_ok,decode_micros";

fn median(mut v: Vec<u64>) -> f64 {
    v.sort_unstable();
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid] as f64
    } else {
        0.5 * (v[mid - 1] + v[mid]) as f64
    }
}

fn residual_cell(r: f64) -> String {
    if r.is_finite() {
        format!("{r:.3e}")
    } else {
        "inf".into()
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    n_list: &[usize],
    t: usize,
    l: usize,
    variant: Variant,
    trials: usize,
    seed: u64,
    values: Values,
    error_weight: Option<usize>,
    no_timing: bool,
    tol: &Tolerance,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let manifest = RunManifest::start("bench", Some(seed));
    let mut csv = format!("{CSV_HEADER}\n");
    for &n in n_list {
        let m = build(&CsMatrixSpec::new(n, t, l, variant))?;
        let mut config = TrialConfig::new(n, t, l, variant);
        config.trials = trials;
        config.base_seed = seed;
        config.value_distribution = values.distribution();
        config.error_weight = error_weight;
        let records: Vec<TrialRecord> = run_trials(&config, &m, tol)?;
        let timing = |micros: String| if no_timing { String::new() } else { micros };
        for r in &records {
            let _ = writeln!(
                csv,
                "{n},{t},{l},{variant},{},{},{},{},{},{}",
                r.trial,
                r.seed,
                r.success,
                residual_cell(r.residual),
                r.outer_ok,
                timing(r.decode_micros.to_string())
            );
        }
        let count = records.len() as f64;
        let successes = records.iter().filter(|r| r.success).count() as f64;
        let outer = records.iter().filter(|r| r.outer_ok).count() as f64;
        let worst = records.iter().map(|r| r.residual).fold(0.0, f64::max);
        let med = median(records.iter().map(|r| r.decode_micros).collect());
        let _ = writeln!(
            csv,
            "{n},{t},{l},{variant},summary,,{:.4},{},{:.4},{}",
            successes / count,
            residual_cell(worst),
            outer / count,
            timing(format!("{med:.1}"))
        );
    }
    emit(&csv, out)?;
    if let Some(path) = out {
        let mut sidecar = path.as_os_str().to_owned();
        sidecar.push(".manifest");
        let doc = manifest.document(&path.display().to_string());
        fs::write(&sidecar, doc.render()).map_err(|e| {
            Failure::usage(format!("cannot write {}: {e}", PathBuf::from(&sidecar).display()))
        })?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Build {
            n,
            t,
            l,
            variant,
            inner_points,
            out,
        } => cmd_build(n, t, l, variant, inner_points, out.as_deref()),
        Command::Measure { matrix, x, e, out } => cmd_measure(&matrix, &x, &e, out.as_deref()),
        Command::Recover {
            matrix,
            measurement,
            simulate: _,
            seed,
            signal_weight,
            error_weight,
            values,
            noise_eps,
            tol,
            out,
        } => cmd_recover(
            &matrix,
            measurement.as_deref(),
            seed,
            signal_weight,
            error_weight,
            values,
            noise_eps,
            &tol.get()?,
            out.as_deref(),
        ),
        Command::Verify {
            matrix,
            t,
            l,
            check,
            cap,
            drop_row,
            d,
            samples,
            epsilon,
            trials,
            seed,
            tol,
            out,
        } => cmd_verify(
            &matrix,
            t,
            l,
            check,
            cap,
            drop_row,
            d,
            samples,
            epsilon,
            trials,
            seed,
            &tol.get()?,
            out.as_deref(),
        ),
        Command::Bench {
            n_list,
            t,
            l,
            variant,
            trials,
            seed,
            values,
            error_weight,
            no_timing,
            tol,
            out,
        } => cmd_bench(
            &n_list,
            t,
            l,
            variant,
            trials,
            seed,
            values,
            error_weight,
            no_timing,
            &tol.get()?,
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dscs: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_parse() {
        let v = parse_pairs("5:-1, 3:7.0", 8).unwrap();
        assert_eq!(v.support(), &[3, 5]);
        assert_eq!(v.values(), &[7.0, -1.0]);
        assert_eq!(parse_pairs("", 4).unwrap().weight(), 0);
        assert!(parse_pairs("9:1", 8).is_err());
        assert!(parse_pairs("1-2", 8).is_err());
        assert!(parse_pairs("1:0", 8).is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(Failure::from(Error::EnumerationCapExceeded { requested: 9, cap: 1 }).code, 3);
        assert_eq!(Failure::from(Error::DecodingFailure("x".into())).code, 1);
        assert_eq!(Failure::from(Error::InvalidSpec("x".into())).code, 2);
    }

    #[test]
    fn medians() {
        assert_eq!(median(vec![3, 1, 2]), 2.0);
        assert_eq!(median(vec![4, 1, 2, 3]), 2.5);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
