//! `(t, l)`-CS measurement matrices `H = G^T H_inner`.
//!
//! `H_inner` (`r_inner x n`) is the parity check of an inner code that
//! corrects `t` errors, so every `2t` of its columns are independent. `G`
//! (`r_inner x r`) generates an outer code of length `r` and distance at least
//! `2l + 1`. For `z` nonzero and `2t`-sparse, `u = H_inner z` is nonzero and
//! `H z = G^T u` is a nonzero outer codeword, hence has at least `2l + 1`
//! nonzero entries: images of distinct `t`-sparse signals stay `2l + 1` apart.
//!
//! * [`Variant::GenericRs`]: `H_inner` is the `2t x n` Vandermonde matrix on
//!   distinct reals and the outer code is a `(2(t + l), 2t)` Reed-Solomon code.
//!   `r = 2(t + l)` meets the lower bound [`singleton_bound`].
//! * [`Variant::CyclicFourier`]: `H_inner` holds the real DFT rows for
//!   frequencies `-t..t` and the outer code is the length `r = 2(t + l + 1)`
//!   code of words whose spectrum vanishes on `-l..l`. Both decoding stages
//!   then run on FFTs.
//!
//! `G` is kept systematic (its first `r_inner` columns are the identity), so
//! an outer codeword starts with the inner syndrome it encodes.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::format::Document;
use crate::rs_code::{interleave, EvaluationPoints, PointFamily, RsCode, SyndromeMap};
use crate::sparse::SparseVector;

/// Minimum rows of any `(t, l)`-CS matrix.
pub fn singleton_bound(t: usize, l: usize) -> usize {
    2 * (t + l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    GenericRs,
    CyclicFourier,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::GenericRs => "generic",
            Variant::CyclicFourier => "cyclic",
        }
    }

    pub fn redundancy(self, t: usize, l: usize) -> usize {
        match self {
            Variant::GenericRs => 2 * (t + l),
            Variant::CyclicFourier => 2 * (t + l + 1),
        }
    }

    pub fn inner_rows(self, t: usize) -> usize {
        match self {
            Variant::GenericRs => 2 * t,
            Variant::CyclicFourier => 2 * t + 1,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(Variant::GenericRs),
            "cyclic" => Ok(Variant::CyclicFourier),
            other => Err(Error::InvalidSpec(format!(
                "unknown variant `{other}` (expected generic or cyclic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsMatrixSpec {
    pub n: usize,
    pub t: usize,
    pub l: usize,
    pub variant: Variant,
    /// Inner evaluation points (generic only). Default: equispaced on `[-1, 1]`.
    pub inner_points: Option<Vec<f64>>,
    /// Outer evaluation points (generic only). Default: Chebyshev nodes of
    /// order `r`, even-indexed nodes first.
    pub outer_points: Option<Vec<f64>>,
}

impl CsMatrixSpec {
    pub fn new(n: usize, t: usize, l: usize, variant: Variant) -> Self {
        Self {
            n,
            t,
            l,
            variant,
            inner_points: None,
            outer_points: None,
        }
    }

    pub fn with_inner_points(mut self, points: Vec<f64>) -> Self {
        self.inner_points = Some(points);
        self
    }

    pub fn with_outer_points(mut self, points: Vec<f64>) -> Self {
        self.outer_points = Some(points);
        self
    }

    pub fn r(&self) -> usize {
        self.variant.redundancy(self.t, self.l)
    }

    pub fn inner_rows(&self) -> usize {
        self.variant.inner_rows(self.t)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, t) = (self.n, self.t);
        if t == 0 {
            return Err(Error::InvalidSpec("t must be at least 1".into()));
        }
        match self.variant {
            Variant::GenericRs if n < 2 * t => {
                return Err(Error::InvalidSpec(format!("generic build needs n >= 2t, got n = {n}, t = {t}")))
            }
            Variant::CyclicFourier if n <= 2 * t => {
                return Err(Error::InvalidSpec(format!("cyclic build needs n > 2t, got n = {n}, t = {t}")))
            }
            _ => {}
        }
        if self.variant == Variant::CyclicFourier
            && (self.inner_points.is_some() || self.outer_points.is_some())
        {
            return Err(Error::InvalidSpec(
                "the cyclic variant is defined on roots of unity; explicit points are not accepted".into(),
            ));
        }
        let check = |points: &Option<Vec<f64>>, len: usize, what: &str| -> Result<()> {
            if let Some(p) = points {
                if p.len() != len {
                    return Err(Error::InvalidSpec(format!(
                        "{what} point set has {} entries, expected {len}",
                        p.len()
                    )));
                }
                EvaluationPoints::generic(p.clone())?;
            }
            Ok(())
        };
        check(&self.inner_points, n, "inner")?;
        check(&self.outer_points, self.r(), "outer")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsMatrix {
    spec: CsMatrixSpec,
    h: DMatrix<f64>,
    inner: DMatrix<f64>,
    generator: DMatrix<f64>,
    inner_map: SyndromeMap,
    outer_map: SyndromeMap,
    outer_check: DMatrix<f64>,
}

pub fn default_inner_points(n: usize) -> Vec<f64> {
    PointFamily::Equispaced.points(n)
}

pub fn default_outer_points(r: usize) -> Vec<f64> {
    interleave(&PointFamily::Chebyshev.points(r))
}

/// Builds the measurement matrix for a spec.
pub fn build(spec: &CsMatrixSpec) -> Result<CsMatrix> {
    spec.validate()?;
    let (n, t, l) = (spec.n, spec.t, spec.l);
    let r = spec.r();
    let r_inner = spec.inner_rows();
    let mut spec = spec.clone();
    let (inner_map, outer_map, generator) = match spec.variant {
        Variant::GenericRs => {
            let a = spec.inner_points.get_or_insert_with(|| default_inner_points(n)).clone();
            let b = spec.outer_points.get_or_insert_with(|| default_outer_points(r)).clone();
            let inner_map = SyndromeMap::Weighted {
                weights: vec![1.0; n],
                points: a,
                rows: r_inner,
            };
            let outer = RsCode::new(EvaluationPoints::generic(b)?, r_inner)?;
            let v = outer.generator_matrix();
            let lead = v.columns(0, r_inner).into_owned();
            let g = lead.lu().solve(&v).ok_or_else(|| {
                Error::InvalidSpec("outer points give a singular leading block".into())
            })?;
            (inner_map, outer.syndrome_map(), g)
        }
        Variant::CyclicFourier => {
            let inner_map = SyndromeMap::spectral_low(n, t)?;
            let outer_map = SyndromeMap::spectral_low(r, l)?;
            // codeword (u, p) with F_M u + F_P p = 0
            let f = outer_map.matrix();
            let f_m = f.columns(0, r_inner).into_owned();
            let f_p = f.columns(r_inner, r - r_inner).into_owned();
            let p = f_p.lu().solve(&f_m).ok_or_else(|| {
                Error::InvalidSpec("spectral zero-forcing block is singular".into())
            })?;
            let mut g = DMatrix::zeros(r_inner, r);
            g.columns_mut(r_inner, r - r_inner).copy_from(&(-p.transpose()));
            (inner_map, outer_map, g)
        }
    };
    let mut generator = generator;
    generator
        .columns_mut(0, r_inner)
        .copy_from(&DMatrix::identity(r_inner, r_inner));
    let inner = inner_map.matrix();
    let h = generator.tr_mul(&inner);
    let outer_check = outer_map.matrix();
    Ok(CsMatrix {
        spec,
        h,
        inner,
        generator,
        inner_map,
        outer_map,
        outer_check,
    })
}

/// `s_hat = H x + e (+ noise)` together with the instance that produced it,
/// when known.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub s_hat: DVector<f64>,
    pub x: Option<SparseVector>,
    pub e: Option<SparseVector>,
}

impl Measurement {
    pub fn from_values(s_hat: DVector<f64>) -> Self {
        Self {
            s_hat,
            x: None,
            e: None,
        }
    }

    pub fn to_document(&self) -> Document {
        let mut doc = Document::new("measurement");
        doc.set("r", self.s_hat.len());
        doc.set_floats("s_hat", self.s_hat.as_slice());
        for (name, v) in [("x", &self.x), ("e", &self.e)] {
            if let Some(v) = v {
                doc.set(&format!("{name}_length"), v.len());
                doc.set_indices(&format!("{name}_support"), v.support());
                doc.set_floats(&format!("{name}_values"), v.values());
            }
        }
        doc
    }

    pub fn from_document(doc: &Document) -> Result<Self> {
        doc.expect_kind("measurement")?;
        let s_hat = DVector::from_vec(doc.floats("s_hat")?);
        let r: usize = doc.value("r")?;
        if s_hat.len() != r {
            return Err(Error::Parse {
                line: 0,
                message: format!("s_hat has {} entries, r = {r}", s_hat.len()),
            });
        }
        let sparse = |name: &str| -> Result<Option<SparseVector>> {
            if doc.get(&format!("{name}_length")).is_none() {
                return Ok(None);
            }
            SparseVector::new(
                doc.value(&format!("{name}_length"))?,
                doc.indices(&format!("{name}_support"))?,
                doc.floats(&format!("{name}_values"))?,
            )
            .map(Some)
        };
        Ok(Self {
            s_hat,
            x: sparse("x")?,
            e: sparse("e")?,
        })
    }
}

impl CsMatrix {
    pub fn spec(&self) -> &CsMatrixSpec {
        &self.spec
    }

    pub fn variant(&self) -> Variant {
        self.spec.variant
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn t(&self) -> usize {
        self.spec.t
    }

    pub fn l(&self) -> usize {
        self.spec.l
    }

    pub fn r(&self) -> usize {
        self.h.nrows()
    }

    pub fn inner_rows(&self) -> usize {
        self.inner.nrows()
    }

    /// The `r x n` measurement matrix.
    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn inner(&self) -> &DMatrix<f64> {
        &self.inner
    }

    /// Systematic outer generator, `r_inner x r`.
    pub fn outer_generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    /// Parity check of the outer code; `0 x r` when `l = 0` (generic).
    pub fn outer_check(&self) -> &DMatrix<f64> {
        &self.outer_check
    }

    pub fn inner_map(&self) -> &SyndromeMap {
        &self.inner_map
    }

    pub fn outer_map(&self) -> &SyndromeMap {
        &self.outer_map
    }

    pub fn measure(
        &self,
        x: &SparseVector,
        e: &SparseVector,
        noise: Option<&DVector<f64>>,
    ) -> Result<Measurement> {
        let (n, r) = (self.n(), self.r());
        if x.len() != n || e.len() != r {
            return Err(Error::DimensionMismatch(format!(
                "signal of length {} and error of length {} for a {r} x {n} matrix",
                x.len(),
                e.len()
            )));
        }
        let mut s_hat = e.to_dense();
        for (j, v) in x.iter() {
            s_hat.axpy(v, &self.h.column(j), 1.0);
        }
        if let Some(noise) = noise {
            if noise.len() != r {
                return Err(Error::DimensionMismatch(format!(
                    "noise of length {} for {r} measurements",
                    noise.len()
                )));
            }
            s_hat += noise;
        }
        Ok(Measurement {
            s_hat,
            x: Some(x.clone()),
            e: Some(e.clone()),
        })
    }

    pub fn to_document(&self) -> Document {
        let spec = &self.spec;
        let mut doc = Document::new("matrix");
        doc.set("variant", spec.variant);
        doc.set("n", spec.n);
        doc.set("t", spec.t);
        doc.set("l", spec.l);
        doc.set("r", self.r());
        doc.set("r_inner", self.inner_rows());
        if let Some(p) = &spec.inner_points {
            doc.set_floats("inner_points", p);
        }
        if let Some(p) = &spec.outer_points {
            doc.set_floats("outer_points", p);
        }
        doc.add_block("H", &self.h);
        doc.add_block("H_inner", &self.inner);
        doc.add_block("G", &self.generator);
        doc
    }

    /// Reads a matrix document. The spec and points are rebuilt, and the
    /// stored blocks must agree with the rebuild to `1e-12` relative; the
    /// stored entries are then kept verbatim.
    pub fn from_document(doc: &Document) -> Result<Self> {
        doc.expect_kind("matrix")?;
        let mut spec = CsMatrixSpec::new(
            doc.value("n")?,
            doc.value("t")?,
            doc.value("l")?,
            doc.value("variant")?,
        );
        if doc.get("inner_points").is_some() {
            spec.inner_points = Some(doc.floats("inner_points")?);
        }
        if doc.get("outer_points").is_some() {
            spec.outer_points = Some(doc.floats("outer_points")?);
        }
        let mut m = build(&spec)?;
        let stored = [
            ("H", doc.block("H")?),
            ("H_inner", doc.block("H_inner")?),
            ("G", doc.block("G")?),
        ];
        for (name, block) in stored {
            let rebuilt = match name {
                "H" => &m.h,
                "H_inner" => &m.inner,
                _ => &m.generator,
            };
            if block.shape() != rebuilt.shape() {
                return Err(Error::Parse {
                    line: 0,
                    message: format!(
                        "block {name} is {:?}, spec implies {:?}",
                        block.shape(),
                        rebuilt.shape()
                    ),
                });
            }
            let scale = rebuilt.amax().max(1.0);
            if (block - rebuilt).amax() > 1e-12 * scale {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("block {name} does not match its spec"),
                });
            }
        }
        m.h = stored[0].1.clone();
        m.inner = stored[1].1.clone();
        m.generator = stored[2].1.clone();
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic(n: usize, t: usize, l: usize) -> CsMatrix {
        build(&CsMatrixSpec::new(n, t, l, Variant::GenericRs)).unwrap()
    }

    fn cyclic(n: usize, t: usize, l: usize) -> CsMatrix {
        build(&CsMatrixSpec::new(n, t, l, Variant::CyclicFourier)).unwrap()
    }

    #[test]
    fn singleton_bound_values() {
        assert_eq!(singleton_bound(1, 1), 4);
        assert_eq!(singleton_bound(3, 0), 6);
        assert_eq!(singleton_bound(2, 5), 14);
    }

    #[test]
    fn shapes() {
        let m = generic(8, 1, 1);
        assert_eq!(m.h().shape(), (4, 8));
        assert_eq!(m.inner().shape(), (2, 8));
        assert_eq!(m.outer_generator().shape(), (2, 4));
        assert_eq!(m.outer_check().shape(), (2, 4));
        let c = cyclic(8, 1, 1);
        assert_eq!(c.h().shape(), (6, 8));
        assert_eq!(c.inner().shape(), (3, 8));
        assert_eq!(c.outer_generator().shape(), (3, 6));
        assert_eq!(c.outer_check().shape(), (3, 6));
        assert_eq!(generic(6, 3, 0).outer_check().shape(), (0, 6));
    }

    #[test]
    fn infeasible_specs_rejected() {
        assert!(build(&CsMatrixSpec::new(8, 0, 1, Variant::GenericRs)).is_err());
        assert!(build(&CsMatrixSpec::new(3, 2, 1, Variant::GenericRs)).is_err());
        assert!(build(&CsMatrixSpec::new(4, 2, 1, Variant::CyclicFourier)).is_err());
        let dup = CsMatrixSpec::new(4, 1, 1, Variant::GenericRs)
            .with_inner_points(vec![0.0, 1.0, 1.0, 2.0]);
        assert!(build(&dup).is_err());
        let short = CsMatrixSpec::new(4, 1, 1, Variant::GenericRs)
            .with_outer_points(vec![0.0, 1.0, 2.0]);
        assert!(build(&short).is_err());
        let pts = CsMatrixSpec::new(5, 1, 1, Variant::CyclicFourier)
            .with_inner_points(vec![0.0; 5]);
        assert!(build(&pts).is_err());
    }

    #[test]
    fn factorization_and_systematic_form() {
        for m in [generic(8, 1, 1), generic(12, 3, 2), cyclic(9, 2, 1), cyclic(16, 3, 3)] {
            let g = m.outer_generator();
            let k = m.inner_rows();
            assert_eq!(g.columns(0, k).into_owned(), DMatrix::identity(k, k));
            let product = g.transpose() * m.inner();
            let scale = m.h().amax().max(1.0);
            assert!((&product - m.h()).amax() <= 1e-12 * scale);
            // column-wise: h_j = G^T h_inner_j
            for j in 0..m.n() {
                let col = g.tr_mul(&m.inner().column(j));
                assert!((col - m.h().column(j)).amax() <= 1e-12 * scale);
            }
            // G spans codewords of the outer code
            let check = m.outer_check() * g.transpose();
            assert!(check.amax() <= 1e-9 * g.amax().max(1.0), "{}", check.amax());
        }
    }

    #[test]
    fn measure_examples() {
        let m = generic(8, 1, 1);
        let zero = m
            .measure(&SparseVector::zeros(8), &SparseVector::zeros(4), None)
            .unwrap();
        assert_eq!(zero.s_hat, DVector::zeros(4));
        let spike = SparseVector::new(4, vec![2], vec![1.0]).unwrap();
        let s = m.measure(&SparseVector::zeros(8), &spike, None).unwrap();
        assert_eq!(s.s_hat, spike.to_dense());
        assert!(m.measure(&SparseVector::zeros(7), &spike, None).is_err());
        let noise = DVector::from_element(4, 1e-3);
        let noisy = m.measure(&SparseVector::zeros(8), &spike, Some(&noise)).unwrap();
        assert_eq!(noisy.s_hat, spike.to_dense() + noise);
    }

    #[test]
    fn measure_is_linear() {
        let m = cyclic(10, 2, 1);
        let x1 = SparseVector::new(10, vec![1, 7], vec![2.0, -0.5]).unwrap();
        let x2 = SparseVector::new(10, vec![7], vec![3.0]).unwrap();
        let e1 = SparseVector::new(8, vec![0], vec![4.0]).unwrap();
        let e2 = SparseVector::new(8, vec![5], vec![-1.0]).unwrap();
        let sum_x = SparseVector::new(10, vec![1, 7], vec![2.0, 2.5]).unwrap();
        let sum_e = SparseVector::new(8, vec![0, 5], vec![4.0, -1.0]).unwrap();
        let a = m.measure(&x1, &e1, None).unwrap().s_hat;
        let b = m.measure(&x2, &e2, None).unwrap().s_hat;
        let c = m.measure(&sum_x, &sum_e, None).unwrap().s_hat;
        assert!((a + b - c).amax() < 1e-12);
    }

    #[test]
    fn measurement_document_round_trip() {
        let m = generic(8, 1, 1);
        let x = SparseVector::new(8, vec![3], vec![7.0]).unwrap();
        let e = SparseVector::new(4, vec![1], vec![-2.5]).unwrap();
        let meas = m.measure(&x, &e, None).unwrap();
        let back = Measurement::from_document(
            &Document::parse(&meas.to_document().render()).unwrap(),
        )
        .unwrap();
        assert_eq!(back, meas);
        let bare = Measurement::from_values(DVector::zeros(4));
        let back = Measurement::from_document(&bare.to_document()).unwrap();
        assert_eq!(back, bare);
    }

    #[test]
    fn matrix_document_round_trip_is_exact() {
        for m in [generic(8, 1, 1), cyclic(8, 1, 1), generic(10, 2, 0)] {
            let text = m.to_document().render();
            let back = CsMatrix::from_document(&Document::parse(&text).unwrap()).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn tampered_matrix_document_rejected() {
        let mut doc = generic(8, 1, 1).to_document();
        let mut h = doc.block("H").unwrap().clone();
        h[(0, 0)] += 1e-6;
        doc.add_block("H", &h);
        assert!(CsMatrix::from_document(&doc).is_err());
    }
}
