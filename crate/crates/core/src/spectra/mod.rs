//! Direct-method bispectrum and trispectrum estimation.
//!
//! Each segment's raw product spectrum lives on the periodic `M x M` grid
//! (`M x M x M` for the trispectrum). A box window of side `M3` with offsets
//! `-h ..= M3 - 1 - h`, `h = M3 / 2`, is summed around every principal-domain
//! point, divided by `M3^(order-1)`, and averaged over segments.
//!
//! Internally the raw grid is addressed through a shift by `h`, so the
//! window anchored at source cell `(k1, k2)` is exactly the smoothing window
//! of `(k1, k2)` and every [`SmoothingPlan`] applies unchanged.

mod order3;
mod order4;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft::dft_segments;
use crate::error::{Error, Result};
use crate::parallel::Executor;
use crate::series::{segment_and_demean, SegmentConfig, TimeSeries};
use crate::window_sums::SmoothingPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum SpectrumOrder {
    Bispectrum,
    Trispectrum,
}

impl SpectrumOrder {
    /// Cumulant order: 3 or 4.
    pub fn value(self) -> usize {
        match self {
            SpectrumOrder::Bispectrum => 3,
            SpectrumOrder::Trispectrum => 4,
        }
    }

    /// Number of frequency indices per point.
    pub fn dims(self) -> usize {
        self.value() - 1
    }
}

impl TryFrom<usize> for SpectrumOrder {
    type Error = Error;

    fn try_from(v: usize) -> Result<Self> {
        match v {
            3 => Ok(SpectrumOrder::Bispectrum),
            4 => Ok(SpectrumOrder::Trispectrum),
            other => Err(Error::config(
                "order",
                format!("order must be 3 or 4, got {other}"),
            )),
        }
    }
}

impl From<SpectrumOrder> for usize {
    fn from(o: SpectrumOrder) -> usize {
        o.value()
    }
}

impl FromStr for SpectrumOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: usize = s
            .trim()
            .parse()
            .map_err(|_| Error::config("order", format!("order must be 3 or 4, got {s:?}")))?;
        SpectrumOrder::try_from(v)
    }
}

impl fmt::Display for SpectrumOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimationConfig {
    pub order: SpectrumOrder,
    pub segment: SegmentConfig,
    /// Smoothing window side `M3`.
    pub m3: usize,
    pub plan: SmoothingPlan,
    /// Conjugate the sum-frequency factor of the raw product.
    pub conjugate_last: bool,
}

impl EstimationConfig {
    pub fn new(
        order: SpectrumOrder,
        segment: SegmentConfig,
        m3: usize,
        plan: SmoothingPlan,
    ) -> Self {
        EstimationConfig {
            order,
            segment,
            m3,
            plan,
            conjugate_last: true,
        }
    }

    pub fn bispectrum(m: usize, k: usize, m3: usize, plan: SmoothingPlan) -> Self {
        Self::new(SpectrumOrder::Bispectrum, SegmentConfig { m, k }, m3, plan)
    }

    pub fn trispectrum(m: usize, k: usize, m3: usize, plan: SmoothingPlan) -> Self {
        Self::new(SpectrumOrder::Trispectrum, SegmentConfig { m, k }, m3, plan)
    }

    pub fn with_conjugate_last(mut self, on: bool) -> Self {
        self.conjugate_last = on;
        self
    }

    pub fn with_plan(mut self, plan: SmoothingPlan) -> Self {
        self.plan = plan;
        self
    }

    /// Smoothing offsets `(lo, hi)` applied along every axis.
    pub fn window_offsets(&self) -> (isize, isize) {
        let h = (self.m3 / 2) as isize;
        (-h, self.m3 as isize - 1 - h)
    }

    /// Checks the configuration against a series of `n` samples.
    pub fn validate(&self, n: usize) -> Result<()> {
        let SegmentConfig { m, k } = self.segment;
        SegmentConfig::new(m, k)?;
        if self.m3 == 0 {
            return Err(Error::config("window", "M3 must be at least 1"));
        }
        if 2 * self.m3 >= m {
            return Err(Error::config(
                "window",
                format!("M3={} must be below M/2 for M={m}", self.m3),
            ));
        }
        self.segment.check_fits(n)
    }
}

/// Index set `0 <= k_last <= ... <= k1` with `k1 + ... < M/2`, in
/// lexicographic order.
///
/// Points are grouped by their leading pair `(k1, k2)`; for the bispectrum
/// each pair is a point, for the trispectrum each pair owns a run of `k3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrincipalDomain {
    order: SpectrumOrder,
    m: usize,
    half: usize,
    row_start: Vec<usize>,
    pair_start: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    len: usize,
}

impl PrincipalDomain {
    pub fn new(order: SpectrumOrder, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Dimension(format!(
                "principal domain needs M >= 2, got {m}"
            )));
        }
        let half = (m - 1) / 2;
        let mut row_start = Vec::with_capacity(half + 2);
        let mut acc = 0;
        for k1 in 0..=half {
            row_start.push(acc);
            acc += k1.min(half - k1) + 1;
        }
        row_start.push(acc);
        let pair_count = acc;

        let (pair_start, pairs, len) = match order {
            SpectrumOrder::Bispectrum => (Vec::new(), Vec::new(), pair_count),
            SpectrumOrder::Trispectrum => {
                let mut starts = Vec::with_capacity(pair_count + 1);
                let mut pairs = Vec::with_capacity(pair_count);
                let mut acc = 0;
                for k1 in 0..=half {
                    for k2 in 0..=k1.min(half - k1) {
                        starts.push(acc);
                        pairs.push((k1, k2));
                        acc += k2.min(half - k1 - k2) + 1;
                    }
                }
                starts.push(acc);
                (starts, pairs, acc)
            }
        };
        Ok(PrincipalDomain {
            order,
            m,
            half,
            row_start,
            pair_start,
            pairs,
            len,
        })
    }

    pub fn order(&self) -> SpectrumOrder {
        self.order
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Largest admissible index sum, `(M - 1) / 2`.
    pub fn half(&self) -> usize {
        self.half
    }

    pub(crate) fn pair_count(&self) -> usize {
        self.row_start[self.half + 1]
    }

    /// Number of `k2` values in row `k1`.
    pub(crate) fn row_len(&self, k1: usize) -> usize {
        k1.min(self.half - k1) + 1
    }

    #[inline]
    pub(crate) fn pair_index(&self, k1: usize, k2: usize) -> Option<usize> {
        (k1 <= self.half && k2 <= k1.min(self.half - k1)).then(|| self.row_start[k1] + k2)
    }

    /// Number of `k3` values owned by pair `p` (trispectrum only).
    #[inline]
    pub(crate) fn k3_len(&self, p: usize) -> usize {
        self.pair_start[p + 1] - self.pair_start[p]
    }

    #[inline]
    pub(crate) fn pair_start(&self, p: usize) -> usize {
        self.pair_start[p]
    }

    pub(crate) fn pair(&self, p: usize) -> (usize, usize) {
        self.pairs[p]
    }

    /// Largest `k3` in the domain (trispectrum only).
    pub(crate) fn max_k3(&self) -> usize {
        (0..self.pair_count())
            .map(|p| self.k3_len(p))
            .max()
            .unwrap_or(1)
            - 1
    }

    /// Position of `k` in the lexicographic order, if it is in the domain.
    pub fn index_of(&self, k: &[usize]) -> Option<usize> {
        match (self.order, k) {
            (SpectrumOrder::Bispectrum, &[k1, k2]) => self.pair_index(k1, k2),
            (SpectrumOrder::Trispectrum, &[k1, k2, k3]) => {
                let p = self.pair_index(k1, k2)?;
                (k3 < self.k3_len(p)).then(|| self.pair_start(p) + k3)
            }
            _ => None,
        }
    }

    /// All index tuples in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let half = self.half;
        let order = self.order;
        (0..=half).flat_map(move |k1| {
            (0..=k1.min(half - k1)).flat_map(move |k2| {
                let k3_count = match order {
                    SpectrumOrder::Bispectrum => 1,
                    SpectrumOrder::Trispectrum => k2.min(half - k1 - k2) + 1,
                };
                (0..k3_count).map(move |k3| match order {
                    SpectrumOrder::Bispectrum => vec![k1, k2],
                    SpectrumOrder::Trispectrum => vec![k1, k2, k3],
                })
            })
        })
    }
}

/// Principal-domain index tuples for `order` and segment length `m`.
pub fn principal_domain(order: SpectrumOrder, m: usize) -> Result<Vec<Vec<usize>>> {
    Ok(PrincipalDomain::new(order, m)?.iter().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    pub k: Vec<usize>,
    pub value: Complex64,
}

/// Smoothed, segment-averaged estimate over the principal domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    m3: usize,
    plan: SmoothingPlan,
    domain: PrincipalDomain,
    values: Vec<Complex64>,
}

impl SpectrumGrid {
    pub fn order(&self) -> SpectrumOrder {
        self.domain.order
    }

    pub fn m(&self) -> usize {
        self.domain.m
    }

    pub fn m3(&self) -> usize {
        self.m3
    }

    pub fn plan(&self) -> SmoothingPlan {
        self.plan
    }

    pub fn domain(&self) -> &PrincipalDomain {
        &self.domain
    }

    /// Values in principal-domain order.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: &[usize]) -> Option<Complex64> {
        self.domain.index_of(k).map(|i| self.values[i])
    }

    pub fn points(&self) -> impl Iterator<Item = SpectrumPoint> + '_ {
        self.domain
            .iter()
            .zip(&self.values)
            .map(|(k, &value)| SpectrumPoint { k, value })
    }

    /// Sum of magnitudes, used to cross-check runs.
    pub fn checksum(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }

    /// The point of largest magnitude.
    pub fn peak(&self) -> Option<SpectrumPoint> {
        self.points()
            .max_by(|a, b| a.value.norm().total_cmp(&b.value.norm()))
    }

    /// Writes `k1,k2[,k3],re,im` rows in domain order with 17 significant
    /// digits.
    pub fn write_csv_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        match self.order() {
            SpectrumOrder::Bispectrum => writeln!(out, "k1,k2,re,im")?,
            SpectrumOrder::Trispectrum => writeln!(out, "k1,k2,k3,re,im")?,
        }
        for (k, v) in self.domain.iter().zip(&self.values) {
            for idx in &k {
                write!(out, "{idx},")?;
            }
            writeln!(out, "{:.16e},{:.16e}", v.re, v.im)?;
        }
        out.flush()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        self.write_csv_to(BufWriter::new(file)).map_err(io_err)
    }
}

/// `(1/M) F(k1) F(k2) F*(k1 + k2)`, the last factor conjugated only when
/// `conjugate_last` is set. Indices must be below `M`.
#[inline]
pub fn raw_bispectrum_value(
    f: &[Complex64],
    k1: usize,
    k2: usize,
    conjugate_last: bool,
) -> Complex64 {
    let m = f.len();
    let s = f[wrap_sum(k1 + k2, m)];
    let s = if conjugate_last { s.conj() } else { s };
    f[k1] * f[k2] * s / m as f64
}

/// `(1/M) F(k1) F(k2) F(k3) F*(k1 + k2 + k3)`, conjugation as for
/// [`raw_bispectrum_value`].
#[inline]
pub fn raw_trispectrum_value(
    f: &[Complex64],
    k1: usize,
    k2: usize,
    k3: usize,
    conjugate_last: bool,
) -> Complex64 {
    let m = f.len();
    let s = f[(k1 + k2 + k3) % m];
    let s = if conjugate_last { s.conj() } else { s };
    f[k1] * f[k2] * f[k3] * s / m as f64
}

#[inline]
fn wrap_sum(i: usize, m: usize) -> usize {
    if i < m {
        i
    } else {
        i - m
    }
}

/// Maximum over points of `|a - b| / max(|a|, |b|, 1e-12)`.
pub fn compare_grids(a: &SpectrumGrid, b: &SpectrumGrid) -> Result<f64> {
    if a.order() != b.order() || a.m() != b.m() || a.m3() != b.m3() {
        return Err(Error::Dimension(format!(
            "cannot compare order {} M={} M3={} with order {} M={} M3={}",
            a.order(),
            a.m(),
            a.m3(),
            b.order(),
            b.m(),
            b.m3()
        )));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).norm() / x.norm().max(y.norm()).max(1e-12))
        .fold(0.0, f64::max))
}

/// Raw products of every segment, read through the smoothing shift.
pub(crate) struct RawSpectra<'a> {
    spectra: &'a [Vec<Complex64>],
    m: usize,
    w: usize,
    h: usize,
    conj: bool,
}

impl RawSpectra<'_> {
    /// Raw-grid coordinate of shifted source index `t < M`.
    #[inline]
    fn shift(&self, t: usize) -> usize {
        wrap_sum(t + self.m - self.h, self.m)
    }

    #[inline]
    fn bi(&self, f: &[Complex64], a: usize, b: usize) -> Complex64 {
        raw_bispectrum_value(f, a, b, self.conj)
    }

    /// Segment sum of the bispectral product at raw coordinates.
    #[inline]
    fn bi_sum(&self, a: usize, b: usize) -> Complex64 {
        self.spectra.iter().map(|f| self.bi(f, a, b)).sum()
    }

    #[inline]
    fn tri(&self, f: &[Complex64], a: usize, b: usize, c: usize) -> Complex64 {
        raw_trispectrum_value(f, a, b, c, self.conj)
    }

    #[inline]
    fn tri_sum(&self, a: usize, b: usize, c: usize) -> Complex64 {
        self.spectra.iter().map(|f| self.tri(f, a, b, c)).sum()
    }
}

pub(crate) struct Estimate {
    pub grid: SpectrumGrid,
    /// Sum over workers of each worker's smoothing high-water mark.
    pub peak_extra_bytes: usize,
}

/// Segments, transforms, smooths and averages `series`.
pub fn estimate_spectrum(series: &TimeSeries, cfg: &EstimationConfig) -> Result<SpectrumGrid> {
    Ok(estimate_with(series, cfg, &Executor::sequential())?.grid)
}

pub(crate) fn estimate_with(
    series: &TimeSeries,
    cfg: &EstimationConfig,
    exec: &Executor,
) -> Result<Estimate> {
    cfg.validate(series.len())?;
    let segs = segment_and_demean(series, cfg.segment)?;
    let spectra = dft_segments(&segs)?;
    let domain = PrincipalDomain::new(cfg.order, cfg.segment.m)?;
    let raw = RawSpectra {
        spectra: spectra.spectra(),
        m: cfg.segment.m,
        w: cfg.m3,
        h: cfg.m3 / 2,
        conj: cfg.conjugate_last,
    };
    let (mut values, peak_extra_bytes) = match cfg.order {
        SpectrumOrder::Bispectrum => order3::smooth(&raw, &domain, cfg.plan, exec)?,
        SpectrumOrder::Trispectrum => order4::smooth(&raw, &domain, cfg.plan, exec)?,
    };
    let norm = (cfg.m3 as f64).powi(cfg.order.dims() as i32) * cfg.segment.k as f64;
    for v in &mut values {
        *v /= norm;
    }
    Ok(Estimate {
        grid: SpectrumGrid {
            m3: cfg.m3,
            plan: cfg.plan,
            domain,
            values,
        },
        peak_extra_bytes,
    })
}
