//! Time-series ingestion, segmentation and synthetic signal generation.
//!
//! Generators draw from [`ChaCha8Rng`] seeded with `seed_from_u64`, which is
//! specified bit-for-bit independently of platform, so a `(parameters, seed)`
//! pair always produces the same series.

use std::f64::consts::TAU;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-disk sample encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesFormat {
    /// One decimal value per line, optionally preceded by a single header line.
    Csv,
    /// Consecutive little-endian IEEE-754 binary64 values.
    Raw64,
}

impl std::str::FromStr for SeriesFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(SeriesFormat::Csv),
            "raw64" => Ok(SeriesFormat::Raw64),
            other => Err(Error::config(
                "format",
                format!("unknown format {other:?}; expected csv or raw64"),
            )),
        }
    }
}

/// A finite, non-empty real-valued sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    source: String,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some((i, &v)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("sample {i}"),
                value: v,
            });
        }
        Ok(TimeSeries {
            samples,
            source: source.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Rescales to unit sample variance (population form). Constant series
    /// are returned unchanged.
    pub fn normalized(&self) -> TimeSeries {
        let n = self.len() as f64;
        let mean = self.samples.iter().sum::<f64>() / n;
        let var = self.samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        if var == 0.0 {
            return self.clone();
        }
        let scale = var.sqrt().recip();
        TimeSeries {
            samples: self.samples.iter().map(|x| x * scale).collect(),
            source: self.source.clone(),
        }
    }

    pub fn write(&self, path: &Path, format: SeriesFormat) -> Result<()> {
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let bytes = match format {
            SeriesFormat::Csv => {
                let mut out = Vec::with_capacity(self.len() * 24);
                for v in &self.samples {
                    writeln!(out, "{v:?}").expect("write to Vec");
                }
                out
            }
            SeriesFormat::Raw64 => self.samples.iter().flat_map(|v| v.to_le_bytes()).collect(),
        };
        fs::write(path, bytes).map_err(io_err)
    }
}

/// Reads a series from `path`. The source label is set to the path.
pub fn load_series(path: &Path, format: SeriesFormat) -> Result<TimeSeries> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let samples = match format {
        SeriesFormat::Csv => parse_csv(&String::from_utf8_lossy(&bytes))?,
        SeriesFormat::Raw64 => parse_raw64(&bytes)?,
    };
    TimeSeries::new(samples, path.display().to_string())
}

fn parse_csv(text: &str) -> Result<Vec<f64>> {
    let mut samples = Vec::new();
    let mut seen_first = false;
    for (idx, line) in text.lines().enumerate() {
        let token = line.trim();
        if token.is_empty() {
            continue;
        }
        let first = !seen_first;
        seen_first = true;
        match token.parse::<f64>() {
            Ok(v) if v.is_finite() => samples.push(v),
            Ok(v) => {
                return Err(Error::NonFinite {
                    location: format!("line {}", idx + 1),
                    value: v,
                })
            }
            Err(_) if first && starts_non_numeric(token) => {}
            Err(_) => {
                return Err(Error::Parse {
                    line: idx + 1,
                    token: token.to_string(),
                })
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(samples)
}

fn starts_non_numeric(token: &str) -> bool {
    token
        .chars()
        .next()
        .is_some_and(|c| !(c.is_ascii_digit() || matches!(c, '+' | '-' | '.')))
}

fn parse_raw64(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::Truncated { len: bytes.len() });
    }
    bytes
        .chunks_exact(8)
        .enumerate()
        .map(|(i, chunk)| {
            let v = f64::from_le_bytes(chunk.try_into().expect("chunk of 8"));
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite {
                    location: format!("byte offset {}", i * 8),
                    value: v,
                })
            }
        })
        .collect()
}

/// Segment length `m` and segment count `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentConfig {
    pub m: usize,
    pub k: usize,
}

impl SegmentConfig {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::config("M", "segment length must be positive"));
        }
        if k == 0 {
            return Err(Error::config("K", "segment count must be positive"));
        }
        Ok(SegmentConfig { m, k })
    }

    /// One segment spanning the whole series.
    pub fn whole(n: usize) -> Self {
        SegmentConfig { m: n, k: 1 }
    }

    pub fn check_fits(&self, n: usize) -> Result<()> {
        if self.k.checked_mul(self.m).is_none_or(|total| total > n) {
            return Err(Error::config(
                "K*M",
                format!(
                    "K={} segments of M={} samples exceed series length {n}",
                    self.k, self.m
                ),
            ));
        }
        Ok(())
    }
}

/// `K` contiguous, non-overlapping segments of `M` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSet {
    segments: Vec<Vec<f64>>,
    means_removed: bool,
}

impl SegmentSet {
    /// Wraps pre-built segments, trusting the caller's demeaning claim.
    #[doc(hidden)]
    pub fn from_parts(segments: Vec<Vec<f64>>, means_removed: bool) -> Self {
        SegmentSet {
            segments,
            means_removed,
        }
    }

    pub fn segments(&self) -> &[Vec<f64>] {
        &self.segments
    }

    pub fn means_removed(&self) -> bool {
        self.means_removed
    }

    pub fn segment_len(&self) -> usize {
        self.segments.first().map_or(0, Vec::len)
    }
}

/// Splits `series` into `cfg.k` parts of `cfg.m` samples and subtracts each
/// part's own mean. Samples past `k*m` are dropped.
pub fn segment_and_demean(series: &TimeSeries, cfg: SegmentConfig) -> Result<SegmentSet> {
    cfg.check_fits(series.len())?;
    let segments = series
        .samples()
        .chunks_exact(cfg.m)
        .take(cfg.k)
        .map(|chunk| {
            let mean = chunk.iter().sum::<f64>() / cfg.m as f64;
            chunk.iter().map(|x| x - mean).collect()
        })
        .collect();
    Ok(SegmentSet {
        segments,
        means_removed: true,
    })
}

/// Quadratically phase-coupled test signal: three unit cosines at `f1`, `f2`
/// and `f1 + f2` whose third phase is the sum of the first two, plus white
/// Gaussian noise of standard deviation `noise_sigma`.
pub fn generate_qpc(f1: f64, f2: f64, n: usize, noise_sigma: f64, seed: u64) -> Result<TimeSeries> {
    if !(f1 > 0.0 && f2 > 0.0 && f1 + f2 < 0.5) {
        return Err(Error::config(
            "frequency",
            format!("need 0 < f1, f2 and f1 + f2 < 0.5, got f1={f1}, f2={f2}"),
        ));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::config(
            "noise",
            format!("noise sigma must be >= 0, got {noise_sigma}"),
        ));
    }
    if n == 0 {
        return Err(Error::config("n", "length must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi1 = rng.random_range(0.0..TAU);
    let phi2 = rng.random_range(0.0..TAU);
    let f3 = f1 + f2;
    let samples = (0..n)
        .map(|t| {
            let t = t as f64;
            let noise: f64 = rng.sample(StandardNormal);
            (TAU * f1 * t + phi1).cos()
                + (TAU * f2 * t + phi2).cos()
                + (TAU * f3 * t + phi1 + phi2).cos()
                + noise_sigma * noise
        })
        .collect();
    TimeSeries::new(
        samples,
        format!("qpc(f1={f1},f2={f2},sigma={noise_sigma},seed={seed})"),
    )
}

/// Gaussian autoregressive series `x(t) = sum_j coeffs[j] x(t-j-1) + e(t)`
/// with standard normal innovations. The first `10 * coeffs.len()` samples
/// are generated and discarded as burn-in.
pub fn generate_gaussian_ar(coeffs: &[f64], n: usize, seed: u64) -> Result<TimeSeries> {
    if n == 0 {
        return Err(Error::config("n", "length must be positive"));
    }
    check_ar_stable(coeffs)?;
    let p = coeffs.len();
    let burn_in = 10 * p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut history = vec![0.0; burn_in + n];
    for t in 0..history.len() {
        let mut x: f64 = rng.sample(StandardNormal);
        for (j, a) in coeffs.iter().enumerate() {
            if t > j {
                x += a * history[t - j - 1];
            }
        }
        history[t] = x;
    }
    history.drain(..burn_in);
    TimeSeries::new(history, format!("ar(coeffs={coeffs:?},seed={seed})"))
}

/// Step-down (reverse Levinson) test: the AR polynomial has every root
/// strictly inside the unit circle iff every reflection coefficient has
/// magnitude below one.
fn check_ar_stable(coeffs: &[f64]) -> Result<()> {
    if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
        return Err(Error::Unstable(format!("non-finite coefficient {bad}")));
    }
    // predictor form 1 + c1 z^-1 + ... with c_j = -a_j
    let mut c: Vec<f64> = coeffs.iter().map(|a| -a).collect();
    while let Some(&k) = c.last() {
        if k.abs() >= 1.0 {
            return Err(Error::Unstable(format!(
                "coefficients {coeffs:?} have a root on or outside the unit circle"
            )));
        }
        let m = c.len();
        let denom = 1.0 - k * k;
        let next: Vec<f64> = (0..m - 1)
            .map(|j| (c[j] - k * c[m - 2 - j]) / denom)
            .collect();
        c = next;
    }
    Ok(())
}
