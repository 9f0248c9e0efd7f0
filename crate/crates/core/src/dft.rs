//! Per-segment discrete Fourier transforms.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::series::SegmentSet;

/// DFT of each segment: `spectra[i][k] = sum_u x_i(u) exp(-j 2 pi u k / M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpectrumSet {
    spectra: Vec<Vec<Complex64>>,
    m: usize,
}

impl SegmentSpectrumSet {
    pub fn spectra(&self) -> &[Vec<Complex64>] {
        &self.spectra
    }

    /// Transform length.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Segment count.
    pub fn k(&self) -> usize {
        self.spectra.len()
    }
}

/// Transforms every segment. Demeaning must already have happened.
pub fn dft_segments(segs: &SegmentSet) -> Result<SegmentSpectrumSet> {
    if !segs.means_removed() {
        return Err(Error::Contract(
            "segments must be demeaned before the Fourier transform".into(),
        ));
    }
    let m = segs.segment_len();
    if m == 0 {
        return Err(Error::config("M", "segment length must be positive"));
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let spectra = segs
        .segments()
        .iter()
        .map(|seg| {
            let mut buf: Vec<Complex64> = seg.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            fft.process_with_scratch(&mut buf, &mut scratch);
            buf
        })
        .collect();
    Ok(SegmentSpectrumSet { spectra, m })
}

/// Literal O(M^2) evaluation of the defining sum.
pub fn naive_dft(segment: &[f64]) -> Vec<Complex64> {
    let m = segment.len();
    (0..m)
        .map(|k| {
            segment
                .iter()
                .enumerate()
                .map(|(u, &x)| {
                    // reduce u*k mod M first so the angle stays small
                    let phase = -TAU * ((u * k) % m) as f64 / m as f64;
                    Complex64::from_polar(x, phase)
                })
                .sum()
        })
        .collect()
}
