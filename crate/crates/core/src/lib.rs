//! Direct-method higher-order spectra.
//!
//! The pipeline splits a series into segments, removes each segment's mean,
//! transforms it, forms triple (bispectrum) or quadruple (trispectrum) DFT
//! products, box-smooths them over an `M3`-wide window and averages across
//! segments. The smoothing step is pluggable: six [`SmoothingPlan`]s trade
//! work against working-set size while producing the same estimate.
//!
//! ```
//! use hospec::{estimate_spectrum, generate_qpc, EstimationConfig, SmoothingPlan};
//!
//! let x = generate_qpc(0.1, 0.15, 256, 0.0, 7).unwrap();
//! let cfg = EstimationConfig::bispectrum(256, 1, 5, SmoothingPlan::Efficient);
//! let grid = estimate_spectrum(&x, &cfg).unwrap();
//! assert_eq!(grid.len(), grid.domain().len());
//! ```

pub mod bench;
pub mod dft;
pub mod error;
pub mod mem;
pub mod parallel;
pub mod series;
pub mod spectra;
pub mod window_sums;

pub use bench::{
    default_window, measure_peak_memory, peak_rss_bytes, run_bench, time_estimate, BenchPlan,
    BenchReport, CellStatus,
};
pub use dft::{dft_segments, naive_dft, SegmentSpectrumSet};
pub use error::{Error, Result};
pub use parallel::{parallel_estimate, partition_domain, Executor, Partition, WorkerConfig};
pub use series::{
    generate_gaussian_ar, generate_qpc, load_series, segment_and_demean, SegmentConfig, SegmentSet,
    SeriesFormat, TimeSeries,
};
pub use spectra::{
    compare_grids, estimate_spectrum, principal_domain, raw_bispectrum_value,
    raw_trispectrum_value, EstimationConfig, PrincipalDomain, SpectrumGrid, SpectrumOrder,
    SpectrumPoint,
};
pub use window_sums::{
    prefix_sums, prefix_sums_with, window_sums_1d, window_sums_2d, window_sums_2d_fn,
    window_sums_2d_peak_bytes, Boundary, Matrix2D, SmoothingPlan, WindowSpec,
};
