//! Desk-scale benchmark harness.
//!
//! Cells of the `(order, n, plan, workers)` cross product run one at a time.
//! Each cell is repeated and the median wall time reported. A cell whose
//! first repeat overruns the time or memory limit is recorded as
//! [`CellStatus::Exceeded`] and not repeated; limits are checked between
//! repeats, never mid-computation.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::{Executor, WorkerConfig};
use crate::series::{generate_qpc, SegmentConfig, TimeSeries};
use crate::spectra::{estimate_with, EstimationConfig, SpectrumOrder};
use crate::window_sums::SmoothingPlan;

/// Window lengths used by the reference timing table.
const WINDOW_TABLE: [(usize, usize); 7] = [
    (128, 21),
    (256, 33),
    (512, 49),
    (1024, 77),
    (2048, 117),
    (4096, 181),
    (8192, 279),
];

/// Smoothing window for segment length `m`: the table value when `m` is
/// listed, otherwise the nearest odd value on the fitted `m^0.622` curve,
/// capped below `m / 2`.
pub fn default_window(m: usize) -> usize {
    let w = match WINDOW_TABLE.iter().find(|(len, _)| *len == m) {
        Some(&(_, w)) => w,
        None => {
            let x = 21.0 * (m as f64 / 128.0).powf(0.622);
            let w = x.round() as usize;
            if w.is_multiple_of(2) {
                w + 1
            } else {
                w
            }
        }
    };
    let cap = m.saturating_sub(1) / 2;
    w.min(cap).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Exceeded,
}

/// One benchmark cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub plan: SmoothingPlan,
    pub order: usize,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M3")]
    pub m3: usize,
    #[serde(rename = "P")]
    pub p: usize,
    pub wall_seconds: f64,
    pub peak_extra_bytes: u64,
    /// Process-wide resident high-water mark; informational only.
    pub peak_rss_bytes: u64,
    pub checksum: f64,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub orders: Vec<SpectrumOrder>,
    /// Series lengths `n`; each cell uses `M = n / K`.
    pub sizes: Vec<usize>,
    pub plans: Vec<SmoothingPlan>,
    pub threads: Vec<usize>,
    pub repeats: usize,
    pub segments: usize,
    /// Fixed `M3` for every cell; [`default_window`] when absent.
    pub window: Option<usize>,
    pub time_limit: Duration,
    pub mem_limit: u64,
    pub seed: u64,
}

impl Default for BenchPlan {
    fn default() -> Self {
        BenchPlan {
            orders: vec![SpectrumOrder::Bispectrum],
            sizes: vec![256, 512],
            plans: SmoothingPlan::ALL.to_vec(),
            threads: vec![1],
            repeats: 3,
            segments: 1,
            window: None,
            time_limit: Duration::from_secs(60),
            mem_limit: 4 << 30,
            seed: 1,
        }
    }
}

impl BenchPlan {
    fn validate(&self) -> Result<()> {
        let empty = [
            ("orders", self.orders.is_empty()),
            ("sizes", self.sizes.is_empty()),
            ("plans", self.plans.is_empty()),
            ("threads-list", self.threads.is_empty()),
        ];
        if let Some((param, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::config(param, "empty list leaves nothing to run"));
        }
        if self.repeats == 0 {
            return Err(Error::config("repeats", "at least one repeat is needed"));
        }
        if self.segments == 0 {
            return Err(Error::config("segments", "segment count must be positive"));
        }
        if self.threads.contains(&0) {
            return Err(Error::config(
                "threads-list",
                "worker count must be at least 1",
            ));
        }
        Ok(())
    }

    /// Runs every cell in order, handing each report to `progress` as it
    /// completes.
    pub fn run(&self, mut progress: impl FnMut(&BenchReport)) -> Result<Vec<BenchReport>> {
        self.validate()?;
        let mut reports = Vec::new();
        for &order in &self.orders {
            for &n in &self.sizes {
                let m = n / self.segments;
                let m3 = self.window.unwrap_or_else(|| default_window(m));
                let series = generate_qpc(0.1, 0.15, n, 0.5, self.seed)?;
                for &plan in &self.plans {
                    let cfg = EstimationConfig::new(
                        order,
                        SegmentConfig {
                            m,
                            k: self.segments,
                        },
                        m3,
                        plan,
                    );
                    cfg.validate(n)?;
                    for &p in &self.threads {
                        let report = run_cell(&series, &cfg, &WorkerConfig::new(p)?, self)?;
                        progress(&report);
                        reports.push(report);
                    }
                }
            }
        }
        Ok(reports)
    }
}

/// Shorthand for [`BenchPlan::run`] without progress output.
pub fn run_bench(plan: &BenchPlan) -> Result<Vec<BenchReport>> {
    plan.run(|_| {})
}

fn run_cell(
    series: &TimeSeries,
    cfg: &EstimationConfig,
    workers: &WorkerConfig,
    plan: &BenchPlan,
) -> Result<BenchReport> {
    let exec = Executor::new(workers)?;
    let mut times = Vec::with_capacity(plan.repeats);
    let mut first = None;
    let mut status = CellStatus::Ok;
    for _ in 0..plan.repeats {
        let start = Instant::now();
        let est = estimate_with(series, cfg, &exec)?;
        let elapsed = start.elapsed();
        times.push(elapsed.as_secs_f64());
        if first.is_none() {
            let peak = est.peak_extra_bytes as u64;
            first = Some((peak, est.grid.checksum()));
            if elapsed > plan.time_limit || peak > plan.mem_limit {
                status = CellStatus::Exceeded;
                break;
            }
        }
    }
    let (peak_extra_bytes, checksum) = first.expect("at least one repeat");
    Ok(BenchReport {
        plan: cfg.plan,
        order: cfg.order.value(),
        n: series.len(),
        m: cfg.segment.m,
        k: cfg.segment.k,
        m3: cfg.m3,
        p: exec.workers(),
        wall_seconds: median(&mut times).max(f64::MIN_POSITIVE),
        peak_extra_bytes,
        peak_rss_bytes: peak_rss_bytes(),
        checksum,
        status,
    })
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Median wall time in seconds of `repeats` estimates.
pub fn time_estimate(
    series: &TimeSeries,
    cfg: &EstimationConfig,
    workers: &WorkerConfig,
    repeats: usize,
) -> Result<f64> {
    let exec = Executor::new(workers)?;
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        estimate_with(series, cfg, &exec)?;
        times.push(start.elapsed().as_secs_f64());
    }
    Ok(median(&mut times))
}

/// Smoothing working-set high-water mark of one estimate, summed over
/// workers. Input series, spectra and the output grid are excluded.
pub fn measure_peak_memory(
    series: &TimeSeries,
    cfg: &EstimationConfig,
    workers: &WorkerConfig,
) -> Result<usize> {
    let exec = Executor::new(workers)?;
    Ok(estimate_with(series, cfg, &exec)?.peak_extra_bytes)
}

/// Resident-set high-water mark of this process, or 0 where the platform
/// does not report it.
pub fn peak_rss_bytes() -> u64 {
    std::fs::read_to_string("/proc/self/status")
        .ok()
        .and_then(|s| {
            s.lines()
                .find_map(|l| l.strip_prefix("VmHWM:"))
                .and_then(|v| v.trim().trim_end_matches("kB").trim().parse::<u64>().ok())
        })
        .map_or(0, |kb| kb * 1024)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_table_and_fit() {
        assert_eq!(default_window(1024), 77);
        assert_eq!(default_window(4096), 181);
        for m in [64, 100, 300, 16384] {
            let w = default_window(m);
            assert!(w % 2 == 1 && 2 * w < m, "M={m} w={w}");
        }
        assert_eq!(default_window(3), 1);
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn harness_counts_and_repeats() {
        let plan = BenchPlan {
            sizes: vec![64, 128],
            plans: vec![SmoothingPlan::Naive, SmoothingPlan::Efficient],
            repeats: 3,
            ..BenchPlan::default()
        };
        let reports = run_bench(&plan).unwrap();
        assert_eq!(reports.len(), 4);
        for r in &reports {
            assert_eq!(r.status, CellStatus::Ok);
            assert!(r.wall_seconds > 0.0);
            assert_eq!(r.m, r.n);
        }
        let again = run_bench(&plan).unwrap();
        for (a, b) in reports.iter().zip(&again) {
            assert_eq!(a.checksum, b.checksum);
        }
        for pair in reports.chunks(2) {
            let (a, b) = (pair[0].checksum, pair[1].checksum);
            assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()));
        }
    }

    #[test]
    fn empty_cross_product_rejected() {
        let plan = BenchPlan {
            plans: vec![],
            ..BenchPlan::default()
        };
        assert!(matches!(
            run_bench(&plan),
            Err(Error::Config { param: "plans", .. })
        ));
    }

    #[test]
    fn memory_limit_marks_cell_exceeded() {
        let plan = BenchPlan {
            sizes: vec![128],
            plans: vec![SmoothingPlan::Ws],
            repeats: 5,
            mem_limit: 1,
            ..BenchPlan::default()
        };
        let r = run_bench(&plan).unwrap();
        assert_eq!(r[0].status, CellStatus::Exceeded);
        assert!(r[0].peak_extra_bytes > 1);
    }

    #[test]
    fn report_json_round_trip() {
        let r = BenchReport {
            plan: SmoothingPlan::Efficient,
            order: 3,
            n: 512,
            m: 512,
            k: 1,
            m3: 49,
            p: 4,
            wall_seconds: 0.012345678901234567,
            peak_extra_bytes: 123456,
            peak_rss_bytes: 7890,
            checksum: 1.0 / 3.0,
            status: CellStatus::Ok,
        };
        let text = serde_json::to_string(&r).unwrap();
        for key in [
            "\"plan\":\"EFFICIENT\"",
            "\"M\":512",
            "\"K\":1",
            "\"M3\":49",
            "\"P\":4",
            "\"wall_seconds\"",
            "\"peak_extra_bytes\"",
            "\"peak_rss_bytes\"",
            "\"checksum\"",
        ] {
            assert!(text.contains(key), "{key} missing from {text}");
        }
        let back: BenchReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
