//! Sliding-window sums in one and two dimensions.
//!
//! Six interchangeable 2-D plans compute the same box sums with different
//! work and working-set profiles:
//!
//! | plan        | work       | extra memory | source access            |
//! |-------------|------------|--------------|--------------------------|
//! | `NAIVE`     | n^2 w^2    | O(1)         | re-sums every window     |
//! | `WS`        | n^2        | O(n^2)       | row/column strip recurrences |
//! | `PREFIX`    | n^2        | O(n^2)       | column sums, row prefix scans |
//! | `FAST`      | n^2        | O(n w)       | rolling band of w rows   |
//! | `EFFICIENT` | n^2        | O(w^2)       | column blocks of width w |
//! | `STREAMING` | n^2 w      | O(w)         | running column strips    |
//!
//! `FAST`, `EFFICIENT` and `STREAMING` read the source through a function and
//! never materialize it; `WS` and `PREFIX` need the matrix in memory.

mod materialized;
mod sweep;

use std::fmt;
use std::ops::{Add, AddAssign, Range, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mem::Meter;
use crate::parallel::Executor;

pub(crate) use materialized::{prefix_sweep, ws_sweep};
pub(crate) use sweep::{band_sweep, naive_sweep, stream_sweep};

/// Values the engines can accumulate.
pub trait Accum:
    Copy + Send + Sync + Default + Add<Output = Self> + Sub<Output = Self> + AddAssign + SubAssign
{
}

impl<T> Accum for T where
    T: Copy + Send + Sync + Default + Add<Output = T> + Sub<Output = T> + AddAssign + SubAssign
{
}

/// Row-major real matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix2D {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix2D {
    pub fn new(values: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if rows.checked_mul(cols) != Some(values.len()) {
            return Err(Error::Dimension(format!(
                "{} values cannot form a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dimension("matrix entries must be finite".into()));
        }
        Ok(Matrix2D { values, rows, cols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Matrix2D::new(rows.concat(), rows.len(), cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Only windows lying fully inside the matrix.
    Valid,
    /// Every anchor cell, with indices wrapping around both axes.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub w: usize,
    pub boundary: Boundary,
}

impl WindowSpec {
    pub fn valid(w: usize) -> Self {
        WindowSpec {
            w,
            boundary: Boundary::Valid,
        }
    }

    pub fn periodic(w: usize) -> Self {
        WindowSpec {
            w,
            boundary: Boundary::Periodic,
        }
    }
}

/// Window-sum algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SmoothingPlan {
    #[serde(rename = "NAIVE")]
    Naive,
    #[serde(rename = "WS")]
    Ws,
    #[serde(rename = "PREFIX")]
    Prefix,
    #[serde(rename = "FAST")]
    Fast,
    #[serde(rename = "EFFICIENT")]
    Efficient,
    #[serde(rename = "STREAMING")]
    Streaming,
}

impl SmoothingPlan {
    pub const ALL: [SmoothingPlan; 6] = [
        SmoothingPlan::Naive,
        SmoothingPlan::Ws,
        SmoothingPlan::Prefix,
        SmoothingPlan::Fast,
        SmoothingPlan::Efficient,
        SmoothingPlan::Streaming,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SmoothingPlan::Naive => "NAIVE",
            SmoothingPlan::Ws => "WS",
            SmoothingPlan::Prefix => "PREFIX",
            SmoothingPlan::Fast => "FAST",
            SmoothingPlan::Efficient => "EFFICIENT",
            SmoothingPlan::Streaming => "STREAMING",
        }
    }

    pub fn declared_work(self) -> &'static str {
        match self {
            SmoothingPlan::Naive => "O(n^2 w^2)",
            SmoothingPlan::Streaming => "O(n^2 w)",
            _ => "O(n^2)",
        }
    }

    pub fn declared_extra_memory(self) -> &'static str {
        match self {
            SmoothingPlan::Naive => "O(1)",
            SmoothingPlan::Ws | SmoothingPlan::Prefix => "O(n^2)",
            SmoothingPlan::Fast => "O(n w)",
            SmoothingPlan::Efficient => "O(w^2)",
            SmoothingPlan::Streaming => "O(w)",
        }
    }

    /// Plans that read the source on demand.
    pub fn is_on_demand(self) -> bool {
        matches!(
            self,
            SmoothingPlan::Fast | SmoothingPlan::Efficient | SmoothingPlan::Streaming
        )
    }

    pub fn valid_names() -> String {
        Self::ALL.map(Self::name).join(", ")
    }
}

impl fmt::Display for SmoothingPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SmoothingPlan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::config(
                    "plan",
                    format!("unknown plan {s:?}; valid plans: {}", Self::valid_names()),
                )
            })
    }
}

/// Shape of a window-sum problem: a `rows x cols` source and a `w x w` box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Geometry {
    pub rows: usize,
    pub cols: usize,
    pub w: usize,
    pub periodic: bool,
}

impl Geometry {
    pub fn new(rows: usize, cols: usize, spec: WindowSpec) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty source {rows}x{cols}")));
        }
        if spec.w == 0 {
            return Err(Error::Dimension("window must be at least 1".into()));
        }
        if spec.boundary == Boundary::Valid && spec.w > rows.min(cols) {
            return Err(Error::Dimension(format!(
                "window {} exceeds {rows}x{cols} source under valid boundary",
                spec.w
            )));
        }
        Ok(Geometry {
            rows,
            cols,
            w: spec.w,
            periodic: spec.boundary == Boundary::Periodic,
        })
    }

    pub fn out_rows(&self) -> usize {
        if self.periodic {
            self.rows
        } else {
            self.rows - self.w + 1
        }
    }

    pub fn out_cols(&self) -> usize {
        if self.periodic {
            self.cols
        } else {
            self.cols - self.w + 1
        }
    }

    pub fn full_region(&self) -> Region {
        Region {
            rows: 0..self.out_rows(),
            cols: 0..self.out_cols(),
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> usize {
        wrap(r, self.rows)
    }

    #[inline]
    pub fn col(&self, c: usize) -> usize {
        wrap(c, self.cols)
    }
}

#[inline]
pub(crate) fn wrap(i: usize, len: usize) -> usize {
    if i < len {
        i
    } else {
        i % len
    }
}

/// Rectangle of output anchors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Region {
    pub rows: Range<usize>,
    pub cols: Range<usize>,
}

impl Region {
    pub fn cells(&self) -> usize {
        self.rows.len() * self.cols.len()
    }
}

/// Fixed tiling of `region` for an on-demand plan. Tile shapes depend only on
/// the plan, the window and the region, so any assignment of tiles to workers
/// reproduces the same arithmetic.
pub(crate) fn plan_tiles(plan: SmoothingPlan, w: usize, region: &Region) -> Vec<Region> {
    let (row_step, col_step) = match plan {
        SmoothingPlan::Fast => ((4 * w).max(64), region.cols.len()),
        SmoothingPlan::Efficient => ((8 * w).max(64), w),
        _ => (16, region.cols.len()),
    };
    let mut tiles = Vec::new();
    for c0 in region.cols.clone().step_by(col_step.max(1)) {
        let c1 = (c0 + col_step).min(region.cols.end);
        for r0 in region.rows.clone().step_by(row_step) {
            let r1 = (r0 + row_step).min(region.rows.end);
            tiles.push(Region {
                rows: r0..r1,
                cols: c0..c1,
            });
        }
    }
    tiles
}

/// Runs one tile of an on-demand plan, emitting anchors row-major.
pub(crate) fn sweep_tile<T, S, E>(
    plan: SmoothingPlan,
    geom: &Geometry,
    tile: &Region,
    src: &S,
    meter: &Meter,
    emit: &mut E,
) where
    T: Accum,
    S: Fn(usize, usize) -> T,
    E: FnMut(usize, usize, T),
{
    if geom.w == 1 {
        for i in tile.rows.clone() {
            for j in tile.cols.clone() {
                emit(i, j, src(geom.row(i), geom.col(j)));
            }
        }
        return;
    }
    match plan {
        SmoothingPlan::Fast | SmoothingPlan::Efficient => band_sweep(geom, tile, src, meter, emit),
        SmoothingPlan::Streaming => stream_sweep(geom, tile, src, meter, emit),
        SmoothingPlan::Naive => naive_sweep(geom, tile, src, emit),
        SmoothingPlan::Ws | SmoothingPlan::Prefix => {
            unreachable!("{plan} needs a materialized source")
        }
    }
}

/// `result[i] = x[i] + ... + x[i + w - 1]` by the rolling update
/// `s[i+1] = s[i] - x[i] + x[i+w]`.
pub fn window_sums_1d(x: &[f64], w: usize) -> Result<Vec<f64>> {
    if w == 0 {
        return Err(Error::Dimension("window must be at least 1".into()));
    }
    if w > x.len() {
        return Err(Error::Dimension(format!(
            "window {w} exceeds sequence length {}",
            x.len()
        )));
    }
    if w == 1 {
        return Ok(x.to_vec());
    }
    let mut out = Vec::with_capacity(x.len() - w + 1);
    let mut s: f64 = x[..w].iter().sum();
    out.push(s);
    for i in 0..x.len() - w {
        s = s - x[i] + x[i + w];
        out.push(s);
    }
    Ok(out)
}

/// Inclusive running sums, left to right.
pub fn prefix_sums(x: &[f64]) -> Vec<f64> {
    x.iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Blocked parallel scan: local scans, a sequential scan of block totals,
/// then offsetting. Agrees with [`prefix_sums`] up to rounding of order
/// `eps * sum(|x|)`.
pub fn prefix_sums_with(x: &[f64], exec: &Executor) -> Vec<f64> {
    let p = exec.workers();
    if p == 1 || x.len() < 2 * p {
        return prefix_sums(x);
    }
    let block = x.len().div_ceil(p);
    let mut out = x.to_vec();
    exec.for_each_chunk_mut(&mut out, block, |_, chunk| {
        for i in 1..chunk.len() {
            chunk[i] += chunk[i - 1];
        }
    });
    let offsets: Vec<f64> = out
        .chunks(block)
        .map(|c| *c.last().expect("non-empty chunk"))
        .scan(0.0, |acc, total| {
            let before = *acc;
            *acc += total;
            Some(before)
        })
        .collect();
    exec.for_each_chunk_mut(&mut out, block, |b, chunk| {
        if b > 0 {
            for v in chunk.iter_mut() {
                *v += offsets[b];
            }
        }
    });
    out
}

/// 2-D box sums of `a`. Every plan gives the same result up to rounding.
pub fn window_sums_2d(a: &Matrix2D, spec: WindowSpec, plan: SmoothingPlan) -> Result<Matrix2D> {
    window_sums_2d_with(a, spec, plan, &Executor::sequential(), &Meter::new())
}

pub(crate) fn window_sums_2d_with(
    a: &Matrix2D,
    spec: WindowSpec,
    plan: SmoothingPlan,
    exec: &Executor,
    meter: &Meter,
) -> Result<Matrix2D> {
    let geom = Geometry::new(a.rows, a.cols, spec)?;
    let out_cols = geom.out_cols();
    let mut out = vec![0.0; geom.out_rows() * out_cols];
    let mut emit = |i: usize, j: usize, v: f64| out[i * out_cols + j] = v;
    match plan {
        SmoothingPlan::Ws => ws_sweep(&a.values, &geom, meter, exec, &mut emit),
        SmoothingPlan::Prefix => prefix_sweep(&a.values, &geom, meter, exec, &mut emit),
        _ => {
            let src = |r: usize, c: usize| a.values[r * a.cols + c];
            for tile in plan_tiles(plan, geom.w, &geom.full_region()) {
                sweep_tile(plan, &geom, &tile, &src, meter, &mut emit);
            }
        }
    }
    Matrix2D::new(out, geom.out_rows(), out_cols)
}

/// Box sums over a source that is only available through `value_at`.
/// Anchors are emitted row-major within each tile of the plan; no more than
/// the plan's working set is ever held.
pub fn window_sums_2d_fn<S, E>(
    value_at: S,
    rows: usize,
    cols: usize,
    spec: WindowSpec,
    plan: SmoothingPlan,
    mut emit: E,
) -> Result<()>
where
    S: Fn(usize, usize) -> f64,
    E: FnMut(usize, usize, f64),
{
    window_sums_2d_fn_metered(value_at, rows, cols, spec, plan, &Meter::new(), &mut emit)
}

pub(crate) fn window_sums_2d_fn_metered<T, S, E>(
    value_at: S,
    rows: usize,
    cols: usize,
    spec: WindowSpec,
    plan: SmoothingPlan,
    meter: &Meter,
    emit: &mut E,
) -> Result<()>
where
    T: Accum,
    S: Fn(usize, usize) -> T,
    E: FnMut(usize, usize, T),
{
    if !plan.is_on_demand() {
        return Err(Error::config(
            "plan",
            format!("{plan} needs a materialized source; use FAST, EFFICIENT or STREAMING"),
        ));
    }
    let geom = Geometry::new(rows, cols, spec)?;
    for tile in plan_tiles(plan, geom.w, &geom.full_region()) {
        sweep_tile(plan, &geom, &tile, &value_at, meter, emit);
    }
    Ok(())
}

/// Peak scratch bytes of one `window_sums_2d` call under `plan`.
pub fn window_sums_2d_peak_bytes(
    a: &Matrix2D,
    spec: WindowSpec,
    plan: SmoothingPlan,
) -> Result<usize> {
    let meter = Meter::new();
    window_sums_2d_with(a, spec, plan, &Executor::sequential(), &meter)?;
    Ok(meter.peak())
}
