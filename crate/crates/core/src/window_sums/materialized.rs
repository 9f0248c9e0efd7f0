//! Engines over a source held in memory: strip recurrences (`WS`) and
//! prefix differencing (`PREFIX`). Row- and column-wise passes are
//! independent per line and run through the executor.

use super::sweep::roll_strip;
use super::{Accum, Geometry};
use crate::mem::Meter;
use crate::parallel::Executor;

fn emit_identity<T: Accum, E: FnMut(usize, usize, T)>(a: &[T], geom: &Geometry, emit: &mut E) {
    for i in 0..geom.out_rows() {
        for j in 0..geom.out_cols() {
            emit(i, j, a[i * geom.cols + j]);
        }
    }
}

/// Horizontal strips `r`, first-row vertical strips `c`, then
/// `s[0][j] = s[0][j-1] - c[j-1] + c[j+w-1]` and
/// `s[i][j] = s[i-1][j] - r[i-1][j] + r[i+w-1][j]`.
pub(crate) fn ws_sweep<T, E>(a: &[T], geom: &Geometry, meter: &Meter, exec: &Executor, emit: &mut E)
where
    T: Accum,
    E: FnMut(usize, usize, T),
{
    let Geometry {
        rows,
        cols,
        w,
        periodic,
    } = *geom;
    debug_assert_eq!(a.len(), rows * cols);
    if w == 1 {
        emit_identity(a, geom, emit);
        return;
    }
    let (out_rows, out_cols) = (geom.out_rows(), geom.out_cols());

    let mut r = meter.buffer::<T>(rows * out_cols);
    exec.for_each_chunk_mut(&mut r, out_cols, |i, out| {
        let row = &a[i * cols..(i + 1) * cols];
        roll_strip(row, w, periodic, 0, out_cols, |j, s| out[j] = s);
    });

    let mut c = meter.buffer::<T>(cols);
    for k in 0..w {
        let row = &a[geom.row(k) * cols..][..cols];
        for (cj, &v) in c.iter_mut().zip(row) {
            *cj += v;
        }
    }

    let mut s = meter.buffer::<T>(out_cols);
    for u in 0..w {
        for v in 0..w {
            s[0] += a[geom.row(u) * cols + geom.col(v)];
        }
    }
    for j in 1..out_cols {
        s[j] = s[j - 1] - c[j - 1] + c[geom.col(j + w - 1)];
    }
    for (j, &v) in s.iter().enumerate() {
        emit(0, j, v);
    }
    for i in 1..out_rows {
        let leaving = &r[(i - 1) * out_cols..i * out_cols];
        let entering = &r[geom.row(i + w - 1) * out_cols..][..out_cols];
        for j in 0..out_cols {
            s[j] = s[j] - leaving[j] + entering[j];
            emit(i, j, s[j]);
        }
    }
}

/// Column window sums by prefix differencing, row prefix sums `t` of those,
/// then `s[i][j] = t[i][j+w-1] - t[i][j-1]`.
pub(crate) fn prefix_sweep<T, E>(
    a: &[T],
    geom: &Geometry,
    meter: &Meter,
    exec: &Executor,
    emit: &mut E,
) where
    T: Accum,
    E: FnMut(usize, usize, T),
{
    let Geometry { rows, cols, w, .. } = *geom;
    debug_assert_eq!(a.len(), rows * cols);
    if w == 1 {
        emit_identity(a, geom, emit);
        return;
    }
    let (out_rows, out_cols) = (geom.out_rows(), geom.out_cols());

    // column-major: colsums[j * out_rows + i] sums rows i..i+w of column j
    let mut colsums = meter.buffer::<T>(cols * out_rows);
    exec.for_each_chunk_mut(&mut colsums, out_rows, |j, out| {
        let at = |t: usize| a[geom.row(t) * cols + j];
        let mut lead = T::default();
        for t in 0..w - 1 {
            lead += at(t);
        }
        let mut lag = T::default();
        for (i, cell) in out.iter_mut().enumerate() {
            lead += at(i + w - 1);
            if i > 0 {
                lag += at(i - 1);
            }
            *cell = lead - lag;
        }
    });

    let scan_len = out_cols + w - 1;
    let mut scans = meter.buffer::<T>(out_rows * scan_len);
    {
        let colsums: &[T] = &colsums;
        exec.for_each_chunk_mut(&mut scans, scan_len, |i, out| {
            let mut acc = T::default();
            for (jj, cell) in out.iter_mut().enumerate() {
                acc += colsums[geom.col(jj) * out_rows + i];
                *cell = acc;
            }
        });
    }
    drop(colsums);

    for i in 0..out_rows {
        let t = &scans[i * scan_len..(i + 1) * scan_len];
        for j in 0..out_cols {
            let s = if j == 0 {
                t[w - 1]
            } else {
                t[j + w - 1] - t[j - 1]
            };
            emit(i, j, s);
        }
    }
}
