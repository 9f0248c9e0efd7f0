//! On-demand engines: the source is read through a closure and never stored
//! beyond each engine's working set.

use super::{wrap, Accum, Geometry, Region};
use crate::mem::Meter;

/// Direct re-summation of every window.
pub(crate) fn naive_sweep<T, S, E>(geom: &Geometry, tile: &Region, src: &S, emit: &mut E)
where
    T: Accum,
    S: Fn(usize, usize) -> T,
    E: FnMut(usize, usize, T),
{
    let w = geom.w;
    for i in tile.rows.clone() {
        for j in tile.cols.clone() {
            let mut s = T::default();
            for u in 0..w {
                let r = geom.row(i + u);
                for v in 0..w {
                    s += src(r, geom.col(j + v));
                }
            }
            emit(i, j, s);
        }
    }
}

/// Rolling 1-D sums over `strip`, emitting anchors `c0..c1`.
///
/// With `wrapped`, `strip[c]` holds absolute column `c` of a periodic row;
/// otherwise `strip[0]` holds column `c0`.
#[inline]
pub(super) fn roll_strip<T: Accum>(
    strip: &[T],
    w: usize,
    wrapped: bool,
    c0: usize,
    c1: usize,
    mut f: impl FnMut(usize, T),
) {
    let len = strip.len();
    let at = |c: usize| {
        if wrapped {
            strip[wrap(c, len)]
        } else {
            strip[c - c0]
        }
    };
    let mut s = T::default();
    for t in 0..w {
        s += at(c0 + t);
    }
    f(c0, s);
    for j in c0 + 1..c1 {
        s = s - at(j - 1) + at(j + w - 1);
        f(j, s);
    }
}

/// Rolling band of `w` source rows plus one row of vertical strip sums.
///
/// For a tile spanning the full periodic width the strip row has `cols`
/// entries and wraps; otherwise it covers the tile's columns plus `w - 1`.
/// Each needed source cell is read once, plus `w - 1` boundary rows per tile.
pub(crate) fn band_sweep<T, S, E>(
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
    let w = geom.w;
    let (r0, r1) = (tile.rows.start, tile.rows.end);
    let (c0, c1) = (tile.cols.start, tile.cols.end);
    if r0 >= r1 || c0 >= c1 {
        return;
    }
    let wrapped = geom.periodic && c0 == 0 && c1 == geom.cols;
    let width = if wrapped { geom.cols } else { c1 - c0 + w - 1 };
    let src_col = |t: usize| if wrapped { t } else { geom.col(c0 + t) };

    let mut band = meter.buffer::<T>(w * width);
    let mut strips = meter.buffer::<T>(width);
    for u in 0..w {
        let r = geom.row(r0 + u);
        let slot = &mut band[u * width..(u + 1) * width];
        for (t, cell) in slot.iter_mut().enumerate() {
            let v = src(r, src_col(t));
            *cell = v;
            strips[t] += v;
        }
    }
    for i in r0..r1 {
        roll_strip(&strips, w, wrapped, c0, c1, |j, s| emit(i, j, s));
        if i + 1 == r1 {
            break;
        }
        // the slot holding row i receives row i + w
        let k = (i - r0) % w;
        let r = geom.row(i + w);
        let slot = &mut band[k * width..(k + 1) * width];
        for (t, (cell, strip)) in slot.iter_mut().zip(strips.iter_mut()).enumerate() {
            let v = src(r, src_col(t));
            *strip = *strip - *cell + v;
            *cell = v;
        }
    }
}

/// Per output row, a ring of `w` vertical strips, each summed afresh from
/// `w` source reads.
pub(crate) fn stream_sweep<T, S, E>(
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
    let w = geom.w;
    let (c0, c1) = (tile.cols.start, tile.cols.end);
    if c0 >= c1 {
        return;
    }
    let mut ring = meter.buffer::<T>(w);
    for i in tile.rows.clone() {
        let strip = |c: usize| {
            let col = geom.col(c);
            let mut s = T::default();
            for u in 0..w {
                s += src(geom.row(i + u), col);
            }
            s
        };
        let mut s = T::default();
        for (t, slot) in ring.iter_mut().enumerate() {
            *slot = strip(c0 + t);
            s += *slot;
        }
        emit(i, c0, s);
        for j in c0 + 1..c1 {
            let k = (j - 1 - c0) % w;
            let fresh = strip(j + w - 1);
            s = s - ring[k] + fresh;
            ring[k] = fresh;
            emit(i, j, s);
        }
    }
}
