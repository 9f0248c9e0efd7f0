//! Bispectrum smoothing over the periodic `M x M` grid.

use num_complex::Complex64;

use super::{PrincipalDomain, RawSpectra};
use crate::error::Result;
use crate::mem::Meter;
use crate::parallel::Executor;
use crate::window_sums::{
    plan_tiles, prefix_sweep, sweep_tile, wrap, ws_sweep, Geometry, Region, SmoothingPlan,
    WindowSpec,
};

/// Unnormalized window sums at every principal point, summed over
/// segments, with the smoothing high-water mark.
pub(super) fn smooth(
    raw: &RawSpectra,
    domain: &PrincipalDomain,
    plan: SmoothingPlan,
    exec: &Executor,
) -> Result<(Vec<Complex64>, usize)> {
    let m = raw.m;
    let geom = Geometry::new(m, m, WindowSpec::periodic(raw.w))?;
    let mut acc = vec![Complex64::default(); domain.len()];

    if plan.is_on_demand() {
        // average first, then one smoothing pass over the summed products
        let src = |r: usize, c: usize| raw.bi_sum(raw.shift(r), raw.shift(c));
        let tiles = plan_tiles(plan, raw.w, &geom.full_region());
        let groups = exec.run_groups(&tiles, Region::cells, |group, meter| {
            let mut out = Vec::new();
            for tile in group {
                sweep_tile(plan, &geom, tile, &src, meter, &mut |i, j, s| {
                    if let Some(idx) = domain.pair_index(i, j) {
                        out.push((idx, s));
                    }
                });
            }
            out
        });
        let mut peak = 0;
        for (out, p) in groups {
            peak += p;
            for (idx, s) in out {
                acc[idx] = s;
            }
        }
        return Ok((acc, peak));
    }

    let meter = Meter::new();
    let mut worker_peaks = 0;
    for f in raw.spectra {
        let mut grid = meter.buffer::<Complex64>(m * m);
        exec.for_each_chunk_mut(&mut grid, m, |r, row| {
            let a = raw.shift(r);
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = raw.bi(f, a, raw.shift(c));
            }
        });
        let mut emit = |i: usize, j: usize, s: Complex64| {
            if let Some(idx) = domain.pair_index(i, j) {
                acc[idx] += s;
            }
        };
        match plan {
            SmoothingPlan::Ws => ws_sweep(&grid, &geom, &meter, exec, &mut emit),
            SmoothingPlan::Prefix => prefix_sweep(&grid, &geom, &meter, exec, &mut emit),
            _ => {
                let sums = naive_points(&grid, domain, raw.w, exec);
                worker_peaks = worker_peaks.max(sums.1);
                for (a, s) in acc.iter_mut().zip(sums.0) {
                    *a += s;
                }
            }
        }
    }
    Ok((acc, meter.peak() + worker_peaks))
}

/// Re-sums the `w x w` window of every principal point, rows of the domain
/// dealt out to workers.
fn naive_points(
    grid: &[Complex64],
    domain: &PrincipalDomain,
    w: usize,
    exec: &Executor,
) -> (Vec<Complex64>, usize) {
    let m = domain.m();
    let rows: Vec<usize> = (0..=domain.half()).collect();
    let groups = exec.run_groups(
        &rows,
        |&k1| domain.row_len(k1),
        |group, _| {
            let mut out = Vec::new();
            for &k1 in group {
                for k2 in 0..domain.row_len(k1) {
                    let mut s = Complex64::default();
                    for u in 0..w {
                        let row = &grid[wrap(k1 + u, m) * m..][..m];
                        for v in 0..w {
                            s += row[wrap(k2 + v, m)];
                        }
                    }
                    out.push(s);
                }
            }
            out
        },
    );
    let peak = groups.iter().map(|g| g.1).sum();
    (groups.into_iter().flat_map(|g| g.0).collect(), peak)
}
