//! Trispectrum smoothing. The `M3^3` box is separable: 2-D window sums over
//! each `k3` slice of the raw cube, then a running sum of `M3` consecutive
//! slices along `k3`, held in a ring. Only slices reaching the principal
//! domain are ever formed.

use num_complex::Complex64;

use super::{PrincipalDomain, RawSpectra};
use crate::error::Result;
use crate::mem::Meter;
use crate::parallel::Executor;
use crate::window_sums::{
    plan_tiles, prefix_sweep, sweep_tile, wrap, ws_sweep, Geometry, Region, SmoothingPlan,
    WindowSpec,
};

pub(super) fn smooth(
    raw: &RawSpectra,
    domain: &PrincipalDomain,
    plan: SmoothingPlan,
    exec: &Executor,
) -> Result<(Vec<Complex64>, usize)> {
    let geom = Geometry::new(raw.m, raw.m, WindowSpec::periodic(raw.w))?;
    if plan.is_on_demand() {
        Ok(on_demand(raw, domain, plan, &geom, exec))
    } else {
        Ok(materialized(raw, domain, plan, &geom, exec))
    }
}

/// Per segment: raw slices in memory, smoothed and rolled along `k3`, then
/// accumulated into the average.
fn materialized(
    raw: &RawSpectra,
    domain: &PrincipalDomain,
    plan: SmoothingPlan,
    geom: &Geometry,
    exec: &Executor,
) -> (Vec<Complex64>, usize) {
    let (m, w) = (raw.m, raw.w);
    let pairs = domain.pair_count();
    let slices = domain.max_k3() + w;
    let mut acc = vec![Complex64::default(); domain.len()];
    let meter = Meter::new();
    let mut worker_peaks = 0;

    for f in raw.spectra {
        let fill = |slice: &mut [Complex64], t: usize| {
            let q = raw.shift(t);
            exec.for_each_chunk_mut(slice, m, |r, row| {
                let a = raw.shift(r);
                for (c, cell) in row.iter_mut().enumerate() {
                    *cell = raw.tri(f, a, raw.shift(c), q);
                }
            });
        };

        if plan == SmoothingPlan::Naive {
            let mut ring = meter.buffer::<Complex64>(w * m * m);
            for t in 0..slices {
                fill(&mut ring[(t % w) * m * m..][..m * m], t);
                if t + 1 < w {
                    continue;
                }
                let a = t + 1 - w;
                let ring: &[Complex64] = &ring;
                let live: Vec<usize> = (0..pairs).filter(|&p| domain.k3_len(p) > a).collect();
                let groups = exec.run_groups(
                    &live,
                    |_| 1,
                    |group, _| {
                        group
                            .iter()
                            .map(|&p| {
                                let (k1, k2) = domain.pair(p);
                                let mut s = Complex64::default();
                                for d in 0..w {
                                    let slice = &ring[((a + d) % w) * m * m..][..m * m];
                                    for u in 0..w {
                                        let row = &slice[wrap(k1 + u, m) * m..][..m];
                                        for v in 0..w {
                                            s += row[wrap(k2 + v, m)];
                                        }
                                    }
                                }
                                s
                            })
                            .collect::<Vec<_>>()
                    },
                );
                worker_peaks = worker_peaks.max(groups.iter().map(|g| g.1).sum());
                for (&p, s) in live.iter().zip(groups.into_iter().flat_map(|g| g.0)) {
                    acc[domain.pair_start(p) + a] += s;
                }
            }
            continue;
        }

        let mut slice = meter.buffer::<Complex64>(m * m);
        let mut ring = meter.buffer::<Complex64>(w * pairs);
        let mut running = meter.buffer::<Complex64>(pairs);
        for t in 0..slices {
            let slot = &mut ring[(t % w) * pairs..][..pairs];
            if t >= w {
                for (r, old) in running.iter_mut().zip(slot.iter()) {
                    *r -= *old;
                }
            }
            fill(&mut slice, t);
            let mut emit = |i: usize, j: usize, s: Complex64| {
                if let Some(p) = domain.pair_index(i, j) {
                    slot[p] = s;
                }
            };
            match plan {
                SmoothingPlan::Ws => ws_sweep(&slice, geom, &meter, exec, &mut emit),
                _ => prefix_sweep(&slice, geom, &meter, exec, &mut emit),
            }
            for (r, new) in running.iter_mut().zip(slot.iter()) {
                *r += *new;
            }
            if t + 1 >= w {
                let a = t + 1 - w;
                for (p, r) in running.iter().enumerate() {
                    if domain.k3_len(p) > a {
                        acc[domain.pair_start(p) + a] += *r;
                    }
                }
            }
        }
    }
    (acc, meter.peak() + worker_peaks)
}

/// Segment-summed products read on demand; the `(k1, k2)` plane is tiled
/// by the plan and each tile keeps its own ring of smoothed slices.
fn on_demand(
    raw: &RawSpectra,
    domain: &PrincipalDomain,
    plan: SmoothingPlan,
    geom: &Geometry,
    exec: &Executor,
) -> (Vec<Complex64>, usize) {
    let w = raw.w;
    let half = domain.half();
    let region = Region {
        rows: 0..half + 1,
        cols: 0..half / 2 + 1,
    };
    let tiles = plan_tiles(plan, w, &region);
    let groups = exec.run_groups(&tiles, Region::cells, |group, meter| {
        let mut out = Vec::new();
        for tile in group {
            tile_sweep(raw, domain, plan, geom, tile, meter, &mut out);
        }
        out
    });
    let mut acc = vec![Complex64::default(); domain.len()];
    let mut peak = 0;
    for (out, p) in groups {
        peak += p;
        for (idx, s) in out {
            acc[idx] = s;
        }
    }
    (acc, peak)
}

fn tile_sweep(
    raw: &RawSpectra,
    domain: &PrincipalDomain,
    plan: SmoothingPlan,
    geom: &Geometry,
    tile: &Region,
    meter: &Meter,
    out: &mut Vec<(usize, Complex64)>,
) {
    let w = raw.w;
    let (r0, c0) = (tile.rows.start, tile.cols.start);
    let width = tile.cols.len();
    let cells = tile.cells();
    // pair index per tile cell, if principal
    let owners: Vec<Option<usize>> = tile
        .rows
        .clone()
        .flat_map(|i| tile.cols.clone().map(move |j| (i, j)))
        .map(|(i, j)| domain.pair_index(i, j))
        .collect();
    let Some(k3_count) = owners.iter().flatten().map(|&p| domain.k3_len(p)).max() else {
        return;
    };

    let mut ring = meter.buffer::<Complex64>(w * cells);
    let mut running = meter.buffer::<Complex64>(cells);
    for t in 0..k3_count - 1 + w {
        let slot = &mut ring[(t % w) * cells..][..cells];
        if t >= w {
            for (r, old) in running.iter_mut().zip(slot.iter()) {
                *r -= *old;
            }
        }
        let q = raw.shift(t);
        let src = |r: usize, c: usize| raw.tri_sum(raw.shift(r), raw.shift(c), q);
        sweep_tile(plan, geom, tile, &src, meter, &mut |i, j, s| {
            slot[(i - r0) * width + (j - c0)] = s;
        });
        for (r, new) in running.iter_mut().zip(slot.iter()) {
            *r += *new;
        }
        if t + 1 >= w {
            let a = t + 1 - w;
            for (cell, owner) in owners.iter().enumerate() {
                if let Some(p) = *owner {
                    if domain.k3_len(p) > a {
                        out.push((domain.pair_start(p) + a, running[cell]));
                    }
                }
            }
        }
    }
}
