//! Uniform-grid spatial indices for boundary facets and boundary atoms.

use crate::geom::{dist, Pt};


/// Visit the cells of the square ring at L∞ radius `ring` around `(ci, cj)`,
/// clamped to the grid. O(ring) work, not O(ring²).
#[inline]
fn visit_ring<F: FnMut(usize, usize)>(
    ci: isize,
    cj: isize,
    ring: isize,
    nx: usize,
    ny: usize,
    mut visit: F,
) {
    let inb = |i: isize, j: isize| i >= 0 && j >= 0 && i < nx as isize && j < ny as isize;
    if ring == 0 {
        if inb(ci, cj) {
            visit(ci as usize, cj as usize);
        }
        return;
    }
    for i in (ci - ring)..=(ci + ring) {
        for j in [cj - ring, cj + ring] {
            if inb(i, j) {
                visit(i as usize, j as usize);
            }
        }
    }
    for j in (cj - ring + 1)..=(cj + ring - 1) {
        for i in [ci - ring, ci + ring] {
            if inb(i, j) {
                visit(i as usize, j as usize);
            }
        }
    }
}

/// Bucket grid over facet bounding boxes. Facets are referenced by id; the
/// caller supplies the facet extents at build time and a distance functional
/// at query time.
pub struct FacetIndex {
    origin: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
    n_facets: usize,
    /// Chebyshev cell distance to the nearest occupied cell; searches from a
    /// cell may start at ring `floor − 1` without missing anything.
    cheb: Vec<u32>,
}

impl FacetIndex {
    pub fn build(boxes: &[([f64; 2], [f64; 2])], cell_hint: f64) -> Self {
        assert!(!boxes.is_empty(), "facet index needs at least one facet");
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for (a, b) in boxes {
            for k in 0..2 {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(b[k]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let cell = cell_hint.max(span / 512.0);
        let nx = (((hi[0] - lo[0]) / cell).ceil() as usize + 1).max(1);
        let ny = (((hi[1] - lo[1]) / cell).ceil() as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (id, (a, b)) in boxes.iter().enumerate() {
            let i0 = (((a[0] - lo[0]) / cell).floor() as isize).clamp(0, nx as isize - 1) as usize;
            let i1 = (((b[0] - lo[0]) / cell).floor() as isize).clamp(0, nx as isize - 1) as usize;
            let j0 = (((a[1] - lo[1]) / cell).floor() as isize).clamp(0, ny as isize - 1) as usize;
            let j1 = (((b[1] - lo[1]) / cell).floor() as isize).clamp(0, ny as isize - 1) as usize;
            for i in i0..=i1 {
                for j in j0..=j1 {
                    buckets[j * nx + i].push(id as u32);
                }
            }
        }
        // Multi-source Chebyshev distance to occupied cells.
        let mut cheb = vec![u32::MAX; nx * ny];
        let mut queue = std::collections::VecDeque::new();
        for (id, b) in buckets.iter().enumerate() {
            if !b.is_empty() {
                cheb[id] = 0;
                queue.push_back(id);
            }
        }
        while let Some(id) = queue.pop_front() {
            let (i, j) = ((id % nx) as isize, (id / nx) as isize);
            let d = cheb[id];
            for di in -1..=1isize {
                for dj in -1..=1isize {
                    let (ni, nj) = (i + di, j + dj);
                    if ni < 0 || nj < 0 || ni >= nx as isize || nj >= ny as isize {
                        continue;
                    }
                    let nid = nj as usize * nx + ni as usize;
                    if cheb[nid] > d + 1 {
                        cheb[nid] = d + 1;
                        queue.push_back(nid);
                    }
                }
            }
        }
        FacetIndex {
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
            n_facets: boxes.len(),
            cheb,
        }
    }

    /// Nearest facet by expanding ring search. `facet_dist` must return the
    /// exact distance from the query point to facet `id`.
    pub fn nearest<F: Fn(u32) -> f64>(&self, x: Pt, facet_dist: F) -> (u32, f64) {
        let ci = ((x[0] - self.origin[0]) / self.cell).floor() as isize;
        let cj = ((x[1] - self.origin[1]) / self.cell).floor() as isize;
        let mut best = (u32::MAX, f64::INFINITY);
        // Enough rings to sweep the whole grid even from far outside it.
        let max_ring = (ci.abs().max((self.nx as isize - ci).abs()))
            .max(cj.abs().max((self.ny as isize - cj).abs()))
            + 2;
        // All rings below the Chebyshev floor are provably empty.
        let mut ring = 0isize;
        if ci >= 0 && cj >= 0 && ci < self.nx as isize && cj < self.ny as isize {
            let floor = self.cheb[cj as usize * self.nx + ci as usize];
            if floor != u32::MAX {
                ring = (floor as isize - 1).max(0);
            }
        }
        while ring <= max_ring {
            // Once a candidate is found, one extra ring guarantees exactness.
            let ring_floor = (ring - 1).max(0) as f64 * self.cell;
            if best.1.is_finite() && ring_floor > best.1 {
                break;
            }
            let mut visited_any = false;
            visit_ring(ci, cj, ring, self.nx, self.ny, |i, j| {
                visited_any = true;
                for &id in &self.buckets[j * self.nx + i] {
                    let d = facet_dist(id);
                    if d < best.1 {
                        best = (id, d);
                    }
                }
            });
            if !visited_any && best.1.is_finite() {
                break;
            }
            ring += 1;
        }
        debug_assert!(best.0 != u32::MAX || self.n_facets == 0);
        best
    }

    /// Every facet whose bucket lies within `r + cell` of `x` — a superset of
    /// the facets meeting `B(x, r)`, possibly with repeats (a facet may span
    /// several buckets). Callers that accumulate must dedup; min-style
    /// callers need not.
    pub fn within<F: FnMut(u32)>(&self, x: Pt, r: f64, mut visit: F) {
        let pad = r + self.cell;
        let i0 = (((x[0] - pad - self.origin[0]) / self.cell).floor() as isize)
            .clamp(0, self.nx as isize - 1) as usize;
        let i1 = (((x[0] + pad - self.origin[0]) / self.cell).floor() as isize)
            .clamp(0, self.nx as isize - 1) as usize;
        let j0 = (((x[1] - pad - self.origin[1]) / self.cell).floor() as isize)
            .clamp(0, self.ny as isize - 1) as usize;
        let j1 = (((x[1] + pad - self.origin[1]) / self.cell).floor() as isize)
            .clamp(0, self.ny as isize - 1) as usize;
        for i in i0..=i1 {
            for j in j0..=j1 {
                for &id in &self.buckets[j * self.nx + i] {
                    visit(id);
                }
            }
        }
    }

    /// Deduplicated facet ids near `B(x, r)`.
    pub fn within_ids(&self, x: Pt, r: f64) -> Vec<u32> {
        let mut ids = Vec::new();
        self.within(x, r, |id| ids.push(id));
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Point bucket grid over boundary atoms, for collar and nearest-atom queries.
pub struct AtomIndex {
    origin: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl AtomIndex {
    pub fn build(points: &[Pt], cell: f64) -> Self {
        assert!(!points.is_empty());
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let cell = cell.max(1e-12);
        let nx = (((hi[0] - lo[0]) / cell).ceil() as usize + 1).max(1);
        let ny = (((hi[1] - lo[1]) / cell).ceil() as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (id, p) in points.iter().enumerate() {
            let i = (((p[0] - lo[0]) / cell).floor() as isize).clamp(0, nx as isize - 1) as usize;
            let j = (((p[1] - lo[1]) / cell).floor() as isize).clamp(0, ny as isize - 1) as usize;
            buckets[j * nx + i].push(id as u32);
        }
        AtomIndex {
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    /// Minimum distance from `x` to an atom accepted by `keep`.
    pub fn min_dist_where<F: Fn(u32) -> bool>(&self, points: &[Pt], x: Pt, keep: F) -> f64 {
        self.min_dist_where_capped(points, x, f64::INFINITY, keep)
    }

    /// Like [`Self::min_dist_where`], but gives up (returns `INFINITY`) once
    /// no accepted atom can lie within `cap`.
    pub fn min_dist_where_capped<F: Fn(u32) -> bool>(
        &self,
        points: &[Pt],
        x: Pt,
        cap: f64,
        keep: F,
    ) -> f64 {
        let ci = ((x[0] - self.origin[0]) / self.cell).floor() as isize;
        let cj = ((x[1] - self.origin[1]) / self.cell).floor() as isize;
        let mut best = f64::INFINITY;
        let max_ring = self.nx.max(self.ny) as isize + 2;
        for ring in 0..=max_ring {
            let ring_floor = (ring - 1).max(0) as f64 * self.cell;
            if ring_floor > best.min(cap) {
                break;
            }
            visit_ring(ci, cj, ring, self.nx, self.ny, |i, j| {
                for &id in &self.buckets[j * self.nx + i] {
                    if keep(id) {
                        best = best.min(dist(points[id as usize], x));
                    }
                }
            });
        }
        if best <= cap {
            best
        } else {
            f64::INFINITY
        }
    }

    /// Early-exit test: is any accepted atom within `r` of `x`?
    pub fn exists_within_where<F: Fn(u32) -> bool>(
        &self,
        points: &[Pt],
        x: Pt,
        r: f64,
        keep: F,
    ) -> bool {
        let pad = r + self.cell;
        let i0 = (((x[0] - pad - self.origin[0]) / self.cell).floor() as isize)
            .clamp(0, self.nx as isize - 1);
        let i1 = (((x[0] + pad - self.origin[0]) / self.cell).floor() as isize)
            .clamp(0, self.nx as isize - 1);
        let j0 = (((x[1] - pad - self.origin[1]) / self.cell).floor() as isize)
            .clamp(0, self.ny as isize - 1);
        let j1 = (((x[1] + pad - self.origin[1]) / self.cell).floor() as isize)
            .clamp(0, self.ny as isize - 1);
        for i in i0..=i1 {
            for j in j0..=j1 {
                for &id in &self.buckets[j as usize * self.nx + i as usize] {
                    if keep(id) && dist(points[id as usize], x) <= r {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Visit all atoms within `r` of `x` (exact filter applied).
    pub fn for_each_within<F: FnMut(u32)>(&self, points: &[Pt], x: Pt, r: f64, mut visit: F) {
        let pad = r + self.cell;
        let i0 = (((x[0] - pad - self.origin[0]) / self.cell).floor() as isize)
            .clamp(0, self.nx as isize - 1) as usize;
        let i1 = (((x[0] + pad - self.origin[0]) / self.cell).floor() as isize)
            .clamp(0, self.nx as isize - 1) as usize;
        let j0 = (((x[1] - pad - self.origin[1]) / self.cell).floor() as isize)
            .clamp(0, self.ny as isize - 1) as usize;
        let j1 = (((x[1] + pad - self.origin[1]) / self.cell).floor() as isize)
            .clamp(0, self.ny as isize - 1) as usize;
        for i in i0..=i1 {
            for j in j0..=j1 {
                for &id in &self.buckets[j * self.nx + i] {
                    if dist(points[id as usize], x) <= r {
                        visit(id);
                    }
                }
            }
        }
    }
}
