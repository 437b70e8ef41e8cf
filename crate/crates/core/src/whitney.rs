//! Whitney decomposition of Ω into dyadic boxes with the distance bracket
//! `16·diam(I) ≤ dist(I, ∂Ω) ≤ 34·diam(I)`, obtained from maximal dyadic
//! boxes satisfying `dist ≥ 16·diam`. Boxes live on a global power-of-two
//! lattice, so touching boxes have comparable side by construction.

use crate::boundary::Domain;
use crate::fasthash::{pack_cell, U64Map};
use crate::geom::{dist, Pt, Rect};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct WhitneyBox {
    pub id: u32,
    pub rect: Rect,
    /// Dyadic level: side = 2^{-level} in absolute units.
    pub level: i32,
    /// Exact distance from the closed box to ∂Ω.
    pub dist_boundary: f64,
}

impl WhitneyBox {
    pub fn side(&self) -> f64 {
        self.rect.side()
    }

    pub fn center(&self) -> Pt {
        self.rect.center()
    }

    pub fn diam(&self) -> f64 {
        self.rect.diam()
    }

    /// Fattened box `(1 + λ·mult)·I`.
    pub fn fattened(&self, lambda: f64, mult: f64) -> Rect {
        self.rect.dilate(1.0 + lambda * mult)
    }
}

pub struct WhitneyDecomposition {
    pub boxes: Vec<WhitneyBox>,
    /// Touching boxes (closed rectangles sharing at least a point).
    pub adjacency: Vec<Vec<u32>>,
    /// Truncation window the decomposition covers.
    pub window: Rect,
    pub min_side: f64,
    /// Lattice lookup keyed by packed (level, ix, iy).
    cell_map: U64Map<u32>,
    levels: Vec<i32>,
}

/// Exact distance from a closed rectangle to ∂Ω. Candidate facets all lie
/// within `δ(center) + halfdiag` of the center.
pub fn rect_boundary_dist(domain: &Domain, rect: &Rect) -> f64 {
    let c = rect.center();
    let d_center = domain.boundary_dist(c);
    let reach = d_center + rect.diam() * 0.5 + 1e-12;
    let mut best = d_center;
    domain.facet_index().within(c, reach, |id| {
        let (s, _) = &domain.segments[id as usize];
        let d = rect.dist_to_segment(s[0], s[1]);
        if d < best {
            best = d;
        }
    });
    best
}

/// Boundary point nearest the rectangle with its facet; among minimizing
/// facets the lowest id wins, so the choice is deterministic.
pub fn rect_closest_boundary(domain: &Domain, rect: &Rect) -> (Pt, u32, f64) {
    let c = rect.center();
    let d_center = domain.boundary_dist(c);
    let reach = d_center + rect.diam() * 0.5 + 1e-12;
    let mut best: (f64, u32) = (f64::INFINITY, u32::MAX);
    domain.facet_index().within(c, reach, |id| {
        let (s, _) = &domain.segments[id as usize];
        let d = rect.dist_to_segment(s[0], s[1]);
        if d < best.0 - 1e-15 || ((d - best.0).abs() <= 1e-15 && id < best.1) {
            best = (d, id);
        }
    });
    let (s, _) = &domain.segments[best.1 as usize];
    let mut z = crate::geom::closest_on_segment(c, s[0], s[1]);
    let mut zd = rect.dist_to_point(z);
    for i in 0..=64 {
        let t = i as f64 / 64.0;
        let p = crate::geom::add(s[0], crate::geom::scale(crate::geom::sub(s[1], s[0]), t));
        let d = rect.dist_to_point(p);
        if d < zd {
            zd = d;
            z = p;
        }
    }
    (z, best.1, best.0)
}

/// Whitney decomposition of `Ω ∩ window`, truncated below `min_side`.
pub fn whitney_decompose(
    domain: &Domain,
    window: Rect,
    min_side: f64,
) -> Result<WhitneyDecomposition> {
    if min_side <= 0.0 {
        return Err(Error::Parameter("min_side must be positive".into()));
    }
    let span = (window.hi[0] - window.lo[0]).max(window.hi[1] - window.lo[1]);
    let root_level = -(span.log2().ceil() as i32) - 1;
    let root_side = 0.5_f64.powi(root_level);
    let ix = (window.lo[0] / root_side).floor() as i64;
    let iy = (window.lo[1] / root_side).floor() as i64;

    let mut boxes: Vec<WhitneyBox> = Vec::new();
    // Candidates carry an anchor: an ancestor center with its exact boundary
    // distance, bracketing δ(center) without a query.
    struct Cand {
        level: i32,
        i: i64,
        j: i64,
        anchor: Pt,
        anchor_d: f64,
    }
    let mut stack: Vec<Cand> = Vec::new();
    for dx in 0..=2i64 {
        for dy in 0..=2i64 {
            let cx = (ix + dx) as f64 * root_side + root_side * 0.5;
            let cy = (iy + dy) as f64 * root_side + root_side * 0.5;
            let c = [cx, cy, 0.0];
            stack.push(Cand {
                level: root_level,
                i: ix + dx,
                j: iy + dy,
                anchor: c,
                anchor_d: domain.boundary_dist(c),
            });
        }
    }
    while let Some(cand) = stack.pop() {
        let side = 0.5_f64.powi(cand.level);
        let rect = Rect::new(
            [cand.i as f64 * side, cand.j as f64 * side],
            [(cand.i + 1) as f64 * side, (cand.j + 1) as f64 * side],
        );
        if rect.lo[0] >= window.hi[0]
            || rect.hi[0] <= window.lo[0]
            || rect.lo[1] >= window.hi[1]
            || rect.hi[1] <= window.lo[1]
        {
            continue;
        }
        let c = rect.center();
        let hd = rect.diam() * 0.5;
        let thresh = 16.0 * rect.diam();
        let off = dist(c, cand.anchor);
        let d_lo = cand.anchor_d - off;
        let d_hi = cand.anchor_d + off;
        let mut anchor = cand.anchor;
        let mut anchor_d = cand.anchor_d;
        // d_box ∈ [δ(center) − hd, δ(center)].
        let decision = if d_hi < thresh {
            None // certain reject: d_box ≤ δ(center) ≤ d_hi
        } else if d_lo - hd >= thresh {
            // Certain accept; exact distance still recorded.
            anchor = c;
            anchor_d = domain.boundary_dist(c);
            Some(rect_boundary_dist(domain, &rect))
        } else {
            anchor = c;
            anchor_d = domain.boundary_dist(c);
            if anchor_d < thresh {
                Some(anchor_d) // d_box ≤ δ(center) < thresh: reject
            } else {
                Some(rect_boundary_dist(domain, &rect))
            }
        };
        if let Some(d) = decision {
            if d >= thresh {
                if domain.is_inside(c) {
                    boxes.push(WhitneyBox {
                        id: boxes.len() as u32,
                        rect,
                        level: cand.level,
                        dist_boundary: d,
                    });
                }
                continue;
            }
        }
        if side * 0.5 < min_side {
            continue;
        }
        for dx in 0..=1 {
            for dy in 0..=1 {
                stack.push(Cand {
                    level: cand.level + 1,
                    i: 2 * cand.i + dx,
                    j: 2 * cand.j + dy,
                    anchor,
                    anchor_d,
                });
            }
        }
    }
    if boxes.is_empty() {
        return Err(Error::Resolution(
            "no Whitney boxes in the window; enlarge it or lower min_side".into(),
        ));
    }

    let mut cell_map = U64Map::default();
    cell_map.reserve(boxes.len());
    for b in &boxes {
        let side = b.side();
        let i = (b.rect.lo[0] / side).round() as i64;
        let j = (b.rect.lo[1] / side).round() as i64;
        cell_map.insert(pack_cell(b.level, i, j), b.id);
    }
    let mut levels: Vec<i32> = boxes.iter().map(|b| b.level).collect();
    levels.sort_unstable();
    levels.dedup();

    // Maximality under the 16·diam rule keeps touching sides within one
    // dyadic step; scan ±2 levels for safety.
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); boxes.len()];
    for b in &boxes {
        let pad = b.side() * 1e-9;
        for dl in -2..=2i32 {
            let level = b.level + dl;
            let side = 0.5_f64.powi(level);
            let i0 = ((b.rect.lo[0] - pad) / side).floor() as i64;
            let i1 = ((b.rect.hi[0] + pad) / side).floor() as i64;
            let j0 = ((b.rect.lo[1] - pad) / side).floor() as i64;
            let j1 = ((b.rect.hi[1] + pad) / side).floor() as i64;
            for i in i0..=i1 {
                for j in j0..=j1 {
                    if let Some(&other) = cell_map.get(&pack_cell(level, i, j)) {
                        if other != b.id && boxes[other as usize].rect.touches(&b.rect) {
                            adjacency[b.id as usize].push(other);
                        }
                    }
                }
            }
        }
        adjacency[b.id as usize].sort_unstable();
        adjacency[b.id as usize].dedup();
    }
    Ok(WhitneyDecomposition {
        boxes,
        adjacency,
        window,
        min_side,
        cell_map,
        levels,
    })
}

impl WhitneyDecomposition {
    /// The box containing `x`, if covered.
    pub fn locate(&self, x: Pt) -> Option<u32> {
        for &level in &self.levels {
            let side = 0.5_f64.powi(level);
            let i = (x[0] / side).floor() as i64;
            let j = (x[1] / side).floor() as i64;
            if let Some(&id) = self.cell_map.get(&pack_cell(level, i, j)) {
                let b = &self.boxes[id as usize];
                if b.rect.contains(x) {
                    return Some(id);
                }
            }
        }
        None
    }

    /// Total box area inside a compact rectangle.
    pub fn area_in(&self, k: &Rect) -> f64 {
        self.boxes
            .iter()
            .filter(|b| b.rect.touches(k))
            .map(|b| {
                let lo = [b.rect.lo[0].max(k.lo[0]), b.rect.lo[1].max(k.lo[1])];
                let hi = [b.rect.hi[0].min(k.hi[0]), b.rect.hi[1].min(k.hi[1])];
                ((hi[0] - lo[0]).max(0.0)) * ((hi[1] - lo[1]).max(0.0))
            })
            .sum()
    }
}

/// `Q_I^*`: a nearest dyadic cube of matching scale; it contains a boundary
/// point realizing `dist(I, ∂Ω)` and has `ℓ(Q)` log-rounded to `ℓ(I)` on the
/// grid's ladder.
pub fn nearest_cube(
    domain: &Domain,
    grid: &crate::dyadic::DyadicGrid,
    wbox: &WhitneyBox,
) -> Result<crate::dyadic::CubeId> {
    let (z, facet, _) = rect_closest_boundary(domain, &wbox.rect);
    let k = (grid.scale / wbox.side()).log2().round();
    let k = k.clamp(0.0, grid.depth as f64) as u32;
    let range = domain.facet_atom_range(facet);
    if range.is_empty() {
        return Err(Error::Input("facet has no atoms".into()));
    }
    let mut best = (f64::INFINITY, range.start);
    for a in range {
        let d = dist(domain.atoms.pos[a as usize], z);
        if d < best.0 {
            best = (d, a);
        }
    }
    grid.cube_of_atom(k, best.1)
        .ok_or_else(|| Error::Resolution(format!("no generation-{k} cube holds the nearest atom")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::shapes;

    #[test]
    fn half_plane_bands_satisfy_bracket() {
        let d = shapes::line_proxy(16.0, true, 1e-2);
        let window = Rect::new([-4.0, 0.0], [4.0, 4.0]);
        let w = whitney_decompose(&d, window, 1e-3).unwrap();
        assert!(!w.boxes.is_empty());
        for b in &w.boxes {
            let ratio = b.dist_boundary / b.diam();
            assert!(
                (16.0..=34.0 + 1e-9).contains(&ratio),
                "ratio {ratio} at {:?}",
                b.rect
            );
            assert!((b.dist_boundary - b.rect.lo[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn square_interior_eqwh1_and_center_box_largest() {
        let d = shapes::unit_square(1e-3);
        let window = Rect::new([0.0, 0.0], [1.0, 1.0]);
        let w = whitney_decompose(&d, window, 1e-3).unwrap();
        let mut best = (0.0f64, [0.0, 0.0, 0.0]);
        for b in &w.boxes {
            let ratio = b.dist_boundary / b.diam();
            assert!((16.0..=34.0 + 1e-9).contains(&ratio));
            assert!(b.dist_boundary <= 40.0 * b.diam());
            let four = b.rect.dilate(4.0);
            let d4 = rect_boundary_dist(&d, &four);
            assert!(d4 + 1e-12 >= 4.0 * b.diam(), "4I bound fails");
            if b.side() > best.0 {
                best = (b.side(), b.center());
            }
        }
        assert!((best.1[0] - 0.5).abs() < 0.3 && (best.1[1] - 0.5).abs() < 0.3);
    }

    #[test]
    fn adjacent_sides_comparable() {
        let d = shapes::disk(1024, 2e-3);
        let window = Rect::new([-1.0, -1.0], [1.0, 1.0]);
        let w = whitney_decompose(&d, window, 4e-3).unwrap();
        for b in &w.boxes {
            for &n in &w.adjacency[b.id as usize] {
                let r = b.side() / w.boxes[n as usize].side();
                assert!((0.25..=4.0).contains(&r), "side ratio {r}");
            }
        }
        for b in &w.boxes {
            for &n in &w.adjacency[b.id as usize] {
                assert!(w.adjacency[n as usize].contains(&b.id));
            }
        }
    }

    #[test]
    fn partition_measures_compact_subsets() {
        let d = shapes::unit_square(1e-3);
        let w = whitney_decompose(&d, Rect::new([0.0, 0.0], [1.0, 1.0]), 1e-3).unwrap();
        let k = Rect::new([0.3, 0.3], [0.7, 0.7]);
        let covered = w.area_in(&k);
        assert!(
            (covered - k.area()).abs() < 1e-9,
            "covered {covered} vs {}",
            k.area()
        );
        let rects: Vec<Rect> = w.boxes.iter().map(|b| b.rect).collect();
        let sum: f64 = rects.iter().map(|r| r.area()).sum();
        let union = crate::geom::union_area(&rects);
        assert!((sum - union).abs() < 1e-9 * sum);
    }

    #[test]
    fn locate_finds_owner() {
        let d = shapes::disk(512, 2e-3);
        let w = whitney_decompose(&d, Rect::new([-1.0, -1.0], [1.0, 1.0]), 4e-3).unwrap();
        for b in w.boxes.iter().step_by(11) {
            let id = w.locate(b.center()).unwrap();
            assert_eq!(id, b.id);
        }
        assert!(w.locate([0.999, 0.0, 0.0]).is_none());
    }

    #[test]
    fn nearest_cube_on_half_plane() {
        let d = shapes::line_proxy(16.0, true, 5e-3);
        let grid = crate::dyadic::build_grid(&d, 8).unwrap();
        let window = Rect::new([-4.0, 0.0], [4.0, 4.0]);
        let w = whitney_decompose(&d, window, 1e-3).unwrap();
        for b in w.boxes.iter().step_by(7) {
            let q = nearest_cube(&d, &grid, b).unwrap();
            let cube = grid.cube(q);
            let foot = [b.center()[0], 0.0, 0.0];
            let dq = dist(cube.center, foot);
            assert!(
                dq <= cube.length + b.side(),
                "cube too far: {dq} vs ℓ={} side={}",
                cube.length,
                b.side()
            );
            let expect_k = (grid.scale / b.side()).log2().round() as u32;
            assert_eq!(cube.generation, expect_k.min(grid.depth));
        }
    }

    #[test]
    fn nearest_cube_fibers_bounded() {
        let d = shapes::disk(1024, 2e-3);
        let grid = crate::dyadic::build_grid(&d, 7).unwrap();
        let w = whitney_decompose(&d, Rect::new([-1.0, -1.0], [1.0, 1.0]), 2e-3).unwrap();
        let mut fibers: std::collections::HashMap<usize, usize> = Default::default();
        for b in &w.boxes {
            // Fibers are bounded per matching generation; skip boxes whose
            // scale falls outside the grid's ladder.
            let k = (grid.scale / b.side()).log2().round();
            if !(0.0..=grid.depth as f64).contains(&k) {
                continue;
            }
            if let Ok(q) = nearest_cube(&d, &grid, b) {
                *fibers.entry(q).or_default() += 1;
                let cube = grid.cube(q);
                let dq = b.rect.dist_to_point(cube.center);
                assert!(dq <= b.dist_boundary + 2.0 * cube.length + 1e-9);
            }
        }
        let max_fiber = fibers.values().copied().max().unwrap_or(0);
        assert!(max_fiber <= 100, "fiber size {max_fiber}");
    }
}
