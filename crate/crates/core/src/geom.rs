//! Small geometric primitives shared by the boundary, grid and Whitney code.
//!
//! Points are `[f64; 3]` with `z = 0` for planar work, so the same containers
//! serve both ambient dimensions.

/// Ambient point. Planar callers leave `z = 0`.
pub type Pt = [f64; 3];

#[inline]
pub fn add(a: Pt, b: Pt) -> Pt {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Pt, b: Pt) -> Pt {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Pt, s: f64) -> Pt {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Pt, b: Pt) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Pt) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: Pt, b: Pt) -> f64 {
    norm(sub(a, b))
}

/// Closest point to `x` on the closed segment `[a, b]`.
pub fn closest_on_segment(x: Pt, a: Pt, b: Pt) -> Pt {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return a;
    }
    let t = (dot(sub(x, a), ab) / len2).clamp(0.0, 1.0);
    add(a, scale(ab, t))
}

#[inline]
pub fn dist_to_segment(x: Pt, a: Pt, b: Pt) -> f64 {
    dist(x, closest_on_segment(x, a, b))
}

/// Minimal distance between two planar segments (0 when they intersect).
pub fn segment_segment_dist(a0: Pt, a1: Pt, b0: Pt, b1: Pt) -> f64 {
    if segments_intersect(a0, a1, b0, b1) {
        return 0.0;
    }
    dist_to_segment(a0, b0, b1)
        .min(dist_to_segment(a1, b0, b1))
        .min(dist_to_segment(b0, a0, a1))
        .min(dist_to_segment(b1, a0, a1))
}

fn orient(a: Pt, b: Pt, c: Pt) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Proper or touching intersection test for planar segments.
pub fn segments_intersect(a0: Pt, a1: Pt, b0: Pt, b1: Pt) -> bool {
    let d1 = orient(b0, b1, a0);
    let d2 = orient(b0, b1, a1);
    let d3 = orient(a0, a1, b0);
    let d4 = orient(a0, a1, b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |d: f64, p: Pt, q: Pt, r: Pt| {
        d == 0.0
            && r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    on(d1, b0, b1, a0) || on(d2, b0, b1, a1) || on(d3, a0, a1, b0) || on(d4, a0, a1, b1)
}

/// Closed axis-aligned planar rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Rect { lo, hi }
    }

    pub fn center(&self) -> Pt {
        [
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
            0.0,
        ]
    }

    pub fn side(&self) -> f64 {
        self.hi[0] - self.lo[0]
    }

    pub fn diam(&self) -> f64 {
        let dx = self.hi[0] - self.lo[0];
        let dy = self.hi[1] - self.lo[1];
        (dx * dx + dy * dy).sqrt()
    }

    pub fn area(&self) -> f64 {
        (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])
    }

    /// Concentric dilation `factor * I` about the center.
    pub fn dilate(&self, factor: f64) -> Rect {
        let c = self.center();
        let hx = 0.5 * (self.hi[0] - self.lo[0]) * factor;
        let hy = 0.5 * (self.hi[1] - self.lo[1]) * factor;
        Rect::new([c[0] - hx, c[1] - hy], [c[0] + hx, c[1] + hy])
    }

    pub fn contains(&self, x: Pt) -> bool {
        x[0] >= self.lo[0] && x[0] <= self.hi[0] && x[1] >= self.lo[1] && x[1] <= self.hi[1]
    }

    pub fn contains_strict(&self, x: Pt) -> bool {
        x[0] > self.lo[0] && x[0] < self.hi[0] && x[1] > self.lo[1] && x[1] < self.hi[1]
    }

    /// Closed rectangles sharing at least a boundary point.
    pub fn touches(&self, other: &Rect) -> bool {
        self.lo[0] <= other.hi[0]
            && other.lo[0] <= self.hi[0]
            && self.lo[1] <= other.hi[1]
            && other.lo[1] <= self.hi[1]
    }

    /// Distance from the rectangle to a point (0 inside).
    pub fn dist_to_point(&self, x: Pt) -> f64 {
        let dx = (self.lo[0] - x[0]).max(0.0).max(x[0] - self.hi[0]);
        let dy = (self.lo[1] - x[1]).max(0.0).max(x[1] - self.hi[1]);
        (dx * dx + dy * dy).sqrt()
    }

    /// Exact distance from the rectangle to a segment (0 when they meet).
    pub fn dist_to_segment(&self, a: Pt, b: Pt) -> f64 {
        if self.contains(a) || self.contains(b) {
            return 0.0;
        }
        let c = [
            [self.lo[0], self.lo[1], 0.0],
            [self.hi[0], self.lo[1], 0.0],
            [self.hi[0], self.hi[1], 0.0],
            [self.lo[0], self.hi[1], 0.0],
        ];
        let mut best = f64::INFINITY;
        for i in 0..4 {
            best = best.min(segment_segment_dist(c[i], c[(i + 1) % 4], a, b));
        }
        best
    }
}

/// Coordinate-compressed occupancy grid for a set of axis-aligned rectangles.
struct Compressed {
    xs: Vec<f64>,
    ys: Vec<f64>,
    covered: Vec<bool>,
}

fn compress(rects: &[Rect]) -> Compressed {
    let mut xs: Vec<f64> = Vec::with_capacity(rects.len() * 2);
    let mut ys: Vec<f64> = Vec::with_capacity(rects.len() * 2);
    for r in rects {
        xs.push(r.lo[0]);
        xs.push(r.hi[0]);
        ys.push(r.lo[1]);
        ys.push(r.hi[1]);
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup();
    let nx = xs.len().saturating_sub(1);
    let ny = ys.len().saturating_sub(1);
    let mut covered = vec![false; nx * ny];
    let find = |v: &[f64], t: f64| v.partition_point(|&a| a < t - 1e-15).min(v.len() - 1);
    for r in rects {
        let i0 = find(&xs, r.lo[0]);
        let i1 = find(&xs, r.hi[0]);
        let j0 = find(&ys, r.lo[1]);
        let j1 = find(&ys, r.hi[1]);
        for j in j0..j1 {
            for c in covered[j * nx + i0..j * nx + i1].iter_mut() {
                *c = true;
            }
        }
    }
    Compressed { xs, ys, covered }
}

/// Exact area of a union of axis-aligned rectangles.
pub fn union_area(rects: &[Rect]) -> f64 {
    if rects.is_empty() {
        return 0.0;
    }
    let grid = compress(rects);
    let nx = grid.xs.len() - 1;
    let ny = grid.ys.len() - 1;
    let mut total = 0.0;
    for i in 0..nx {
        let w = grid.xs[i + 1] - grid.xs[i];
        for j in 0..ny {
            if grid.covered[j * nx + i] {
                total += w * (grid.ys[j + 1] - grid.ys[j]);
            }
        }
    }
    total
}

/// Exact boundary length of a union of axis-aligned rectangles.
pub fn union_perimeter(rects: &[Rect]) -> f64 {
    if rects.is_empty() {
        return 0.0;
    }
    let grid = compress(rects);
    let nx = (grid.xs.len() - 1) as isize;
    let ny = (grid.ys.len() - 1) as isize;
    let at = |i: isize, j: isize| -> bool {
        if i < 0 || j < 0 || i >= nx || j >= ny {
            false
        } else {
            grid.covered[j as usize * nx as usize + i as usize]
        }
    };
    let mut total = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            if !at(i, j) {
                continue;
            }
            let w = grid.xs[i as usize + 1] - grid.xs[i as usize];
            let h = grid.ys[j as usize + 1] - grid.ys[j as usize];
            if !at(i - 1, j) {
                total += h;
            }
            if !at(i + 1, j) {
                total += h;
            }
            if !at(i, j - 1) {
                total += w;
            }
            if !at(i, j + 1) {
                total += w;
            }
        }
    }
    total
}

/// C² quintic step: 1 for `s <= 0`, 0 for `s >= 1`.
#[inline]
pub fn smoothstep_c2(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}
