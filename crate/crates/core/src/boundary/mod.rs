//! Domains with piecewise-linear boundaries: signed distance, surface measure,
//! surface balls and Ahlfors-regularity estimates.
//!
//! A [`Domain`] carries its boundary twice: as facets (segments in the plane,
//! triangles in space) for exact distance and clipping queries, and as a fine
//! string of `atoms` (sub-facet elements with σ-weights) on which all
//! measure-theoretic bookkeeping is done. Atoms are what dyadic cubes, collar
//! measurements and Monte Carlo tallies index into.

pub mod index;
pub mod io;
pub mod shapes;

use crate::geom::{add, closest_on_segment, dist, dot, norm, scale, sub, Pt};
use crate::{Error, Result};
use index::{AtomIndex, FacetIndex};

/// How membership `X ∈ Ω` is decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InteriorRule {
    /// Closed components; parity of boundary crossings along a fixed ray.
    RayParity,
    /// Open-curve proxy for an unbounded boundary: interior is the upper side.
    UpperSide,
    /// Open-curve proxy whose both sides are interior; the exterior is empty.
    TwoSided,
}

/// Fine boundary elements carrying surface measure.
#[derive(Clone, Debug, Default)]
pub struct Atoms {
    /// Element midpoints.
    pub pos: Vec<Pt>,
    /// σ-weights (sub-segment length, or triangle-patch area).
    pub weight: Vec<f64>,
    /// Owning component.
    pub component: Vec<u32>,
    /// Arclength of the midpoint within its component (planar boundaries).
    pub arc: Vec<f64>,
    /// Owning facet.
    pub facet: Vec<u32>,
}

impl Atoms {
    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }
}

/// A domain given by piecewise-linear boundary components.
pub struct Domain {
    pub ambient_dim: usize,
    /// Vertex loops (planar). Component `c` has vertices `components[c]`,
    /// consecutive ones joined, last joined to first when closed.
    pub components: Vec<Vec<Pt>>,
    pub closed: Vec<bool>,
    /// Planar boundary segments, global across components.
    pub segments: Vec<([Pt; 2], u32)>,
    /// Triangulated boundary (ambient dimension 3), global across components.
    pub triangles: Vec<([Pt; 3], u32)>,
    pub interior_rule: InteriorRule,
    /// Marks proxies for unbounded boundaries; reports should flag results.
    pub truncated: bool,
    pub bbox: (Pt, Pt),
    pub atoms: Atoms,
    facet_index: FacetIndex,
    atom_index: AtomIndex,
    diam_boundary: f64,
    sigma_total: f64,
    component_sigma: Vec<f64>,
}

/// Result of an exact closest-boundary-point query.
#[derive(Clone, Copy, Debug)]
pub struct Closest {
    pub point: Pt,
    pub facet: u32,
    pub distance: f64,
}

/// `Δ(x, r) = B(x, r) ∩ ∂Ω` with its σ-measure and exact sub-facet arcs.
#[derive(Clone, Debug)]
pub struct SurfaceBall {
    pub center: Pt,
    pub radius: f64,
    /// Sub-segments of the boundary inside the open ball (planar domains).
    pub arcs: Vec<[Pt; 2]>,
    pub measure: f64,
}

/// Ahlfors-regularity scan: extremes of `σ(Δ(x,r)) / r^n` over samples.
#[derive(Clone, Debug)]
pub struct ArReport {
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
    /// `(r, lower-at-r, upper-at-r)` per tested radius, to expose drift.
    pub per_radius: Vec<(f64, f64, f64)>,
    /// Boundary dimension `n = ambient_dim − 1`.
    pub n: u32,
}

impl Domain {
    /// Assemble a planar domain from vertex loops. `closed[c]` marks loops;
    /// open chains are only legal for truncated proxies.
    pub fn from_polylines(
        components: Vec<Vec<Pt>>,
        closed: Vec<bool>,
        interior_rule: InteriorRule,
        atom_len: f64,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDomain("no boundary components".into()));
        }
        if components.len() != closed.len() {
            return Err(Error::InvalidDomain("closed flags mismatch".into()));
        }
        let truncated = interior_rule != InteriorRule::RayParity;
        if closed.iter().any(|c| !c) && !truncated {
            return Err(Error::InvalidDomain(
                "open polyline requires a truncated interior rule".into(),
            ));
        }
        let mut segments = Vec::new();
        for (ci, verts) in components.iter().enumerate() {
            if verts.len() < 2 || (closed[ci] && verts.len() < 3) {
                return Err(Error::InvalidDomain(format!(
                    "component {ci} has too few vertices"
                )));
            }
            let m = verts.len();
            let last = if closed[ci] { m } else { m - 1 };
            for i in 0..last {
                let a = verts[i];
                let b = verts[(i + 1) % m];
                if dist(a, b) == 0.0 {
                    return Err(Error::InvalidDomain(format!(
                        "degenerate zero-length edge in component {ci}"
                    )));
                }
                segments.push(([a, b], ci as u32));
            }
        }
        let mut atoms = Atoms::default();
        let mut component_sigma = vec![0.0; components.len()];
        let mut arc_pos = vec![0.0; components.len()];
        for (fi, (seg, ci)) in segments.iter().enumerate() {
            let len = dist(seg[0], seg[1]);
            let n_sub = (len / atom_len).ceil().max(1.0) as usize;
            let step = len / n_sub as f64;
            for s in 0..n_sub {
                let t = (s as f64 + 0.5) / n_sub as f64;
                atoms.pos.push(add(seg[0], scale(sub(seg[1], seg[0]), t)));
                atoms.weight.push(step);
                atoms.component.push(*ci);
                atoms.arc.push(arc_pos[*ci as usize] + (s as f64 + 0.5) * step);
                atoms.facet.push(fi as u32);
            }
            arc_pos[*ci as usize] += len;
            component_sigma[*ci as usize] += len;
        }
        let sigma_total = component_sigma.iter().sum();
        let boxes: Vec<([f64; 2], [f64; 2])> = segments
            .iter()
            .map(|(s, _)| {
                (
                    [s[0][0].min(s[1][0]), s[0][1].min(s[1][1])],
                    [s[0][0].max(s[1][0]), s[0][1].max(s[1][1])],
                )
            })
            .collect();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for verts in &components {
            for v in verts {
                for k in 0..3 {
                    lo[k] = lo[k].min(v[k]);
                    hi[k] = hi[k].max(v[k]);
                }
            }
        }
        let mut diam = 0.0f64;
        for verts in &components {
            for v in verts {
                for w2 in &components {
                    for w in w2 {
                        diam = diam.max(dist(*v, *w));
                    }
                }
            }
        }
        let median_len = sigma_total / segments.len() as f64;
        let facet_index = FacetIndex::build(&boxes, median_len);
        let atom_index = AtomIndex::build(&atoms.pos, (atom_len * 8.0).max(diam / 512.0));
        Ok(Domain {
            ambient_dim: 2,
            components,
            closed,
            segments,
            triangles: Vec::new(),
            interior_rule,
            truncated,
            bbox: (lo, hi),
            atoms,
            facet_index,
            atom_index,
            diam_boundary: diam,
            sigma_total,
            component_sigma,
        })
    }

    /// Assemble a spatial domain from a closed triangle soup.
    pub fn from_triangles(triangles: Vec<[Pt; 3]>, atom_area: f64) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidDomain("no boundary triangles".into()));
        }
        let mut atoms = Atoms::default();
        let mut sigma_total = 0.0;
        let tri_area = |t: &[Pt; 3]| {
            let u = sub(t[1], t[0]);
            let v = sub(t[2], t[0]);
            let c = [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ];
            0.5 * norm(c)
        };
        for (fi, t) in triangles.iter().enumerate() {
            let area = tri_area(t);
            sigma_total += area;
            // Barycentric refinement into m² patches of equal area.
            let m = ((area / atom_area).sqrt().ceil().max(1.0)) as usize;
            let mf = m as f64;
            let lattice = |i: usize, j: usize| {
                add(
                    add(
                        scale(t[0], 1.0 - (i as f64 + j as f64) / mf),
                        scale(t[1], i as f64 / mf),
                    ),
                    scale(t[2], j as f64 / mf),
                )
            };
            let w = area / (m * m) as f64;
            let mut push = |corners: [(usize, usize); 3]| {
                let mut c = [0.0; 3];
                for (a, b) in corners {
                    c = add(c, scale(lattice(a, b), 1.0 / 3.0));
                }
                atoms.pos.push(c);
                atoms.weight.push(w);
                atoms.component.push(0);
                atoms.arc.push(0.0);
                atoms.facet.push(fi as u32);
            };
            for i in 0..m {
                for j in 0..(m - i) {
                    push([(i, j), (i + 1, j), (i, j + 1)]);
                    if i + j < m - 1 {
                        push([(i + 1, j), (i + 1, j + 1), (i, j + 1)]);
                    }
                }
            }
        }
        let boxes: Vec<([f64; 2], [f64; 2])> = triangles
            .iter()
            .map(|t| {
                let lo = [
                    t[0][0].min(t[1][0]).min(t[2][0]),
                    t[0][1].min(t[1][1]).min(t[2][1]),
                ];
                let hi = [
                    t[0][0].max(t[1][0]).max(t[2][0]),
                    t[0][1].max(t[1][1]).max(t[2][1]),
                ];
                (lo, hi)
            })
            .collect();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        let mut diam = 0.0f64;
        for t in &triangles {
            for v in t {
                for k in 0..3 {
                    lo[k] = lo[k].min(v[k]);
                    hi[k] = hi[k].max(v[k]);
                }
            }
        }
        for t in &triangles {
            for v in t {
                for t2 in &triangles {
                    for w in t2 {
                        diam = diam.max(dist(*v, *w));
                    }
                }
            }
        }
        let tris: Vec<([Pt; 3], u32)> = triangles.into_iter().map(|t| (t, 0u32)).collect();
        let facet_index = FacetIndex::build(&boxes, (sigma_total / tris.len() as f64).sqrt());
        let atom_index = AtomIndex::build(&atoms.pos, atom_area.sqrt() * 8.0);
        Ok(Domain {
            ambient_dim: 3,
            components: Vec::new(),
            closed: Vec::new(),
            segments: Vec::new(),
            triangles: tris,
            interior_rule: InteriorRule::RayParity,
            truncated: false,
            bbox: (lo, hi),
            atoms,
            facet_index,
            atom_index,
            diam_boundary: diam,
            sigma_total,
            component_sigma: vec![sigma_total],
        })
    }

    pub fn diam_boundary(&self) -> f64 {
        self.diam_boundary
    }

    pub fn sigma_total(&self) -> f64 {
        self.sigma_total
    }

    pub fn component_sigma(&self, c: usize) -> f64 {
        self.component_sigma[c]
    }

    pub fn atom_index(&self) -> &AtomIndex {
        &self.atom_index
    }

    pub fn facet_index(&self) -> &FacetIndex {
        &self.facet_index
    }

    /// Atom ids generated from the given facet (contiguous by construction).
    pub fn facet_atom_range(&self, facet: u32) -> std::ops::Range<u32> {
        let lo = self.atoms.facet.partition_point(|&f| f < facet) as u32;
        let hi = self.atoms.facet.partition_point(|&f| f <= facet) as u32;
        lo..hi
    }

    fn facet_dist(&self, id: u32, x: Pt) -> f64 {
        if self.ambient_dim == 2 {
            let (s, _) = &self.segments[id as usize];
            dist(x, closest_on_segment(x, s[0], s[1]))
        } else {
            let (t, _) = &self.triangles[id as usize];
            dist(x, closest_on_triangle(x, t))
        }
    }

    /// Exact closest boundary point.
    pub fn closest_boundary(&self, x: Pt) -> Closest {
        let (id, d) = self.facet_index.nearest(x, |f| self.facet_dist(f, x));
        let point = if self.ambient_dim == 2 {
            let (s, _) = &self.segments[id as usize];
            closest_on_segment(x, s[0], s[1])
        } else {
            let (t, _) = &self.triangles[id as usize];
            closest_on_triangle(x, t)
        };
        Closest {
            point,
            facet: id,
            distance: d,
        }
    }

    /// Unsigned distance to the boundary.
    pub fn boundary_dist(&self, x: Pt) -> f64 {
        self.closest_boundary(x).distance
    }

    pub fn is_inside(&self, x: Pt) -> bool {
        match self.interior_rule {
            InteriorRule::RayParity => {
                if self.ambient_dim == 2 {
                    self.ray_parity_2d(x)
                } else {
                    self.ray_parity_3d(x)
                }
            }
            InteriorRule::UpperSide => x[1] > 0.0,
            InteriorRule::TwoSided => self.boundary_dist(x) > 0.0,
        }
    }

    /// Signed distance `δ(X)`: positive inside Ω, negative outside.
    pub fn signed_dist(&self, x: Pt) -> f64 {
        let d = self.boundary_dist(x);
        match self.interior_rule {
            InteriorRule::TwoSided => d,
            InteriorRule::UpperSide => {
                if x[1] > 0.0 {
                    d
                } else {
                    -d
                }
            }
            InteriorRule::RayParity => {
                if d == 0.0 {
                    0.0
                } else if self.is_inside(x) {
                    d
                } else {
                    -d
                }
            }
        }
    }

    fn ray_parity_2d(&self, x: Pt) -> bool {
        // +x ray, half-open vertex rule.
        let mut inside = false;
        for (s, _) in &self.segments {
            let (a, b) = (s[0], s[1]);
            if (a[1] > x[1]) != (b[1] > x[1]) {
                let t = (x[1] - a[1]) / (b[1] - a[1]);
                let xi = a[0] + t * (b[0] - a[0]);
                if xi > x[0] {
                    inside = !inside;
                }
            }
        }
        inside
    }

    fn ray_parity_3d(&self, x: Pt) -> bool {
        // Irrational-ish direction so symmetric meshes never put a vertex or
        // edge exactly on the ray.
        let dir = [0.5377397643, 0.2817021557, 0.7946454155];
        let mut hits = 0u32;
        for (t, _) in &self.triangles {
            if ray_hits_triangle(x, dir, t) {
                hits ^= 1;
            }
        }
        hits == 1
    }

    /// `Δ(x, r)`: the boundary clipped to the open euclidean ball `B(x, r)`.
    pub fn surface_ball(&self, x: Pt, r: f64) -> Result<SurfaceBall> {
        let tol = 1e-9 * self.diam_boundary.max(1.0);
        if self.boundary_dist(x) > tol {
            return Err(Error::Input(format!(
                "surface ball center is off the boundary by {:.3e}",
                self.boundary_dist(x)
            )));
        }
        if !(r > 0.0) || r >= self.diam_boundary {
            return Err(Error::Range(format!(
                "surface ball radius {r} outside (0, diam ∂Ω = {})",
                self.diam_boundary
            )));
        }
        if self.ambient_dim == 3 {
            // Spatial boundaries: measure from atom weights; no arc list.
            let mut measure = 0.0;
            self.atom_index
                .for_each_within(&self.atoms.pos, x, r, |id| {
                    measure += self.atoms.weight[id as usize];
                });
            return Ok(SurfaceBall {
                center: x,
                radius: r,
                arcs: Vec::new(),
                measure,
            });
        }
        let mut arcs = Vec::new();
        let mut measure = 0.0;
        for id in self.facet_index.within_ids(x, r) {
            let (s, _) = &self.segments[id as usize];
            if let Some((p, q)) = clip_segment_to_ball(s[0], s[1], x, r) {
                measure += dist(p, q);
                arcs.push([p, q]);
            }
        }
        Ok(SurfaceBall {
            center: x,
            radius: r,
            arcs,
            measure,
        })
    }

    /// σ-measure of `Δ(x, r)` without materializing the arcs.
    pub fn surface_measure(&self, x: Pt, r: f64) -> f64 {
        if self.ambient_dim == 3 {
            let mut measure = 0.0;
            self.atom_index
                .for_each_within(&self.atoms.pos, x, r, |id| {
                    measure += self.atoms.weight[id as usize];
                });
            return measure;
        }
        let mut measure = 0.0;
        for id in self.facet_index.within_ids(x, r) {
            let (s, _) = &self.segments[id as usize];
            if let Some((p, q)) = clip_segment_to_ball(s[0], s[1], x, r) {
                measure += dist(p, q);
            }
        }
        measure
    }

    /// Ahlfors-regularity scan over the given boundary centers and radius
    /// ladder.
    pub fn ar_check(&self, centers: &[Pt], radii: &[f64]) -> Result<ArReport> {
        if self.component_sigma.iter().any(|&s| s <= 0.0) {
            return Err(Error::InvalidDomain(
                "boundary component with zero measure".into(),
            ));
        }
        if centers.len() < 32 {
            return Err(Error::Input("need at least 32 centers".into()));
        }
        for &r in radii {
            if !(r > 0.0 && r < self.diam_boundary) {
                return Err(Error::Range(format!("radius {r} outside (0, diam)")));
            }
        }
        let n = (self.ambient_dim - 1) as u32;
        let mut per_radius = Vec::with_capacity(radii.len());
        let mut lower = f64::INFINITY;
        let mut upper = 0.0f64;
        for &r in radii {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for &c in centers {
                let ratio = self.surface_measure(c, r) / r.powi(n as i32);
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            lower = lower.min(lo);
            upper = upper.max(hi);
            per_radius.push((r, lo, hi));
        }
        let pass = lower > 0.0 && upper.is_finite();
        Ok(ArReport {
            lower,
            upper,
            pass,
            per_radius,
            n,
        })
    }

    /// Deterministic stratified sample of boundary atom midpoints.
    pub fn sample_boundary(&self, count: usize) -> Vec<Pt> {
        let total = self.atoms.len();
        (0..count)
            .map(|i| self.atoms.pos[(i * total) / count])
            .collect()
    }

    /// Checks polyline invariants: closure flags, simplicity (no two
    /// non-adjacent edges meeting), and agreement of oracle and brute force.
    pub fn validate(&self) -> Result<()> {
        if self.ambient_dim != 2 {
            return Ok(());
        }
        for (i, (si, ci)) in self.segments.iter().enumerate() {
            for (j, (sj, cj)) in self.segments.iter().enumerate().skip(i + 1) {
                let adjacent = ci == cj
                    && (dist(si[1], sj[0]) == 0.0
                        || dist(sj[1], si[0]) == 0.0
                        || dist(si[0], sj[0]) == 0.0
                        || dist(si[1], sj[1]) == 0.0);
                if adjacent {
                    continue;
                }
                if crate::geom::segments_intersect(si[0], si[1], sj[0], sj[1]) {
                    return Err(Error::InvalidDomain(format!(
                        "edges {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Brute-force distance over every facet; the indexed oracle must agree.
    pub fn boundary_dist_brute(&self, x: Pt) -> f64 {
        if self.ambient_dim == 2 {
            self.segments
                .iter()
                .map(|(s, _)| dist(x, closest_on_segment(x, s[0], s[1])))
                .fold(f64::INFINITY, f64::min)
        } else {
            self.triangles
                .iter()
                .map(|(t, _)| dist(x, closest_on_triangle(x, t)))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Sub-segment of `[a, b]` inside the open ball `B(x, r)`, when nonempty.
fn clip_segment_to_ball(a: Pt, b: Pt, x: Pt, r: f64) -> Option<(Pt, Pt)> {
    let d = sub(b, a);
    let f = sub(a, x);
    let qa = dot(d, d);
    let qb = 2.0 * dot(f, d);
    let qc = dot(f, f) - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
    if t1 <= t0 {
        return None;
    }
    Some((add(a, scale(d, t0)), add(a, scale(d, t1))))
}

/// Closest point on a triangle (standard region walk).
pub fn closest_on_triangle(p: Pt, t: &[Pt; 3]) -> Pt {
    let (a, b, c) = (t[0], t[1], t[2]);
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = sub(p, b);
    let d3 = dot(ab, bp);
    let d4 = dot(ac, bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return add(a, scale(ab, v));
    }
    let cp = sub(p, c);
    let d5 = dot(ab, cp);
    let d6 = dot(ac, cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return add(a, scale(ac, w));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return add(b, scale(sub(c, b), w));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    add(add(a, scale(ab, v)), scale(ac, w))
}

fn ray_hits_triangle(orig: Pt, dir: Pt, t: &[Pt; 3]) -> bool {
    let eps = 1e-12;
    let e1 = sub(t[1], t[0]);
    let e2 = sub(t[2], t[0]);
    let pvec = [
        dir[1] * e2[2] - dir[2] * e2[1],
        dir[2] * e2[0] - dir[0] * e2[2],
        dir[0] * e2[1] - dir[1] * e2[0],
    ];
    let det = dot(e1, pvec);
    if det.abs() < eps {
        return false;
    }
    let inv = 1.0 / det;
    let tvec = sub(orig, t[0]);
    let u = dot(tvec, pvec) * inv;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let qvec = [
        tvec[1] * e1[2] - tvec[2] * e1[1],
        tvec[2] * e1[0] - tvec[0] * e1[2],
        tvec[0] * e1[1] - tvec[1] * e1[0],
    ];
    let v = dot(dir, qvec) * inv;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    dot(e2, qvec) * inv >= 0.0
}
