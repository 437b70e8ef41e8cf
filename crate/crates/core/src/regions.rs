//! Whitney regions over dyadic cubes and the derived Carleson boxes and
//! sawtooth domains.
//!
//! Every Whitney box carries a "foot": the boundary atom nearest to it. The
//! core family `W*_Q` collects boxes whose foot lies in `Q`, whose scale is
//! within `k_star` dyadic steps of `ℓ(Q)`, and whose boundary distance stays
//! below `k0·ℓ(Q)`; a BFS augmentation then joins every member to the
//! corkscrew box of `X_Q` through the box adjacency graph, so Harnack chains
//! can run inside the region.

use crate::boundary::Domain;
use crate::dyadic::{CubeId, DyadicGrid};
use crate::geom::{dist, union_area, union_perimeter, Pt, Rect};
use crate::whitney::{rect_closest_boundary, WhitneyDecomposition};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FatLevel {
    /// `I* = (1+λ)I`
    Star,
    /// `I** = (1+2λ)I`
    StarStar,
    /// `I*** = (1+4λ)I`
    StarStarStar,
}

impl FatLevel {
    pub fn multiplier(self) -> f64 {
        match self {
            FatLevel::Star => 1.0,
            FatLevel::StarStar => 2.0,
            FatLevel::StarStarStar => 4.0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RegionParams {
    /// Fattening parameter λ.
    pub lambda: f64,
    /// Scale window `|k_I − k(Q)| ≤ k_star`.
    pub k_star: u32,
    /// Distance window `dist(I, Q) ≤ k0 · ℓ(Q)`.
    pub k0: f64,
}

impl Default for RegionParams {
    fn default() -> Self {
        RegionParams {
            lambda: 0.125,
            k_star: 7,
            k0: 2.0,
        }
    }
}

/// A union of Whitney boxes at a fixed fattening level.
#[derive(Clone, Debug)]
pub struct SawtoothRegion {
    pub root: CubeId,
    /// The pairwise disjoint stopping family (empty for Carleson boxes).
    pub family: Vec<CubeId>,
    /// The cube set `D_{F,Q}` behind the region.
    pub cubes: Vec<CubeId>,
    /// Box ids, sorted.
    pub boxes: Vec<u32>,
    pub fat: FatLevel,
    pub lambda: f64,
}

impl SawtoothRegion {
    pub fn rects(&self, w: &WhitneyDecomposition) -> Vec<Rect> {
        let m = self.fat.multiplier();
        self.boxes
            .iter()
            .map(|&b| w.boxes[b as usize].fattened(self.lambda, m))
            .collect()
    }

    pub fn core_rects(&self, w: &WhitneyDecomposition) -> Vec<Rect> {
        self.boxes
            .iter()
            .map(|&b| w.boxes[b as usize].rect)
            .collect()
    }

    /// Exact area of the fattened union.
    pub fn area(&self, w: &WhitneyDecomposition) -> f64 {
        union_area(&self.rects(w))
    }

    /// Exact boundary length of the fattened union.
    pub fn perimeter(&self, w: &WhitneyDecomposition) -> f64 {
        union_perimeter(&self.rects(w))
    }

    /// Membership in the open fattened union. The fattening margin is below
    /// half a box side, so only the owning box and its neighbours can cover.
    pub fn contains(&self, w: &WhitneyDecomposition, x: Pt) -> bool {
        let m = self.fat.multiplier();
        let candidates = match w.locate(x) {
            Some(owner) => {
                let mut c = vec![owner];
                c.extend_from_slice(&w.adjacency[owner as usize]);
                c
            }
            None => return false,
        };
        candidates.iter().any(|b| {
            self.boxes.binary_search(b).is_ok()
                && w.boxes[*b as usize]
                    .fattened(self.lambda, m)
                    .contains_strict(x)
        })
    }

    /// Midpoint quadrature nodes over the disjoint box cores, each box split
    /// into cells no wider than `h`.
    pub fn quad_nodes(&self, w: &WhitneyDecomposition, h: f64) -> Vec<(Pt, f64)> {
        let mut nodes = Vec::new();
        for &b in &self.boxes {
            let r = &w.boxes[b as usize].rect;
            let n = ((r.side() / h).ceil() as usize).max(1);
            let cell = r.side() / n as f64;
            let wgt = cell * cell;
            for i in 0..n {
                for j in 0..n {
                    nodes.push((
                        [
                            r.lo[0] + (i as f64 + 0.5) * cell,
                            r.lo[1] + (j as f64 + 0.5) * cell,
                            0.0,
                        ],
                        wgt,
                    ));
                }
            }
        }
        nodes
    }
}

/// Region machinery bound to one (domain, grid, decomposition) triple.
/// `W*_Q` families for every cube are built eagerly.
pub struct RegionBuilder<'a> {
    pub domain: &'a Domain,
    pub grid: &'a DyadicGrid,
    pub whitney: &'a WhitneyDecomposition,
    pub params: RegionParams,
    /// Per-cube augmented box families, sorted.
    w_star: Vec<Vec<u32>>,
    /// Per-box foot atom and scale index on the grid ladder.
    pub foot_atom: Vec<u32>,
    pub box_gen: Vec<f64>,
    /// Per-cube corkscrew points (region representatives).
    pub corkscrew: Vec<Option<Pt>>,
}

impl<'a> RegionBuilder<'a> {
    pub fn new(
        domain: &'a Domain,
        grid: &'a DyadicGrid,
        whitney: &'a WhitneyDecomposition,
        params: RegionParams,
    ) -> Result<Self> {
        if !(params.lambda > 0.0 && params.lambda <= 0.25) {
            return Err(Error::Parameter(format!(
                "lambda {} outside (0, 1/4]",
                params.lambda
            )));
        }
        let nb = whitney.boxes.len();
        let mut foot_atom = vec![u32::MAX; nb];
        let mut box_gen = vec![f64::NAN; nb];
        // Boxes grouped by foot atom: ids sorted by atom for range queries.
        for b in &whitney.boxes {
            let (z, facet, _) = rect_closest_boundary(domain, &b.rect);
            let range = domain.facet_atom_range(facet);
            let mut best = (f64::INFINITY, range.start);
            for a in range {
                let d = dist(domain.atoms.pos[a as usize], z);
                if d < best.0 {
                    best = (d, a);
                }
            }
            foot_atom[b.id as usize] = best.1;
            box_gen[b.id as usize] = (grid.scale / b.side()).log2();
        }
        let mut by_foot: Vec<u32> = (0..nb as u32).collect();
        by_foot.sort_by_key(|&b| foot_atom[b as usize]);

        // Corkscrew representatives: coarse-to-fine δ-maximization in B_Q.
        let mut corkscrew: Vec<Option<Pt>> = vec![None; grid.len()];
        for q in 0..grid.len() {
            let cube = grid.cube(q);
            if cube.radius <= 0.0 {
                continue;
            }
            corkscrew[q] = interior_max_delta(domain, cube.center, cube.radius);
        }

        let mut builder = RegionBuilder {
            domain,
            grid,
            whitney,
            params,
            w_star: vec![Vec::new(); grid.len()],
            foot_atom,
            box_gen,
            corkscrew,
        };
        builder.build_families(&by_foot)?;
        Ok(builder)
    }

    fn build_families(&mut self, by_foot: &[u32]) -> Result<()> {
        let atom_of = |b: u32| self.foot_atom[b as usize];
        for q in 0..self.grid.len() {
            let cube = self.grid.cube(q);
            if cube.generation == 0 && self.grid.cube(q).component == u32::MAX {
                continue; // multi-component root carries no region
            }
            let (a_lo, a_hi) = cube.atom_range;
            if a_hi <= a_lo {
                continue;
            }
            let lo = by_foot.partition_point(|&b| atom_of(b) < a_lo);
            let hi = by_foot.partition_point(|&b| atom_of(b) < a_hi);
            let kq = cube.generation as f64;
            let mut members: Vec<u32> = by_foot[lo..hi]
                .iter()
                .copied()
                .filter(|&b| {
                    let wb = &self.whitney.boxes[b as usize];
                    (self.box_gen[b as usize] - kq).abs() <= self.params.k_star as f64 + 0.5
                        && wb.dist_boundary <= self.params.k0 * cube.length
                })
                .collect();
            // Augmentation: connect members to the corkscrew box of X_Q.
            let start = self
                .corkscrew[q]
                .and_then(|x| self.whitney.locate(x));
            if let Some(start) = start {
                members = self.connect(q, start, members);
            }
            members.sort_unstable();
            members.dedup();
            self.w_star[q] = members;
        }
        Ok(())
    }

    /// BFS from the corkscrew box over touching boxes near the cube; keeps
    /// every member reachable together with its connecting path.
    fn connect(&self, q: CubeId, start: u32, members: Vec<u32>) -> Vec<u32> {
        let cube = self.grid.cube(q);
        let reach = (self.params.k0 + 4.0) * cube.length + 2.0 * cube.radius;
        let max_side = cube.length * 4.0;
        let admissible = |b: u32| {
            let wb = &self.whitney.boxes[b as usize];
            wb.side() <= max_side && dist(wb.center(), cube.center) <= reach
        };
        if !admissible(start) && members.is_empty() {
            return members;
        }
        let mut parent: crate::fasthash::U64Map<u32> = Default::default();
        parent.insert(start as u64, start);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        while let Some(b) = queue.pop_front() {
            for &n in &self.whitney.adjacency[b as usize] {
                if !admissible(n) || parent.contains_key(&(n as u64)) {
                    continue;
                }
                parent.insert(n as u64, b);
                queue.push_back(n);
            }
        }
        let mut keep: Vec<u32> = vec![start];
        for &m in &members {
            if !parent.contains_key(&(m as u64)) {
                continue; // unreachable at this scale; dropped
            }
            let mut cur = m;
            while cur != start {
                keep.push(cur);
                cur = parent[&(cur as u64)];
            }
        }
        keep
    }

    /// The augmented Whitney family `W*_Q`.
    pub fn w_star(&self, q: CubeId) -> &[u32] {
        &self.w_star[q]
    }

    /// `U_Q` at the requested fattening.
    pub fn whitney_region(&self, q: CubeId, fat: FatLevel) -> Result<SawtoothRegion> {
        if self.w_star[q].is_empty() {
            return Err(Error::Parameter(format!(
                "U_Q empty for cube {q}; raise k_star or k0"
            )));
        }
        let mut boxes = self.w_star[q].clone();
        boxes.sort_unstable();
        Ok(SawtoothRegion {
            root: q,
            family: Vec::new(),
            cubes: vec![q],
            boxes,
            fat,
            lambda: self.params.lambda,
        })
    }

    /// Carleson box `T_Q` (sawtooth with empty stopping family).
    pub fn carleson_box(&self, q: CubeId, fat: FatLevel) -> Result<SawtoothRegion> {
        self.sawtooth(&[], q, fat)
    }

    /// Local sawtooth `Ω_{F,Q}`: union of `U_{Q'}` over `Q' ⊆ Q` not under
    /// any stopping cube.
    pub fn sawtooth(&self, family: &[CubeId], q: CubeId, fat: FatLevel) -> Result<SawtoothRegion> {
        for (i, &f) in family.iter().enumerate() {
            for &g in family.iter().skip(i + 1) {
                if self.grid.is_descendant(f, g) || self.grid.is_descendant(g, f) {
                    return Err(Error::Input(format!(
                        "stopping family is not pairwise disjoint: {f} vs {g}"
                    )));
                }
            }
        }
        let cubes = self.discrete_sawtooth(family, q);
        let mut boxes = Vec::new();
        for &c in &cubes {
            boxes.extend_from_slice(&self.w_star[c]);
        }
        boxes.sort_unstable();
        boxes.dedup();
        Ok(SawtoothRegion {
            root: q,
            family: family.to_vec(),
            cubes,
            boxes,
            fat,
            lambda: self.params.lambda,
        })
    }

    /// `D_{F,Q}`: descendants of `Q` (inclusive) not inside any family cube.
    pub fn discrete_sawtooth(&self, family: &[CubeId], q: CubeId) -> Vec<CubeId> {
        let mut out = Vec::new();
        let mut stack = vec![q];
        while let Some(c) = stack.pop() {
            if family.contains(&c) {
                continue;
            }
            out.push(c);
            stack.extend(self.grid.cube(c).children.iter().copied());
        }
        out.sort_unstable();
        out
    }

    /// `U_{Q,ε}` for `ε = 2^{-m}`: the sawtooth over descendants of `Q` with
    /// `ℓ(Q') > ε·ℓ(Q)`.
    pub fn u_q_eps(&self, q: CubeId, m: u32) -> Result<SawtoothRegion> {
        let k = self.grid.cube(q).generation;
        if k + m > self.grid.depth + 1 {
            return Err(Error::Resolution(format!(
                "grid depth {} too shallow for ε = 2^-{m} below generation {k}",
                self.grid.depth
            )));
        }
        let cubes: Vec<CubeId> = self
            .grid
            .subtree(q)
            .into_iter()
            .filter(|&c| self.grid.cube(c).generation < k + m)
            .collect();
        let mut boxes = Vec::new();
        for &c in &cubes {
            boxes.extend_from_slice(&self.w_star[c]);
        }
        boxes.sort_unstable();
        boxes.dedup();
        if boxes.is_empty() {
            return Err(Error::Parameter(format!("U_{{Q,ε}} empty for cube {q}")));
        }
        Ok(SawtoothRegion {
            root: q,
            family: Vec::new(),
            cubes,
            boxes,
            fat: FatLevel::Star,
            lambda: self.params.lambda,
        })
    }

    /// Smallest κ0 with `T_Q** ⊆ κ0·B_Q` over cubes of generation ≤ `max_gen`.
    pub fn kappa0(&self, max_gen: u32) -> Result<f64> {
        let mut kappa: f64 = 0.0;
        for q in 0..self.grid.len() {
            let cube = self.grid.cube(q);
            if cube.generation > max_gen || cube.generation == 0 || cube.radius <= 0.0 {
                continue;
            }
            let region = self.carleson_box(q, FatLevel::StarStarStar)?;
            for r in region.rects(self.whitney) {
                for corner in [
                    [r.lo[0], r.lo[1], 0.0],
                    [r.hi[0], r.lo[1], 0.0],
                    [r.lo[0], r.hi[1], 0.0],
                    [r.hi[0], r.hi[1], 0.0],
                ] {
                    kappa = kappa.max(dist(corner, cube.center) / cube.radius);
                }
            }
        }
        Ok(kappa)
    }
}

/// `F(ρ)`: maximal cubes of `F ∪ {Q : ℓ(Q) ≤ ρ}`.
pub fn augment_family(grid: &DyadicGrid, family: &[CubeId], rho: f64) -> Vec<CubeId> {
    let mut big_f: Vec<CubeId> = family
        .iter()
        .copied()
        .filter(|&f| grid.cube(f).length > rho)
        .collect();
    // Cut generation: largest cubes with ℓ ≤ ρ whose parent is above the cut
    // and which sit under no retained family cube.
    let under_family = |q: CubeId| {
        big_f
            .iter()
            .any(|&f| grid.is_descendant(q, f))
    };
    let mut cut: Vec<CubeId> = Vec::new();
    for q in 0..grid.len() {
        let c = grid.cube(q);
        if c.length <= rho
            && c.parent.map(|p| grid.cube(p).length > rho).unwrap_or(true)
            && !under_family(q)
        {
            cut.push(q);
        }
    }
    big_f.append(&mut cut);
    big_f.sort_unstable();
    big_f
}

/// Poincaré ratio `‖f − mean‖_p / (ℓ(Q)·‖∇f‖_p)` over a region, by midpoint
/// quadrature on the box cores at pitch `h`. A vanishing gradient norm
/// reports 0 (constants are their own mean).
pub fn poincare_check<F, G>(
    region: &SawtoothRegion,
    w: &WhitneyDecomposition,
    grid: &DyadicGrid,
    f: F,
    grad_f: G,
    p: f64,
    h: f64,
) -> Result<f64>
where
    F: Fn(Pt) -> f64,
    G: Fn(Pt) -> [f64; 2],
{
    if region.boxes.is_empty() {
        return Err(Error::Input("empty region".into()));
    }
    let nodes = region.quad_nodes(w, h);
    let volume: f64 = nodes.iter().map(|(_, a)| a).sum();
    let mean = nodes.iter().map(|&(x, a)| f(x) * a).sum::<f64>() / volume;
    let mut dev = 0.0;
    let mut grad = 0.0;
    for &(x, a) in &nodes {
        dev += (f(x) - mean).abs().powf(p) * a;
        let g = grad_f(x);
        grad += (g[0] * g[0] + g[1] * g[1]).sqrt().powf(p) * a;
    }
    if grad == 0.0 {
        return Ok(0.0);
    }
    let ell = grid.cube(region.root).length;
    Ok((dev / grad).powf(1.0 / p) / ell)
}

/// Interior δ-maximizer inside `B(center, r)`: two-stage grid search at an
/// effective pitch of `r/64`.
pub fn interior_max_delta(domain: &Domain, center: Pt, r: f64) -> Option<Pt> {
    let mut best: (f64, Option<Pt>) = (0.0, None);
    let coarse = 16i32;
    let scan = |c: Pt, half: f64, n: i32, best: &mut (f64, Option<Pt>)| {
        for i in -n..=n {
            for j in -n..=n {
                let x = [
                    c[0] + i as f64 * half / n as f64,
                    c[1] + j as f64 * half / n as f64,
                    0.0,
                ];
                if dist(x, center) >= r {
                    continue;
                }
                let sd = domain.signed_dist(x);
                // Witness ball must stay inside B(center, r).
                let c_here = sd.min(r - dist(x, center));
                if c_here > best.0 {
                    *best = (c_here, Some(x));
                }
            }
        }
    };
    scan(center, r, coarse, &mut best);
    if let Some(p) = best.1 {
        let mut refined = best;
        scan(p, 2.0 * r / coarse as f64, 16, &mut refined);
        refined.1
    } else {
        None
    }
}
