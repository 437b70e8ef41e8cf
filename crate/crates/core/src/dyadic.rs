//! Christ-type dyadic grids on piecewise-linear boundaries.
//!
//! Curve boundaries use nested halving of the intrinsic (arclength) net: cut
//! points at level k form a maximal `2^{-k}`-net of the component in its own
//! metric, finer cells attach whole to their parent cell, ties break
//! lexicographically on position. Covering, nesting and unique-ancestor
//! properties then hold exactly on the atom sets, while the metric constants
//! (a0, C1, c, C, η) are measured and stored. Surface boundaries fall back to
//! a greedy euclidean net with the same hierarchical cell assignment.

use crate::boundary::Domain;
use crate::geom::{dist, Pt};
use crate::{Error, Result};
use serde::Serialize;

pub type CubeId = usize;

#[derive(Clone, Debug)]
pub struct DyadicCube {
    pub id: CubeId,
    pub generation: u32,
    /// Contiguous atom range `[lo, hi)` for curve grids; `(0, 0)` on surface
    /// grids, which carry explicit `members`.
    pub atom_range: (u32, u32),
    /// Explicit membership for surface grids.
    pub members: Option<Vec<u32>>,
    pub component: u32,
    /// ℓ(Q) = 2^{-k} · scale.
    pub length: f64,
    /// Center x_Q: a boundary atom midpoint near the arc median.
    pub center: Pt,
    pub center_atom: u32,
    /// r_Q with `c·ℓ(Q) ≤ r_Q ≤ ℓ(Q)` and `Δ(x_Q, 2 r_Q) ⊆ Q`.
    pub radius: f64,
    pub sigma: f64,
    pub parent: Option<CubeId>,
    pub children: Vec<CubeId>,
}

impl DyadicCube {
    #[inline]
    pub fn contains_atom(&self, atom: u32) -> bool {
        if self.atom_range.1 > self.atom_range.0 {
            atom >= self.atom_range.0 && atom < self.atom_range.1
        } else {
            self.members
                .as_ref()
                .map(|m| m.binary_search(&atom).is_ok())
                .unwrap_or(false)
        }
    }

    /// Atom ids of the cube, in increasing order.
    pub fn atom_ids(&self) -> Vec<u32> {
        if self.atom_range.1 > self.atom_range.0 {
            (self.atom_range.0..self.atom_range.1).collect()
        } else {
            self.members.clone().unwrap_or_default()
        }
    }
}

/// Constants measured while building the grid.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridConstants {
    /// Inner-ball property: every cube contains `Δ(x_Q, a0·2^{-k}·scale)`.
    pub a0: f64,
    /// Diameter bound: `diam(Q) ≤ c1 · 2^{-k} · scale`.
    pub c1: f64,
    /// Cube-ball correspondence: `c_ball · ℓ(Q) ≤ r_Q`.
    pub c_ball: f64,
    /// Cube-ball correspondence: `Q ⊆ Δ(x_Q, big_c · r_Q)`.
    pub big_c: f64,
    /// Thin-boundary exponent from the collar regression, when fitted.
    pub eta: f64,
    /// Thin-boundary multiplier from the same fit.
    pub thin_c1: f64,
}

pub struct DyadicGrid {
    pub cubes: Vec<DyadicCube>,
    /// Cube ids per generation.
    pub by_generation: Vec<Vec<CubeId>>,
    /// ℓ at generation 0; chosen as diam(∂Ω).
    pub scale: f64,
    pub constants: GridConstants,
    pub depth: u32,
}

impl DyadicGrid {
    pub fn root(&self) -> CubeId {
        0
    }

    pub fn cube(&self, id: CubeId) -> &DyadicCube {
        &self.cubes[id]
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// The cube of generation `k` containing the given atom. Curve grids keep
    /// each generation sorted by atom range, so this is a binary search.
    pub fn cube_of_atom(&self, k: u32, atom: u32) -> Option<CubeId> {
        let gen = self.by_generation.get(k as usize)?;
        if gen.is_empty() {
            return None;
        }
        if self.cubes[gen[0]].atom_range.1 > self.cubes[gen[0]].atom_range.0 {
            let idx = gen.partition_point(|&q| self.cubes[q].atom_range.1 <= atom);
            return gen
                .get(idx)
                .copied()
                .filter(|&q| self.cubes[q].contains_atom(atom));
        }
        gen.iter()
            .copied()
            .find(|&q| self.cubes[q].contains_atom(atom))
    }

    /// All cubes of the subtree rooted at `q` (including `q`).
    pub fn subtree(&self, q: CubeId) -> Vec<CubeId> {
        let mut out = vec![q];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.cubes[out[i]].children.iter().copied());
            i += 1;
        }
        out
    }

    /// `Q' ⊆ Q'' ` test through tree ancestry.
    pub fn is_descendant(&self, q: CubeId, ancestor: CubeId) -> bool {
        let mut cur = Some(q);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.cubes[c].parent;
        }
        false
    }

    /// Exactly the descendants `Q' ⊆ Q` with `ℓ(Q') = 2^{-m} ℓ(Q)`.
    pub fn descendants_at_scale(&self, q: CubeId, m: u32) -> Result<Vec<CubeId>> {
        let target = self.cubes[q].generation + m;
        if target > self.depth {
            return Err(Error::Resolution(format!(
                "grid depth {} cannot refine generation {} by 2^-{m}",
                self.depth, self.cubes[q].generation
            )));
        }
        let mut out = Vec::new();
        let mut stack = vec![q];
        while let Some(c) = stack.pop() {
            if self.cubes[c].generation == target {
                out.push(c);
            } else {
                stack.extend(self.cubes[c].children.iter().copied());
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Serialize the cube tree with stable ids.
    pub fn export_json(&self) -> String {
        #[derive(Serialize)]
        struct Node {
            id: usize,
            k: u32,
            sigma: f64,
            x_q: [f64; 2],
            r_q: f64,
            children: Vec<usize>,
        }
        let nodes: Vec<Node> = self
            .cubes
            .iter()
            .map(|c| Node {
                id: c.id,
                k: c.generation,
                sigma: c.sigma,
                x_q: [c.center[0], c.center[1]],
                r_q: c.radius,
                children: c.children.clone(),
            })
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({
            "scale": self.scale,
            "depth": self.depth,
            "constants": self.constants,
            "cubes": nodes,
        }))
        .expect("grid export")
    }
}

/// Build a grid of the given depth. Generation 0 is the whole boundary; with
/// several components, generation 1 holds one cube per component and halving
/// starts below.
pub fn build_grid(domain: &Domain, depth: u32) -> Result<DyadicGrid> {
    if depth < 1 {
        return Err(Error::Input("depth must be at least 1".into()));
    }
    let scale = domain.diam_boundary();
    if domain.ambient_dim != 2 {
        return build_grid_net(domain, depth);
    }
    let n_comp = domain.components.len();
    for c in 0..n_comp {
        if domain.component_sigma(c) < scale * 0.5_f64.powi(depth as i32) {
            return Err(Error::Resolution(format!(
                "component {c} is shorter than the finest grid scale"
            )));
        }
    }

    let atoms = &domain.atoms;
    let total_atoms = atoms.len() as u32;
    let mut cubes: Vec<DyadicCube> = Vec::new();
    let mut by_generation: Vec<Vec<CubeId>> = vec![Vec::new(); depth as usize + 1];

    let mut comp_ranges: Vec<(u32, u32)> = vec![(u32::MAX, 0); n_comp];
    for i in 0..atoms.len() {
        let c = atoms.component[i] as usize;
        comp_ranges[c].0 = comp_ranges[c].0.min(i as u32);
        comp_ranges[c].1 = comp_ranges[c].1.max(i as u32 + 1);
    }

    cubes.push(DyadicCube {
        id: 0,
        generation: 0,
        atom_range: (0, total_atoms),
        members: None,
        component: if n_comp == 1 { 0 } else { u32::MAX },
        length: scale,
        center: atoms.pos[0],
        center_atom: 0,
        radius: scale,
        sigma: domain.sigma_total(),
        parent: None,
        children: Vec::new(),
    });
    by_generation[0].push(0);

    // (cube id, arc interval still to split).
    let mut frontier: Vec<(CubeId, f64, f64)> = Vec::new();
    if n_comp == 1 {
        frontier.push((0, 0.0, domain.component_sigma(0)));
    } else {
        for (c, &range) in comp_ranges.iter().enumerate() {
            let sigma: f64 = (range.0..range.1).map(|i| atoms.weight[i as usize]).sum();
            let id = cubes.len();
            cubes.push(DyadicCube {
                id,
                generation: 1,
                atom_range: range,
                members: None,
                component: c as u32,
                length: scale * 0.5,
                center: atoms.pos[range.0 as usize],
                center_atom: range.0,
                radius: scale * 0.5,
                sigma,
                parent: Some(0),
                children: Vec::new(),
            });
            cubes[0].children.push(id);
            by_generation[1].push(id);
            frontier.push((id, 0.0, domain.component_sigma(c)));
        }
    }

    while let Some((q, lo, hi)) = frontier.pop() {
        let gen = cubes[q].generation;
        if gen >= depth {
            continue;
        }
        let (a_lo, a_hi) = cubes[q].atom_range;
        if a_hi - a_lo < 2 {
            return Err(Error::Resolution(format!(
                "cube {q} has too few atoms to split; refine the boundary sampling"
            )));
        }
        let mid = 0.5 * (lo + hi);
        // First atom with arc ≥ mid; atoms are arc-sorted within the range.
        let split = {
            let mut l = a_lo;
            let mut r = a_hi;
            while l < r {
                let m = (l + r) / 2;
                if atoms.arc[m as usize] < mid {
                    l = m + 1;
                } else {
                    r = m;
                }
            }
            l.clamp(a_lo + 1, a_hi - 1)
        };
        for (c_lo, c_hi, arc_lo, arc_hi) in [(a_lo, split, lo, mid), (split, a_hi, mid, hi)] {
            let sigma: f64 = (c_lo..c_hi).map(|i| atoms.weight[i as usize]).sum();
            let id = cubes.len();
            cubes.push(DyadicCube {
                id,
                generation: gen + 1,
                atom_range: (c_lo, c_hi),
                members: None,
                component: cubes[q].component,
                length: scale * 0.5_f64.powi(gen as i32 + 1),
                center: atoms.pos[c_lo as usize],
                center_atom: c_lo,
                radius: 0.0,
                sigma,
                parent: Some(q),
                children: Vec::new(),
            });
            cubes[q].children.push(id);
            by_generation[gen as usize + 1].push(id);
            frontier.push((id, arc_lo, arc_hi));
        }
    }

    // Centers, radii and measured constants.
    let mut a0 = f64::INFINITY;
    let mut c1 = 0.0f64;
    let mut c_ball = f64::INFINITY;
    let mut big_c = 0.0f64;
    for q in 0..cubes.len() {
        let (a_lo, a_hi) = cubes[q].atom_range;
        let k = cubes[q].generation;
        let ell = cubes[q].length;
        if cubes[q].component != u32::MAX {
            let target = 0.5 * (atoms.arc[a_lo as usize] + atoms.arc[(a_hi - 1) as usize]);
            let mut best = (f64::INFINITY, a_lo);
            for i in a_lo..a_hi {
                let d = (atoms.arc[i as usize] - target).abs();
                if d < best.0 {
                    best = (d, i);
                }
            }
            cubes[q].center_atom = best.1;
            cubes[q].center = atoms.pos[best.1 as usize];
        }
        let center = cubes[q].center;
        // r_Q ≤ ℓ(Q) anyway, so cap the complement search at 2ℓ.
        let d_out = domain.atom_index().min_dist_where_capped(
            &domain.atoms.pos,
            center,
            2.05 * ell,
            |i| i < a_lo || i >= a_hi,
        );
        let d_out = if d_out.is_finite() { d_out } else { 2.05 * ell };
        let r_q = (0.5 * d_out * (1.0 - 1e-9)).min(ell);
        cubes[q].radius = r_q;

        let mut reach = 0.0f64;
        for i in a_lo..a_hi {
            reach = reach.max(dist(atoms.pos[i as usize], center));
        }
        let stride = (((a_hi - a_lo) / 64).max(1)) as usize;
        let ids: Vec<u32> = (a_lo..a_hi).step_by(stride).chain([a_hi - 1]).collect();
        let mut diam_q = 0.0f64;
        for (ii, &i) in ids.iter().enumerate() {
            for &j in ids.iter().skip(ii + 1) {
                diam_q = diam_q.max(dist(atoms.pos[i as usize], atoms.pos[j as usize]));
            }
        }
        let pref = scale * 0.5_f64.powi(k as i32);
        if k >= 1 {
            a0 = a0.min(d_out / pref);
            c1 = c1.max(diam_q / pref);
            c_ball = c_ball.min(r_q / ell);
            if r_q > 0.0 {
                big_c = big_c.max(reach / r_q * (1.0 + 1e-9));
            }
        }
    }

    for gen in &mut by_generation {
        gen.sort_by_key(|&q| cubes[q].atom_range.0);
    }
    let mut grid = DyadicGrid {
        cubes,
        by_generation,
        scale,
        constants: GridConstants {
            a0,
            c1,
            c_ball,
            big_c,
            eta: 0.0,
            thin_c1: 0.0,
        },
        depth,
    };
    // Thin-boundary regression over a default τ ladder.
    let taus: Vec<f64> = (1..=6).map(|i| 0.5_f64.powi(i)).collect();
    let (tc1, eta) = fit_thin_exponent(&grid, domain, &taus);
    grid.constants.thin_c1 = tc1;
    grid.constants.eta = eta;
    Ok(grid)
}

/// Greedy euclidean-net construction for surface boundaries. Nets are nested
/// across levels; each finer cell attaches whole to its nearest coarser net
/// point, ties broken by net index.
fn build_grid_net(domain: &Domain, depth: u32) -> Result<DyadicGrid> {
    let atoms = &domain.atoms;
    let scale = domain.diam_boundary();
    let n = atoms.len();
    let mut nets: Vec<Vec<u32>> = vec![vec![0u32]];
    for k in 1..=depth {
        let radius = scale * 0.5_f64.powi(k as i32);
        let mut net = nets[k as usize - 1].clone();
        for i in 0..n as u32 {
            let p = atoms.pos[i as usize];
            if net.iter().all(|&j| dist(p, atoms.pos[j as usize]) >= radius) {
                net.push(i);
            }
        }
        nets.push(net);
    }
    let assign = |points: &[u32], x: Pt| -> u32 {
        let mut best = (f64::INFINITY, 0u32);
        for (idx, &j) in points.iter().enumerate() {
            let d = dist(x, atoms.pos[j as usize]);
            if d < best.0 - 1e-15 {
                best = (d, idx as u32);
            }
        }
        best.1
    };
    // atom -> cell index per level, hierarchically consistent.
    let mut cell_of: Vec<Vec<u32>> = vec![Vec::new(); depth as usize + 1];
    cell_of[depth as usize] = (0..n)
        .map(|i| assign(&nets[depth as usize], atoms.pos[i]))
        .collect();
    for k in (0..depth as usize).rev() {
        let fine_to_coarse: Vec<u32> = nets[k + 1]
            .iter()
            .map(|&j| assign(&nets[k], atoms.pos[j as usize]))
            .collect();
        cell_of[k] = (0..n)
            .map(|i| fine_to_coarse[cell_of[k + 1][i] as usize])
            .collect();
    }

    let mut cubes: Vec<DyadicCube> = Vec::new();
    let mut by_generation: Vec<Vec<CubeId>> = vec![Vec::new(); depth as usize + 1];
    let mut cell_to_cube: Vec<std::collections::HashMap<u32, CubeId>> =
        vec![std::collections::HashMap::new(); depth as usize + 1];
    for k in 0..=depth as usize {
        let mut cells: Vec<u32> = cell_of[k].clone();
        cells.sort_unstable();
        cells.dedup();
        for cell in cells {
            let members: Vec<u32> = (0..n as u32)
                .filter(|&i| cell_of[k][i as usize] == cell)
                .collect();
            if members.is_empty() {
                continue;
            }
            let sigma: f64 = members.iter().map(|&i| atoms.weight[i as usize]).sum();
            let center_atom = nets[k][cell as usize];
            let center = atoms.pos[center_atom as usize];
            let mut d_out = f64::INFINITY;
            for i in 0..n as u32 {
                if cell_of[k][i as usize] != cell {
                    d_out = d_out.min(dist(atoms.pos[i as usize], center));
                }
            }
            let ell = scale * 0.5_f64.powi(k as i32);
            let id = cubes.len();
            cubes.push(DyadicCube {
                id,
                generation: k as u32,
                atom_range: (0, 0),
                members: Some(members),
                component: 0,
                length: ell,
                center,
                center_atom,
                radius: (0.5 * d_out.min(scale)).min(ell),
                sigma,
                parent: None,
                children: Vec::new(),
            });
            by_generation[k].push(id);
            cell_to_cube[k].insert(cell, id);
        }
    }
    for k in 1..=depth as usize {
        for qi in 0..by_generation[k].len() {
            let q = by_generation[k][qi];
            let member = cubes[q].members.as_ref().unwrap()[0];
            let parent_cell = cell_of[k - 1][member as usize];
            let p = cell_to_cube[k - 1][&parent_cell];
            cubes[q].parent = Some(p);
            cubes[p].children.push(q);
        }
    }
    // Measured constants (inner balls may be slack on coarse nets).
    let mut a0 = f64::INFINITY;
    let mut c1 = 0.0f64;
    let mut c_ball = f64::INFINITY;
    let mut big_c = 0.0f64;
    for cube in &cubes {
        if cube.generation == 0 {
            continue;
        }
        let pref = scale * 0.5_f64.powi(cube.generation as i32);
        let mut reach = 0.0f64;
        for &i in cube.members.as_ref().unwrap() {
            reach = reach.max(dist(atoms.pos[i as usize], cube.center));
        }
        a0 = a0.min(cube.radius * 2.0 / pref);
        c1 = c1.max(2.0 * reach / pref);
        c_ball = c_ball.min(cube.radius / cube.length);
        if cube.radius > 0.0 {
            big_c = big_c.max(reach / cube.radius * (1.0 + 1e-9));
        }
    }
    Ok(DyadicGrid {
        cubes,
        by_generation,
        scale,
        constants: GridConstants {
            a0,
            c1,
            c_ball,
            big_c,
            eta: 0.0,
            thin_c1: 0.0,
        },
        depth,
    })
}

/// Collar measurement per cube: the σ-fraction within `τ·2^{-k}·scale` of the
/// cube's complement in the boundary.
pub struct ThinBoundaryReport {
    pub tau: f64,
    /// (cube id, ratio) for every cube of generation ≥ 1.
    pub ratios: Vec<(CubeId, f64)>,
    pub max_ratio: f64,
}

pub fn thin_boundary_check(
    grid: &DyadicGrid,
    domain: &Domain,
    tau: f64,
) -> Result<ThinBoundaryReport> {
    if !(tau > 0.0) || tau >= 1.0 {
        return Err(Error::Range(format!("tau {tau} outside (0, 1)")));
    }
    let atoms = &domain.atoms;
    let mut ratios = Vec::new();
    let mut max_ratio = 0.0f64;
    for cube in &grid.cubes {
        if cube.generation == 0 || cube.sigma <= 0.0 {
            continue;
        }
        let (a_lo, a_hi) = cube.atom_range;
        let collar = tau * grid.scale * 0.5_f64.powi(cube.generation as i32);
        let mut near = 0.0;
        for i in cube.atom_ids() {
            let hit = if a_hi > a_lo {
                domain
                    .atom_index()
                    .exists_within_where(&atoms.pos, atoms.pos[i as usize], collar, |j| {
                        j < a_lo || j >= a_hi
                    })
            } else {
                domain
                    .atom_index()
                    .exists_within_where(&atoms.pos, atoms.pos[i as usize], collar, |j| {
                        !cube.contains_atom(j)
                    })
            };
            if hit {
                near += atoms.weight[i as usize];
            }
        }
        let ratio = near / cube.sigma;
        max_ratio = max_ratio.max(ratio);
        ratios.push((cube.id, ratio));
    }
    Ok(ThinBoundaryReport {
        tau,
        ratios,
        max_ratio,
    })
}

/// Least-squares fit of `max-ratio(τ) ≈ C1 · τ^η` over a τ ladder.
pub fn fit_thin_exponent(grid: &DyadicGrid, domain: &Domain, taus: &[f64]) -> (f64, f64) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &tau in taus {
        if let Ok(rep) = thin_boundary_check(grid, domain, tau) {
            if rep.max_ratio > 0.0 {
                xs.push(tau.ln());
                ys.push(rep.max_ratio.ln());
            }
        }
    }
    if xs.len() < 2 {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..xs.len() {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    let eta = num / den;
    let c1 = (my - eta * mx).exp();
    (c1, eta)
}
