//! Discrete measures on cube trees: Carleson norms, stopping-time
//! extraction, sawtooth-to-Carleson amplification, and the packing pipeline
//! for bad-cube families.
//!
//! Everything here is exact tree arithmetic; threshold comparisons carry a
//! `1e-12` relative slack and ties resolve as "not stopped".

use crate::dyadic::{CubeId, DyadicGrid};
use crate::{Error, Result};

/// Tree interface shared by boundary grids and synthetic test trees.
pub trait CubeTree {
    fn len(&self) -> usize;
    fn root(&self) -> usize;
    fn children(&self, q: usize) -> &[usize];
    fn parent(&self, q: usize) -> Option<usize>;
    fn sigma(&self, q: usize) -> f64;
    fn length(&self, q: usize) -> f64;

    fn subtree(&self, q: usize) -> Vec<usize> {
        let mut out = vec![q];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(self.children(out[i]));
            i += 1;
        }
        out
    }

    fn is_descendant(&self, q: usize, ancestor: usize) -> bool {
        let mut cur = Some(q);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.parent(c);
        }
        false
    }
}

impl CubeTree for DyadicGrid {
    fn len(&self) -> usize {
        self.cubes.len()
    }
    fn root(&self) -> usize {
        0
    }
    fn children(&self, q: usize) -> &[usize] {
        &self.cubes[q].children
    }
    fn parent(&self, q: usize) -> Option<usize> {
        self.cubes[q].parent
    }
    fn sigma(&self, q: usize) -> f64 {
        self.cubes[q].sigma
    }
    fn length(&self, q: usize) -> f64 {
        self.cubes[q].length
    }
}

/// Perfect binary tree with σ halving per generation; the synthetic stand-in
/// for segment and half-plane grids.
pub struct SyntheticTree {
    pub children: Vec<Vec<usize>>,
    pub parent: Vec<Option<usize>>,
    pub sigma: Vec<f64>,
    pub length: Vec<f64>,
    pub generation: Vec<u32>,
}

impl SyntheticTree {
    pub fn binary(depth: u32) -> Self {
        let n = (1usize << (depth + 1)) - 1;
        let mut children = vec![Vec::new(); n];
        let mut parent = vec![None; n];
        let mut sigma = vec![0.0; n];
        let mut length = vec![0.0; n];
        let mut generation = vec![0u32; n];
        // Heap layout: children of q are 2q+1, 2q+2.
        for q in 0..n {
            let gen = (q + 1).ilog2();
            generation[q] = gen;
            sigma[q] = 0.5_f64.powi(gen as i32);
            length[q] = 0.5_f64.powi(gen as i32);
            if 2 * q + 2 < n {
                children[q] = vec![2 * q + 1, 2 * q + 2];
                parent[2 * q + 1] = Some(q);
                parent[2 * q + 2] = Some(q);
            }
        }
        SyntheticTree {
            children,
            parent,
            sigma,
            length,
            generation,
        }
    }
}

impl CubeTree for SyntheticTree {
    fn len(&self) -> usize {
        self.sigma.len()
    }
    fn root(&self) -> usize {
        0
    }
    fn children(&self, q: usize) -> &[usize] {
        &self.children[q]
    }
    fn parent(&self, q: usize) -> Option<usize> {
        self.parent[q]
    }
    fn sigma(&self, q: usize) -> f64 {
        self.sigma[q]
    }
    fn length(&self, q: usize) -> f64 {
        self.length[q]
    }
}

/// Nonnegative weights `α_Q` indexed by cube id.
#[derive(Clone, Debug)]
pub struct DiscreteMeasure {
    pub alpha: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn zeros(tree: &impl CubeTree) -> Self {
        DiscreteMeasure {
            alpha: vec![0.0; tree.len()],
        }
    }

    pub fn from_alpha(alpha: Vec<f64>) -> Result<Self> {
        if alpha.iter().any(|&a| a < 0.0 || !a.is_finite()) {
            return Err(Error::Input("weights must be finite and ≥ 0".into()));
        }
        Ok(DiscreteMeasure { alpha })
    }

    /// Weights σ(Q) on a cube id set, 0 elsewhere (the bad-cube measure).
    pub fn indicator_sigma(tree: &impl CubeTree, cubes: &[usize]) -> Self {
        let mut alpha = vec![0.0; tree.len()];
        for &q in cubes {
            alpha[q] = tree.sigma(q);
        }
        DiscreteMeasure { alpha }
    }

    /// CSV rows `cube,alpha`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cube,alpha\n");
        for (q, a) in self.alpha.iter().enumerate() {
            if *a != 0.0 {
                out.push_str(&format!("{q},{a}\n"));
            }
        }
        out
    }

    pub fn from_csv(text: &str, n: usize) -> Result<Self> {
        let mut alpha = vec![0.0; n];
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                continue;
            }
            let mut it = line.split(',');
            let q: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad cube id on line {i}")))?;
            let a: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad weight on line {i}")))?;
            if q >= n {
                return Err(Error::Format(format!("cube id {q} out of range")));
            }
            alpha[q] = a;
        }
        Self::from_alpha(alpha)
    }
}

/// `m_α(D_Q)` for every cube, by post-order accumulation.
pub fn subtree_sums(tree: &impl CubeTree, m: &DiscreteMeasure) -> Vec<f64> {
    let n = tree.len();
    let mut sums = m.alpha.clone();
    // Process children before parents: order by depth descending.
    let mut order: Vec<usize> = (0..n).collect();
    let depth = |mut q: usize| {
        let mut d = 0;
        while let Some(p) = tree.parent(q) {
            d += 1;
            q = p;
        }
        d
    };
    order.sort_by_key(|&q| std::cmp::Reverse(depth(q)));
    for &q in &order {
        if let Some(p) = tree.parent(q) {
            sums[p] += sums[q];
        }
    }
    sums
}

/// `‖m_α‖_C(Q^0) = sup_{Q ⊆ Q^0} m_α(D_Q)/σ(Q)`, exact on the finite tree.
pub fn carleson_norm(tree: &impl CubeTree, m: &DiscreteMeasure, root: usize) -> f64 {
    let sums = subtree_sums(tree, m);
    tree.subtree(root)
        .into_iter()
        .filter(|&q| tree.sigma(q) > 0.0)
        .map(|q| sums[q] / tree.sigma(q))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct StoppingFamily {
    pub root: usize,
    /// Maximal stopped cubes, pairwise disjoint, none equal to the root.
    pub cubes: Vec<usize>,
    pub k0: f64,
    pub theta: f64,
    /// `K1 = (4 K0)^{1/θ}`.
    pub k1: f64,
}

/// Verify the A∞-type hypothesis for `μ` on `Q0` over subtree-representable
/// sets: all unions of the generation-`g` cubes below `Q0`, where `g` is the
/// deepest generation with at most 16 cubes (exhaustive over 2^16 subsets).
fn verify_ainfty_hypothesis(
    tree: &impl CubeTree,
    root: usize,
    mu: &[f64],
    k0: f64,
    theta: f64,
) -> Result<()> {
    let s0 = tree.sigma(root);
    let m0 = mu[root];
    if !(m0 / s0 >= 1.0 - 1e-12 && m0 / s0 <= k0 * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!(
            "μ(Q0)/σ(Q0) = {} outside [1, K0 = {k0}]",
            m0 / s0
        )));
    }
    // Deepest antichain of size ≤ 16 made of whole generations below root.
    let mut level = vec![root];
    loop {
        let next: Vec<usize> = level
            .iter()
            .flat_map(|&q| tree.children(q).iter().copied())
            .collect();
        if next.is_empty() || next.len() > 16 {
            break;
        }
        level = next;
    }
    if level.len() <= 1 {
        return Ok(());
    }
    let masses: Vec<(f64, f64)> = level.iter().map(|&q| (mu[q], tree.sigma(q))).collect();
    for mask in 1u32..(1 << level.len()) {
        let mut mf = 0.0;
        let mut sf = 0.0;
        for (i, &(m, s)) in masses.iter().enumerate() {
            if mask & (1 << i) != 0 {
                mf += m;
                sf += s;
            }
        }
        if mf / s0 > k0 * (sf / s0).powf(theta) * (1.0 + 1e-9) {
            return Err(Error::Precondition(format!(
                "A∞ hypothesis fails on a union of {} generation cubes: μ(F)/σ(Q0) = {} > K0 (σ(F)/σ(Q0))^θ = {}",
                mask.count_ones(),
                mf / s0,
                k0 * (sf / s0).powf(theta)
            )));
        }
    }
    Ok(())
}

/// Stopping-time extraction: maximal cubes where the density ratio leaves
/// `[1/2, K0·K1]`, with `K1 = (4K0)^{1/θ}`. The ample-contact and sawtooth
/// density postconditions are asserted on the output, not assumed.
pub fn stopping_time(
    tree: &impl CubeTree,
    root: usize,
    mu: &[f64],
    k0: f64,
    theta: f64,
) -> Result<StoppingFamily> {
    if k0 < 1.0 || theta <= 0.0 {
        return Err(Error::Parameter("need K0 ≥ 1 and θ > 0".into()));
    }
    if mu.len() != tree.len() {
        return Err(Error::Input("μ must assign a mass to every cube".into()));
    }
    // μ must be additive over children (a set measure on the tree).
    for q in 0..tree.len() {
        let kids = tree.children(q);
        if !kids.is_empty() {
            let s: f64 = kids.iter().map(|&c| mu[c]).sum();
            if (s - mu[q]).abs() > 1e-9 * mu[q].abs().max(1.0) {
                return Err(Error::Input(format!(
                    "μ is not additive at cube {q}: {s} vs {}",
                    mu[q]
                )));
            }
        }
    }
    verify_ainfty_hypothesis(tree, root, mu, k0, theta)?;
    let k1 = (4.0 * k0).powf(1.0 / theta);
    let hi = k0 * k1;
    // Ties (equality within slack) are not stopped.
    let stopped = |q: usize| {
        let ratio = mu[q] / tree.sigma(q);
        ratio < 0.5 - 1e-12 || ratio > hi * (1.0 + 1e-12)
    };
    let mut family = Vec::new();
    let mut stack: Vec<usize> = tree.children(root).to_vec();
    while let Some(q) = stack.pop() {
        if stopped(q) {
            family.push(q);
        } else {
            stack.extend_from_slice(tree.children(q));
        }
    }
    family.sort_unstable();
    // Postconditions.
    let sigma_family: f64 = family.iter().map(|&q| tree.sigma(q)).sum();
    let ample = tree.sigma(root) - sigma_family;
    if ample < tree.sigma(root) / k1 * (1.0 - 1e-9) {
        return Err(Error::Certification(format!(
            "ample contact fails: σ(Q0 ∖ ∪F) = {ample} < σ(Q0)/K1 = {}",
            tree.sigma(root) / k1
        )));
    }
    // Density bracket on the sawtooth cube set.
    let mut stack = vec![root];
    while let Some(q) = stack.pop() {
        if family.binary_search(&q).is_ok() {
            continue;
        }
        let ratio = mu[q] / tree.sigma(q);
        if q != root && !(0.5 - 1e-9..=hi * (1.0 + 1e-9)).contains(&ratio) {
            return Err(Error::Certification(format!(
                "sawtooth density fails at cube {q}: ratio {ratio}"
            )));
        }
        stack.extend_from_slice(tree.children(q));
    }
    Ok(StoppingFamily {
        root,
        cubes: family,
        k0,
        theta,
        k1,
    })
}

/// Certification data for one root in the sawtooth-to-Carleson lemma.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SawtoothCertRecord {
    pub q0: usize,
    pub ample_fraction: f64,
    pub sawtooth_mass_ratio: f64,
}

/// Amplify per-sawtooth control into a global Carleson bound: if for every
/// `Q0` the oracle family leaves `σ(Q0∖∪F) ≥ σ(Q0)/K1` and
/// `m_α(D_{F,Q0}) ≤ M1·σ(Q0)`, then `‖m_α‖_C ≤ K1·M1`. Both hypotheses are
/// checked numerically for every root; the returned bound is asserted
/// against the direct norm.
pub fn sawtooth_to_carleson<T: CubeTree, F: Fn(usize) -> Vec<usize>>(
    tree: &T,
    m: &DiscreteMeasure,
    root: usize,
    oracle: F,
    k1: f64,
    m1: f64,
) -> Result<(f64, Vec<SawtoothCertRecord>)> {
    let sums = subtree_sums(tree, m);
    let mut records = Vec::new();
    for q0 in tree.subtree(root) {
        let family = oracle(q0);
        for (i, &f) in family.iter().enumerate() {
            if f == q0 || !tree.is_descendant(f, q0) {
                return Err(Error::Certification(format!(
                    "family for Q0 = {q0} contains a non-descendant or the root itself: {f}"
                )));
            }
            for &g in family.iter().skip(i + 1) {
                if tree.is_descendant(f, g) || tree.is_descendant(g, f) {
                    return Err(Error::Certification(format!(
                        "family for Q0 = {q0} is not pairwise disjoint"
                    )));
                }
            }
        }
        let sigma_f: f64 = family.iter().map(|&f| tree.sigma(f)).sum();
        let ample = (tree.sigma(q0) - sigma_f) / tree.sigma(q0);
        if ample < 1.0 / k1 * (1.0 - 1e-9) {
            return Err(Error::Certification(format!(
                "ample-contact hypothesis fails at Q0 = {q0}: fraction {ample} < 1/K1"
            )));
        }
        let mass = sums[q0] - family.iter().map(|&f| sums[f]).sum::<f64>();
        let ratio = mass / tree.sigma(q0);
        if ratio > m1 * (1.0 + 1e-9) {
            return Err(Error::Certification(format!(
                "sawtooth mass hypothesis fails at Q0 = {q0}: m_α(D_F)/σ = {ratio} > M1 = {m1}"
            )));
        }
        records.push(SawtoothCertRecord {
            q0,
            ample_fraction: ample,
            sawtooth_mass_ratio: ratio,
        });
    }
    let bound = k1 * m1;
    let norm = carleson_norm(tree, m, root);
    if norm > bound * (1.0 + 1e-9) {
        return Err(Error::Certification(format!(
            "direct norm {norm} exceeds the certificate {bound}"
        )));
    }
    Ok((bound, records))
}

#[derive(Clone, Debug)]
pub struct PackingReport {
    /// `sup_Q Σ_{Q'∈B, Q'⊆Q} σ(Q') / σ(Q)`.
    pub m1_hat: f64,
    /// Per-cube packing ratios.
    pub per_q: Vec<(usize, f64)>,
}

/// Packing functional of a bad-cube family.
pub fn packing_test(tree: &impl CubeTree, bad: &[usize]) -> PackingReport {
    let m = DiscreteMeasure::indicator_sigma(tree, bad);
    let sums = subtree_sums(tree, &m);
    let mut per_q = Vec::with_capacity(tree.len());
    let mut m1_hat = 0.0f64;
    for q in 0..tree.len() {
        if tree.sigma(q) <= 0.0 {
            continue;
        }
        let ratio = sums[q] / tree.sigma(q);
        m1_hat = m1_hat.max(ratio);
        per_q.push((q, ratio));
    }
    PackingReport { m1_hat, per_q }
}

/// Extract a good cube under the packing bound: inside the maximal subcube
/// `Q1 ⊆ Δ_Q` there is a cube `Q' ∉ B` within `⌊M1⌋` generations, giving the
/// induced exterior constant `c0' = c0 · c_ball · 2^{-⌊M1⌋}`.
pub fn corkscrew_from_packing(
    domain: &crate::boundary::Domain,
    grid: &DyadicGrid,
    q: CubeId,
    m1: f64,
    bad: &[usize],
    c0: f64,
) -> Result<(CubeId, f64)> {
    let cube = grid.cube(q);
    // Maximal subcube of Q contained in Δ_Q = Δ(x_Q, r_Q).
    let mut q1: Option<CubeId> = None;
    let mut stack = vec![q];
    while let Some(c) = stack.pop() {
        let cc = grid.cube(c);
        let inside = cc.atom_ids().into_iter().all(|a| {
            crate::geom::dist(domain.atoms.pos[a as usize], cube.center) < cube.radius
        });
        if inside {
            match q1 {
                None => q1 = Some(c),
                Some(prev) => {
                    if cc.length > grid.cube(prev).length {
                        q1 = Some(c)
                    }
                }
            }
            continue;
        }
        stack.extend(cc.children.iter().copied());
    }
    let q1 = q1.ok_or_else(|| {
        Error::Resolution(format!("no subcube of {q} fits inside Δ_Q at this depth"))
    })?;
    let budget = m1.floor() as u32;
    let mut frontier = vec![q1];
    for _ in 0..=budget {
        for &c in &frontier {
            if !bad.contains(&c) {
                let c0p = c0 * grid.constants.c_ball * 0.5_f64.powi(budget as i32);
                return Ok((c, c0p));
            }
        }
        frontier = frontier
            .iter()
            .flat_map(|&c| grid.cube(c).children.iter().copied())
            .collect();
        if frontier.is_empty() {
            break;
        }
    }
    Err(Error::Contradiction(format!(
        "every cube within {budget} generations below {q1} is bad; packing input inconsistent"
    )))
}

#[cfg(test)]
mod tests;
