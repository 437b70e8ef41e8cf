//! Geometric condition probes: interior and exterior corkscrew searches,
//! Harnack chains through the Whitney graph, and the resulting domain
//! classification.
//!
//! "Failure" here is always a statement about one (constant, scale) pair on
//! the discrete search grid, never about the continuum object.

use crate::boundary::Domain;
use crate::dyadic::{CubeId, DyadicGrid};
use crate::geom::{dist, Pt};
use crate::rng::Rng;
use crate::whitney::WhitneyDecomposition;
use crate::{Error, Result};

/// Interior corkscrew witness for `Δ(x, r)`.
#[derive(Clone, Copy, Debug)]
pub struct CorkscrewWitness {
    /// Ball center `X_Δ`.
    pub center: Pt,
    /// Achieved radius `c·r`.
    pub radius: f64,
    /// The constant `c ∈ (0, 1]`.
    pub constant: f64,
    pub target_center: Pt,
    pub target_radius: f64,
}

/// Exterior witness for the `c0`-exterior corkscrew test on a cube.
#[derive(Clone, Copy, Debug)]
pub struct ExteriorWitness {
    pub z: Pt,
    pub center: Pt,
    /// Largest exterior ball radius achieved, in units of ℓ(Q).
    pub c_achieved: f64,
}

#[derive(Clone, Debug)]
pub struct ExteriorCheck {
    pub cube: CubeId,
    pub c0: f64,
    pub pass: bool,
    pub witness: Option<ExteriorWitness>,
}

/// Maximize `min(δ(X), r − |X − x|)` over a full grid of pitch `r/steps`
/// inside `B(x, r)`, restricted by a sign predicate on δ.
fn grid_max(
    domain: &Domain,
    x: Pt,
    r: f64,
    steps: i32,
    exterior: bool,
) -> Option<(Pt, f64)> {
    let mut best: Option<(Pt, f64)> = None;
    for i in -steps..=steps {
        for j in -steps..=steps {
            let p = [
                x[0] + i as f64 * r / steps as f64,
                x[1] + j as f64 * r / steps as f64,
                0.0,
            ];
            let off = dist(p, x);
            if off >= r {
                continue;
            }
            let sd = domain.signed_dist(p);
            let depth = if exterior { -sd } else { sd };
            if depth <= 0.0 {
                continue;
            }
            let value = depth.min(r - off);
            if best.map(|(_, b)| value > b).unwrap_or(true) {
                best = Some((p, value));
            }
        }
    }
    best
}

/// Interior corkscrew search over a grid of pitch `r/64` in `B(x, r)`.
/// Absence (no witness with `c ≥ 1/128`) is a value, not an error.
pub fn find_corkscrew(domain: &Domain, x: Pt, r: f64) -> Result<Option<CorkscrewWitness>> {
    if !(r > 0.0 && r < domain.diam_boundary()) {
        return Err(Error::Range(format!("corkscrew radius {r} out of range")));
    }
    let best = grid_max(domain, x, r, 64, false);
    Ok(best.and_then(|(center, value)| {
        let constant = value / r;
        if constant < 1.0 / 128.0 {
            None
        } else {
            Some(CorkscrewWitness {
                center,
                radius: value,
                constant,
                target_center: x,
                target_radius: r,
            })
        }
    }))
}

/// Rejection-sampling re-verification of a witness ball: every sample must
/// land in `B(x, r) ∩ Ω`, and the center must clear the claimed margin.
pub fn verify_witness(domain: &Domain, w: &CorkscrewWitness, samples: u32, seed: u64) -> bool {
    if domain.signed_dist(w.center) < w.radius * (1.0 - 1e-9) {
        return false;
    }
    let mut rng = Rng::stream(seed, 0xC0);
    for _ in 0..samples {
        let dir = rng.unit_circle();
        let rho = w.radius * rng.uniform().sqrt();
        let p = [
            w.center[0] + rho * dir[0],
            w.center[1] + rho * dir[1],
            0.0,
        ];
        if !domain.is_inside(p) || dist(p, w.target_center) >= w.target_radius * (1.0 + 1e-12) {
            return false;
        }
    }
    true
}

/// `c0`-exterior corkscrew test on a cube: look for `z ∈ Δ_Q` and an exterior
/// ball of radius `c0·ℓ(Q)` inside `B(z, r_Q/4) ∖ Ω̄`. Search over ≥ 64
/// boundary samples of `Δ_Q` and a two-stage grid per sample.
pub fn exterior_corkscrew_check(
    domain: &Domain,
    grid: &DyadicGrid,
    q: CubeId,
    c0: f64,
) -> ExteriorCheck {
    let cube = grid.cube(q);
    let r4 = cube.radius / 4.0;
    let mut samples: Vec<Pt> = Vec::new();
    domain
        .atom_index()
        .for_each_within(&domain.atoms.pos, cube.center, cube.radius, |id| {
            samples.push(domain.atoms.pos[id as usize]);
        });
    let stride = (samples.len() / 64).max(1);
    let mut best: Option<ExteriorWitness> = None;
    for z in samples.iter().step_by(stride) {
        if let Some((p, value)) = grid_max(domain, *z, r4, 16, true) {
            // Refine around the coarse optimum at effective pitch r4/128.
            let refined = grid_max_window(domain, *z, r4, p, r4 / 8.0, 16, true)
                .unwrap_or((p, value));
            let c = refined.1 / cube.length;
            if best.map(|b| c > b.c_achieved).unwrap_or(true) {
                best = Some(ExteriorWitness {
                    z: *z,
                    center: refined.0,
                    c_achieved: c,
                });
            }
        }
    }
    let pass = best.map(|b| b.c_achieved >= c0).unwrap_or(false);
    ExteriorCheck {
        cube: q,
        c0,
        pass,
        witness: best,
    }
}

/// Windowed refinement for `grid_max`: same objective, grid of pitch
/// `half/steps` centered at `p`, constraint ball still `B(x, r)`.
fn grid_max_window(
    domain: &Domain,
    x: Pt,
    r: f64,
    p: Pt,
    half: f64,
    steps: i32,
    exterior: bool,
) -> Option<(Pt, f64)> {
    let mut best: Option<(Pt, f64)> = None;
    for i in -steps..=steps {
        for j in -steps..=steps {
            let cand = [
                p[0] + i as f64 * half / steps as f64,
                p[1] + j as f64 * half / steps as f64,
                0.0,
            ];
            let off = dist(cand, x);
            if off >= r {
                continue;
            }
            let sd = domain.signed_dist(cand);
            let depth = if exterior { -sd } else { sd };
            if depth <= 0.0 {
                continue;
            }
            let value = depth.min(r - off);
            if best.map(|(_, b)| value > b).unwrap_or(true) {
                best = Some((cand, value));
            }
        }
    }
    best
}

/// `B(c0)`: cubes failing the exterior corkscrew test. Monotone in `c0`.
pub fn bad_cubes(domain: &Domain, grid: &DyadicGrid, c0: f64) -> Vec<CubeId> {
    (0..grid.len())
        .filter(|&q| grid.cube(q).generation > 0 || grid.cube(q).component != u32::MAX)
        .filter(|&q| !exterior_corkscrew_check(domain, grid, q, c0).pass)
        .collect()
}

/// A Harnack chain: overlapping interior balls with distance ≈ diameter.
#[derive(Clone, Debug)]
pub struct HarnackChain {
    /// `(center, radius)` per ball, endpoints included.
    pub balls: Vec<(Pt, f64)>,
    pub n: usize,
    /// `Λ = |X − X'| / min(δ(X), δ(X'))`.
    pub lambda: f64,
    /// Measured sandwich constant: balls satisfy
    /// `C⁻¹·diam(B) ≤ dist(B, ∂Ω) ≤ C·diam(B)`.
    pub c_sandwich: f64,
}

/// Chain `X` to `X'` through the Whitney adjacency graph. Balls are
/// `B(X(I), δ(X(I))/2)` along the BFS path, greedily sparsified.
pub fn harnack_chain(
    domain: &Domain,
    whitney: &WhitneyDecomposition,
    x: Pt,
    x2: Pt,
) -> Result<Option<HarnackChain>> {
    let dx = domain.signed_dist(x);
    let dx2 = domain.signed_dist(x2);
    if dx <= 0.0 || dx2 <= 0.0 {
        return Err(Error::Precondition(
            "harnack chain endpoints must be interior".into(),
        ));
    }
    let lambda = dist(x, x2) / dx.min(dx2);
    if dist(x, x2) < dx.min(dx2) * 1e-12 {
        let chain = vec![(x, dx / 2.0)];
        return Ok(Some(HarnackChain {
            balls: chain,
            n: 1,
            lambda: lambda.max(1.0),
            c_sandwich: 2.0,
        }));
    }
    let (Some(b0), Some(b1)) = (whitney.locate(x), whitney.locate(x2)) else {
        return Ok(None);
    };
    // BFS shortest box path.
    let mut parent: crate::fasthash::U64Map<u32> = Default::default();
    parent.insert(b0 as u64, b0);
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(b0);
    let mut found = b0 == b1;
    while let Some(b) = queue.pop_front() {
        if b == b1 {
            found = true;
            break;
        }
        for &n in &whitney.adjacency[b as usize] {
            if !parent.contains_key(&(n as u64)) {
                parent.insert(n as u64, b);
                queue.push_back(n);
            }
        }
    }
    if !found {
        return Ok(None);
    }
    let mut path = vec![b1];
    while *path.last().unwrap() != b0 {
        let prev = parent[&(*path.last().unwrap() as u64)];
        path.push(prev);
    }
    path.reverse();
    // Balls along the path plus endpoint balls.
    let mut balls: Vec<(Pt, f64)> = Vec::with_capacity(path.len() + 2);
    balls.push((x, dx / 2.0));
    for &b in &path {
        let c = whitney.boxes[b as usize].center();
        let d = domain.signed_dist(c);
        balls.push((c, d / 2.0));
    }
    balls.push((x2, dx2 / 2.0));
    // Greedy sparsification: hop to the farthest later overlapping ball.
    let overlaps =
        |a: &(Pt, f64), b: &(Pt, f64)| dist(a.0, b.0) < a.1 + b.1;
    let mut kept = vec![balls[0]];
    let mut i = 0;
    while i + 1 < balls.len() {
        let mut j = balls.len() - 1;
        while j > i && !overlaps(&balls[i], &balls[j]) {
            j -= 1;
        }
        if j == i {
            return Ok(None); // chain broken; should not happen on a path
        }
        kept.push(balls[j]);
        i = j;
    }
    let mut c_sandwich = 1.0f64;
    for &(c, r) in &kept {
        let gap = domain.signed_dist(c) - r; // dist(B, ∂Ω)
        let diam = 2.0 * r;
        if gap > 0.0 {
            c_sandwich = c_sandwich.max(diam / gap).max(gap / diam);
        }
    }
    Ok(Some(HarnackChain {
        n: kept.len(),
        balls: kept,
        lambda: lambda.max(1.0),
        c_sandwich,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Cad,
    OneSidedCad,
    Neither,
}

#[derive(Clone, Debug)]
pub struct ClassifyReport {
    /// Worst interior corkscrew constant over the tested scales.
    pub corkscrew_c: f64,
    /// `(Λ, N)` samples from Harnack chaining.
    pub harnack_table: Vec<(f64, usize)>,
    /// Affine fit `N ≈ a + b·log2(Λ)`.
    pub harnack_fit: (f64, f64),
    pub interior_ok: bool,
    pub harnack_ok: bool,
    pub exterior_ok: bool,
    /// Scales (generations) at which some cube fails the exterior test.
    pub exterior_failures: Vec<u32>,
    pub verdict: Verdict,
}

/// Classify the domain from corkscrew scans, Harnack chains and per-cube
/// exterior tests across the grid's scale ladder.
pub fn classify(
    domain: &Domain,
    grid: &DyadicGrid,
    whitney: &WhitneyDecomposition,
    c0: f64,
    max_gen: u32,
) -> Result<ClassifyReport> {
    // Interior corkscrews on stratified boundary points across scales.
    let centers = domain.sample_boundary(16);
    let mut corkscrew_c: f64 = 1.0;
    let mut interior_ok = true;
    for k in 1..=max_gen.min(grid.depth) {
        let r = grid.scale * 0.5_f64.powi(k as i32);
        for &x in &centers {
            match find_corkscrew(domain, x, r)? {
                Some(w) => corkscrew_c = corkscrew_c.min(w.constant),
                None => interior_ok = false,
            }
        }
    }
    // Harnack chains between corkscrew points at assorted separations.
    let mut harnack_table = Vec::new();
    let mut harnack_ok = true;
    let probes: Vec<(Pt, Pt)> = {
        let mut out = Vec::new();
        let n = centers.len();
        for i in 0..n {
            let x = centers[i];
            let y = centers[(i + n / 3) % n];
            let r = grid.scale * 0.25;
            if let (Ok(Some(a)), Ok(Some(b))) =
                (find_corkscrew(domain, x, r), find_corkscrew(domain, y, r))
            {
                out.push((a.center, b.center));
            }
        }
        out
    };
    for (a, b) in probes {
        match harnack_chain(domain, whitney, a, b)? {
            Some(chain) => harnack_table.push((chain.lambda, chain.n)),
            None => harnack_ok = false,
        }
    }
    let harnack_fit = fit_affine_log(&harnack_table);
    // Exterior corkscrews per cube per generation.
    let mut exterior_failures = Vec::new();
    for k in 1..=max_gen.min(grid.depth) {
        let mut ok = true;
        for &q in &grid.by_generation[k as usize] {
            if !exterior_corkscrew_check(domain, grid, q, c0).pass {
                ok = false;
                break;
            }
        }
        if !ok {
            exterior_failures.push(k);
        }
    }
    let exterior_ok = exterior_failures.is_empty();
    let verdict = if interior_ok && harnack_ok && exterior_ok {
        Verdict::Cad
    } else if interior_ok && harnack_ok {
        Verdict::OneSidedCad
    } else {
        Verdict::Neither
    };
    Ok(ClassifyReport {
        corkscrew_c,
        harnack_table,
        harnack_fit,
        interior_ok,
        harnack_ok,
        exterior_ok,
        exterior_failures,
        verdict,
    })
}

fn fit_affine_log(table: &[(f64, usize)]) -> (f64, f64) {
    if table.len() < 2 {
        return (table.first().map(|&(_, n)| n as f64).unwrap_or(0.0), 0.0);
    }
    let xs: Vec<f64> = table.iter().map(|&(l, _)| l.max(1.0).log2()).collect();
    let ys: Vec<f64> = table.iter().map(|&(_, n)| n as f64).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..xs.len() {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    if den == 0.0 {
        return (my, 0.0);
    }
    let b = num / den;
    (my - b * mx, b)
}

/// Witness report rows: `cube id, c0, pass, c_achieved, witness x, witness y`.
pub fn witness_csv(checks: &[ExteriorCheck]) -> String {
    let mut out = String::from("cube,c0,pass,c_achieved,x,y\n");
    for c in checks {
        let (ca, x, y) = c
            .witness
            .map(|w| (w.c_achieved, w.center[0], w.center[1]))
            .unwrap_or((0.0, f64::NAN, f64::NAN));
        out.push_str(&format!(
            "{},{},{},{:.6e},{:.6e},{:.6e}\n",
            c.cube, c.c0, c.pass, ca, x, y
        ));
    }
    out
}
