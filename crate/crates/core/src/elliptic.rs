//! Elliptic-measure estimates and the PDE-side numerical checks: lower
//! bounds near the pole, doubling, Green/measure comparability,
//! reverse-Hölder fits, interior gradient bounds, square-function Carleson
//! functionals, the boundary integration-by-parts identity, and the
//! half-plane Carleson estimate for bounded solutions.

use crate::boundary::Domain;
use crate::coeff::CoefficientField;
use crate::dyadic::{CubeId, DyadicGrid};
use crate::field::FieldSample;
use crate::geom::{dist, Pt, Rect};
use crate::regions::{RegionBuilder, SawtoothRegion};
use crate::solver::{pole_data, solve_dirichlet, Discretization};
use crate::{Error, Result};

/// Elliptic measure as mass per boundary atom, with optional normalization
/// record `(C0, σ(Q0))`.
#[derive(Clone, Debug)]
pub struct EllipticMeasureEstimate {
    pub pole: Pt,
    pub atom_mass: Vec<f64>,
    pub total: f64,
    pub normalization: Option<(f64, f64)>,
}

impl EllipticMeasureEstimate {
    pub fn from_atom_mass(pole: Pt, atom_mass: Vec<f64>) -> Self {
        let total = atom_mass.iter().sum();
        EllipticMeasureEstimate {
            pole,
            atom_mass,
            total,
            normalization: None,
        }
    }

    /// Build from an exact kernel density `k` (mass = k·weight per atom).
    pub fn from_density(domain: &Domain, pole: Pt, k: impl Fn(u32) -> f64) -> Self {
        let atom_mass: Vec<f64> = (0..domain.atoms.len() as u32)
            .map(|a| k(a) * domain.atoms.weight[a as usize])
            .collect();
        Self::from_atom_mass(pole, atom_mass)
    }

    pub fn cube_mass(&self, grid: &DyadicGrid, q: CubeId) -> f64 {
        grid.cube(q)
            .atom_ids()
            .into_iter()
            .map(|a| self.atom_mass[a as usize])
            .sum()
    }

    pub fn density(&self, grid: &DyadicGrid, q: CubeId) -> f64 {
        self.cube_mass(grid, q) / grid.cube(q).sigma
    }

    /// Mass of the surface ball `Δ(x, r)`.
    pub fn ball_mass(&self, domain: &Domain, x: Pt, r: f64) -> f64 {
        let mut m = 0.0;
        domain
            .atom_index()
            .for_each_within(&domain.atoms.pos, x, r, |a| {
                m += self.atom_mass[a as usize];
            });
        m
    }

    /// Normalize per the pole convention: `ω ← C0·σ(Q0)·ω` with
    /// `C0 = 1/ω(Q0)`, so `ω(Q0) = σ(Q0)`.
    pub fn normalize_at(&mut self, grid: &DyadicGrid, q0: CubeId) -> Result<f64> {
        let mass = self.cube_mass(grid, q0);
        if mass <= 0.0 {
            return Err(Error::Precondition(format!(
                "pole sees no mass on cube {q0}"
            )));
        }
        let c0 = 1.0 / mass;
        let sigma0 = grid.cube(q0).sigma;
        for m in self.atom_mass.iter_mut() {
            *m *= c0 * sigma0;
        }
        self.total *= c0 * sigma0;
        self.normalization = Some((c0, sigma0));
        Ok(c0)
    }
}

/// Solver-backed elliptic measure: one transpose solve at the pole.
pub fn elliptic_measure(
    domain: &Domain,
    disc: &Discretization,
    pole: Pt,
) -> Result<(EllipticMeasureEstimate, FieldSample)> {
    let pd = pole_data(domain, disc, pole)?;
    Ok((
        EllipticMeasureEstimate::from_atom_mass(pole, pd.atom_mass),
        pd.green,
    ))
}

/// Monte Carlo elliptic measure (Laplacian only).
pub fn elliptic_measure_wos(
    domain: &Domain,
    pole: Pt,
    n_walks: u32,
    seed: u64,
) -> Result<EllipticMeasureEstimate> {
    let (hist, _) = crate::wos::wos_measure(domain, pole, n_walks, seed, Default::default())?;
    Ok(EllipticMeasureEstimate::from_atom_mass(pole, hist))
}

#[derive(Clone, Copy, Debug)]
pub struct BourgainReport {
    /// `min_{Y ∈ B(x, c·r) ∩ Ω} ω^Y(Δ(x,r))`.
    pub min_mass: f64,
    pub implied_c: f64,
}

/// Lower bound on elliptic measure near its surface ball: one forward solve
/// with data `1_Δ`, then a scan over interior nodes of `B(x, c·r)`.
pub fn bourgain_check(
    domain: &Domain,
    coeff: &CoefficientField,
    window: Rect,
    h: f64,
    x: Pt,
    r: f64,
    c: f64,
) -> Result<BourgainReport> {
    let u = solve_dirichlet(domain, coeff, window, h, |p, _| {
        if dist(p, x) < r {
            1.0
        } else {
            0.0
        }
    })?;
    let mut min_mass = f64::INFINITY;
    for j in 0..u.geom.ny {
        for i in 0..u.geom.nx {
            let id = u.geom.idx(i, j);
            if !u.mask[id] {
                continue;
            }
            let p = u.geom.node(i, j);
            if dist(p, x) < c * r {
                min_mass = min_mass.min(u.values[id]);
            }
        }
    }
    if !min_mass.is_finite() {
        return Err(Error::Resolution(
            "no interior nodes inside the sample ball".into(),
        ));
    }
    Ok(BourgainReport {
        min_mass,
        implied_c: 1.0 / min_mass.max(1e-300),
    })
}

/// `ω^X(2Δ)/ω^X(Δ)` from a measure estimate.
pub fn doubling_check(est: &EllipticMeasureEstimate, domain: &Domain, x: Pt, r: f64) -> f64 {
    let m1 = est.ball_mass(domain, x, r);
    let m2 = est.ball_mass(domain, x, 2.0 * r);
    m2 / m1.max(1e-300)
}

/// CFMS comparison `r^{n−1}·G(X, X_Δ) / ω^X(Δ)`; in the plane `n − 1 = 0`.
pub fn cfms_check(
    est: &EllipticMeasureEstimate,
    green: &FieldSample,
    domain: &Domain,
    x: Pt,
    r: f64,
    x_delta: Pt,
) -> f64 {
    let g = green.interpolate(x_delta);
    let m = est.ball_mass(domain, x, r);
    g / m.max(1e-300)
}

#[derive(Clone, Debug)]
pub struct RhqReport {
    /// `max_Δ (⨏ k^q)^{1/q} / ⨏ k` over tested cubes.
    pub rh_max: f64,
    /// `max_Δ ∫_Δ k^q dσ · σ(Δ)^{q−1}`.
    pub hyp12_max: f64,
    /// Fitted `(C, s)` with `μ(A) ≤ C (σ(A)/σ(Δ))^s μ(Δ)` on density-sorted
    /// prefixes.
    pub ainf_fit: (f64, f64),
    /// Per-cube `(cube, rh_ratio, hyp12)`.
    pub per_delta: Vec<(CubeId, f64, f64)>,
}

/// Reverse-Hölder and higher-integrability functionals of the kernel
/// densities at the finest generation, tested over every coarser cube.
pub fn rhq_fit(
    domain: &Domain,
    grid: &DyadicGrid,
    est: &EllipticMeasureEstimate,
    q: f64,
    finest: u32,
) -> Result<RhqReport> {
    let _ = domain;
    if q <= 1.0 {
        return Err(Error::Parameter("need q > 1".into()));
    }
    if finest > grid.depth {
        return Err(Error::Resolution("finest generation beyond depth".into()));
    }
    let fine: Vec<CubeId> = grid.by_generation[finest as usize].clone();
    let dens: Vec<f64> = fine.iter().map(|&c| est.density(grid, c)).collect();
    let mut per_delta = Vec::new();
    let mut rh_max = 0.0f64;
    let mut hyp12_max = 0.0f64;
    let mut fit_pts: Vec<(f64, f64)> = Vec::new();
    for gen in 0..finest as usize {
        for &d_cube in &grid.by_generation[gen] {
            let members: Vec<usize> = fine
                .iter()
                .enumerate()
                .filter(|&(_, &c)| grid.is_descendant(c, d_cube))
                .map(|(i, _)| i)
                .collect();
            if members.is_empty() {
                continue;
            }
            let sigma_d = grid.cube(d_cube).sigma;
            let mut int_k = 0.0;
            let mut int_kq = 0.0;
            for &i in &members {
                let s = grid.cube(fine[i]).sigma;
                int_k += dens[i] * s;
                int_kq += dens[i].powf(q) * s;
            }
            let avg_k = int_k / sigma_d;
            let avg_kq = int_kq / sigma_d;
            let rh = avg_kq.powf(1.0 / q) / avg_k.max(1e-300);
            let hyp12 = int_kq * sigma_d.powf(q - 1.0);
            rh_max = rh_max.max(rh);
            hyp12_max = hyp12_max.max(hyp12);
            per_delta.push((d_cube, rh, hyp12));
            // Density-sorted prefixes feed the A∞ regression.
            let mut order = members.clone();
            order.sort_by(|&a, &b| dens[b].partial_cmp(&dens[a]).unwrap());
            let mu_d = int_k;
            let mut s_acc = 0.0;
            let mut m_acc = 0.0;
            for &i in order.iter() {
                let s = grid.cube(fine[i]).sigma;
                s_acc += s;
                m_acc += dens[i] * s;
                if s_acc < sigma_d * 0.999 && m_acc > 0.0 && mu_d > 0.0 {
                    fit_pts.push(((s_acc / sigma_d).ln(), (m_acc / mu_d).ln()));
                }
            }
        }
    }
    // Least squares log μ-ratio = log C + s·log σ-ratio.
    let ainf_fit = if fit_pts.len() >= 2 {
        let n = fit_pts.len() as f64;
        let mx = fit_pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = fit_pts.iter().map(|p| p.1).sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for &(x, y) in &fit_pts {
            num += (x - mx) * (y - my);
            den += (x - mx) * (x - mx);
        }
        let s = if den > 0.0 { num / den } else { 0.0 };
        // C as the max residual multiplier so the fit is an upper envelope.
        let c = fit_pts
            .iter()
            .map(|&(x, y)| (y - s * x).exp())
            .fold(0.0f64, f64::max);
        (c, s)
    } else {
        (1.0, 1.0)
    };
    Ok(RhqReport {
        rh_max,
        hyp12_max,
        ainf_fit,
        per_delta,
    })
}

/// `sup |∇u|·δ/u` over interior nodes with full gradient data.
pub fn gradient_bound_check(u: &FieldSample) -> f64 {
    let mut sup = 0.0f64;
    for j in 0..u.geom.ny {
        for i in 0..u.geom.nx {
            let id = u.geom.idx(i, j);
            if !u.mask[id] || u.values[id] <= 1e-12 {
                continue;
            }
            if let Some(g) = u.grad(i, j) {
                let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
                sup = sup.max(gn * u.delta[id] / u.values[id]);
            }
        }
    }
    sup
}

/// Caccioppoli ratio for second derivatives:
/// `ℓ(I)²·∬_I |∇²u|² / ∬_{2I} |∇u|²`; requires `6I ⊂ Ω` (checked on δ).
pub fn caccioppoli2_check(u: &FieldSample, ibox: &Rect) -> Result<f64> {
    let six = ibox.dilate(6.0);
    let mut num = 0.0;
    let mut den = 0.0;
    let two = ibox.dilate(2.0);
    for j in 0..u.geom.ny {
        for i in 0..u.geom.nx {
            let id = u.geom.idx(i, j);
            if !u.mask[id] {
                let p = u.geom.node(i, j);
                if six.contains(p) {
                    return Err(Error::Precondition("6I leaves the domain".into()));
                }
                continue;
            }
            let p = u.geom.node(i, j);
            let cell = u.geom.h * u.geom.h;
            if ibox.contains(p) {
                if let Some(hess) = u.hessian(i, j) {
                    let f2 = hess[0][0] * hess[0][0]
                        + 2.0 * hess[0][1] * hess[0][1]
                        + hess[1][1] * hess[1][1];
                    num += f2 * cell;
                }
            }
            if two.contains(p) {
                if let Some(g) = u.grad(i, j) {
                    den += (g[0] * g[0] + g[1] * g[1]) * cell;
                }
            }
        }
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(ibox.side() * ibox.side() * num / den)
}

#[derive(Clone, Debug)]
pub struct SquareFunctionReport {
    /// `Υ = ∬ |∇(A^⊤∇𝒢)|²·w dX` over the region.
    pub total: f64,
    /// Per-cube pieces `Υ_Q` over the region's cube set.
    pub per_cube: Vec<(CubeId, f64)>,
    /// `Υ / σ(root)`.
    pub ratio: f64,
}

/// Weight in the square function: boundary distance or a sampled field
/// (normalized Green functions).
pub enum SquareWeight<'a> {
    Delta,
    Field(&'a FieldSample),
}

/// The vector field `V = A^⊤ ∇𝒢` on grid nodes, componentwise.
pub fn flux_field(coeff: &CoefficientField, g: &FieldSample) -> (FieldSample, FieldSample) {
    let mut vx = g.clone();
    let mut vy = g.clone();
    for j in 0..g.geom.ny {
        for i in 0..g.geom.nx {
            let id = g.geom.idx(i, j);
            if !g.mask[id] {
                continue;
            }
            match g.grad(i, j) {
                Some(grad) => {
                    let a = coeff.at_transpose(g.geom.node(i, j));
                    vx.values[id] = a[0][0] * grad[0] + a[0][1] * grad[1];
                    vy.values[id] = a[1][0] * grad[0] + a[1][1] * grad[1];
                }
                None => {
                    vx.values[id] = f64::NAN;
                    vy.values[id] = f64::NAN;
                    vx.mask[id] = false;
                    vy.mask[id] = false;
                }
            }
        }
    }
    (vx, vy)
}

/// Square-function Carleson functional over a sawtooth region, integrated on
/// the field's grid nodes box by box. Stencils stay inside Whitney boxes by
/// the distance bracket, and the region must avoid the pole cell.
pub fn square_function_carleson(
    builder: &RegionBuilder,
    region: &SawtoothRegion,
    coeff: &CoefficientField,
    g: &FieldSample,
    weight: SquareWeight,
    pole: Pt,
) -> Result<SquareFunctionReport> {
    let (vx, vy) = flux_field(coeff, g);
    let h = g.geom.h;
    let cell = h * h;
    let mut per_cube = Vec::new();
    let mut total = 0.0;
    for &q in &region.cubes {
        let boxes = builder.w_star(q);
        let mut upsilon_q = 0.0;
        for &b in boxes {
            let r = &builder.whitney.boxes[b as usize].rect;
            if r.dist_to_point(pole) < 3.0 * h {
                return Err(Error::Precondition(
                    "region touches the pole cell".into(),
                ));
            }
            let i0 = ((r.lo[0] - g.geom.origin[0]) / h).ceil().max(0.0) as usize;
            let i1 = ((r.hi[0] - g.geom.origin[0]) / h).floor() as usize;
            let j0 = ((r.lo[1] - g.geom.origin[1]) / h).ceil().max(0.0) as usize;
            let j1 = ((r.hi[1] - g.geom.origin[1]) / h).floor() as usize;
            for i in i0..=i1.min(g.geom.nx - 1) {
                for j in j0..=j1.min(g.geom.ny - 1) {
                    let id = g.geom.idx(i, j);
                    if !g.mask[id] {
                        continue;
                    }
                    let (gx, gy) = match (vx.grad(i, j), vy.grad(i, j)) {
                        (Some(a), Some(b)) => (a, b),
                        _ => continue,
                    };
                    let frob2 = gx[0] * gx[0] + gx[1] * gx[1] + gy[0] * gy[0] + gy[1] * gy[1];
                    let w = match &weight {
                        SquareWeight::Delta => g.delta[id],
                        SquareWeight::Field(f) => {
                            let v = f.values[id];
                            if v.is_finite() {
                                v
                            } else {
                                continue;
                            }
                        }
                    };
                    upsilon_q += frob2 * w * cell;
                }
            }
        }
        total += upsilon_q;
        per_cube.push((q, upsilon_q));
    }
    let sigma_root = builder.grid.cube(region.root).sigma;
    Ok(SquareFunctionReport {
        total,
        per_cube,
        ratio: total / sigma_root,
    })
}

/// C² radial bump: 1 on `B(z, r/2)`, 0 off `B(z, r)`.
pub fn radial_bump(z: Pt, r: f64) -> impl Fn(Pt) -> f64 {
    move |x: Pt| crate::geom::smoothstep_c2((dist(x, z) / r - 0.5) * 2.0)
}

fn radial_bump_grad(z: Pt, r: f64, x: Pt) -> [f64; 2] {
    let d = dist(x, z);
    if d <= r * 0.5 || d >= r || d == 0.0 {
        return [0.0, 0.0];
    }
    let s = (d / r - 0.5) * 2.0;
    // d/ds of the quintic step.
    let ds = -(30.0 * s * s - 60.0 * s * s * s + 30.0 * s * s * s * s);
    let mult = ds * 2.0 / r / d;
    [mult * (x[0] - z[0]), mult * (x[1] - z[1])]
}

#[derive(Clone, Debug)]
pub struct IbpReport {
    /// `∫ Φ dω`.
    pub lhs: f64,
    /// `𝓘 = ∬_Ω (A^⊤∇𝒢 − β)·∇Φ`.
    pub i_term: f64,
    /// `𝓘𝓘 = ∬_{Ω_ext} β·∇Φ`.
    pub ii_term: f64,
    pub beta: [f64; 2],
    /// `|∫Φdω − (−𝓘 + 𝓘𝓘)|`.
    pub residual: f64,
    /// Per-σ(Q) scaling of the pieces, for the c0-size comparisons.
    pub sigma_q: f64,
    pub omega_density: f64,
}

/// The boundary integration-by-parts identity at a cube: with a bump Φ
/// adapted to `B(z_Q, r_Q/4)` and normalized `𝒢, ω`,
/// `∫Φ dω = −∬_Ω (A^⊤∇𝒢 − β)·∇Φ + ∬_{Ω_ext} β·∇Φ`,
/// where β is the flux average over `U_{Q,ε}`.
#[allow(clippy::too_many_arguments)]
pub fn ibp_identity_check(
    domain: &Domain,
    builder: &RegionBuilder,
    coeff: &CoefficientField,
    q: CubeId,
    est: &EllipticMeasureEstimate,
    g: &FieldSample,
    eps_log2: u32,
    z_q: Option<Pt>,
) -> Result<IbpReport> {
    let grid = builder.grid;
    let cube = grid.cube(q);
    let z = z_q.unwrap_or(cube.center);
    let r4 = cube.radius / 4.0;
    if domain.boundary_dist(z) > 1e-6 * domain.diam_boundary() {
        return Err(Error::Input("bump center must sit on the boundary".into()));
    }
    let phi = radial_bump(z, r4);
    // β: flux average over U_{Q,ε}.
    let (vx, vy) = flux_field(coeff, g);
    let u_eps = builder.u_q_eps(q, eps_log2)?;
    let nodes = u_eps.quad_nodes(builder.whitney, g.geom.h);
    let mut beta = [0.0, 0.0];
    let mut vol = 0.0;
    for &(p, a) in &nodes {
        let bx = vx.interpolate(p);
        let by = vy.interpolate(p);
        if bx.is_finite() && by.is_finite() {
            beta[0] += bx * a;
            beta[1] += by * a;
            vol += a;
        }
    }
    if vol == 0.0 {
        return Err(Error::Precondition("U_{Q,ε} misses the field grid".into()));
    }
    beta[0] /= vol;
    beta[1] /= vol;
    // LHS: ∫Φ dω over boundary atoms.
    let mut lhs = 0.0;
    for a in 0..domain.atoms.len() {
        let p = domain.atoms.pos[a];
        if dist(p, z) < r4 {
            lhs += phi(p) * est.atom_mass[a];
        }
    }
    // Volume terms over the grid nodes inside B(z, r4).
    let geom = g.geom;
    let h = geom.h;
    let cell = h * h;
    let mut i_term = 0.0;
    let mut ii_term = 0.0;
    let i0 = (((z[0] - r4) - geom.origin[0]) / h).floor().max(0.0) as usize;
    let i1 = (((z[0] + r4) - geom.origin[0]) / h).ceil() as usize;
    let j0 = (((z[1] - r4) - geom.origin[1]) / h).floor().max(0.0) as usize;
    let j1 = (((z[1] + r4) - geom.origin[1]) / h).ceil() as usize;
    for i in i0..=i1.min(geom.nx - 1) {
        for j in j0..=j1.min(geom.ny - 1) {
            let p = geom.node(i, j);
            if dist(p, z) >= r4 {
                continue;
            }
            let gphi = radial_bump_grad(z, r4, p);
            let id = geom.idx(i, j);
            if g.mask[id] {
                let fx = vx.values[id];
                let fy = vy.values[id];
                if fx.is_finite() && fy.is_finite() {
                    i_term += ((fx - beta[0]) * gphi[0] + (fy - beta[1]) * gphi[1]) * cell;
                }
            } else {
                let sd = domain.signed_dist(p);
                if sd > 0.0 {
                    // Interior without field data: zero-flux component (the
                    // far side of a two-sided proxy, where 𝒢 ≡ 0).
                    i_term += (-beta[0] * gphi[0] - beta[1] * gphi[1]) * cell;
                } else if sd < 0.0 {
                    ii_term += (beta[0] * gphi[0] + beta[1] * gphi[1]) * cell;
                }
            }
        }
    }
    let residual = (lhs - (-i_term + ii_term)).abs();
    Ok(IbpReport {
        lhs,
        i_term,
        ii_term,
        beta,
        residual,
        sigma_q: cube.sigma,
        omega_density: est.cube_mass(grid, q) / cube.sigma,
    })
}

#[derive(Clone, Debug)]
pub struct KpReport {
    /// `sup_Q (1/|Q|) ∬_{R_Q} |∇u|² t dx dt` over the ladder.
    pub sup: f64,
    /// `(ℓ(Q), value)` rows.
    pub ladder: Vec<(f64, f64)>,
    /// Carleson norms of `|∇A|² t` and `|B|² t` over the same ladder.
    pub mu_norm: f64,
    pub nu_norm: f64,
}

/// Half-plane Carleson functional of a bounded solution over a dyadic ladder
/// of boundary cubes centered at `x0`. Quadrature uses dyadic rows in `t` to
/// resolve the corner. The drift `B` vanishes for the normalized presets
/// (`a_22 ≡ 1`), but a caller-supplied bound is integrated when present.
pub fn kenig_pipher_carleson(
    grad_u: &dyn Fn(Pt) -> [f64; 2],
    sup_u: f64,
    coeff: &CoefficientField,
    drift: Option<&dyn Fn(Pt) -> [f64; 2]>,
    x0: f64,
    scales: &[f64],
    t_floor: f64,
) -> Result<KpReport> {
    if sup_u > 1.0 + 1e-9 {
        return Err(Error::Precondition(
            "solution must be normalized to ‖u‖∞ ≤ 1".into(),
        ));
    }
    let mut ladder = Vec::new();
    let mut sup = 0.0f64;
    let mut mu_norm = 0.0f64;
    let mut nu_norm = 0.0f64;
    for &ell in scales {
        let mut acc = 0.0;
        let mut mu = 0.0;
        let mut nu = 0.0;
        // Dyadic rows t ∈ [ℓ·2^{-j-1}, ℓ·2^{-j}], midpoints in x.
        let mut t_hi = ell;
        while t_hi > t_floor {
            let t_lo = (t_hi * 0.5).max(t_floor);
            let rows = 4usize;
            let cols = 64usize;
            let dt = (t_hi - t_lo) / rows as f64;
            let dx = ell / cols as f64;
            for rj in 0..rows {
                let t = t_lo + (rj as f64 + 0.5) * dt;
                for ci in 0..cols {
                    let x = x0 - ell / 2.0 + (ci as f64 + 0.5) * dx;
                    let p = [x, t, 0.0];
                    let gu = grad_u(p);
                    acc += (gu[0] * gu[0] + gu[1] * gu[1]) * t * dx * dt;
                    let ga = coeff.grad_norm(p, t * 0.01);
                    mu += ga * ga * t * dx * dt;
                    if let Some(b) = drift {
                        let bv = b(p);
                        nu += (bv[0] * bv[0] + bv[1] * bv[1]) * t * dx * dt;
                    }
                }
            }
            t_hi = t_lo;
        }
        let val = acc / ell;
        sup = sup.max(val);
        mu_norm = mu_norm.max(mu / ell);
        nu_norm = nu_norm.max(nu / ell);
        ladder.push((ell, val));
    }
    Ok(KpReport {
        sup,
        ladder,
        mu_norm,
        nu_norm,
    })
}

/// Hypothesis-style coefficient checks: `sup |∇A|·δ` over probes and the
/// boundary-ball Carleson content of `|∇A|`.
pub fn coefficient_hypothesis(
    domain: &Domain,
    coeff: &CoefficientField,
    window: Rect,
    h: f64,
) -> (f64, f64) {
    let mut sup_grad_delta = 0.0f64;
    let nx = ((window.hi[0] - window.lo[0]) / h) as usize;
    let ny = ((window.hi[1] - window.lo[1]) / h) as usize;
    for j in 0..ny {
        for i in 0..nx {
            let p = [
                window.lo[0] + (i as f64 + 0.5) * h,
                window.lo[1] + (j as f64 + 0.5) * h,
                0.0,
            ];
            let sd = domain.signed_dist(p);
            if sd > 0.0 {
                sup_grad_delta = sup_grad_delta.max(coeff.grad_norm(p, sd * 0.01) * sd);
            }
        }
    }
    // Carleson content over boundary balls at a few scales/centers.
    let centers = domain.sample_boundary(32);
    let mut car = 0.0f64;
    for &c in &centers {
        for k in 1..=4 {
            let r = domain.diam_boundary() * 0.5_f64.powi(k + 1);
            let mut int = 0.0;
            let steps = 24;
            let cell = 2.0 * r / steps as f64;
            for i in 0..steps {
                for j in 0..steps {
                    let p = [
                        c[0] - r + (i as f64 + 0.5) * cell,
                        c[1] - r + (j as f64 + 0.5) * cell,
                        0.0,
                    ];
                    if dist(p, c) < r && domain.signed_dist(p) > 0.0 {
                        int += coeff.grad_norm(p, cell * 0.1) * cell * cell;
                    }
                }
            }
            let sigma = domain.surface_measure(c, r).max(1e-300);
            car = car.max(int / sigma);
        }
    }
    (sup_grad_delta, car)
}

#[cfg(test)]
mod tests;
