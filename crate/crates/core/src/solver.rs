//! Finite-difference Dirichlet solver for `−div(A∇u)` in conservative form.
//!
//! Uniform interior grids, face-flux discretization (5-point for diagonal
//! coefficients, 9-point with cross terms), ghost values imposed by
//! projection to the nearest boundary point. The assembled operator rows are
//! the discrete `−div(A∇·)` at interior nodes, so solver residuals read
//! directly in PDE units. One transpose solve per pole yields both the
//! discrete harmonic-measure vector (mass per boundary atom) and the Green
//! function with that pole.

use crate::boundary::Domain;
use crate::coeff::CoefficientField;
use crate::field::{FieldSample, GridGeom};
use crate::geom::{Pt, Rect};
use crate::{Error, Result};

/// Compressed sparse rows.
pub struct Csr {
    pub row_ptr: Vec<u32>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
    pub n: usize,
}

impl Csr {
    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r] as usize..self.row_ptr[r + 1] as usize {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            out[r] = acc;
        }
    }

    pub fn transpose(&self) -> Csr {
        let mut counts = vec![0u32; self.n + 1];
        for &c in &self.cols {
            counts[c as usize + 1] += 1;
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let mut row_ptr = counts.clone();
        let mut cols = vec![0u32; self.cols.len()];
        let mut vals = vec![0.0; self.vals.len()];
        for r in 0..self.n {
            for k in self.row_ptr[r] as usize..self.row_ptr[r + 1] as usize {
                let c = self.cols[k] as usize;
                let slot = row_ptr[c] as usize;
                cols[slot] = r as u32;
                vals[slot] = self.vals[k];
                row_ptr[c] += 1;
            }
        }
        Csr {
            row_ptr: counts,
            cols,
            vals,
            n: self.n,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for r in 0..self.n {
            for k in self.row_ptr[r] as usize..self.row_ptr[r + 1] as usize {
                if self.cols[k] as usize == r {
                    d[r] = self.vals[k];
                }
            }
        }
        d
    }
}

/// A ghost coupling: interior row `row` references a node outside the mask
/// whose Dirichlet value is taken at `point` (the nearest boundary point).
#[derive(Clone, Copy, Debug)]
pub struct GhostEntry {
    pub row: u32,
    pub coeff: f64,
    pub point: Pt,
    pub atom: u32,
}

pub struct Discretization {
    pub geom: GridGeom,
    /// Interior unknown -> grid node index.
    pub interior: Vec<u32>,
    /// Grid node index -> unknown id (u32::MAX outside).
    pub unknown_of: Vec<u32>,
    pub matrix: Csr,
    pub ghosts: Vec<GhostEntry>,
    pub delta: Vec<f64>,
    pub symmetric: bool,
}

/// Assemble the operator for a window of pitch `h` over the domain.
pub fn discretize(
    domain: &Domain,
    coeff: &CoefficientField,
    window: Rect,
    h: f64,
) -> Result<Discretization> {
    let nx = ((window.hi[0] - window.lo[0]) / h).round() as usize + 1;
    let ny = ((window.hi[1] - window.lo[1]) / h).round() as usize + 1;
    if nx < 3 || ny < 3 {
        return Err(Error::Resolution("window too small for the pitch".into()));
    }
    let geom = GridGeom {
        origin: [window.lo[0], window.lo[1]],
        h,
        nx,
        ny,
    };
    let mut unknown_of = vec![u32::MAX; geom.len()];
    let mut interior = Vec::new();
    let mut delta = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let p = geom.node(i, j);
            let sd = domain.signed_dist(p);
            if sd > 0.0 {
                unknown_of[geom.idx(i, j)] = interior.len() as u32;
                interior.push(geom.idx(i, j) as u32);
                delta.push(sd);
            }
        }
    }
    if interior.is_empty() {
        return Err(Error::Resolution("no interior nodes in the window".into()));
    }

    // Probe whether cross terms vanish on a few points; drives the stencil.
    let has_cross = {
        let mut cross = false;
        for t in 0..8 {
            let p = [
                window.lo[0] + (t as f64 + 0.5) / 8.0 * (window.hi[0] - window.lo[0]),
                window.lo[1] + (t as f64 + 0.37) / 8.0 * (window.hi[1] - window.lo[1]),
                0.0,
            ];
            let a = coeff.at(p);
            if a[0][1].abs() > 1e-14 || a[1][0].abs() > 1e-14 {
                cross = true;
                break;
            }
        }
        cross
    };

    let n = interior.len();
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::with_capacity(9); n];
    let mut ghosts: Vec<GhostEntry> = Vec::new();
    let inv_h2 = 1.0 / (h * h);

    let mut ghost_cache: crate::fasthash::U64Map<(Pt, u32)> = Default::default();
    let mut ghost_point = |gid: usize, geom: &GridGeom| -> (Pt, u32) {
        *ghost_cache.entry(gid as u64).or_insert_with(|| {
            let p = geom.node(gid % geom.nx, gid / geom.nx);
            let c = domain.closest_boundary(p);
            let range = domain.facet_atom_range(c.facet);
            let mut atom = range.start;
            let mut best = f64::INFINITY;
            for a in range {
                let d = crate::geom::dist(domain.atoms.pos[a as usize], c.point);
                if d < best {
                    best = d;
                    atom = a;
                }
            }
            (c.point, atom)
        })
    };

    for (row, &gid) in interior.iter().enumerate() {
        let i = (gid as usize % nx) as i64;
        let j = (gid as usize / nx) as i64;
        let node = geom.node(i as usize, j as usize);
        // Face coefficients.
        let a_e = coeff.at([node[0] + 0.5 * h, node[1], 0.0]);
        let a_w = coeff.at([node[0] - 0.5 * h, node[1], 0.0]);
        let a_n = coeff.at([node[0], node[1] + 0.5 * h, 0.0]);
        let a_s = coeff.at([node[0], node[1] - 0.5 * h, 0.0]);

        // Stencil accumulation: (di, dj) -> coefficient of u[i+di, j+dj]
        // in −div(A∇u) ≈ −(F_E − F_W + F_N − F_S)/h.
        let mut acc: Vec<((i64, i64), f64)> = Vec::with_capacity(9);
        let mut add = |off: (i64, i64), c: f64| {
            if c != 0.0 {
                acc.push((off, c));
            }
        };
        // Normal-flux parts (5-point core).
        add((1, 0), -a_e[0][0] * inv_h2);
        add((0, 0), (a_e[0][0] + a_w[0][0] + a_n[1][1] + a_s[1][1]) * inv_h2);
        add((-1, 0), -a_w[0][0] * inv_h2);
        add((0, 1), -a_n[1][1] * inv_h2);
        add((0, -1), -a_s[1][1] * inv_h2);
        if has_cross {
            // Tangential parts: a12·u_y on x-faces, a21·u_x on y-faces,
            // averaged over the face's two adjacent columns/rows.
            let q = 0.25 * inv_h2;
            // −F_E tangential: −a12_E (u[i,j+1]+u[i+1,j+1]−u[i,j−1]−u[i+1,j−1])/(4h²)
            for (s, a, di) in [(-1.0, a_e[0][1], 1i64), (1.0, a_w[0][1], -1i64)] {
                add((0, 1), s * a * q);
                add((di, 1), s * a * q);
                add((0, -1), -s * a * q);
                add((di, -1), -s * a * q);
            }
            for (s, a, dj) in [(-1.0, a_n[1][0], 1i64), (1.0, a_s[1][0], -1i64)] {
                add((1, 0), s * a * q);
                add((1, dj), s * a * q);
                add((-1, 0), -s * a * q);
                add((-1, dj), -s * a * q);
            }
        }
        // Merge duplicate offsets.
        acc.sort_by_key(|&((di, dj), _)| (dj, di));
        let mut merged: Vec<((i64, i64), f64)> = Vec::with_capacity(acc.len());
        for (off, c) in acc {
            if let Some(last) = merged.last_mut() {
                if last.0 == off {
                    last.1 += c;
                    continue;
                }
            }
            merged.push((off, c));
        }
        for ((di, dj), c) in merged {
            let (ni, nj) = (i + di, j + dj);
            let inb = ni >= 0 && nj >= 0 && ni < nx as i64 && nj < ny as i64;
            let ngid = if inb {
                geom.idx(ni as usize, nj as usize)
            } else {
                usize::MAX
            };
            let unk = if inb { unknown_of[ngid] } else { u32::MAX };
            if unk != u32::MAX {
                rows[row].push((unk, c));
            } else {
                // Ghost: Dirichlet value at the projection of the node
                // (clamped to the window edge for out-of-window neighbours).
                let gi = ni.clamp(0, nx as i64 - 1) as usize;
                let gj = nj.clamp(0, ny as i64 - 1) as usize;
                let (point, atom) = ghost_point(geom.idx(gi, gj), &geom);
                ghosts.push(GhostEntry {
                    row: row as u32,
                    coeff: c,
                    point,
                    atom,
                });
            }
        }
    }

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0u32);
    for r in 0..n {
        rows[r].sort_by_key(|&(c, _)| c);
        for &(c, v) in &rows[r] {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len() as u32);
    }
    Ok(Discretization {
        geom,
        interior,
        unknown_of,
        matrix: Csr {
            row_ptr,
            cols,
            vals,
            n,
        },
        ghosts,
        delta,
        symmetric: coeff.symmetric && !has_cross,
    })
}

impl Discretization {
    /// Dirichlet right-hand side from boundary data `g`.
    pub fn rhs_from_boundary(&self, g: impl Fn(Pt, u32) -> f64) -> Vec<f64> {
        let mut b = vec![0.0; self.matrix.n];
        for gh in &self.ghosts {
            b[gh.row as usize] -= gh.coeff * g(gh.point, gh.atom);
        }
        b
    }

    /// Point-mass right-hand side `δ_{X0}` (unit mass in the pole cell).
    pub fn rhs_point_mass(&self, pole: Pt) -> Result<(Vec<f64>, usize)> {
        let (i, j) = self
            .geom
            .locate(pole)
            .ok_or_else(|| Error::Precondition("pole outside the grid".into()))?;
        let unk = self.unknown_of[self.geom.idx(i, j)];
        if unk == u32::MAX {
            return Err(Error::Precondition("pole cell is not interior".into()));
        }
        let mut b = vec![0.0; self.matrix.n];
        b[unk as usize] = 1.0 / (self.geom.h * self.geom.h);
        Ok((b, unk as usize))
    }

    /// Interior solution vector -> field on the grid.
    pub fn to_field(&self, u: &[f64]) -> FieldSample {
        let mut values = vec![f64::NAN; self.geom.len()];
        let mut mask = vec![false; self.geom.len()];
        let mut delta = vec![0.0; self.geom.len()];
        for (k, &gid) in self.interior.iter().enumerate() {
            values[gid as usize] = u[k];
            mask[gid as usize] = true;
            delta[gid as usize] = self.delta[k];
        }
        FieldSample {
            geom: self.geom,
            values,
            mask,
            delta,
        }
    }

    pub fn max_residual(&self, u: &[f64], b: &[f64]) -> f64 {
        let mut r = vec![0.0; self.matrix.n];
        self.matrix.mul(u, &mut r);
        r.iter()
            .zip(b)
            .map(|(a, bb)| (a - bb).abs())
            .fold(0.0, f64::max)
    }
}

/// Jacobi-preconditioned conjugate gradient.
pub fn solve_cg(a: &Csr, b: &[f64], tol_inf: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n;
    let d = a.diagonal();
    let minv: Vec<f64> = d.iter().map(|&x| 1.0 / x.max(1e-300)).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&minv).map(|(ri, mi)| ri * mi).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        a.mul(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap.abs() < 1e-300 {
            break;
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        if it % 8 == 0 {
            let rmax = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if rmax < tol_inf {
                return Ok(x);
            }
        }
        for k in 0..n {
            z[k] = r[k] * minv[k];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    let rmax = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if rmax < tol_inf {
        Ok(x)
    } else {
        Err(Error::Solver(format!(
            "cg stalled: residual {rmax:.3e} after {max_iter} iterations"
        )))
    }
}

/// Jacobi-preconditioned BiCGSTAB for the non-symmetric stencils.
pub fn solve_bicgstab(a: &Csr, b: &[f64], tol_inf: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n;
    let d = a.diagonal();
    let minv: Vec<f64> = d.iter().map(|&x| 1.0 / x.max(1e-300)).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 0..max_iter {
        let rho_new: f64 = r0.iter().zip(&r).map(|(a, b)| a * b).sum();
        if rho_new.abs() < 1e-300 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        for k in 0..n {
            phat[k] = p[k] * minv[k];
        }
        a.mul(&phat, &mut v);
        let r0v: f64 = r0.iter().zip(&v).map(|(a, b)| a * b).sum();
        alpha = rho / r0v;
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        for k in 0..n {
            shat[k] = s[k] * minv[k];
        }
        a.mul(&shat, &mut t);
        let tt: f64 = t.iter().map(|a| a * a).sum();
        let ts: f64 = t.iter().zip(&s).map(|(a, b)| a * b).sum();
        omega = if tt > 0.0 { ts / tt } else { 0.0 };
        for k in 0..n {
            x[k] += alpha * phat[k] + omega * shat[k];
            r[k] = s[k] - omega * t[k];
        }
        if it % 4 == 0 {
            let rmax = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if rmax < tol_inf {
                return Ok(x);
            }
        }
        if omega.abs() < 1e-300 {
            break;
        }
    }
    let rmax = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if rmax < tol_inf {
        Ok(x)
    } else {
        Err(Error::Solver(format!(
            "bicgstab stalled: residual {rmax:.3e} after {max_iter} iterations"
        )))
    }
}

fn solve_linear(a: &Csr, symmetric: bool, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let max_iter = 40 * (a.n as f64).sqrt() as usize + 4000;
    if symmetric {
        solve_cg(a, b, tol, max_iter)
    } else {
        solve_bicgstab(a, b, tol, max_iter)
    }
}

/// Solve the Dirichlet problem `−div(A∇u) = 0`, `u = g` on ∂Ω.
pub fn solve_dirichlet(
    domain: &Domain,
    coeff: &CoefficientField,
    window: Rect,
    h: f64,
    g: impl Fn(Pt, u32) -> f64,
) -> Result<FieldSample> {
    let disc = discretize(domain, coeff, window, h)?;
    let b = disc.rhs_from_boundary(&g);
    let u = solve_linear(&disc.matrix, disc.symmetric, &b, 1e-8)?;
    debug_assert!(disc.max_residual(&u, &b) < 1e-8);
    Ok(disc.to_field(&u))
}

/// Everything one transpose solve at a pole buys: the discrete
/// harmonic-measure masses per boundary atom and the Green function
/// `G_L(pole, ·)` as a field.
pub struct PoleData {
    pub pole: Pt,
    /// ω^pole mass per boundary atom (length = #atoms).
    pub atom_mass: Vec<f64>,
    /// `G_L(pole, Y)`.
    pub green: FieldSample,
    pub total_mass: f64,
}

/// Transpose solve at `pole` on a prepared discretization of `L` (so the
/// result describes `ω_L` and `G_L(pole, ·)`).
pub fn pole_data(domain: &Domain, disc: &Discretization, pole: Pt) -> Result<PoleData> {
    let at = disc.matrix.transpose();
    let (mut b, _) = disc.rhs_point_mass(pole)?;
    // v solves Aᵀ v = e_pole (unscaled); masses are linear in v, the Green
    // function carries the 1/h² of the δ-mass.
    let h2 = disc.geom.h * disc.geom.h;
    for bv in b.iter_mut() {
        *bv *= h2; // e_pole
    }
    let v = solve_linear(&at, disc.symmetric, &b, 1e-11)?;
    let mut atom_mass = vec![0.0; domain.atoms.len()];
    let mut total = 0.0;
    for gh in &disc.ghosts {
        let m = -gh.coeff * v[gh.row as usize];
        atom_mass[gh.atom as usize] += m;
        total += m;
    }
    let green_vec: Vec<f64> = v.iter().map(|x| x / h2).collect();
    Ok(PoleData {
        pole,
        atom_mass,
        green: disc.to_field(&green_vec),
        total_mass: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::shapes;

    #[test]
    fn constants_are_exact_solutions() {
        let d = shapes::disk(512, 2e-3);
        let a = CoefficientField::identity();
        let u = solve_dirichlet(&d, &a, Rect::new([-1.0, -1.0], [1.0, 1.0]), 1.0 / 32.0, |_, _| {
            1.0
        })
        .unwrap();
        for v in u.values.iter().filter(|v| v.is_finite()) {
            assert!((v - 1.0).abs() < 1e-7, "{v}");
        }
    }

    #[test]
    fn linear_functions_solve_constant_coefficients() {
        let d = shapes::unit_square(1e-3);
        let a = CoefficientField::diag();
        let g = |p: Pt, _: u32| 2.0 * p[0] - 3.0 * p[1] + 0.5;
        let u = solve_dirichlet(&d, &a, Rect::new([0.0, 0.0], [1.0, 1.0]), 1.0 / 32.0, g).unwrap();
        for j in 0..u.geom.ny {
            for i in 0..u.geom.nx {
                if u.mask[u.geom.idx(i, j)] {
                    let p = u.geom.node(i, j);
                    let expect = 2.0 * p[0] - 3.0 * p[1] + 0.5;
                    assert!(
                        (u.at(i, j) - expect).abs() < 2e-4,
                        "at {p:?}: {} vs {expect}",
                        u.at(i, j)
                    );
                }
            }
        }
    }

    #[test]
    fn half_plane_poisson_value() {
        // Dirichlet data 1_{[-1,1]} on the floor of a strip: at (0,1) the
        // half-plane Poisson integral gives 1/2; truncation at ±8/height 8
        // perturbs the value only mildly.
        let d = shapes::half_plane_strip(8.0, 8.0, 4e-3);
        let a = CoefficientField::identity();
        let g = |p: Pt, _: u32| {
            if p[1] < 1e-9 && p[0].abs() <= 1.0 {
                1.0
            } else {
                0.0
            }
        };
        let h = 1.0 / 32.0;
        let u = solve_dirichlet(&d, &a, Rect::new([-8.0, 0.0], [8.0, 8.0]), h, g).unwrap();
        let (i, j) = u.nearest_node([0.0, 1.0, 0.0]).unwrap();
        let val = u.at(i, j);
        assert!((val - 0.5).abs() < 3.0 * h, "u(0,1) = {val}");
        // Maximum principle.
        for v in u.values.iter().filter(|v| v.is_finite()) {
            assert!(*v >= -1e-9 && *v <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn rotating_coefficients_stay_bounded() {
        let d = shapes::disk(512, 2e-3);
        let a = CoefficientField::rotating(0.3);
        let g = |p: Pt, _: u32| if p[0] > 0.0 { 1.0 } else { 0.0 };
        let u = solve_dirichlet(&d, &a, Rect::new([-1.0, -1.0], [1.0, 1.0]), 1.0 / 48.0, g).unwrap();
        for v in u.values.iter().filter(|v| v.is_finite()) {
            assert!(*v >= -1e-6 && *v <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn pole_data_masses_sum_to_one() {
        let d = shapes::disk(512, 2e-3);
        let a = CoefficientField::identity();
        let disc = discretize(&d, &a, Rect::new([-1.0, -1.0], [1.0, 1.0]), 1.0 / 64.0).unwrap();
        let pd = pole_data(&d, &disc, [0.0, 0.0, 0.0]).unwrap();
        assert!((pd.total_mass - 1.0).abs() < 2.0 / 64.0, "{}", pd.total_mass);
        assert!(pd.atom_mass.iter().all(|&m| m >= -1e-9));
        // Symmetry of the disk: mass of the right half ≈ 1/2.
        let right: f64 = (0..d.atoms.len())
            .filter(|&i| d.atoms.pos[i][0] > 0.0)
            .map(|i| pd.atom_mass[i])
            .sum();
        assert!((right - 0.5 * pd.total_mass).abs() < 0.01);
        // Green positivity away from the pole.
        for v in pd.green.values.iter().filter(|v| v.is_finite()) {
            assert!(*v >= -1e-9);
        }
    }

    #[test]
    fn green_matches_disk_log_profile() {
        let d = shapes::disk(2048, 1e-3);
        let a = CoefficientField::identity();
        let h = 1.0 / 128.0;
        let disc = discretize(&d, &a, Rect::new([-1.0, -1.0], [1.0, 1.0]), h).unwrap();
        let pd = pole_data(&d, &disc, [0.0, 0.0, 0.0]).unwrap();
        // G(X) = (1/2π)·log(1/|X|) for the unit disk with the pole at 0.
        for rad in [0.2f64, 0.3, 0.5, 0.7, 0.8] {
            let exact = (1.0 / (2.0 * std::f64::consts::PI)) * (1.0 / rad.max(1e-12)).ln();
            for ang in [0.3, 1.7, 3.9] {
                let p = [rad * f64::cos(ang), rad * f64::sin(ang), 0.0];
                let got = pd.green.interpolate(p);
                assert!(
                    (got - exact).abs() <= 0.02 * exact.abs().max(0.05),
                    "G({p:?}) = {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn green_symmetry_between_solve_paths() {
        let d = shapes::disk(512, 2e-3);
        let a = CoefficientField::rotating(0.25);
        let h = 1.0 / 48.0;
        let disc = discretize(&d, &a, Rect::new([-1.0, -1.0], [1.0, 1.0]), h).unwrap();
        let x = [0.4, 0.1, 0.0];
        let y = [-0.3, -0.2, 0.0];
        // G_L(x, y) from the transpose solve at x…
        let pd = pole_data(&d, &disc, x).unwrap();
        let g1 = pd.green.interpolate(y);
        // …equals the forward solve with the pole at y, read at x.
        let (b, _) = disc.rhs_point_mass(y).unwrap();
        let u = solve_bicgstab(&disc.matrix, &b, 1e-11, 60_000).unwrap();
        let field = disc.to_field(&u);
        let g2 = field.interpolate(x);
        assert!(
            (g1 - g2).abs() <= 5.0 * h * g1.abs().max(0.01),
            "{g1} vs {g2}"
        );
    }
}
