//! Smooth cutoff adapted to a sawtooth: a C² partition of unity over the
//! Whitney boxes, summed over the region's box family.
//!
//! Per box, `φ_I = φ0((·−X(I))/ℓ(I))` with a tensor-product C² bump that is
//! 1 on `(1+2λ)I` and vanishes off `(1+3λ)I`; the normalized sum
//! `Ψ_N = Σ_{W_N} φ_I / Σ_W φ_J` is 1 wherever every contributor belongs to
//! the family and 0 outside the fattened union, with `|∇Ψ_N|·δ` bounded.

use crate::geom::{smoothstep_c2, Pt};
use crate::regions::SawtoothRegion;
use crate::whitney::WhitneyDecomposition;
use crate::{Error, Result};

pub struct CutoffPartition {
    /// Region box family `W_N`, sorted.
    pub members: Vec<u32>,
    /// Boundary-layer boxes: members touching a non-member (or the frontier
    /// of the truncated decomposition).
    pub sigma_layer: Vec<u32>,
    pub lambda: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct CutoffReport {
    /// Lower constant in `1_{Ω*} ≲ Ψ_N` over region probes.
    pub lower_const: f64,
    /// `sup |∇Ψ_N|·δ` over probes (finite differences).
    pub sup_grad_delta: f64,
    /// `Σ_{W_N^Σ} ℓ(I)^n / σ(root)`.
    pub sigma_sum_ratio: f64,
}

/// Per-box bump at `x`, in box-local coordinates.
fn phi_box(w: &WhitneyDecomposition, b: u32, lambda: f64, x: Pt) -> f64 {
    let rect = &w.boxes[b as usize].rect;
    let half = rect.side() * 0.5;
    let c = rect.center();
    let mut v = 1.0;
    for k in 0..2 {
        let xi = (x[k] - c[k]).abs() / half;
        // 1 up to (1+2λ), 0 beyond (1+3λ).
        v *= smoothstep_c2((xi - (1.0 + 2.0 * lambda)) / lambda);
        if v == 0.0 {
            return 0.0;
        }
    }
    v
}

impl CutoffPartition {
    /// `Ψ_N(x)`: normalized member mass among all contributing boxes.
    pub fn psi(&self, w: &WhitneyDecomposition, x: Pt) -> f64 {
        let Some(owner) = w.locate(x) else {
            return 0.0;
        };
        let mut num = 0.0;
        let mut den = 0.0;
        let mut seen = vec![owner];
        seen.extend_from_slice(&w.adjacency[owner as usize]);
        for &b in &seen {
            let v = phi_box(w, b, self.lambda, x);
            if v > 0.0 {
                den += v;
                if self.members.binary_search(&b).is_ok() {
                    num += v;
                }
            }
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// Single normalized bump `Φ_I = φ_I / Σφ_J` (partition-of-unity piece).
    pub fn phi_normalized(&self, w: &WhitneyDecomposition, b: u32, x: Pt) -> f64 {
        let Some(owner) = w.locate(x) else {
            return 0.0;
        };
        let mut den = 0.0;
        let mut seen = vec![owner];
        seen.extend_from_slice(&w.adjacency[owner as usize]);
        for &n in &seen {
            den += phi_box(w, n, self.lambda, x);
        }
        if den == 0.0 {
            0.0
        } else {
            phi_box(w, b, self.lambda, x) / den
        }
    }

    /// Finite-difference gradient of `Ψ_N`.
    pub fn grad_psi(&self, w: &WhitneyDecomposition, x: Pt, h: f64) -> [f64; 2] {
        let f = |p: Pt| self.psi(w, p);
        [
            (f([x[0] + h, x[1], 0.0]) - f([x[0] - h, x[1], 0.0])) / (2.0 * h),
            (f([x[0], x[1] + h, 0.0]) - f([x[0], x[1] - h, 0.0])) / (2.0 * h),
        ]
    }
}

/// Build the cutoff for a sawtooth region and measure its constants.
pub fn cutoff_partition(
    domain: &crate::boundary::Domain,
    w: &WhitneyDecomposition,
    region: &SawtoothRegion,
    sigma_root: f64,
) -> Result<(CutoffPartition, CutoffReport)> {
    if region.lambda > 0.125 + 1e-12 {
        return Err(Error::Parameter(
            "lambda beyond 1/8 lets fattened boxes leak past touching neighbours".into(),
        ));
    }
    let members = region.boxes.clone();
    let is_member = |b: u32| members.binary_search(&b).is_ok();
    let mut sigma_layer = Vec::new();
    for &b in &members {
        let mut frontier = w.adjacency[b as usize]
            .iter()
            .any(|&n| !is_member(n));
        if !frontier {
            // Face probes catch truncated neighbourhoods at the window edge.
            let rect = &w.boxes[b as usize].rect;
            let eps = rect.side() * 1e-6;
            let c = rect.center();
            for probe in [
                [rect.hi[0] + eps, c[1], 0.0],
                [rect.lo[0] - eps, c[1], 0.0],
                [c[0], rect.hi[1] + eps, 0.0],
                [c[0], rect.lo[1] - eps, 0.0],
            ] {
                match w.locate(probe) {
                    Some(n) if is_member(n) => {}
                    _ => {
                        frontier = true;
                        break;
                    }
                }
            }
        }
        if frontier {
            sigma_layer.push(b);
        }
    }
    let partition = CutoffPartition {
        members,
        sigma_layer,
        lambda: region.lambda,
    };
    // Measured constants on region probes.
    let mut lower_const = f64::INFINITY;
    let mut sup_grad_delta = 0.0f64;
    for &b in &partition.members {
        let rect = &w.boxes[b as usize].rect;
        let n = 4;
        for i in 0..n {
            for j in 0..n {
                let p = [
                    rect.lo[0] + (i as f64 + 0.5) * rect.side() / n as f64,
                    rect.lo[1] + (j as f64 + 0.5) * rect.side() / n as f64,
                    0.0,
                ];
                let psi = partition.psi(w, p);
                lower_const = lower_const.min(psi);
                let g = partition.grad_psi(w, p, rect.side() * 1e-4);
                let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
                sup_grad_delta = sup_grad_delta.max(gn * domain.signed_dist(p).max(0.0));
            }
        }
    }
    let dim = domain.ambient_dim as i32 - 1;
    let sigma_sum: f64 = partition
        .sigma_layer
        .iter()
        .map(|&b| w.boxes[b as usize].side().powi(dim))
        .sum();
    Ok((
        partition,
        CutoffReport {
            lower_const,
            sup_grad_delta,
            sigma_sum_ratio: sigma_sum / sigma_root,
        },
    ))
}
