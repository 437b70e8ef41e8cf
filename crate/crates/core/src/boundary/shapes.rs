//! Canonical test domains.
//!
//! Curved shapes are pre-sampled as polylines; every builder returns a fully
//! indexed [`Domain`]. Proxies for unbounded boundaries (lines, strips) are
//! flagged `truncated`.

use super::{Domain, InteriorRule};
use crate::geom::{add, scale, sub, Pt};

/// Unit disk as a regular polygon with a vertex at `(1, 0)`.
pub fn disk(n_sides: usize, atom_len: f64) -> Domain {
    let verts: Vec<Pt> = (0..n_sides)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n_sides as f64;
            [t.cos(), t.sin(), 0.0]
        })
        .collect();
    Domain::from_polylines(vec![verts], vec![true], InteriorRule::RayParity, atom_len).unwrap()
}

/// Unit square `[0,1]²`.
pub fn unit_square(atom_len: f64) -> Domain {
    let verts = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
    ];
    Domain::from_polylines(vec![verts], vec![true], InteriorRule::RayParity, atom_len).unwrap()
}

/// The segment `[0,1] × {0}` as a standalone boundary (grid tests).
pub fn unit_segment(atom_len: f64) -> Domain {
    let verts = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
    Domain::from_polylines(vec![verts], vec![false], InteriorRule::TwoSided, atom_len).unwrap()
}

/// Truncated line `[−L, L] × {0}` as a half-plane proxy. With
/// `upper_side = true` the interior is `{t > 0}`; otherwise both sides count
/// as interior and the exterior is empty.
pub fn line_proxy(half_len: f64, upper_side: bool, atom_len: f64) -> Domain {
    let verts = vec![[-half_len, 0.0, 0.0], [half_len, 0.0, 0.0]];
    let rule = if upper_side {
        InteriorRule::UpperSide
    } else {
        InteriorRule::TwoSided
    };
    Domain::from_polylines(vec![verts], vec![false], rule, atom_len).unwrap()
}

/// Closed rectangle `[−W, W] × [0, H]`: the bounded stand-in for the upper
/// half-plane used by the PDE solvers. The floor is the "real" boundary.
pub fn half_plane_strip(half_width: f64, height: f64, atom_len: f64) -> Domain {
    let verts = vec![
        [-half_width, 0.0, 0.0],
        [half_width, 0.0, 0.0],
        [half_width, height, 0.0],
        [-half_width, height, 0.0],
    ];
    Domain::from_polylines(vec![verts], vec![true], InteriorRule::RayParity, atom_len).unwrap()
}

/// Koch snowflake prefractal of the given level on a unit-side triangle.
pub fn koch_snowflake(level: u32, atom_len: f64) -> Domain {
    let mut verts: Vec<Pt> = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.5, 3.0_f64.sqrt() / 2.0, 0.0],
    ];
    // Counter-clockwise triangle; bumps go outward (to the right of travel
    // for clockwise edges, so walk the loop reversed).
    verts.reverse();
    for _ in 0..level {
        let m = verts.len();
        let mut next = Vec::with_capacity(m * 4);
        for i in 0..m {
            let a = verts[i];
            let b = verts[(i + 1) % m];
            let d = sub(b, a);
            let p = add(a, scale(d, 1.0 / 3.0));
            let q = add(a, scale(d, 2.0 / 3.0));
            // Outward normal for a clockwise loop is the left of travel.
            let nrm = [-d[1], d[0], 0.0];
            let tip = add(add(a, scale(d, 0.5)), scale(nrm, 3.0_f64.sqrt() / 6.0));
            next.push(a);
            next.push(p);
            next.push(tip);
            next.push(q);
        }
        verts = next;
    }
    Domain::from_polylines(vec![verts], vec![true], InteriorRule::RayParity, atom_len).unwrap()
}

/// Domain above a sawtooth Lipschitz graph of the given slope, boxed at
/// `[−W, W] × [·, H]`. The graph oscillates with the given period between
/// `y = 0` and `y = slope·period/2`.
pub fn lipschitz_graph(slope: f64, half_width: f64, height: f64, period: f64, atom_len: f64) -> Domain {
    let half = period / 2.0;
    let steps = (2.0 * half_width / half).round() as usize;
    assert!(
        steps % 2 == 0 && (steps as f64 * half - 2.0 * half_width).abs() < 1e-12,
        "graph width must hold an even number of half-periods"
    );
    let mut verts: Vec<Pt> = Vec::with_capacity(steps + 3);
    for i in 0..=steps {
        let x = -half_width + i as f64 * half;
        let y = if i % 2 == 0 { 0.0 } else { slope * half };
        verts.push([x, y, 0.0]);
    }
    verts.push([half_width, height, 0.0]);
    verts.push([-half_width, height, 0.0]);
    Domain::from_polylines(vec![verts], vec![true], InteriorRule::RayParity, atom_len).unwrap()
}

/// Unit disk with a polynomially thin spike removed along the positive x-axis.
/// The spike's half-width is `0.225 · (x / 0.9)^p` floored at `w_floor`, its
/// tip sits at the origin; the complement has vanishing density there, so
/// exterior corkscrews fail at small scales near the tip.
pub fn cusp_disk(n_sides: usize, exponent: u32, w_floor: f64, atom_len: f64) -> Domain {
    let circle: Vec<Pt> = (0..n_sides)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n_sides as f64;
            [t.cos(), t.sin(), 0.0]
        })
        .collect();
    let x_base: f64 = 0.9;
    let w = |x: f64| (0.25 * x_base * (x / x_base).powi(exponent as i32)).max(w_floor);
    let mut xs = Vec::new();
    let mut x = x_base;
    while w(x) > w_floor {
        xs.push(x);
        x *= 0.5_f64.sqrt();
    }
    // Flat slot section down to a short stub, then the exact tip.
    xs.push(x);
    let stub = (x * 0.1).max(w_floor);
    if stub < x {
        xs.push(stub);
    }
    let mut spike: Vec<Pt> = Vec::new();
    for &xi in &xs {
        spike.push([xi, w(xi), 0.0]);
    }
    spike.push([0.0, 0.0, 0.0]);
    for &xi in xs.iter().rev() {
        spike.push([xi, -w(xi), 0.0]);
    }
    Domain::from_polylines(
        vec![circle, spike],
        vec![true, true],
        InteriorRule::RayParity,
        atom_len,
    )
    .unwrap()
}

/// Unit disk minus a thin radial slit `[0.1, 0.9] × {0}` of half-width `5e-4`.
pub fn slit_disk(n_sides: usize, atom_len: f64) -> Domain {
    let circle: Vec<Pt> = (0..n_sides)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n_sides as f64;
            [t.cos(), t.sin(), 0.0]
        })
        .collect();
    let hw = 5e-4;
    let slit = vec![
        [0.1, 0.0, 0.0],
        [0.1 + hw, hw, 0.0],
        [0.9, hw, 0.0],
        [0.9, -hw, 0.0],
        [0.1 + hw, -hw, 0.0],
    ];
    Domain::from_polylines(
        vec![circle, slit],
        vec![true, true],
        InteriorRule::RayParity,
        atom_len,
    )
    .unwrap()
}

/// Two unit disks with centers `(±2.5, 0)`: a disconnected domain.
pub fn two_disks(n_sides: usize, atom_len: f64) -> Domain {
    let make = |cx: f64| -> Vec<Pt> {
        (0..n_sides)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n_sides as f64;
                [cx + t.cos(), t.sin(), 0.0]
            })
            .collect()
    };
    Domain::from_polylines(
        vec![make(-2.5), make(2.5)],
        vec![true, true],
        InteriorRule::RayParity,
        atom_len,
    )
    .unwrap()
}

/// Unit sphere as a subdivided icosahedron (ambient dimension 3).
pub fn icosphere(level: u32, atom_area: f64) -> Domain {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let normalize = |p: Pt| {
        let n = crate::geom::norm(p);
        scale(p, 1.0 / n)
    };
    let mut verts: Vec<Pt> = raw.iter().map(|&p| normalize(p)).collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Pt>| {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let m = normalize(scale(add(verts[a], verts[b]), 0.5));
                verts.push(m);
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let ab = midpoint(f[0], f[1], &mut verts);
            let bc = midpoint(f[1], f[2], &mut verts);
            let ca = midpoint(f[2], f[0], &mut verts);
            next.push([f[0], ab, ca]);
            next.push([f[1], bc, ab]);
            next.push([f[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    let tris: Vec<[Pt; 3]> = faces
        .iter()
        .map(|f| [verts[f[0]], verts[f[1]], verts[f[2]]])
        .collect();
    Domain::from_triangles(tris, atom_area).unwrap()
}
