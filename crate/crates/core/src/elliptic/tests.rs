use super::*;
use crate::boundary::shapes;
use crate::coeff::CoefficientField;
use crate::dyadic::build_grid;
use crate::regions::FatLevel;
use crate::solver::discretize;
use crate::whitney::whitney_decompose;

const PI: f64 = std::f64::consts::PI;

/// Exact Poisson kernel of the upper half-plane at pole (x0, t0).
fn halfplane_kernel(x0: f64, t0: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| (1.0 / PI) * t0 / ((x - x0) * (x - x0) + t0 * t0)
}

#[test]
fn disk_center_measure_is_uniform() {
    let d = shapes::disk(1024, 2e-3);
    let grid = build_grid(&d, 5).unwrap();
    let a = CoefficientField::identity();
    let disc = discretize(&d, &a, Rect::new([-1.0, -1.0], [1.0, 1.0]), 1.0 / 64.0).unwrap();
    let (est, _) = elliptic_measure(&d, &disc, [0.0, 0.0, 0.0]).unwrap();
    // ω(Q) = σ(Q)/2π by symmetry; ghost-projection attribution smears
    // masses across cube cuts by one kernel-height times h.
    let h = 1.0 / 64.0;
    for &q in &grid.by_generation[4] {
        let cube = grid.cube(q);
        let expect = cube.sigma / (2.0 * PI);
        let got = est.cube_mass(&grid, q);
        assert!(
            (got - expect).abs() <= 3.0 * h * expect.max(0.05),
            "ω(Q) = {got} vs {expect}"
        );
    }
    // Generation masses sum to ω(∂Ω) ≤ 1 within 2h.
    let sum: f64 = grid.by_generation[4]
        .iter()
        .map(|&q| est.cube_mass(&grid, q))
        .sum();
    assert!(sum <= 1.0 + 1e-9 && (sum - est.total).abs() < 1e-9);
    assert!((est.total - 1.0).abs() < 2.0 * h);
}

#[test]
fn lipschitz_solver_agrees_with_wos() {
    let d = shapes::lipschitz_graph(0.5, 4.0, 4.0, 1.0, 4e-3);
    let a = CoefficientField::identity();
    let h = 1.0 / 48.0;
    let disc = discretize(&d, &a, Rect::new([-4.0, -0.1], [4.0, 4.0]), h).unwrap();
    let pole = [0.25, 1.0, 0.0];
    let (est, _) = elliptic_measure(&d, &disc, pole).unwrap();
    let wos = elliptic_measure_wos(&d, pole, 40_000, 11).unwrap();
    // Compare masses of a few boundary windows.
    for (cx, r) in [(0.0, 0.5), (-1.0, 0.8), (1.5, 0.6)] {
        let x = [cx, 0.125, 0.0];
        let m_grid = est.ball_mass(&d, x, r);
        let m_wos = wos.ball_mass(&d, x, r);
        let stderr = (m_wos * (1.0 - m_wos) / 40_000.0).sqrt();
        assert!(
            (m_grid - m_wos).abs() <= 3.0 * (stderr + h),
            "window ({cx},{r}): grid {m_grid} wos {m_wos}"
        );
    }
}

#[test]
fn nonsymmetric_measures_are_probability_like() {
    let d = shapes::disk(512, 2e-3);
    let a = CoefficientField::rotating(0.3);
    let h = 1.0 / 48.0;
    let disc = discretize(&d, &a, Rect::new([-1.0, -1.0], [1.0, 1.0]), h).unwrap();
    let (est, _) = elliptic_measure(&d, &disc, [0.2, 0.1, 0.0]).unwrap();
    assert!(est.total <= 1.0 + 2.0 * h && est.total > 0.9);
    // Transpose operator via the transposed coefficients.
    let at = CoefficientField::rotating(-0.3);
    let disc_t = discretize(&d, &at, Rect::new([-1.0, -1.0], [1.0, 1.0]), h).unwrap();
    let (est_t, _) = elliptic_measure(&d, &disc_t, [0.2, 0.1, 0.0]).unwrap();
    assert!(est_t.total <= 1.0 + 2.0 * h && est_t.total > 0.9);
}

#[test]
fn riesz_formula_on_disk() {
    let d = shapes::disk(1024, 2e-3);
    let a = CoefficientField::rotating(0.25);
    let h = 1.0 / 96.0;
    let disc = discretize(&d, &a, Rect::new([-1.0, -1.0], [1.0, 1.0]), h).unwrap();
    let pole = [0.3, -0.2, 0.0];
    let (est, green) = elliptic_measure(&d, &disc, pole).unwrap();
    let (vx, vy) = flux_field(&a, &green);
    // Interior bump away from the pole: RHS = Φ(pole) − ∫Φ dω = −∫Φdω + 0
    // since Φ(pole) = 0 for this support; and a pole-covering bump.
    for (z, r, covers_pole) in [
        ([-0.4, 0.35, 0.0], 0.35, false),
        ([0.3, -0.2, 0.0], 0.5, true),
    ] {
        let phi = radial_bump(z, r);
        let mut lhs = 0.0;
        for j in 0..green.geom.ny {
            for i in 0..green.geom.nx {
                let id = green.geom.idx(i, j);
                if !green.mask[id] {
                    continue;
                }
                let p = green.geom.node(i, j);
                if dist(p, z) >= r || dist(p, pole) < 4.0 * h {
                    continue;
                }
                let g = radial_bump_grad(z, r, p);
                if vx.values[id].is_finite() && vy.values[id].is_finite() {
                    // A^⊤∇𝒢 · ∇Φ with 𝒢 = G_L(pole, ·) = G_{L^⊤}(·, pole).
                    lhs += (vx.values[id] * g[0] + vy.values[id] * g[1]) * h * h;
                }
            }
        }
        let boundary: f64 = (0..d.atoms.len())
            .map(|ai| phi(d.atoms.pos[ai]) * est.atom_mass[ai])
            .sum();
        let rhs = if covers_pole { 1.0 - boundary } else { -boundary };
        assert!(
            (lhs - rhs).abs() <= 3.0 * h + 0.05 * rhs.abs(),
            "Riesz: lhs {lhs} rhs {rhs} (covers_pole={covers_pole})"
        );
    }
}

#[test]
fn bourgain_on_disk_and_half_plane() {
    let d = shapes::disk(1024, 2e-3);
    let a = CoefficientField::identity();
    let rep = bourgain_check(
        &d,
        &a,
        Rect::new([-1.0, -1.0], [1.0, 1.0]),
        1.0 / 64.0,
        [1.0, 0.0, 0.0],
        0.5,
        0.5,
    )
    .unwrap();
    assert!(rep.min_mass >= 0.2, "disk min mass {}", rep.min_mass);

    // Half-plane closed form at the worst sample point: Y on the sphere of
    // radius c·r has mass ≥ (π − 2·atan(c/(1−c)))/π-ish; quadrature check.
    let hp = shapes::half_plane_strip(8.0, 8.0, 4e-3);
    let rep = bourgain_check(
        &hp,
        &a,
        Rect::new([-8.0, 0.0], [8.0, 8.0]),
        1.0 / 32.0,
        [0.0, 0.0, 0.0],
        1.0,
        0.5,
    )
    .unwrap();
    // Poisson integral of 1_{[−1,1]} at the worst Y ∈ B(0, 1/2): computed by
    // the kernel, minimum sits near (±1/2, 0⁺).
    let mut exact_min = f64::INFINITY;
    for t in 1..200 {
        let ang = PI * t as f64 / 200.0;
        let y = [0.5 * ang.cos(), 0.5 * ang.sin(), 0.0];
        let mass = (1.0 / PI)
            * (((1.0 - y[0]) / y[1]).atan() + ((1.0 + y[0]) / y[1]).atan());
        exact_min = exact_min.min(mass);
    }
    assert!(
        (rep.min_mass - exact_min).abs() < 0.05,
        "hp min {} vs exact {exact_min}",
        rep.min_mass
    );
}

#[test]
fn doubling_disk_center_exact_and_half_plane_limit() {
    let d = shapes::disk(2048, 1e-3);
    // Exact-symmetry estimate: uniform density.
    let est = EllipticMeasureEstimate::from_density(&d, [0.0, 0.0, 0.0], |_| 1.0 / (2.0 * PI));
    let ratio = doubling_check(&est, &d, [1.0, 0.0, 0.0], 0.1);
    assert!((ratio - 2.0).abs() < 0.01, "disk doubling {ratio}");

    // Half-plane, pole high above: kernel flattens, ratio → 2.
    let hp = shapes::line_proxy(64.0, true, 1e-2);
    let k = halfplane_kernel(0.0, 40.0);
    let est = EllipticMeasureEstimate::from_density(&hp, [0.0, 40.0, 0.0], |a| {
        k(hp.atoms.pos[a as usize][0])
    });
    let ratio = doubling_check(&est, &hp, [0.0, 0.0, 0.0], 0.5);
    assert!((ratio - 2.0).abs() < 0.01, "hp doubling {ratio}");
}

#[test]
fn cfms_bracket_on_half_plane_closed_forms() {
    // G((x0,t0), Y) and ω^{(x0,t0)} in closed form; the ratio G(X, X_Δ)/ω(Δ)
    // stays in a fixed bracket across scales and is scaling invariant.
    let hp = shapes::line_proxy(256.0, true, 2e-2);
    let pole = [0.0, 8.0, 0.0];
    let k = halfplane_kernel(0.0, 8.0);
    let est = EllipticMeasureEstimate::from_density(&hp, pole, |a| {
        k(hp.atoms.pos[a as usize][0])
    });
    let green = |x: Pt, y: Pt| {
        let refl = [y[0], -y[1], 0.0];
        (1.0 / (2.0 * PI)) * (dist(x, refl) / dist(x, y)).ln()
    };
    let mut ratios = Vec::new();
    for r in [0.25, 0.5, 1.0, 2.0] {
        let x_delta = [0.0, r / 2.0, 0.0];
        let g = green(pole, x_delta);
        let m = est.ball_mass(&hp, [0.0, 0.0, 0.0], r);
        ratios.push(g / m);
    }
    for &r in &ratios {
        assert!((0.1..10.0).contains(&r), "cfms ratio {r}");
    }
    // Doubling the scale of everything leaves the ratio within 5%.
    let pole2 = [0.0, 16.0, 0.0];
    let k2 = halfplane_kernel(0.0, 16.0);
    let est2 = EllipticMeasureEstimate::from_density(&hp, pole2, |a| {
        k2(hp.atoms.pos[a as usize][0])
    });
    let g2 = green(pole2, [0.0, 1.0, 0.0]);
    let m2 = est2.ball_mass(&hp, [0.0, 0.0, 0.0], 2.0);
    let scaled = g2 / m2;
    assert!(
        (scaled - ratios[2]).abs() / ratios[2] < 0.05,
        "{scaled} vs {}",
        ratios[2]
    );
}

#[test]
fn rhq_exact_disk_and_half_plane_kernel() {
    let d = shapes::disk(1024, 2e-3);
    let grid = build_grid(&d, 6).unwrap();
    let est = EllipticMeasureEstimate::from_density(&d, [0.0, 0.0, 0.0], |_| 1.0 / (2.0 * PI));
    let rep = rhq_fit(&d, &grid, &est, 2.0, 6).unwrap();
    assert!(
        (rep.rh_max - 1.0).abs() < 1e-9,
        "constant kernel must give RH ratio 1, got {}",
        rep.rh_max
    );

    let hp = shapes::line_proxy(8.0, true, 1e-3);
    let grid = build_grid(&hp, 7).unwrap();
    let k = halfplane_kernel(0.0, 1.0);
    let est = EllipticMeasureEstimate::from_density(&hp, [0.0, 1.0, 0.0], |a| {
        k(hp.atoms.pos[a as usize][0])
    });
    let rep = rhq_fit(&hp, &grid, &est, 2.0, 7).unwrap();
    let mut inside_max = 0.0f64;
    for &(q, rh, _) in &rep.per_delta {
        let cube = grid.cube(q);
        if cube.center[0].abs() + cube.length < 1.0 {
            inside_max = inside_max.max(rh);
        }
    }
    assert!(inside_max <= 2.0, "RH₂ over Δ ⊆ [−1,1]: {inside_max}");
    assert!(rep.ainf_fit.1 > 0.0);
}

#[test]
fn gradient_bound_linear_and_poisson() {
    // u = t on the strip: |∇u|δ/u = δ/t peaks at exactly 1.
    let strip = shapes::half_plane_strip(4.0, 4.0, 4e-3);
    let u = FieldSample::from_fn(&strip, [-4.0, 0.0], 1.0 / 64.0, 513, 257, |p| p[1]);
    let sup = gradient_bound_check(&u);
    assert!((sup - 1.0).abs() < 1e-6, "sup = {sup}");

    // Poisson extension of 1_{[−1,1]} on the true half-plane.
    let hp = shapes::line_proxy(16.0, true, 1e-2);
    let u = FieldSample::from_fn(&hp, [-3.0, 0.015], 1.0 / 64.0, 385, 129, |p| {
        (1.0 / PI) * (((1.0 - p[0]) / p[1]).atan() + ((1.0 + p[0]) / p[1]).atan())
    });
    let sup = gradient_bound_check(&u);
    assert!(sup > 0.2 && sup <= 5.0, "sup = {sup}");
    // Refinement stability within 10%.
    let u2 = FieldSample::from_fn(&hp, [-3.0, 0.0075], 1.0 / 128.0, 769, 257, |p| {
        (1.0 / PI) * (((1.0 - p[0]) / p[1]).atan() + ((1.0 + p[0]) / p[1]).atan())
    });
    let sup2 = gradient_bound_check(&u2);
    assert!((sup - sup2).abs() / sup < 0.1, "{sup} vs {sup2}");
}

#[test]
fn caccioppoli_second_derivatives() {
    let strip = shapes::half_plane_strip(4.0, 4.0, 4e-3);
    // Linear: second derivatives vanish.
    let lin = FieldSample::from_fn(&strip, [-4.0, 0.0], 1.0 / 64.0, 513, 257, |p| {
        1.5 * p[0] - 0.3 * p[1]
    });
    let ibox = Rect::new([-0.2, 1.8], [0.2, 2.2]);
    assert!(caccioppoli2_check(&lin, &ibox).unwrap() < 1e-20);

    // Harmonic polynomial x² − t² against the exact integrals.
    let quad = FieldSample::from_fn(&strip, [-4.0, 0.0], 1.0 / 96.0, 769, 385, |p| {
        p[0] * p[0] - p[1] * p[1]
    });
    let ibox = Rect::new([0.8, 1.8], [1.2, 2.2]);
    let got = caccioppoli2_check(&quad, &ibox).unwrap();
    // Exact: ∬_I |∇²u|² = 8|I|; ∬_{2I} |∇u|² = 4∬(x²+t²).
    let (cx, ct, s) = (1.0, 2.0, 0.4);
    let num_exact = 8.0 * s * s;
    let den_exact = 4.0
        * ((2.0 * s) * (2.0 * s) * (cx * cx + ct * ct)
            + 2.0 * (2.0 * s as f64).powi(4) / 12.0);
    let exact = s * s * num_exact / den_exact;
    assert!(
        (got - exact).abs() / exact < 0.05,
        "caccioppoli {got} vs {exact}"
    );
    assert!(got <= 8.0);
    // 6I must stay inside.
    let bad = Rect::new([-0.2, 0.05], [0.2, 0.45]);
    assert!(caccioppoli2_check(&quad, &bad).is_err());
}

#[test]
fn square_function_matches_analytic_oracle_on_half_plane() {
    // A = I, far pole: 𝒢 = half-plane Green in closed form. The per-box
    // Υ_Q equals the direct quadrature of |∇²𝒢|²·δ.
    let hp = shapes::line_proxy(16.0, true, 4e-3);
    let grid = build_grid(&hp, 6).unwrap();
    let whitney = whitney_decompose(&hp, Rect::new([-4.0, 0.0], [4.0, 4.0]), 1e-3).unwrap();
    let rb = RegionBuilder::new(&hp, &grid, &whitney, Default::default()).unwrap();
    let pole = [0.0, 12.0, 0.0];
    let green = |y: Pt| {
        let refl = [pole[0], -pole[1], 0.0];
        (1.0 / (2.0 * PI)) * (dist(y, refl) / dist(y, pole)).ln()
    };
    let h = 1.0 / 256.0;
    let g = FieldSample::from_fn(&hp, [-2.0, h / 4.0], h, 1025, 513, green);
    let a = CoefficientField::identity();
    // One moderate cube near the middle.
    let q = *grid.by_generation[5]
        .iter()
        .find(|&&q| grid.cube(q).center[0].abs() < 1.0)
        .unwrap();
    let region = rb.whitney_region(q, FatLevel::Star).unwrap();
    let rep = square_function_carleson(&rb, &region, &a, &g, SquareWeight::Delta, pole).unwrap();
    // Analytic Hessian of log-distance: I/r² − 2(v⊗v)/r⁴.
    let hess_ln = |y: Pt, c: Pt| -> [[f64; 2]; 2] {
        let v = [y[0] - c[0], y[1] - c[1]];
        let r2 = v[0] * v[0] + v[1] * v[1];
        let mut m = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let kron = if i == j { 1.0 } else { 0.0 };
                m[i][j] = kron / r2 - 2.0 * v[i] * v[j] / (r2 * r2);
            }
        }
        m
    };
    let refl = [pole[0], -pole[1], 0.0];
    let mut oracle = 0.0;
    for &b in rb.w_star(q) {
        let r = &whitney.boxes[b as usize].rect;
        let n = 24;
        let cell = r.side() / n as f64;
        for i in 0..n {
            for j in 0..n {
                let p = [
                    r.lo[0] + (i as f64 + 0.5) * cell,
                    r.lo[1] + (j as f64 + 0.5) * cell,
                    0.0,
                ];
                let h1 = hess_ln(p, refl);
                let h2 = hess_ln(p, pole);
                let mut frob2 = 0.0;
                for a1 in 0..2 {
                    for b1 in 0..2 {
                        let d = (h1[a1][b1] - h2[a1][b1]) / (2.0 * PI);
                        frob2 += d * d;
                    }
                }
                oracle += frob2 * p[1] * cell * cell;
            }
        }
    }
    let got = rep.per_cube.iter().find(|&&(c, _)| c == q).unwrap().1;
    assert!(
        (got - oracle).abs() / oracle < 0.05,
        "Υ_Q {got} vs oracle {oracle}"
    );
}

#[test]
fn ibp_identity_half_plane_has_no_exterior() {
    // Two-sided proxy: the complement of the two closed half-planes is
    // empty, so 𝓘𝓘 = 0 exactly and the identity closes to quadrature order.
    // Regions live on the upper side (the PDE's Ω); the two-sided domain
    // only classifies volume nodes. Both proxies share the same atoms.
    let upper = shapes::line_proxy(16.0, true, 4e-3);
    let two = shapes::line_proxy(16.0, false, 4e-3);
    let grid = build_grid(&upper, 5).unwrap();
    let whitney = whitney_decompose(&upper, Rect::new([-4.0, 0.0], [4.0, 4.0]), 1e-3).unwrap();
    let rb = RegionBuilder::new(&upper, &grid, &whitney, Default::default()).unwrap();
    let pole = [0.0, 8.0, 0.0];
    let k = halfplane_kernel(0.0, 8.0);
    let mut est = EllipticMeasureEstimate::from_density(&two, pole, |a| {
        k(two.atoms.pos[a as usize][0])
    });
    let green = |y: Pt| {
        if y[1] <= 0.0 {
            return f64::NAN;
        }
        let refl = [pole[0], -pole[1], 0.0];
        (1.0 / (2.0 * PI)) * (dist(y, refl) / dist(y, pole)).ln()
    };
    let h = 1.0 / 128.0;
    // Field masked to the upper side (δ-side of the one-sided proxy).
    let g = FieldSample::from_fn(&upper, [-2.0, -1.0], h, 513, 385, green);
    let a = CoefficientField::identity();
    let q = *grid.by_generation[4]
        .iter()
        .find(|&&q| grid.cube(q).center[0].abs() < 1.0)
        .unwrap();
    // Normalize ω and 𝒢 consistently (scale both by C0·σ(Q0)).
    let c0 = est.normalize_at(&grid, q).unwrap();
    let sigma0 = grid.cube(q).sigma;
    let scale = c0 * sigma0;
    let g_scaled = {
        let mut gs = g.clone();
        for v in gs.values.iter_mut() {
            *v *= scale;
        }
        gs
    };
    let rep =
        ibp_identity_check(&two, &rb, &a, q, &est, &g_scaled, 2, None).unwrap();
    assert_eq!(rep.ii_term, 0.0, "exterior term must vanish exactly");
    assert!(
        rep.residual <= 5.0 * h * rep.sigma_q.max(1.0),
        "residual {} vs budget {}",
        rep.residual,
        5.0 * h * rep.sigma_q
    );
    // |β| ≲ ω(Q)/σ(Q).
    let beta_norm = (rep.beta[0] * rep.beta[0] + rep.beta[1] * rep.beta[1]).sqrt();
    assert!(
        beta_norm <= 10.0 * rep.omega_density,
        "β {beta_norm} vs density {}",
        rep.omega_density
    );
}

#[test]
fn kp_closed_form_ladder() {
    // u = harmonic measure of the negative axis: u = θ/π, |∇u|² = 1/(π²r²).
    let grad_u = |p: Pt| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        [
            -p[1] / (PI * r2),
            p[0] / (PI * r2),
        ]
    };
    let a = CoefficientField::identity();
    let scales: Vec<f64> = (-3..=3).map(|k| 2.0_f64.powi(k)).collect();
    let rep = kenig_pipher_carleson(&grad_u, 1.0, &a, None, 0.0, &scales, 1e-7).unwrap();
    assert!(rep.sup <= 2.0, "sup = {}", rep.sup);
    assert_eq!(rep.mu_norm, 0.0);
    // Exact reduction: (1/|Q|)∬_{R_Q} |∇u|²t = (2/π²ℓ)∫₀^ℓ t·atan(ℓ/2t) dt,
    // evaluated by a fine 1-D quadrature; implementation within 2%.
    for &(ell, val) in &rep.ladder {
        let a_half = ell / 2.0;
        let mut exact_val = 0.0;
        let n = 40_000;
        for i in 0..n {
            let t = ell * (i as f64 + 0.5) / n as f64;
            exact_val += 2.0 * (a_half / t).atan() / PI / PI * (ell / n as f64);
        }
        exact_val /= ell;
        assert!(
            (val - exact_val).abs() / exact_val < 0.02,
            "ladder ℓ={ell}: {val} vs {exact_val}"
        );
    }
    // u ≡ 1 gives zero.
    let zero = kenig_pipher_carleson(&|_| [0.0, 0.0], 1.0, &a, None, 0.0, &scales, 1e-7).unwrap();
    assert_eq!(zero.sup, 0.0);
    // Unbounded u rejected.
    assert!(kenig_pipher_carleson(&grad_u, 2.0, &a, None, 0.0, &scales, 1e-7).is_err());
}

#[test]
fn kp_t_profile_is_stable_across_decades() {
    let a = CoefficientField::kp_t_profile(1.0 / 8.0);
    let grad_u = |p: Pt| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        [-p[1] / (PI * r2), p[0] / (PI * r2)]
    };
    let scales: Vec<f64> = (-3..=3).map(|k| 2.0_f64.powi(k)).collect();
    let rep = kenig_pipher_carleson(&grad_u, 1.0, &a, None, 0.0, &scales, 1e-7).unwrap();
    assert!(rep.mu_norm.is_finite() && rep.mu_norm > 0.0);
    assert!(rep.sup <= 3.0 * (1.0 + rep.mu_norm + rep.nu_norm), "{rep:?}");
}

#[test]
fn coefficient_hypothesis_gauges() {
    let d = shapes::disk(512, 2e-3);
    let a = CoefficientField::identity();
    let (sup_gd, car) = coefficient_hypothesis(&d, &a, Rect::new([-1.0, -1.0], [1.0, 1.0]), 0.05);
    assert_eq!(sup_gd, 0.0);
    assert_eq!(car, 0.0);
}
