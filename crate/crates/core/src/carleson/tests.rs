use super::*;
use crate::rng::Rng;

/// Brute-force Carleson norm: recompute every subtree sum by recursion.
fn brute_norm(tree: &impl CubeTree, m: &DiscreteMeasure, root: usize) -> f64 {
    fn mass(tree: &impl CubeTree, m: &DiscreteMeasure, q: usize) -> f64 {
        m.alpha[q]
            + tree
                .children(q)
                .iter()
                .map(|&c| mass(tree, m, c))
                .sum::<f64>()
    }
    tree.subtree(root)
        .into_iter()
        .map(|q| mass(tree, m, q) / tree.sigma(q))
        .fold(0.0, f64::max)
}

/// Brute-force maximal stopped family.
fn brute_stopping(tree: &impl CubeTree, root: usize, mu: &[f64], hi: f64) -> Vec<usize> {
    let stopped = |q: usize| {
        let r = mu[q] / tree.sigma(q);
        r < 0.5 - 1e-12 || r > hi * (1.0 + 1e-12)
    };
    let mut out = Vec::new();
    for q in tree.subtree(root) {
        if q == root || !stopped(q) {
            continue;
        }
        // Maximal: no stopped strict ancestor below the root.
        let mut a = tree.parent(q);
        let mut maximal = true;
        while let Some(p) = a {
            if p == root {
                break;
            }
            if stopped(p) {
                maximal = false;
                break;
            }
            a = tree.parent(p);
        }
        if maximal {
            out.push(q);
        }
    }
    out.sort_unstable();
    out
}

/// Leaf-driven additive measure: distribute masses on leaves, sum upward.
fn measure_from_leaves(tree: &SyntheticTree, leaf_mass: impl Fn(usize) -> f64) -> Vec<f64> {
    let n = tree.len();
    let mut mu = vec![0.0; n];
    for q in 0..n {
        if tree.children(q).is_empty() {
            mu[q] = leaf_mass(q);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&q| std::cmp::Reverse(tree.generation[q]));
    for &q in &order {
        if let Some(p) = tree.parent(q) {
            mu[p] += mu[q];
        }
    }
    mu
}

#[test]
fn norm_of_full_generations_counts_depth() {
    // α_Q = σ(Q) on generations 0..m: each generation contributes σ(Q)
    // to every subtree average, so the norm is m+1.
    let t = SyntheticTree::binary(6);
    let m_gens = 3u32;
    let alpha: Vec<f64> = (0..t.len())
        .map(|q| {
            if t.generation[q] <= m_gens {
                t.sigma(q)
            } else {
                0.0
            }
        })
        .collect();
    let m = DiscreteMeasure::from_alpha(alpha).unwrap();
    let norm = carleson_norm(&t, &m, 0);
    assert!((norm - (m_gens as f64 + 1.0)).abs() < 1e-12, "{norm}");
}

#[test]
fn norm_of_single_cube() {
    let t = SyntheticTree::binary(5);
    let q1 = 11usize;
    let mut alpha = vec![0.0; t.len()];
    alpha[q1] = 3.0 * t.sigma(q1);
    let m = DiscreteMeasure::from_alpha(alpha).unwrap();
    let norm = carleson_norm(&t, &m, 0);
    assert!((norm - 3.0).abs() < 1e-12);
}

#[test]
fn norm_matches_brute_force_on_random_instances() {
    let t = SyntheticTree::binary(8);
    let mut rng = Rng::new(2024);
    for _ in 0..5 {
        let alpha: Vec<f64> = (0..t.len()).map(|_| rng.uniform() * rng.uniform()).collect();
        let m = DiscreteMeasure::from_alpha(alpha).unwrap();
        let fast = carleson_norm(&t, &m, 0);
        let brute = brute_norm(&t, &m, 0);
        assert!((fast - brute).abs() < 1e-12 * brute.max(1.0));
    }
}

#[test]
fn truncated_norms_converge_monotonically() {
    let t = SyntheticTree::binary(6);
    let mut rng = Rng::new(5);
    let alpha: Vec<f64> = (0..t.len()).map(|_| rng.uniform()).collect();
    let full = carleson_norm(&t, &DiscreteMeasure::from_alpha(alpha.clone()).unwrap(), 0);
    let mut last = 0.0;
    for n in (0..=t.len()).step_by(16) {
        let mut trunc = alpha.clone();
        for a in trunc.iter_mut().skip(n) {
            *a = 0.0;
        }
        let norm = carleson_norm(&t, &DiscreteMeasure::from_alpha(trunc).unwrap(), 0);
        assert!(norm + 1e-15 >= last);
        last = norm;
    }
    assert!(last <= full + 1e-15);
}

#[test]
fn stopping_time_trivial_and_paper_constant() {
    let t = SyntheticTree::binary(6);
    // μ = σ: every ratio is 1; nothing stops.
    let mu: Vec<f64> = (0..t.len()).map(|q| t.sigma(q)).collect();
    let fam = stopping_time(&t, 0, &mu, 1.0, 1.0).unwrap();
    assert!(fam.cubes.is_empty());
    assert!((fam.k1 - 4.0).abs() < 1e-15, "K1 = (4K0)^(1/θ) = 4");
    let fam2 = stopping_time(&t, 0, &mu, 2.0, 0.5).unwrap();
    assert!((fam2.k1 - 64.0).abs() < 1e-12, "K1 = (4·2)² = 64");
}

#[test]
fn stopping_time_matches_brute_force_maximality() {
    let t = SyntheticTree::binary(6);
    // Mass 0.9 rides the leftmost branch; the rest spreads evenly.
    let leftmost: Vec<usize> = {
        let mut v = vec![0usize];
        while !t.children(*v.last().unwrap()).is_empty() {
            let q = *v.last().unwrap();
            v.push(t.children(q)[0]);
        }
        v
    };
    let target_leaf = *leftmost.last().unwrap();
    let n_leaves = 64.0;
    let mu = measure_from_leaves(&t, |q| {
        if q == target_leaf {
            0.9 + 0.1 / n_leaves
        } else {
            0.1 / n_leaves
        }
    });
    assert!((mu[0] - 1.0).abs() < 1e-12);
    let k0 = 64.0;
    let theta = 1.0;
    let fam = stopping_time(&t, 0, &mu, k0, theta).unwrap();
    let brute = brute_stopping(&t, 0, &mu, k0 * fam.k1);
    assert_eq!(fam.cubes, brute);
    assert!(!fam.cubes.is_empty());
    // Ample contact: σ(Q0 ∖ ∪F) ≥ σ(Q0)/K1.
    let covered: f64 = fam.cubes.iter().map(|&q| t.sigma(q)).sum();
    assert!(1.0 - covered >= 1.0 / fam.k1 - 1e-12);
    // Density bracket on the sawtooth.
    for q in t.subtree(0) {
        if q == 0 || fam.cubes.iter().any(|&f| t.is_descendant(q, f)) {
            continue;
        }
        let r = mu[q] / t.sigma(q);
        assert!((0.5 - 1e-9..=k0 * fam.k1 * (1.0 + 1e-9)).contains(&r));
    }
}

#[test]
fn stopping_time_depends_only_on_ratios() {
    let t = SyntheticTree::binary(5);
    let mut scaled = SyntheticTree::binary(5);
    for s in scaled.sigma.iter_mut() {
        *s *= 7.25;
    }
    let mu = measure_from_leaves(&t, |q| if q % 3 == 0 { 0.052 } else { 0.021 });
    let total = mu[0];
    let mu: Vec<f64> = mu.iter().map(|m| m / total).collect();
    let mu_scaled: Vec<f64> = mu.iter().map(|m| m * 7.25).collect();
    let a = stopping_time(&t, 0, &mu, 8.0, 1.0).unwrap();
    let b = stopping_time(&scaled, 0, &mu_scaled, 8.0, 1.0).unwrap();
    assert_eq!(a.cubes, b.cubes);
}

#[test]
fn stopping_time_rejects_bad_hypothesis() {
    let t = SyntheticTree::binary(5);
    // All the mass on one leaf with K0 too small for the A∞ bound.
    let leaf = t.len() - 1;
    let mu = measure_from_leaves(&t, |q| if q == leaf { 1.0 } else { 0.0 });
    let err = stopping_time(&t, 0, &mu, 1.5, 1.0);
    assert!(matches!(err, Err(Error::Precondition(_))), "{err:?}");
}

#[test]
fn sawtooth_to_carleson_zero_and_antichain() {
    let t = SyntheticTree::binary(6);
    let zero = DiscreteMeasure::zeros(&t);
    let (bound, _) = sawtooth_to_carleson(&t, &zero, 0, |_| Vec::new(), 2.0, 0.0).unwrap();
    assert_eq!(bound, 0.0);

    // α = σ on one antichain (generation 3): sawtooth masses stay ≤ σ(Q0).
    let alpha: Vec<f64> = (0..t.len())
        .map(|q| if t.generation[q] == 3 { t.sigma(q) } else { 0.0 })
        .collect();
    let m = DiscreteMeasure::from_alpha(alpha).unwrap();
    let (bound, records) = sawtooth_to_carleson(&t, &m, 0, |_| Vec::new(), 2.0, 1.0).unwrap();
    assert!((bound - 2.0).abs() < 1e-15);
    assert_eq!(records.len(), t.len());
    let norm = carleson_norm(&t, &m, 0);
    assert!(norm <= bound + 1e-12 && (norm - 1.0).abs() < 1e-12);
}

#[test]
fn sawtooth_mass_excludes_stopped_subtrees() {
    let t = SyntheticTree::binary(6);
    // Oracle stops at the leftmost child.
    let oracle = |q0: usize| {
        let kids = t.children(q0);
        if kids.is_empty() {
            Vec::new()
        } else {
            vec![kids[0]]
        }
    };
    let mut rng = Rng::new(31);
    let base: Vec<f64> = (0..t.len()).map(|_| rng.uniform() * 0.01).collect();
    // Pile adversarial mass strictly below the root's stopping cube.
    let child0 = t.children(0)[0];
    let mut adversarial = base.clone();
    for q in t.subtree(child0) {
        if q != child0 {
            adversarial[q] += 50.0;
        }
    }
    let mb = DiscreteMeasure::from_alpha(base).unwrap();
    let ma = DiscreteMeasure::from_alpha(adversarial).unwrap();
    let sums_b = subtree_sums(&t, &mb);
    let sums_a = subtree_sums(&t, &ma);
    // Every root whose sawtooth excludes the pile sees identical mass.
    let child1 = t.children(0)[1];
    let mut roots = vec![0usize];
    roots.extend(t.subtree(child1));
    for q0 in roots {
        let fam = oracle(q0);
        let mass_b = sums_b[q0] - fam.iter().map(|&f| sums_b[f]).sum::<f64>();
        let mass_a = sums_a[q0] - fam.iter().map(|&f| sums_a[f]).sum::<f64>();
        assert!(
            (mass_a - mass_b).abs() < 1e-10,
            "adversarial mass leaked into the sawtooth at Q0 = {q0}"
        );
    }
}

#[test]
fn sawtooth_certification_failure_names_root() {
    let t = SyntheticTree::binary(4);
    // Families that swallow the whole cube violate ample contact.
    let oracle = |q0: usize| t.children(q0).to_vec();
    let alpha: Vec<f64> = vec![0.0; t.len()];
    let m = DiscreteMeasure::from_alpha(alpha).unwrap();
    let err = sawtooth_to_carleson(&t, &m, 0, oracle, 2.0, 1.0);
    match err {
        Err(Error::Certification(msg)) => assert!(msg.contains("Q0 = 0"), "{msg}"),
        other => panic!("expected certification failure, got {other:?}"),
    }
}

#[test]
fn packing_on_synthetic_families() {
    let t = SyntheticTree::binary(6);
    assert_eq!(packing_test(&t, &[]).m1_hat, 0.0);
    // One full generation under the root packs to exactly 1.
    let slice: Vec<usize> = t
        .subtree(0)
        .into_iter()
        .filter(|&q| t.generation[q] == 4)
        .collect();
    let rep = packing_test(&t, &slice);
    assert!((rep.m1_hat - 1.0).abs() < 1e-12, "{}", rep.m1_hat);
    // Two generations pack to 2, realized at the root.
    let two: Vec<usize> = t
        .subtree(0)
        .into_iter()
        .filter(|&q| t.generation[q] == 4 || t.generation[q] == 5)
        .collect();
    let rep = packing_test(&t, &two);
    assert!((rep.m1_hat - 2.0).abs() < 1e-12);
}

#[test]
fn corkscrew_extraction_on_disk_grid() {
    let d = crate::boundary::shapes::disk(1024, 1e-3);
    let grid = crate::dyadic::build_grid(&d, 8).unwrap();
    // B = ∅: the maximal subcube inside Δ_Q itself is good.
    let q = grid.by_generation[2][1];
    let (good, c0p) = corkscrew_from_packing(&d, &grid, q, 2.0, &[], 1.0 / 32.0).unwrap();
    assert!(grid.is_descendant(good, q));
    assert!((c0p - (1.0 / 32.0) * grid.constants.c_ball * 0.25).abs() < 1e-12);

    // B = generations 0..1 below Q1 forces descent to generation 2.
    let cube_q = grid.cube(q);
    let mut q1_guess: Option<usize> = None;
    let mut stack = vec![q];
    while let Some(c) = stack.pop() {
        let cc = grid.cube(c);
        let inside = cc
            .atom_ids()
            .into_iter()
            .all(|a| crate::geom::dist(d.atoms.pos[a as usize], cube_q.center) < cube_q.radius);
        if inside {
            if q1_guess
                .map(|p| cc.length > grid.cube(p).length)
                .unwrap_or(true)
            {
                q1_guess = Some(c);
            }
            continue;
        }
        stack.extend(cc.children.iter().copied());
    }
    let q1 = q1_guess.unwrap();
    let mut bad = vec![q1];
    bad.extend(grid.cube(q1).children.iter().copied());
    let (good2, _) = corkscrew_from_packing(&d, &grid, q, 2.0, &bad, 1.0 / 32.0).unwrap();
    let gen_gap = grid.cube(good2).generation - grid.cube(q1).generation;
    assert_eq!(gen_gap, 2);

    // A packing-violating family triggers the contradiction error.
    let all_bad: Vec<usize> = grid.subtree(q1);
    assert!(matches!(
        corkscrew_from_packing(&d, &grid, q, 2.0, &all_bad, 1.0 / 32.0),
        Err(Error::Contradiction(_))
    ));
}

#[test]
fn measure_csv_round_trip() {
    let t = SyntheticTree::binary(4);
    let mut rng = Rng::new(8);
    let alpha: Vec<f64> = (0..t.len())
        .map(|_| if rng.uniform() < 0.3 { rng.uniform() } else { 0.0 })
        .collect();
    let m = DiscreteMeasure::from_alpha(alpha.clone()).unwrap();
    let csv = m.to_csv();
    let back = DiscreteMeasure::from_csv(&csv, t.len()).unwrap();
    for q in 0..t.len() {
        assert!((back.alpha[q] - alpha[q]).abs() < 1e-15);
    }
    assert!(DiscreteMeasure::from_alpha(vec![-1.0]).is_err());
}
