use std::collections::VecDeque;

use toric_bath::couplings::{
    build_kernel, build_pattern_square, lattice_sum_inverse_r, square_integral_constant,
    CouplingPattern, ModelParams,
};
use toric_bath::geometry::{CodeLattice, Species};
use toric_bath::stats::linear_fit;

/// Same-species stabilizers reachable from `start` by at most `depth`
/// single-spin anyon moves, never stepping onto a strong plaquette.
fn reachable_through_weak(
    lat: &CodeLattice,
    pattern: &CouplingPattern,
    start: usize,
    depth: usize,
) -> Vec<usize> {
    let mut dist = vec![usize::MAX; lat.num_stabilizers()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut out = Vec::new();
    while let Some(q) = queue.pop_front() {
        if dist[q] == depth {
            continue;
        }
        for n in lat.neighbours(q) {
            if dist[n] != usize::MAX {
                continue;
            }
            dist[n] = dist[q] + 1;
            // Landing on a strong plaquette ends the path.
            if pattern.is_weak(n) {
                out.push(n);
                queue.push_back(n);
            }
        }
    }
    out
}

#[test]
fn weak_regions_are_isolated_at_l8() {
    let lat = CodeLattice::new(8).unwrap();
    let pattern = build_pattern_square(&lat, 1.0, 0.5).unwrap();
    let mut checked = 0;
    for q in 0..lat.num_stabilizers() {
        if !pattern.is_weak(q) {
            continue;
        }
        for r in reachable_through_weak(&lat, &pattern, q, 2) {
            assert_eq!(pattern.weak_region[q], pattern.weak_region[r], "{q} -> {r}");
            checked += 1;
        }
        for r in lat.species_range(lat.species_of(q)) {
            if pattern.is_weak(r) && pattern.weak_region[r] != pattern.weak_region[q] {
                assert!(lat.path_length(q, r) >= 3);
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn quarter_of_each_species_is_weak() {
    for l in [4, 8, 12, 16] {
        let lat = CodeLattice::new(l).unwrap();
        let pattern = build_pattern_square(&lat, 1.0, 0.3).unwrap();
        for species in Species::BOTH {
            let weak = lat
                .species_range(species)
                .filter(|&q| pattern.is_weak(q))
                .count();
            assert_eq!(4 * weak, l * l);
        }
    }
}

#[test]
fn chemical_potential_ratio_follows_amplitudes() {
    let lat = CodeLattice::new(8).unwrap();
    for aw in [0.8, 0.5, 0.3] {
        let pattern = build_pattern_square(&lat, 1.0, aw).unwrap();
        let k = build_kernel(&lat, &pattern, &ModelParams::new(1.0, 1.0, 1.0, 8)).unwrap();
        let c = lat.center_stabilizer();
        let nearest = |weak: bool| {
            (0..lat.num_stabilizers())
                .filter(|&q| pattern.is_weak(q) == weak)
                .min_by(|&a, &b| {
                    lat.planar_distance(a, c)
                        .total_cmp(&lat.planar_distance(b, c))
                })
                .unwrap()
        };
        let ratio = k.mu(nearest(false)) / k.mu(nearest(true));
        assert!((ratio * aw - 1.0).abs() < 0.05, "aw {aw}: ratio {ratio}");
    }
}

#[test]
fn strong_weak_gap_grows_linearly() {
    let sizes = [8, 16, 24, 32];
    let gaps: Vec<f64> = sizes
        .iter()
        .map(|&l| {
            let lat = CodeLattice::new(l).unwrap();
            let pattern = build_pattern_square(&lat, 1.0, 0.5).unwrap();
            let k = build_kernel(&lat, &pattern, &ModelParams::new(1.0, 1.0, 1.0, l)).unwrap();
            let s = lat.stabilizer_index(Species::S, l / 2 + 2, l / 2);
            let w = lat.stabilizer_index(Species::S, l / 2, l / 2);
            assert!(!pattern.is_weak(s) && pattern.is_weak(w));
            k.mu(s) - k.mu(w)
        })
        .collect();
    let xs: Vec<f64> = sizes.iter().map(|&l| l as f64).collect();
    let fit = linear_fit(&xs, &gaps).unwrap();
    assert!(fit.slope > 0.0 && fit.r_squared > 0.99, "{fit:?}");
}

#[test]
fn inverse_r_sum_is_linear_with_continuum_slope() {
    let sizes = [8usize, 16, 32, 64];
    let sums: Vec<f64> = sizes
        .iter()
        .map(|&l| lattice_sum_inverse_r(l, 1).unwrap())
        .collect();
    let xs: Vec<f64> = sizes.iter().map(|&l| l as f64).collect();
    let fit = linear_fit(&xs, &sums).unwrap();
    assert!(fit.r_squared > 0.999);
    let c2 = 2.0 * square_integral_constant();
    assert!(
        (fit.slope / c2 - 1.0).abs() < 0.05,
        "slope {} vs {c2}",
        fit.slope
    );
}

#[test]
fn inverse_r2_sum_grows_logarithmically() {
    let s: Vec<f64> = [16usize, 32, 64, 128]
        .iter()
        .map(|&l| lattice_sum_inverse_r(l, 2).unwrap())
        .collect();
    let d: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    assert!((d[2] - d[1]).abs() < (d[1] - d[0]).abs() + 1e-12);
    assert!((d[2] / d[1] - 1.0).abs() < 0.02, "{d:?}");
}

#[test]
fn center_mu_is_monotone_in_l() {
    let mut last = 0.0;
    for l in [4, 8, 12, 16, 24] {
        let lat = CodeLattice::new(l).unwrap();
        let k = build_kernel(
            &lat,
            &CouplingPattern::uniform(&lat, 1.0),
            &ModelParams::new(1.0, 1.0, 1.0, l),
        )
        .unwrap();
        let mu = k.mu(lat.center_stabilizer());
        assert!(mu > last);
        assert!(k.mu(lat.corner_stabilizer()) < mu);
        last = mu;
    }
}
