use proptest::prelude::*;
use toric_bath::couplings::{build_kernel, build_pattern_square, CouplingPattern, ModelParams};
use toric_bath::decoder::{decode, extract_syndrome, is_logical_failure, ErrorSet};
use toric_bath::dynamics::{kmc_step, trajectory_rng, KmcState, Simulation, StepOutcome};
use toric_bath::energetics::{
    config_energy, mf_residual, move_delta, solve_self_consistent, AnyonConfig,
};
use toric_bath::geometry::{CodeLattice, Flip, Species};

fn flip_strategy(l: usize) -> impl Strategy<Value = Flip> {
    (0..2 * l * l, prop::bool::ANY).prop_map(|(spin, s)| Flip {
        spin,
        species: if s { Species::S } else { Species::P },
    })
}

fn error_set(lattice: &CodeLattice, flips: &[Flip]) -> ErrorSet {
    let mut e = ErrorSet::empty(lattice);
    for &f in flips {
        e.toggle(f);
    }
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn move_delta_matches_recomputation(
        occupied in prop::collection::btree_set(0usize..128, 0..20),
        flip in flip_strategy(8),
        a in 0.2f64..2.0,
    ) {
        let lat = CodeLattice::new(8).unwrap();
        let k = build_kernel(&lat, &CouplingPattern::uniform(&lat, a), &ModelParams::new(a, 1.0, 1.0, 8)).unwrap();
        let sites: Vec<usize> = occupied.into_iter().collect();
        let before = AnyonConfig::from_occupied(&lat, &sites).unwrap();
        let mut after = before.clone();
        after.apply_flip(&lat, flip);
        let direct = config_energy(&after, &k) - config_energy(&before, &k);
        let fast = move_delta(&before, &lat, flip, &k);
        prop_assert!((direct - fast).abs() <= 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn syndrome_is_linear(
        xs in prop::collection::vec(flip_strategy(6), 0..15),
        ys in prop::collection::vec(flip_strategy(6), 0..15),
    ) {
        let lat = CodeLattice::new(6).unwrap();
        let x = error_set(&lat, &xs);
        let y = error_set(&lat, &ys);
        let sx = extract_syndrome(&x, &lat);
        let sy = extract_syndrome(&y, &lat);
        let sxy = extract_syndrome(&x.xor(&y), &lat);
        for species in Species::BOTH {
            let mut expect: Vec<usize> = sx.get(species).to_vec();
            for &q in sy.get(species) {
                if let Some(i) = expect.iter().position(|&v| v == q) {
                    expect.remove(i);
                } else {
                    expect.push(q);
                }
            }
            expect.sort_unstable();
            let mut got = sxy.get(species).to_vec();
            got.sort_unstable();
            prop_assert_eq!(got, expect);
        }
    }

    #[test]
    fn decoding_clears_the_syndrome(xs in prop::collection::vec(flip_strategy(8), 0..12)) {
        let lat = CodeLattice::new(8).unwrap();
        let e = error_set(&lat, &xs);
        let c = decode(&extract_syndrome(&e, &lat), &lat).unwrap();
        prop_assert!(extract_syndrome(&e.xor(&c), &lat).is_empty());
        prop_assert!(is_logical_failure(&e, &c, &lat).is_ok());
    }

    #[test]
    fn path_length_is_a_metric(a in 0usize..100, b in 0usize..100, c in 0usize..100) {
        let lat = CodeLattice::new(10).unwrap();
        prop_assert_eq!(lat.path_length(a, b), lat.path_length(b, a));
        prop_assert_eq!(lat.path_length(a, a), 0);
        prop_assert!(lat.path_length(a, c) <= lat.path_length(a, b) + lat.path_length(b, c));
    }

    #[test]
    fn kernel_is_bilinear(scale in 0.1f64..5.0, aw in 0.1f64..1.0) {
        let lat = CodeLattice::new(8).unwrap();
        let base = build_pattern_square(&lat, 1.0, aw).unwrap();
        let scaled = build_pattern_square(&lat, scale, scale * aw).unwrap();
        let p = ModelParams::new(1.0, 1.0, 1.0, 8);
        let k1 = build_kernel(&lat, &base, &p).unwrap();
        let k2 = build_kernel(&lat, &scaled, &p).unwrap();
        let s2 = scale * scale;
        for q in (0..lat.num_stabilizers()).step_by(7) {
            prop_assert!((k2.mu(q) - s2 * k1.mu(q)).abs() <= 1e-10 * k2.mu(q));
            let r = (q * 13 + 5) % lat.num_stabilizers();
            prop_assert!((k2.pair(q, r) - s2 * k1.pair(q, r)).abs() <= 1e-12 * (1.0 + k2.pair(q, r).abs()));
        }
    }

    #[test]
    fn mean_field_roots_are_symmetric(bd in 0.1f64..12.0) {
        let sol = solve_self_consistent(bd, 1e-10).unwrap();
        let n = sol.roots.len();
        prop_assert!(n == 1 || n == 3);
        for (i, r) in sol.roots.iter().enumerate() {
            prop_assert!((r + sol.roots[n - 1 - i] - 1.0).abs() < 1e-12);
            prop_assert!(mf_residual(*r, bd).abs() < 1e-10);
        }
    }

    #[test]
    fn kmc_energy_is_consistent(seed in 0u64..1000) {
        let sim = Simulation::uniform(ModelParams::new(1.0, 1.0, 0.1, 6)).unwrap();
        let mut state = KmcState::vacuum(&sim);
        let mut rng = trajectory_rng(seed, 0);
        let mut cumulative = 0.0;
        for _ in 0..300 {
            match kmc_step(&mut state, &sim, f64::INFINITY, &mut rng) {
                StepOutcome::Event(e) => cumulative += e.delta_e,
                _ => break,
            }
        }
        let direct = config_energy(&state.config, &sim.kernel);
        prop_assert!((direct - cumulative).abs() <= 1e-9 * (1.0 + direct.abs()));
        prop_assert!((state.energy - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
    }
}
