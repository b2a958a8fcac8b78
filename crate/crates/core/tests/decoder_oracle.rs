use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toric_bath::decoder::{
    decode, extract_syndrome, is_logical_failure, match_anyons, matching_weight, ErrorSet,
};
use toric_bath::geometry::{CodeLattice, Flip, Species};

/// Minimum perfect matching weight by dynamic programming over subsets.
fn dp_minimum(anyons: &[usize], lattice: &CodeLattice) -> usize {
    let n = anyons.len();
    let full = (1usize << n) - 1;
    let mut best = vec![usize::MAX; 1 << n];
    best[0] = 0;
    for mask in 0..=full {
        if best[mask] == usize::MAX {
            continue;
        }
        let Some(i) = (0..n).find(|&i| mask & (1 << i) == 0) else {
            continue;
        };
        for j in i + 1..n {
            if mask & (1 << j) == 0 {
                let next = mask | (1 << i) | (1 << j);
                let w = best[mask] + lattice.path_length(anyons[i], anyons[j]);
                best[next] = best[next].min(w);
            }
        }
    }
    best[full]
}

#[test]
fn exact_matching_is_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..100 {
        let l = [6, 8, 10][case % 3];
        let lat = CodeLattice::new(l).unwrap();
        let k = 2 * rng.random_range(1..=4);
        let species = if case % 2 == 0 {
            Species::S
        } else {
            Species::P
        };
        let base = lat.species_range(species).start;
        let anyons: Vec<usize> = sample(&mut rng, lat.cells(), k)
            .into_iter()
            .map(|i| base + i)
            .collect();
        let pairs = match_anyons(&anyons, &lat);
        assert_eq!(pairs.len(), k / 2);
        let mut covered: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        covered.sort_unstable();
        let mut expected = anyons.clone();
        expected.sort_unstable();
        assert_eq!(covered, expected);
        assert_eq!(
            matching_weight(&pairs, &lat),
            dp_minimum(&anyons, &lat),
            "case {case}: {anyons:?}"
        );
    }
}

#[test]
fn error_equal_to_correction_never_fails() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lat = CodeLattice::new(8).unwrap();
    for _ in 0..100 {
        let mut e = ErrorSet::empty(&lat);
        for _ in 0..rng.random_range(0..6) {
            let species = if rng.random() { Species::S } else { Species::P };
            e.toggle(Flip {
                spin: rng.random_range(0..lat.num_spins()),
                species,
            });
        }
        let f = is_logical_failure(&e, &e, &lat).unwrap();
        assert!(!f.any());
    }
}

#[test]
fn isolated_short_errors_are_corrected() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let lat = CodeLattice::new(8).unwrap();
    for _ in 0..200 {
        let mut e = ErrorSet::empty(&lat);
        let species = if rng.random() { Species::S } else { Species::P };
        e.toggle(Flip {
            spin: rng.random_range(0..lat.num_spins()),
            species,
        });
        let c = decode(&extract_syndrome(&e, &lat), &lat).unwrap();
        assert!(!is_logical_failure(&e, &c, &lat).unwrap().any());
        assert_eq!(c.weight(), 1);
    }
}
