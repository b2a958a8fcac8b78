//! Syndrome extraction, minimum-weight matching and logical-failure checks.
//!
//! Matching weights are the number of spins on a shortest error path
//! (toroidal Manhattan distance on one species' graph). Syndromes with at
//! most [`EXACT_LIMIT`] anyons per species are matched exactly by
//! enumerating every pairing; larger ones fall back to greedy closest-pair
//! matching, which is not optimal in general.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CodeLattice, Direction, Flip, Species};

pub const EXACT_LIMIT: usize = 10;

/// Cumulative spin flips, one bit per (spin, species).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorSet {
    flips: [Vec<bool>; 2],
}

/// Plain list form of an [`ErrorSet`], used for JSON input and output.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorList {
    #[serde(default)]
    pub s: Vec<usize>,
    #[serde(default)]
    pub p: Vec<usize>,
}

impl ErrorSet {
    pub fn empty(lattice: &CodeLattice) -> Self {
        let n = lattice.num_spins();
        Self {
            flips: [vec![false; n], vec![false; n]],
        }
    }

    pub fn from_list(lattice: &CodeLattice, list: &ErrorList) -> Result<Self> {
        let mut e = Self::empty(lattice);
        for (species, spins) in [(Species::S, &list.s), (Species::P, &list.p)] {
            for &spin in spins {
                if spin >= lattice.num_spins() {
                    return Err(crate::error::invalid(
                        "spin",
                        format!("spin {spin} out of range"),
                    ));
                }
                e.toggle(Flip { spin, species });
            }
        }
        Ok(e)
    }

    pub fn to_list(&self) -> ErrorList {
        ErrorList {
            s: self.spins(Species::S),
            p: self.spins(Species::P),
        }
    }

    pub fn toggle(&mut self, flip: Flip) {
        let b = &mut self.flips[flip.species.index()][flip.spin];
        *b = !*b;
    }

    pub fn contains(&self, flip: Flip) -> bool {
        self.flips[flip.species.index()][flip.spin]
    }

    /// Flipped spins of one species, ascending.
    pub fn spins(&self, species: Species) -> Vec<usize> {
        self.flips[species.index()]
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.flips
            .iter()
            .map(|v| v.iter().filter(|&&b| b).count())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.weight() == 0
    }

    /// Symmetric difference.
    pub fn xor(&self, other: &ErrorSet) -> ErrorSet {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn xor_assign(&mut self, other: &ErrorSet) {
        for s in 0..2 {
            for (a, b) in self.flips[s].iter_mut().zip(&other.flips[s]) {
                *a ^= *b;
            }
        }
    }
}

/// Occupied stabilizers per species, ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syndrome {
    pub s: Vec<usize>,
    pub p: Vec<usize>,
}

impl Syndrome {
    pub fn get(&self, species: Species) -> &[usize] {
        match species {
            Species::S => &self.s,
            Species::P => &self.p,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty() && self.p.is_empty()
    }

    pub fn from_sites(lattice: &CodeLattice, sites: &[usize]) -> Self {
        let mut s: Vec<usize> = sites
            .iter()
            .copied()
            .filter(|&q| q < lattice.cells())
            .collect();
        let mut p: Vec<usize> = sites
            .iter()
            .copied()
            .filter(|&q| q >= lattice.cells())
            .collect();
        s.sort_unstable();
        p.sort_unstable();
        Self { s, p }
    }
}

pub fn extract_syndrome(errors: &ErrorSet, lattice: &CodeLattice) -> Syndrome {
    let mut parity = vec![false; lattice.num_stabilizers()];
    for species in Species::BOTH {
        for (spin, &b) in errors.flips[species.index()].iter().enumerate() {
            if b {
                for q in lattice.flip_targets(Flip { spin, species }) {
                    parity[q] ^= true;
                }
            }
        }
    }
    let occupied: Vec<usize> = parity
        .iter()
        .enumerate()
        .filter_map(|(q, &b)| b.then_some(q))
        .collect();
    Syndrome::from_sites(lattice, &occupied)
}

/// Total path length of a set of pairs.
pub fn matching_weight(pairs: &[(usize, usize)], lattice: &CodeLattice) -> usize {
    pairs.iter().map(|&(a, b)| lattice.path_length(a, b)).sum()
}

/// Minimum-weight perfect matching of `anyons` (sorted, even length).
///
/// Exact for up to [`EXACT_LIMIT`] anyons; among optimal pairings the
/// lexicographically smallest (by stabilizer index) is returned.
pub fn match_anyons(anyons: &[usize], lattice: &CodeLattice) -> Vec<(usize, usize)> {
    let n = anyons.len();
    if n == 0 {
        return Vec::new();
    }
    if n > EXACT_LIMIT {
        return greedy_matching(anyons, lattice);
    }
    let mut w = vec![0usize; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = lattice.path_length(anyons[i], anyons[j]);
        }
    }
    let mut used = vec![false; n];
    let mut current = Vec::with_capacity(n / 2);
    let mut best: Option<(usize, Vec<(usize, usize)>)> = None;
    enumerate(&w, n, &mut used, &mut current, 0, &mut best);
    let (_, pairs) = best.expect("even anyon count has a pairing");
    pairs
        .into_iter()
        .map(|(i, j)| (anyons[i], anyons[j]))
        .collect()
}

// Pairings are produced in lexicographic order, so keeping only strict
// improvements selects the lexicographically smallest optimum.
fn enumerate(
    w: &[usize],
    n: usize,
    used: &mut [bool],
    current: &mut Vec<(usize, usize)>,
    weight: usize,
    best: &mut Option<(usize, Vec<(usize, usize)>)>,
) {
    if let Some((bw, _)) = best {
        if weight >= *bw {
            return;
        }
    }
    let Some(i) = used.iter().position(|&u| !u) else {
        *best = Some((weight, current.clone()));
        return;
    };
    used[i] = true;
    for j in i + 1..n {
        if used[j] {
            continue;
        }
        used[j] = true;
        current.push((i, j));
        enumerate(w, n, used, current, weight + w[i * n + j], best);
        current.pop();
        used[j] = false;
    }
    used[i] = false;
}

/// Repeatedly pairs the globally closest remaining anyons.
pub fn greedy_matching(anyons: &[usize], lattice: &CodeLattice) -> Vec<(usize, usize)> {
    let mut left: Vec<usize> = anyons.to_vec();
    left.sort_unstable();
    let mut pairs = Vec::with_capacity(left.len() / 2);
    while left.len() >= 2 {
        let mut best = (usize::MAX, 0, 1);
        for i in 0..left.len() {
            for j in i + 1..left.len() {
                let d = lattice.path_length(left[i], left[j]);
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        let (_, i, j) = best;
        pairs.push((left[i], left[j]));
        left.remove(j);
        left.remove(i);
    }
    pairs
}

/// Spins of an L-shaped shortest path from `a` to `b`: first x, then y.
pub fn correction_path(a: usize, b: usize, lattice: &CodeLattice) -> Vec<usize> {
    let species = lattice.species_of(a);
    let l = lattice.l as i64;
    let (dx, dy) = lattice.toroidal_displacement(a, b);
    let (mut i, mut j) = {
        let (i, j) = lattice.stabilizers[a].cell;
        (i as i64, j as i64)
    };
    let idx = |i: i64, j: i64| {
        lattice.stabilizer_index(species, i.rem_euclid(l) as usize, j.rem_euclid(l) as usize)
    };
    let mut spins = Vec::with_capacity((dx.abs() + dy.abs()) as usize);
    for (delta, dir) in [(dx, Direction::X), (dy, Direction::Y)] {
        let step = delta.signum();
        for _ in 0..delta.abs() {
            let (ni, nj) = match dir {
                Direction::X => (i + step, j),
                Direction::Y => (i, j + step),
            };
            // The spin between two neighbours is owned by the lower one.
            let from = if step > 0 { idx(i, j) } else { idx(ni, nj) };
            spins.push(lattice.step_spin(from, dir));
            i = ni;
            j = nj;
        }
    }
    spins
}

pub fn decode(syndrome: &Syndrome, lattice: &CodeLattice) -> Result<ErrorSet> {
    let mut correction = ErrorSet::empty(lattice);
    for species in Species::BOTH {
        let anyons = syndrome.get(species);
        if !anyons.len().is_multiple_of(2) {
            return Err(Error::OddSyndrome(species));
        }
        for (a, b) in match_anyons(anyons, lattice) {
            for spin in correction_path(a, b, lattice) {
                correction.toggle(Flip { spin, species });
            }
        }
    }
    Ok(correction)
}

/// Syndrome-to-correction map used by the dynamics.
pub trait Decoder: Sync {
    fn correct(&self, syndrome: &Syndrome, lattice: &CodeLattice) -> Result<ErrorSet>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MatchingDecoder;

impl Decoder for MatchingDecoder {
    fn correct(&self, syndrome: &Syndrome, lattice: &CodeLattice) -> Result<ErrorSet> {
        decode(syndrome, lattice)
    }
}

/// Which logical operators the residual chain flips.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalFailure {
    pub s_x: bool,
    pub s_y: bool,
    pub p_x: bool,
    pub p_y: bool,
}

impl LogicalFailure {
    pub fn any(&self) -> bool {
        self.s_x || self.s_y || self.p_x || self.p_y
    }

    pub fn count(&self) -> usize {
        [self.s_x, self.s_y, self.p_x, self.p_y]
            .iter()
            .filter(|&&b| b)
            .count()
    }
}

/// Winding parities of `errors + correction`, which must be a closed chain.
///
/// A closed chain of one species wraps the torus along `x` an odd number of
/// times iff it crosses the other species' `y` representative an odd number
/// of times.
pub fn is_logical_failure(
    errors: &ErrorSet,
    correction: &ErrorSet,
    lattice: &CodeLattice,
) -> Result<LogicalFailure> {
    let combined = errors.xor(correction);
    if !extract_syndrome(&combined, lattice).is_empty() {
        return Err(Error::ResidualSyndrome);
    }
    Ok(winding(&combined, lattice))
}

pub(crate) fn winding(chain: &ErrorSet, lattice: &CodeLattice) -> LogicalFailure {
    let parity = |species: Species, rep_species: Species, dir: Direction| {
        lattice
            .logical_rep(rep_species, dir)
            .spins
            .iter()
            .filter(|&&spin| chain.contains(Flip { spin, species }))
            .count()
            % 2
            == 1
    };
    LogicalFailure {
        s_x: parity(Species::S, Species::P, Direction::Y),
        s_y: parity(Species::S, Species::P, Direction::X),
        p_x: parity(Species::P, Species::S, Direction::Y),
        p_y: parity(Species::P, Species::S, Direction::X),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flips(lattice: &CodeLattice, species: Species, spins: &[usize]) -> ErrorSet {
        let mut e = ErrorSet::empty(lattice);
        for &spin in spins {
            e.toggle(Flip { spin, species });
        }
        e
    }

    #[test]
    fn empty_error_has_empty_syndrome() {
        let lat = CodeLattice::new(6).unwrap();
        assert!(extract_syndrome(&ErrorSet::empty(&lat), &lat).is_empty());
    }

    #[test]
    fn single_flip_gives_two_anyons() {
        let lat = CodeLattice::new(6).unwrap();
        for species in Species::BOTH {
            for spin in 0..lat.num_spins() {
                let syn = extract_syndrome(&flips(&lat, species, &[spin]), &lat);
                assert_eq!(syn.get(species).len(), 2);
                assert!(syn.get(species.other()).is_empty());
            }
        }
    }

    #[test]
    fn logical_reps_are_silent() {
        let lat = CodeLattice::new(8).unwrap();
        for rep in &lat.logical_reps {
            let e = flips(&lat, rep.species, &rep.spins);
            assert!(extract_syndrome(&e, &lat).is_empty());
            let f = is_logical_failure(&e, &ErrorSet::empty(&lat), &lat).unwrap();
            assert_eq!(f.count(), 1);
        }
    }

    #[test]
    fn adjacent_pair_needs_one_flip() {
        let lat = CodeLattice::new(8).unwrap();
        let e = flips(&lat, Species::P, &[17]);
        let syn = extract_syndrome(&e, &lat);
        let c = decode(&syn, &lat).unwrap();
        assert_eq!(c.weight(), 1);
        assert_eq!(c, e);
        assert!(!is_logical_failure(&e, &c, &lat).unwrap().any());
    }

    #[test]
    fn error_equal_to_correction_is_not_failure() {
        let lat = CodeLattice::new(6).unwrap();
        let e = flips(&lat, Species::S, &[0, 7, 30]);
        assert!(!is_logical_failure(&e, &e, &lat).unwrap().any());
    }

    #[test]
    fn residual_syndrome_rejected() {
        let lat = CodeLattice::new(6).unwrap();
        let e = flips(&lat, Species::S, &[3]);
        assert_eq!(
            is_logical_failure(&e, &ErrorSet::empty(&lat), &lat),
            Err(Error::ResidualSyndrome)
        );
    }

    #[test]
    fn odd_syndrome_rejected() {
        let lat = CodeLattice::new(6).unwrap();
        let syn = Syndrome {
            s: vec![0],
            p: vec![],
        };
        assert_eq!(decode(&syn, &lat), Err(Error::OddSyndrome(Species::S)));
    }

    #[test]
    fn square_tie_break_is_lexicographic() {
        let lat = CodeLattice::new(8).unwrap();
        let q = |i, j| lat.stabilizer_index(Species::S, i, j);
        let anyons = {
            let mut v = vec![q(3, 3), q(5, 3), q(3, 5), q(5, 5)];
            v.sort_unstable();
            v
        };
        let m = match_anyons(&anyons, &lat);
        assert_eq!(matching_weight(&m, &lat), 4);
        assert_eq!(m, vec![(anyons[0], anyons[1]), (anyons[2], anyons[3])]);
    }

    #[test]
    fn correction_paths_have_shortest_length() {
        let lat = CodeLattice::new(8).unwrap();
        for species in Species::BOTH {
            for a in lat.species_range(species) {
                for b in lat.species_range(species).step_by(5) {
                    let path = correction_path(a, b, &lat);
                    assert_eq!(path.len(), lat.path_length(a, b));
                    let syn = extract_syndrome(&flips(&lat, species, &path), &lat);
                    let mut expected = if a == b { vec![] } else { vec![a, b] };
                    expected.sort_unstable();
                    assert_eq!(syn.get(species), expected.as_slice());
                }
            }
        }
    }

    #[test]
    fn greedy_used_beyond_limit() {
        let lat = CodeLattice::new(16).unwrap();
        let anyons: Vec<usize> = (0..12)
            .map(|i| lat.stabilizer_index(Species::S, i, 0))
            .collect();
        let m = match_anyons(&anyons, &lat);
        assert_eq!(m.len(), 6);
        assert_eq!(matching_weight(&m, &lat), 6);
    }

    #[test]
    fn list_round_trip() {
        let lat = CodeLattice::new(4).unwrap();
        let list = ErrorList {
            s: vec![1, 5],
            p: vec![2],
        };
        let e = ErrorSet::from_list(&lat, &list).unwrap();
        assert_eq!(e.to_list(), list);
        assert!(ErrorSet::from_list(
            &lat,
            &ErrorList {
                s: vec![99],
                p: vec![]
            }
        )
        .is_err());
    }
}
