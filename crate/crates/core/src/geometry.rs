//! Toric-code lattice: spins, stabilizers, logical representatives and distances.
//!
//! The code is a checkerboard of square plaquettes with spins on the shared
//! corners. `s`-stabilizers sit at integer positions `(i, j)` and
//! `p`-stabilizers at `(i + 1/2, j + 1/2)`, so the combined stabilizer
//! lattice has areal density 2. Every spin is a corner of two `s`- and two
//! `p`-plaquettes. There are two spin orientations:
//!
//! ```text
//!   H(i, j) at (i + 1/2, j)   s: (i, j), (i + 1, j)   p: (i, j), (i, j - 1)
//!   V(i, j) at (i, j + 1/2)   s: (i, j), (i, j + 1)   p: (i, j), (i - 1, j)
//! ```
//!
//! Seen from one species, the stabilizers form an `L x L` periodic square
//! graph whose edges are the spins. A Pauli flip of a given species toggles
//! the two stabilizers of that species adjacent to the spin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    /// Star-type plaquettes, host `e` anyons.
    S,
    /// Plaquette-type plaquettes, host `m` anyons.
    P,
}

impl Species {
    pub const BOTH: [Species; 2] = [Species::S, Species::P];

    pub fn index(self) -> usize {
        match self {
            Species::S => 0,
            Species::P => 1,
        }
    }

    pub fn other(self) -> Species {
        match self {
            Species::S => Species::P,
            Species::P => Species::S,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinKind {
    /// Spin on a horizontal bond of the `s` graph, at `(i + 1/2, j)`.
    H,
    /// Spin on a vertical bond of the `s` graph, at `(i, j + 1/2)`.
    V,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spin {
    pub kind: SpinKind,
    pub cell: (usize, usize),
    pub position: [f64; 2],
    /// The two `s`-stabilizers toggled by an `s`-species flip.
    pub s_stabilizers: [usize; 2],
    /// The two `p`-stabilizers toggled by a `p`-species flip.
    pub p_stabilizers: [usize; 2],
}

impl Spin {
    pub fn stabilizers(&self, species: Species) -> [usize; 2] {
        match species {
            Species::S => self.s_stabilizers,
            Species::P => self.p_stabilizers,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stabilizer {
    pub species: Species,
    pub cell: (usize, usize),
    pub position: [f64; 2],
    /// Position in half lattice constants; exact integers for table lookups.
    pub half_position: [i64; 2],
    pub spins: [usize; 4],
}

/// A single-spin Pauli process: flips `spin` in the sector of `species`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Flip {
    pub spin: usize,
    pub species: Species,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    X,
    Y,
}

/// Shortest homologically nontrivial cycle of one species' error graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogicalRep {
    pub species: Species,
    pub direction: Direction,
    pub spins: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeLattice {
    pub l: usize,
    pub spins: Vec<Spin>,
    pub stabilizers: Vec<Stabilizer>,
    pub logical_reps: Vec<LogicalRep>,
}

impl CodeLattice {
    /// Builds the periodic lattice of linear size `l` (even, at least 2).
    pub fn new(l: usize) -> Result<Self> {
        if l < 2 || !l.is_multiple_of(2) {
            return Err(Error::InvalidSize(l));
        }
        let n = l * l;
        let cell = |i: usize, j: usize| j * l + i;
        let up = |i: usize| (i + 1) % l;
        let down = |i: usize| (i + l - 1) % l;

        let mut spins = Vec::with_capacity(2 * n);
        for j in 0..l {
            for i in 0..l {
                spins.push(Spin {
                    kind: SpinKind::H,
                    cell: (i, j),
                    position: [i as f64 + 0.5, j as f64],
                    s_stabilizers: [cell(i, j), cell(up(i), j)],
                    p_stabilizers: [n + cell(i, j), n + cell(i, down(j))],
                });
                spins.push(Spin {
                    kind: SpinKind::V,
                    cell: (i, j),
                    position: [i as f64, j as f64 + 0.5],
                    s_stabilizers: [cell(i, j), cell(i, up(j))],
                    p_stabilizers: [n + cell(i, j), n + cell(down(i), j)],
                });
            }
        }

        let h = |i: usize, j: usize| 2 * cell(i, j);
        let v = |i: usize, j: usize| 2 * cell(i, j) + 1;
        let mut stabilizers = Vec::with_capacity(2 * n);
        for j in 0..l {
            for i in 0..l {
                stabilizers.push(Stabilizer {
                    species: Species::S,
                    cell: (i, j),
                    position: [i as f64, j as f64],
                    half_position: [2 * i as i64, 2 * j as i64],
                    spins: [h(i, j), h(down(i), j), v(i, j), v(i, down(j))],
                });
            }
        }
        for j in 0..l {
            for i in 0..l {
                stabilizers.push(Stabilizer {
                    species: Species::P,
                    cell: (i, j),
                    position: [i as f64 + 0.5, j as f64 + 0.5],
                    half_position: [2 * i as i64 + 1, 2 * j as i64 + 1],
                    spins: [h(i, j), h(i, up(j)), v(i, j), v(up(i), j)],
                });
            }
        }

        let logical_reps = vec![
            LogicalRep {
                species: Species::S,
                direction: Direction::X,
                spins: (0..l).map(|i| h(i, 0)).collect(),
            },
            LogicalRep {
                species: Species::S,
                direction: Direction::Y,
                spins: (0..l).map(|j| v(0, j)).collect(),
            },
            LogicalRep {
                species: Species::P,
                direction: Direction::X,
                spins: (0..l).map(|i| v(i, 0)).collect(),
            },
            LogicalRep {
                species: Species::P,
                direction: Direction::Y,
                spins: (0..l).map(|j| h(0, j)).collect(),
            },
        ];

        Ok(Self {
            l,
            spins,
            stabilizers,
            logical_reps,
        })
    }

    pub fn num_spins(&self) -> usize {
        self.spins.len()
    }

    pub fn num_stabilizers(&self) -> usize {
        self.stabilizers.len()
    }

    /// Stabilizers per species (`L^2`).
    pub fn cells(&self) -> usize {
        self.l * self.l
    }

    pub fn stabilizer_index(&self, species: Species, i: usize, j: usize) -> usize {
        species.index() * self.cells() + (j % self.l) * self.l + (i % self.l)
    }

    pub fn species_of(&self, stabilizer: usize) -> Species {
        self.stabilizers[stabilizer].species
    }

    pub fn species_range(&self, species: Species) -> std::ops::Range<usize> {
        let n = self.cells();
        species.index() * n..(species.index() + 1) * n
    }

    pub fn logical_rep(&self, species: Species, direction: Direction) -> &LogicalRep {
        self.logical_reps
            .iter()
            .find(|r| r.species == species && r.direction == direction)
            .expect("all four representatives are built")
    }

    /// Stabilizers toggled by a flip.
    pub fn flip_targets(&self, flip: Flip) -> [usize; 2] {
        self.spins[flip.spin].stabilizers(flip.species)
    }

    /// All `4 L^2` single-spin processes, spin-major.
    pub fn all_flips(&self) -> Vec<Flip> {
        (0..self.num_spins())
            .flat_map(|spin| Species::BOTH.map(|species| Flip { spin, species }))
            .collect()
    }

    /// Spin shared by two neighbouring same-species stabilizers `a -> b`
    /// where `b` sits one step along `direction` (positive sense) from `a`.
    pub fn step_spin(&self, from: usize, direction: Direction) -> usize {
        let st = &self.stabilizers[from];
        let (i, j) = st.cell;
        let l = self.l;
        let cell = |i: usize, j: usize| (j % l) * l + (i % l);
        match (st.species, direction) {
            (Species::S, Direction::X) => 2 * cell(i, j),
            (Species::S, Direction::Y) => 2 * cell(i, j) + 1,
            (Species::P, Direction::X) => 2 * cell(i + 1, j) + 1,
            (Species::P, Direction::Y) => 2 * cell(i, j + 1),
        }
    }

    /// Stabilizer closest to the geometric centre of the patch (lowest index on ties).
    pub fn center_stabilizer(&self) -> usize {
        let c = self.l as f64 / 2.0 - 0.25;
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (idx, st) in self.stabilizers.iter().enumerate() {
            let d = (st.position[0] - c).hypot(st.position[1] - c);
            if d < best_d {
                best_d = d;
                best = idx;
            }
        }
        best
    }

    /// Stabilizer nearest to the patch corner at the origin.
    pub fn corner_stabilizer(&self) -> usize {
        0
    }

    /// Euclidean distance in the embedding plane, no wraparound.
    pub fn planar_distance(&self, a: usize, b: usize) -> f64 {
        let pa = self.stabilizers[a].position;
        let pb = self.stabilizers[b].position;
        (pa[0] - pb[0]).hypot(pa[1] - pb[1])
    }

    /// Minimum-image Euclidean distance on the `L`-periodic torus.
    pub fn toroidal_distance(&self, a: usize, b: usize) -> f64 {
        let pa = self.stabilizers[a].position;
        let pb = self.stabilizers[b].position;
        let dx = min_image(pa[0] - pb[0], self.l as f64);
        let dy = min_image(pa[1] - pb[1], self.l as f64);
        dx.hypot(dy)
    }

    /// Minimum-image displacement `b - a` in cell units, each component in `(-L/2, L/2]`.
    pub fn toroidal_displacement(&self, a: usize, b: usize) -> (i64, i64) {
        let (ai, aj) = self.stabilizers[a].cell;
        let (bi, bj) = self.stabilizers[b].cell;
        let l = self.l as i64;
        let wrap = |d: i64| {
            let d = d.rem_euclid(l);
            if d > l / 2 {
                d - l
            } else {
                d
            }
        };
        (wrap(bi as i64 - ai as i64), wrap(bj as i64 - aj as i64))
    }

    /// Number of spins on a shortest error path between same-species stabilizers.
    pub fn path_length(&self, a: usize, b: usize) -> usize {
        debug_assert_eq!(self.species_of(a), self.species_of(b));
        let (dx, dy) = self.toroidal_displacement(a, b);
        (dx.unsigned_abs() + dy.unsigned_abs()) as usize
    }

    /// Stabilizers of the same species sharing a spin with `a`.
    pub fn neighbours(&self, a: usize) -> Vec<usize> {
        let species = self.species_of(a);
        let mut out: Vec<usize> = self.stabilizers[a]
            .spins
            .iter()
            .map(|&s| {
                let [x, y] = self.spins[s].stabilizers(species);
                if x == a {
                    y
                } else {
                    x
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn min_image(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toggled(lattice: &CodeLattice, species: Species, spins: &[usize]) -> Vec<usize> {
        let mut parity = vec![false; lattice.num_stabilizers()];
        for &s in spins {
            for q in lattice.spins[s].stabilizers(species) {
                parity[q] ^= true;
            }
        }
        (0..parity.len()).filter(|&q| parity[q]).collect()
    }

    #[test]
    fn small_lattice_counts() {
        let lat = CodeLattice::new(2).unwrap();
        assert_eq!(lat.num_stabilizers(), 8);
        assert_eq!(lat.num_spins(), 8);
        for (idx, spin) in lat.spins.iter().enumerate() {
            for q in spin.s_stabilizers {
                assert_eq!(lat.species_of(q), Species::S);
                assert!(lat.stabilizers[q].spins.contains(&idx));
            }
            for q in spin.p_stabilizers {
                assert_eq!(lat.species_of(q), Species::P);
                assert!(lat.stabilizers[q].spins.contains(&idx));
            }
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(CodeLattice::new(0).unwrap_err(), Error::InvalidSize(0));
        assert_eq!(CodeLattice::new(3).unwrap_err(), Error::InvalidSize(3));
        assert!(CodeLattice::new(1).is_err());
    }

    #[test]
    fn incidence_is_consistent() {
        for l in [2, 4, 6, 8] {
            let lat = CodeLattice::new(l).unwrap();
            let mut membership = vec![[0usize; 2]; lat.num_spins()];
            for st in &lat.stabilizers {
                let mut sorted = st.spins;
                sorted.sort_unstable();
                for w in sorted.windows(2) {
                    assert_ne!(w[0], w[1], "stabilizer spins must be distinct");
                }
                for &s in &st.spins {
                    membership[s][st.species.index()] += 1;
                }
            }
            assert!(membership.iter().all(|m| *m == [2, 2]));
        }
    }

    #[test]
    fn stabilizer_group_relation() {
        let lat = CodeLattice::new(6).unwrap();
        for species in Species::BOTH {
            let mut cover = vec![0usize; lat.num_spins()];
            for q in lat.species_range(species) {
                for &s in &lat.stabilizers[q].spins {
                    cover[s] += 1;
                }
            }
            assert!(cover.iter().all(|c| c % 2 == 0));
        }
    }

    #[test]
    fn logical_reps_have_weight_l() {
        let lat = CodeLattice::new(4).unwrap();
        assert_eq!(lat.logical_reps.len(), 4);
        for rep in &lat.logical_reps {
            assert_eq!(rep.spins.len(), 4);
        }
    }

    #[test]
    fn logical_reps_commute_with_stabilizers() {
        let lat = CodeLattice::new(16).unwrap();
        for rep in &lat.logical_reps {
            assert!(toggled(&lat, rep.species, &rep.spins).is_empty());
        }
    }

    #[test]
    fn step_spin_connects_neighbours() {
        let lat = CodeLattice::new(6).unwrap();
        for species in Species::BOTH {
            for q in lat.species_range(species) {
                let (i, j) = lat.stabilizers[q].cell;
                let east = lat.stabilizer_index(species, i + 1, j);
                let north = lat.stabilizer_index(species, i, j + 1);
                let sx = lat.step_spin(q, Direction::X);
                let sy = lat.step_spin(q, Direction::Y);
                let mut tx = lat.spins[sx].stabilizers(species);
                let mut ty = lat.spins[sy].stabilizers(species);
                tx.sort_unstable();
                ty.sort_unstable();
                let mut ex = [q, east];
                let mut ey = [q, north];
                ex.sort_unstable();
                ey.sort_unstable();
                assert_eq!(tx, ex);
                assert_eq!(ty, ey);
            }
        }
    }

    #[test]
    fn planar_distance_examples() {
        let lat = CodeLattice::new(8).unwrap();
        let a = lat.stabilizer_index(Species::S, 0, 0);
        let b = lat.stabilizer_index(Species::S, 3, 4);
        let p = lat.stabilizer_index(Species::P, 0, 0);
        assert_eq!(lat.planar_distance(a, a), 0.0);
        assert!((lat.planar_distance(a, b) - 5.0).abs() < 1e-12);
        assert!((lat.planar_distance(a, p) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn toroidal_distance_wraps() {
        let lat = CodeLattice::new(8).unwrap();
        let a = lat.stabilizer_index(Species::S, 0, 0);
        let b = lat.stabilizer_index(Species::S, 7, 0);
        let c = lat.stabilizer_index(Species::S, 4, 0);
        assert!((lat.toroidal_distance(a, b) - 1.0).abs() < 1e-12);
        assert!((lat.toroidal_distance(a, c) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn toroidal_distance_matches_image_enumeration() {
        let lat = CodeLattice::new(6).unwrap();
        let l = 6.0;
        for a in 0..lat.num_stabilizers() {
            for b in 0..lat.num_stabilizers() {
                let pa = lat.stabilizers[a].position;
                let pb = lat.stabilizers[b].position;
                let mut best = f64::INFINITY;
                for nx in -1..=1 {
                    for ny in -1..=1 {
                        let dx = pb[0] + nx as f64 * l - pa[0];
                        let dy = pb[1] + ny as f64 * l - pa[1];
                        best = best.min(dx.hypot(dy));
                    }
                }
                assert!((lat.toroidal_distance(a, b) - best).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn center_is_near_middle() {
        let lat = CodeLattice::new(16).unwrap();
        let c = lat.center_stabilizer();
        assert_eq!(lat.stabilizers[c].cell, (8, 8));
        assert_eq!(lat.species_of(c), Species::S);
    }

    #[test]
    fn json_export_round_trips() {
        let lat = CodeLattice::new(4).unwrap();
        let back: CodeLattice =
            serde_json::from_str(&serde_json::to_string(&lat).unwrap()).unwrap();
        assert_eq!(back.num_spins(), lat.num_spins());
        assert_eq!(back.stabilizers[5].spins, lat.stabilizers[5].spins);
    }

    #[test]
    fn neighbours_are_four_for_large_lattices() {
        let lat = CodeLattice::new(8).unwrap();
        for q in 0..lat.num_stabilizers() {
            let nb = lat.neighbours(q);
            assert_eq!(nb.len(), 4);
            for n in nb {
                assert_eq!(lat.path_length(q, n), 1);
            }
        }
    }
}
