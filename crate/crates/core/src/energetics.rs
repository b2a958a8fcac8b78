//! Anyon configurations, exact energies and move costs, and the mean-field theory.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::couplings::InteractionKernel;
use crate::error::{invalid, Error, Result};
use crate::geometry::{CodeLattice, Flip, Species};

const NONE: usize = usize::MAX;

/// Occupation numbers `n_p` with an index of occupied sites for `O(#anyons)` sweeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnyonConfig {
    cells: usize,
    occupation: Vec<bool>,
    occupied: Vec<usize>,
    slot: Vec<usize>,
    counts: [usize; 2],
}

impl AnyonConfig {
    pub fn vacuum(lattice: &CodeLattice) -> Self {
        let n = lattice.num_stabilizers();
        Self {
            cells: lattice.cells(),
            occupation: vec![false; n],
            occupied: Vec::new(),
            slot: vec![NONE; n],
            counts: [0, 0],
        }
    }

    /// Config with the listed stabilizers occupied; duplicates are rejected.
    pub fn from_occupied(lattice: &CodeLattice, sites: &[usize]) -> Result<Self> {
        let mut c = Self::vacuum(lattice);
        for &q in sites {
            if q >= c.len() {
                return Err(invalid("occupied", format!("stabilizer {q} out of range")));
            }
            if c.is_occupied(q) {
                return Err(invalid("occupied", format!("stabilizer {q} listed twice")));
            }
            c.toggle(q);
        }
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.occupation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    #[inline]
    pub fn is_occupied(&self, q: usize) -> bool {
        self.occupation[q]
    }

    /// Stabilizer eigenvalue `W_p = 1 - 2 n_p`.
    pub fn w(&self, q: usize) -> i8 {
        if self.occupation[q] {
            -1
        } else {
            1
        }
    }

    /// Occupied stabilizers in insertion order (not sorted).
    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn sorted_occupied(&self) -> Vec<usize> {
        let mut v = self.occupied.clone();
        v.sort_unstable();
        v
    }

    pub fn count(&self, species: Species) -> usize {
        self.counts[species.index()]
    }

    pub fn total(&self) -> usize {
        self.occupied.len()
    }

    /// Both species have an even number of anyons, as required on the torus.
    pub fn is_physical(&self) -> bool {
        self.counts.iter().all(|c| c % 2 == 0)
    }

    fn species_index(&self, q: usize) -> usize {
        usize::from(q >= self.cells)
    }

    pub fn toggle(&mut self, q: usize) {
        let sp = self.species_index(q);
        if self.occupation[q] {
            let s = self.slot[q];
            let last = *self.occupied.last().expect("occupied list is nonempty");
            self.occupied.swap_remove(s);
            if last != q {
                self.slot[last] = s;
            }
            self.slot[q] = NONE;
            self.counts[sp] -= 1;
        } else {
            self.slot[q] = self.occupied.len();
            self.occupied.push(q);
            self.counts[sp] += 1;
        }
        self.occupation[q] = !self.occupation[q];
    }

    pub fn apply_flip(&mut self, lattice: &CodeLattice, flip: Flip) {
        for q in lattice.flip_targets(flip) {
            self.toggle(q);
        }
    }
}

/// `E = sum_p mu_p n_p + 4 sum_{p != p'} J_pp' n_p n_p'`, vacuum at zero.
pub fn config_energy(config: &AnyonConfig, kernel: &InteractionKernel) -> f64 {
    let occ = config.occupied();
    let mut e = 0.0;
    for (i, &p) in occ.iter().enumerate() {
        e += kernel.mu(p);
        for &q in &occ[i + 1..] {
            e += 8.0 * kernel.pair(p, q);
        }
    }
    e
}

/// `h_q = sum_{occupied p != q} J_qp`.
pub fn field(config: &AnyonConfig, q: usize, kernel: &InteractionKernel) -> f64 {
    config
        .occupied()
        .iter()
        .filter(|&&p| p != q)
        .map(|&p| kernel.pair(q, p))
        .sum()
}

/// Exact energy change for toggling the two stabilizers `q1 != q2`.
pub fn toggle_pair_delta(
    config: &AnyonConfig,
    q1: usize,
    q2: usize,
    kernel: &InteractionKernel,
) -> f64 {
    let dn1 = if config.is_occupied(q1) { -1.0 } else { 1.0 };
    let dn2 = if config.is_occupied(q2) { -1.0 } else { 1.0 };
    let h1 = field(config, q1, kernel);
    let h2 = field(config, q2, kernel);
    dn1 * (kernel.mu(q1) + 8.0 * h1)
        + dn2 * (kernel.mu(q2) + 8.0 * h2)
        + 8.0 * kernel.pair(q1, q2) * dn1 * dn2
}

pub fn move_delta(
    config: &AnyonConfig,
    lattice: &CodeLattice,
    flip: Flip,
    kernel: &InteractionKernel,
) -> f64 {
    let [q1, q2] = lattice.flip_targets(flip);
    toggle_pair_delta(config, q1, q2, kernel)
}

/// `delta(0) = 2 mu - A^2 / (4 pi t)`: mean-field cost of a nearest pair in vacuum.
pub fn pair_creation_cost(mu: f64, a: f64, t: f64) -> f64 {
    2.0 * mu - a * a / (4.0 * PI * t)
}

/// Cost of creating one more pair on top of `n` pairs spread uniformly.
pub fn delta_n(n: f64, delta0: f64, l: usize) -> f64 {
    let l2 = (l * l) as f64;
    delta0 * (1.0 - 4.0 * n / (l2 - 2.0))
}

/// `E_mf(N) = delta(0) N (L^2 - 2N) / (L^2 - 2)`.
pub fn mf_energy(n: f64, delta0: f64, l: usize) -> f64 {
    let l2 = (l * l) as f64;
    delta0 * n * (l2 - 2.0 * n) / (l2 - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `beta delta(0) < 2`: the symmetric density 1/2 is the only solution.
    Subcritical,
    /// `beta delta(0) > 2`: anyon/hole symmetry broken.
    Supercritical,
    Boundary,
}

pub fn classify_phase(beta_delta0: f64, tol: f64) -> Regime {
    if (beta_delta0 - 2.0).abs() <= tol {
        Regime::Boundary
    } else if beta_delta0 < 2.0 {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSolution {
    pub beta_delta0: f64,
    /// Ascending.
    pub roots: Vec<f64>,
    pub stable: Vec<bool>,
    pub regime: Regime,
}

impl MeanFieldSolution {
    /// Smallest stable density (the low-density branch).
    pub fn n_star(&self) -> f64 {
        self.roots[0]
    }
}

const MF_GRID: usize = 10_000;
const MF_MAX_BISECT: usize = 300;

fn fermi(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (x.exp() + 1.0)
    }
}

/// `f(n) = [exp(b (1 - 2n)) + 1]^-1 - n`.
pub fn mf_residual(n: f64, beta_delta0: f64) -> f64 {
    fermi(beta_delta0 * (1.0 - 2.0 * n)) - n
}

fn mf_slope(n: f64, beta_delta0: f64) -> f64 {
    let g = fermi(beta_delta0 * (1.0 - 2.0 * n));
    2.0 * beta_delta0 * g * (1.0 - g) - 1.0
}

/// All solutions of the self-consistency equation in `[0, 1]`.
///
/// `f` is odd about `n = 1/2`, so roots are bracketed on `[0, 1/2)` and
/// mirrored; `1/2` itself is always a root.
pub fn solve_self_consistent(beta_delta0: f64, tol: f64) -> Result<MeanFieldSolution> {
    if !(beta_delta0 > 0.0 && beta_delta0.is_finite()) {
        return Err(invalid(
            "beta_delta0",
            format!("must be positive, got {beta_delta0}"),
        ));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let f = |n: f64| mf_residual(n, beta_delta0);
    let h = 0.5 / MF_GRID as f64;
    let mut lower = Vec::new();
    let mut prev = f(0.0);
    for i in 1..MF_GRID {
        let x = i as f64 * h;
        let fx = f(x);
        if fx == 0.0 {
            lower.push(x);
        } else if prev != 0.0 && prev.signum() != fx.signum() {
            lower.push(bisect(&f, x - h, x, tol)?);
        }
        prev = fx;
    }
    let mut roots = lower.clone();
    roots.push(0.5);
    roots.extend(lower.iter().rev().map(|r| 1.0 - r));
    let stable = roots
        .iter()
        .map(|&r| mf_slope(r, beta_delta0) <= 0.0)
        .collect();
    Ok(MeanFieldSolution {
        beta_delta0,
        roots,
        stable,
        regime: classify_phase(beta_delta0, 0.0),
    })
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let (a, b) = (lo, hi);
    let flo = f(lo);
    for _ in 0..MF_MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 4.0 * f64::EPSILON * mid {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    if f(mid).abs() < tol {
        Ok(mid)
    } else {
        Err(Error::NoConvergence { lo: a, hi: b })
    }
}
