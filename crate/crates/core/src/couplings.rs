//! Bath-mediated stabilizer couplings.
//!
//! Two radial laws are supported: the displacement coupling gives a
//! gravitation-like `J(r) = -A_p A_q / (4 pi t r)`, the density coupling a
//! temperature-proportional `J(r) = -A_p A_q T / (32 pi^2 t^2 r^2)`. Both are
//! evaluated with planar (non-periodic) distances between stabilizer
//! positions, even though the code itself is periodic. The chemical potential
//! of a plaquette is `mu_p = -4 sum_{q != p} J_pq`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::RateLawKind;
use crate::error::{invalid, Error, Result};
use crate::geometry::{CodeLattice, Species};

/// Numerical value of the on-site polaron shift, `J_pp ~ -0.253 A^2 / t`.
pub const SELF_TERM_COEFF: f64 = -0.253;

/// Largest `A / t` accepted for the perturbative density coupling.
pub const DENSITY_MAX_COUPLING_RATIO: f64 = 0.1;

/// `c = 4 ln(1 + sqrt 2)`: `int_{[-L/2, L/2]^2} dx dy / r = c L`.
pub fn square_integral_constant() -> f64 {
    4.0 * (1.0 + 2f64.sqrt()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    /// `A W_p (a_p + a_p^dagger)`: exactly solvable, `1/r` kernel.
    #[default]
    Displacement,
    /// `A W_p a_p^dagger a_p`: second order, `1/r^2` kernel.
    Density,
}

fn default_gamma0() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Stabilizer-boson coupling.
    pub a: f64,
    /// Boson hopping.
    pub t: f64,
    /// Inverse temperature; `inf` is allowed and freezes uphill moves.
    pub beta: f64,
    /// Code linear size.
    pub l: usize,
    /// Bath linear size; only the oracles need it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<usize>,
    #[serde(default)]
    pub coupling_kind: CouplingKind,
    #[serde(default = "default_gamma0")]
    pub gamma0: f64,
    #[serde(default)]
    pub rate_law: RateLawKind,
}

impl ModelParams {
    pub fn new(a: f64, t: f64, beta: f64, l: usize) -> Self {
        Self {
            a,
            t,
            beta,
            l,
            lambda: None,
            coupling_kind: CouplingKind::Displacement,
            gamma0: 1.0,
            rate_law: RateLawKind::Glauber,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(invalid(
                "a",
                format!("must be positive and finite, got {}", self.a),
            ));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(invalid(
                "t",
                format!("must be positive and finite, got {}", self.t),
            ));
        }
        if !(self.beta > 0.0) {
            return Err(invalid(
                "beta",
                format!("must be positive, got {}", self.beta),
            ));
        }
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(invalid(
                "gamma0",
                format!("must be positive, got {}", self.gamma0),
            ));
        }
        if self.l < 2 || !self.l.is_multiple_of(2) {
            return Err(Error::InvalidSize(self.l));
        }
        if let Some(lambda) = self.lambda {
            if lambda <= self.l {
                return Err(invalid(
                    "lambda",
                    format!("bath size {lambda} must exceed L = {}", self.l),
                ));
            }
        }
        if self.coupling_kind == CouplingKind::Density {
            if self.a / self.t > DENSITY_MAX_COUPLING_RATIO {
                return Err(invalid(
                    "a",
                    format!(
                        "density coupling needs A/t <= {DENSITY_MAX_COUPLING_RATIO}, got {}",
                        self.a / self.t
                    ),
                ));
            }
            if !self.beta.is_finite() {
                return Err(invalid(
                    "beta",
                    "density coupling needs a finite temperature",
                ));
            }
        }
        Ok(())
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }
}

/// Per-stabilizer coupling amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingPattern {
    pub amplitudes: Vec<f64>,
    pub a_strong: f64,
    pub a_weak: f64,
    /// Weak-region label per stabilizer (`None` for strong plaquettes).
    pub weak_region: Vec<Option<usize>>,
}

impl CouplingPattern {
    pub fn uniform(lattice: &CodeLattice, a: f64) -> Self {
        let n = lattice.num_stabilizers();
        Self {
            amplitudes: vec![a; n],
            a_strong: a,
            a_weak: a,
            weak_region: vec![None; n],
        }
    }

    pub fn is_uniform(&self) -> bool {
        self.a_weak == self.a_strong
    }

    pub fn is_weak(&self, q: usize) -> bool {
        self.weak_region[q].is_some()
    }

    /// `(3 A_s + A_w) / 4`, the fraction-weighted amplitude.
    pub fn mean_amplitude(&self) -> f64 {
        self.amplitudes.iter().sum::<f64>() / self.amplitudes.len() as f64
    }
}

/// Strong/weak layout on the square tiling.
///
/// Weak plaquettes come in 2x2 clusters on a period-4 superlattice of each
/// species' graph: `s` clusters occupy cells with `(i mod 4, j mod 4)` in
/// `{0,1}^2`, `p` clusters are shifted to `{2,3}^2`. A quarter of each species
/// is weak, and distinct weak clusters are three spins apart, so no one- or
/// two-spin process links them without touching a strong plaquette.
pub fn build_pattern_square(
    lattice: &CodeLattice,
    a_strong: f64,
    a_weak: f64,
) -> Result<CouplingPattern> {
    if !(a_weak > 0.0 && a_weak.is_finite() && a_strong.is_finite()) {
        return Err(invalid("a_weak", format!("must be positive, got {a_weak}")));
    }
    if a_weak > a_strong {
        return Err(invalid(
            "a_weak",
            format!("weak amplitude {a_weak} exceeds strong amplitude {a_strong}"),
        ));
    }
    let l = lattice.l;
    if !l.is_multiple_of(4) {
        return Err(invalid(
            "l",
            format!("square pattern needs L divisible by 4, got {l}"),
        ));
    }
    let blocks = l / 4;
    let n = lattice.num_stabilizers();
    let mut amplitudes = vec![a_strong; n];
    let mut weak_region = vec![None; n];
    for (q, st) in lattice.stabilizers.iter().enumerate() {
        let (i, j) = st.cell;
        let offset = match st.species {
            Species::S => 0,
            Species::P => 2,
        };
        let (ri, rj) = ((i + 4 - offset) % 4, (j + 4 - offset) % 4);
        if ri < 2 && rj < 2 {
            let bi = ((i + 4 - offset) % l) / 4;
            let bj = ((j + 4 - offset) % l) / 4;
            amplitudes[q] = a_weak;
            weak_region[q] = Some(st.species.index() * blocks * blocks + bj * blocks + bi);
        }
    }
    Ok(CouplingPattern {
        amplitudes,
        a_strong,
        a_weak,
        weak_region,
    })
}

/// `-A_p A_q / (4 pi t r)`.
pub fn kernel_displacement(r: f64, a_p: f64, a_q: f64, t: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::ZeroSeparation);
    }
    Ok(-a_p * a_q / (4.0 * PI * t * r))
}

/// `-A_p A_q T / (32 pi^2 t^2 r^2)`.
pub fn kernel_density(r: f64, a_p: f64, a_q: f64, t: f64, temperature: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::ZeroSeparation);
    }
    Ok(-a_p * a_q * temperature / (32.0 * PI * PI * t * t * r * r))
}

/// Pair couplings and chemical potentials for one lattice and pattern.
///
/// `J_pq = prefactor * A_p * A_q * f(|R_p - R_q|)` with `f` tabulated once
/// over all half-unit displacements, so the table costs `O(L^2)` memory
/// rather than `O(L^4)`.
#[derive(Debug, Clone)]
pub struct InteractionKernel {
    pub kind: CouplingKind,
    pub l: usize,
    amplitudes: Vec<f64>,
    half_positions: Vec<[i64; 2]>,
    prefactor: f64,
    span: i64,
    radial: Vec<f64>,
    pub mu: Vec<f64>,
    self_coeff: Option<f64>,
}

impl InteractionKernel {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    #[inline]
    fn radial_at(&self, p: usize, q: usize) -> f64 {
        let a = self.half_positions[p];
        let b = self.half_positions[q];
        let dx = (a[0] - b[0] + self.span) as usize;
        let dy = (a[1] - b[1] + self.span) as usize;
        self.radial[dx * (2 * self.span as usize + 1) + dy]
    }

    /// `J_pq` for `p != q`; zero on the diagonal (see [`Self::self_term`]).
    #[inline]
    pub fn pair(&self, p: usize, q: usize) -> f64 {
        if p == q {
            return 0.0;
        }
        self.prefactor * self.amplitudes[p] * self.amplitudes[q] * self.radial_at(p, q)
    }

    pub fn mu(&self, p: usize) -> f64 {
        self.mu[p]
    }

    pub fn amplitude(&self, p: usize) -> f64 {
        self.amplitudes[p]
    }

    /// On-site term `J_pp`; only defined for the displacement coupling.
    pub fn self_term(&self, p: usize) -> Option<f64> {
        self.self_coeff
            .map(|c| c * self.amplitudes[p] * self.amplitudes[p])
    }

    pub fn max_abs_pair(&self) -> f64 {
        // Nearest stabilizers sit at half-unit displacement (1, 1).
        let amax = self.amplitudes.iter().cloned().fold(0.0, f64::max);
        let r_min = 0.5f64.sqrt();
        let f = match self.kind {
            CouplingKind::Displacement => 1.0 / r_min,
            CouplingKind::Density => 1.0 / (r_min * r_min),
        };
        (self.prefactor * amax * amax * f).abs()
    }

    /// Full dense `J` table, row-major; for export and debugging.
    pub fn dense_table(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                out[p * n + q] = self.pair(p, q);
            }
        }
        out
    }
}

pub fn build_kernel(
    lattice: &CodeLattice,
    pattern: &CouplingPattern,
    params: &ModelParams,
) -> Result<InteractionKernel> {
    params.validate()?;
    if params.l != lattice.l {
        return Err(invalid(
            "l",
            format!("params L = {} but lattice L = {}", params.l, lattice.l),
        ));
    }
    let n = lattice.num_stabilizers();
    if pattern.amplitudes.len() != n {
        return Err(invalid(
            "pattern",
            format!(
                "{} amplitudes for {n} stabilizers",
                pattern.amplitudes.len()
            ),
        ));
    }
    let t = params.t;
    let (prefactor, exponent, self_coeff) = match params.coupling_kind {
        CouplingKind::Displacement => (-1.0 / (4.0 * PI * t), 1, Some(SELF_TERM_COEFF / t)),
        CouplingKind::Density => (-params.temperature() / (32.0 * PI * PI * t * t), 2, None),
    };

    let span = 2 * lattice.l as i64;
    let width = 2 * span as usize + 1;
    let mut radial = vec![0.0; width * width];
    for dx in -span..=span {
        for dy in -span..=span {
            if dx == 0 && dy == 0 {
                continue;
            }
            let r = 0.5 * (dx as f64).hypot(dy as f64);
            radial[(dx + span) as usize * width + (dy + span) as usize] = match exponent {
                1 => 1.0 / r,
                _ => 1.0 / (r * r),
            };
        }
    }

    let mut kernel = InteractionKernel {
        kind: params.coupling_kind,
        l: lattice.l,
        amplitudes: pattern.amplitudes.clone(),
        half_positions: lattice
            .stabilizers
            .iter()
            .map(|s| s.half_position)
            .collect(),
        prefactor,
        span,
        radial,
        mu: vec![0.0; n],
        self_coeff,
    };
    let mu: Vec<f64> = (0..n)
        .map(|p| {
            let mut sum = 0.0;
            for q in 0..n {
                if q != p {
                    sum += kernel.amplitudes[q] * kernel.radial_at(p, q);
                }
            }
            -4.0 * prefactor * kernel.amplitudes[p] * sum
        })
        .collect();
    kernel.mu = mu;
    Ok(kernel)
}

/// Midpoint-rule Brillouin-zone integral `-A^2 / (2 pi)^3 int d^3k / eps_k`.
///
/// The grid is offset by half a step so `k = 0` is never sampled; the
/// integrable `1/k^2` singularity leaves an `O(1/k_grid)` bias.
pub fn self_term_integral(t: f64, a: f64, k_grid: usize) -> Result<f64> {
    if k_grid < 32 {
        return Err(invalid(
            "k_grid",
            format!("need at least 32 points per axis, got {k_grid}"),
        ));
    }
    if !(t > 0.0) {
        return Err(invalid("t", "must be positive"));
    }
    let n = k_grid;
    let cos: Vec<f64> = (0..n)
        .map(|i| ((i as f64 + 0.5) * 2.0 * PI / n as f64).cos())
        .collect();
    let mut total = 0.0;
    for &cx in &cos {
        let mut plane = 0.0;
        for &cy in &cos {
            let base = 3.0 - cx - cy;
            let mut row = 0.0;
            for &cz in &cos {
                row += 1.0 / (base - cz);
            }
            plane += row;
        }
        total += plane;
    }
    let mean_inv = total / (2.0 * t) / (n * n * n) as f64;
    Ok(-a * a * mean_inv)
}

/// `sum_{p != center} 1 / |R_p - R_center|^exponent` over the whole patch.
pub fn lattice_sum_inverse_r(l: usize, exponent: u32) -> Result<f64> {
    if !(exponent == 1 || exponent == 2) {
        return Err(invalid(
            "exponent",
            format!("must be 1 or 2, got {exponent}"),
        ));
    }
    let lattice = CodeLattice::new(l)?;
    let c = lattice.center_stabilizer();
    let pc = lattice.stabilizers[c].position;
    let sum = lattice
        .stabilizers
        .iter()
        .enumerate()
        .filter(|(q, _)| *q != c)
        .map(|(_, st)| {
            let r2 = (st.position[0] - pc[0]).powi(2) + (st.position[1] - pc[1]).powi(2);
            if exponent == 1 {
                1.0 / r2.sqrt()
            } else {
                1.0 / r2
            }
        })
        .sum();
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_kernel(l: usize, a: f64, t: f64) -> (CodeLattice, InteractionKernel) {
        let lat = CodeLattice::new(l).unwrap();
        let pat = CouplingPattern::uniform(&lat, a);
        let k = build_kernel(&lat, &pat, &ModelParams::new(a, t, 1.0, l)).unwrap();
        (lat, k)
    }

    #[test]
    fn displacement_kernel_values() {
        let v = kernel_displacement(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((v + 0.0795774715).abs() < 1e-9);
        let half = kernel_displacement(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!((half - v / 2.0).abs() < 1e-15);
        let mixed = kernel_displacement(3.0, 2.0, 0.5, 1.5).unwrap();
        assert!((mixed + 2.0 * 0.5 / (4.0 * PI * 1.5 * 3.0)).abs() < 1e-15);
        assert_eq!(
            kernel_displacement(0.0, 1.0, 1.0, 1.0),
            Err(Error::ZeroSeparation)
        );
    }

    #[test]
    fn density_kernel_values() {
        let v = kernel_density(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((v + 3.166287e-3).abs() < 1e-8);
        let far = kernel_density(2.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((far - v / 4.0).abs() < 1e-15);
        let hot = kernel_density(1.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert!((hot - 2.0 * v).abs() < 1e-15);
        assert!(kernel_density(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn kernel_table_matches_direct_formula() {
        let (lat, k) = uniform_kernel(4, 0.7, 1.3);
        for p in 0..lat.num_stabilizers() {
            for q in 0..lat.num_stabilizers() {
                if p == q {
                    continue;
                }
                let direct = kernel_displacement(lat.planar_distance(p, q), 0.7, 0.7, 1.3).unwrap();
                assert!((k.pair(p, q) - direct).abs() < 1e-14);
                assert_eq!(k.pair(p, q), k.pair(q, p));
                assert!(k.pair(p, q) < 0.0);
            }
        }
    }

    #[test]
    fn mu_center_is_about_two_a2l_over_t() {
        let (lat, k) = uniform_kernel(16, 1.0, 1.0);
        let ratio = k.mu(lat.center_stabilizer()) / 16.0;
        assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
        assert!(k.mu(lat.corner_stabilizer()) < k.mu(lat.center_stabilizer()));
        assert!(k.mu.iter().all(|&m| m > 0.0));
    }

    #[test]
    fn mu_is_four_times_pair_sum() {
        let (lat, k) = uniform_kernel(6, 1.0, 2.0);
        for p in 0..lat.num_stabilizers() {
            let s: f64 = (0..lat.num_stabilizers()).map(|q| k.pair(p, q)).sum();
            assert!((k.mu(p) + 4.0 * s).abs() < 1e-12);
        }
    }

    #[test]
    fn bilinear_scaling() {
        let (_, k1) = uniform_kernel(6, 1.0, 1.0);
        let (_, k2) = uniform_kernel(6, 3.0, 1.0);
        for p in 0..k1.len() {
            assert!((k2.mu(p) - 9.0 * k1.mu(p)).abs() < 1e-10 * k2.mu(p));
            assert!((k2.pair(p, 0) - 9.0 * k1.pair(p, 0)).abs() < 1e-12);
        }
    }

    #[test]
    fn density_kernel_build() {
        let lat = CodeLattice::new(4).unwrap();
        let pat = CouplingPattern::uniform(&lat, 0.05);
        let mut params = ModelParams::new(0.05, 1.0, 0.5, 4);
        params.coupling_kind = CouplingKind::Density;
        let k = build_kernel(&lat, &pat, &params).unwrap();
        let direct = kernel_density(lat.planar_distance(0, 5), 0.05, 0.05, 1.0, 2.0).unwrap();
        assert!((k.pair(0, 5) - direct).abs() < 1e-15);
        assert!(k.self_term(0).is_none());
        params.a = 0.5;
        assert!(build_kernel(&lat, &CouplingPattern::uniform(&lat, 0.5), &params).is_err());
    }

    #[test]
    fn self_term_value_and_scaling() {
        let v = self_term_integral(1.0, 1.0, 64).unwrap();
        assert!((v / SELF_TERM_COEFF - 1.0).abs() < 0.02, "{v}");
        let half = self_term_integral(0.5, 1.0, 64).unwrap();
        assert!((half - 2.0 * v).abs() < 1e-12);
        assert!(self_term_integral(1.0, 1.0, 16).is_err());
    }

    #[test]
    fn self_term_refinement_converges() {
        let coarse = self_term_integral(1.0, 1.0, 128).unwrap();
        let fine = self_term_integral(1.0, 1.0, 256).unwrap();
        assert!(((fine - coarse) / fine).abs() < 0.005);
    }

    #[test]
    fn square_pattern_counts() {
        let lat = CodeLattice::new(4).unwrap();
        let pat = build_pattern_square(&lat, 1.0, 0.5).unwrap();
        for species in Species::BOTH {
            let weak = lat
                .species_range(species)
                .filter(|&q| pat.is_weak(q))
                .count();
            assert_eq!(weak, 4);
            assert_eq!(lat.species_range(species).len() - weak, 12);
        }
        assert!((pat.mean_amplitude() - (3.0 * 1.0 + 0.5) / 4.0).abs() < 1e-15);
        assert!(build_pattern_square(&lat, 0.5, 1.0).is_err());
        assert!(build_pattern_square(&CodeLattice::new(6).unwrap(), 1.0, 0.5).is_err());
    }

    #[test]
    fn degenerate_pattern_matches_uniform() {
        let lat = CodeLattice::new(8).unwrap();
        let params = ModelParams::new(0.8, 1.0, 1.0, 8);
        let a = build_kernel(
            &lat,
            &build_pattern_square(&lat, 0.8, 0.8).unwrap(),
            &params,
        )
        .unwrap();
        let b = build_kernel(&lat, &CouplingPattern::uniform(&lat, 0.8), &params).unwrap();
        assert_eq!(a.mu, b.mu);
        assert_eq!(a.dense_table(), b.dense_table());
    }

    #[test]
    fn weak_clusters_are_three_spins_apart() {
        let lat = CodeLattice::new(8).unwrap();
        let pat = build_pattern_square(&lat, 1.0, 0.5).unwrap();
        for p in 0..lat.num_stabilizers() {
            for q in 0..lat.num_stabilizers() {
                if lat.species_of(p) != lat.species_of(q) {
                    continue;
                }
                if let (Some(rp), Some(rq)) = (pat.weak_region[p], pat.weak_region[q]) {
                    if rp != rq {
                        assert!(lat.path_length(p, q) >= 3);
                    } else {
                        assert!(lat.path_length(p, q) <= 2);
                    }
                }
            }
        }
    }

    #[test]
    fn lattice_sums_basic() {
        assert!(lattice_sum_inverse_r(8, 3).is_err());
        let s1 = lattice_sum_inverse_r(8, 1).unwrap();
        let s2 = lattice_sum_inverse_r(8, 2).unwrap();
        assert!(s1 > 0.0 && s2 > 0.0);
        let (lat, k) = uniform_kernel(8, 1.0, 1.0);
        assert!((k.mu(lat.center_stabilizer()) - s1 / PI).abs() < 1e-10);
    }

    #[test]
    fn params_validation() {
        let mut p = ModelParams::new(1.0, 1.0, 1.0, 8);
        assert!(p.validate().is_ok());
        p.beta = f64::INFINITY;
        assert!(p.validate().is_ok());
        p.beta = 0.0;
        assert!(p.validate().is_err());
        p.beta = 1.0;
        p.lambda = Some(8);
        assert!(p.validate().is_err());
        p.lambda = Some(16);
        p.l = 7;
        assert_eq!(p.validate(), Err(Error::InvalidSize(7)));
    }
}
