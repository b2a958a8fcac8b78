//! Boson-side numerics on the periodic cubic bath.
//!
//! Dispersion `eps_k = 2t (3 - cos kx - cos ky - cos kz)` on the discrete
//! Brillouin zone `k in (2 pi / Lambda) {0..Lambda-1}^3`. All mode sums drop
//! the singular `k = 0` mode.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::couplings::kernel_density;
use crate::energetics::AnyonConfig;
use crate::error::{invalid, Error, Result};
use crate::geometry::CodeLattice;

/// Riemann zeta at 3/2.
pub const ZETA_3_2: f64 = 2.612_375_348_685_488;

/// Periodic-lattice Green's function constant: with the zero mode removed,
/// `(1/N) sum_k cos(k.R) / eps_k ~ (1 / 4 pi t) (1/r - MADELUNG_CUBIC / Lambda)`.
pub const MADELUNG_CUBIC: f64 = 2.837_297;

const MIN_LAMBDA: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct BathSpectrum {
    pub lambda: usize,
    pub t: f64,
    cos: Vec<f64>,
}

impl BathSpectrum {
    pub fn new(lambda: usize, t: f64) -> Result<Self> {
        if lambda < MIN_LAMBDA {
            return Err(invalid(
                "lambda",
                format!("need at least {MIN_LAMBDA} sites per axis, got {lambda}"),
            ));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("t", "must be positive"));
        }
        let cos = (0..lambda)
            .map(|i| (2.0 * PI * i as f64 / lambda as f64).cos())
            .collect();
        Ok(Self { lambda, t, cos })
    }

    pub fn num_modes(&self) -> usize {
        self.lambda.pow(3)
    }

    /// `eps` at integer momentum indices (taken modulo `Lambda`).
    pub fn energy(&self, k: [i64; 3]) -> f64 {
        let n = self.lambda as i64;
        let c = |i: i64| self.cos[i.rem_euclid(n) as usize];
        2.0 * self.t * (3.0 - c(k[0]) - c(k[1]) - c(k[2]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiniteSize {
    /// Bare sum over `k != 0`.
    #[default]
    None,
    /// Adds back the uniform offset left by removing the zero mode.
    Background,
}

fn phases(lambda: usize, r: i64) -> Vec<(f64, f64)> {
    (0..lambda)
        .map(|i| {
            let a = 2.0 * PI * (i as i64 * r).rem_euclid(lambda as i64) as f64 / lambda as f64;
            (a.cos(), a.sin())
        })
        .collect()
}

/// `(1/N) sum_{k != 0} cos(k.R) / eps_k`.
fn green_raw(spec: &BathSpectrum, dr: [i64; 3]) -> f64 {
    let n = spec.lambda;
    let px = phases(n, dr[0]);
    let py = phases(n, dr[1]);
    let pz = phases(n, dr[2]);
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            // Real part of e^{i kx x} e^{i ky y}.
            let (cx, sx) = px[i];
            let (cy, sy) = py[j];
            let (re, im) = (cx * cy - sx * sy, cx * sy + sx * cy);
            let base = 2.0 * spec.t * (3.0 - spec.cos[i] - spec.cos[j]);
            for (k, &(cz, sz)) in pz.iter().enumerate() {
                if i == 0 && j == 0 && k == 0 {
                    continue;
                }
                let eps = base - 2.0 * spec.t * spec.cos[k];
                sum += (re * cz - im * sz) / eps;
            }
        }
    }
    sum / spec.num_modes() as f64
}

/// Polaron kernel from the finite mode sum, `-(A^2/N) sum_{k != 0} e^{ik.dR} / eps_k`.
pub fn discrete_kernel(
    dr: [i64; 3],
    a: f64,
    t: f64,
    lambda: usize,
    finite_size: FiniteSize,
) -> Result<f64> {
    let spec = BathSpectrum::new(lambda, t)?;
    let g = green_raw(&spec, dr);
    let g = match finite_size {
        FiniteSize::None => g,
        FiniteSize::Background => g + MADELUNG_CUBIC / (4.0 * PI * t * lambda as f64),
    };
    Ok(-a * a * g)
}

/// Exact polaron energy of a stabilizer pattern, from the mode sum
/// `-(A^2/N) sum_{k != 0} |sum_p W_p e^{ik.R_p}|^2 / eps_k`.
pub fn polaron_energy(sites: &[[i64; 3]], w: &[f64], a: f64, t: f64, lambda: usize) -> Result<f64> {
    if sites.len() != w.len() {
        return Err(invalid("w", "one amplitude per site required"));
    }
    let spec = BathSpectrum::new(lambda, t)?;
    let n = lambda as i64;
    let mut total = 0.0;
    for kx in 0..n {
        for ky in 0..n {
            for kz in 0..n {
                if kx == 0 && ky == 0 && kz == 0 {
                    continue;
                }
                let (mut re, mut im) = (0.0, 0.0);
                for (s, &wp) in sites.iter().zip(w) {
                    let ph = 2.0 * PI * ((kx * s[0] + ky * s[1] + kz * s[2]).rem_euclid(n)) as f64
                        / n as f64;
                    re += wp * ph.cos();
                    im += wp * ph.sin();
                }
                total += (re * re + im * im) / spec.energy([kx, ky, kz]);
            }
        }
    }
    Ok(-a * a * total / spec.num_modes() as f64)
}

/// The same energy assembled pairwise from [`discrete_kernel`].
pub fn polaron_energy_pairwise(
    sites: &[[i64; 3]],
    w: &[f64],
    a: f64,
    t: f64,
    lambda: usize,
) -> Result<f64> {
    let mut total = 0.0;
    for (i, si) in sites.iter().enumerate() {
        for (j, sj) in sites.iter().enumerate() {
            let dr = [si[0] - sj[0], si[1] - sj[1], si[2] - sj[2]];
            total += w[i] * w[j] * discrete_kernel(dr, a, t, lambda, FiniteSize::None)?;
        }
    }
    Ok(total)
}

/// `Delta E_fast = mu + 4 |J_pp|`.
pub fn fast_creation_energy(mu: f64, self_term: f64) -> f64 {
    mu + 4.0 * self_term.abs()
}

fn bose(beta: f64, eps: f64) -> f64 {
    1.0 / (beta * eps).exp_m1()
}

/// Difference quotient `(n_k - n_k') / (eps_k' - eps_k)`, with its analytic
/// limit `beta n (n + 1)` for (near-)degenerate energies.
fn chi_term(beta: f64, e1: f64, e2: f64, scale: f64) -> f64 {
    let d = e2 - e1;
    if d.abs() <= 1e-7 * scale {
        let e = 0.5 * (e1 + e2);
        let n = bose(beta, e);
        beta * n * (n + 1.0)
    } else {
        (bose(beta, e1) - bose(beta, e2)) / d
    }
}

fn check_chi_inputs(q: [i64; 3], beta: f64) -> Result<()> {
    if q == [0, 0, 0] {
        return Err(invalid("q", "the susceptibility is defined for q != 0"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid("beta", "must be positive and finite"));
    }
    Ok(())
}

/// Static boson susceptibility `chi(q) = (1/N) sum_k (n_k - n_{k+q}) / (eps_{k+q} - eps_k)`.
///
/// `q` is given in units of `2 pi / Lambda`. The zone average is evaluated on
/// a midpoint grid `refine` times finer than the bath, which keeps `k + q` on
/// the grid and avoids the divergent Bose factor at `k = 0`.
pub fn susceptibility_refined(
    q: [i64; 3],
    beta: f64,
    t: f64,
    lambda: usize,
    refine: usize,
) -> Result<f64> {
    check_chi_inputs(q, beta)?;
    if refine == 0 {
        return Err(invalid("refine", "must be at least 1"));
    }
    BathSpectrum::new(lambda, t)?;
    let m = lambda * refine;
    let cos: Vec<f64> = (0..m)
        .map(|i| ((i as f64 + 0.5) * 2.0 * PI / m as f64).cos())
        .collect();
    let shift = q.map(|c| (c * refine as i64).rem_euclid(m as i64) as usize);
    let planes: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let ci = cos[i];
            let cqi = cos[(i + shift[0]) % m];
            let mut plane = 0.0;
            for j in 0..m {
                let b1 = 3.0 - ci - cos[j];
                let b2 = 3.0 - cqi - cos[(j + shift[1]) % m];
                for k in 0..m {
                    let e1 = 2.0 * t * (b1 - cos[k]);
                    let e2 = 2.0 * t * (b2 - cos[(k + shift[2]) % m]);
                    plane += chi_term(beta, e1, e2, t);
                }
            }
            plane
        })
        .collect();
    // Sequential reduction keeps the result independent of the thread count.
    let total: f64 = planes.iter().sum();
    Ok(total / (m * m * m) as f64)
}

pub const CHI_REFINE: usize = 8;

pub fn susceptibility(q: [i64; 3], beta: f64, t: f64, lambda: usize) -> Result<f64> {
    susceptibility_refined(q, beta, t, lambda, CHI_REFINE)
}

/// The same sum restricted to the bath's own modes, dropping `k = 0` and `k = -q`.
pub fn susceptibility_mode_sum(q: [i64; 3], beta: f64, t: f64, lambda: usize) -> Result<f64> {
    check_chi_inputs(q, beta)?;
    let spec = BathSpectrum::new(lambda, t)?;
    let n = lambda as i64;
    let qm = q.map(|c| c.rem_euclid(n));
    let minus_q = q.map(|c| (-c).rem_euclid(n));
    let mut total = 0.0;
    for kx in 0..n {
        for ky in 0..n {
            for kz in 0..n {
                let k = [kx, ky, kz];
                if k == [0, 0, 0] || k == minus_q {
                    continue;
                }
                let e1 = spec.energy(k);
                let e2 = spec.energy([kx + qm[0], ky + qm[1], kz + qm[2]]);
                total += chi_term(beta, e1, e2, t);
            }
        }
    }
    Ok(total / spec.num_modes() as f64)
}

/// Small-`q` asymptote `T / (8 t^2 |q|)`.
pub fn susceptibility_asymptote(q_abs: f64, beta: f64, t: f64) -> f64 {
    1.0 / (beta * 8.0 * t * t * q_abs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOracleParams {
    pub a: f64,
    pub t: f64,
    pub beta: f64,
    pub lambda: usize,
    /// Chemical offset keeping every single-particle level positive.
    pub m: f64,
}

impl DensityOracleParams {
    /// Offset `m = 10 A`.
    pub fn with_default_offset(a: f64, t: f64, beta: f64, lambda: usize) -> Self {
        Self {
            a,
            t,
            beta,
            lambda,
            m: 10.0 * a,
        }
    }
}

/// Bath sites of the stabilizers: the code plane is rotated by 45 degrees
/// and scaled by `sqrt 2`, so `(x, y)` maps to `(x + y, x - y, z0)`. This
/// puts both species on distinct integer sites and needs `Lambda >= 2L`.
pub fn embed_stabilizers(lattice: &CodeLattice, lambda: usize) -> Result<Vec<[i64; 3]>> {
    if lambda < 2 * lattice.l {
        return Err(Error::Embedding {
            lambda,
            l: lattice.l,
        });
    }
    let uv: Vec<(i64, i64)> = lattice
        .stabilizers
        .iter()
        .map(|s| {
            let [hx, hy] = s.half_position;
            ((hx + hy) / 2, (hx - hy) / 2)
        })
        .collect();
    let umin = uv.iter().map(|p| p.0).min().unwrap_or(0);
    let vmin = uv.iter().map(|p| p.1).min().unwrap_or(0);
    let z0 = (lambda / 2) as i64;
    Ok(uv
        .into_iter()
        .map(|(u, v)| [u - umin, v - vmin, z0])
        .collect())
}

/// Bath distance between two embedded stabilizers, `sqrt 2` times the code distance.
pub fn embedded_distance(lattice: &CodeLattice, p: usize, q: usize) -> f64 {
    2f64.sqrt() * lattice.planar_distance(p, q)
}

/// Second-order prediction `4 sum_{q != p} |J(r_bath)|` of the density-coupled chemical potential.
pub fn density_mu_embedded(
    lattice: &CodeLattice,
    p: usize,
    a: f64,
    t: f64,
    temperature: f64,
) -> Result<f64> {
    let mut mu = 0.0;
    for q in 0..lattice.num_stabilizers() {
        if q != p {
            mu +=
                4.0 * kernel_density(embedded_distance(lattice, p, q), a, a, t, temperature)?.abs();
        }
    }
    Ok(mu)
}

/// Single-particle levels of the bath with the stabilizer pattern of
/// `config` imprinted on the on-site energies `6t + m + A W_p`.
pub fn density_spectrum(
    lattice: &CodeLattice,
    config: &AnyonConfig,
    p: &DensityOracleParams,
) -> Result<Vec<f64>> {
    if !(p.t > 0.0 && p.beta > 0.0 && p.beta.is_finite() && p.m >= 0.0) {
        return Err(invalid(
            "density oracle",
            "need t > 0, finite beta > 0 and m >= 0",
        ));
    }
    let sites = embed_stabilizers(lattice, p.lambda)?;
    let n = p.lambda;
    let dim = n * n * n;
    let idx = |x: usize, y: usize, z: usize| (x % n) * n * n + (y % n) * n + (z % n);
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let i = idx(x, y, z);
                h[(i, i)] = 6.0 * p.t + p.m;
                for j in [idx(x + 1, y, z), idx(x, y + 1, z), idx(x, y, z + 1)] {
                    h[(i, j)] -= p.t;
                    h[(j, i)] -= p.t;
                }
            }
        }
    }
    for (q, s) in sites.iter().enumerate() {
        let i = idx(s[0] as usize, s[1] as usize, s[2] as usize);
        h[(i, i)] += p.a * f64::from(config.w(q));
    }
    let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    Ok(eig)
}

/// Free energy `F = T sum_m ln(1 - exp(-beta lambda_m))` of the free bosons.
pub fn density_oracle(
    lattice: &CodeLattice,
    config: &AnyonConfig,
    p: &DensityOracleParams,
) -> Result<f64> {
    let eig = density_spectrum(lattice, config, p)?;
    let min = eig.first().copied().unwrap_or(f64::INFINITY);
    if min <= 0.0 {
        return Err(Error::SpectrumNotPositive(min));
    }
    Ok(eig
        .iter()
        .map(|&l| (-(-p.beta * l).exp_m1()).ln())
        .sum::<f64>()
        / p.beta)
}

/// Free-energy cost of one anyon at `site`, split into the parts even and
/// odd in `A`. The even part is the bath-mediated term; the odd part is the
/// first-order on-site shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityCreation {
    pub even: f64,
    pub odd: f64,
}

pub fn density_creation_cost(
    lattice: &CodeLattice,
    site: usize,
    p: &DensityOracleParams,
) -> Result<DensityCreation> {
    if site >= lattice.num_stabilizers() {
        return Err(invalid("site", format!("{site} out of range")));
    }
    let vacuum = AnyonConfig::vacuum(lattice);
    let one = AnyonConfig::from_occupied(lattice, &[site])?;
    let mut d = [0.0; 2];
    for (k, a) in [p.a, -p.a].into_iter().enumerate() {
        let q = DensityOracleParams { a, ..p.clone() };
        d[k] = density_oracle(lattice, &one, &q)? - density_oracle(lattice, &vacuum, &q)?;
    }
    Ok(DensityCreation {
        even: 0.5 * (d[0] + d[1]),
        odd: 0.5 * (d[0] - d[1]),
    })
}

fn occupation_factor(beta: f64, t: f64) -> f64 {
    if beta.is_infinite() {
        return 1.0;
    }
    1.0 + ZETA_3_2 / (4.0 * (PI * beta * t).powf(1.5))
}

/// Thermal spread of the bath operator felt by a plaquette in a fast flip.
pub fn sigma_fast(a: f64, beta: f64, t: f64) -> Result<f64> {
    if !(beta > 0.0 && t > 0.0) {
        return Err(invalid("beta", "beta and t must be positive"));
    }
    Ok(a * (4.0 * occupation_factor(beta, t)).sqrt())
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// `C_n = sqrt 2 A (n! / (n/2)!)^{1/n} sqrt(1 + ...)` for even `n`, zero for odd `n`.
pub fn moment(n: u32, a: f64, beta: f64, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "moment order must be at least 1"));
    }
    if !(beta > 0.0 && t > 0.0) {
        return Err(invalid("beta", "beta and t must be positive"));
    }
    if n % 2 == 1 {
        return Ok(0.0);
    }
    // (n! / (n/2)!)^{2/n}, exact for n = 2.
    let ratio_sq = if n <= 100 {
        let r: f64 = (n / 2 + 1..=n).map(f64::from).product();
        r.powf(2.0 / n as f64)
    } else {
        (2.0 * (ln_factorial(n) - ln_factorial(n / 2)) / n as f64).exp()
    };
    Ok(a * (2.0 * ratio_sq * occupation_factor(beta, t)).sqrt())
}

/// Both sides of `sum_{k,r} (-1)^k xi^r / (k! r! (n-k-2r)!) = xi^{n/2} / (n/2)!` (zero for odd `n`).
pub fn wick_sides(n: u32, xi: f64) -> (f64, f64) {
    let fact = |m: u32| -> f64 { (1..=m).map(f64::from).product() };
    let mut lhs = 0.0;
    for r in 0..=n / 2 {
        for k in 0..=(n - 2 * r) {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            lhs += sign * xi.powi(r as i32) / (fact(k) * fact(r) * fact(n - k - 2 * r));
        }
    }
    let rhs = if n.is_multiple_of(2) {
        xi.powi((n / 2) as i32) / fact(n / 2)
    } else {
        0.0
    };
    (lhs, rhs)
}

pub fn wick_identity_check(n: u32, xi: f64) -> Result<bool> {
    if !(1..=20).contains(&n) || !(xi > 0.0) {
        return Err(invalid("n", "need 1 <= n <= 20 and xi > 0"));
    }
    let (lhs, rhs) = wick_sides(n, xi);
    let scale = rhs.abs().max(xi.max(1.0).powi((n / 2) as i32) * 1e-3);
    Ok((lhs - rhs).abs() <= 1e-10 * scale)
}
