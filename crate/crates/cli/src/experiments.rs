use std::path::PathBuf;

use serde::Serialize;
use toric_bath::bath::{
    density_creation_cost, density_mu_embedded, density_oracle, density_spectrum, discrete_kernel,
    moment, sigma_fast, susceptibility_asymptote, susceptibility_mode_sum, susceptibility_refined,
    wick_identity_check, wick_sides, DensityOracleParams, FiniteSize, CHI_REFINE,
};
use toric_bath::couplings::{
    build_kernel, kernel_displacement, lattice_sum_inverse_r, self_term_integral,
    square_integral_constant, CouplingKind, ModelParams,
};
use toric_bath::decoder::{
    decode, extract_syndrome, is_logical_failure, ErrorSet, MatchingDecoder,
};
use toric_bath::dynamics::{
    default_hindering_pairs, ensemble, hindering_barrier, lifetime_ensemble, run_hindering,
    HinderOptions, LifetimeOptions, Simulation,
};
use toric_bath::energetics::{
    config_energy, pair_creation_cost, solve_self_consistent, AnyonConfig,
};
use toric_bath::geometry::{CodeLattice, Species};
use toric_bath::stats::{linear_fit, median, LinearFit};

use crate::config::{PatternSpec, RunConfig};
use crate::output::OutDir;
use crate::CliError;

pub const EXPERIMENTS: [&str; 12] = [
    "sum-scan",
    "kernel",
    "mu-scan",
    "oracle-displacement",
    "oracle-density",
    "chi",
    "moments",
    "meanfield",
    "simulate",
    "hinder",
    "decode-test",
    "energy",
];

pub fn is_stochastic(experiment: &str) -> bool {
    matches!(experiment, "simulate" | "hinder")
}

pub fn run_experiment(name: &str, cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    match name {
        "sum-scan" => sum_scan(cfg, out),
        "kernel" => kernel(cfg, out),
        "mu-scan" => mu_scan(cfg, out),
        "oracle-displacement" => oracle_displacement(cfg, out),
        "oracle-density" => oracle_density(cfg, out),
        "chi" => chi(cfg, out),
        "moments" => moments(cfg, out),
        "meanfield" => meanfield(cfg, out),
        "simulate" => simulate(cfg, out),
        "hinder" => hinder(cfg, out),
        "decode-test" => decode_test(cfg, out),
        "energy" => energy(cfg, out),
        other => Err(CliError::UnknownExperiment(other.to_string())),
    }
}

fn default_sizes(cfg: &RunConfig) -> Vec<usize> {
    cfg.sizes.clone().unwrap_or_else(|| vec![8, 16, 32, 64])
}

fn fit_or_none(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    linear_fit(xs, ys).ok()
}

#[derive(Serialize)]
struct SumRow {
    l: usize,
    inverse_r: f64,
    inverse_r2: f64,
}

fn sum_scan(cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    let mut rows = Vec::new();
    for l in default_sizes(cfg) {
        rows.push(SumRow {
            l,
            inverse_r: lattice_sum_inverse_r(l, 1)?,
            inverse_r2: lattice_sum_inverse_r(l, 2)?,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.l as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.inverse_r).collect();
    let fit = fit_or_none(&xs, &ys);
    let summary = serde_json::json!({
        "fit_inverse_r": fit,
        "continuum_slope": 2.0 * square_integral_constant(),
    });
    Ok(vec![
        out.csv("sum_scan.csv", &rows)?,
        out.json("sum_scan_summary.json", &summary)?,
    ])
}

#[derive(Serialize)]
struct MuRow {
    index: usize,
    species: Species,
    x: f64,
    y: f64,
    amplitude: f64,
    weak: bool,
    mu: f64,
    self_term: Option<f64>,
}

#[derive(Serialize)]
struct PairRow {
    p: usize,
    q: usize,
    r: f64,
    j: f64,
}

fn kernel(cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    let params = &cfg.params;
    params.validate()?;
    let lattice = CodeLattice::new(params.l)?;
    let pattern = cfg.pattern().build(&lattice, params.a)?;
    let k = build_kernel(&lattice, &pattern, params)?;
    let mu_rows: Vec<MuRow> = lattice
        .stabilizers
        .iter()
        .enumerate()
        .map(|(i, s)| MuRow {
            index: i,
            species: s.species,
            x: s.position[0],
            y: s.position[1],
            amplitude: k.amplitude(i),
            weak: pattern.is_weak(i),
            mu: k.mu(i),
            self_term: k.self_term(i),
        })
        .collect();
    let n = lattice.num_stabilizers();
    let mut pair_rows = Vec::with_capacity(n * (n - 1) / 2);
    for p in 0..n {
        for q in p + 1..n {
            pair_rows.push(PairRow {
                p,
                q,
                r: lattice.planar_distance(p, q),
                j: k.pair(p, q),
            });
        }
    }
    Ok(vec![
        out.csv("kernel_mu.csv", &mu_rows)?,
        out.csv("kernel_pairs.csv", &pair_rows)?,
    ])
}

#[derive(Serialize)]
struct MuScanRow {
    l: usize,
    mu_center: f64,
    mu_corner: f64,
    mu_center_scaled: f64,
}

fn mu_scan(cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    let (a, t) = (cfg.params.a, cfg.params.t);
    let mut rows = Vec::new();
    for l in default_sizes(cfg) {
        let mut params = cfg.params.clone();
        params.l = l;
        params.lambda = None;
        params.validate()?;
        let lattice = CodeLattice::new(l)?;
        let pattern = cfg.pattern().build(&lattice, a)?;
        let k = build_kernel(&lattice, &pattern, &params)?;
        let mu_center = k.mu(lattice.center_stabilizer());
        rows.push(MuScanRow {
            l,
            mu_center,
            mu_corner: k.mu(lattice.corner_stabilizer()),
            mu_center_scaled: mu_center * t / (a * a * l as f64),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.l as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mu_center).collect();
    let fit = fit_or_none(&xs, &ys);
    let expected = 2.0 * a * a / t;
    let summary = serde_json::json!({
        "fit_mu_center": fit,
        "expected_slope": expected,
        "relative_slope_deviation": fit.map(|f| (f.slope - expected) / expected),
    });
    Ok(vec![
        out.csv("mu_scan.csv", &rows)?,
        out.json("mu_scan_summary.json", &summary)?,
    ])
}

#[derive(Serialize)]
struct KernelOracleRow {
    lambda: usize,
    dx: i64,
    dy: i64,
    dz: i64,
    r: f64,
    discrete_raw: f64,
    discrete_corrected: f64,
    continuum: f64,
    relative_deviation: f64,
}

fn oracle_displacement(cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    let (a, t) = (cfg.params.a, cfg.params.t);
    let lambdas = cfg.lambdas.clone().unwrap_or_else(|| vec![16, 24, 32]);
    let seps = cfg.separations.clone().unwrap_or_else(|| {
        vec![
            [0, 0, 0],
            [3, 0, 0],
            [2, 2, 2],
            [4, 3, 0],
            [3, 4, 0],
            [5, 0, 0],
        ]
    });
    let self_term = self_term_integral(t, a, 128)?;
    let mut rows = Vec::new();
    for &lambda in &lambdas {
        for &dr in &seps {
            let r = ((dr[0] * dr[0] + dr[1] * dr[1] + dr[2] * dr[2]) as f64).sqrt();
            let raw = discrete_kernel(dr, a, t, lambda, FiniteSize::None)?;
            let corrected = discrete_kernel(dr, a, t, lambda, FiniteSize::Background)?;
            let continuum = if r == 0.0 {
                self_term
            } else {
                kernel_displacement(r, a, a, t)?
            };
            rows.push(KernelOracleRow {
                lambda,
                dx: dr[0],
                dy: dr[1],
                dz: dr[2],
                r,
                discrete_raw: raw,
                discrete_corrected: corrected,
                continuum,
                relative_deviation: corrected / continuum - 1.0,
            });
        }
    }
    Ok(vec![out.csv("oracle_displacement.csv", &rows)?])
}

#[derive(Serialize)]
struct DensityRow {
    state: &'static str,
    amplitude: f64,
    free_energy: f64,
}

#[derive(Serialize)]
struct EigenRow {
    state: &'static str,
    amplitude: f64,
    index: usize,
    eigenvalue: f64,
}

fn oracle_density(cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    let p = &cfg.params;
    let mut dp = p.clone();
    dp.coupling_kind = CouplingKind::Density;
    dp.validate()?;
    let lattice = CodeLattice::new(p.l)?;
    let op = DensityOracleParams {
        a: p.a,
        t: p.t,
        beta: p.beta,
        lambda: p.lambda.unwrap_or(2 * p.l),
        m: cfg.chem_offset.unwrap_or(10.0 * p.a),
    };
    let center = lattice.center_stabilizer();
    let vacuum = AnyonConfig::vacuum(&lattice);
    let one = AnyonConfig::from_occupied(&lattice, &[center])?;
    let mut rows = Vec::new();
    let mut eig_rows = Vec::new();
    for (state, config) in [("vacuum", &vacuum), ("single", &one)] {
        for amplitude in [p.a, -p.a] {
            let q = DensityOracleParams {
                a: amplitude,
                ..op.clone()
            };
            rows.push(DensityRow {
                state,
                amplitude,
                free_energy: density_oracle(&lattice, config, &q)?,
            });
            if cfg.dump_eigenvalues.unwrap_or(false) {
                for (index, eigenvalue) in density_spectrum(&lattice, config, &q)?
                    .into_iter()
                    .enumerate()
                {
                    eig_rows.push(EigenRow {
                        state,
                        amplitude,
                        index,
                        eigenvalue,
                    });
                }
            }
        }
    }
    let cost = density_creation_cost(&lattice, center, &op)?;
    let prediction = density_mu_embedded(&lattice, center, p.a, p.t, 1.0 / p.beta)?;
    let summary = serde_json::json!({
        "lambda": op.lambda,
        "chem_offset": op.m,
        "delta_f_even": cost.even,
        "delta_f_odd": cost.odd,
        "kernel_prediction": prediction,
        "ratio": cost.even / prediction,
    });
    let mut files = vec![
        out.csv("oracle_density.csv", &rows)?,
        out.json("oracle_density_summary.json", &summary)?,
    ];
    if !eig_rows.is_empty() {
        files.push(out.csv("oracle_density_eigenvalues.csv", &eig_rows)?);
    }
    Ok(files)
}

#[derive(Serialize)]
struct ChiRow {
    qx: i64,
    qy: i64,
    qz: i64,
    q_abs: f64,
    chi: f64,
    chi_mode_sum: f64,
    asymptote: f64,
    scaled: f64,
}

fn chi(cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    let p = &cfg.params;
    let lambda = p.lambda.unwrap_or(32);
    let refine = cfg.chi_refine.unwrap_or(CHI_REFINE);
    let qs = cfg
        .q
        .clone()
        .unwrap_or_else(|| vec![[1, 0, 0], [1, 1, 0], [2, 0, 0]]);
    let mut rows = Vec::new();
    for q in qs {
        let q_abs = 2.0 * std::f64::consts::PI / lambda as f64
            * ((q[0] * q[0] + q[1] * q[1] + q[2] * q[2]) as f64).sqrt();
        let chi = susceptibility_refined(q, p.beta, p.t, lambda, refine)?;
        let asymptote = susceptibility_asymptote(q_abs, p.beta, p.t);
        rows.push(ChiRow {
            qx: q[0],
            qy: q[1],
            qz: q[2],
            q_abs,
            chi,
            chi_mode_sum: susceptibility_mode_sum(q, p.beta, p.t, lambda)?,
            asymptote,
            scaled: chi / asymptote,
        });
    }
    Ok(vec![out.csv("chi.csv", &rows)?])
}

#[derive(Serialize)]
struct MomentRow {
    n: u32,
    moment: f64,
    wick_lhs: f64,
    wick_rhs: f64,
    wick_ok: bool,
}

fn moments(cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    let p = &cfg.params;
    let xi = cfg.wick_xi.unwrap_or(0.7);
    let orders = cfg.orders.clone().unwrap_or_else(|| (1..=12).collect());
    let mut rows = Vec::new();
    for n in orders {
        let (lhs, rhs) = wick_sides(n, xi);
        rows.push(MomentRow {
            n,
            moment: moment(n, p.a, p.beta, p.t)?,
            wick_lhs: lhs,
            wick_rhs: rhs,
            wick_ok: wick_identity_check(n, xi)?,
        });
    }
    let summary = serde_json::json!({ "sigma_fast": sigma_fast(p.a, p.beta, p.t)? });
    Ok(vec![
        out.csv("moments.csv", &rows)?,
        out.json("moments_summary.json", &summary)?,
    ])
}

#[derive(Serialize)]
struct MeanFieldRow {
    beta_delta0: f64,
    regime: String,
    num_roots: usize,
    roots: String,
    stable: String,
}

fn meanfield(cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    let grid = cfg
        .beta_delta0
        .clone()
        .unwrap_or_else(|| (1..=12).map(|i| 0.5 * i as f64).collect());
    let tol = cfg.tol.unwrap_or(1e-12);
    let mut rows = Vec::new();
    for bd in grid {
        let s = solve_self_consistent(bd, tol)?;
        rows.push(MeanFieldRow {
            beta_delta0: bd,
            regime: format!("{:?}", s.regime).to_lowercase(),
            num_roots: s.roots.len(),
            roots: s
                .roots
                .iter()
                .map(|r| format!("{r:.12e}"))
                .collect::<Vec<_>>()
                .join(";"),
            stable: s
                .stable
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        });
    }
    Ok(vec![out.csv("meanfield.csv", &rows)?])
}

fn simulation(cfg: &RunConfig, params: ModelParams) -> Result<Simulation, CliError> {
    params.validate()?;
    let lattice = CodeLattice::new(params.l)?;
    let pattern = cfg.pattern().build(&lattice, params.a)?;
    Ok(Simulation::new(lattice, pattern, params)?)
}

/// `delta(0)` for the configured model, from the centre chemical potential.
pub fn delta0(cfg: &RunConfig) -> Result<f64, CliError> {
    let sim = simulation(cfg, cfg.params.clone())?;
    let c = sim.lattice.center_stabilizer();
    Ok(pair_creation_cost(
        sim.kernel.mu(c),
        cfg.params.a,
        cfg.params.t,
    ))
}

#[derive(Serialize)]
struct TrajectoryRow {
    point: usize,
    beta: f64,
    beta_delta0: f64,
    stream: u64,
    lifetime: f64,
    censored: bool,
    termination: String,
    events: u64,
}

#[derive(Serialize)]
struct PointSummary {
    beta: f64,
    beta_delta0: f64,
    median_lifetime: f64,
    censored: usize,
}

fn simulate(cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    let seed = cfg.require_seed()?;
    let d0 = delta0(cfg)?;
    let betas: Vec<f64> = match &cfg.beta_delta0 {
        Some(grid) => grid.iter().map(|bd| bd / d0).collect(),
        None => vec![cfg.params.beta],
    };
    let n = cfg.ensemble.unwrap_or(50);
    let defaults = LifetimeOptions::default();
    let opts = LifetimeOptions {
        horizon: cfg.horizon.unwrap_or(defaults.horizon),
        decode_stride: cfg.decode_stride.unwrap_or(1),
        max_events: cfg.max_events.unwrap_or(defaults.max_events),
        record: false,
    };
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (i, &beta) in betas.iter().enumerate() {
        let mut params = cfg.params.clone();
        params.beta = beta;
        let sim = simulation(cfg, params)?;
        let point_seed = seed.wrapping_add(i as u64);
        let trajectories = lifetime_ensemble(&sim, &MatchingDecoder, &opts, point_seed, n)?;
        let lifetimes: Vec<f64> = trajectories.iter().map(|t| t.lifetime).collect();
        for t in &trajectories {
            rows.push(TrajectoryRow {
                point: i,
                beta,
                beta_delta0: beta * d0,
                stream: t.stream,
                lifetime: t.lifetime,
                censored: t.censored,
                termination: format!("{:?}", t.termination).to_lowercase(),
                events: t.num_events,
            });
        }
        points.push(PointSummary {
            beta,
            beta_delta0: beta * d0,
            median_lifetime: median(&lifetimes).unwrap_or(f64::NAN),
            censored: trajectories.iter().filter(|t| t.censored).count(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.beta_delta0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.median_lifetime.ln()).collect();
    let summary = serde_json::json!({
        "master_seed": seed,
        "delta0": d0,
        "ensemble": n,
        "points": points,
        "fit_ln_median_vs_beta_delta0": fit_or_none(&xs, &ys),
    });
    Ok(vec![
        out.csv("trajectories.csv", &rows)?,
        out.json("simulate_summary.json", &summary)?,
    ])
}

#[derive(Serialize)]
struct EscapeRow {
    point: usize,
    a_weak: f64,
    barrier: f64,
    stream: u64,
    time: f64,
    end: String,
    censored: bool,
    events: u64,
}

fn hinder(cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    let seed = cfg.require_seed()?;
    let params = cfg.params.clone();
    params.validate()?;
    let a_strong = match cfg.pattern() {
        PatternSpec::Square { a_strong, .. } => a_strong,
        PatternSpec::Uniform => params.a,
    };
    let weak = cfg.a_weak.clone().unwrap_or_else(|| vec![0.8, 0.65, 0.5]);
    let n = cfg.ensemble.unwrap_or(50);
    let defaults = HinderOptions::default();
    let opts = HinderOptions {
        horizon: cfg.horizon.unwrap_or(defaults.horizon),
        max_events: cfg.max_events.unwrap_or(defaults.max_events),
    };
    let lattice = CodeLattice::new(params.l)?;
    let pairs = cfg
        .seeded_pairs
        .clone()
        .unwrap_or_else(|| default_hindering_pairs(&lattice));
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (i, &aw) in weak.iter().enumerate() {
        let pattern = PatternSpec::Square {
            a_strong,
            a_weak: aw,
        }
        .build(&lattice, a_strong)?;
        let sim = Simulation::new(lattice.clone(), pattern, params.clone())?;
        let barrier = hindering_barrier(&sim);
        let point_seed = seed.wrapping_add(i as u64);
        let outcomes = ensemble(n, |s| run_hindering(&sim, &pairs, &opts, point_seed, s))?;
        let times: Vec<f64> = outcomes.iter().map(|o| o.time).collect();
        for (s, o) in outcomes.iter().enumerate() {
            rows.push(EscapeRow {
                point: i,
                a_weak: aw,
                barrier,
                stream: s as u64,
                time: o.time,
                end: format!("{:?}", o.end).to_lowercase(),
                censored: o.censored(),
                events: o.num_events,
            });
        }
        points.push(serde_json::json!({
            "a_weak": aw,
            "barrier": barrier,
            "median_escape": median(&times),
            "censored": outcomes.iter().filter(|o| o.censored()).count(),
        }));
    }
    let xs: Vec<f64> = points
        .iter()
        .map(|p| p["barrier"].as_f64().unwrap_or(f64::NAN))
        .collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|p| p["median_escape"].as_f64().unwrap_or(f64::NAN).ln())
        .collect();
    let summary = serde_json::json!({
        "master_seed": seed,
        "ensemble": n,
        "points": points,
        "fit_ln_median_vs_barrier": fit_or_none(&xs, &ys),
    });
    Ok(vec![
        out.csv("escape.csv", &rows)?,
        out.json("hinder_summary.json", &summary)?,
    ])
}

fn decode_test(cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    let lattice = CodeLattice::new(cfg.params.l)?;
    let list = cfg.errors.clone().unwrap_or_default();
    let errors = ErrorSet::from_list(&lattice, &list)?;
    let syndrome = extract_syndrome(&errors, &lattice);
    let correction = decode(&syndrome, &lattice)?;
    let failure = is_logical_failure(&errors, &correction, &lattice)?;
    let summary = serde_json::json!({
        "errors": list,
        "syndrome": syndrome,
        "correction": correction.to_list(),
        "failure": failure,
        "logical_failure": failure.any(),
    });
    Ok(vec![out.json("decode.json", &summary)?])
}

fn energy(cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    let params = &cfg.params;
    params.validate()?;
    let lattice = CodeLattice::new(params.l)?;
    let pattern = cfg.pattern().build(&lattice, params.a)?;
    let k = build_kernel(&lattice, &pattern, params)?;
    let occupied = cfg.occupied.clone().unwrap_or_default();
    let config = AnyonConfig::from_occupied(&lattice, &occupied)?;
    let summary = serde_json::json!({
        "occupied": occupied,
        "energy": config_energy(&config, &k),
        "physical": config.is_physical(),
        "count_s": config.count(Species::S),
        "count_p": config.count(Species::P),
        "mu": occupied.iter().map(|&q| k.mu(q)).collect::<Vec<_>>(),
    });
    Ok(vec![out.json("energy.json", &summary)?])
}
