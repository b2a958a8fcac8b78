//! Continuous-time kinetic Monte Carlo over single-spin Pauli processes.
//!
//! Every (spin, species) pair is a process that toggles two stabilizers of
//! that species. Rates depend only on the exact energy change and satisfy
//! detailed balance. Events are drawn with the Gillespie algorithm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::couplings::{build_kernel, CouplingPattern, InteractionKernel, ModelParams};
use crate::decoder::{is_logical_failure, Decoder, ErrorSet, LogicalFailure, Syndrome};
use crate::energetics::AnyonConfig;
use crate::error::{invalid, Result};
use crate::geometry::{CodeLattice, Flip, Species};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateLawKind {
    /// `gamma0 / (1 + e^{beta dE})`; bounded by `gamma0` for downhill moves.
    #[default]
    Glauber,
    /// `gamma0 min(1, e^{-beta dE})`.
    Metropolis,
    /// `gamma0 e^{-beta dE / 2}`.
    SymmetricExponential,
}

/// Transition rate for an energy change `delta_e`.
pub fn rate(delta_e: f64, law: RateLawKind, gamma0: f64, beta: f64) -> f64 {
    if delta_e == 0.0 {
        return match law {
            RateLawKind::Glauber => 0.5 * gamma0,
            _ => gamma0,
        };
    }
    let x = beta * delta_e;
    match law {
        RateLawKind::Glauber => {
            if x > 0.0 {
                let e = (-x).exp();
                gamma0 * e / (1.0 + e)
            } else {
                gamma0 / (1.0 + x.exp())
            }
        }
        RateLawKind::Metropolis => {
            if x <= 0.0 {
                gamma0
            } else {
                gamma0 * (-x).exp()
            }
        }
        RateLawKind::SymmetricExponential => gamma0 * (-0.5 * x).exp(),
    }
}

/// Lattice, couplings and rate law shared read-only by all trajectories.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub lattice: CodeLattice,
    pub pattern: CouplingPattern,
    pub kernel: InteractionKernel,
    pub params: ModelParams,
    processes: Vec<Flip>,
}

impl Simulation {
    /// Uniform coupling `A` on every stabilizer.
    pub fn uniform(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let lattice = CodeLattice::new(params.l)?;
        let pattern = CouplingPattern::uniform(&lattice, params.a);
        Self::new(lattice, pattern, params)
    }

    pub fn new(
        lattice: CodeLattice,
        pattern: CouplingPattern,
        params: ModelParams,
    ) -> Result<Self> {
        let kernel = build_kernel(&lattice, &pattern, &params)?;
        let processes = lattice.all_flips();
        Ok(Self {
            lattice,
            pattern,
            kernel,
            params,
            processes,
        })
    }

    /// Replaces the process set, e.g. to isolate a two-state system.
    pub fn restrict_processes(&mut self, processes: Vec<Flip>) -> Result<()> {
        if processes.is_empty() {
            return Err(invalid("processes", "at least one process is required"));
        }
        if let Some(f) = processes
            .iter()
            .find(|f| f.spin >= self.lattice.num_spins())
        {
            return Err(invalid(
                "processes",
                format!("spin {} out of range", f.spin),
            ));
        }
        self.processes = processes;
        Ok(())
    }

    pub fn processes(&self) -> &[Flip] {
        &self.processes
    }

    pub fn rate(&self, delta_e: f64) -> f64 {
        rate(
            delta_e,
            self.params.rate_law,
            self.params.gamma0,
            self.params.beta,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub spin: usize,
    pub species: Species,
    pub delta_e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Event(Event),
    /// The next event would fall after the horizon; the clock is set to it.
    Horizon,
    /// Every rate vanishes; nothing can ever happen.
    Frozen,
}

/// Anyon configuration, clock and cumulative error record of one trajectory.
#[derive(Debug, Clone)]
pub struct KmcState {
    pub config: AnyonConfig,
    pub errors: ErrorSet,
    pub time: f64,
    /// Sum of all event energy changes.
    pub energy: f64,
    pub events: u64,
    /// `h_q = sum_{occupied p != q} J_qp` for every stabilizer.
    fields: Vec<f64>,
    rates: Vec<f64>,
}

impl KmcState {
    pub fn vacuum(sim: &Simulation) -> Self {
        let config = AnyonConfig::vacuum(&sim.lattice);
        let errors = ErrorSet::empty(&sim.lattice);
        Self::new(sim, config, errors)
    }

    pub fn new(sim: &Simulation, config: AnyonConfig, errors: ErrorSet) -> Self {
        let n = sim.lattice.num_stabilizers();
        let fields = (0..n)
            .map(|q| crate::energetics::field(&config, q, &sim.kernel))
            .collect();
        Self {
            config,
            errors,
            time: 0.0,
            energy: 0.0,
            events: 0,
            fields,
            rates: Vec::new(),
        }
    }

    /// Exact energy change of `flip`, `O(1)` using the cached fields.
    pub fn delta(&self, sim: &Simulation, flip: Flip) -> f64 {
        let [q1, q2] = sim.lattice.flip_targets(flip);
        let dn1 = if self.config.is_occupied(q1) {
            -1.0
        } else {
            1.0
        };
        let dn2 = if self.config.is_occupied(q2) {
            -1.0
        } else {
            1.0
        };
        let k = &sim.kernel;
        dn1 * (k.mu(q1) + 8.0 * self.fields[q1])
            + dn2 * (k.mu(q2) + 8.0 * self.fields[q2])
            + 8.0 * k.pair(q1, q2) * dn1 * dn2
    }

    /// `(flip, dE, rate)` for every process of `sim`.
    pub fn process_rates(&self, sim: &Simulation) -> Vec<(Flip, f64, f64)> {
        sim.processes()
            .iter()
            .map(|&f| {
                let d = self.delta(sim, f);
                (f, d, sim.rate(d))
            })
            .collect()
    }

    fn apply(&mut self, sim: &Simulation, flip: Flip, delta_e: f64) {
        let [q1, q2] = sim.lattice.flip_targets(flip);
        let dn1 = if self.config.is_occupied(q1) {
            -1.0
        } else {
            1.0
        };
        let dn2 = if self.config.is_occupied(q2) {
            -1.0
        } else {
            1.0
        };
        for (q, h) in self.fields.iter_mut().enumerate() {
            *h += dn1 * sim.kernel.pair(q, q1) + dn2 * sim.kernel.pair(q, q2);
        }
        self.config.apply_flip(&sim.lattice, flip);
        self.errors.toggle(flip);
        self.energy += delta_e;
        self.events += 1;
    }

    pub fn syndrome(&self, lattice: &CodeLattice) -> Syndrome {
        Syndrome::from_sites(lattice, self.config.occupied())
    }
}

/// One Gillespie step; events later than `horizon` are not applied.
pub fn kmc_step<R: Rng + ?Sized>(
    state: &mut KmcState,
    sim: &Simulation,
    horizon: f64,
    rng: &mut R,
) -> StepOutcome {
    let mut rates = std::mem::take(&mut state.rates);
    rates.clear();
    let mut total = 0.0;
    for &f in sim.processes() {
        let r = sim.rate(state.delta(sim, f));
        total += r;
        rates.push(r);
    }
    if !(total > 0.0) {
        state.rates = rates;
        state.time = horizon;
        return StepOutcome::Frozen;
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    let dt = -u.ln() / total;
    if state.time + dt > horizon {
        state.rates = rates;
        state.time = horizon;
        return StepOutcome::Horizon;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = None;
    for (i, &r) in rates.iter().enumerate() {
        if r > 0.0 {
            chosen = Some(i);
            acc += r;
            if acc > target {
                break;
            }
        }
    }
    let flip = sim.processes()[chosen.expect("positive total rate")];
    let delta_e = state.delta(sim, flip);
    state.rates = rates;
    state.time += dt;
    state.apply(sim, flip, delta_e);
    StepOutcome::Event(Event {
        time: state.time,
        spin: flip.spin,
        species: flip.species,
        delta_e,
    })
}

/// Independent stream `stream` of the master seed.
pub fn trajectory_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// The decoder would have produced a logical error.
    Failure,
    Horizon,
    EventCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeOptions {
    pub horizon: f64,
    /// Run the decoder every `decode_stride` events.
    pub decode_stride: u64,
    pub max_events: u64,
    /// Keep the full event log and anyon-count samples.
    pub record: bool,
}

impl Default for LifetimeOptions {
    fn default() -> Self {
        Self {
            horizon: 1e6,
            decode_stride: 1,
            max_events: 10_000_000,
            record: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSample {
    pub time: f64,
    pub s: usize,
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: u64,
    pub stream: u64,
    /// First failure time, or the time reached when censored.
    pub lifetime: f64,
    pub termination: Termination,
    pub censored: bool,
    pub num_events: u64,
    pub energy_change: f64,
    pub failure: Option<LogicalFailure>,
    pub events: Vec<Event>,
    pub counts: Vec<CountSample>,
}

/// Evolves from the vacuum until the decoder first fails.
pub fn run_lifetime(
    sim: &Simulation,
    decoder: &dyn Decoder,
    opts: &LifetimeOptions,
    seed: u64,
    stream: u64,
) -> Result<Trajectory> {
    if !(opts.horizon > 0.0) {
        return Err(invalid("horizon", "must be positive"));
    }
    if opts.decode_stride == 0 {
        return Err(invalid("decode_stride", "must be at least 1"));
    }
    let mut rng = trajectory_rng(seed, stream);
    let mut state = KmcState::vacuum(sim);
    let mut events = Vec::new();
    let mut counts = Vec::new();
    let (termination, failure) = loop {
        if state.events >= opts.max_events {
            break (Termination::EventCap, None);
        }
        match kmc_step(&mut state, sim, opts.horizon, &mut rng) {
            StepOutcome::Horizon | StepOutcome::Frozen => break (Termination::Horizon, None),
            StepOutcome::Event(e) => {
                if opts.record {
                    events.push(e);
                    counts.push(CountSample {
                        time: e.time,
                        s: state.config.count(Species::S),
                        p: state.config.count(Species::P),
                    });
                }
            }
        }
        if state.events.is_multiple_of(opts.decode_stride) {
            let correction = decoder.correct(&state.syndrome(&sim.lattice), &sim.lattice)?;
            let f = is_logical_failure(&state.errors, &correction, &sim.lattice)?;
            if f.any() {
                break (Termination::Failure, Some(f));
            }
        }
    };
    Ok(Trajectory {
        seed,
        stream,
        lifetime: state.time,
        termination,
        censored: termination != Termination::Failure,
        num_events: state.events,
        energy_change: state.energy,
        failure,
        events,
        counts,
    })
}

/// Runs `n` independent jobs on streams `0..n` and returns results in stream order.
pub fn ensemble<T, F>(n: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n as u64).into_par_iter().map(job).collect()
}

pub fn lifetime_ensemble(
    sim: &Simulation,
    decoder: &dyn Decoder,
    opts: &LifetimeOptions,
    master_seed: u64,
    n: usize,
) -> Result<Vec<Trajectory>> {
    ensemble(n, |stream| {
        run_lifetime(sim, decoder, opts, master_seed, stream)
    })
}

/// Time spent with and without the anyon pair of a single process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStateStats {
    /// Energy of the pair state relative to the vacuum.
    pub delta_e: f64,
    pub time_vacuum: f64,
    pub time_pair: f64,
    pub visits_vacuum: u64,
    pub visits_pair: u64,
}

impl TwoStateStats {
    pub fn occupation_ratio(&self) -> f64 {
        self.time_pair / self.time_vacuum
    }
}

/// Detailed-balance toy: only `flip` may fire, so the system hops between
/// the vacuum and one fixed anyon pair.
pub fn run_two_state(
    sim: &Simulation,
    flip: Flip,
    n_events: u64,
    seed: u64,
) -> Result<TwoStateStats> {
    let mut sim = sim.clone();
    sim.restrict_processes(vec![flip])?;
    let mut rng = trajectory_rng(seed, 0);
    let mut state = KmcState::vacuum(&sim);
    let delta_e = state.delta(&sim, flip);
    let mut stats = TwoStateStats {
        delta_e,
        time_vacuum: 0.0,
        time_pair: 0.0,
        visits_vacuum: 0,
        visits_pair: 0,
    };
    for _ in 0..n_events {
        let before = state.time;
        let was_vacuum = state.config.is_empty();
        match kmc_step(&mut state, &sim, f64::INFINITY, &mut rng) {
            StepOutcome::Event(_) => {}
            _ => return Err(invalid("beta", "two-state system is frozen")),
        }
        if was_vacuum {
            stats.time_vacuum += state.time - before;
            stats.visits_vacuum += 1;
        } else {
            stats.time_pair += state.time - before;
            stats.visits_pair += 1;
        }
    }
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumStats {
    /// Time-averaged anyons per stabilizer.
    pub mean_density: f64,
    /// Standard error from equal-duration blocks.
    pub std_error: f64,
    pub block_means: Vec<f64>,
    pub num_events: u64,
}

/// Time-averaged anyon density after `burn_in` events, over `duration` time units.
pub fn run_equilibrium(
    sim: &Simulation,
    burn_in: u64,
    duration: f64,
    blocks: usize,
    seed: u64,
) -> Result<EquilibriumStats> {
    if blocks < 2 || !(duration > 0.0) {
        return Err(invalid(
            "blocks",
            "need at least two blocks and a positive duration",
        ));
    }
    let mut rng = trajectory_rng(seed, 0);
    let mut state = KmcState::vacuum(sim);
    for _ in 0..burn_in {
        if let StepOutcome::Frozen = kmc_step(&mut state, sim, f64::INFINITY, &mut rng) {
            break;
        }
    }
    let n = sim.lattice.num_stabilizers() as f64;
    let start = state.time;
    let block_len = duration / blocks as f64;
    let mut block_means = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let end = start + (b + 1) as f64 * block_len;
        let mut weighted = 0.0;
        loop {
            let before = state.time;
            let density = state.config.total() as f64 / n;
            let outcome = kmc_step(&mut state, sim, end, &mut rng);
            weighted += density * (state.time - before);
            if !matches!(outcome, StepOutcome::Event(_)) {
                break;
            }
        }
        block_means.push(weighted / block_len);
    }
    let mean = crate::stats::mean(&block_means).expect("blocks >= 2");
    let var = block_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (blocks - 1) as f64;
    Ok(EquilibriumStats {
        mean_density: mean,
        std_error: (var / blocks as f64).sqrt(),
        block_means,
        num_events: state.events,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrackEnd {
    /// A tracked anyon entered a weak region other than its own.
    LeftRegion,
    /// A tracked anyon moved more than `L/4` from where it started.
    Displaced,
    Annihilated,
    /// A tracked anyon that started on a strong plaquette reached a weak one.
    ReachedWeak,
    Horizon,
    EventCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackOutcome {
    pub time: f64,
    pub end: TrackEnd,
    pub label: Option<usize>,
    pub num_events: u64,
}

impl TrackOutcome {
    pub fn censored(&self) -> bool {
        matches!(self.end, TrackEnd::Horizon | TrackEnd::EventCap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HinderOptions {
    pub horizon: f64,
    pub max_events: u64,
}

impl Default for HinderOptions {
    fn default() -> Self {
        Self {
            horizon: 1e9,
            max_events: 10_000_000,
        }
    }
}

struct Tracked {
    site: usize,
    home: Option<usize>,
    dx: i64,
    dy: i64,
}

/// Follows the seeded anyons through hops until one of them escapes (or
/// settles, for anyons that start on strong plaquettes).
pub fn run_tracked(
    sim: &Simulation,
    seeded_pairs: &[(usize, usize)],
    opts: &HinderOptions,
    seed: u64,
    stream: u64,
) -> Result<TrackOutcome> {
    let lat = &sim.lattice;
    let mut sites = Vec::new();
    for &(a, b) in seeded_pairs {
        if a == b || a >= lat.num_stabilizers() || b >= lat.num_stabilizers() {
            return Err(invalid("seeded_pairs", format!("invalid pair ({a}, {b})")));
        }
        if lat.species_of(a) != lat.species_of(b) {
            return Err(invalid(
                "seeded_pairs",
                format!("pair ({a}, {b}) mixes species"),
            ));
        }
        sites.push(a);
        sites.push(b);
    }
    let config = AnyonConfig::from_occupied(lat, &sites)?;
    let mut tracked: Vec<Tracked> = sites
        .iter()
        .map(|&s| Tracked {
            site: s,
            home: sim.pattern.weak_region[s],
            dx: 0,
            dy: 0,
        })
        .collect();
    let mut label_at = vec![None; lat.num_stabilizers()];
    for (i, t) in tracked.iter().enumerate() {
        label_at[t.site] = Some(i);
    }
    let mut state = KmcState::new(sim, config, ErrorSet::empty(lat));
    let mut rng = trajectory_rng(seed, stream);
    let limit = lat.l as f64 / 4.0;
    let finish = |state: &KmcState, end, label| TrackOutcome {
        time: state.time,
        end,
        label,
        num_events: state.events,
    };
    loop {
        if state.events >= opts.max_events {
            return Ok(finish(&state, TrackEnd::EventCap, None));
        }
        let event = match kmc_step(&mut state, sim, opts.horizon, &mut rng) {
            StepOutcome::Event(e) => e,
            _ => return Ok(finish(&state, TrackEnd::Horizon, None)),
        };
        let [q1, q2] = lat.flip_targets(Flip {
            spin: event.spin,
            species: event.species,
        });
        let (o1, o2) = (state.config.is_occupied(q1), state.config.is_occupied(q2));
        match (o1, o2) {
            // Pair annihilated (state is after the event).
            (false, false) => {
                if let Some(l) = label_at[q1].or(label_at[q2]) {
                    return Ok(finish(&state, TrackEnd::Annihilated, Some(l)));
                }
            }
            // Pair created.
            (true, true) => {}
            _ => {
                let (from, to) = if o2 { (q1, q2) } else { (q2, q1) };
                if let Some(l) = label_at[from].take() {
                    label_at[to] = Some(l);
                    let (dx, dy) = lat.toroidal_displacement(from, to);
                    let t = &mut tracked[l];
                    t.site = to;
                    t.dx += dx;
                    t.dy += dy;
                    let region = sim.pattern.weak_region[to];
                    match (t.home, region) {
                        (None, Some(_)) => {
                            return Ok(finish(&state, TrackEnd::ReachedWeak, Some(l)))
                        }
                        (Some(h), Some(r)) if r != h => {
                            return Ok(finish(&state, TrackEnd::LeftRegion, Some(l)))
                        }
                        _ => {}
                    }
                    if ((t.dx * t.dx + t.dy * t.dy) as f64).sqrt() > limit {
                        return Ok(finish(&state, TrackEnd::Displaced, Some(l)));
                    }
                }
            }
        }
    }
}

/// Escape from weak regions; every seeded anyon must start on a weak plaquette.
pub fn run_hindering(
    sim: &Simulation,
    seeded_pairs: &[(usize, usize)],
    opts: &HinderOptions,
    seed: u64,
    stream: u64,
) -> Result<TrackOutcome> {
    for &(a, b) in seeded_pairs {
        for q in [a, b] {
            if q >= sim.lattice.num_stabilizers() || !sim.pattern.is_weak(q) {
                return Err(invalid(
                    "seeded_pairs",
                    format!("stabilizer {q} is not weak"),
                ));
            }
        }
    }
    run_tracked(sim, seeded_pairs, opts, seed, stream)
}

/// One `s` pair in the two weak clusters closest to the patch centre, one
/// anyon per cluster, so that neither starts next to the open boundary of
/// the planar kernel.
pub fn default_hindering_pairs(lattice: &CodeLattice) -> Vec<(usize, usize)> {
    let blocks = lattice.l / 4;
    let a = (4 * (blocks / 2)).saturating_sub(3);
    let b = 4 * (blocks / 2);
    vec![(
        lattice.stabilizer_index(Species::S, a, a),
        lattice.stabilizer_index(Species::S, b % lattice.l, b % lattice.l),
    )]
}

/// Barrier `(1 - A_w / A_s) mu_s` against leaving a weak cluster.
pub fn hindering_barrier(sim: &Simulation) -> f64 {
    let c = sim.lattice.center_stabilizer();
    let strong = (0..sim.lattice.num_stabilizers())
        .filter(|&q| !sim.pattern.is_weak(q))
        .min_by(|&a, &b| {
            sim.lattice
                .planar_distance(a, c)
                .total_cmp(&sim.lattice.planar_distance(b, c))
        })
        .unwrap_or(c);
    (1.0 - sim.pattern.a_weak / sim.pattern.a_strong) * sim.kernel.mu(strong)
}
