//! Near-optimal allocation search over the `(F_server, B)` box.
//!
//! All four algorithms share one driver: evaluate the initial population,
//! then iterate until the relative gap `(u_max − best)/best` drops below
//! `epsilon` or `n_max` iterations have run. `iterations_used` counts the
//! update sweeps executed, so a run that is already near-optimal after
//! initialization reports 0.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

use crate::offload::Allocation;
use crate::scenario::Scenario;

#[derive(Debug, Error, PartialEq)]
pub enum OptimizeError {
    #[error("objective returned non-finite value {value} at ({}, {}) in iteration {iteration}", position.f_server, position.b)]
    NonFinite {
        value: f64,
        position: Allocation,
        iteration: usize,
    },
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("trial {index} aborted: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<OptimizeError>,
    },
}

/// Hyperparameters shared by all algorithms; the inertia and velocity
/// fields only affect the swarm variants.
///
/// The default velocity floors equal the resource granularity of the
/// default parameter table (1 GHz, 0.1 Mbps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwarmConfig {
    /// Particle / population count.
    pub p_n: usize,
    pub w_max: f64,
    pub w_min: f64,
    /// Individual learning factor.
    pub c1_learn: f64,
    /// Social learning factor.
    pub c2_learn: f64,
    /// Minimum velocity magnitude along F, Hz per iteration.
    pub delta_f: f64,
    /// Minimum velocity magnitude along B, bit/s per iteration.
    pub delta_b: f64,
    pub n_max: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            p_n: 30,
            w_max: 0.9,
            w_min: 0.4,
            c1_learn: 2.0,
            c2_learn: 2.0,
            delta_f: 1e9,
            delta_b: 1e5,
            n_max: 50,
            epsilon: 0.001,
            seed: 0,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let fail = |msg: String| Err(OptimizeError::InvalidConfig(msg));
        if self.p_n < 2 {
            return fail(format!("p_n must be >= 2 (got {})", self.p_n));
        }
        if !(0.0 <= self.w_min && self.w_min <= self.w_max) {
            return fail(format!(
                "need 0 <= w_min <= w_max (got {}, {})",
                self.w_min, self.w_max
            ));
        }
        if !(self.epsilon > 0.0) {
            return fail(format!("epsilon must be > 0 (got {})", self.epsilon));
        }
        if self.n_max < 1 {
            return fail("n_max must be >= 1".into());
        }
        if !(self.delta_f >= 0.0 && self.delta_b >= 0.0) {
            return fail("velocity floors must be >= 0".into());
        }
        Ok(())
    }

    /// Apply one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), OptimizeError> {
        let bad = || OptimizeError::InvalidConfig(format!("invalid value `{value}` for `{key}`"));
        let float = || value.trim().parse::<f64>().map_err(|_| bad());
        let int = || value.trim().parse::<usize>().map_err(|_| bad());
        match key {
            "p_n" => self.p_n = int()?,
            "w_max" => self.w_max = float()?,
            "w_min" => self.w_min = float()?,
            "c1_learn" => self.c1_learn = float()?,
            "c2_learn" => self.c2_learn = float()?,
            "delta_f" => self.delta_f = float()?,
            "delta_b" => self.delta_b = float()?,
            "n_max" => self.n_max = int()?,
            "epsilon" => self.epsilon = float()?,
            "seed" => self.seed = value.trim().parse().map_err(|_| bad())?,
            other => {
                return Err(OptimizeError::InvalidConfig(format!(
                    "unknown optimizer key `{other}`"
                )))
            }
        }
        Ok(())
    }

    pub const KEYS: [&'static str; 10] = [
        "p_n", "w_max", "w_min", "c1_learn", "c2_learn", "delta_f", "delta_b", "n_max", "epsilon",
        "seed",
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    DiscPso,
    Pso,
    Ga,
    De,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::DiscPso, Algorithm::Pso, Algorithm::Ga, Algorithm::De];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::DiscPso => "disc-pso",
            Algorithm::Pso => "pso",
            Algorithm::Ga => "ga",
            Algorithm::De => "de",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = OptimizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| OptimizeError::InvalidConfig(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Best objective value found (S_gb).
    pub best_value: f64,
    /// Where it was found (P_gb).
    pub best_position: Allocation,
    /// Update sweeps executed (N_f).
    pub iterations_used: usize,
    /// Whether the gap condition was met before the iteration budget ran out.
    pub converged: bool,
    pub seed: u64,
    pub evaluations: usize,
    /// Best value after initialization and after every iteration.
    pub history: Vec<f64>,
}

/// Relative gap of a candidate value to the maximum.
pub fn relative_gap(u_max: f64, value: f64) -> f64 {
    (u_max - value) / value
}

/// The near-optimality test `(u_max − value)/value < epsilon`.
pub fn is_near_optimal(u_max: f64, value: f64, epsilon: f64) -> bool {
    relative_gap(u_max, value) < epsilon
}

/// Search box of a scenario, `[lo, hi]` per coordinate (F, B).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl SearchBox {
    pub fn of(s: &Scenario) -> Self {
        SearchBox {
            lo: [s.f_range.0, s.b_range.0],
            hi: [s.f_range.1, s.b_range.1],
        }
    }

    pub fn width(&self, dim: usize) -> f64 {
        self.hi[dim] - self.lo[dim]
    }

    pub fn clamp(&self, x: [f64; 2]) -> [f64; 2] {
        [
            x[0].clamp(self.lo[0], self.hi[0]),
            x[1].clamp(self.lo[1], self.hi[1]),
        ]
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> [f64; 2] {
        [
            self.lo[0] + self.width(0) * rng.random::<f64>(),
            self.lo[1] + self.width(1) * rng.random::<f64>(),
        ]
    }
}

fn to_alloc(x: [f64; 2]) -> Allocation {
    Allocation::new(x[0], x[1])
}

/// Counts objective calls and rejects non-finite values.
struct Evaluator<'a, F> {
    objective: &'a F,
    calls: usize,
}

impl<'a, F: Fn(Allocation) -> f64> Evaluator<'a, F> {
    fn new(objective: &'a F) -> Self {
        Evaluator { objective, calls: 0 }
    }

    fn eval(&mut self, x: [f64; 2], iteration: usize) -> Result<f64, OptimizeError> {
        self.calls += 1;
        let position = to_alloc(x);
        let value = (self.objective)(position);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(OptimizeError::NonFinite {
                value,
                position,
                iteration,
            })
        }
    }
}

/// One population-based search, advanced an iteration at a time.
trait Search {
    fn step(&mut self, iteration: usize) -> Result<(), OptimizeError>;
    fn best(&self) -> ([f64; 2], f64);
    fn evaluations(&self) -> usize;
}

fn drive<S: Search>(
    mut search: S,
    u_max: f64,
    cfg: &SwarmConfig,
    seed: u64,
) -> Result<RunResult, OptimizeError> {
    let mut history = Vec::with_capacity(cfg.n_max + 1);
    let finish = |search: &S, iterations_used, converged, history| {
        let (pos, val) = search.best();
        RunResult {
            best_value: val,
            best_position: to_alloc(pos),
            iterations_used,
            converged,
            seed,
            evaluations: search.evaluations(),
            history,
        }
    };
    history.push(search.best().1);
    if is_near_optimal(u_max, search.best().1, cfg.epsilon) {
        return Ok(finish(&search, 0, true, history));
    }
    for it in 0..cfg.n_max {
        search.step(it)?;
        let best = search.best().1;
        history.push(best);
        if is_near_optimal(u_max, best, cfg.epsilon) {
            return Ok(finish(&search, it + 1, true, history));
        }
    }
    Ok(finish(&search, cfg.n_max, false, history))
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best })
}

// ---------------------------------------------------------------------------
// Particle swarm
// ---------------------------------------------------------------------------

/// Which of the DISC-PSO enhancements are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PsoVariant {
    /// Linearly decaying inertia from `w_max` to `w_min`; otherwise fixed at `w_max`.
    pub dynamic_inertia: bool,
    /// Per-coordinate minimum velocity magnitude.
    pub velocity_floor: bool,
}

impl PsoVariant {
    pub const DISC: PsoVariant = PsoVariant {
        dynamic_inertia: true,
        velocity_floor: true,
    };
    pub const BASELINE: PsoVariant = PsoVariant {
        dynamic_inertia: false,
        velocity_floor: false,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    pub position: Allocation,
    /// `(dF, dB)` per iteration.
    pub velocity: (f64, f64),
    pub personal_best_position: Allocation,
    pub personal_best_value: f64,
}

/// Raise a nonzero velocity component to at least `delta` in magnitude,
/// keeping its sign. Zero stays zero.
pub fn apply_velocity_floor(v: f64, delta: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum() * v.abs().max(delta)
    }
}

/// Inertia weight for sweep `iteration` (0-based).
pub fn inertia_weight(cfg: &SwarmConfig, iteration: usize, dynamic: bool) -> f64 {
    if dynamic {
        cfg.w_max - (cfg.w_max - cfg.w_min) * iteration as f64 / cfg.n_max as f64
    } else {
        cfg.w_max
    }
}

struct Particle {
    pos: [f64; 2],
    vel: [f64; 2],
    best_pos: [f64; 2],
    best_val: f64,
}

/// A particle swarm that can be stepped manually; [`disc_pso`] and
/// [`baseline_pso`] drive it to termination.
pub struct Swarm<'a, F> {
    bounds: SearchBox,
    cfg: SwarmConfig,
    variant: PsoVariant,
    particles: Vec<Particle>,
    gbest_pos: [f64; 2],
    gbest_val: f64,
    rng: ChaCha8Rng,
    eval: Evaluator<'a, F>,
}

impl<'a, F: Fn(Allocation) -> f64> Swarm<'a, F> {
    pub fn new(
        s: &Scenario,
        objective: &'a F,
        cfg: &SwarmConfig,
        variant: PsoVariant,
        seed: u64,
    ) -> Result<Self, OptimizeError> {
        cfg.validate()?;
        let bounds = SearchBox::of(s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut eval = Evaluator::new(objective);
        let mut particles = Vec::with_capacity(cfg.p_n);
        for _ in 0..cfg.p_n {
            let pos = bounds.sample(&mut rng);
            let val = eval.eval(pos, 0)?;
            particles.push(Particle {
                pos,
                vel: [0.0, 0.0],
                best_pos: pos,
                best_val: val,
            });
        }
        let values: Vec<f64> = particles.iter().map(|p| p.best_val).collect();
        let lead = argmax(&values);
        Ok(Swarm {
            bounds,
            cfg: *cfg,
            variant,
            gbest_pos: particles[lead].best_pos,
            gbest_val: particles[lead].best_val,
            particles,
            rng,
            eval,
        })
    }

    pub fn particles(&self) -> Vec<ParticleState> {
        self.particles
            .iter()
            .map(|p| ParticleState {
                position: to_alloc(p.pos),
                velocity: (p.vel[0], p.vel[1]),
                personal_best_position: to_alloc(p.best_pos),
                personal_best_value: p.best_val,
            })
            .collect()
    }

    pub fn global_best(&self) -> (Allocation, f64) {
        (to_alloc(self.gbest_pos), self.gbest_val)
    }

    /// One sweep: move every particle, then re-evaluate and update bests.
    pub fn step(&mut self, iteration: usize) -> Result<(), OptimizeError> {
        let w = inertia_weight(&self.cfg, iteration, self.variant.dynamic_inertia);
        let floors = [self.cfg.delta_f, self.cfg.delta_b];
        for p in &mut self.particles {
            let r1: f64 = self.rng.random();
            let r2: f64 = self.rng.random();
            for d in 0..2 {
                let mut v = w * p.vel[d]
                    + self.cfg.c1_learn * r1 * (p.best_pos[d] - p.pos[d])
                    + self.cfg.c2_learn * r2 * (self.gbest_pos[d] - p.pos[d]);
                if self.variant.velocity_floor {
                    v = apply_velocity_floor(v, floors[d]);
                }
                p.vel[d] = v;
                p.pos[d] += v;
            }
            p.pos = self.bounds.clamp(p.pos);
        }
        for p in &mut self.particles {
            let value = self.eval.eval(p.pos, iteration + 1)?;
            if value > p.best_val {
                p.best_val = value;
                p.best_pos = p.pos;
            }
        }
        let values: Vec<f64> = self.particles.iter().map(|p| p.best_val).collect();
        let lead = argmax(&values);
        if values[lead] > self.gbest_val {
            self.gbest_val = values[lead];
            self.gbest_pos = self.particles[lead].best_pos;
        }
        Ok(())
    }
}

impl<F: Fn(Allocation) -> f64> Search for Swarm<'_, F> {
    fn step(&mut self, iteration: usize) -> Result<(), OptimizeError> {
        Swarm::step(self, iteration)
    }

    fn best(&self) -> ([f64; 2], f64) {
        (self.gbest_pos, self.gbest_val)
    }

    fn evaluations(&self) -> usize {
        self.eval.calls
    }
}

/// Run a swarm of the given variant to termination.
pub fn run_pso<F: Fn(Allocation) -> f64>(
    s: &Scenario,
    objective: &F,
    u_max: f64,
    cfg: &SwarmConfig,
    variant: PsoVariant,
) -> Result<RunResult, OptimizeError> {
    let swarm = Swarm::new(s, objective, cfg, variant, cfg.seed)?;
    drive(swarm, u_max, cfg, cfg.seed)
}

/// DISC-PSO: decaying inertia, velocity floor, and gap-based early stop.
pub fn disc_pso<F: Fn(Allocation) -> f64>(
    s: &Scenario,
    objective: &F,
    u_max: f64,
    cfg: &SwarmConfig,
) -> Result<RunResult, OptimizeError> {
    run_pso(s, objective, u_max, cfg, PsoVariant::DISC)
}

/// Standard PSO with inertia fixed at `w_max` and no velocity floor.
pub fn baseline_pso<F: Fn(Allocation) -> f64>(
    s: &Scenario,
    objective: &F,
    u_max: f64,
    cfg: &SwarmConfig,
) -> Result<RunResult, OptimizeError> {
    run_pso(s, objective, u_max, cfg, PsoVariant::BASELINE)
}

// ---------------------------------------------------------------------------
// Genetic algorithm
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Mutation standard deviation as a fraction of the box width.
    pub mutation_scale: f64,
    pub elitism: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            tournament_size: 2,
            crossover_rate: 0.8,
            mutation_rate: 0.1,
            mutation_scale: 0.05,
            elitism: 1,
        }
    }
}

struct Population<'a, F> {
    bounds: SearchBox,
    members: Vec<[f64; 2]>,
    values: Vec<f64>,
    rng: ChaCha8Rng,
    eval: Evaluator<'a, F>,
}

impl<'a, F: Fn(Allocation) -> f64> Population<'a, F> {
    fn new(
        s: &Scenario,
        objective: &'a F,
        p_n: usize,
        seed: u64,
        initial: Option<Vec<Allocation>>,
    ) -> Result<Self, OptimizeError> {
        let bounds = SearchBox::of(s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members: Vec<[f64; 2]> = match initial {
            Some(list) => list
                .into_iter()
                .map(|a| bounds.clamp([a.f_server, a.b]))
                .collect(),
            None => (0..p_n).map(|_| bounds.sample(&mut rng)).collect(),
        };
        let mut eval = Evaluator::new(objective);
        let values = members
            .iter()
            .map(|m| eval.eval(*m, 0))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Population {
            bounds,
            members,
            values,
            rng,
            eval,
        })
    }

    fn best(&self) -> ([f64; 2], f64) {
        let i = argmax(&self.values);
        (self.members[i], self.values[i])
    }
}

pub struct GeneticSearch<'a, F> {
    pop: Population<'a, F>,
    params: GaParams,
    mutation: [Normal<f64>; 2],
}

impl<'a, F: Fn(Allocation) -> f64> GeneticSearch<'a, F> {
    fn tournament(&mut self) -> usize {
        let n = self.pop.members.len();
        let mut winner = self.pop.rng.random_range(0..n);
        for _ in 1..self.params.tournament_size.max(1) {
            let rival = self.pop.rng.random_range(0..n);
            if self.pop.values[rival] > self.pop.values[winner] {
                winner = rival;
            }
        }
        winner
    }
}

impl<F: Fn(Allocation) -> f64> Search for GeneticSearch<'_, F> {
    fn step(&mut self, iteration: usize) -> Result<(), OptimizeError> {
        let n = self.pop.members.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| self.pop.values[j].total_cmp(&self.pop.values[i]));
        let elite = self.params.elitism.min(n);
        let mut next: Vec<[f64; 2]> = order[..elite].iter().map(|&i| self.pop.members[i]).collect();
        let mut next_values: Vec<f64> = order[..elite].iter().map(|&i| self.pop.values[i]).collect();
        while next.len() < n {
            let (i1, i2) = (self.tournament(), self.tournament());
            let (p1, p2) = (self.pop.members[i1], self.pop.members[i2]);
            let mut child = p1;
            if self.pop.rng.random::<f64>() < self.params.crossover_rate {
                let lambda: f64 = self.pop.rng.random();
                for d in 0..2 {
                    child[d] = lambda * p1[d] + (1.0 - lambda) * p2[d];
                }
            }
            for d in 0..2 {
                if self.pop.rng.random::<f64>() < self.params.mutation_rate {
                    child[d] += self.mutation[d].sample(&mut self.pop.rng);
                }
            }
            let child = self.pop.bounds.clamp(child);
            next_values.push(self.pop.eval.eval(child, iteration + 1)?);
            next.push(child);
        }
        self.pop.members = next;
        self.pop.values = next_values;
        Ok(())
    }

    fn best(&self) -> ([f64; 2], f64) {
        self.pop.best()
    }

    fn evaluations(&self) -> usize {
        self.pop.eval.calls
    }
}

/// GA baseline with explicit parameters and an optional initial population.
pub fn baseline_ga_with<F: Fn(Allocation) -> f64>(
    s: &Scenario,
    objective: &F,
    u_max: f64,
    cfg: &SwarmConfig,
    params: GaParams,
    initial: Option<Vec<Allocation>>,
) -> Result<RunResult, OptimizeError> {
    cfg.validate()?;
    let pop = Population::new(s, objective, cfg.p_n, cfg.seed, initial)?;
    let sd = |d: usize| (params.mutation_scale * pop.bounds.width(d)).max(0.0);
    let mutation = [
        Normal::new(0.0, sd(0)).map_err(|e| OptimizeError::InvalidConfig(e.to_string()))?,
        Normal::new(0.0, sd(1)).map_err(|e| OptimizeError::InvalidConfig(e.to_string()))?,
    ];
    drive(
        GeneticSearch {
            pop,
            params,
            mutation,
        },
        u_max,
        cfg,
        cfg.seed,
    )
}

/// GA baseline: size-2 tournaments, arithmetic crossover, Gaussian
/// mutation, one elite.
pub fn baseline_ga<F: Fn(Allocation) -> f64>(
    s: &Scenario,
    objective: &F,
    u_max: f64,
    cfg: &SwarmConfig,
) -> Result<RunResult, OptimizeError> {
    baseline_ga_with(s, objective, u_max, cfg, GaParams::default(), None)
}

// ---------------------------------------------------------------------------
// Differential evolution
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeParams {
    pub differential_weight: f64,
    /// Binomial crossover probability. At 0 the trial vector is the target
    /// itself (no forced mutant coordinate).
    pub crossover: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams {
            differential_weight: 0.5,
            crossover: 0.9,
        }
    }
}

pub struct DifferentialSearch<'a, F> {
    pop: Population<'a, F>,
    params: DeParams,
}

impl<F: Fn(Allocation) -> f64> DifferentialSearch<'_, F> {
    /// Three donors distinct from `target` (and each other when possible).
    fn donors(&mut self, target: usize) -> [usize; 3] {
        let n = self.pop.members.len();
        let mut picked = [target; 3];
        for k in 0..3 {
            loop {
                let c = self.pop.rng.random_range(0..n);
                let clash = c == target || picked[..k].contains(&c);
                // Small populations cannot supply three distinct donors.
                if !clash || (n < 4 && c != target) {
                    picked[k] = c;
                    break;
                }
            }
        }
        picked
    }
}

impl<F: Fn(Allocation) -> f64> Search for DifferentialSearch<'_, F> {
    fn step(&mut self, iteration: usize) -> Result<(), OptimizeError> {
        let n = self.pop.members.len();
        let mut next = self.pop.members.clone();
        let mut next_values = self.pop.values.clone();
        for i in 0..n {
            let [r1, r2, r3] = self.donors(i);
            let (a, b, c) = (self.pop.members[r1], self.pop.members[r2], self.pop.members[r3]);
            let mutant = self.pop.bounds.clamp([
                a[0] + self.params.differential_weight * (b[0] - c[0]),
                a[1] + self.params.differential_weight * (b[1] - c[1]),
            ]);
            let forced = self.pop.rng.random_range(0..2);
            let target = self.pop.members[i];
            let mut trial = target;
            for d in 0..2 {
                let cross = self.pop.rng.random::<f64>() < self.params.crossover
                    || (self.params.crossover > 0.0 && d == forced);
                if cross {
                    trial[d] = mutant[d];
                }
            }
            let value = self.pop.eval.eval(trial, iteration + 1)?;
            if value >= self.pop.values[i] {
                next[i] = trial;
                next_values[i] = value;
            }
        }
        self.pop.members = next;
        self.pop.values = next_values;
        Ok(())
    }

    fn best(&self) -> ([f64; 2], f64) {
        self.pop.best()
    }

    fn evaluations(&self) -> usize {
        self.pop.eval.calls
    }
}

pub fn baseline_de_with<F: Fn(Allocation) -> f64>(
    s: &Scenario,
    objective: &F,
    u_max: f64,
    cfg: &SwarmConfig,
    params: DeParams,
    initial: Option<Vec<Allocation>>,
) -> Result<RunResult, OptimizeError> {
    cfg.validate()?;
    let pop = Population::new(s, objective, cfg.p_n, cfg.seed, initial)?;
    drive(DifferentialSearch { pop, params }, u_max, cfg, cfg.seed)
}

/// DE/rand/1/bin baseline.
pub fn baseline_de<F: Fn(Allocation) -> f64>(
    s: &Scenario,
    objective: &F,
    u_max: f64,
    cfg: &SwarmConfig,
) -> Result<RunResult, OptimizeError> {
    baseline_de_with(s, objective, u_max, cfg, DeParams::default(), None)
}

// ---------------------------------------------------------------------------
// Replication
// ---------------------------------------------------------------------------

/// Run one algorithm once, seeded by `cfg.seed`.
pub fn run_algorithm<F: Fn(Allocation) -> f64>(
    algorithm: Algorithm,
    s: &Scenario,
    objective: &F,
    u_max: f64,
    cfg: &SwarmConfig,
) -> Result<RunResult, OptimizeError> {
    match algorithm {
        Algorithm::DiscPso => disc_pso(s, objective, u_max, cfg),
        Algorithm::Pso => baseline_pso(s, objective, u_max, cfg),
        Algorithm::Ga => baseline_ga(s, objective, u_max, cfg),
        Algorithm::De => baseline_de(s, objective, u_max, cfg),
    }
}

/// Per-trial seeds derived from a base seed. The same base seed gives the
/// same sequence for every algorithm, which pairs trials across algorithms.
pub fn trial_seeds(base: u64, n_trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    (0..n_trials).map(|_| rng.next_u64()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    pub algorithm: Algorithm,
    pub mean_value: f64,
    /// Sample standard deviation (n − 1); 0 for a single trial.
    pub std_value: f64,
    pub mean_iterations: f64,
    pub value_list: Vec<f64>,
    pub iteration_list: Vec<usize>,
    pub position_list: Vec<Allocation>,
    pub seed_list: Vec<u64>,
    pub converged_list: Vec<bool>,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

impl TrialStats {
    pub fn from_runs(algorithm: Algorithm, runs: &[RunResult]) -> Self {
        let value_list: Vec<f64> = runs.iter().map(|r| r.best_value).collect();
        let iteration_list: Vec<usize> = runs.iter().map(|r| r.iterations_used).collect();
        let iters: Vec<f64> = iteration_list.iter().map(|&i| i as f64).collect();
        TrialStats {
            algorithm,
            mean_value: mean(&value_list),
            std_value: sample_std(&value_list),
            mean_iterations: mean(&iters),
            value_list,
            iteration_list,
            position_list: runs.iter().map(|r| r.best_position).collect(),
            seed_list: runs.iter().map(|r| r.seed).collect(),
            converged_list: runs.iter().map(|r| r.converged).collect(),
        }
    }

    pub fn n_trials(&self) -> usize {
        self.value_list.len()
    }

    pub fn all_converged(&self) -> bool {
        self.converged_list.iter().all(|&c| c)
    }
}

/// Run every trial of one algorithm and return the individual results in
/// trial order. Trials execute in parallel.
pub fn replicate_runs<F: Fn(Allocation) -> f64 + Sync>(
    algorithm: Algorithm,
    s: &Scenario,
    objective: &F,
    u_max: f64,
    cfg: &SwarmConfig,
    n_trials: usize,
) -> Result<Vec<RunResult>, OptimizeError> {
    if n_trials < 1 {
        return Err(OptimizeError::InvalidConfig("n_trials must be >= 1".into()));
    }
    cfg.validate()?;
    trial_seeds(cfg.seed, n_trials)
        .into_par_iter()
        .enumerate()
        .map(|(index, seed)| {
            let trial_cfg = SwarmConfig { seed, ..*cfg };
            run_algorithm(algorithm, s, objective, u_max, &trial_cfg).map_err(|e| {
                OptimizeError::Trial {
                    index,
                    source: Box::new(e),
                }
            })
        })
        .collect()
}

pub fn replicate<F: Fn(Allocation) -> f64 + Sync>(
    algorithm: Algorithm,
    s: &Scenario,
    objective: &F,
    u_max: f64,
    cfg: &SwarmConfig,
    n_trials: usize,
) -> Result<TrialStats, OptimizeError> {
    let runs = replicate_runs(algorithm, s, objective, u_max, cfg, n_trials)?;
    Ok(TrialStats::from_runs(algorithm, &runs))
}
