use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{contract, Error, Result};
use crate::landscape::StateId;
use crate::potential::RATE_EXPONENT_LIMIT;
use crate::spin::{Energy, Move, PottsModel, Spin, SpinConfiguration, MAX_PACKED_SITES};

/// Random stream of one replica: the ChaCha8 key is the seed and the stream
/// number is the replica id, so replicas are independent and reproducible in
/// any order.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Where a run stops.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Any of the listed monochromatic configurations.
    Uniform(Vec<Spin>),
    /// Any of the listed packed states.
    States(Vec<StateId>),
    /// The first state outside the listed packed states.
    Leave(Vec<StateId>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StopCondition {
    pub target: Option<Target>,
    pub max_events: Option<u64>,
    pub max_time: Option<f64>,
}

/// One ensemble of independent replicas.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    pub beta: f64,
    pub initial: SpinConfiguration,
    pub stop: StopCondition,
    pub seed: u64,
    pub replicas: usize,
}

impl SimConfig {
    pub fn new(beta: f64, initial: SpinConfiguration, stop: StopCondition, seed: u64, replicas: usize) -> Self {
        Self { beta, initial, stop, seed, replicas }
    }

    pub fn validate(&self, model: &PottsModel) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            errs.push(format!("beta must be finite and non-negative, got {}", self.beta));
        }
        if self.replicas == 0 {
            errs.push("replica count must be at least 1".into());
        }
        let s = &self.stop;
        if s.target.is_none() && s.max_events.is_none() && s.max_time.is_none() {
            errs.push("at least one stop condition is required".into());
        }
        if let Some(t) = s.max_time {
            if !(t >= 0.0) {
                errs.push(format!("max_time must be non-negative, got {t}"));
            }
        }
        if self.initial.len() != model.sites() {
            errs.push(format!("initial configuration has {} sites, lattice has {}", self.initial.len(), model.sites()));
        }
        if matches!(s.target, Some(Target::States(_) | Target::Leave(_))) && model.sites() > MAX_PACKED_SITES {
            errs.push(format!("state-set targets need at most {MAX_PACKED_SITES} sites"));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEvent {
    pub time: f64,
    pub site: usize,
    pub spin: Spin,
    pub energy: Energy,
}

/// Simulated time spent in each monochromatic state and elsewhere.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Occupancy {
    pub uniform: [f64; 3],
    pub outside: f64,
}

impl Occupancy {
    pub fn total(&self) -> f64 {
        self.uniform.iter().sum::<f64>() + self.outside
    }
}

/// Outcome of one replica.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HittingSample {
    pub replica: u64,
    /// Hitting time of the target; `None` when the run stopped first (censored)
    /// or had no target.
    pub tau: Option<f64>,
    pub events: u64,
    pub time: f64,
    pub final_state: SpinConfiguration,
    pub occupancy: Occupancy,
}

/// Sampling scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Uniformization at rate `2·K·L` with Metropolis acceptance.
    Naive,
    /// Rejection-free kinetic Monte Carlo.
    Kmc,
}

/// Metropolis rates indexed by (old spin, new spin, equal neighbours of each).
pub(crate) struct RateTable {
    rates: [f64; 225],
}

#[inline]
fn rate_index(old: usize, new: usize, n_old: u8, n_new: u8) -> usize {
    ((old * 3 + new) * 5 + n_old as usize) * 5 + n_new as usize
}

impl RateTable {
    pub fn new(model: &PottsModel, beta: f64) -> Self {
        let j = model.params.coupling();
        let beta_u = beta / j as f64;
        let h = model.params.fields();
        let mut rates = [0.0; 225];
        for old in 0..3 {
            for new in 0..3 {
                for n_old in 0..5_u8 {
                    for n_new in 0..5_u8 {
                        let dh = j * (n_old as Energy - n_new as Energy) + h[old] - h[new];
                        rates[rate_index(old, new, n_old, n_new)] = (-beta_u * dh.max(0) as f64).exp();
                    }
                }
            }
        }
        Self { rates }
    }

    /// Largest `β·ΔH` over realizable flips.
    pub fn max_exponent(model: &PottsModel, beta: f64) -> f64 {
        let j = model.params.coupling();
        let h = model.params.fields();
        let mut worst: Energy = 0;
        for old in 0..3 {
            for new in (0..3).filter(|&n| n != old) {
                worst = worst.max(4 * j + h[old] - h[new]);
            }
        }
        beta / j as f64 * worst as f64
    }

    #[inline]
    pub fn get(&self, old: usize, new: usize, n_old: u8, n_new: u8) -> f64 {
        self.rates[rate_index(old, new, n_old, n_new)]
    }
}

enum Membership {
    None,
    Uniform([bool; 3]),
    In(HashSet<StateId>),
    Leave(HashSet<StateId>),
}

/// Mutable chain state shared by both samplers.
struct Chain<'a> {
    model: &'a PottsModel,
    spins: Vec<u8>,
    counts: [usize; 3],
    id: u64,
    pow3: Vec<u64>,
    energy: Energy,
}

impl<'a> Chain<'a> {
    fn new(model: &'a PottsModel, cfg: &SpinConfiguration) -> Result<Self> {
        let energy = model.energy(cfg)?;
        let spins: Vec<u8> = cfg.spins().iter().map(|s| s.index() as u8).collect();
        let mut counts = [0; 3];
        for &s in &spins {
            counts[s as usize] += 1;
        }
        let packable = spins.len() <= MAX_PACKED_SITES;
        let pow3: Vec<u64> = if packable { (0..spins.len()).map(|x| 3_u64.pow(x as u32)).collect() } else { vec![] };
        let id = if packable { spins.iter().zip(&pow3).map(|(&s, &p)| s as u64 * p).sum() } else { 0 };
        Ok(Self { model, spins, counts, id, pow3, energy })
    }

    #[inline]
    fn equal_neighbors(&self, site: usize, a: u8, b: u8) -> (u8, u8) {
        let mut na = 0;
        let mut nb = 0;
        for &y in self.model.geometry.neighbors(site) {
            let s = self.spins[y];
            na += (s == a) as u8;
            nb += (s == b) as u8;
        }
        (na, nb)
    }

    #[inline]
    fn flip(&mut self, site: usize, new: u8) {
        let old = self.spins[site];
        let (n_old, n_new) = self.equal_neighbors(site, old, new);
        let p = &self.model.params;
        self.energy += p.coupling() * (n_old as Energy - n_new as Energy) + p.fields()[old as usize]
            - p.fields()[new as usize];
        self.spins[site] = new;
        self.counts[old as usize] -= 1;
        self.counts[new as usize] += 1;
        if !self.pow3.is_empty() {
            self.id = self.id + new as u64 * self.pow3[site] - old as u64 * self.pow3[site];
        }
    }

    /// 0..3 for a monochromatic state, 3 otherwise.
    #[inline]
    fn class(&self) -> usize {
        let n = self.spins.len();
        (0..3).find(|&s| self.counts[s] == n).unwrap_or(3)
    }

    #[inline]
    fn in_target(&self, m: &Membership) -> bool {
        match m {
            Membership::None => false,
            Membership::Uniform(mask) => {
                let c = self.class();
                c < 3 && mask[c]
            }
            Membership::In(set) => set.contains(&self.id),
            Membership::Leave(set) => !set.contains(&self.id),
        }
    }

    fn config(&self) -> SpinConfiguration {
        SpinConfiguration::new(self.spins.iter().map(|&s| Spin::from_index(s as usize)).collect())
    }
}

/// Sum tree over per-site exit rates. Parents are always recomputed from
/// their children, so the root carries no accumulated drift.
struct SumTree {
    size: usize,
    tree: Vec<f64>,
}

impl SumTree {
    fn new(n: usize) -> Self {
        let size = n.next_power_of_two();
        Self { size, tree: vec![0.0; 2 * size] }
    }

    fn set(&mut self, i: usize, v: f64) {
        let mut p = i + self.size;
        self.tree[p] = v;
        while p > 1 {
            p /= 2;
            self.tree[p] = self.tree[2 * p] + self.tree[2 * p + 1];
        }
    }

    fn total(&self) -> f64 {
        self.tree[1]
    }

    fn leaf(&self, i: usize) -> f64 {
        self.tree[i + self.size]
    }

    /// Leaf `i` with `u` reduced to an offset inside it.
    fn find(&self, mut u: f64) -> (usize, f64) {
        let mut p = 1;
        while p < self.size {
            let left = self.tree[2 * p];
            if u < left {
                p *= 2;
            } else {
                u -= left;
                p = 2 * p + 1;
            }
        }
        (p - self.size, u)
    }
}

fn others(s: u8) -> [u8; 2] {
    match s {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

struct KmcRates {
    table: RateTable,
    tree: SumTree,
    /// Rate of each site's two alternative spins.
    options: Vec<[f64; 2]>,
}

impl KmcRates {
    fn new(chain: &Chain, beta: f64) -> Self {
        let n = chain.spins.len();
        let mut r = Self { table: RateTable::new(chain.model, beta), tree: SumTree::new(n), options: vec![[0.0; 2]; n] };
        for x in 0..n {
            r.refresh(chain, x);
        }
        r
    }

    #[inline]
    fn refresh(&mut self, chain: &Chain, x: usize) {
        let old = chain.spins[x];
        let opts = others(old);
        let mut pair = [0.0; 2];
        for (k, &new) in opts.iter().enumerate() {
            let (n_old, n_new) = chain.equal_neighbors(x, old, new);
            pair[k] = self.table.get(old as usize, new as usize, n_old, n_new);
        }
        self.options[x] = pair;
        self.tree.set(x, pair[0] + pair[1]);
    }

    fn after_flip(&mut self, chain: &Chain, x: usize) {
        self.refresh(chain, x);
        for &y in chain.model.geometry.neighbors(x) {
            self.refresh(chain, y);
        }
    }

    /// Samples a move with probability `c(σ,η)/R(σ)`.
    fn sample(&self, chain: &Chain, rng: &mut ChaCha8Rng) -> (usize, u8) {
        loop {
            let u = rng.random::<f64>() * self.tree.total();
            let (x, off) = self.tree.find(u);
            if x >= chain.spins.len() || self.tree.leaf(x) == 0.0 {
                continue;
            }
            let [a, _] = self.options[x];
            let k = if off < a { 0 } else { 1 };
            if self.options[x][k] == 0.0 {
                continue;
            }
            return (x, others(chain.spins[x])[k]);
        }
    }
}

#[inline]
fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    -(1.0 - rng.random::<f64>()).ln() / rate
}

fn membership(target: &Option<Target>) -> Membership {
    match target {
        None => Membership::None,
        Some(Target::Uniform(spins)) => {
            let mut mask = [false; 3];
            for s in spins {
                mask[s.index()] = true;
            }
            Membership::Uniform(mask)
        }
        Some(Target::States(v)) => Membership::In(v.iter().copied().collect()),
        Some(Target::Leave(v)) => Membership::Leave(v.iter().copied().collect()),
    }
}

/// Runs one replica; `record` keeps the event list.
pub(crate) fn run_replica(
    model: &PottsModel,
    sim: &SimConfig,
    replica: u64,
    method: Method,
    record: bool,
) -> Result<(HittingSample, Vec<TrajectoryEvent>)> {
    let member = membership(&sim.stop.target);
    run_with(model, sim, &member, replica, method, record)
}

fn run_with(
    model: &PottsModel,
    sim: &SimConfig,
    member: &Membership,
    replica: u64,
    method: Method,
    record: bool,
) -> Result<(HittingSample, Vec<TrajectoryEvent>)> {
    if method == Method::Kmc {
        let exponent = RateTable::max_exponent(model, sim.beta);
        if exponent > RATE_EXPONENT_LIMIT {
            return Err(Error::RateUnderflow { beta: sim.beta, exponent });
        }
    }
    let mut rng = replica_rng(sim.seed, replica);
    let mut chain = Chain::new(model, &sim.initial)?;
    let max_events = sim.stop.max_events.unwrap_or(u64::MAX);
    let max_time = sim.stop.max_time.unwrap_or(f64::INFINITY);
    let mut time = 0.0;
    let mut events = 0;
    let mut occ = Occupancy::default();
    let mut trace = Vec::new();
    let mut hit = chain.in_target(member);

    let credit = |occ: &mut Occupancy, class: usize, dt: f64| {
        if class < 3 {
            occ.uniform[class] += dt;
        } else {
            occ.outside += dt;
        }
    };

    match method {
        Method::Naive => {
            let table = RateTable::new(model, sim.beta);
            let n = chain.spins.len();
            let clock = 2.0 * n as f64;
            while !hit && events < max_events {
                let dt = exponential(&mut rng, clock);
                let class = chain.class();
                if time + dt >= max_time {
                    credit(&mut occ, class, max_time - time);
                    time = max_time;
                    break;
                }
                credit(&mut occ, class, dt);
                time += dt;
                let x = rng.random_range(0..n);
                let old = chain.spins[x];
                let new = others(old)[rng.random_range(0..2)];
                let (n_old, n_new) = chain.equal_neighbors(x, old, new);
                let accept = table.get(old as usize, new as usize, n_old, n_new);
                if accept >= 1.0 || rng.random::<f64>() < accept {
                    chain.flip(x, new);
                    events += 1;
                    if record {
                        trace.push(TrajectoryEvent { time, site: x, spin: Spin::from_index(new as usize), energy: chain.energy });
                    }
                    hit = chain.in_target(member);
                }
            }
        }
        Method::Kmc => {
            let mut rates = KmcRates::new(&chain, sim.beta);
            while !hit && events < max_events {
                let total = rates.tree.total();
                let class = chain.class();
                if total <= 0.0 {
                    return Err(contract("no allowed move: exit rate is zero"));
                }
                let dt = exponential(&mut rng, total);
                if time + dt >= max_time {
                    credit(&mut occ, class, max_time - time);
                    time = max_time;
                    break;
                }
                credit(&mut occ, class, dt);
                time += dt;
                let (x, new) = rates.sample(&chain, &mut rng);
                chain.flip(x, new);
                rates.after_flip(&chain, x);
                events += 1;
                if record {
                    trace.push(TrajectoryEvent { time, site: x, spin: Spin::from_index(new as usize), energy: chain.energy });
                }
                hit = chain.in_target(member);
            }
        }
    }
    let sample = HittingSample {
        replica,
        tau: hit.then_some(time),
        events,
        time,
        final_state: chain.config(),
        occupancy: occ,
    };
    Ok((sample, trace))
}

/// A single run with its event sequence.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub events: Vec<TrajectoryEvent>,
    pub sample: HittingSample,
}

/// Exact simulation by uniformization: a Poisson clock of rate `2·K·L`
/// proposes a uniform (site, other spin) pair, accepted with `e^{−β[ΔH]₊}`.
pub fn simulate_naive(model: &PottsModel, sim: &SimConfig, replica: u64) -> Result<Trajectory> {
    sim.validate(model)?;
    let (sample, events) = run_replica(model, sim, replica, Method::Naive, true)?;
    Ok(Trajectory { events, sample })
}

/// Rejection-free simulation: jumps with probability `c(σ,η)/R(σ)` after an
/// exponential holding time of rate `R(σ)`.
pub fn simulate_kmc(model: &PottsModel, sim: &SimConfig, replica: u64) -> Result<Trajectory> {
    sim.validate(model)?;
    let (sample, events) = run_replica(model, sim, replica, Method::Kmc, true)?;
    Ok(Trajectory { events, sample })
}

/// The rejection-free sampler's move law at `cfg`: every flip with its rate
/// and probability as held in the sampler's sum tree.
pub fn kmc_move_law(model: &PottsModel, cfg: &SpinConfiguration, beta: f64) -> Result<Vec<(Move, f64, f64)>> {
    let chain = Chain::new(model, cfg)?;
    let rates = KmcRates::new(&chain, beta);
    let total = rates.tree.total();
    let mut out = Vec::with_capacity(2 * chain.spins.len());
    for x in 0..chain.spins.len() {
        for (k, &new) in others(chain.spins[x]).iter().enumerate() {
            let r = rates.options[x][k];
            out.push((Move { site: x, spin: Spin::from_index(new as usize) }, r, r / total));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{LatticeGeometry, ModelParams};

    fn model() -> PottsModel {
        PottsModel::new(
            LatticeGeometry::new(3, 3).unwrap(),
            ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2).unwrap(),
        )
    }

    fn sim(beta: f64, stop: StopCondition) -> SimConfig {
        SimConfig::new(beta, SpinConfiguration::uniform(9, Spin::Two), stop, 7, 1)
    }

    #[test]
    fn move_law_matches_delta_energy() {
        let m = model();
        let mut cfg = SpinConfiguration::uniform(9, Spin::One);
        cfg.set(0, Spin::Three);
        cfg.set(4, Spin::Two);
        let beta = 1.7;
        let law = kmc_move_law(&m, &cfg, beta).unwrap();
        let rates: Vec<f64> = law
            .iter()
            .map(|(mv, _, _)| {
                let dh = m.delta_energy(&cfg, mv.site, mv.spin).unwrap();
                (-beta / m.params.coupling() as f64 * dh.max(0) as f64).exp()
            })
            .collect();
        let total: f64 = rates.iter().sum();
        for ((_, r, p), c) in law.iter().zip(&rates) {
            assert_eq!(r, c);
            assert!((p - c / total).abs() <= 1e-15);
        }
    }

    #[test]
    fn start_in_target_gives_zero_time() {
        let stop = StopCondition { target: Some(Target::Uniform(vec![Spin::Two])), ..Default::default() };
        let t = simulate_kmc(&model(), &sim(2.0, stop), 0).unwrap();
        assert_eq!(t.sample.tau, Some(0.0));
        assert!(t.events.is_empty());
    }

    #[test]
    fn single_event_stop() {
        let stop = StopCondition { max_events: Some(1), ..Default::default() };
        for f in [simulate_kmc, simulate_naive] {
            let t = f(&model(), &sim(2.0, stop.clone()), 3).unwrap();
            assert_eq!(t.events.len(), 1);
            assert_eq!(t.sample.events, 1);
        }
    }

    #[test]
    fn events_are_consistent_and_reproducible() {
        let m = model();
        let stop = StopCondition { max_events: Some(500), ..Default::default() };
        for method in [Method::Kmc, Method::Naive] {
            let s = sim(1.0, stop.clone());
            let (a, ea) = run_replica(&m, &s, 5, method, true).unwrap();
            let (_, eb) = run_replica(&m, &s, 5, method, true).unwrap();
            assert_eq!(ea, eb);
            let (_, ec) = run_replica(&m, &s, 6, method, true).unwrap();
            assert_ne!(ea, ec);
            let mut cfg = s.initial.clone();
            let mut last = 0.0;
            for e in &ea {
                assert!(e.time > last);
                last = e.time;
                cfg.set(e.site, e.spin);
                assert_eq!(m.energy(&cfg).unwrap(), e.energy);
            }
            assert!((a.occupancy.total() - a.time).abs() <= 1e-12 * a.time.max(1.0));
        }
    }

    #[test]
    fn max_time_truncates_and_censors() {
        let stop = StopCondition {
            target: Some(Target::Uniform(vec![Spin::Three])),
            max_time: Some(0.5),
            ..Default::default()
        };
        let t = simulate_kmc(&model(), &sim(6.0, stop), 1).unwrap();
        assert_eq!(t.sample.tau, None);
        assert_eq!(t.sample.time, 0.5);
        assert_eq!(t.sample.occupancy.total(), 0.5);
    }

    #[test]
    fn extreme_beta_is_refused() {
        let stop = StopCondition { max_events: Some(1), ..Default::default() };
        assert!(matches!(simulate_kmc(&model(), &sim(1e5, stop), 0), Err(Error::RateUnderflow { .. })));
    }

    #[test]
    fn invalid_configs_list_every_problem() {
        let s = SimConfig::new(-1.0, SpinConfiguration::uniform(4, Spin::One), StopCondition::default(), 0, 0);
        match s.validate(&model()) {
            Err(Error::Config(v)) => assert_eq!(v.len(), 4),
            other => panic!("{other:?}"),
        }
    }
}
