use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, HashSet};

use super::engine::{run_replica, HittingSample, Method, SimConfig, Target};
use crate::error::{contract, Result};
use crate::landscape::{Cycle, StateId};
use crate::spin::{PottsModel, SpinConfiguration};

/// Replicas needed before a normal-approximation interval is reported.
pub const MIN_REPLICAS_FOR_CI: usize = 30;

/// Runs every replica of `sim` in parallel; results are in replica order and
/// independent of the thread count.
pub fn run_replicas(model: &PottsModel, sim: &SimConfig, method: Method) -> Result<Vec<HittingSample>> {
    sim.validate(model)?;
    (0..sim.replicas as u64)
        .into_par_iter()
        .map(|r| run_replica(model, sim, r, method, false).map(|(s, _)| s))
        .collect()
}

/// Replica estimate of a mean hitting time.
#[derive(Clone, Debug, Serialize)]
pub struct HittingStatistics {
    pub method: Method,
    pub beta: f64,
    pub replicas: usize,
    pub hits: usize,
    /// Replicas stopped by a budget before hitting the target.
    pub censored: usize,
    /// Mean over hitting replicas.
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// 95% normal interval; `None` below [`MIN_REPLICAS_FOR_CI`] hits.
    pub ci95: Option<[f64; 2]>,
    pub mean_events: f64,
    /// Replica-averaged fraction of time spent in `1`, `2`, `3` and elsewhere.
    pub occupancy_fraction: [f64; 4],
    #[serde(skip)]
    pub samples: Vec<HittingSample>,
}

impl HittingStatistics {
    pub fn from_samples(method: Method, beta: f64, samples: Vec<HittingSample>) -> Self {
        let taus: Vec<f64> = samples.iter().filter_map(|s| s.tau).collect();
        let hits = taus.len();
        let n = hits as f64;
        let mean = if hits > 0 { taus.iter().sum::<f64>() / n } else { f64::NAN };
        let variance =
            if hits > 1 { taus.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { f64::NAN };
        let std_error = (variance / n).sqrt();
        let ci95 = (hits >= MIN_REPLICAS_FOR_CI).then(|| [mean - 1.96 * std_error, mean + 1.96 * std_error]);
        let mut occupancy_fraction = [0.0; 4];
        let mut counted = 0.0;
        for s in &samples {
            let total = s.occupancy.total();
            if total > 0.0 {
                for (k, v) in s.occupancy.uniform.iter().chain([&s.occupancy.outside]).enumerate() {
                    occupancy_fraction[k] += v / total;
                }
                counted += 1.0;
            }
        }
        if counted > 0.0 {
            occupancy_fraction.iter_mut().for_each(|f| *f /= counted);
        }
        Self {
            method,
            beta,
            replicas: samples.len(),
            hits,
            censored: samples.len() - hits,
            mean,
            variance,
            std_error,
            ci95,
            mean_events: samples.iter().map(|s| s.events as f64).sum::<f64>() / samples.len().max(1) as f64,
            occupancy_fraction,
            samples,
        }
    }

    /// Hitting times of the hitting replicas, in replica order.
    pub fn taus(&self) -> Vec<f64> {
        self.samples.iter().filter_map(|s| s.tau).collect()
    }

    /// `τ / mean`, the scale-free sample compared against `Exp(1)`.
    pub fn scaled(&self) -> Vec<f64> {
        self.taus().into_iter().map(|t| t / self.mean).collect()
    }

    /// Empirical CDF as `(τ, F(τ))` at each sorted sample.
    pub fn ecdf(&self) -> Vec<(f64, f64)> {
        let mut t = self.taus();
        t.sort_by(f64::total_cmp);
        let n = t.len() as f64;
        t.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect()
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci95.is_some_and(|[lo, hi]| lo <= value && value <= hi)
    }
}

/// Mean hitting time of the configured target over all replicas.
pub fn estimate_hitting(model: &PottsModel, sim: &SimConfig, method: Method) -> Result<HittingStatistics> {
    if sim.stop.target.is_none() {
        return Err(contract("hitting-time estimation needs a target"));
    }
    let samples = run_replicas(model, sim, method)?;
    Ok(HittingStatistics::from_samples(method, sim.beta, samples))
}

/// Where replicas started at the bottom of a cycle first leave it.
#[derive(Clone, Debug, Serialize)]
pub struct ExitDistribution {
    pub beta: f64,
    pub replicas: usize,
    /// Exit state and count, sorted by state.
    pub exits: Vec<(StateId, u64)>,
    /// Fraction of exits landing in the principal boundary.
    pub principal_share: f64,
    /// Replicas whose first event already left the cycle.
    pub first_event_exits: usize,
    pub censored: usize,
}

/// Exit law of `cycle` from its first bottom state.
pub fn exit_distribution(
    model: &PottsModel,
    cycle: &Cycle,
    sim: &SimConfig,
    method: Method,
) -> Result<ExitDistribution> {
    let bottom = *cycle.bottom.first().ok_or_else(|| contract("cycle has no bottom"))?;
    let mut sim = sim.clone();
    sim.initial = SpinConfiguration::from_packed(bottom, model.sites())?;
    sim.stop.target = Some(Target::Leave(cycle.members.clone()));
    let samples = run_replicas(model, &sim, method)?;
    let principal: HashSet<StateId> = cycle.principal_boundary.iter().copied().collect();
    let mut exits: BTreeMap<StateId, u64> = BTreeMap::new();
    let (mut inside, mut first, mut censored) = (0, 0, 0);
    for s in &samples {
        if s.tau.is_none() {
            censored += 1;
            continue;
        }
        let id = s.final_state.packed().ok_or_else(|| contract("exit state does not fit a packed index"))?;
        *exits.entry(id).or_default() += 1;
        inside += principal.contains(&id) as usize;
        first += (s.events == 1) as usize;
    }
    let exited = samples.len() - censored;
    Ok(ExitDistribution {
        beta: sim.beta,
        replicas: samples.len(),
        exits: exits.into_iter().collect(),
        principal_share: if exited > 0 { inside as f64 / exited as f64 } else { f64::NAN },
        first_event_exits: first,
        censored,
    })
}

/// Final states of replicas run for a fixed time, as packed ids.
pub fn sample_states(model: &PottsModel, sim: &SimConfig, method: Method) -> Result<Vec<StateId>> {
    if sim.stop.max_time.is_none() {
        return Err(contract("state sampling needs a max_time"));
    }
    run_replicas(model, sim, method)?
        .into_iter()
        .map(|s| s.final_state.packed().ok_or_else(|| contract("state does not fit a packed index")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::StopCondition;
    use crate::landscape::{EnumeratedSpace, StateSpace};
    use crate::spin::{LatticeGeometry, ModelParams, Spin};

    fn model() -> PottsModel {
        PottsModel::new(
            LatticeGeometry::new(3, 3).unwrap(),
            ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2).unwrap(),
        )
    }

    #[test]
    fn replicas_are_order_independent() {
        let m = model();
        let stop = StopCondition { target: Some(Target::Uniform(vec![Spin::Three])), ..Default::default() };
        let sim = SimConfig::new(1.0, SpinConfiguration::uniform(9, Spin::Two), stop, 11, 40);
        let a = estimate_hitting(&m, &sim, Method::Kmc).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| estimate_hitting(&m, &sim, Method::Kmc).unwrap());
        assert_eq!(a.taus(), b.taus());
        assert_eq!(a.censored, 0);
        assert!(a.ci95.is_some());
        let sum: f64 = a.occupancy_fraction.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singleton_exit_happens_on_first_event() {
        let m = model();
        let sp = EnumeratedSpace::new(m.clone()).unwrap();
        let cyc = Cycle::from_members(&sp, vec![sp.uniform(Spin::One)]);
        let sim = SimConfig::new(0.0, SpinConfiguration::uniform(9, Spin::One), StopCondition::default(), 3, 200);
        let d = exit_distribution(&m, &cyc, &sim, Method::Kmc).unwrap();
        assert_eq!(d.first_event_exits, 200);
        assert_eq!(d.exits.iter().map(|e| e.1).sum::<u64>(), 200);
    }

    #[test]
    fn censoring_is_counted() {
        let stop = StopCondition {
            target: Some(Target::Uniform(vec![Spin::Three])),
            max_events: Some(3),
            ..Default::default()
        };
        let sim = SimConfig::new(5.0, SpinConfiguration::uniform(9, Spin::Two), stop, 0, 10);
        let s = estimate_hitting(&model(), &sim, Method::Naive).unwrap();
        assert_eq!(s.censored, 10);
        assert!(s.ci95.is_none());
    }
}
