//! The acceptance suite: thirteen checks combining exact oracles on small
//! tori, identity checks on the solver, and trend checks over a β grid.
//! Tolerances are the constants below; each check also enforces its runtime
//! limit.

use rand::Rng;
use serde::Serialize;
use std::collections::BTreeSet;
use std::time::Instant;

use crate::dynamics::{
    chi_square_gof, estimate_hitting, ks_exponential, ks_two_sample, replica_rng, sample_states, Method, SimConfig,
    StopCondition, Target,
};
use crate::error::Result;
use crate::landscape::{
    communication_height, initial_cycle_with_witness, stability_levels, threshold_sweep_oracle, EnumeratedSpace,
    LazySpace, StateId, StateSpace,
};
use crate::potential::{
    equilibrium_potential, gibbs_log_measure, mean_hitting_exact, theta_variational, trace_rates, BruteForceBarriers,
    MeanHitting, RateScaling, SolverOptions, DEFAULT_BETA_GRID,
};
use crate::spin::{
    check_pair_assumption, growth_path, ising_quantities, make_droplet, protuberance_family, reference_path,
    DropletSpec, Energy, LatticeGeometry, ModelParams, PottsModel, Spin, SpinConfiguration, PAIRS,
};

pub const DEFAULT_FIELDS: [&str; 3] = ["0.05", "0.45", "0.90"];
pub const EKINF_FIELDS: [&str; 3] = ["0.05", "0.55", "0.90"];

/// Random state pairs checked against the sweep oracle.
pub const ORACLE_RANDOM_PAIRS: usize = 100;
/// Grid points of the `f(h)` check, `h = k/1000`.
pub const F_GRID: i64 = 1000;
/// Replicas per ensemble in the simulation checks.
pub const SIM_REPLICAS: usize = 10_000;
pub const KS_ALPHA: f64 = 0.01;
pub const CHI_SQUARE_ALPHA: f64 = 0.01;
pub const CHI_SQUARE_MIN_EXPECTED: f64 = 5.0;
/// Relaxation time before a state is recorded for the Gibbs check.
pub const GIBBS_SAMPLE_TIME: f64 = 100.0;
pub const LDP_BETAS: [f64; 3] = [4.0, 6.0, 8.0];
pub const LDP_TOLERANCE: f64 = 0.05;
pub const ROUTE_TOLERANCE: f64 = 1e-8;
pub const THETA_VALUE_TOLERANCE: f64 = 1e-10;
pub const THETA_MINIMUM_TOLERANCE: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const EKINF_BETAS: [f64; 4] = [4.0, 5.0, 6.0, 8.0];
pub const EKINF_BAND: f64 = 2.0;
pub const HITTING_BETAS: [f64; 3] = [2.0, 4.0, 6.0];

pub const CRITERIA: [(u8, &str, f64); 13] = [
    (1, "oracle equivalence", 30.0 + 600.0),
    (2, "stability ordering", 60.0),
    (3, "f(h) law", 1.0),
    (4, "reference-path saddle", 1.0),
    (5, "initial cycle of a supercritical droplet", 300.0),
    (6, "simulator correctness", 300.0),
    (7, "LDP slope", 600.0),
    (8, "two-route mean hitting", 600.0),
    (9, "exponential limit law", 600.0),
    (10, "variational Theta", 1.0),
    (11, "trace-rate identities", 600.0),
    (12, "EKinf trend", 600.0),
    (13, "hitting-probability trend", 600.0),
];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub limit_seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} ({}): {} [{:.2}s / {:.0}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds,
            self.limit_seconds
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 1 }
    }
}

pub fn torus(rows: usize, cols: usize, fields: [&str; 3]) -> PottsModel {
    PottsModel::new(
        LatticeGeometry::new(rows, cols).expect("valid torus"),
        ModelParams::from_decimals(fields, 2).expect("valid fields"),
    )
}

fn default_space() -> Result<EnumeratedSpace> {
    EnumeratedSpace::new(torus(3, 3, DEFAULT_FIELDS))
}

fn uniform_ids(space: &impl StateSpace) -> [StateId; 3] {
    Spin::ALL.map(|s| space.uniform(s))
}

/// Outcome of a check body: pass flag and a one-line description.
type Check = Result<(bool, String)>;

fn oracle_on(space: &EnumeratedSpace, seed: u64) -> Check {
    let u = uniform_ids(space);
    let mut pairs: Vec<(StateId, StateId)> = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                pairs.push((u[a], u[b]));
            }
        }
    }
    let mut rng = replica_rng(seed, 0);
    let n = space.len() as u64;
    while pairs.len() < 6 + ORACLE_RANDOM_PAIRS {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            pairs.push((a, b));
        }
    }
    let mut bad = 0;
    for &(a, b) in &pairs {
        if communication_height(space, &[a], &[b])?.value != threshold_sweep_oracle(space, &[a], &[b])? {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{} pairs, {bad} mismatches", pairs.len())))
}

/// Criterion 1; the 3×3 and 3×4 halves carry their own time limits.
pub fn oracle_equivalence(opts: &VerifyOptions) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for (rows, cols, limit) in [(3, 3, 30.0), (3, 4, 600.0)] {
        let t = Instant::now();
        let space = EnumeratedSpace::new(torus(rows, cols, DEFAULT_FIELDS))?;
        let (pass, msg) = oracle_on(&space, opts.seed)?;
        let secs = t.elapsed().as_secs_f64();
        ok &= pass && secs < limit;
        parts.push(format!("{rows}x{cols}: {msg} in {secs:.1}s (limit {limit:.0}s)"));
    }
    Ok((ok, parts.join("; ")))
}

/// Criterion 2.
pub fn stability_ordering() -> Check {
    let space = default_space()?;
    let p = &space.model().params;
    let r = stability_levels(&space);
    let show = |s: crate::landscape::Stability| match s.finite() {
        Some(v) => p.format(v),
        None => "inf".into(),
    };
    Ok((
        r.ordering_holds(),
        format!("max other V = {} < V1 = {} < V2 = {}", p.format(r.max_other), show(r.mono[0]), show(r.mono[1])),
    ))
}

/// Criterion 3, in exact integers with `J = 1000`.
pub fn f_law() -> Check {
    let j = F_GRID;
    let f: Vec<Energy> = (1..=j).map(|h| ising_quantities(h, j).map(|q| q.f_h)).collect::<Result<_>>()?;
    let decreasing = f.windows(2).all(|w| w[1] < w[0]);
    // 5 < f(h) < 8/h  ⇔  5J < f  and  f·h < 8J² (in units of 1/J).
    let bounded = (1..j).all(|h| {
        let fh = f[(h - 1) as usize];
        5 * j < fh && fh * h < 8 * j * j
    });
    let f1 = f[(j - 1) as usize];
    Ok((
        decreasing && bounded && f1 == 5 * j,
        format!("{j} grid points: strictly decreasing {decreasing}, bounds {bounded}, f(1) = {}", f1 as f64 / j as f64),
    ))
}

/// Criterion 4 on a 6×6 torus with `h₃ − h₁ = 0.85`.
pub fn reference_path_saddle() -> Check {
    let model = torus(6, 6, ["0.05", "0.10", "0.90"]);
    let p = &model.params;
    let mut checked = Vec::new();
    let mut ok = true;
    for &(i, j) in &PAIRS {
        if check_pair_assumption(&model, i, j).is_err() {
            continue;
        }
        let path = reference_path(&model, i, j)?;
        let f = ising_quantities(p.gap(i, j), p.coupling())?.f_h;
        let expect = model.uniform_energy(i) + f;
        let pass = path.max_energy == expect && path.max_multiplicity() == 1;
        ok &= pass;
        checked.push(format!(
            "({},{}) max {} vs {} x{}",
            i.index() + 1,
            j.index() + 1,
            p.format(path.max_energy - model.uniform_energy(i)),
            p.format(f),
            path.max_multiplicity()
        ));
    }
    Ok((ok && !checked.is_empty(), checked.join(", ")))
}

/// Criterion 5: a 3×3 droplet of 3 in 1 on a 5×5 torus (`ℓ_c = 3`).
pub fn droplet_cycle() -> Check {
    let model = torus(5, 5, DEFAULT_FIELDS);
    let p = model.params.clone();
    let space = LazySpace::new(model.clone())?;
    let rect = DropletSpec::rectangle(Spin::Three, Spin::One, 3, 3);
    let eta = make_droplet(&rect, &model)?;
    let witness = growth_path(&model, eta.clone(), Spin::Three, (3, 3), 0)?;
    let cycle = initial_cycle_with_witness(&space, space.id(&eta), &[space.uniform(Spin::Three)], &witness)?;
    let expected_depth = 2 * p.coupling() - p.gap(Spin::One, Spin::Three);
    let family: BTreeSet<StateId> =
        protuberance_family(&rect, &model)?.iter().map(|c| space.id(c)).collect();
    let found: BTreeSet<StateId> = cycle.boundary_minima.iter().copied().collect();
    Ok((
        cycle.depth == expected_depth && found == family && cycle.bottom == vec![space.id(&eta)],
        format!(
            "depth {} (expected {}), {} boundary minima = protuberance families ({}): {}",
            p.format(cycle.depth),
            p.format(expected_depth),
            found.len(),
            family.len(),
            found == family
        ),
    ))
}

fn hitting_sim(beta: f64, seed: u64, replicas: usize) -> SimConfig {
    let stop = StopCondition { target: Some(Target::Uniform(vec![Spin::Three])), ..Default::default() };
    SimConfig::new(beta, SpinConfiguration::uniform(9, Spin::Two), stop, seed, replicas)
}

/// Criterion 6.
pub fn simulator_correctness(opts: &VerifyOptions) -> Check {
    let model = torus(3, 3, DEFAULT_FIELDS);
    let kmc = estimate_hitting(&model, &hitting_sim(2.0, opts.seed, SIM_REPLICAS), Method::Kmc)?;
    let naive = estimate_hitting(&model, &hitting_sim(2.0, opts.seed.wrapping_add(1), SIM_REPLICAS), Method::Naive)?;
    let ks = ks_two_sample(&kmc.taus(), &naive.taus())?;

    let space = default_space()?;
    let sim = SimConfig::new(
        0.5,
        SpinConfiguration::uniform(9, Spin::One),
        StopCondition { max_time: Some(GIBBS_SAMPLE_TIME), ..Default::default() },
        opts.seed,
        SIM_REPLICAS,
    );
    let states = sample_states(&model, &sim, Method::Kmc)?;
    let chi = gibbs_chi_square(&space, 0.5, &states)?;
    let censored = kmc.censored + naive.censored;
    Ok((
        ks.passes(KS_ALPHA) && chi.passes(CHI_SQUARE_ALPHA) && censored == 0,
        format!(
            "KS D = {:.4} p = {:.3}; chi-square {:.1} on {} dof p = {:.3}; censored {censored}",
            ks.statistic, ks.p_value, chi.statistic, chi.dof, chi.p_value
        ),
    ))
}

/// Pearson test of sampled states against the Gibbs measure, binned by energy level.
pub fn gibbs_chi_square(space: &EnumeratedSpace, beta: f64, states: &[StateId]) -> Result<crate::dynamics::ChiSquareResult> {
    let g = gibbs_log_measure(space, beta)?;
    let mut levels: Vec<Energy> = space.energies().to_vec();
    levels.sort_unstable();
    levels.dedup();
    let bin = |s: StateId| levels.binary_search(&space.energy(s)).expect("energy level");
    let mut probs = vec![0.0; levels.len()];
    for s in 0..space.len() as StateId {
        probs[bin(s)] += g.mu(s);
    }
    let mut observed = vec![0_u64; levels.len()];
    for &s in states {
        observed[bin(s)] += 1;
    }
    chi_square_gof(&observed, &probs, CHI_SQUARE_MIN_EXPECTED)
}

fn route_options() -> SolverOptions {
    // Routes are compared here rather than rejected inside the solver.
    SolverOptions { route_tolerance: f64::INFINITY, ..Default::default() }
}

/// Criterion 7.
pub fn ldp_slope() -> Check {
    let space = default_space()?;
    let b = BruteForceBarriers::compute(&space)?;
    let gamma = space.model().params.to_f64(b.gamma_2_3);
    let [_, two, three] = uniform_ids(&space);
    let mut slopes = Vec::new();
    for &beta in &LDP_BETAS {
        slopes.push((beta, mean_hitting_exact(&space, two, &[three], beta, &route_options())?.direct.ln() / beta));
    }
    let [.., (b1, s1), (b2, s2)] = slopes[..] else { unreachable!() };
    let extrapolated = (b2 * s2 - b1 * s1) / (b2 - b1);
    let rel = (extrapolated - gamma).abs() / gamma;
    let raw: Vec<String> = slopes.iter().map(|(b, s)| format!("{s:.4}@{b}")).collect();
    Ok((
        rel <= LDP_TOLERANCE,
        format!(
            "slopes {}; extrapolated {extrapolated:.4} vs Gamma = {gamma} (rel {rel:.2e}, tol {LDP_TOLERANCE})",
            raw.join(", ")
        ),
    ))
}

/// Criterion 8 over every mean-hitting solve made by the suite's exact checks.
pub fn two_route_mean_hitting() -> Check {
    let mut all: Vec<(String, MeanHitting)> = Vec::new();
    for fields in [DEFAULT_FIELDS, EKINF_FIELDS] {
        let space = EnumeratedSpace::new(torus(3, 3, fields))?;
        let [one, two, three] = uniform_ids(&space);
        let cases: [(&str, StateId, Vec<StateId>); 4] = [
            ("2->3", two, vec![three]),
            ("1->3", one, vec![three]),
            ("1->{2,3}", one, vec![two, three]),
            ("3->1", three, vec![one]),
        ];
        let mut betas: Vec<f64> = DEFAULT_BETA_GRID.iter().chain(&EKINF_BETAS).copied().collect();
        betas.sort_by(f64::total_cmp);
        betas.dedup();
        for beta in betas {
            for (name, eta, b) in &cases {
                let m = mean_hitting_exact(&space, *eta, b, beta, &route_options())?;
                all.push((format!("h2={} {name}@{beta}", fields[1]), m));
            }
        }
    }
    let (worst_name, worst) = all
        .iter()
        .map(|(n, m)| (n.as_str(), m.relative))
        .fold(("", 0.0), |a, b| if b.1 > a.1 { b } else { a });
    Ok((
        all.iter().all(|(_, m)| m.relative <= ROUTE_TOLERANCE),
        format!("{} solves, worst relative gap {worst:.2e} ({worst_name}), tol {ROUTE_TOLERANCE:e}", all.len()),
    ))
}

/// Criterion 9.
pub fn exponential_limit_law(opts: &VerifyOptions) -> Check {
    let model = torus(3, 3, DEFAULT_FIELDS);
    let s = estimate_hitting(&model, &hitting_sim(4.0, opts.seed, SIM_REPLICAS), Method::Kmc)?;
    let ks = ks_exponential(&s.scaled())?;
    Ok((
        s.censored == 0 && ks.statistic < ks.critical_1pct,
        format!(
            "mean {:.4e}, KS distance {:.4} vs 1% critical {:.4}, censored {}",
            s.mean, ks.statistic, ks.critical_1pct, s.censored
        ),
    ))
}

/// Criterion 10.
pub fn variational_theta() -> Check {
    let t = theta_variational(3, 1.0)?;
    let close = |v: Option<f64>, x: f64, tol: f64| v.is_some_and(|v| (v - x).abs() <= tol);
    let ok = close(t.type1_value, 1.0 / 3.0, THETA_VALUE_TOLERANCE)
        && close(t.type2_value, 0.5, THETA_VALUE_TOLERANCE)
        && close(t.type1_minimum, 2.0 / 3.0, THETA_MINIMUM_TOLERANCE)
        && close(t.type2_minimum, 0.5, THETA_MINIMUM_TOLERANCE);
    Ok((
        ok,
        format!(
            "values {:.12}/{:.12}, minima {:.14}/{:.14}",
            t.type1_value.unwrap_or(f64::NAN),
            t.type2_value.unwrap_or(f64::NAN),
            t.type1_minimum.unwrap_or(f64::NAN),
            t.type2_minimum.unwrap_or(f64::NAN)
        ),
    ))
}

/// Scaling with brute-force barriers; the prefactors do not affect trends.
fn brute_force_scaling(space: &EnumeratedSpace) -> Result<RateScaling> {
    let b = BruteForceBarriers::compute(space)?;
    let p = &space.model().params;
    Ok(RateScaling { gamma13: p.to_f64(b.gamma_1_3), gamma23: p.to_f64(b.gamma_2_3), kappa1: 1.0, kappa2: 1.0 })
}

/// Criterion 11.
pub fn trace_rate_identities() -> Check {
    let space = default_space()?;
    let scaling = brute_force_scaling(&space)?;
    let mut worst: f64 = 0.0;
    let mut scaled = Vec::new();
    for &beta in &DEFAULT_BETA_GRID {
        let t = trace_rates(&space, beta, &scaling, &SolverOptions::default())?;
        let id = &t.identities;
        worst = worst.max(id.two_point_balance).max(id.two_point_capacity).max(id.three_point_exit);
        scaled.push(t.scaled_theta2[1]);
    }
    let decreasing = scaled.windows(2).all(|w| w[1] < w[0]);
    Ok((
        worst <= TRACE_TOLERANCE && decreasing,
        format!(
            "worst identity residual {worst:.2e} (tol {TRACE_TOLERANCE:e}); theta2 r(3,2) decreasing {decreasing}: {}",
            scaled.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(" ")
        ),
    ))
}

/// `e^{−βΓ(1,3)}·E₁[τ₃]` over [`EKINF_BETAS`].
pub fn ekinf_ratios(fields: [&str; 3]) -> Result<Vec<f64>> {
    let space = EnumeratedSpace::new(torus(3, 3, fields))?;
    let gamma = brute_force_scaling(&space)?.gamma13;
    let [one, _, three] = uniform_ids(&space);
    EKINF_BETAS
        .iter()
        .map(|&beta| {
            mean_hitting_exact(&space, one, &[three], beta, &route_options())
                .map(|m| m.direct * (-beta * gamma).exp())
        })
        .collect()
}

/// Criterion 12.
pub fn ekinf_trend() -> Check {
    let up = ekinf_ratios(EKINF_FIELDS)?;
    let flat = ekinf_ratios(DEFAULT_FIELDS)?;
    let increasing = up.windows(2).all(|w| w[1] > w[0]);
    let band = flat.iter().copied().fold(f64::NEG_INFINITY, f64::max) / flat.iter().copied().fold(f64::INFINITY, f64::min);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    Ok((
        increasing && band <= EKINF_BAND,
        format!("condition true: {} (increasing {increasing}); condition false: {} (band {band:.3})", fmt(&up), fmt(&flat)),
    ))
}

/// Criterion 13.
pub fn hitting_probability_trend() -> Check {
    let space = default_space()?;
    let [one, two, three] = uniform_ids(&space);
    let p: Vec<f64> = HITTING_BETAS
        .iter()
        .map(|&beta| equilibrium_potential(&space, &[two], &[three], beta, &SolverOptions::default()).map(|h| h.at(one)))
        .collect::<Result<_>>()?;
    Ok((
        p.windows(2).all(|w| w[1] < w[0]),
        format!("P1[tau2 < tau3] = {}", p.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(", ")),
    ))
}

/// Runs one criterion by id.
pub fn criterion(id: u8, opts: &VerifyOptions) -> CriterionOutcome {
    let (_, name, limit) = CRITERIA[(id - 1) as usize];
    let t = Instant::now();
    let result = match id {
        1 => oracle_equivalence(opts),
        2 => stability_ordering(),
        3 => f_law(),
        4 => reference_path_saddle(),
        5 => droplet_cycle(),
        6 => simulator_correctness(opts),
        7 => ldp_slope(),
        8 => two_route_mean_hitting(),
        9 => exponential_limit_law(opts),
        10 => variational_theta(),
        11 => trace_rate_identities(),
        12 => ekinf_trend(),
        13 => hitting_probability_trend(),
        _ => unreachable!("criteria are numbered 1..=13"),
    };
    let seconds = t.elapsed().as_secs_f64();
    let (passed, detail) = match result {
        Ok((ok, d)) => (ok && seconds < limit, d),
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionOutcome { id, name: name.into(), passed, detail, seconds, limit_seconds: limit }
}

/// All criteria in order, calling `each` as every one finishes.
pub fn run_all(opts: &VerifyOptions, mut each: impl FnMut(&CriterionOutcome)) -> Vec<CriterionOutcome> {
    CRITERIA
        .iter()
        .map(|&(id, _, _)| {
            let out = criterion(id, opts);
            each(&out);
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass() {
        for id in [2, 3, 4, 10, 13] {
            let o = criterion(id, &VerifyOptions::default());
            assert!(o.passed, "{}", o.line());
        }
    }
}
