use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::cycles::{maximal_cycle_partition, tube_from_partition};
use super::gates::{saddle_and_gates, SaddleType};
use super::minimax::{communication_height, threshold_sweep_oracle};
use super::space::{EnumeratedSpace, StateSpace};
use super::stability::{stability_levels, Stability};
use crate::error::Result;
use crate::spin::{check_assumptions, critical_droplets, star_table, AssumptionReport, Energy, Spin, StarTable};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierEntry {
    pub from: Spin,
    pub to: Vec<Spin>,
    /// `Φ(i, B)` from the bottleneck search.
    pub phi: Energy,
    /// Agreement with the union-find sweep.
    pub oracle_agrees: bool,
    /// `Γ(i, B) = Φ - H(i)`.
    pub gamma: Energy,
    /// `Γ*` for single targets `j > i`.
    pub gamma_star: Option<Energy>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateEntry {
    pub from: Spin,
    pub to: Vec<Spin>,
    pub level: Energy,
    pub saddle_count: usize,
    pub gate_size: usize,
    pub type1: usize,
    pub type2: usize,
    pub disconnects: Option<bool>,
    /// Whether the gate is exactly the critical-droplet family; `None` if
    /// the droplet does not fit the torus.
    pub critical_droplets: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub v: [Stability; 3],
    pub max_other: Energy,
    pub argmax_other: u64,
    pub ordering_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeReport {
    pub stars: StarTable,
    pub assumptions: AssumptionReport,
    pub barriers: Vec<BarrierEntry>,
    pub stability: StabilitySummary,
    pub gates: Vec<GateEntry>,
    pub two_in_tube_from_one_to_three: bool,
    /// `Γ(1,2) = Γ(1,3)`.
    pub gamma12_equals_gamma13: bool,
    /// Notes on comparisons whose hypotheses fail at this size.
    pub notes: Vec<String>,
}

fn targets() -> Vec<(Spin, Vec<Spin>)> {
    use Spin::*;
    vec![
        (One, vec![Two]),
        (One, vec![Three]),
        (Two, vec![Three]),
        (Two, vec![One]),
        (Three, vec![One]),
        (Three, vec![Two]),
        (One, vec![Two, Three]),
        (Two, vec![One, Three]),
    ]
}

/// Brute-force landscape compared with the closed-form predictions.
pub fn landscape_report(space: &EnumeratedSpace) -> Result<LandscapeReport> {
    let model = space.model();
    let stars = star_table(model);
    let assumptions = check_assumptions(model, model.sites() as i64)?;
    let id = |s: Spin| space.uniform(s);
    let mut barriers = Vec::new();
    for (from, to) in targets() {
        let b: Vec<u64> = to.iter().map(|&s| id(s)).collect();
        let phi = communication_height(space, &[id(from)], &b)?.value;
        let oracle = threshold_sweep_oracle(space, &[id(from)], &b)?;
        let gamma_star = (to.len() == 1 && to[0] > from).then(|| stars.pair(from, to[0]).gamma_star);
        barriers.push(BarrierEntry {
            from,
            to,
            phi,
            oracle_agrees: oracle == phi,
            gamma: phi - model.uniform_energy(from),
            gamma_star,
        });
    }
    let stab = stability_levels(space);
    let stability = StabilitySummary {
        v: stab.mono,
        max_other: stab.max_other,
        argmax_other: stab.argmax_other,
        ordering_holds: stab.ordering_holds(),
    };
    let mut gates = Vec::new();
    for (from, to) in [(Spin::One, vec![Spin::Three]), (Spin::Two, vec![Spin::Three]), (Spin::One, vec![Spin::Two, Spin::Three])] {
        let b: Vec<u64> = to.iter().map(|&s| id(s)).collect();
        let g = saddle_and_gates(space, &[id(from)], &b)?;
        let critical = (to.len() == 1)
            .then(|| critical_droplets(model, to[0], from, stars.pair(from, to[0]).ell_c as usize))
            .flatten()
            .map(|fam| {
                let fam: HashSet<u64> = fam.iter().map(|c| space.id(c)).collect();
                fam == g.gate.iter().copied().collect()
            });
        gates.push(GateEntry {
            from,
            to,
            level: g.level,
            saddle_count: g.saddles.len(),
            gate_size: g.gate.len(),
            type1: g.count(SaddleType::Type1),
            type2: g.count(SaddleType::Type2),
            disconnects: g.disconnects,
            critical_droplets: critical,
        });
    }
    let part = maximal_cycle_partition(space, &[id(Spin::Three)])?;
    let tube = tube_from_partition(&part, id(Spin::One))?;
    let two_in_tube = tube.binary_search(&id(Spin::Two)).is_ok();
    let gamma = |i: usize| barriers[i].gamma;
    let mut notes = Vec::new();
    if !assumptions.assumption_a {
        notes.push("assumption A fails: comparisons with closed-form barriers are informational".into());
    }
    if !assumptions.assumption_b {
        notes.push("assumption B fails: energy ties between distinct droplet shapes are possible".into());
    }
    Ok(LandscapeReport {
        stars,
        assumptions,
        stability,
        gates,
        two_in_tube_from_one_to_three: two_in_tube,
        gamma12_equals_gamma13: gamma(0) == gamma(1),
        barriers,
        notes,
    })
}
