use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::minimax::membership;
use super::space::{EnumeratedSpace, StateId, StateSpace};
use super::unionfind::UnionFind;
use crate::error::{contract, Result};
use crate::spin::{Energy, PathRecord};

/// A cycle with its bottom `ℱ(C)`, depth and boundary minima `ℱ(∂C)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    /// Sorted.
    pub members: Vec<StateId>,
    pub bottom: Vec<StateId>,
    pub bottom_energy: Energy,
    pub boundary_minima: Vec<StateId>,
    pub boundary_energy: Energy,
    /// `[H(ℱ(∂C)) - H(ℱ(C))]_+`.
    pub depth: Energy,
    /// Where typical exits go: `ℱ(∂C)`, except for a trivial cycle `{σ}`
    /// (depth 0), where every neighbour with `H <= H(σ)` is reached at rate 1.
    pub principal_boundary: Vec<StateId>,
}

impl Cycle {
    pub fn from_members(space: &impl StateSpace, mut members: Vec<StateId>) -> Self {
        members.sort_unstable();
        members.dedup();
        let inside: HashSet<StateId> = members.iter().copied().collect();
        let bottom_energy = members.iter().map(|&s| space.energy(s)).min().expect("nonempty cycle");
        let bottom = members.iter().copied().filter(|&s| space.energy(s) == bottom_energy).collect();
        let mut boundary = HashSet::new();
        let mut nb = Vec::new();
        for &s in &members {
            space.neighbors(s, &mut nb);
            boundary.extend(nb.iter().copied().filter(|t| !inside.contains(t)));
        }
        let boundary_energy = boundary.iter().map(|&s| space.energy(s)).min().unwrap_or(Energy::MAX);
        let mut boundary_minima: Vec<StateId> =
            boundary.iter().copied().filter(|&s| space.energy(s) == boundary_energy).collect();
        boundary_minima.sort_unstable();
        let principal_boundary = if members.len() == 1 && boundary_energy <= bottom_energy {
            let mut p: Vec<StateId> = boundary.iter().copied().filter(|&s| space.energy(s) <= bottom_energy).collect();
            p.sort_unstable();
            p
        } else {
            boundary_minima.clone()
        };
        Self {
            principal_boundary,
            depth: (boundary_energy - bottom_energy).max(0),
            members,
            bottom,
            bottom_energy,
            boundary_minima,
            boundary_energy,
        }
    }

    pub fn max_energy(&self, space: &impl StateSpace) -> Energy {
        self.members.iter().map(|&s| space.energy(s)).max().unwrap()
    }

    /// `max interior < min boundary` (always true for singletons).
    pub fn is_sound(&self, space: &impl StateSpace) -> bool {
        self.members.len() == 1 || self.max_energy(space) < self.boundary_energy
    }
}

/// `C_A(η) = {η} ∪ {σ : Φ(η,σ) < Φ(η,A)}` by a best-first flood from `η`.
pub fn initial_cycle(space: &impl StateSpace, eta: StateId, a: &[StateId]) -> Result<Cycle> {
    flood_cycle(space, eta, a, None)
}

/// As [`initial_cycle`], with `witness` (a path from `η` into `A`) bounding
/// `Φ(η,A)` so that only the sublevel set below its maximum is explored —
/// the route for tori too large to enumerate.
pub fn initial_cycle_with_witness(
    space: &impl StateSpace,
    eta: StateId,
    a: &[StateId],
    witness: &PathRecord,
) -> Result<Cycle> {
    if space.id(&witness.start) != eta || !a.contains(&space.id(&witness.end())) {
        return Err(contract("witness must run from eta into A"));
    }
    flood_cycle(space, eta, a, Some(witness.max_energy))
}

fn flood_cycle(space: &impl StateSpace, eta: StateId, a: &[StateId], cap: Option<Energy>) -> Result<Cycle> {
    let target: HashSet<StateId> = a.iter().copied().collect();
    if target.contains(&eta) {
        return Err(contract("eta must lie outside A"));
    }
    let below = |e: Energy| cap.is_none_or(|u| e < u);
    let mut heap = BinaryHeap::new();
    let mut seen = HashSet::new();
    heap.push(Reverse((space.energy(eta), eta)));
    seen.insert(eta);
    let mut popped: Vec<(StateId, Energy)> = Vec::new();
    let mut running = Energy::MIN;
    let mut exit = None;
    let mut nb = Vec::new();
    while let Some(Reverse((e, s))) = heap.pop() {
        running = running.max(e);
        if target.contains(&s) {
            exit = Some(running);
            break;
        }
        popped.push((s, running));
        space.neighbors(s, &mut nb);
        for &t in &nb {
            if seen.insert(t) {
                let et = space.energy(t);
                if below(et) {
                    heap.push(Reverse((et, t)));
                }
            }
        }
    }
    let level = match (exit, cap) {
        (Some(t), _) => t,
        (None, Some(u)) => u,
        (None, None) => return Err(contract("A is unreachable from eta")),
    };
    let members = std::iter::once(eta)
        .chain(popped.iter().filter(|&&(_, r)| r < level).map(|&(s, _)| s))
        .collect();
    Ok(Cycle::from_members(space, members))
}

/// The maximal cycles `ℳ(X∖A)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CyclePartition {
    pub cycles: Vec<Cycle>,
    /// Cycle index per packed state; `None` on `A`.
    pub cycle_of: Vec<Option<u32>>,
}

impl CyclePartition {
    pub fn cycle_containing(&self, s: StateId) -> Option<&Cycle> {
        self.cycle_of[s as usize].map(|c| &self.cycles[c as usize])
    }
}

/// Partition of `X∖A` into maximal cycles via one sweep over energy levels:
/// a component of `{H < E}` not touching `A` becomes a maximal cycle when it
/// joins an `A`-component at level `E`; a state joining `A` at its own level
/// is a singleton cycle.
pub fn maximal_cycle_partition(space: &EnumeratedSpace, a: &[StateId]) -> Result<CyclePartition> {
    if a.is_empty() {
        return Err(contract("A must be nonempty"));
    }
    let in_a = membership(space, a)?;
    let n = space.len();
    let order = &space.levels().order;
    let mut uf = UnionFind::new(n);
    let mut inserted = vec![false; n];
    let mut has_a = vec![false; n];
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut cycles = Vec::new();
    let mut cycle_of = vec![None; n];
    let mut nb = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let level = space.energy(order[i] as u64);
        let j = i + order[i..].iter().take_while(|&&s| space.energy(s as u64) == level).count();
        let group = &order[i..j];
        // Connectivity of this level's states with the components below it.
        // Keys: level states tagged with the high bit, old components by root.
        const NEW: u32 = 1 << 31;
        let mut local: HashMap<u32, u32> = HashMap::new();
        let key = |x: u32, local: &mut HashMap<u32, u32>| {
            let k = local.len() as u32;
            *local.entry(x).or_insert(k)
        };
        let mut links = Vec::new();
        for &s in group {
            key(s | NEW, &mut local);
            space.neighbors(s as u64, &mut nb);
            for &t in &nb {
                let t = t as u32;
                if inserted[t as usize] {
                    links.push((s | NEW, uf.find(t)));
                } else if space.energy(t as u64) == level {
                    links.push((s | NEW, t | NEW));
                }
            }
        }
        for &(_, y) in &links {
            key(y, &mut local);
        }
        let mut luf = UnionFind::new(local.len());
        for &(x, y) in &links {
            luf.union(local[&x], local[&y]);
        }
        let mut reaches_a = vec![false; local.len()];
        for (&x, &k) in &local {
            let r = luf.find(k) as usize;
            let touches = if x & NEW != 0 { in_a[(x & !NEW) as usize] } else { has_a[x as usize] };
            reaches_a[r] |= touches;
        }
        let mut finished = Vec::new();
        for (&x, &k) in &local {
            if reaches_a[luf.find(k) as usize] {
                if x & NEW != 0 {
                    let s = x & !NEW;
                    if !in_a[s as usize] {
                        finished.push(vec![s]);
                    }
                } else if !has_a[x as usize] {
                    finished.push(std::mem::take(&mut members[x as usize]));
                }
            }
        }
        finished.sort_unstable_by_key(|c| c.iter().min().copied());
        for c in finished {
            let id = cycles.len() as u32;
            for &s in &c {
                cycle_of[s as usize] = Some(id);
            }
            cycles.push(Cycle::from_members(space, c.into_iter().map(StateId::from).collect()));
        }
        // Commit the level into the main structure.
        for &s in group {
            inserted[s as usize] = true;
            has_a[s as usize] = in_a[s as usize];
            if !in_a[s as usize] && cycle_of[s as usize].is_none() {
                members[s as usize].push(s);
            }
        }
        for &s in group {
            space.neighbors(s as u64, &mut nb);
            for &t in &nb {
                if !inserted[t as usize] {
                    continue;
                }
                let (ra, rb) = (uf.find(s), uf.find(t as u32));
                if ra == rb {
                    continue;
                }
                let any_a = has_a[ra as usize] || has_a[rb as usize];
                let (mut ma, mut mb) = (std::mem::take(&mut members[ra as usize]), std::mem::take(&mut members[rb as usize]));
                let (root, _) = uf.union(ra, rb).unwrap();
                has_a[root as usize] = any_a;
                if !any_a {
                    if ma.len() < mb.len() {
                        std::mem::swap(&mut ma, &mut mb);
                    }
                    ma.append(&mut mb);
                    members[root as usize] = ma;
                }
            }
        }
        i = j;
    }
    if let Some(s) = (0..n).find(|&s| !in_a[s] && cycle_of[s].is_none()) {
        return Err(contract(format!("state {s} never reaches A")));
    }
    Ok(CyclePartition { cycles, cycle_of })
}

/// The typical tube `T_A(η)`: every cycle on a cycle path from `C_A(η)` in
/// which each cycle meets the principal boundary of its predecessor and the
/// last one's principal boundary meets `A`, together with those entry states.
pub fn vtj_tube(space: &EnumeratedSpace, eta: StateId, a: &[StateId]) -> Result<Vec<StateId>> {
    let part = maximal_cycle_partition(space, a)?;
    tube_from_partition(&part, eta)
}

pub fn tube_from_partition(part: &CyclePartition, eta: StateId) -> Result<Vec<StateId>> {
    let start = part.cycle_of[eta as usize].ok_or_else(|| contract("eta must lie outside A"))? as usize;
    let m = part.cycles.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut exits_to_a = vec![false; m];
    for (c, cyc) in part.cycles.iter().enumerate() {
        for &s in &cyc.principal_boundary {
            match part.cycle_of[s as usize] {
                Some(d) if d as usize != c => succ[c].push(d as usize),
                Some(_) => {}
                None => exits_to_a[c] = true,
            }
        }
        succ[c].sort_unstable();
        succ[c].dedup();
    }
    let mut reach = vec![false; m];
    let mut stack = vec![start];
    reach[start] = true;
    while let Some(c) = stack.pop() {
        for &d in &succ[c] {
            if !reach[d] {
                reach[d] = true;
                stack.push(d);
            }
        }
    }
    // Backward closure from A-exits, restricted to reachable cycles.
    let mut useful = exits_to_a.iter().zip(&reach).map(|(&e, &r)| e && r).collect::<Vec<_>>();
    loop {
        let mut changed = false;
        for c in 0..m {
            if reach[c] && !useful[c] && succ[c].iter().any(|&d| useful[d]) {
                useful[c] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut tube = Vec::new();
    for c in (0..m).filter(|&c| useful[c]) {
        let cyc = &part.cycles[c];
        tube.extend_from_slice(&cyc.members);
        if exits_to_a[c] {
            tube.extend(cyc.principal_boundary.iter().copied().filter(|&s| part.cycle_of[s as usize].is_none()));
        }
    }
    tube.sort_unstable();
    tube.dedup();
    Ok(tube)
}
