use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use super::minimax::{communication_height, membership};
use super::space::{EnumeratedSpace, StateId, StateSpace};
use crate::error::{contract, Result};
use crate::spin::{Energy, PathRecord};

/// Saddle classification by the number of strictly downhill neighbours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SaddleType {
    /// Three downhill moves: the protuberance sits mid-side.
    Type1,
    /// Two downhill moves: the protuberance sits next to a corner.
    Type2,
    Other,
}

impl SaddleType {
    pub fn from_downhill(n: usize) -> Self {
        match n {
            3 => SaddleType::Type1,
            2 => SaddleType::Type2,
            _ => SaddleType::Other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaddleState {
    pub state: StateId,
    pub essential: bool,
    pub downhill: usize,
    pub kind: SaddleType,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateSet {
    pub level: Energy,
    /// All of `𝒮(A,B)` (enumerated spaces) or only the essential candidates
    /// adjacent to the `A` side (local search).
    pub saddles: Vec<SaddleState>,
    /// Union of minimal gates `𝒢(A,B)`, sorted.
    pub gate: Vec<StateId>,
    /// Whether `{H <= Φ} ∖ 𝒢` separates `A` from `B`; `None` when not checked.
    pub disconnects: Option<bool>,
}

impl GateSet {
    pub fn count(&self, kind: SaddleType) -> usize {
        self.saddles.iter().filter(|s| s.essential && s.kind == kind).count()
    }
}

pub fn downhill_count(space: &impl StateSpace, s: StateId) -> usize {
    let mut nb = Vec::new();
    space.neighbors(s, &mut nb);
    let e = space.energy(s);
    nb.iter().filter(|&&t| space.energy(t) < e).count()
}

fn strict_flood(space: &EnumeratedSpace, from: &[StateId], level: Energy) -> Vec<bool> {
    let mut mark = vec![false; space.len()];
    let mut stack: Vec<StateId> = from.iter().copied().filter(|&s| space.energy(s) < level).collect();
    for &s in &stack {
        mark[s as usize] = true;
    }
    let mut nb = Vec::new();
    while let Some(s) = stack.pop() {
        space.neighbors(s, &mut nb);
        for &t in &nb {
            if !mark[t as usize] && space.energy(t) < level {
                mark[t as usize] = true;
                stack.push(t);
            }
        }
    }
    mark
}

/// `𝒮(A,B)` with essential saddles: `σ` is essential when it can be entered
/// from the strict sublevel component of `A` and left into that of `B`, so
/// that an optimal path through `σ` stays strictly below `Φ` elsewhere.
pub fn saddle_and_gates(space: &EnumeratedSpace, a: &[StateId], b: &[StateId]) -> Result<GateSet> {
    let mm = communication_height(space, a, b)?;
    let level = mm.value;
    let (in_a, in_b) = (membership(space, a)?, membership(space, b)?);
    let (sa, sb) = (strict_flood(space, a, level), strict_flood(space, b, level));
    let mut nb = Vec::new();
    let saddles: Vec<SaddleState> = mm
        .saddles
        .iter()
        .map(|&s| {
            space.neighbors(s, &mut nb);
            let enter = in_a[s as usize] || nb.iter().any(|&t| sa[t as usize]);
            let leave = in_b[s as usize] || nb.iter().any(|&t| sb[t as usize]);
            let downhill = nb.iter().filter(|&&t| space.energy(t) < level).count();
            SaddleState { state: s, essential: enter && leave, downhill, kind: SaddleType::from_downhill(downhill) }
        })
        .collect();
    let gate: Vec<StateId> = saddles.iter().filter(|s| s.essential).map(|s| s.state).collect();
    let removed = membership(space, &gate)?;
    let mut seen = vec![false; space.len()];
    let mut stack: Vec<StateId> = a.iter().copied().filter(|&s| !removed[s as usize] && space.energy(s) <= level).collect();
    for &s in &stack {
        seen[s as usize] = true;
    }
    let mut reached_b = false;
    while let Some(s) = stack.pop() {
        if in_b[s as usize] {
            reached_b = true;
            break;
        }
        space.neighbors(s, &mut nb);
        for &t in &nb {
            let tu = t as usize;
            if !seen[tu] && !removed[tu] && space.energy(t) <= level {
                seen[tu] = true;
                stack.push(t);
            }
        }
    }
    Ok(GateSet { level, saddles, gate, disconnects: Some(!reached_b) })
}

/// Essential saddles between `A` and `B` on a space that cannot be
/// enumerated. `witness` (a path from `A` to `B`) fixes the candidate level; it
/// is exact once the strict sublevel flood from `A` is shown to miss `B`.
/// `max_states` bounds every local search.
pub fn essential_gate_local(
    space: &impl StateSpace,
    a: &[StateId],
    b: &[StateId],
    witness: &PathRecord,
    max_states: usize,
) -> Result<GateSet> {
    let level = witness.max_energy;
    let in_b: HashSet<StateId> = b.iter().copied().collect();
    if !a.contains(&space.id(&witness.start)) || !in_b.contains(&space.id(&witness.end())) {
        return Err(contract("witness must run from A to B"));
    }
    let over = || contract(format!("local gate search exceeded {max_states} states"));
    let mut sa: HashSet<StateId> = a.iter().copied().filter(|&s| space.energy(s) < level).collect();
    let mut stack: Vec<StateId> = sa.iter().copied().collect();
    let mut nb = Vec::new();
    let mut candidates = HashSet::new();
    while let Some(s) = stack.pop() {
        if in_b.contains(&s) {
            return Err(contract("witness is not optimal: B lies below its maximum"));
        }
        space.neighbors(s, &mut nb);
        for &t in &nb {
            let e = space.energy(t);
            if e < level {
                if sa.insert(t) {
                    if sa.len() > max_states {
                        return Err(over());
                    }
                    stack.push(t);
                }
            } else if e == level {
                candidates.insert(t);
            }
        }
    }
    candidates.extend(a.iter().copied().filter(|&s| space.energy(s) == level));
    let mut candidates: Vec<StateId> = candidates.into_iter().collect();
    candidates.sort_unstable();

    let mut known_b: HashSet<StateId> = HashSet::new();
    let mut known_not: HashSet<StateId> = sa.clone();
    let mut saddles = Vec::new();
    for &s in &candidates {
        space.neighbors(s, &mut nb);
        let downhill: Vec<StateId> = nb.iter().copied().filter(|&t| space.energy(t) < level).collect();
        let mut leave = in_b.contains(&s);
        for &z in &downhill {
            if leave {
                break;
            }
            leave = reaches_below(space, z, &in_b, level, &mut known_b, &mut known_not, max_states)?;
        }
        saddles.push(SaddleState {
            state: s,
            essential: leave,
            downhill: downhill.len(),
            kind: SaddleType::from_downhill(downhill.len()),
        });
    }
    let gate = saddles.iter().filter(|s| s.essential).map(|s| s.state).collect();
    Ok(GateSet { level, saddles, gate, disconnects: None })
}

/// Whether `from` reaches `B` through states strictly below `level`;
/// best-first by energy, memoizing both outcomes.
fn reaches_below(
    space: &impl StateSpace,
    from: StateId,
    b: &HashSet<StateId>,
    level: Energy,
    known_b: &mut HashSet<StateId>,
    known_not: &mut HashSet<StateId>,
    max_states: usize,
) -> Result<bool> {
    if known_b.contains(&from) || b.contains(&from) {
        return Ok(true);
    }
    if known_not.contains(&from) {
        return Ok(false);
    }
    let mut seen = HashSet::from([from]);
    let mut heap = BinaryHeap::from([Reverse((space.energy(from), from))]);
    let mut nb = Vec::new();
    let mut hit = false;
    while let Some(Reverse((_, s))) = heap.pop() {
        if b.contains(&s) || known_b.contains(&s) {
            hit = true;
            break;
        }
        if known_not.contains(&s) {
            // A component already shown to miss B: so does this one.
            break;
        }
        space.neighbors(s, &mut nb);
        for &t in &nb {
            if space.energy(t) < level && seen.insert(t) {
                if seen.len() > max_states {
                    return Err(contract(format!("local gate search exceeded {max_states} states")));
                }
                heap.push(Reverse((space.energy(t), t)));
            }
        }
    }
    if hit {
        known_b.extend(seen);
    } else {
        known_not.extend(seen);
    }
    Ok(hit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{LatticeGeometry, ModelParams, PottsModel, Spin};

    fn space() -> EnumeratedSpace {
        let m = PottsModel::new(
            LatticeGeometry::new(3, 3).unwrap(),
            ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2).unwrap(),
        );
        EnumeratedSpace::new(m).unwrap()
    }

    #[test]
    fn gates_are_sound_between_uniform_states() {
        let sp = space();
        let ids = Spin::ALL.map(|s| sp.uniform(s));
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let g = saddle_and_gates(&sp, &[ids[i]], &[ids[j]]).unwrap();
            assert!(!g.gate.is_empty());
            assert!(g.gate.iter().all(|&s| sp.energy(s) == g.level));
            assert_eq!(g.disconnects, Some(true), "pair {i}{j}");
        }
    }

    #[test]
    fn adjacent_toy_pair_has_a_single_gate() {
        let sp = space();
        let one = sp.uniform(Spin::One);
        let mut nb = Vec::new();
        sp.neighbors(one, &mut nb);
        let g = saddle_and_gates(&sp, &[one], &[nb[0]]).unwrap();
        assert_eq!(g.gate, vec![nb[0]]);
    }
}
