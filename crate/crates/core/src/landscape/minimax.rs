use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::space::{EnumeratedSpace, StateId, StateSpace};
use super::unionfind::UnionFind;
use crate::error::{contract, Result};
use crate::spin::{Energy, PathRecord};

const NONE: u32 = u32::MAX;

/// `Φ(A,B)`, an optimal path and the minimal saddle set `𝒮(A,B)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimaxResult {
    pub value: Energy,
    pub witness: PathRecord,
    /// Sorted packed indices.
    pub saddles: Vec<StateId>,
}

pub(crate) fn membership(space: &EnumeratedSpace, set: &[StateId]) -> Result<Vec<bool>> {
    let mut m = vec![false; space.len()];
    for &s in set {
        *m.get_mut(s as usize).ok_or_else(|| contract(format!("state {s} out of range")))? = true;
    }
    Ok(m)
}

fn check_pair(space: &EnumeratedSpace, a: &[StateId], b: &[StateId]) -> Result<(Vec<bool>, Vec<bool>)> {
    if a.is_empty() || b.is_empty() {
        return Err(contract("A and B must be nonempty"));
    }
    let (ma, mb) = (membership(space, a)?, membership(space, b)?);
    if a.iter().any(|&s| mb[s as usize]) {
        return Err(contract("A and B must be disjoint"));
    }
    Ok((ma, mb))
}

/// Bottleneck Dijkstra from `sources`; the returned value is that of the first
/// target settled, with predecessors for the witness. Ties within an energy
/// level are settled in increasing packed index.
pub(crate) fn bottleneck_search(
    space: &EnumeratedSpace,
    sources: &[StateId],
    is_target: impl Fn(u32) -> bool,
) -> Option<(u32, u32, Vec<u32>)> {
    let lv = space.levels();
    let n = space.len();
    let mut dist = vec![NONE; n];
    let mut pred = vec![NONE; n];
    let mut done = vec![false; n];
    let mut buckets: Vec<BinaryHeap<Reverse<u32>>> = Vec::new();
    buckets.resize_with(lv.values.len(), BinaryHeap::new);
    for &s in sources {
        let r = lv.rank[s as usize];
        if r < dist[s as usize] {
            dist[s as usize] = r;
            buckets[r as usize].push(Reverse(s as u32));
        }
    }
    let mut nb = Vec::with_capacity(space.degree());
    let mut cur = 0;
    while cur < buckets.len() {
        let Some(Reverse(s)) = buckets[cur].pop() else {
            cur += 1;
            continue;
        };
        if done[s as usize] {
            continue;
        }
        done[s as usize] = true;
        if is_target(s) {
            return Some((s, cur as u32, pred));
        }
        space.neighbors(s as u64, &mut nb);
        for &t in &nb {
            let t = t as usize;
            if done[t] {
                continue;
            }
            let nd = lv.rank[t].max(cur as u32);
            if nd < dist[t] {
                dist[t] = nd;
                pred[t] = s;
                buckets[nd as usize].push(Reverse(t as u32));
            }
        }
    }
    None
}

pub(crate) fn trace_back(end: u32, pred: &[u32]) -> Vec<StateId> {
    let mut states = vec![end as StateId];
    let mut s = end;
    while pred[s as usize] != NONE {
        s = pred[s as usize];
        states.push(s as StateId);
    }
    states.reverse();
    states
}

/// States of energy `level` in the component of `{H <= level}` containing `from`.
pub(crate) fn level_component(space: &EnumeratedSpace, from: &[StateId], level: Energy) -> Vec<StateId> {
    let mut seen = vec![false; space.len()];
    let mut stack: Vec<StateId> = from.iter().copied().filter(|&s| space.energy(s) <= level).collect();
    for &s in &stack {
        seen[s as usize] = true;
    }
    let mut out = Vec::new();
    let mut nb = Vec::new();
    while let Some(s) = stack.pop() {
        if space.energy(s) == level {
            out.push(s);
        }
        space.neighbors(s, &mut nb);
        for &t in &nb {
            if !seen[t as usize] && space.energy(t) <= level {
                seen[t as usize] = true;
                stack.push(t);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Exact `Φ(A,B) = min over paths max H`, with witness and saddle set.
pub fn communication_height(space: &EnumeratedSpace, a: &[StateId], b: &[StateId]) -> Result<MinimaxResult> {
    let (_, mb) = check_pair(space, a, b)?;
    let (end, rank, pred) = bottleneck_search(space, a, |s| mb[s as usize]).expect("state graph is connected");
    let value = space.levels().values[rank as usize];
    let witness = space.path(&trace_back(end, &pred))?;
    debug_assert_eq!(witness.max_energy, value);
    Ok(MinimaxResult { value, witness, saddles: level_component(space, a, value) })
}

/// Independent oracle for `Φ(A,B)`: insert states in increasing energy into a
/// union-find and report the level at which A first meets B.
pub fn threshold_sweep_oracle(space: &EnumeratedSpace, a: &[StateId], b: &[StateId]) -> Result<Energy> {
    let (ma, mb) = check_pair(space, a, b)?;
    let n = space.len();
    let mut uf = UnionFind::new(n);
    let mut inserted = vec![false; n];
    // Per-root flags: bit 0 = touches A, bit 1 = touches B.
    let mut flags = vec![0_u8; n];
    let mut nb = Vec::new();
    for &s in &space.levels().order {
        let su = s as usize;
        inserted[su] = true;
        flags[su] = ma[su] as u8 | (mb[su] as u8) << 1;
        space.neighbors(s as u64, &mut nb);
        for &t in &nb {
            if inserted[t as usize] {
                if let Some((root, gone)) = uf.union(s, t as u32) {
                    flags[root as usize] |= flags[gone as usize];
                }
            }
        }
        let root = uf.find(s);
        if flags[root as usize] == 3 {
            return Ok(space.energy(s as u64));
        }
    }
    Err(contract("A and B are not connected"))
}
