use serde::{Deserialize, Serialize};

use super::minimax::bottleneck_search;
use super::space::{EnumeratedSpace, StateId, StateSpace};
use super::unionfind::UnionFind;
use crate::error::Result;
use crate::spin::{Energy, Spin};

/// A stability level; `Infinite` for global minima (no lower state exists).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stability {
    Finite(Energy),
    Infinite,
}

impl Stability {
    pub fn finite(self) -> Option<Energy> {
        match self {
            Stability::Finite(v) => Some(v),
            Stability::Infinite => None,
        }
    }
}

/// `V_σ` for a single state, with a strictly lower state reached at `Φ(σ, I_σ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityLevel {
    pub value: Stability,
    pub witness: Option<StateId>,
}

/// Direct evaluation: bottleneck search from `σ` to `I_σ = {H < H(σ)}`.
pub fn stability_level(space: &EnumeratedSpace, sigma: StateId) -> Result<StabilityLevel> {
    let h = space.energy(sigma);
    let found = bottleneck_search(space, &[sigma], |s| space.energy(s as u64) < h);
    Ok(match found {
        Some((t, rank, _)) => StabilityLevel {
            value: Stability::Finite(space.levels().values[rank as usize] - h),
            witness: Some(t as StateId),
        },
        None => StabilityLevel { value: Stability::Infinite, witness: None },
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Indexed by packed state.
    pub levels: Vec<StabilityLevel>,
    /// `V` of the three uniform states.
    pub mono: [Stability; 3],
    /// Largest `V` over all non-uniform states, and one state attaining it.
    pub max_other: Energy,
    pub argmax_other: StateId,
    /// States with `V = ∞`.
    pub infinite: Vec<StateId>,
}

impl StabilityReport {
    /// `max_{σ ∉ {1,2,3}} V_σ < V_1 < V_2`.
    pub fn ordering_holds(&self) -> bool {
        match (self.mono[0], self.mono[1]) {
            (Stability::Finite(v1), Stability::Finite(v2)) => self.max_other < v1 && v1 < v2,
            _ => false,
        }
    }
}

/// Every `V_σ` in one sweep: states enter a union-find in order of energy; a
/// component whose minimum is strictly above that of a component it merges
/// with at level `T` resolves its pending minima with `V = T - H`.
pub fn stability_levels(space: &EnumeratedSpace) -> StabilityReport {
    let n = space.len();
    let lv = space.levels();
    let mut uf = UnionFind::new(n);
    let mut inserted = vec![false; n];
    let mut min_state: Vec<u32> = (0..n as u32).collect();
    let mut pending: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut levels = vec![StabilityLevel { value: Stability::Infinite, witness: None }; n];
    let mut nb = Vec::new();
    for &s in &lv.order {
        let su = s as usize;
        let level = space.energy(s as u64);
        inserted[su] = true;
        pending[su].push(s);
        space.neighbors(s as u64, &mut nb);
        for &t in &nb {
            if !inserted[t as usize] {
                continue;
            }
            let (ra, rb) = (uf.find(s), uf.find(t as u32));
            if ra == rb {
                continue;
            }
            let (ma, mb) = (min_state[ra as usize], min_state[rb as usize]);
            let (ea, eb) = (space.energy(ma as u64), space.energy(mb as u64));
            let mut resolve = |list: Vec<u32>, lower: u32| {
                for p in list {
                    levels[p as usize] = StabilityLevel {
                        value: Stability::Finite(level - space.energy(p as u64)),
                        witness: Some(lower as StateId),
                    };
                }
            };
            let mut merged = Vec::new();
            let new_min = if ea < eb {
                resolve(std::mem::take(&mut pending[rb as usize]), ma);
                merged.append(&mut pending[ra as usize]);
                ma
            } else if eb < ea {
                resolve(std::mem::take(&mut pending[ra as usize]), mb);
                merged.append(&mut pending[rb as usize]);
                mb
            } else {
                let (mut x, mut y) = (std::mem::take(&mut pending[ra as usize]), std::mem::take(&mut pending[rb as usize]));
                if x.len() < y.len() {
                    std::mem::swap(&mut x, &mut y);
                }
                x.append(&mut y);
                merged = x;
                ma.min(mb)
            };
            let (root, _) = uf.union(ra, rb).expect("distinct roots");
            pending[root as usize] = merged;
            min_state[root as usize] = new_min;
        }
    }
    let mono_ids = Spin::ALL.map(|s| space.uniform(s));
    let mut max_other = 0;
    let mut argmax_other = 0;
    let mut infinite = Vec::new();
    for (s, l) in levels.iter().enumerate() {
        match l.value {
            Stability::Infinite => infinite.push(s as StateId),
            Stability::Finite(v) if !mono_ids.contains(&(s as StateId)) && v > max_other => {
                max_other = v;
                argmax_other = s as StateId;
            }
            _ => {}
        }
    }
    StabilityReport {
        mono: mono_ids.map(|s| levels[s as usize].value),
        levels,
        max_other,
        argmax_other,
        infinite,
    }
}
