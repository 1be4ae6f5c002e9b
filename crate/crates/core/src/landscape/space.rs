use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{contract, Error, Result};
use crate::spin::{Energy, Move, PathRecord, PottsModel, Spin, SpinConfiguration, MAX_PACKED_SITES};

/// Packed configuration index.
pub type StateId = u64;

/// Default enumeration budget, `3^12` states.
pub const DEFAULT_BUDGET: u64 = 531_441;

/// Single-flip state graph over packed indices.
pub trait StateSpace: Sync {
    fn model(&self) -> &PottsModel;

    fn energy(&self, s: StateId) -> Energy;

    /// Appends the `2·K·L` neighbours of `s` (cleared first).
    fn neighbors(&self, s: StateId, out: &mut Vec<StateId>);

    fn config(&self, s: StateId) -> SpinConfiguration {
        SpinConfiguration::from_packed(s, self.model().sites()).expect("valid state id")
    }

    fn id(&self, cfg: &SpinConfiguration) -> StateId {
        cfg.packed().expect("configuration fits a packed index")
    }

    fn uniform(&self, s: Spin) -> StateId {
        self.id(&SpinConfiguration::uniform(self.model().sites(), s))
    }

    /// Turns a state sequence into a [`PathRecord`].
    fn path(&self, states: &[StateId]) -> Result<PathRecord> {
        let first = *states.first().ok_or_else(|| contract("empty path"))?;
        let sites = self.model().sites();
        let mut moves = Vec::with_capacity(states.len().saturating_sub(1));
        for w in states.windows(2) {
            let (a, b) = (self.config(w[0]), self.config(w[1]));
            let diff: Vec<usize> = (0..sites).filter(|&x| a.get(x) != b.get(x)).collect();
            if diff.len() != 1 {
                return Err(contract("consecutive path states are not adjacent"));
            }
            moves.push(Move { site: diff[0], spin: b.get(diff[0]) });
        }
        PathRecord::from_moves(self.model(), self.config(first), moves)
    }
}

fn powers_of_three(sites: usize) -> Vec<u64> {
    (0..sites).map(|s| 3_u64.pow(s as u32)).collect()
}

#[inline]
fn neighbors_packed(pow3: &[u64], s: StateId, out: &mut Vec<StateId>) {
    out.clear();
    let mut rest = s;
    for &p in pow3 {
        let d = rest % 3;
        rest /= 3;
        let base = s - d * p;
        for e in 0..3 {
            if e != d {
                out.push(base + e * p);
            }
        }
    }
}

/// The full configuration space with a dense energy table.
pub struct EnumeratedSpace {
    model: PottsModel,
    pow3: Vec<u64>,
    energies: Vec<Energy>,
    levels: OnceLock<Levels>,
}

/// Distinct energies and each state's rank among them.
pub(crate) struct Levels {
    pub values: Vec<Energy>,
    pub rank: Vec<u32>,
    /// States sorted by (energy, index).
    pub order: Vec<u32>,
}

impl EnumeratedSpace {
    pub fn new(model: PottsModel) -> Result<Self> {
        Self::with_budget(model, DEFAULT_BUDGET)
    }

    /// Fails with [`Error::Budget`] when `3^(K·L)` exceeds `budget`.
    pub fn with_budget(model: PottsModel, budget: u64) -> Result<Self> {
        let sites = model.sites();
        let required = 3_u128.pow(sites as u32);
        if required > budget as u128 || sites > MAX_PACKED_SITES || required > u32::MAX as u128 {
            return Err(Error::Budget { required, budget: budget as u128 });
        }
        let n = required as usize;
        let energies = (0..n as u64)
            .into_par_iter()
            .map_init(
                || Vec::with_capacity(sites),
                |buf, s| {
                    decode_into(s, sites, buf);
                    model.energy_unchecked(buf)
                },
            )
            .collect();
        Ok(Self { pow3: powers_of_three(sites), model, energies, levels: OnceLock::new() })
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[Energy] {
        &self.energies
    }

    pub fn degree(&self) -> usize {
        2 * self.model.sites()
    }

    pub(crate) fn levels(&self) -> &Levels {
        self.levels.get_or_init(|| {
            let mut values = self.energies.clone();
            values.par_sort_unstable();
            values.dedup();
            let rank = self
                .energies
                .par_iter()
                .map(|e| values.binary_search(e).unwrap() as u32)
                .collect();
            let mut order: Vec<u32> = (0..self.len() as u32).collect();
            order.par_sort_unstable_by_key(|&s| (self.energies[s as usize], s));
            Levels { values, rank, order }
        })
    }

    /// 0-based spin index at `site` in state `s`.
    #[inline]
    pub fn digit(&self, s: StateId, site: usize) -> u64 {
        (s / self.pow3[site]) % 3
    }
}

impl StateSpace for EnumeratedSpace {
    fn model(&self) -> &PottsModel {
        &self.model
    }

    #[inline]
    fn energy(&self, s: StateId) -> Energy {
        self.energies[s as usize]
    }

    #[inline]
    fn neighbors(&self, s: StateId, out: &mut Vec<StateId>) {
        neighbors_packed(&self.pow3, s, out)
    }
}

fn decode_into(mut s: u64, sites: usize, buf: &mut Vec<Spin>) {
    buf.clear();
    for _ in 0..sites {
        buf.push(Spin::from_index((s % 3) as usize));
        s /= 3;
    }
}

/// Configuration space too large to tabulate; energies are evaluated on demand.
/// Suitable for local searches (cycles and saddles near a known state).
pub struct LazySpace {
    model: PottsModel,
    pow3: Vec<u64>,
}

impl LazySpace {
    pub fn new(model: PottsModel) -> Result<Self> {
        if model.sites() > MAX_PACKED_SITES {
            return Err(contract(format!("lazy spaces support at most {MAX_PACKED_SITES} sites")));
        }
        Ok(Self { pow3: powers_of_three(model.sites()), model })
    }
}

impl StateSpace for LazySpace {
    fn model(&self) -> &PottsModel {
        &self.model
    }

    fn energy(&self, s: StateId) -> Energy {
        let mut buf = Vec::with_capacity(self.model.sites());
        decode_into(s, self.model.sites(), &mut buf);
        self.model.energy_unchecked(&buf)
    }

    fn neighbors(&self, s: StateId, out: &mut Vec<StateId>) {
        neighbors_packed(&self.pow3, s, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{LatticeGeometry, ModelParams};

    fn model(k: usize, l: usize) -> PottsModel {
        PottsModel::new(
            LatticeGeometry::new(k, l).unwrap(),
            ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2).unwrap(),
        )
    }

    #[test]
    fn budget_is_enforced() {
        let err = EnumeratedSpace::with_budget(model(3, 3), 1000).err().unwrap();
        assert!(matches!(err, Error::Budget { required: 19683, budget: 1000 }));
        assert!(EnumeratedSpace::new(model(4, 4)).is_err());
    }

    #[test]
    fn adjacency_is_symmetric_irreflexive_with_full_degree() {
        let sp = EnumeratedSpace::new(model(3, 3)).unwrap();
        let mut nb = Vec::new();
        let mut back = Vec::new();
        for s in (0..sp.len() as u64).step_by(97) {
            sp.neighbors(s, &mut nb);
            assert_eq!(nb.len(), 18);
            assert!(!nb.contains(&s));
            for &t in &nb.clone() {
                sp.neighbors(t, &mut back);
                assert!(back.contains(&s));
            }
        }
    }

    #[test]
    fn table_matches_direct_energy() {
        let m = model(3, 3);
        let sp = EnumeratedSpace::new(m.clone()).unwrap();
        let lazy = LazySpace::new(m.clone()).unwrap();
        for s in (0..sp.len() as u64).step_by(31) {
            let cfg = sp.config(s);
            assert_eq!(sp.energy(s), m.energy(&cfg).unwrap());
            assert_eq!(lazy.energy(s), sp.energy(s));
        }
    }
}
