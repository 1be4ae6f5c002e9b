use serde::{Deserialize, Serialize};

use super::{check_pair_assumption, Energy, PottsModel, Spin, SpinConfiguration};
use crate::error::{contract, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub site: usize,
    pub spin: Spin,
}

/// A single-flip path with the energy of every visited state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub start: SpinConfiguration,
    pub moves: Vec<Move>,
    /// `energies[k]` is the energy after `k` moves.
    pub energies: Vec<Energy>,
    pub max_energy: Energy,
    /// First index attaining `max_energy`.
    pub argmax: usize,
}

impl PathRecord {
    /// Replays `moves` from `start`; every move must change exactly one spin.
    pub fn from_moves(model: &PottsModel, start: SpinConfiguration, moves: Vec<Move>) -> Result<Self> {
        let mut cfg = start.clone();
        let mut e = model.energy(&cfg)?;
        let mut energies = Vec::with_capacity(moves.len() + 1);
        energies.push(e);
        for (k, m) in moves.iter().enumerate() {
            if m.site >= cfg.len() || cfg.get(m.site) == m.spin {
                return Err(contract(format!("move {k} does not change a site")));
            }
            e += model.delta_unchecked(cfg.spins(), m.site, m.spin);
            cfg.set(m.site, m.spin);
            energies.push(e);
        }
        let (argmax, &max_energy) = energies
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("path has a start state");
        Ok(Self { start, moves, energies, max_energy, argmax })
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// State after `k` moves.
    pub fn state_at(&self, k: usize) -> SpinConfiguration {
        let mut cfg = self.start.clone();
        for m in &self.moves[..k] {
            cfg.set(m.site, m.spin);
        }
        cfg
    }

    pub fn end(&self) -> SpinConfiguration {
        self.state_at(self.moves.len())
    }

    /// Every visited state, in order.
    pub fn states(&self) -> impl Iterator<Item = SpinConfiguration> + '_ {
        let mut cfg = self.start.clone();
        std::iter::once(cfg.clone()).chain(self.moves.iter().map(move |m| {
            cfg.set(m.site, m.spin);
            cfg.clone()
        }))
    }

    /// Number of indices attaining the maximum.
    pub fn max_multiplicity(&self) -> usize {
        self.energies.iter().filter(|&&e| e == self.max_energy).count()
    }

    /// The same path walked backwards.
    pub fn reversed(&self, model: &PottsModel) -> Result<Self> {
        let mut cfg = self.start.clone();
        let mut undo = Vec::with_capacity(self.moves.len());
        for m in &self.moves {
            undo.push(Move { site: m.site, spin: cfg.get(m.site) });
            cfg.set(m.site, m.spin);
        }
        undo.reverse();
        Self::from_moves(model, cfg, undo)
    }

    /// Recomputes every energy from scratch.
    pub fn validate(&self, model: &PottsModel) -> Result<()> {
        for (k, cfg) in self.states().enumerate() {
            if model.energy(&cfg)? != self.energies[k] {
                return Err(contract(format!("recorded energy at step {k} is stale")));
            }
        }
        Ok(())
    }

    /// Appends another path that starts where this one ends.
    pub fn concat(&self, other: &PathRecord, model: &PottsModel) -> Result<Self> {
        if self.end() != other.start {
            return Err(contract("paths do not join"));
        }
        let moves = self.moves.iter().chain(&other.moves).copied().collect();
        Self::from_moves(model, self.start.clone(), moves)
    }
}

/// The standard droplet-growth path from uniform `i` to uniform `j`: a seed
/// at the top-left corner grows by alternately adding a row below and a
/// column to the right; each new line starts at `offset` (clamped), filling
/// towards the far end and then back.
pub fn reference_path(model: &PottsModel, i: Spin, j: Spin) -> Result<PathRecord> {
    reference_path_with_offset(model, i, j, 0)
}

pub fn reference_path_with_offset(model: &PottsModel, i: Spin, j: Spin, offset: usize) -> Result<PathRecord> {
    if i == j {
        return Err(contract("reference path needs two distinct spins"));
    }
    check_pair_assumption(model, i, j)?;
    let start = SpinConfiguration::uniform(model.sites(), i);
    growth_path(model, start, j, (0, 0), offset)
}

/// Continues the growth of a `rows x cols` rectangle of `invader` anchored
/// at the origin until the whole torus carries `invader`.
pub fn growth_path(
    model: &PottsModel,
    start: SpinConfiguration,
    invader: Spin,
    rect: (usize, usize),
    offset: usize,
) -> Result<PathRecord> {
    let g = &model.geometry;
    let (k, l) = (g.rows(), g.cols());
    let (mut r, mut c) = rect;
    if r > k || c > l || (r == 0) != (c == 0) {
        return Err(contract(format!("cannot grow from a {r}x{c} rectangle")));
    }
    for row in 0..r {
        for col in 0..c {
            if start.get(g.site(row, col)) != invader {
                return Err(contract("start does not contain the stated rectangle"));
            }
        }
    }
    let mut moves = Vec::new();
    let mut cfg = start.clone();
    let mut push = |cfg: &mut SpinConfiguration, site: usize| {
        if cfg.get(site) != invader {
            cfg.set(site, invader);
            moves.push(Move { site, spin: invader });
        }
    };
    if r == 0 {
        push(&mut cfg, g.site(0, 0));
        r = 1;
        c = 1;
    }
    while r < k || c < l {
        let add_row = (r <= c && r < k) || c == l;
        let len = if add_row { c } else { r };
        let o = offset.min(len - 1);
        for t in (o..len).chain((0..o).rev()) {
            let site = if add_row { g.site(r, t) } else { g.site(t, c) };
            push(&mut cfg, site);
        }
        if add_row {
            r += 1;
        } else {
            c += 1;
        }
    }
    PathRecord::from_moves(model, start, moves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{ising_quantities, make_droplet, DropletSpec, LatticeGeometry, ModelParams, Side};

    fn model(k: usize, l: usize, h: [&str; 3]) -> PottsModel {
        PottsModel::new(LatticeGeometry::new(k, l).unwrap(), ModelParams::from_decimals(h, 2).unwrap())
    }

    #[test]
    fn reference_path_saddle_is_the_critical_droplet() {
        let m = model(6, 6, ["0.05", "0.45", "0.90"]);
        let p = reference_path(&m, Spin::One, Spin::Three).unwrap();
        p.validate(&m).unwrap();
        assert_eq!(p.start, SpinConfiguration::uniform(36, Spin::One));
        assert_eq!(p.end(), SpinConfiguration::uniform(36, Spin::Three));
        let q = ising_quantities(85, 100).unwrap();
        assert_eq!(p.max_energy, m.uniform_energy(Spin::One) + q.f_h);
        assert_eq!(p.max_multiplicity(), 1);
        assert!(p.energies[p.argmax + 1..].iter().all(|&e| e < p.max_energy));
        let critical = DropletSpec::rectangle(Spin::Three, Spin::One, 2, 3).with_protuberance(Side::Right, Some(0));
        assert_eq!(p.state_at(p.argmax), make_droplet(&critical, &m).unwrap());
    }

    #[test]
    fn energy_profile_does_not_depend_on_offset() {
        let m = model(7, 6, ["0.05", "0.45", "0.90"]);
        let base = reference_path(&m, Spin::One, Spin::Three).unwrap();
        for o in 1..7 {
            let p = reference_path_with_offset(&m, Spin::One, Spin::Three, o).unwrap();
            assert_eq!(p.energies, base.energies);
        }
    }

    #[test]
    fn reversal_keeps_the_maximum() {
        let m = model(6, 6, ["0.05", "0.45", "0.90"]);
        let p = reference_path(&m, Spin::One, Spin::Three).unwrap();
        let r = p.reversed(&m).unwrap();
        r.validate(&m).unwrap();
        assert_eq!(r.max_energy, p.max_energy);
        assert_eq!(r.end(), p.start);
    }

    #[test]
    fn assumption_failure_names_the_bound() {
        let m = model(3, 3, ["0.05", "0.45", "0.90"]);
        let err = reference_path(&m, Spin::Two, Spin::Three).unwrap_err();
        assert!(matches!(err, crate::Error::AssumptionA(_)));
    }

    #[test]
    fn moves_must_change_a_site() {
        let m = model(3, 3, ["0.05", "0.45", "0.90"]);
        let start = SpinConfiguration::uniform(9, Spin::One);
        assert!(PathRecord::from_moves(&m, start, vec![Move { site: 0, spin: Spin::One }]).is_err());
    }
}
