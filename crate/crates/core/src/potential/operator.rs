use rayon::prelude::*;
use serde::Serialize;

use super::symmetry::SymmetryGroup;
use crate::error::{contract, Error, Result};
use crate::landscape::{EnumeratedSpace, StateId, StateSpace};
use crate::spin::Energy;

/// Largest exponent `β·ΔH` a stored rate may carry before it underflows.
pub const RATE_EXPONENT_LIMIT: f64 = 700.0;

/// `ln Σ exp(xs)` with the usual max shift; `-inf` for an empty input.
pub fn logsumexp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Metropolis generator at inverse temperature `β`, lumped onto the orbits of a
/// symmetry group (the trivial group gives the unlumped chain).
///
/// Edge weights are kept in log form,
/// `ln w(O,O') = ln(|O|·m(O→O')) − β(max(H_O, H_O') − H_min)`, where `m`
/// counts the flips from a representative of `O` into `O'`; this product is
/// symmetric in exact integer arithmetic, so `w` is symmetric bit-for-bit.
/// The shift `H_min` is the minimum energy over the space.
pub struct GeneratorOperator {
    pub beta: f64,
    /// `β` per energy unit (`β / J`).
    pub(crate) beta_u: f64,
    pub h_min: Energy,
    pub node_of: Vec<u32>,
    pub reps: Vec<StateId>,
    pub sizes: Vec<u32>,
    pub energy: Vec<Energy>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    mult: Vec<u32>,
}

impl GeneratorOperator {
    pub fn new(space: &EnumeratedSpace, beta: f64, group: &SymmetryGroup) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(contract(format!("beta must be finite and non-negative, got {beta}")));
        }
        let coupling = space.model().params.coupling();
        let beta_u = beta / coupling as f64;
        let (node_of, reps, sizes) = group.orbits(space.len());
        let energy: Vec<Energy> = reps.iter().map(|&s| space.energy(s)).collect();
        let h_min = *space.energies().iter().min().unwrap();

        let rows: Vec<Vec<(u32, u32)>> = reps
            .par_iter()
            .map_init(Vec::new, |buf, &s| {
                space.neighbors(s, buf);
                let mut row: Vec<(u32, u32)> = Vec::with_capacity(buf.len());
                let own = node_of[s as usize];
                for &t in buf.iter() {
                    let o = node_of[t as usize];
                    if o == own {
                        continue;
                    }
                    match row.iter_mut().find(|(x, _)| *x == o) {
                        Some(e) => e.1 += 1,
                        None => row.push((o, 1)),
                    }
                }
                row.sort_unstable();
                row
            })
            .collect();

        let max_delta = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(o, _)| (i, o)))
            .map(|(i, o)| energy[o as usize] - energy[i])
            .max()
            .unwrap_or(0);
        let exponent = beta_u * max_delta as f64;
        if exponent > RATE_EXPONENT_LIMIT {
            return Err(Error::RateUnderflow { beta, exponent });
        }

        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut targets = Vec::new();
        let mut mult = Vec::new();
        offsets.push(0);
        for r in rows {
            for (o, m) in r {
                targets.push(o);
                mult.push(m);
            }
            offsets.push(targets.len());
        }
        Ok(Self { beta, beta_u, h_min, node_of, reps, sizes, energy, offsets, targets, mult })
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// `ln(|O|·e^{−β(H_O − H_min)})`, the unnormalized log mass of node `i`.
    #[inline]
    pub fn log_weight(&self, i: usize) -> f64 {
        (self.sizes[i] as f64).ln() - self.beta_u * (self.energy[i] - self.h_min) as f64
    }

    /// Neighbouring nodes of `i` with the flip multiplicity into each.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.targets[r.clone()].iter().zip(&self.mult[r]).map(|(&t, &m)| (t as usize, m))
    }

    /// Lumped jump rate `q(i, k)` for a neighbour multiplicity `m`.
    #[inline]
    pub fn rate(&self, i: usize, k: usize, m: u32) -> f64 {
        let d = (self.energy[k] - self.energy[i]).max(0);
        m as f64 * (-self.beta_u * d as f64).exp()
    }

    /// `ln w(i, k)`, symmetric in `(i, k)`.
    #[inline]
    pub fn log_conductance(&self, i: usize, k: usize, m: u32) -> f64 {
        let top = self.energy[i].max(self.energy[k]);
        ((self.sizes[i] as u64 * m as u64) as f64).ln() - self.beta_u * (top - self.h_min) as f64
    }

    /// Total exit rate of node `i` (flips within the orbit excluded).
    pub fn exit_rate(&self, i: usize) -> f64 {
        self.row(i).map(|(k, m)| self.rate(i, k, m)).sum()
    }

    /// Node membership mask of a state set; errors unless the set is a union of orbits.
    pub fn mask(&self, set: &[StateId]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.len()];
        let mut count = vec![0_u32; self.len()];
        for &s in set {
            let o = *self
                .node_of
                .get(s as usize)
                .ok_or_else(|| contract(format!("state {s} outside the state space")))? as usize;
            if !mask[o] {
                mask[o] = true;
            }
            count[o] += 1;
        }
        for (o, &c) in count.iter().enumerate() {
            if mask[o] && c != self.sizes[o] {
                return Err(contract("set is not a union of symmetry orbits (duplicates or missing images)"));
            }
        }
        Ok(mask)
    }

    pub fn log_partition(&self) -> f64 {
        logsumexp((0..self.len()).map(|i| self.log_weight(i)))
    }

    /// Largest over smallest edge weight, in log form.
    pub fn log_weight_ratio(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..self.len() {
            for (k, m) in self.row(i) {
                let w = self.log_conductance(i, k, m);
                lo = lo.min(w);
                hi = hi.max(w);
            }
        }
        hi - lo
    }
}

/// Gibbs measure in log form over the full state space.
#[derive(Clone, Debug, Serialize)]
pub struct GibbsMeasure {
    pub beta: f64,
    /// `−β(H(σ) − H_min)` per state.
    #[serde(skip)]
    pub log_weights: Vec<f64>,
    /// `ln Σ_σ e^{−β(H(σ) − H_min)}`.
    pub log_z_shifted: f64,
    /// `ln Z_β` with `Z_β = Σ_σ e^{−βH(σ)}`.
    pub log_z: f64,
    pub h_min: Energy,
}

impl GibbsMeasure {
    pub fn log_mu(&self, s: StateId) -> f64 {
        self.log_weights[s as usize] - self.log_z_shifted
    }

    pub fn mu(&self, s: StateId) -> f64 {
        self.log_mu(s).exp()
    }

    pub fn log_mass(&self, set: &[StateId]) -> f64 {
        logsumexp(set.iter().map(|&s| self.log_mu(s)))
    }

    /// `ln Σ μ`, zero up to rounding.
    pub fn log_total(&self) -> f64 {
        logsumexp(self.log_weights.iter().map(|w| w - self.log_z_shifted))
    }
}

/// The Gibbs measure `μ_β ∝ e^{−βH}` via a shifted log-sum-exp.
pub fn gibbs_log_measure(space: &EnumeratedSpace, beta: f64) -> Result<GibbsMeasure> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(contract(format!("beta must be finite and non-negative, got {beta}")));
    }
    let beta_u = beta / space.model().params.coupling() as f64;
    let h_min = *space.energies().iter().min().unwrap();
    let log_weights: Vec<f64> = space.energies().par_iter().map(|&e| -beta_u * (e - h_min) as f64).collect();
    let log_z_shifted = logsumexp(log_weights.iter().copied());
    Ok(GibbsMeasure { beta, log_z: log_z_shifted - beta_u * h_min as f64, log_weights, log_z_shifted, h_min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{LatticeGeometry, ModelParams, PottsModel, Spin};

    fn space() -> EnumeratedSpace {
        let model = PottsModel::new(
            LatticeGeometry::new(3, 3).unwrap(),
            ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2).unwrap(),
        );
        EnumeratedSpace::new(model).unwrap()
    }

    #[test]
    fn uniform_measure_at_infinite_temperature() {
        let g = gibbs_log_measure(&space(), 0.0).unwrap();
        assert!((g.log_z - 9.0 * 3_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn normalizes_and_matches_field_ratio() {
        let sp = space();
        let g = gibbs_log_measure(&sp, 5.0).unwrap();
        assert!(g.log_total().abs() < 1e-12);
        let (two, three) = (sp.uniform(Spin::Two), sp.uniform(Spin::Three));
        let expected = -5.0 * 9.0 * (0.90 - 0.45);
        assert!((g.log_mu(two) - g.log_mu(three) - expected).abs() < 1e-12);
    }

    #[test]
    fn lumped_weights_are_symmetric_and_reversible() {
        let sp = space();
        let group = SymmetryGroup::torus(&sp.model().geometry);
        let op = GeneratorOperator::new(&sp, 3.0, &group).unwrap();
        assert!((op.log_partition() - gibbs_log_measure(&sp, 3.0).unwrap().log_z_shifted).abs() < 1e-12);
        for i in 0..op.len() {
            for (k, m) in op.row(i) {
                let (_, back) = op.row(k).find(|&(x, _)| x == i).expect("symmetric pattern");
                assert_eq!(op.log_conductance(i, k, m), op.log_conductance(k, i, back));
                let lhs = op.log_weight(i) + op.rate(i, k, m).ln();
                let rhs = op.log_weight(k) + op.rate(k, i, back).ln();
                assert!((lhs - rhs).abs() < 1e-12);
                assert!((lhs - op.log_conductance(i, k, m)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn extreme_beta_is_refused() {
        let sp = space();
        let group = SymmetryGroup::trivial(9);
        assert!(matches!(GeneratorOperator::new(&sp, 1e4, &group), Err(Error::RateUnderflow { .. })));
    }
}
