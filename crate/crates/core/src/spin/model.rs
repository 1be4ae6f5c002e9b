use serde::{Deserialize, Serialize};

use super::{Energy, LatticeGeometry, ModelParams, Spin, SpinConfiguration};
use crate::error::{Error, Result};

/// Torus geometry plus fields: everything needed to evaluate `H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PottsModel {
    pub geometry: LatticeGeometry,
    pub params: ModelParams,
}

impl PottsModel {
    pub fn new(geometry: LatticeGeometry, params: ModelParams) -> Self {
        Self { geometry, params }
    }

    pub fn sites(&self) -> usize {
        self.geometry.sites()
    }

    fn check(&self, cfg: &SpinConfiguration) -> Result<()> {
        if cfg.len() != self.sites() {
            return Err(Error::DimensionMismatch { expected: self.sites(), actual: cfg.len() });
        }
        Ok(())
    }

    /// `H(σ) = -J Σ_edges 1{σ(x)=σ(y)} - Σ_x h_{σ(x)}`.
    pub fn energy(&self, cfg: &SpinConfiguration) -> Result<Energy> {
        self.check(cfg)?;
        Ok(self.energy_unchecked(cfg.spins()))
    }

    pub(crate) fn energy_unchecked(&self, spins: &[Spin]) -> Energy {
        let j = self.params.coupling();
        let mut bonds = 0_i64;
        let mut field = 0_i64;
        for (x, &s) in spins.iter().enumerate() {
            let n = self.geometry.neighbors(x);
            bonds += (spins[n[1]] == s) as i64 + (spins[n[3]] == s) as i64;
            field += self.params.field(s);
        }
        -j * bonds - field
    }

    /// `H` of the monochromatic state.
    pub fn uniform_energy(&self, s: Spin) -> Energy {
        let n = self.sites() as i64;
        -2 * n * self.params.coupling() - n * self.params.field(s)
    }

    /// `H(σ with site set to s) - H(σ)`, from the four neighbours only.
    pub fn delta_energy(&self, cfg: &SpinConfiguration, site: usize, s: Spin) -> Result<Energy> {
        self.check(cfg)?;
        if site >= self.sites() {
            return Err(crate::error::contract(format!("site {site} out of range")));
        }
        Ok(self.delta_unchecked(cfg.spins(), site, s))
    }

    #[inline]
    pub(crate) fn delta_unchecked(&self, spins: &[Spin], site: usize, s: Spin) -> Energy {
        let old = spins[site];
        if old == s {
            return 0;
        }
        let (n_old, n_new) = self.equal_neighbors(spins, site, old, s);
        self.params.coupling() * (n_old as i64 - n_new as i64) + self.params.field(old)
            - self.params.field(s)
    }

    /// Numbers of neighbours of `site` carrying `a` and `b`.
    #[inline]
    pub(crate) fn equal_neighbors(&self, spins: &[Spin], site: usize, a: Spin, b: Spin) -> (u8, u8) {
        let mut na = 0;
        let mut nb = 0;
        for &y in self.geometry.neighbors(site) {
            na += (spins[y] == a) as u8;
            nb += (spins[y] == b) as u8;
        }
        (na, nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(k: usize, l: usize) -> PottsModel {
        PottsModel::new(
            LatticeGeometry::new(k, l).unwrap(),
            ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2).unwrap(),
        )
    }

    #[test]
    fn uniform_energies() {
        let m = model(3, 3);
        let three = SpinConfiguration::uniform(9, Spin::Three);
        assert_eq!(m.energy(&three).unwrap(), -2610);
        let one = SpinConfiguration::uniform(9, Spin::One);
        assert_eq!(m.energy(&one).unwrap(), -1845);
        assert_eq!(m.uniform_energy(Spin::Two), -1800 - 405);
    }

    #[test]
    fn square_droplet_costs_its_perimeter() {
        let m = model(5, 5);
        let mut c = SpinConfiguration::uniform(25, Spin::One);
        for (r, col) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            c.set(m.geometry.site(r, col), Spin::Three);
        }
        assert_eq!(m.energy(&c).unwrap() - m.uniform_energy(Spin::One), 460);
    }

    #[test]
    fn single_flip_deltas() {
        let m = model(3, 3);
        let one = SpinConfiguration::uniform(9, Spin::One);
        assert_eq!(m.delta_energy(&one, 4, Spin::Three).unwrap(), 315);
        let flipped = one.with(4, Spin::Three);
        assert_eq!(m.delta_energy(&flipped, 4, Spin::One).unwrap(), -315);
        assert_eq!(m.delta_energy(&one, 4, Spin::One).unwrap(), 0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = model(3, 3);
        let c = SpinConfiguration::uniform(8, Spin::One);
        assert!(matches!(m.energy(&c), Err(Error::DimensionMismatch { expected: 9, actual: 8 })));
    }

    #[test]
    fn projection_lowers_energy_of_isolated_defect() {
        let m = model(4, 4);
        let c = SpinConfiguration::uniform(16, Spin::Two).with(5, Spin::One);
        let p = c.project(Spin::One, Spin::Two).unwrap();
        assert_eq!(p, SpinConfiguration::uniform(16, Spin::Two));
        // Four broken bonds plus the lost field advantage of spin 2.
        let dh = m.energy(&p).unwrap() - m.energy(&c).unwrap();
        assert_eq!(dh, -(400 + 40));
    }
}
