use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// Largest site count whose packed index fits in a `u64` (3^40 < 2^64).
pub const MAX_PACKED_SITES: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
#[repr(u8)]
pub enum Spin {
    One = 1,
    Two = 2,
    Three = 3,
}

impl Spin {
    pub const ALL: [Spin; 3] = [Spin::One, Spin::Two, Spin::Three];

    /// 0-based index.
    #[inline]
    pub fn index(self) -> usize {
        self as usize - 1
    }

    #[inline]
    pub fn from_index(i: usize) -> Spin {
        Spin::ALL[i]
    }

    pub fn others(self) -> [Spin; 2] {
        match self {
            Spin::One => [Spin::Two, Spin::Three],
            Spin::Two => [Spin::One, Spin::Three],
            Spin::Three => [Spin::One, Spin::Two],
        }
    }
}

impl From<Spin> for u8 {
    fn from(s: Spin) -> u8 {
        s as u8
    }
}

impl TryFrom<u8> for Spin {
    type Error = Error;
    fn try_from(v: u8) -> Result<Spin> {
        match v {
            1 => Ok(Spin::One),
            2 => Ok(Spin::Two),
            3 => Ok(Spin::Three),
            _ => Err(contract(format!("spin must be 1, 2 or 3, got {v}"))),
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

/// Spins on the sites of a torus, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfiguration {
    spins: Vec<Spin>,
}

impl SpinConfiguration {
    pub fn new(spins: Vec<Spin>) -> Self {
        Self { spins }
    }

    pub fn uniform(sites: usize, s: Spin) -> Self {
        Self { spins: vec![s; sites] }
    }

    /// Decodes `Σ (spin(x) - 1)·3^x`.
    pub fn from_packed(mut index: u64, sites: usize) -> Result<Self> {
        if sites > MAX_PACKED_SITES {
            return Err(contract(format!("packed index supports at most {MAX_PACKED_SITES} sites")));
        }
        if index >= 3_u64.pow(sites as u32) {
            return Err(contract(format!("packed index {index} out of range for {sites} sites")));
        }
        let mut spins = Vec::with_capacity(sites);
        for _ in 0..sites {
            spins.push(Spin::from_index((index % 3) as usize));
            index /= 3;
        }
        Ok(Self { spins })
    }

    /// `None` once the lattice has more than 40 sites.
    pub fn packed(&self) -> Option<u64> {
        if self.spins.len() > MAX_PACKED_SITES {
            return None;
        }
        Some(self.spins.iter().rev().fold(0_u64, |acc, s| acc * 3 + s.index() as u64))
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    #[inline]
    pub fn get(&self, site: usize) -> Spin {
        self.spins[site]
    }

    #[inline]
    pub fn set(&mut self, site: usize, s: Spin) {
        self.spins[site] = s;
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn with(&self, site: usize, s: Spin) -> Self {
        let mut c = self.clone();
        c.set(site, s);
        c
    }

    pub fn count(&self, s: Spin) -> usize {
        self.spins.iter().filter(|&&x| x == s).count()
    }

    /// `Some(s)` if every site carries `s`.
    pub fn monochromatic(&self) -> Option<Spin> {
        let first = *self.spins.first()?;
        self.spins.iter().all(|&x| x == first).then_some(first)
    }

    /// Replaces every `i` spin by `j` (the projection `P_ij`).
    pub fn project(&self, i: Spin, j: Spin) -> Result<Self> {
        if i == j {
            return Err(contract("projection needs two distinct spins"));
        }
        Ok(Self { spins: self.spins.iter().map(|&s| if s == i { j } else { s }).collect() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_round_trip_and_digit_order() {
        let c = SpinConfiguration::new(vec![Spin::Two, Spin::One, Spin::Three]);
        assert_eq!(c.packed(), Some(1 + 2 * 9));
        for idx in [0, 1, 17, 19682] {
            let c = SpinConfiguration::from_packed(idx, 9).unwrap();
            assert_eq!(c.packed(), Some(idx));
        }
        assert!(SpinConfiguration::from_packed(19683, 9).is_err());
    }

    #[test]
    fn projection_rules() {
        let c = SpinConfiguration::uniform(9, Spin::Two);
        assert_eq!(c.project(Spin::Two, Spin::Three).unwrap(), SpinConfiguration::uniform(9, Spin::Three));
        assert!(c.project(Spin::One, Spin::One).is_err());
    }

    #[test]
    fn large_lattices_have_no_packed_index() {
        assert_eq!(SpinConfiguration::uniform(64, Spin::One).packed(), None);
    }
}
