use serde::{Deserialize, Serialize};

use super::{Energy, PottsModel, Spin, SpinConfiguration};
use crate::error::{contract, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Top,
    Bottom,
    Left,
    Right,
}

/// A single cell attached to one side of the rectangle; `offset` counts
/// from the top-left end of that side, `None` means mid-side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Protuberance {
    pub side: Side,
    pub offset: Option<usize>,
}

/// `width x height` rectangle of `inner` in a sea of `outer`, anchored at its
/// top-left cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DropletSpec {
    pub inner: Spin,
    pub outer: Spin,
    pub width: usize,
    pub height: usize,
    pub anchor: (usize, usize),
    pub protuberance: Option<Protuberance>,
}

impl DropletSpec {
    pub fn rectangle(inner: Spin, outer: Spin, width: usize, height: usize) -> Self {
        Self { inner, outer, width, height, anchor: (0, 0), protuberance: None }
    }

    pub fn with_protuberance(mut self, side: Side, offset: Option<usize>) -> Self {
        self.protuberance = Some(Protuberance { side, offset });
        self
    }

    pub fn at(mut self, row: usize, col: usize) -> Self {
        self.anchor = (row, col);
        self
    }

    /// `H(outer) + 2J(ℓ+m) - (h_i-h_j)ℓm`, plus `2J - (h_i-h_j)` for a protuberance.
    pub fn closed_form_energy(&self, model: &PottsModel) -> Energy {
        let p = &model.params;
        let gain = p.field(self.inner) - p.field(self.outer);
        let (w, h) = (self.width as i64, self.height as i64);
        let mut e = model.uniform_energy(self.outer);
        if w * h > 0 {
            e += 2 * p.coupling() * (w + h) - gain * w * h;
            if self.protuberance.is_some() {
                e += 2 * p.coupling() - gain;
            }
        }
        e
    }
}

/// Builds the configuration described by `spec`.
pub fn make_droplet(spec: &DropletSpec, model: &PottsModel) -> Result<SpinConfiguration> {
    let g = &model.geometry;
    let (w, h) = (spec.width, spec.height);
    if spec.inner == spec.outer {
        return Err(contract("droplet needs distinct inner and outer spins"));
    }
    if (w == 0) != (h == 0) {
        return Err(contract(format!("degenerate {w}x{h} droplet")));
    }
    if w > g.cols().saturating_sub(2) || h > g.rows().saturating_sub(2) {
        return Err(contract(format!(
            "{w}x{h} droplet does not fit a {}x{} torus (needs width <= L-2, height <= K-2)",
            g.rows(),
            g.cols()
        )));
    }
    let mut cfg = SpinConfiguration::uniform(g.sites(), spec.outer);
    if w == 0 {
        if spec.protuberance.is_some() {
            return Err(contract("protuberance needs a non-empty rectangle"));
        }
        return Ok(cfg);
    }
    let (r0, c0) = spec.anchor;
    for r in 0..h {
        for c in 0..w {
            cfg.set(g.site(r0 + r, c0 + c), spec.inner);
        }
    }
    if let Some(p) = spec.protuberance {
        let len = match p.side {
            Side::Top | Side::Bottom => w,
            Side::Left | Side::Right => h,
        };
        let off = p.offset.unwrap_or(len / 2);
        if off >= len {
            return Err(contract(format!("protuberance offset {off} beyond side of length {len}")));
        }
        let (kk, ll) = (g.rows(), g.cols());
        let cell = match p.side {
            Side::Top => g.site(r0 + kk - 1, c0 + off),
            Side::Bottom => g.site(r0 + h, c0 + off),
            Side::Left => g.site(r0 + off, c0 + ll - 1),
            Side::Right => g.site(r0 + off, c0 + w),
        };
        cfg.set(cell, spec.inner);
    }
    Ok(cfg)
}

/// Every single-cell protuberance on the rectangle of `rect` (any side, any
/// offset), e.g. the family reached from a droplet by one growth step.
pub fn protuberance_family(rect: &DropletSpec, model: &PottsModel) -> Result<Vec<SpinConfiguration>> {
    let mut out = Vec::new();
    for side in [Side::Top, Side::Bottom, Side::Left, Side::Right] {
        let len = match side {
            Side::Top | Side::Bottom => rect.width,
            Side::Left | Side::Right => rect.height,
        };
        for off in 0..len {
            out.push(make_droplet(&rect.with_protuberance(side, Some(off)), model)?);
        }
    }
    Ok(out)
}

/// All placements of the critical droplet of `inner` in `outer`: an
/// `ℓ x (ℓ-1)` rectangle in either orientation, anywhere on the torus, with
/// one protuberance on a side of length `ℓ`. `None` if it does not fit.
pub fn critical_droplets(model: &PottsModel, inner: Spin, outer: Spin, ell_c: usize) -> Option<Vec<SpinConfiguration>> {
    let g = &model.geometry;
    let mut out = Vec::new();
    for (w, h, sides) in [
        (ell_c, ell_c - 1, [Side::Top, Side::Bottom]),
        (ell_c - 1, ell_c, [Side::Left, Side::Right]),
    ] {
        for r in 0..g.rows() {
            for c in 0..g.cols() {
                for side in sides {
                    for off in 0..ell_c {
                        let spec = DropletSpec::rectangle(inner, outer, w, h).at(r, c).with_protuberance(side, Some(off));
                        out.push(make_droplet(&spec, model).ok()?);
                    }
                }
            }
        }
    }
    out.sort_by_key(|c| c.packed());
    out.dedup();
    Some(out)
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
    fn empty_droplet_is_the_sea() {
        let m = model(5, 5);
        let c = make_droplet(&DropletSpec::rectangle(Spin::Three, Spin::One, 0, 0), &m).unwrap();
        assert_eq!(c, SpinConfiguration::uniform(25, Spin::One));
    }

    #[test]
    fn single_cell_droplet() {
        let m = model(5, 5);
        let spec = DropletSpec::rectangle(Spin::Three, Spin::One, 1, 1).at(2, 2);
        let c = make_droplet(&spec, &m).unwrap();
        assert_eq!(m.energy(&c).unwrap(), m.uniform_energy(Spin::One) + 400 - 85);
    }

    #[test]
    fn closed_form_matches_all_sides_and_offsets() {
        let m = model(7, 8);
        for (w, h) in [(1, 1), (2, 3), (5, 4), (6, 5)] {
            for side in [Side::Top, Side::Bottom, Side::Left, Side::Right] {
                let len = if matches!(side, Side::Top | Side::Bottom) { w } else { h };
                for off in 0..len {
                    let spec = DropletSpec::rectangle(Spin::Two, Spin::Three, w, h)
                        .at(3, 5)
                        .with_protuberance(side, Some(off));
                    let c = make_droplet(&spec, &m).unwrap();
                    assert_eq!(c.count(Spin::Two), w * h + 1);
                    assert_eq!(m.energy(&c).unwrap(), spec.closed_form_energy(&m));
                }
            }
        }
    }

    #[test]
    fn oversized_droplets_are_rejected() {
        let m = model(5, 5);
        assert!(make_droplet(&DropletSpec::rectangle(Spin::Three, Spin::One, 4, 2), &m).is_err());
        let bad = DropletSpec::rectangle(Spin::Three, Spin::One, 2, 2).with_protuberance(Side::Top, Some(2));
        assert!(make_droplet(&bad, &m).is_err());
    }
}
