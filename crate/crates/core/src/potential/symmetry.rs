use std::collections::HashSet;

use crate::landscape::StateId;
use crate::spin::LatticeGeometry;

/// A group of lattice automorphisms acting on packed configurations.
///
/// Metropolis rates depend only on energies and adjacency, both invariant
/// under torus translations, reflections and (on square tori) the transpose,
/// so the chain lumps exactly onto orbits whenever every set of interest is
/// a union of orbits.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    sites: usize,
    /// `images[g][x] = 3^{g(x)}`.
    images: Vec<Vec<u64>>,
}

impl SymmetryGroup {
    pub fn trivial(sites: usize) -> Self {
        Self { sites, images: vec![(0..sites).map(|x| 3_u64.pow(x as u32)).collect()] }
    }

    /// Translations × axis reflections, plus the transpose when `K = L`.
    pub fn torus(geometry: &LatticeGeometry) -> Self {
        let (k, l) = (geometry.rows(), geometry.cols());
        let mut seen = HashSet::new();
        let mut images = Vec::new();
        let transposes: &[bool] = if k == l { &[false, true] } else { &[false] };
        for &tr in transposes {
            for fr in [false, true] {
                for fc in [false, true] {
                    for dr in 0..k {
                        for dc in 0..l {
                            let perm: Vec<usize> = (0..k * l)
                                .map(|x| {
                                    let (r, c) = geometry.coords(x);
                                    let r2 = (if fr { k - r } else { r } + dr) % k;
                                    let c2 = (if fc { l - c } else { c } + dc) % l;
                                    if tr {
                                        geometry.site(c2, r2)
                                    } else {
                                        geometry.site(r2, c2)
                                    }
                                })
                                .collect();
                            if seen.insert(perm.clone()) {
                                images.push(perm.iter().map(|&y| 3_u64.pow(y as u32)).collect());
                            }
                        }
                    }
                }
            }
        }
        Self { sites: k * l, images }
    }

    pub fn order(&self) -> usize {
        self.images.len()
    }

    /// Image of `s` under the `g`-th element.
    #[inline]
    pub fn apply(&self, g: usize, mut s: StateId) -> StateId {
        let img = &self.images[g];
        let mut out = 0;
        for &p in img.iter().take(self.sites) {
            out += (s % 3) * p;
            s /= 3;
        }
        out
    }

    /// The subgroup mapping each of `sets` onto itself.
    pub fn stabilizer(&self, sets: &[&[StateId]]) -> Self {
        let hashed: Vec<HashSet<StateId>> = sets.iter().map(|s| s.iter().copied().collect()).collect();
        let images = (0..self.order())
            .filter(|&g| {
                hashed.iter().zip(sets).all(|(h, set)| set.iter().all(|&s| h.contains(&self.apply(g, s))))
            })
            .map(|g| self.images[g].clone())
            .collect();
        Self { sites: self.sites, images }
    }

    /// Orbit labels for states `0..n`; orbit ids follow their smallest member.
    pub fn orbits(&self, n: usize) -> (Vec<u32>, Vec<StateId>, Vec<u32>) {
        let mut node_of = vec![u32::MAX; n];
        let mut reps = Vec::new();
        let mut sizes = Vec::new();
        for s in 0..n as StateId {
            if node_of[s as usize] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            let mut size = 0;
            for g in 0..self.order() {
                let t = self.apply(g, s) as usize;
                if node_of[t] == u32::MAX {
                    node_of[t] = id;
                    size += 1;
                }
            }
            reps.push(s);
            sizes.push(size);
        }
        (node_of, reps, sizes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_torus_group_has_order_eight_times_sites() {
        let g = SymmetryGroup::torus(&LatticeGeometry::new(3, 3).unwrap());
        assert_eq!(g.order(), 72);
        let g = SymmetryGroup::torus(&LatticeGeometry::new(3, 4).unwrap());
        assert_eq!(g.order(), 48);
    }

    #[test]
    fn orbits_partition_the_space() {
        let g = SymmetryGroup::torus(&LatticeGeometry::new(3, 3).unwrap());
        let (node_of, reps, sizes) = g.orbits(19683);
        assert!(node_of.iter().all(|&o| (o as usize) < reps.len()));
        assert_eq!(sizes.iter().map(|&s| s as usize).sum::<usize>(), 19683);
        // Uniform states are fixed points.
        assert_eq!(sizes[node_of[0] as usize], 1);
        for &s in &sizes {
            assert_eq!(72 % s, 0);
        }
    }

    #[test]
    fn stabilizer_of_a_single_spin_flip() {
        let g = SymmetryGroup::torus(&LatticeGeometry::new(3, 3).unwrap());
        // One site flipped in a uniform background: the stabilizer fixes that site.
        let stab = g.stabilizer(&[&[1]]);
        assert_eq!(stab.order(), 8);
    }
}
