use serde::{Deserialize, Serialize};

use super::{Energy, LatticeGeometry, ModelParams, PottsModel, Spin};
use crate::error::{contract, Error, Result};

/// Ising barrier data for a field gap `h` (in energy units).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsingQuantities {
    pub h: Energy,
    /// `⌈2/h⌉`.
    pub ell_c: i64,
    /// `f(h) = 4ℓ_c - h(ℓ_c(ℓ_c-1)+1)`.
    pub f_h: Energy,
}

/// Exact `ℓ_c` and `f(h)` for `h > 0` given in units of `J / coupling`.
pub fn ising_quantities(h: Energy, coupling: Energy) -> Result<IsingQuantities> {
    if h <= 0 {
        return Err(contract(format!("field gap must be positive, got {h}")));
    }
    let ell_c = (2 * coupling + h - 1) / h;
    let f_h = 4 * ell_c * coupling - h * (ell_c * (ell_c - 1) + 1);
    Ok(IsingQuantities { h, ell_c, f_h })
}

/// The three pairs `(i, j)` with `i < j`, in report order.
pub const PAIRS: [(Spin, Spin); 3] =
    [(Spin::One, Spin::Two), (Spin::One, Spin::Three), (Spin::Two, Spin::Three)];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStar {
    pub from: Spin,
    pub to: Spin,
    pub ell_c: i64,
    pub gamma_star: Energy,
    pub phi_star: Energy,
}

/// Prefactor candidates `3 / (4(2ℓ_c - 1)) / N` under both readings of `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    /// `N = |X| = 3^(K·L)`.
    pub per_state: f64,
    /// `N = K·L`.
    pub per_site: f64,
}

impl Kappa {
    fn new(ell_c: i64, geometry: &LatticeGeometry) -> Self {
        let base = 3.0 / (4.0 * (2 * ell_c - 1) as f64);
        let sites = geometry.sites() as f64;
        Self { per_state: base / 3_f64.powf(sites), per_site: base / sites }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarTable {
    /// Order of [`PAIRS`].
    pub pairs: Vec<PairStar>,
    pub mono_energies: [Energy; 3],
    pub kappa1: Kappa,
    pub kappa2: Kappa,
    /// `Γ*_13 < Γ*_23` and `Γ*_13 < Γ*_12`.
    pub gamma13_smallest: bool,
    /// `Φ*_12 > Φ*_13 > H(1) > Φ*_23 > H(2) > H(3)`.
    pub height_chain: bool,
    /// `Γ*_12 < Γ*_23`.
    pub gamma12_below_gamma23: bool,
    /// `2h_2 > h_1 + h_3`.
    pub ekinf_condition: bool,
}

impl StarTable {
    pub fn pair(&self, i: Spin, j: Spin) -> &PairStar {
        self.pairs
            .iter()
            .find(|p| (p.from, p.to) == (i.min(j), i.max(j)))
            .expect("all three pairs are present")
    }
}

pub fn star_table(model: &PottsModel) -> StarTable {
    let p = &model.params;
    let mono = Spin::ALL.map(|s| model.uniform_energy(s));
    let pairs: Vec<PairStar> = PAIRS
        .iter()
        .map(|&(i, j)| {
            let q = ising_quantities(p.gap(i, j), p.coupling()).expect("ordered fields");
            PairStar { from: i, to: j, ell_c: q.ell_c, gamma_star: q.f_h, phi_star: q.f_h + mono[i.index()] }
        })
        .collect();
    let (g12, g13, g23) = (pairs[0].gamma_star, pairs[1].gamma_star, pairs[2].gamma_star);
    let (f12, f13, f23) = (pairs[0].phi_star, pairs[1].phi_star, pairs[2].phi_star);
    let h = p.fields();
    StarTable {
        kappa1: Kappa::new(pairs[1].ell_c, &model.geometry),
        kappa2: Kappa::new(pairs[2].ell_c, &model.geometry),
        gamma13_smallest: g13 < g23 && g13 < g12,
        height_chain: f12 > f13 && f13 > mono[0] && mono[0] > f23 && f23 > mono[1] && mono[1] > mono[2],
        gamma12_below_gamma23: g12 < g23,
        ekinf_condition: 2 * h[1] > h[0] + h[2],
        mono_energies: mono,
        pairs,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub assumption_a: bool,
    /// `3 / (h3 - h2)`.
    pub bound_23: f64,
    /// `3 / (h2 - h1)`.
    pub bound_12: f64,
    pub assumption_b: bool,
    pub tie_bound: i64,
    /// First integer combination `a(h2-h1) + b(h3-h2)` in canonical order
    /// (increasing `|a|+|b|`, then decreasing `a`, with `a > 0` or `a = 0, b > 0`).
    pub b_violation: Option<(i64, i64)>,
    /// Number of violating pairs in that half-plane.
    pub b_violation_count: u64,
}

/// Whether `a(h2-h1) + b(h3-h2)` is an integer; exact in integer units.
pub fn is_tie(params: &ModelParams, a: i64, b: i64) -> bool {
    let h = params.fields();
    (a * (h[1] - h[0]) + b * (h[2] - h[1])) % params.coupling() == 0
}

pub fn check_assumptions(model: &PottsModel, tie_bound: i64) -> Result<AssumptionReport> {
    if tie_bound < 1 {
        return Err(contract("tie bound must be at least 1"));
    }
    let p = &model.params;
    let g = &model.geometry;
    let h = p.fields();
    let j = p.coupling();
    let fits = |gap: Energy| (g.rows() as i64) * gap > 3 * j && (g.cols() as i64) * gap > 3 * j;
    let mut first = None;
    let mut count = 0;
    for l1 in 1..=2 * tie_bound {
        let mut a = l1.min(tie_bound);
        while a >= 0 && l1 - a <= tie_bound {
            let rest = l1 - a;
            let bs: &[i64] = if a == 0 { &[rest] } else if rest == 0 { &[0] } else { &[rest, -rest] };
            for &b in bs {
                if is_tie(p, a, b) {
                    count += 1;
                    first.get_or_insert((a, b));
                }
            }
            a -= 1;
        }
    }
    Ok(AssumptionReport {
        assumption_a: fits(h[2] - h[1]) && fits(h[1] - h[0]),
        bound_23: 3.0 / p.to_f64(h[2] - h[1]),
        bound_12: 3.0 / p.to_f64(h[1] - h[0]),
        assumption_b: first.is_none(),
        tie_bound,
        b_violation: first,
        b_violation_count: count,
    })
}

/// The relaxation of Assumption A used for a single pair: `K, L > 3/(h_j - h_i)`.
pub fn check_pair_assumption(model: &PottsModel, i: Spin, j: Spin) -> Result<()> {
    let p = &model.params;
    let gap = p.gap(i, j);
    if gap <= 0 {
        return Err(contract(format!("pair ({i},{j}) needs h_{j} > h_{i}")));
    }
    let bound = 3.0 / p.to_f64(gap);
    let g = &model.geometry;
    for (name, n) in [("K", g.rows()), ("L", g.cols())] {
        if (n as i64) * gap <= 3 * p.coupling() {
            return Err(Error::AssumptionA(format!(
                "{name} = {n} must exceed 3/(h_{j} - h_{i}) = {bound:.4}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(k: usize, h: [&str; 3]) -> PottsModel {
        PottsModel::new(LatticeGeometry::new(k, k).unwrap(), ModelParams::from_decimals(h, 2).unwrap())
    }

    #[test]
    fn ising_examples() {
        let q = ising_quantities(100, 100).unwrap();
        assert_eq!((q.ell_c, q.f_h), (2, 500));
        let q = ising_quantities(45, 100).unwrap();
        assert_eq!((q.ell_c, q.f_h), (5, 1055));
        let q = ising_quantities(85, 100).unwrap();
        assert_eq!((q.ell_c, q.f_h), (3, 605));
        assert!(ising_quantities(0, 100).is_err());
    }

    #[test]
    fn exact_two_over_h_uses_the_ceiling() {
        // h = 0.5: 2/h = 4 exactly.
        assert_eq!(ising_quantities(50, 100).unwrap().ell_c, 4);
        assert_eq!(ising_quantities(49, 100).unwrap().ell_c, 5);
    }

    #[test]
    fn star_ordering_default_instance() {
        let t = star_table(&model(8, ["0.05", "0.45", "0.90"]));
        assert_eq!(t.pair(Spin::One, Spin::Three).gamma_star, 605);
        assert_eq!(t.pair(Spin::Two, Spin::Three).gamma_star, 1055);
        assert!(t.gamma13_smallest);
        assert!(!t.ekinf_condition);
        assert_eq!(t.ekinf_condition, t.gamma12_below_gamma23);
        assert_eq!(t.mono_energies, [-128 * 100 - 64 * 5, -128 * 100 - 64 * 45, -128 * 100 - 64 * 90]);
    }

    #[test]
    fn ekinf_condition_flips_with_h2() {
        let t = star_table(&model(8, ["0.05", "0.55", "0.90"]));
        assert!(t.ekinf_condition);
        assert!(t.gamma12_below_gamma23);
    }

    #[test]
    fn kappa_normalizations() {
        let t = star_table(&model(3, ["0.05", "0.45", "0.90"]));
        // ℓ_c^{13} = 3: 3/(4·5) = 0.15
        assert!((t.kappa1.per_site - 0.15 / 9.0).abs() < 1e-15);
        assert!((t.kappa1.per_state * 19683.0 - 0.15).abs() < 1e-15);
    }

    #[test]
    fn assumption_examples() {
        let r = check_assumptions(&model(8, ["0.05", "0.45", "0.90"]), 64).unwrap();
        assert!(r.assumption_a);
        assert!((r.bound_23 - 3.0 / 0.45).abs() < 1e-12);
        assert!((r.bound_12 - 7.5).abs() < 1e-12);
        let p = ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2).unwrap();
        assert!(is_tie(&p, 5, 0));
        assert!(!r.assumption_b);
        let r3 = check_assumptions(&model(3, ["0.05", "0.45", "0.90"]), 9).unwrap();
        assert!(!r3.assumption_a);
    }

    #[test]
    fn pair_relaxation_names_the_bound() {
        let m = model(4, ["0.01", "0.02", "0.99"]);
        assert!(check_pair_assumption(&m, Spin::One, Spin::Three).is_ok());
        let err = check_pair_assumption(&m, Spin::One, Spin::Two).unwrap_err();
        assert!(err.to_string().contains("K = 4"));
    }
}
