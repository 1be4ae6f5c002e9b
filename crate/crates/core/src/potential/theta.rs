use serde::{Deserialize, Serialize};

use super::linalg::pcg;
use crate::error::{contract, Result};
use crate::landscape::SaddleType;

/// How the droplet count scales: per configuration (`N = |𝒳|`) or per lattice
/// site (`N = K·L`). Rectangles are counted as `2N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaNormalization {
    PerState,
    PerSite,
}

impl KappaNormalization {
    pub fn count(self, rows: usize, cols: usize) -> f64 {
        match self {
            KappaNormalization::PerState => 3_f64.powi((rows * cols) as i32),
            KappaNormalization::PerSite => (rows * cols) as f64,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaVariational {
    pub ell_c: usize,
    pub normalization: f64,
    /// Gate sites with three downhill moves, per rectangle.
    pub type1_sites: usize,
    /// Gate sites with two downhill moves, per rectangle.
    pub type2_sites: usize,
    /// Optimal potential on each kind (`None` when no such site exists).
    pub type1_value: Option<f64>,
    pub type2_value: Option<f64>,
    /// Minimal local energies `(1−h)² + 2h²` and `(1−h)² + h²`.
    pub type1_minimum: Option<f64>,
    pub type2_minimum: Option<f64>,
    /// Minimal Dirichlet energy of one rectangle's gate sites.
    pub per_rectangle: f64,
    /// `2N · per_rectangle`.
    pub theta: f64,
    /// `N · (4/3)(2ℓ_c − 1)`.
    pub closed_form: f64,
    pub iterations: usize,
}

/// Minimizes the reduced Dirichlet energy of the gate.
///
/// Around each `ℓ_c × (ℓ_c−1)` rectangle the gate sites are the protuberance
/// positions along its two long sides; a corner position has one downhill
/// move into each of the two basins, an interior position one into the
/// droplet-growth basin and two into the shrink basin. The basins are pinned
/// to 1 and 0 and the quadratic is solved by conjugate gradients.
pub fn theta_variational(ell_c: usize, normalization: f64) -> Result<ThetaVariational> {
    if ell_c < 2 {
        return Err(contract("ell_c must be at least 2"));
    }
    let kinds: Vec<SaddleType> = (0..2)
        .flat_map(|_| (0..ell_c).map(|p| if p == 0 || p + 1 == ell_c { SaddleType::Type2 } else { SaddleType::Type1 }))
        .collect();
    // Edge multiplicities into the pinned basins: (to h = 1, to h = 0).
    let weights: Vec<(f64, f64)> =
        kinds.iter().map(|k| if *k == SaddleType::Type1 { (1.0, 2.0) } else { (1.0, 1.0) }).collect();
    let n = kinds.len();
    let diag: Vec<f64> = weights.iter().map(|(a, b)| a + b).collect();
    let b: Vec<f64> = weights.iter().map(|(a, _)| *a).collect();
    // Gate sites are pairwise non-adjacent, so the operator is diagonal.
    let apply = |x: &[f64], y: &mut [f64]| {
        for i in 0..n {
            y[i] = diag[i] * x[i];
        }
    };
    let out = pcg(apply, &vec![1.0; n], &b, 1e-15, 100)?;
    let h = out.x;
    let energy = |i: usize| {
        let (up, down) = weights[i];
        up * (1.0 - h[i]).powi(2) + down * h[i].powi(2)
    };
    let per_rectangle: f64 = (0..n).map(energy).sum();
    let pick = |kind: SaddleType| kinds.iter().position(|k| *k == kind);
    let type1 = pick(SaddleType::Type1);
    let type2 = pick(SaddleType::Type2);
    Ok(ThetaVariational {
        ell_c,
        normalization,
        type1_sites: kinds.iter().filter(|k| **k == SaddleType::Type1).count(),
        type2_sites: kinds.iter().filter(|k| **k == SaddleType::Type2).count(),
        type1_value: type1.map(|i| h[i]),
        type2_value: type2.map(|i| h[i]),
        type1_minimum: type1.map(energy),
        type2_minimum: type2.map(energy),
        per_rectangle,
        theta: 2.0 * normalization * per_rectangle,
        closed_form: normalization * 4.0 / 3.0 * (2 * ell_c - 1) as f64,
        iterations: out.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimizer_and_minima() {
        let t = theta_variational(3, 1.0).unwrap();
        assert_eq!((t.type1_sites, t.type2_sites), (2, 4));
        assert!((t.type1_value.unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((t.type2_value.unwrap() - 0.5).abs() < 1e-12);
        assert!((t.type1_minimum.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((t.type2_minimum.unwrap() - 0.5).abs() < 1e-12);
        assert!((t.theta - t.closed_form).abs() < 1e-12);
    }

    #[test]
    fn closed_form_holds_for_every_length() {
        for ell in 2..12 {
            let t = theta_variational(ell, 7.0).unwrap();
            assert!((t.theta / t.closed_form - 1.0).abs() < 1e-12, "{ell}");
        }
        let t = theta_variational(2, 1.0).unwrap();
        assert_eq!(t.type1_sites, 0);
        assert!(t.type1_value.is_none());
    }

    #[test]
    fn rejects_degenerate_length() {
        assert!(theta_variational(1, 1.0).is_err());
    }
}
