use serde::Serialize;

use super::operator::gibbs_log_measure;
use super::solver::{capacity, equilibrium_potential, mean_hitting_exact, LogScalar, MeanHitting, SolverOptions};
use super::theta::KappaNormalization;
use super::trace::{trace_rates, RateScaling, TraceRates};
use crate::error::Result;
use crate::landscape::{communication_height, EnumeratedSpace, StateId, StateSpace};
use crate::spin::{star_table, Energy, Spin};

/// Default inverse-temperature grid; `e^{βΓ}` stays well inside double range on 3×3.
pub const DEFAULT_BETA_GRID: [f64; 6] = [2.0, 3.0, 4.0, 5.0, 6.0, 8.0];

/// Exact barriers of the enumerated landscape, in energy units.
#[derive(Clone, Debug, Serialize)]
pub struct BruteForceBarriers {
    pub gamma_1_3: Energy,
    pub gamma_2_3: Energy,
    pub gamma_1_23: Energy,
    pub phi_1_3: Energy,
    pub phi_2_3: Energy,
}

impl BruteForceBarriers {
    pub fn compute(space: &EnumeratedSpace) -> Result<Self> {
        let [one, two, three] = Spin::ALL.map(|s| space.uniform(s));
        let phi = |a: &[StateId], b: &[StateId]| communication_height(space, a, b).map(|r| r.value);
        let phi_1_3 = phi(&[one], &[three])?;
        let phi_2_3 = phi(&[two], &[three])?;
        let phi_1_23 = phi(&[one], &[two, three])?;
        Ok(Self {
            gamma_1_3: phi_1_3 - space.energy(one),
            gamma_2_3: phi_2_3 - space.energy(two),
            gamma_1_23: phi_1_23 - space.energy(one),
            phi_1_3,
            phi_2_3,
        })
    }
}

/// Per-β row of the asymptotic report.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticRow {
    pub beta: f64,
    pub mean_2_3: MeanHitting,
    /// `E_2[τ_3]·e^{−βΓ(2,3)}`.
    pub prefactor: f64,
    pub mean_1_3: MeanHitting,
    /// `e^{−βΓ(1,3)}·E_1[τ_3]`.
    pub ekinf_ratio: f64,
    /// `h_{2,3}(1) = P_1[τ_2 < τ_3]`.
    pub p1_hit_2_before_3: f64,
    /// `h_{1,3}(2) = P_2[τ_1 < τ_3]`.
    pub p2_hit_1_before_3: f64,
    pub cap_1_3: LogScalar,
    /// `e^{βΦ(1,3)}·Z_β·cap(1,3)`.
    pub cap_1_3_bound: f64,
    /// `−(1/β)·ln(Z_β·cap(1,3))`.
    pub cap_1_3_slope: f64,
    /// `(1/β)·ln E_2[τ_3]`.
    pub ldp_slope: f64,
    /// `μ_β(𝒳 ∖ {1,2,3})`.
    pub mass_outside: f64,
    pub trace: TraceRates,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticTrends {
    pub ekinf_condition: bool,
    pub ekinf_strictly_increasing: bool,
    /// Largest over smallest EKinf ratio on the grid.
    pub ekinf_band: f64,
    /// `|r_k/r_{k−1} − 1|` for the last two prefactors.
    pub prefactor_last_step: f64,
    pub mass_outside_decreasing: bool,
    pub p1_hit_2_before_3_decreasing: bool,
    pub theta2_r32_decreasing: bool,
    /// Richardson extrapolation of the LDP slope in `1/β` from the last two points.
    pub ldp_extrapolated: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub barriers: BruteForceBarriers,
    pub gamma_1_3: f64,
    pub gamma_2_3: f64,
    pub scaling: RateScaling,
    pub normalization: KappaNormalization,
    pub rows: Vec<AsymptoticRow>,
    pub trends: AsymptoticTrends,
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// Exact-solve tables over a β grid, with brute-force barriers substituted for
/// the closed-form ones (Assumption A cannot hold on an enumerable torus).
pub fn asymptotic_report(
    space: &EnumeratedSpace,
    betas: &[f64],
    normalization: KappaNormalization,
    opts: &SolverOptions,
) -> Result<AsymptoticReport> {
    let model = space.model();
    let params = &model.params;
    let barriers = BruteForceBarriers::compute(space)?;
    let stars = star_table(model);
    let n = normalization.count(model.geometry.rows(), model.geometry.cols());
    let kappa = |ell_c: usize| 3.0 / (4.0 * (2 * ell_c - 1) as f64) / n;
    let scaling = RateScaling {
        gamma13: params.to_f64(barriers.gamma_1_3),
        gamma23: params.to_f64(barriers.gamma_2_3),
        kappa1: kappa(stars.pair(Spin::One, Spin::Three).ell_c as usize),
        kappa2: kappa(stars.pair(Spin::Two, Spin::Three).ell_c as usize),
    };
    let [one, two, three] = Spin::ALL.map(|s| space.uniform(s));
    let phi13 = params.to_f64(barriers.phi_1_3);

    let mut rows = Vec::with_capacity(betas.len());
    for &beta in betas {
        let mean_2_3 = mean_hitting_exact(space, two, &[three], beta, opts)?;
        let mean_1_3 = mean_hitting_exact(space, one, &[three], beta, opts)?;
        let p23 = equilibrium_potential(space, &[two], &[three], beta, opts)?;
        let p13 = equilibrium_potential(space, &[one], &[three], beta, opts)?;
        let cap = capacity(space, &[one], &[three], beta, opts)?;
        let gibbs = gibbs_log_measure(space, beta)?;
        let inside = gibbs.log_mass(&[one, two, three]);
        let log_zcap = cap.value.ln() + gibbs.log_z;
        rows.push(AsymptoticRow {
            beta,
            prefactor: mean_2_3.direct * (-beta * scaling.gamma23).exp(),
            ekinf_ratio: mean_1_3.direct * (-beta * scaling.gamma13).exp(),
            ldp_slope: mean_2_3.direct.ln() / beta,
            mean_2_3,
            mean_1_3,
            p1_hit_2_before_3: p23.at(one),
            p2_hit_1_before_3: p13.at(two),
            cap_1_3: cap.value,
            cap_1_3_bound: (beta * phi13 + log_zcap).exp(),
            cap_1_3_slope: -log_zcap / beta,
            mass_outside: -inside.exp_m1(),
            trace: trace_rates(space, beta, &scaling, opts)?,
        });
    }

    let ekinf: Vec<f64> = rows.iter().map(|r| r.ekinf_ratio).collect();
    let pref: Vec<f64> = rows.iter().map(|r| r.prefactor).collect();
    let ldp_extrapolated = match rows.as_slice() {
        [.., a, b] => (b.beta * b.ldp_slope - a.beta * a.ldp_slope) / (b.beta - a.beta),
        [a] => a.ldp_slope,
        [] => f64::NAN,
    };
    let trends = AsymptoticTrends {
        ekinf_condition: stars.ekinf_condition,
        ekinf_strictly_increasing: ekinf.windows(2).all(|w| w[1] > w[0]),
        ekinf_band: ekinf.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            / ekinf.iter().copied().fold(f64::INFINITY, f64::min),
        prefactor_last_step: match pref.as_slice() {
            [.., a, b] => (b / a - 1.0).abs(),
            _ => f64::NAN,
        },
        mass_outside_decreasing: strictly_decreasing(&rows.iter().map(|r| r.mass_outside).collect::<Vec<_>>()),
        p1_hit_2_before_3_decreasing: strictly_decreasing(
            &rows.iter().map(|r| r.p1_hit_2_before_3).collect::<Vec<_>>(),
        ),
        theta2_r32_decreasing: strictly_decreasing(&rows.iter().map(|r| r.trace.scaled_theta2[1]).collect::<Vec<_>>()),
        ldp_extrapolated,
    };
    Ok(AsymptoticReport {
        gamma_1_3: scaling.gamma13,
        gamma_2_3: scaling.gamma23,
        barriers,
        scaling,
        normalization,
        rows,
        trends,
    })
}
