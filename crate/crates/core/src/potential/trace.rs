use serde::{Deserialize, Serialize};

use super::linalg::Elimination;
use super::operator::GeneratorOperator;
use super::solver::{capacity, choose_backend, node_potential, operator_for, Backend, LogScalar, SolverOptions};
use crate::error::Result;
use crate::landscape::{EnumeratedSpace, StateId, StateSpace};
use crate::spin::Spin;

/// Time scales `θ¹ = κ₁e^{βΓ₁₃}` and `θ² = κ₂e^{βΓ₂₃}` used to speed up the
/// trace chains. Barriers are in physical units.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RateScaling {
    pub gamma13: f64,
    pub gamma23: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl RateScaling {
    pub fn theta1(&self, beta: f64) -> f64 {
        self.kappa1 * (beta * self.gamma13).exp()
    }

    pub fn theta2(&self, beta: f64) -> f64 {
        self.kappa2 * (beta * self.gamma23).exp()
    }
}

/// Relative residuals of the trace-rate identities.
#[derive(Clone, Debug, Serialize)]
pub struct TraceIdentities {
    /// `μ(2)r(2,3)` against `μ(3)r(3,2)`.
    pub two_point_balance: f64,
    /// `μ(2)r(2,3)` against `cap(2,3)`.
    pub two_point_capacity: f64,
    /// `r(1,2) + r(1,3)` against `cap(1,{2,3})/μ(1)`.
    pub three_point_exit: f64,
    /// Eliminated `μ(1)r(1,2)`, `μ(1)r(1,3)` against the capacity half-sums.
    pub half_sum_12: f64,
    pub half_sum_13: f64,
}

/// Rates of the trace chains on `{1,2,3}` and `{2,3}`.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRates {
    pub beta: f64,
    /// `r(i,j)` on `{1,2,3}` (zero diagonal).
    pub three_point: [[f64; 3]; 3],
    /// `[r(2,3), r(3,2)]` on `{2,3}`.
    pub two_point: [f64; 2],
    pub mu: [LogScalar; 3],
    pub cap_1_23: LogScalar,
    pub cap_2_13: LogScalar,
    pub cap_3_12: LogScalar,
    pub cap_2_3: LogScalar,
    pub identities: TraceIdentities,
    pub theta1: f64,
    pub theta2: f64,
    pub scaled_theta1: [[f64; 3]; 3],
    pub scaled_theta2: [f64; 2],
    pub backend: Backend,
}

/// Trace-chain rates among `kept` nodes, by elimination or, under conjugate
/// gradients, from `r(i,j) = q(i,j) + Σ_{η∉M} q(i,η) h_{j,M∖j}(η)`.
fn trace_chain(op: &GeneratorOperator, kept: &[usize], opts: &SolverOptions) -> Result<(Vec<Vec<f64>>, Backend)> {
    let backend = choose_backend(op, opts)?;
    let n = op.len();
    let mut mask = vec![false; n];
    for &k in kept {
        mask[k] = true;
    }
    let mut out = vec![vec![0.0; kept.len()]; kept.len()];
    if backend == Backend::Elimination {
        let rates = |i: usize| op.row(i).map(|(k, m)| (k, op.rate(i, k, m))).collect::<Vec<_>>();
        let e = Elimination::run(n, rates, &mask, vec![]);
        for (a, &i) in kept.iter().enumerate() {
            for (b, &j) in kept.iter().enumerate() {
                if a != b {
                    out[a][b] = e.trace_rate(i, j);
                }
            }
        }
    } else {
        for (b, &j) in kept.iter().enumerate() {
            let mut target = vec![false; n];
            target[j] = true;
            let rest: Vec<bool> = (0..n).map(|x| mask[x] && x != j).collect();
            let p = node_potential(op, &target, &rest, opts)?;
            for (a, &i) in kept.iter().enumerate() {
                if a != b {
                    out[a][b] = op.row(i).map(|(k, m)| op.rate(i, k, m) * p.h[k]).sum();
                }
            }
        }
    }
    Ok((out, backend))
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Trace-process rates, the capacity identities they satisfy, and their
/// scaled versions under `scaling`.
pub fn trace_rates(
    space: &EnumeratedSpace,
    beta: f64,
    scaling: &RateScaling,
    opts: &SolverOptions,
) -> Result<TraceRates> {
    let u: Vec<StateId> = Spin::ALL.iter().map(|&s| space.uniform(s)).collect();
    let op = operator_for(space, beta, &[&u[0..1], &u[1..2], &u[2..3]], opts)?;
    let nodes: Vec<usize> = u.iter().map(|&s| op.node_of[s as usize] as usize).collect();
    let (m3, backend) = trace_chain(&op, &nodes, opts)?;
    let (m2, _) = trace_chain(&op, &nodes[1..], opts)?;
    let log_z = op.log_partition();
    let mu: [LogScalar; 3] = std::array::from_fn(|i| LogScalar(op.log_weight(nodes[i]) - log_z));

    let cap = |a: &[StateId], b: &[StateId]| capacity(space, a, b, beta, opts).map(|c| c.value);
    let cap_1_23 = cap(&u[0..1], &[u[1], u[2]])?;
    let cap_2_13 = cap(&u[1..2], &[u[0], u[2]])?;
    let cap_3_12 = cap(&u[2..3], &[u[0], u[1]])?;
    let cap_2_3 = cap(&u[1..2], &u[2..3])?;

    let three_point: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| m3[i][j]));
    let two_point = [m2[0][1], m2[1][0]];
    let flow23 = mu[1].value() * two_point[0];
    let flow32 = mu[2].value() * two_point[1];
    let half12 = 0.5 * (cap_1_23.value() + cap_2_13.value() - cap_3_12.value());
    let half13 = 0.5 * (cap_1_23.value() + cap_3_12.value() - cap_2_13.value());
    let identities = TraceIdentities {
        two_point_balance: rel(flow23, flow32),
        two_point_capacity: rel(flow23, cap_2_3.value()),
        three_point_exit: rel(three_point[0][1] + three_point[0][2], (cap_1_23.ln() - mu[0].ln()).exp()),
        half_sum_12: rel(mu[0].value() * three_point[0][1], half12),
        half_sum_13: rel(mu[0].value() * three_point[0][2], half13),
    };
    let (theta1, theta2) = (scaling.theta1(beta), scaling.theta2(beta));
    Ok(TraceRates {
        beta,
        three_point,
        two_point,
        mu,
        cap_1_23,
        cap_2_13,
        cap_3_12,
        cap_2_3,
        identities,
        theta1,
        theta2,
        scaled_theta1: three_point.map(|row| row.map(|r| theta1 * r)),
        scaled_theta2: two_point.map(|r| theta2 * r),
        backend,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{LatticeGeometry, ModelParams, PottsModel};

    #[test]
    fn identities_hold_for_both_backends() {
        let model = PottsModel::new(
            LatticeGeometry::new(3, 3).unwrap(),
            ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2).unwrap(),
        );
        let sp = EnumeratedSpace::new(model).unwrap();
        let scaling = RateScaling { gamma13: 4.6, gamma23: 6.2, kappa1: 1.0, kappa2: 1.0 };
        let mut last = None;
        for (beta, backend) in [(0.5, Backend::ConjugateGradient), (0.5, Backend::Elimination), (6.0, Backend::Auto)] {
            let opts = SolverOptions { backend, ..Default::default() };
            let t = trace_rates(&sp, beta, &scaling, &opts).unwrap();
            let id = &t.identities;
            assert!(id.two_point_balance < 1e-10 && id.two_point_capacity < 1e-10, "{id:?}");
            assert!(id.three_point_exit < 1e-10, "{id:?}");
            // The half-sums cancel capacities of very different size at large β.
            assert!(id.half_sum_12 < 1e-4 && id.half_sum_13 < 1e-4, "{id:?}");
            if beta == 0.5 {
                if let Some(prev) = last.replace(t.three_point) {
                    for i in 0..3 {
                        for j in 0..3 {
                            assert!(rel(prev[i][j], t.three_point[i][j]) < 1e-8);
                        }
                    }
                }
            }
        }
    }
}
