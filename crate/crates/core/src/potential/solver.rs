use serde::{Deserialize, Serialize, Serializer};

use super::linalg::{pcg, Elimination};
use super::operator::{logsumexp, GeneratorOperator};
use super::symmetry::SymmetryGroup;
use crate::error::{contract, Error, Result};
use crate::landscape::{EnumeratedSpace, StateId, StateSpace};
use crate::spin::Spin;

/// Linear-solver backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Conjugate gradients while the edge-weight ratio passes the conditioning
    /// guard, dense elimination above it.
    Auto,
    Elimination,
    ConjugateGradient,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    pub backend: Backend,
    /// Lump by the torus symmetries that fix every set in the problem.
    pub use_symmetry: bool,
    /// Largest node count for dense elimination.
    pub dense_limit: usize,
    /// Largest edge-weight ratio accepted by conjugate gradients.
    pub condition_limit: f64,
    /// Required relative residual of the harmonic system.
    pub residual_tolerance: f64,
    /// Stopping tolerance of conjugate gradients.
    pub cg_tolerance: f64,
    pub max_iterations: usize,
    /// Largest accepted relative disagreement between the mean-hitting routes.
    pub route_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Auto,
            use_symmetry: true,
            dense_limit: 3000,
            condition_limit: 1e12,
            residual_tolerance: 1e-10,
            cg_tolerance: 1e-14,
            max_iterations: 50_000,
            route_tolerance: 1e-8,
        }
    }
}

/// A positive number carried by its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogScalar(pub f64);

impl LogScalar {
    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }

    /// Decimal exponent `e` with `value = mantissa · 10^e`.
    pub fn exponent10(self) -> i64 {
        (self.0 / std::f64::consts::LN_10).floor() as i64
    }

    pub fn mantissa(self) -> f64 {
        (self.0 - self.exponent10() as f64 * std::f64::consts::LN_10).exp()
    }

    /// `|a/b − 1|`.
    pub fn relative_to(self, other: LogScalar) -> f64 {
        (self.0 - other.0).exp_m1().abs()
    }
}

impl Serialize for LogScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            ln: f64,
            mantissa: f64,
            exponent: i64,
        }
        Repr { ln: self.0, mantissa: self.mantissa(), exponent: self.exponent10() }.serialize(s)
    }
}

/// Short label for a state set: `1`, `2`, `3` for uniform states, `{1,3}` for
/// unions thereof, otherwise the size.
pub fn describe_set(space: &EnumeratedSpace, set: &[StateId]) -> String {
    let labels: Option<Vec<&str>> = set
        .iter()
        .map(|&s| Spin::ALL.iter().find(|&&sp| space.uniform(sp) == s).map(|sp| ["1", "2", "3"][sp.index()]))
        .collect();
    match labels {
        Some(l) if l.len() == 1 => l[0].to_string(),
        Some(mut l) => {
            l.sort_unstable();
            format!("{{{}}}", l.join(","))
        }
        None => format!("<{} states>", set.len()),
    }
}

/// Equilibrium potential `h_{A,B}(σ) = P_σ[τ_A < τ_B]`, with the complement
/// `h_{B,A}` solved separately so that values near 1 keep full precision.
#[derive(Clone, Debug, Serialize)]
pub struct PotentialField {
    pub beta: f64,
    #[serde(skip)]
    pub values: Vec<f64>,
    #[serde(skip)]
    pub complement: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub backend: Backend,
    pub nodes: usize,
}

impl PotentialField {
    pub fn at(&self, s: StateId) -> f64 {
        self.values[s as usize]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityResult {
    pub a: String,
    pub b: String,
    pub beta: f64,
    /// The capacity, i.e. the Dirichlet form of the solved potential.
    pub value: LogScalar,
    /// Boundary flux out of `A`, `Σ μ(σ)c(σ,η)(1 − h(η))`.
    pub flux_from_a: LogScalar,
    /// Boundary flux out of `B` computed with `h`.
    pub flux_from_b: LogScalar,
    /// `Σ_{a∈A} μ(a) Σ_{b∈B} r(a,b)` in the trace chain on `A ∪ B` (elimination only).
    pub trace: Option<LogScalar>,
    /// Largest relative spread among the routes above.
    pub consistency: f64,
    pub residual: f64,
    pub backend: Backend,
    pub nodes: usize,
}

/// Mean of an additive functional up to `τ_B`, by two routes.
#[derive(Clone, Debug, Serialize)]
pub struct MeanHitting {
    pub beta: f64,
    /// Absorbing-system solve.
    pub direct: f64,
    /// `Σ_σ μ(σ) h_{η,B}(σ) g(σ) / cap(η,B)`.
    pub capacity_route: f64,
    pub relative: f64,
    pub capacity: Option<LogScalar>,
    pub backend: Backend,
}

pub(crate) fn operator_for(
    space: &EnumeratedSpace,
    beta: f64,
    sets: &[&[StateId]],
    opts: &SolverOptions,
) -> Result<GeneratorOperator> {
    let sites = space.model().sites();
    let group = if opts.use_symmetry {
        SymmetryGroup::torus(&space.model().geometry).stabilizer(sets)
    } else {
        SymmetryGroup::trivial(sites)
    };
    GeneratorOperator::new(space, beta, &group)
}

pub(crate) fn choose_backend(op: &GeneratorOperator, opts: &SolverOptions) -> Result<Backend> {
    let elimination = || {
        if op.len() > opts.dense_limit {
            Err(Error::Budget { required: op.len() as u128, budget: opts.dense_limit as u128 })
        } else {
            Ok(Backend::Elimination)
        }
    };
    let log_ratio = op.log_weight_ratio();
    let guard_passes = log_ratio <= opts.condition_limit.ln();
    match opts.backend {
        Backend::Elimination => elimination(),
        Backend::ConjugateGradient if guard_passes => Ok(Backend::ConjugateGradient),
        Backend::ConjugateGradient => Err(Error::IllConditioned { ratio: log_ratio.exp() }),
        Backend::Auto if guard_passes => Ok(Backend::ConjugateGradient),
        Backend::Auto => elimination().map_err(|_| Error::IllConditioned { ratio: log_ratio.exp() }),
    }
}

/// Right-hand side of `R_i u_i − Σ q(i,k) u_k = s_i` off the kept set.
pub(crate) struct Rhs {
    pub pinned: Vec<f64>,
    pub source: Option<Vec<f64>>,
}

pub(crate) struct Solution {
    pub vectors: Vec<Vec<f64>>,
    pub residual: f64,
    pub iterations: usize,
    pub elimination: Option<Elimination>,
}

pub(crate) fn solve(
    op: &GeneratorOperator,
    kept: &[bool],
    rhs: &[Rhs],
    backend: Backend,
    opts: &SolverOptions,
) -> Result<Solution> {
    if !kept.iter().any(|&k| k) {
        return Err(contract("the absorbing set is empty"));
    }
    let n = op.len();
    let (vectors, iterations, elimination) = match backend {
        Backend::Elimination => {
            let sources: Vec<Vec<f64>> = rhs.iter().filter_map(|r| r.source.clone()).collect();
            let rates = |i: usize| op.row(i).map(|(k, m)| (k, op.rate(i, k, m))).collect::<Vec<_>>();
            let elim = Elimination::run(n, rates, kept, sources);
            let mut next = 0;
            let vectors = rhs
                .iter()
                .map(|r| {
                    let src = r.source.as_ref().map(|_| {
                        next += 1;
                        next - 1
                    });
                    elim.back_substitute(&r.pinned, src)
                })
                .collect();
            (vectors, 0, Some(elim))
        }
        _ => {
            let system = SymmetricSystem::new(op, kept);
            let mut vectors = Vec::new();
            let mut iterations = 0;
            for r in rhs {
                let b = system.rhs(op, r);
                let out = pcg(|x, y| system.apply(x, y), &system.diag, &b, opts.cg_tolerance, opts.max_iterations)?;
                iterations = iterations.max(out.iterations);
                let mut u = r.pinned.clone();
                for (f, &i) in system.free.iter().enumerate() {
                    u[i] = out.x[f];
                }
                vectors.push(u);
            }
            (vectors, iterations, None)
        }
    };
    let residual = rhs
        .iter()
        .zip(&vectors)
        .map(|(r, u)| harmonic_residual(op, kept, r, u))
        .fold(0.0, f64::max);
    if residual > opts.residual_tolerance {
        return Err(Error::NoConvergence { iterations, residual });
    }
    Ok(Solution { vectors, residual, iterations, elimination })
}

/// The generator system multiplied through by `μ`, on free nodes only.
struct SymmetricSystem {
    free: Vec<usize>,
    diag: Vec<f64>,
    /// Per free node: (free index, weight) of free neighbours.
    inner: Vec<Vec<(usize, f64)>>,
    /// Per free node: (node, weight) of kept neighbours.
    outer: Vec<Vec<(usize, f64)>>,
    shift: f64,
}

impl SymmetricSystem {
    fn new(op: &GeneratorOperator, kept: &[bool]) -> Self {
        let n = op.len();
        let free: Vec<usize> = (0..n).filter(|&i| !kept[i]).collect();
        let mut index = vec![usize::MAX; n];
        for (f, &i) in free.iter().enumerate() {
            index[i] = f;
        }
        let shift = (0..n)
            .flat_map(|i| op.row(i).map(move |(k, m)| (i, k, m)))
            .map(|(i, k, m)| op.log_conductance(i, k, m))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut diag = Vec::with_capacity(free.len());
        let mut inner = Vec::with_capacity(free.len());
        let mut outer = Vec::with_capacity(free.len());
        for &i in &free {
            let (mut d, mut inn, mut out) = (0.0, Vec::new(), Vec::new());
            for (k, m) in op.row(i) {
                let w = (op.log_conductance(i, k, m) - shift).exp();
                d += w;
                if kept[k] {
                    out.push((k, w));
                } else {
                    inn.push((index[k], w));
                }
            }
            diag.push(d);
            inner.push(inn);
            outer.push(out);
        }
        Self { free, diag, inner, outer, shift }
    }

    fn rhs(&self, op: &GeneratorOperator, r: &Rhs) -> Vec<f64> {
        self.free
            .iter()
            .enumerate()
            .map(|(f, &i)| {
                let mut b: f64 = self.outer[f].iter().map(|&(k, w)| w * r.pinned[k]).sum();
                if let Some(s) = &r.source {
                    b += (op.log_weight(i) - self.shift).exp() * s[i];
                }
                b
            })
            .collect()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for f in 0..x.len() {
            y[f] = self.diag[f] * x[f] - self.inner[f].iter().map(|&(g, w)| w * x[g]).sum::<f64>();
        }
    }
}

/// `‖μ(Lu + s)‖ / ‖μ(s) + boundary inflow‖` over free nodes.
fn harmonic_residual(op: &GeneratorOperator, kept: &[bool], r: &Rhs, u: &[f64]) -> f64 {
    let shift = (0..op.len()).map(|i| op.log_weight(i)).fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for i in (0..op.len()).filter(|&i| !kept[i]) {
        let pi = (op.log_weight(i) - shift).exp();
        let mut res = 0.0;
        let mut scale = 0.0;
        for (k, m) in op.row(i) {
            let q = op.rate(i, k, m);
            res += q * (u[i] - u[k]);
            scale += q * u[k].abs();
        }
        let s = r.source.as_ref().map_or(0.0, |s| s[i]);
        res -= s;
        scale += s.abs();
        num += (pi * res).powi(2);
        den += (pi * scale).powi(2);
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

fn indicator(op: &GeneratorOperator, set: &[bool]) -> Vec<f64> {
    (0..op.len()).map(|i| if set[i] { 1.0 } else { 0.0 }).collect()
}

fn check_disjoint(a: &[bool], b: &[bool]) -> Result<()> {
    if a.iter().zip(b).any(|(x, y)| *x && *y) {
        return Err(contract("sets A and B must be disjoint"));
    }
    if !a.iter().any(|&x| x) || !b.iter().any(|&x| x) {
        return Err(contract("sets A and B must be nonempty"));
    }
    Ok(())
}

/// Node-level potential pair `(h_{A,B}, h_{B,A})`.
pub(crate) struct NodePotential {
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub backend: Backend,
    pub elimination: Option<Elimination>,
}

pub(crate) fn node_potential(
    op: &GeneratorOperator,
    a: &[bool],
    b: &[bool],
    opts: &SolverOptions,
) -> Result<NodePotential> {
    check_disjoint(a, b)?;
    let backend = choose_backend(op, opts)?;
    let kept: Vec<bool> = a.iter().zip(b).map(|(x, y)| *x || *y).collect();
    let sol = solve(
        op,
        &kept,
        &[Rhs { pinned: indicator(op, a), source: None }, Rhs { pinned: indicator(op, b), source: None }],
        backend,
        opts,
    )?;
    let mut it = sol.vectors.into_iter();
    let (h, g) = (it.next().unwrap(), it.next().unwrap());
    Ok(NodePotential {
        h,
        g,
        residual: sol.residual,
        iterations: sol.iterations,
        backend,
        elimination: sol.elimination,
    })
}

/// `ln` of the unnormalized Dirichlet form `½ Σ w(σ,η)(h(σ) − h(η))²`.
pub(crate) fn log_dirichlet(op: &GeneratorOperator, p: &NodePotential) -> f64 {
    let mut terms = Vec::new();
    for i in 0..op.len() {
        for (k, m) in op.row(i) {
            if k <= i {
                continue;
            }
            // Take the difference from whichever representation is closer to 0.
            let d = if p.h[i] + p.h[k] <= p.g[i] + p.g[k] { p.h[i] - p.h[k] } else { p.g[k] - p.g[i] };
            if d != 0.0 {
                terms.push(op.log_conductance(i, k, m) + 2.0 * d.abs().ln());
            }
        }
    }
    logsumexp(terms)
}

fn log_flux(op: &GeneratorOperator, from: &[bool], values_off: &[f64]) -> f64 {
    let mut terms = Vec::new();
    for i in (0..op.len()).filter(|&i| from[i]) {
        for (k, m) in op.row(i) {
            if !from[k] && values_off[k] > 0.0 {
                terms.push(op.log_conductance(i, k, m) + values_off[k].ln());
            }
        }
    }
    logsumexp(terms)
}

fn capacity_from(
    space: &EnumeratedSpace,
    op: &GeneratorOperator,
    a_set: &[StateId],
    b_set: &[StateId],
    a: &[bool],
    b: &[bool],
    p: &NodePotential,
) -> CapacityResult {
    let log_z = op.log_partition();
    let value = LogScalar(log_dirichlet(op, p) - log_z);
    let flux_from_a = LogScalar(log_flux(op, a, &p.g) - log_z);
    let flux_from_b = LogScalar(log_flux(op, b, &p.h) - log_z);
    let trace = p.elimination.as_ref().map(|e| {
        let mut terms = Vec::new();
        for i in (0..op.len()).filter(|&i| a[i]) {
            for j in (0..op.len()).filter(|&j| b[j]) {
                let r = e.trace_rate(i, j);
                if r > 0.0 {
                    terms.push(op.log_weight(i) + r.ln());
                }
            }
        }
        LogScalar(logsumexp(terms) - log_z)
    });
    let mut consistency = value.relative_to(flux_from_a).max(value.relative_to(flux_from_b));
    if let Some(t) = trace {
        consistency = consistency.max(value.relative_to(t));
    }
    CapacityResult {
        a: describe_set(space, a_set),
        b: describe_set(space, b_set),
        beta: op.beta,
        value,
        flux_from_a,
        flux_from_b,
        trace,
        consistency,
        residual: p.residual,
        backend: p.backend,
        nodes: op.len(),
    }
}

/// Solves for `h_{A,B}` on the whole space.
pub fn equilibrium_potential(
    space: &EnumeratedSpace,
    a: &[StateId],
    b: &[StateId],
    beta: f64,
    opts: &SolverOptions,
) -> Result<PotentialField> {
    let op = operator_for(space, beta, &[a, b], opts)?;
    let p = node_potential(&op, &op.mask(a)?, &op.mask(b)?, opts)?;
    let expand = |v: &[f64]| op.node_of.iter().map(|&o| v[o as usize]).collect::<Vec<f64>>();
    Ok(PotentialField {
        beta,
        values: expand(&p.h),
        complement: expand(&p.g),
        residual: p.residual,
        iterations: p.iterations,
        backend: p.backend,
        nodes: op.len(),
    })
}

/// `cap(A,B)` as the Dirichlet form of `h_{A,B}`, with flux (and, under
/// elimination, trace-chain) cross-checks.
pub fn capacity(
    space: &EnumeratedSpace,
    a: &[StateId],
    b: &[StateId],
    beta: f64,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    let op = operator_for(space, beta, &[a, b], opts)?;
    let (am, bm) = (op.mask(a)?, op.mask(b)?);
    let p = node_potential(&op, &am, &bm, opts)?;
    Ok(capacity_from(space, &op, a, b, &am, &bm, &p))
}

fn additive_functional(
    space: &EnumeratedSpace,
    eta: StateId,
    b: &[StateId],
    weight_set: Option<&[StateId]>,
    beta: f64,
    opts: &SolverOptions,
) -> Result<MeanHitting> {
    let mut sets: Vec<&[StateId]> = vec![std::slice::from_ref(&eta), b];
    if let Some(d) = weight_set {
        sets.push(d);
    }
    let op = operator_for(space, beta, &sets, opts)?;
    let bm = op.mask(b)?;
    let em = op.mask(&[eta])?;
    let backend = choose_backend(&op, opts)?;
    if bm[op.node_of[eta as usize] as usize] {
        return Ok(MeanHitting { beta, direct: 0.0, capacity_route: 0.0, relative: 0.0, capacity: None, backend });
    }
    let weight = match weight_set {
        Some(d) => indicator(&op, &op.mask(d)?),
        None => vec![1.0; op.len()],
    };

    let direct_sol = solve(
        &op,
        &bm,
        &[Rhs { pinned: vec![0.0; op.len()], source: Some(weight.clone()) }],
        backend,
        opts,
    )?;
    let direct = direct_sol.vectors[0][op.node_of[eta as usize] as usize];

    let p = node_potential(&op, &em, &bm, opts)?;
    let cap = capacity_from(space, &op, &[eta], b, &em, &bm, &p);
    let log_cap_shifted = cap.value.ln() + op.log_partition();
    let log_num = logsumexp(
        (0..op.len()).filter(|&i| weight[i] > 0.0 && p.h[i] > 0.0).map(|i| op.log_weight(i) + p.h[i].ln()),
    );
    let capacity_route = if log_num == f64::NEG_INFINITY { 0.0 } else { (log_num - log_cap_shifted).exp() };
    let scale = direct.abs().max(capacity_route.abs());
    let relative = if scale == 0.0 { 0.0 } else { (direct - capacity_route).abs() / scale };
    if relative > opts.route_tolerance {
        return Err(Error::RouteDisagreement { direct, capacity: capacity_route, relative });
    }
    Ok(MeanHitting { beta, direct, capacity_route, relative, capacity: Some(cap.value), backend })
}

/// `E_η[τ_B]` by the absorbing solve and by `Σ_σ μ(σ)h_{η,B}(σ)/cap(η,B)`;
/// disagreement above the route tolerance is an error.
pub fn mean_hitting_exact(
    space: &EnumeratedSpace,
    eta: StateId,
    b: &[StateId],
    beta: f64,
    opts: &SolverOptions,
) -> Result<MeanHitting> {
    additive_functional(space, eta, b, None, beta, opts)
}

/// Mean time spent in `d` before `τ_B`, started from `η`, by both routes.
pub fn mean_occupation(
    space: &EnumeratedSpace,
    eta: StateId,
    b: &[StateId],
    d: &[StateId],
    beta: f64,
    opts: &SolverOptions,
) -> Result<MeanHitting> {
    additive_functional(space, eta, b, Some(d), beta, opts)
}

/// Mean number of jumps before `τ_B` from `η` (absorbing solve only); sizes
/// simulation budgets.
pub fn mean_jump_count(
    space: &EnumeratedSpace,
    eta: StateId,
    b: &[StateId],
    beta: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    let op = operator_for(space, beta, &[std::slice::from_ref(&eta), b], opts)?;
    let bm = op.mask(b)?;
    if bm[op.node_of[eta as usize] as usize] {
        return Ok(0.0);
    }
    let backend = choose_backend(&op, opts)?;
    // Expected jumps = expected time weighted by the exit rate (within-orbit flips included).
    let coupling_beta = op.beta_u;
    let rates: Vec<f64> = op
        .reps
        .iter()
        .map(|&s| {
            let mut buf = Vec::new();
            space.neighbors(s, &mut buf);
            buf.iter().map(|&t| (-coupling_beta * (space.energy(t) - space.energy(s)).max(0) as f64).exp()).sum()
        })
        .collect();
    let sol = solve(&op, &bm, &[Rhs { pinned: vec![0.0; op.len()], source: Some(rates) }], backend, opts)?;
    Ok(sol.vectors[0][op.node_of[eta as usize] as usize])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{LatticeGeometry, ModelParams, PottsModel};

    fn space() -> EnumeratedSpace {
        let model = PottsModel::new(
            LatticeGeometry::new(3, 3).unwrap(),
            ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2).unwrap(),
        );
        EnumeratedSpace::new(model).unwrap()
    }

    fn elim() -> SolverOptions {
        SolverOptions { backend: Backend::Elimination, ..Default::default() }
    }

    #[test]
    fn boundary_values_and_maximum_principle() {
        let sp = space();
        let (one, three) = (sp.uniform(Spin::One), sp.uniform(Spin::Three));
        let p = equilibrium_potential(&sp, &[one], &[three], 2.0, &elim()).unwrap();
        assert_eq!(p.at(one), 1.0);
        assert_eq!(p.at(three), 0.0);
        assert!(p.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(p.values.iter().zip(&p.complement).all(|(h, g)| (h + g - 1.0).abs() < 1e-12));
    }

    #[test]
    fn backends_agree_at_moderate_beta() {
        let sp = space();
        let (two, three) = (sp.uniform(Spin::Two), sp.uniform(Spin::Three));
        let cg = SolverOptions { backend: Backend::ConjugateGradient, ..Default::default() };
        let a = capacity(&sp, &[two], &[three], 0.5, &cg).unwrap();
        let b = capacity(&sp, &[two], &[three], 0.5, &elim()).unwrap();
        assert!(a.value.relative_to(b.value) < 1e-9, "{:?} {:?}", a.value, b.value);
        assert!(b.consistency < 1e-10);
    }

    #[test]
    fn capacity_routes_agree_at_low_temperature() {
        let sp = space();
        let (one, two, three) = (sp.uniform(Spin::One), sp.uniform(Spin::Two), sp.uniform(Spin::Three));
        for beta in [4.0, 8.0] {
            let c = capacity(&sp, &[one], &[two, three], beta, &SolverOptions::default()).unwrap();
            assert_eq!(c.backend, Backend::Elimination);
            assert!(c.consistency < 1e-8, "{beta}: {c:?}");
        }
    }

    #[test]
    fn mean_hitting_routes_agree() {
        let sp = space();
        let (two, three) = (sp.uniform(Spin::Two), sp.uniform(Spin::Three));
        for beta in [0.5, 4.0] {
            let m = mean_hitting_exact(&sp, two, &[three], beta, &SolverOptions::default()).unwrap();
            assert!(m.relative < 1e-8, "{m:?}");
        }
        let zero = mean_hitting_exact(&sp, three, &[three], 4.0, &SolverOptions::default()).unwrap();
        assert_eq!(zero.direct, 0.0);
    }

    #[test]
    fn symmetry_lumping_is_exact() {
        let sp = space();
        let (two, three) = (sp.uniform(Spin::Two), sp.uniform(Spin::Three));
        let plain = SolverOptions { use_symmetry: false, backend: Backend::ConjugateGradient, ..Default::default() };
        let lumped = SolverOptions { backend: Backend::ConjugateGradient, ..Default::default() };
        let a = mean_hitting_exact(&sp, two, &[three], 0.3, &plain).unwrap();
        let b = mean_hitting_exact(&sp, two, &[three], 0.3, &lumped).unwrap();
        assert!((a.direct / b.direct - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_scalar_decimal_split() {
        let x = LogScalar(1234.5_f64.ln());
        assert_eq!(x.exponent10(), 3);
        assert!((x.mantissa() - 1.2345).abs() < 1e-12);
    }
}
