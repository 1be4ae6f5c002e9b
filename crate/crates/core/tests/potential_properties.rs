use std::sync::OnceLock;

use potts_metastable::dynamics::replica_rng;
use potts_metastable::landscape::*;
use potts_metastable::potential::*;
use potts_metastable::spin::*;
use proptest::prelude::*;
use rand::Rng;

fn space() -> &'static EnumeratedSpace {
    static SPACE: OnceLock<EnumeratedSpace> = OnceLock::new();
    SPACE.get_or_init(|| {
        let m = PottsModel::new(
            LatticeGeometry::new(3, 3).unwrap(),
            ModelParams::from_decimals(["0.05", "0.45", "0.90"], 2).unwrap(),
        );
        EnumeratedSpace::new(m).unwrap()
    })
}

const N: StateId = 19_683;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// Metropolis rate recomputed from the energies alone.
fn rate(sp: &EnumeratedSpace, beta: f64, s: StateId, t: StateId) -> f64 {
    let j = sp.model().params.coupling() as f64;
    (-beta / j * (sp.energy(t) - sp.energy(s)).max(0) as f64).exp()
}

/// The full torus orbit of `s`.
fn orbit(s: StateId) -> Vec<StateId> {
    let g = SymmetryGroup::torus(&space().model().geometry);
    let mut o: Vec<StateId> = (0..g.order()).map(|k| g.apply(k, s)).collect();
    o.sort_unstable();
    o.dedup();
    o
}

#[test]
fn renewal_estimate_from_uniform_states() {
    let sp = space();
    let mut rng = replica_rng(31, 0);
    for beta in [2.0, 4.0] {
        for _ in 0..6 {
            let sigma = sp.uniform(Spin::ALL[rng.random_range(0..3)]);
            let a = orbit(rng.random_range(0..N));
            let b = orbit(rng.random_range(0..N));
            if a.contains(&sigma) || b.contains(&sigma) || a.iter().any(|s| b.contains(s)) {
                continue;
            }
            let p = equilibrium_potential(sp, &a, &b, beta, &opts()).unwrap().at(sigma);
            let ca = capacity(sp, &[sigma], &a, beta, &opts()).unwrap().value;
            let cb = capacity(sp, &[sigma], &b, beta, &opts()).unwrap().value;
            let bound = (ca.ln() - cb.ln()).exp();
            assert!(p <= bound * (1.0 + 1e-9), "β = {beta}: {p} > {bound}");
        }
    }
}

#[test]
fn renewal_estimate_on_random_singletons() {
    let sp = space();
    let cg = SolverOptions { backend: Backend::ConjugateGradient, ..opts() };
    let mut rng = replica_rng(37, 0);
    for _ in 0..4 {
        let [s, a, b] = [0; 3].map(|_| rng.random_range(0..N));
        if s == a || s == b || a == b {
            continue;
        }
        let p = equilibrium_potential(sp, &[a], &[b], 0.5, &cg).unwrap().at(s);
        let ca = capacity(sp, &[s], &[a], 0.5, &cg).unwrap().value.value();
        let cb = capacity(sp, &[s], &[b], 0.5, &cg).unwrap().value.value();
        assert!(p <= ca / cb * (1.0 + 1e-8), "{p} > {}", ca / cb);
    }
}

#[test]
fn capacity_is_symmetric_and_matches_its_dirichlet_form() {
    let sp = space();
    let [one, two, three] = Spin::ALL.map(|s| sp.uniform(s));
    for beta in [0.5, 2.0, 6.0] {
        for (a, b) in [(vec![one], vec![three]), (vec![two], vec![three]), (vec![one], vec![two, three])] {
            let ab = capacity(sp, &a, &b, beta, &opts()).unwrap();
            let ba = capacity(sp, &b, &a, beta, &opts()).unwrap();
            assert!(rel(ab.value.ln(), ba.value.ln()) < 1e-10, "β = {beta}");
            assert!(ab.consistency < 1e-8);

            // ½ Σ μ(σ) c(σ,η) (h(σ) − h(η))², with μ from the Gibbs weights.
            let h = equilibrium_potential(sp, &a, &b, beta, &opts()).unwrap();
            let g = gibbs_log_measure(sp, beta).unwrap();
            let mut nb = Vec::new();
            let mut terms = Vec::new();
            for s in 0..N {
                sp.neighbors(s, &mut nb);
                for &t in &nb {
                    let d = h.at(s) - h.at(t);
                    if d != 0.0 {
                        terms.push(g.log_mu(s) + rate(sp, beta, s, t).ln() + 2.0 * d.abs().ln());
                    }
                }
            }
            let dirichlet = logsumexp(terms) - 2f64.ln();
            assert!((dirichlet - ab.value.ln()).abs() < 1e-8, "β = {beta}: {dirichlet} vs {}", ab.value.ln());
        }
    }
}

#[test]
fn infinite_temperature_capacity_is_a_conductance() {
    // At β = 0 every edge has conductance 1/|Ω|; relax the harmonic problem
    // on the raw graph by Gauss–Seidel.
    let sp = space();
    let (a, b) = (sp.uniform(Spin::One), sp.uniform(Spin::Three));
    let mut h = vec![0.5; N as usize];
    let mut nbrs: Vec<Vec<StateId>> = Vec::with_capacity(N as usize);
    let mut nb = Vec::new();
    for s in 0..N {
        sp.neighbors(s, &mut nb);
        nbrs.push(nb.clone());
    }
    h[a as usize] = 1.0;
    h[b as usize] = 0.0;
    loop {
        let mut change: f64 = 0.0;
        for s in 0..N as usize {
            if s as StateId != a && s as StateId != b {
                let v = nbrs[s].iter().map(|&t| h[t as usize]).sum::<f64>() / nbrs[s].len() as f64;
                change = change.max((v - h[s]).abs());
                h[s] = v;
            }
        }
        if change < 1e-15 {
            break;
        }
    }
    let conductance: f64 = nbrs[a as usize].iter().map(|&t| 1.0 - h[t as usize]).sum();
    let expect = conductance / N as f64;
    let got = capacity(sp, &[a], &[b], 0.0, &opts()).unwrap().value.value();
    assert!(rel(got, expect) < 1e-9, "{got} vs {expect}");
}

#[test]
fn potentials_are_harmonic_and_bounded() {
    let sp = space();
    let (a, b) = ([sp.uniform(Spin::Two)], [sp.uniform(Spin::Three)]);
    for beta in [1.0, 4.0] {
        let h = equilibrium_potential(sp, &a, &b, beta, &opts()).unwrap();
        let mut nb = Vec::new();
        for s in 0..N {
            let v = h.at(s);
            assert!((0.0..=1.0).contains(&v));
            let gap = (v + h.complement[s as usize] - 1.0).abs();
            assert!(gap < 1e-9, "β = {beta}, state {s}: h + g − 1 = {gap:e}");
            if s == a[0] || s == b[0] {
                assert_eq!(v, if s == a[0] { 1.0 } else { 0.0 });
                continue;
            }
            sp.neighbors(s, &mut nb);
            let (mut flow, mut total) = (0.0, 0.0);
            for &t in &nb {
                let c = rate(sp, beta, s, t);
                flow += c * (h.at(t) - v);
                total += c;
            }
            assert!(flow.abs() <= 1e-10 * total, "β = {beta}, state {s}: {flow}");
        }
    }
}

#[test]
fn backends_and_symmetry_agree() {
    let sp = space();
    let (a, b) = ([sp.uniform(Spin::One)], [sp.uniform(Spin::Three)]);
    let elim = SolverOptions { backend: Backend::Elimination, ..opts() };
    let cg = SolverOptions { backend: Backend::ConjugateGradient, ..opts() };
    let flat = SolverOptions { use_symmetry: false, backend: Backend::ConjugateGradient, ..opts() };
    let beta = 1.0;
    let x = capacity(sp, &a, &b, beta, &elim).unwrap().value.ln();
    let y = capacity(sp, &a, &b, beta, &cg).unwrap().value.ln();
    let z = capacity(sp, &a, &b, beta, &flat).unwrap().value.ln();
    assert!((x - y).abs() < 1e-9 && (x - z).abs() < 1e-9, "{x} {y} {z}");
}

#[test]
fn occupation_times_add_up_to_the_hitting_time() {
    let sp = space();
    let (eta, b) = (sp.uniform(Spin::Two), [sp.uniform(Spin::Three)]);
    let beta = 3.0;
    let total = mean_hitting_exact(sp, eta, &b, beta, &opts()).unwrap().direct;
    // Partition Ω \ B by the number of 3-spins.
    let mut parts = vec![Vec::new(); 10];
    for s in 0..N {
        if s != b[0] {
            parts[SpinConfiguration::from_packed(s, 9).unwrap().count(Spin::Three)].push(s);
        }
    }
    let sum: f64 = parts
        .iter()
        .filter(|p| !p.is_empty())
        .map(|d| mean_occupation(sp, eta, &b, d, beta, &opts()).unwrap().direct)
        .sum();
    assert!(rel(sum, total) < 1e-9, "{sum} vs {total}");
}

#[test]
fn capacity_decays_at_the_barrier_rate() {
    let sp = space();
    let (a, b) = (sp.uniform(Spin::One), sp.uniform(Spin::Three));
    let phi = communication_height(sp, &[a], &[b]).unwrap().value;
    let h_min = sp.energy(b);
    let j = sp.model().params.coupling() as f64;
    let expect = (phi - h_min) as f64 / j;
    let ln = |beta: f64| capacity(sp, &[a], &[b], beta, &opts()).unwrap().value.ln();
    let slope = ln(7.5) - ln(8.5);
    assert!(rel(slope, expect) < 0.05, "{slope} vs {expect}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn hitting_probabilities_are_monotone_in_the_target(beta in 0.0..3.0_f64, pick in 0..3_usize) {
        // Enlarging B can only make τ_A < τ_B less likely.
        let sp = space();
        let [one, two, three] = Spin::ALL.map(|s| sp.uniform(s));
        let sets = [(one, two, three), (two, one, three), (three, one, two)];
        let (x, y, z) = sets[pick];
        let single = equilibrium_potential(sp, &[x], &[y], beta, &opts()).unwrap();
        let both = equilibrium_potential(sp, &[x], &[y, z], beta, &opts()).unwrap();
        for s in 0..N {
            prop_assert!(both.at(s) <= single.at(s) + 1e-10);
        }
    }
}
