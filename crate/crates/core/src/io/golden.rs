use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::landscape::{communication_height, stability_levels, EnumeratedSpace, Stability, StateSpace};
use crate::potential::{capacity, gibbs_log_measure, mean_hitting_exact, SolverOptions};
use crate::spin::Spin;

/// A stored value: exact quantities compare as strings, floating ones within
/// their own relative tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldenValue {
    Exact(String),
    Float { value: f64, rel_tol: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenFile {
    pub schema_version: u32,
    pub entries: BTreeMap<String, GoldenValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoldenMismatch {
    pub key: String,
    pub expected: Option<GoldenValue>,
    pub observed: Option<GoldenValue>,
}

const MEAN_TOL: f64 = 1e-8;
const LOG_TOL: f64 = 1e-12;

fn spins(v: &[Spin]) -> String {
    v.iter().map(|s| (s.index() + 1).to_string()).collect::<Vec<_>>().join(",")
}

/// Reference quantities of `config`'s instance: energies, barriers and
/// stability levels (exact), and per-β solver results.
pub fn snapshot(config: &ExperimentConfig) -> Result<GoldenFile> {
    let model = config.model()?;
    let p = model.params.clone();
    let space = EnumeratedSpace::with_budget(model, config.budget)?;
    let mut e = BTreeMap::new();
    let exact = |v: i64| GoldenValue::Exact(p.format(v));
    let u = Spin::ALL.map(|s| space.uniform(s));
    for (k, &s) in u.iter().enumerate() {
        e.insert(format!("energy[{}]", k + 1), exact(space.energy(s)));
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let phi = communication_height(&space, &[u[i]], &[u[j]])?.value;
        e.insert(format!("phi[{},{}]", i + 1, j + 1), exact(phi));
    }
    let phi = communication_height(&space, &[u[0]], &[u[1], u[2]])?.value;
    e.insert("phi[1,{2,3}]".into(), exact(phi));
    let stab = stability_levels(&space);
    for k in 0..3 {
        let text = match stab.mono[k] {
            Stability::Finite(v) => p.format(v),
            Stability::Infinite => "inf".into(),
        };
        e.insert(format!("stability[{}]", k + 1), GoldenValue::Exact(text));
    }
    e.insert("stability[other,max]".into(), exact(stab.max_other));

    let opts = SolverOptions::default();
    let s = &config.solve;
    let (start, target) = (space.uniform(s.start), s.target.iter().map(|&t| space.uniform(t)).collect::<Vec<_>>());
    let tag = format!("{}->{}", s.start.index() + 1, spins(&s.target));
    for &beta in &config.betas {
        let m = mean_hitting_exact(&space, start, &target, beta, &opts)?;
        e.insert(format!("mean[{tag}]@{beta}"), GoldenValue::Float { value: m.direct, rel_tol: MEAN_TOL });
        let c = capacity(&space, &[start], &target, beta, &opts)?;
        e.insert(format!("ln_capacity[{tag}]@{beta}"), GoldenValue::Float { value: c.value.ln(), rel_tol: LOG_TOL });
        let g = gibbs_log_measure(&space, beta)?;
        e.insert(format!("ln_z@{beta}"), GoldenValue::Float { value: g.log_z, rel_tol: LOG_TOL });
    }
    Ok(GoldenFile { schema_version: super::SCHEMA_VERSION, entries: e })
}

fn matches(expected: &GoldenValue, observed: &GoldenValue) -> bool {
    match (expected, observed) {
        (GoldenValue::Exact(a), GoldenValue::Exact(b)) => a == b,
        (GoldenValue::Float { value: a, rel_tol }, GoldenValue::Float { value: b, .. }) => {
            a == b || (a - b).abs() <= rel_tol * a.abs().max(b.abs())
        }
        _ => false,
    }
}

/// Every key that is missing on either side or differs.
pub fn compare(golden: &GoldenFile, observed: &GoldenFile) -> Vec<GoldenMismatch> {
    let mut out = Vec::new();
    for (k, v) in &golden.entries {
        match observed.entries.get(k) {
            Some(o) if matches(v, o) => {}
            o => out.push(GoldenMismatch { key: k.clone(), expected: Some(v.clone()), observed: o.cloned() }),
        }
    }
    for (k, o) in &observed.entries {
        if !golden.entries.contains_key(k) {
            out.push(GoldenMismatch { key: k.clone(), expected: None, observed: Some(o.clone()) });
        }
    }
    out
}

pub fn load_golden(path: &Path) -> Result<GoldenFile> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn write_golden(path: &Path, golden: &GoldenFile) -> Result<()> {
    let mut text = serde_json::to_string_pretty(golden)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerances_apply_per_kind() {
        let mut a = GoldenFile { schema_version: 1, entries: BTreeMap::new() };
        a.entries.insert("x".into(), GoldenValue::Exact("6.2".into()));
        a.entries.insert("y".into(), GoldenValue::Float { value: 1.0, rel_tol: 1e-8 });
        let mut b = a.clone();
        b.entries.insert("y".into(), GoldenValue::Float { value: 1.0 + 1e-10, rel_tol: 1e-8 });
        assert!(compare(&a, &b).is_empty());
        b.entries.insert("x".into(), GoldenValue::Exact("6.20".into()));
        b.entries.insert("z".into(), GoldenValue::Exact("0".into()));
        let miss = compare(&a, &b);
        assert_eq!(miss.iter().map(|m| m.key.as_str()).collect::<Vec<_>>(), ["x", "z"]);
    }
}
