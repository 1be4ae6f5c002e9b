use ini::Ini;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::Method;
use crate::error::{Error, Result};
use crate::landscape::DEFAULT_BUDGET;
use crate::potential::{Backend, KappaNormalization};
use crate::spin::{parse_decimal, LatticeGeometry, ModelParams, PottsModel, Spin, MAX_PRECISION};

/// Options of the `simulate` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateOptions {
    pub method: Method,
    pub start: Spin,
    pub target: Vec<Spin>,
    pub max_events: Option<u64>,
    pub max_time: Option<f64>,
    /// Dump replica 0 of every β as CSV.
    pub trajectory: bool,
}

/// Options of the `solve` and `reduce` subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub backend: Backend,
    pub start: Spin,
    pub target: Vec<Spin>,
    pub symmetry: bool,
    pub normalization: KappaNormalization,
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub rows: usize,
    pub cols: usize,
    pub precision: u32,
    /// Decimal strings exactly as given.
    pub fields: [String; 3],
    pub betas: Vec<f64>,
    pub seed: u64,
    pub replicas: usize,
    /// Largest state space that may be enumerated.
    pub budget: u64,
    pub simulate: SimulateOptions,
    pub solve: SolveOptions,
    /// Golden file compared by `verify`.
    pub golden: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rows: 3,
            cols: 3,
            precision: 2,
            fields: ["0.05".into(), "0.45".into(), "0.90".into()],
            betas: vec![2.0],
            seed: 1,
            replicas: 1000,
            budget: DEFAULT_BUDGET,
            simulate: SimulateOptions {
                method: Method::Kmc,
                start: Spin::Two,
                target: vec![Spin::Three],
                max_events: None,
                max_time: None,
                trajectory: false,
            },
            solve: SolveOptions {
                backend: Backend::Auto,
                start: Spin::Two,
                target: vec![Spin::Three],
                symmetry: true,
                normalization: KappaNormalization::PerSite,
            },
            golden: None,
        }
    }
}

impl ExperimentConfig {
    pub fn model(&self) -> Result<PottsModel> {
        let f = &self.fields;
        Ok(PottsModel::new(
            LatticeGeometry::new(self.rows, self.cols)?,
            ModelParams::from_decimals([&f[0], &f[1], &f[2]], self.precision)?,
        ))
    }

    /// Canonical text form; [`parse_config`] reads it back to an equal value.
    pub fn to_text(&self) -> String {
        let spins = |v: &[Spin]| v.iter().map(|s| (s.index() + 1).to_string()).collect::<Vec<_>>().join(", ");
        let opt = |v: Option<String>| v.unwrap_or_default();
        let mut s = String::new();
        let _ = writeln!(s, "[lattice]\nrows = {}\ncols = {}\n", self.rows, self.cols);
        let _ = writeln!(
            s,
            "[fields]\nprecision = {}\nh1 = {}\nh2 = {}\nh3 = {}\n",
            self.precision, self.fields[0], self.fields[1], self.fields[2]
        );
        let betas: Vec<String> = self.betas.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(
            s,
            "[run]\nbeta = {}\nseed = {}\nreplicas = {}\nbudget = {}\n",
            betas.join(", "),
            self.seed,
            self.replicas,
            self.budget
        );
        let m = &self.simulate;
        let _ = writeln!(
            s,
            "[simulate]\nmethod = {}\nstart = {}\ntarget = {}\nmax_events = {}\nmax_time = {}\ntrajectory = {}\n",
            method_name(m.method),
            m.start.index() + 1,
            spins(&m.target),
            opt(m.max_events.map(|v| v.to_string())),
            opt(m.max_time.map(|v| v.to_string())),
            m.trajectory
        );
        let p = &self.solve;
        let _ = writeln!(
            s,
            "[solve]\nbackend = {}\nstart = {}\ntarget = {}\nsymmetry = {}\nnormalization = {}\n",
            backend_name(p.backend),
            p.start.index() + 1,
            spins(&p.target),
            p.symmetry,
            normalization_name(p.normalization)
        );
        let _ = writeln!(s, "[verify]\ngolden = {}", opt(self.golden.clone()));
        s
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Kmc => "kmc",
        Method::Naive => "naive",
    }
}

fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::Auto => "auto",
        Backend::Elimination => "elimination",
        Backend::ConjugateGradient => "conjugate_gradient",
    }
}

fn normalization_name(n: KappaNormalization) -> &'static str {
    match n {
        KappaNormalization::PerSite => "per_site",
        KappaNormalization::PerState => "per_state",
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("lattice", &["rows", "cols"]),
    ("fields", &["precision", "h1", "h2", "h3"]),
    ("run", &["beta", "seed", "replicas", "budget"]),
    ("simulate", &["method", "start", "target", "max_events", "max_time", "trajectory"]),
    ("solve", &["backend", "start", "target", "symmetry", "normalization"]),
    ("verify", &["golden"]),
];

/// Collects every violation instead of stopping at the first.
struct Reader<'a> {
    ini: &'a Ini,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.ini.get_from(Some(section), key).map(str::trim).filter(|v| !v.is_empty())
    }

    fn parse<T>(&mut self, section: &str, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Option<T> {
        let v = self.raw(section, key)?;
        let out = f(v);
        if out.is_none() {
            self.errors.push(format!("{section}.{key}: '{v}' is not {what}"));
        }
        out
    }

    fn set<T>(&mut self, slot: &mut T, section: &str, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) {
        if let Some(v) = self.parse(section, key, what, f) {
            *slot = v;
        }
    }
}

fn spin(v: &str) -> Option<Spin> {
    match v.trim() {
        "1" => Some(Spin::One),
        "2" => Some(Spin::Two),
        "3" => Some(Spin::Three),
        _ => None,
    }
}

fn spin_list(v: &str) -> Option<Vec<Spin>> {
    let out: Option<Vec<Spin>> = v.split(',').map(spin).collect();
    out.filter(|s| !s.is_empty())
}

fn boolean(v: &str) -> Option<bool> {
    match v {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

/// Parses the key-value experiment format. Missing keys take the defaults of
/// [`ExperimentConfig::default`]; every violation is reported.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let ini = Ini::load_from_str(text).map_err(|e| Error::Config(vec![format!("line {}: {}", e.line, e.msg)]))?;
    let mut r = Reader { ini: &ini, errors: Vec::new() };
    for (section, props) in ini.iter() {
        let Some(name) = section else {
            if props.iter().next().is_some() {
                r.errors.push("keys must appear inside a [section]".into());
            }
            continue;
        };
        match KEYS.iter().find(|(s, _)| *s == name) {
            None => r.errors.push(format!("unknown section [{name}]")),
            Some((_, keys)) => {
                for (k, _) in props.iter() {
                    if !keys.contains(&k) {
                        r.errors.push(format!("unknown key {name}.{k}"));
                    }
                }
            }
        }
    }

    let mut c = ExperimentConfig::default();
    r.set(&mut c.rows, "lattice", "rows", "an integer", |v| v.parse().ok());
    r.set(&mut c.cols, "lattice", "cols", "an integer", |v| v.parse().ok());
    for (name, n) in [("rows", c.rows), ("cols", c.cols)] {
        if n < 3 {
            r.errors.push(format!("lattice.{name} must be at least 3, got {n}"));
        }
    }

    r.set(&mut c.precision, "fields", "precision", "an integer", |v| v.parse().ok());
    if c.precision > MAX_PRECISION {
        r.errors.push(format!("fields.precision must be at most {MAX_PRECISION}, got {}", c.precision));
    }
    for (i, slot) in c.fields.iter_mut().enumerate() {
        if let Some(v) = r.raw("fields", ["h1", "h2", "h3"][i]) {
            *slot = v.to_string();
        }
    }
    if c.precision <= MAX_PRECISION {
        let mut units = [None; 3];
        for (i, text) in c.fields.iter().enumerate() {
            match parse_decimal(text, c.precision) {
                Ok(u) => units[i] = Some(u),
                Err(e) => r.errors.push(format!("fields.h{}: {}", i + 1, e)),
            }
        }
        let j = 10_i64.pow(c.precision);
        if units[0].is_some_and(|u| u <= 0) {
            r.errors.push(format!("fields.h1 = {} must be positive", c.fields[0]));
        }
        if units[2].is_some_and(|u| u >= j) {
            r.errors.push(format!("fields.h3 = {} must be below 1", c.fields[2]));
        }
        for (a, b) in [(0, 1), (1, 2)] {
            if let (Some(x), Some(y)) = (units[a], units[b]) {
                if x >= y {
                    r.errors.push(format!(
                        "fields: h{} < h{} required, got h{} = {} and h{} = {}",
                        a + 1,
                        b + 1,
                        a + 1,
                        c.fields[a],
                        b + 1,
                        c.fields[b]
                    ));
                }
            }
        }
    }

    if let Some(v) = r.raw("run", "beta").map(str::to_string) {
        let parsed: std::result::Result<Vec<f64>, _> =
            v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse::<f64>).collect();
        match parsed {
            Ok(list) => {
                for b in list.iter().filter(|b| !(**b >= 0.0 && b.is_finite())) {
                    r.errors.push(format!("run.beta: {b} is not a finite non-negative value"));
                }
                c.betas = list;
            }
            Err(_) => r.errors.push(format!("run.beta: '{v}' is not a comma-separated list of numbers")),
        }
    } else if ini.get_from(Some("run"), "beta").is_some() {
        c.betas.clear();
    }
    if c.betas.is_empty() {
        r.errors.push("run.beta must list at least one value".into());
    }
    r.set(&mut c.seed, "run", "seed", "an unsigned integer", |v| v.parse().ok());
    r.set(&mut c.replicas, "run", "replicas", "an integer", |v| v.parse().ok());
    if c.replicas == 0 {
        r.errors.push("run.replicas must be at least 1".into());
    }
    r.set(&mut c.budget, "run", "budget", "an unsigned integer", |v| v.parse().ok());

    let m = &mut c.simulate;
    r.set(&mut m.method, "simulate", "method", "kmc or naive", |v| match v {
        "kmc" => Some(Method::Kmc),
        "naive" => Some(Method::Naive),
        _ => None,
    });
    r.set(&mut m.start, "simulate", "start", "a spin 1, 2 or 3", spin);
    r.set(&mut m.target, "simulate", "target", "a list of spins", spin_list);
    if let Some(v) = r.parse("simulate", "max_events", "an unsigned integer", |v| v.parse().ok()) {
        m.max_events = Some(v);
    }
    if let Some(v) = r.parse("simulate", "max_time", "a non-negative number", |v| {
        v.parse::<f64>().ok().filter(|t| *t >= 0.0)
    }) {
        m.max_time = Some(v);
    }
    r.set(&mut m.trajectory, "simulate", "trajectory", "true or false", boolean);
    if m.target.contains(&m.start) {
        r.errors.push("simulate: start lies in the target".into());
    }

    let s = &mut c.solve;
    r.set(&mut s.backend, "solve", "backend", "auto, elimination or conjugate_gradient", |v| match v {
        "auto" => Some(Backend::Auto),
        "elimination" => Some(Backend::Elimination),
        "conjugate_gradient" => Some(Backend::ConjugateGradient),
        _ => None,
    });
    r.set(&mut s.start, "solve", "start", "a spin 1, 2 or 3", spin);
    r.set(&mut s.target, "solve", "target", "a list of spins", spin_list);
    r.set(&mut s.symmetry, "solve", "symmetry", "true or false", boolean);
    r.set(&mut s.normalization, "solve", "normalization", "per_site or per_state", |v| match v {
        "per_site" => Some(KappaNormalization::PerSite),
        "per_state" => Some(KappaNormalization::PerState),
        _ => None,
    });
    if s.target.contains(&s.start) {
        r.errors.push("solve: start lies in the target".into());
    }
    c.golden = r.raw("verify", "golden").map(str::to_string);

    if r.errors.is_empty() {
        Ok(c)
    } else {
        Err(Error::Config(r.errors))
    }
}

/// Reads and validates `path`; a relative `golden` path is taken relative
/// to the file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    let mut c = parse_config(&text)?;
    if let (Some(g), Some(dir)) = (&c.golden, path.parent()) {
        if Path::new(g).is_relative() {
            c.golden = Some(dir.join(g).to_string_lossy().into_owned());
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[lattice]\nrows = 3\ncols = 3\n[fields]\nprecision = 2\nh1 = 0.05\nh2 = 0.45\nh3 = 0.90\n[run]\nbeta = 2\nseed = 1\n";

    fn errors(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(Error::Config(v)) => v,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_parses() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!((c.rows, c.cols, c.seed), (3, 3, 1));
        assert_eq!(c.betas, vec![2.0]);
        assert_eq!(c.model().unwrap().params.fields(), [5, 45, 90]);
    }

    #[test]
    fn ordering_error_names_the_pair() {
        let e = errors(&MINIMAL.replace("h2 = 0.45", "h2 = 0.95"));
        assert_eq!(e.len(), 1);
        assert!(e[0].contains("h2 < h3"), "{e:?}");
    }

    #[test]
    fn precision_error() {
        let e = errors(&MINIMAL.replace("h1 = 0.05", "h1 = 0.005"));
        assert!(e.iter().any(|m| m.starts_with("fields.h1") && m.contains("precision")), "{e:?}");
    }

    #[test]
    fn every_violation_is_listed() {
        let text = MINIMAL.replace("rows = 3", "rows = 2").replace("cols = 3", "cols = 1").replace("beta = 2", "beta =");
        let e = errors(&text.replace("h2 = 0.45", "h2 = 0.01"));
        assert!(e.iter().any(|m| m.contains("lattice.rows")));
        assert!(e.iter().any(|m| m.contains("lattice.cols")));
        assert!(e.iter().any(|m| m.contains("run.beta")));
        assert!(e.iter().any(|m| m.contains("h1 < h2")));
        assert_eq!(e.len(), 4, "{e:?}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = errors(&format!("{MINIMAL}[run]\nbetas = 3\n"));
        assert!(e.iter().any(|m| m.contains("run.betas")));
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut c = parse_config(MINIMAL).unwrap();
        c.betas = vec![0.5, 2.0, 4.25];
        c.simulate.max_time = Some(12.5);
        c.simulate.target = vec![Spin::One, Spin::Three];
        c.golden = Some("golden/default.json".into());
        let text = c.to_text();
        let back = parse_config(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);
    }
}
