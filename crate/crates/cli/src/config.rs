//! Scenario configuration: TOML text with top-level physical parameters and
//! `[numerics]` / `[output]` sections.

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    TwolevelCubic,
    TwolevelAxis,
    Transport1d,
    Dilatation1d,
    HydrogenCheck,
    Nlevel,
    Custom,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::TwolevelCubic,
        Kind::TwolevelAxis,
        Kind::Transport1d,
        Kind::Dilatation1d,
        Kind::HydrogenCheck,
        Kind::Nlevel,
        Kind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::TwolevelCubic => "twolevel-cubic",
            Kind::TwolevelAxis => "twolevel-axis",
            Kind::Transport1d => "transport-1d",
            Kind::Dilatation1d => "dilatation-1d",
            Kind::HydrogenCheck => "hydrogen-check",
            Kind::Nlevel => "nlevel",
            Kind::Custom => "custom",
        }
    }

    pub fn parse(name: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn summary(self) -> &'static str {
        match self {
            Kind::TwolevelCubic => "two-level sweep h_z = c t^3: phase, potential, Bloch curves and driver comparison",
            Kind::TwolevelAxis => "two-level deformation about a tilted axis (angle varphi)",
            Kind::Transport1d => "harmonic well moved by a smoothstep x0(t), split-step propagation",
            Kind::Dilatation1d => "harmonic well dilated by a smoothstep xi(t), split-step propagation",
            Kind::HydrogenCheck => "hydrogen ground-state dilatation fields and radial continuity",
            Kind::Nlevel => "random smooth N-level family, Newton-solved diagonal deformation",
            Kind::Custom => "user-given family sum_k p_k(t) M_k with polynomial p_k",
        }
    }

    fn is_two_level(self) -> bool {
        matches!(self, Kind::TwolevelCubic | Kind::TwolevelAxis)
    }

    fn physics_keys(self) -> &'static [&'static str] {
        match self {
            Kind::TwolevelCubic => &["c", "gamma"],
            Kind::TwolevelAxis => &["c", "gamma", "varphi"],
            Kind::Transport1d => &["mass", "omega", "shift"],
            Kind::Dilatation1d => &["mass", "omega", "xi_start", "xi_end"],
            Kind::HydrogenCheck => &["mass", "xi_start", "xi_end", "shift"],
            Kind::Nlevel => &["n", "seed", "level"],
            Kind::Custom => &["terms", "level"],
        }
    }

    fn numerics_keys(self) -> &'static [&'static str] {
        match self {
            Kind::TwolevelCubic | Kind::Nlevel | Kind::Custom => &[
                "t_start",
                "t_end",
                "n_steps",
                "dt",
                "fidelity_tol",
                "endpoint_fidelity_tol",
                "cd_fidelity_tol",
                "invariant_tol",
                "continuity_tol",
                "hj_tol",
                "endpoint_tol",
                "newton_tol",
                "max_iterations",
            ],
            Kind::TwolevelAxis => &["t_start", "t_end", "n_steps", "dt", "residual_tol", "rtol", "atol"],
            Kind::Transport1d | Kind::Dilatation1d => &[
                "t_start",
                "t_end",
                "n_steps",
                "dt",
                "x_min",
                "x_max",
                "n_points",
                "sample_every",
                "fidelity_tol",
                "norm_tol",
            ],
            Kind::HydrogenCheck => {
                &["t_start", "t_end", "n_steps", "dt", "r_min", "r_max", "n_points", "t_eval", "residual_tol", "spot_tol"]
            }
        }
    }
}

impl Serialize for Kind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const ALL_TOP_KEYS: [&str; 14] = [
    "kind", "c", "gamma", "varphi", "mass", "omega", "shift", "xi_start", "xi_end", "n", "seed", "level", "terms",
    "numerics",
];

/// `p(t) M` with `p` given by polynomial coefficients (lowest order first).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub coeffs: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Physics {
    pub c: f64,
    pub gamma: f64,
    pub varphi: f64,
    pub mass: f64,
    pub omega: f64,
    pub shift: f64,
    pub xi_start: f64,
    pub xi_end: f64,
    pub n: usize,
    pub seed: u64,
    pub level: usize,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Numerics {
    pub t_start: f64,
    pub t_end: f64,
    pub n_steps: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub sample_every: usize,
    pub t_eval: f64,
    pub fidelity_tol: f64,
    pub endpoint_fidelity_tol: f64,
    pub cd_fidelity_tol: f64,
    pub invariant_tol: f64,
    pub continuity_tol: f64,
    pub hj_tol: f64,
    pub endpoint_tol: f64,
    pub newton_tol: f64,
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub spot_tol: f64,
    pub norm_tol: f64,
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Output {
    pub dir: PathBuf,
}

/// Fully defaulted, validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub kind: Kind,
    pub physics: Physics,
    pub numerics: Numerics,
    pub output: Output,
}

impl ScenarioConfig {
    /// Defaults for `kind`, as produced by a config holding only `kind`.
    pub fn defaults(kind: Kind) -> Self {
        let physics = Physics {
            c: 1.0,
            gamma: 2.0,
            varphi: 0.0,
            mass: 1.0,
            omega: 1.0,
            shift: 1.0,
            xi_start: 1.0,
            xi_end: 2.0,
            n: 3,
            seed: 0,
            level: 0,
            terms: Vec::new(),
        };
        let mut numerics = Numerics {
            t_start: 0.0,
            t_end: 6.0,
            n_steps: 12000,
            x_min: -12.0,
            x_max: 12.0,
            n_points: 1024,
            sample_every: 100,
            t_eval: 2.0,
            fidelity_tol: 1e-6,
            endpoint_fidelity_tol: 1e-4,
            cd_fidelity_tol: 1e-6,
            invariant_tol: 1e-5,
            continuity_tol: 1e-8,
            hj_tol: 1e-8,
            endpoint_tol: 1e-6,
            newton_tol: 1e-10,
            max_iterations: 50,
            residual_tol: 1e-8,
            spot_tol: 1e-10,
            norm_tol: 1e-8,
            rtol: 1e-10,
            atol: 1e-12,
        };
        match kind {
            Kind::TwolevelCubic => {}
            Kind::TwolevelAxis => numerics.n_steps = 6000,
            Kind::Transport1d | Kind::Dilatation1d => {
                numerics.t_end = 4.0;
                numerics.n_steps = 4000;
                numerics.fidelity_tol = 1e-3;
                if kind == Kind::Dilatation1d {
                    numerics.x_min = -16.0;
                    numerics.x_max = 16.0;
                }
            }
            Kind::HydrogenCheck => {
                numerics.t_end = 4.0;
                numerics.n_steps = 4000;
                numerics.x_min = 0.01;
                numerics.x_max = 10.0;
                numerics.n_points = 2000;
                numerics.residual_tol = 1e-3;
            }
            Kind::Nlevel | Kind::Custom => {
                numerics.t_end = 10.0;
                numerics.n_steps = 1000;
                numerics.fidelity_tol = 1e-3;
                numerics.endpoint_fidelity_tol = 1e-3;
                numerics.cd_fidelity_tol = 1e-3;
            }
        }
        if kind == Kind::Custom {
            numerics.t_end = 1.0;
        }
        ScenarioConfig { kind, physics, numerics, output: Output { dir: PathBuf::from("out") } }
    }

    /// The config as JSON, restricted to the keys `kind` reads.
    pub fn echo(&self) -> serde_json::Value {
        let full = serde_json::to_value(self).expect("config serializes");
        let pick = |section: &serde_json::Value, keys: &[&str]| {
            let mut out = serde_json::Map::new();
            for key in keys {
                let source = match (self.kind, *key) {
                    (_, "dt") => continue,
                    (Kind::HydrogenCheck, "r_min") => "x_min",
                    (Kind::HydrogenCheck, "r_max") => "x_max",
                    _ => key,
                };
                if let Some(v) = section.get(source) {
                    out.insert(key.to_string(), v.clone());
                }
            }
            out
        };
        let mut top = pick(&full["physics"], self.kind.physics_keys());
        top.insert("kind".into(), full["kind"].clone());
        top.insert("numerics".into(), pick(&full["numerics"], self.kind.numerics_keys()).into());
        top.insert("output".into(), full["output"].clone());
        top.into()
    }

    pub fn mesh(&self) -> unideform::Result<unideform::Mesh> {
        unideform::Mesh::new(self.numerics.t_start, self.numerics.t_end, self.numerics.n_steps)
    }
}

/// One problem found in a config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{} invalid field(s): {}", .0.len(), .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

impl ConfigError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ConfigError::Invalid(v) => v,
            ConfigError::Syntax { .. } => &[],
        }
    }
}

/// Parses TOML text, reporting syntax errors with 1-based line and column.
pub fn parse_table(text: &str) -> Result<Table, ConfigError> {
    text.parse::<Table>().map_err(|e| {
        let offset = e.span().map(|s| s.start).unwrap_or(0).min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = offset - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        ConfigError::Syntax { line, column, message: e.message().trim().to_string() }
    })
}

/// Applies a `key=value` override. `key` may be dotted (`numerics.n_steps`);
/// `value` is read as a TOML value, falling back to a plain string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), ConfigError> {
    let invalid = |message: String| ConfigError::Invalid(vec![Violation { field: assignment.to_string(), message }]);
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| invalid("override must look like key=value".into()))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or(Value::String(raw.into())),
        Err(_) => Value::String(raw.to_string()),
    };
    let mut parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) || parts.len() > 2 {
        return Err(invalid(format!("bad key '{key}'")));
    }
    let leaf = parts.pop().unwrap();
    let target = match parts.first() {
        None => table,
        Some(section) => {
            let entry = table.entry(section.to_string()).or_insert_with(|| Value::Table(Table::new()));
            match entry {
                Value::Table(t) => t,
                _ => return Err(invalid(format!("'{section}' is not a section"))),
            }
        }
    };
    target.insert(leaf.to_string(), value);
    Ok(())
}

/// Parses and validates config text.
pub fn validate_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    validate_table(&parse_table(text)?)
}

struct Reader<'a> {
    table: Option<&'a Table>,
    section: &'static str,
    allowed: &'static [&'static str],
    errors: &'a mut Vec<Violation>,
}

impl<'a> Reader<'a> {
    fn field(&self, key: &str) -> String {
        if self.section.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.section)
        }
    }

    fn fail(&mut self, key: &str, message: impl Into<String>) {
        let field = self.field(key);
        self.errors.push(Violation { field, message: message.into() });
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        if !self.allowed.contains(&key) {
            return None;
        }
        self.table.and_then(|t| t.get(key))
    }

    fn float(&mut self, key: &str, target: &mut f64, check: impl Fn(f64) -> Option<&'static str>) {
        let Some(v) = self.get(key) else { return };
        let x = match v {
            Value::Float(x) => *x,
            Value::Integer(i) => *i as f64,
            other => return self.fail(key, format!("expected a number, found {}", other.type_str())),
        };
        if !x.is_finite() {
            return self.fail(key, "must be finite");
        }
        match check(x) {
            Some(msg) => self.fail(key, format!("{msg} (got {x})")),
            None => *target = x,
        }
    }

    fn integer(&mut self, key: &str, target: &mut i64, check: impl Fn(i64) -> Option<&'static str>) {
        let Some(v) = self.get(key) else { return };
        let x = match v {
            Value::Integer(i) => *i,
            other => return self.fail(key, format!("expected an integer, found {}", other.type_str())),
        };
        match check(x) {
            Some(msg) => self.fail(key, format!("{msg} (got {x})")),
            None => *target = x,
        }
    }

    fn size(&mut self, key: &str, target: &mut usize, min: usize, msg: &'static str) {
        let mut x = *target as i64;
        self.integer(key, &mut x, |v| (v < min as i64).then_some(msg));
        *target = x as usize;
    }

    fn unknown_keys(&mut self, extra_known: &[&str], kind: Option<Kind>) {
        let Some(table) = self.table else { return };
        for key in table.keys() {
            if self.allowed.contains(&key.as_str()) || extra_known.contains(&key.as_str()) {
                continue;
            }
            let known_elsewhere = if self.section.is_empty() {
                ALL_TOP_KEYS.contains(&key.as_str())
            } else {
                Kind::ALL.iter().any(|k| k.numerics_keys().contains(&key.as_str()))
            };
            match (known_elsewhere, kind) {
                (true, Some(k)) => self.fail(key, format!("not used by kind '{k}'")),
                _ => self.fail(key, "unknown key"),
            }
        }
    }
}

fn positive(x: f64) -> Option<&'static str> {
    (x <= 0.0).then_some("must be positive")
}

fn any(_: f64) -> Option<&'static str> {
    None
}

fn section<'a>(table: &'a Table, name: &str, errors: &mut Vec<Violation>) -> Option<&'a Table> {
    match table.get(name) {
        None => None,
        Some(Value::Table(t)) => Some(t),
        Some(other) => {
            errors.push(Violation { field: name.into(), message: format!("expected a section, found {}", other.type_str()) });
            None
        }
    }
}

fn read_terms(value: Option<&Value>, errors: &mut Vec<Violation>) -> Vec<Term> {
    let mut fail = |field: String, message: String| errors.push(Violation { field, message });
    let Some(value) = value else {
        fail("terms".into(), "required for kind 'custom'".into());
        return Vec::new();
    };
    let Value::Array(items) = value else {
        fail("terms".into(), format!("expected an array of tables, found {}", value.type_str()));
        return Vec::new();
    };
    if items.is_empty() {
        fail("terms".into(), "needs at least one term".into());
    }
    let numbers = |v: &Value| -> Option<Vec<f64>> {
        v.as_array()?
            .iter()
            .map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)).filter(|x| x.is_finite()))
            .collect()
    };
    let mut terms = Vec::new();
    let mut dim = None;
    for (i, item) in items.iter().enumerate() {
        let field = |k: &str| format!("terms[{i}].{k}");
        let Some(t) = item.as_table() else {
            fail(format!("terms[{i}]"), "expected a table with coeffs and matrix".into());
            continue;
        };
        for key in t.keys().filter(|k| *k != "coeffs" && *k != "matrix") {
            fail(field(key), "unknown key".into());
        }
        let coeffs = match t.get("coeffs").map(numbers) {
            Some(Some(c)) if !c.is_empty() => Some(c),
            Some(_) => {
                fail(field("coeffs"), "expected a non-empty array of numbers".into());
                None
            }
            None => {
                fail(field("coeffs"), "missing".into());
                None
            }
        };
        let rows: Option<Vec<Vec<f64>>> = match t.get("matrix") {
            None => {
                fail(field("matrix"), "missing".into());
                None
            }
            Some(m) => m.as_array().and_then(|rows| rows.iter().map(numbers).collect()),
        };
        let matrix = match rows {
            Some(rows) => {
                let n = rows.len();
                if n < 2 || rows.iter().any(|r| r.len() != n) {
                    fail(field("matrix"), "expected a square array of numbers with at least two rows".into());
                    None
                } else if (0..n).any(|a| (0..a).any(|b| (rows[a][b] - rows[b][a]).abs() > 1e-12)) {
                    fail(field("matrix"), "must be symmetric".into());
                    None
                } else if dim.is_some_and(|d| d != n) {
                    fail(field("matrix"), format!("size {n} differs from the first term ({})", dim.unwrap()));
                    None
                } else {
                    dim = Some(n);
                    Some(rows)
                }
            }
            None if t.contains_key("matrix") => {
                fail(field("matrix"), "expected a square array of numbers".into());
                None
            }
            None => None,
        };
        if let (Some(coeffs), Some(matrix)) = (coeffs, matrix) {
            terms.push(Term { coeffs, matrix });
        }
    }
    terms
}

/// Validates a parsed table, collecting every violation.
pub fn validate_table(table: &Table) -> Result<ScenarioConfig, ConfigError> {
    let mut errors = Vec::new();
    let kind = match table.get("kind") {
        None => {
            errors.push(Violation { field: "kind".into(), message: "missing".into() });
            None
        }
        Some(Value::String(s)) => match Kind::parse(s) {
            Some(k) => Some(k),
            None => {
                let names: Vec<&str> = Kind::ALL.iter().map(|k| k.name()).collect();
                errors.push(Violation {
                    field: "kind".into(),
                    message: format!("unknown scenario kind '{s}' (expected one of {})", names.join(", ")),
                });
                None
            }
        },
        Some(other) => {
            errors.push(Violation { field: "kind".into(), message: format!("expected a string, found {}", other.type_str()) });
            None
        }
    };
    let Some(kind) = kind else {
        return Err(ConfigError::Invalid(errors));
    };

    let mut cfg = ScenarioConfig::defaults(kind);
    let numerics_table = section(table, "numerics", &mut errors);
    let output_table = section(table, "output", &mut errors);

    let physics_keys = kind.physics_keys();
    let mut top = Reader { table: Some(table), section: "", allowed: physics_keys, errors: &mut errors };
    let p = &mut cfg.physics;
    let gamma_check = if kind.is_two_level() { positive } else { any };
    top.float("c", &mut p.c, any);
    top.float("gamma", &mut p.gamma, gamma_check);
    top.float("varphi", &mut p.varphi, |x| (x.abs() >= std::f64::consts::FRAC_PI_2).then_some("must lie in (-pi/2, pi/2)"));
    top.float("mass", &mut p.mass, positive);
    top.float("omega", &mut p.omega, positive);
    top.float("shift", &mut p.shift, any);
    top.float("xi_start", &mut p.xi_start, positive);
    top.float("xi_end", &mut p.xi_end, positive);
    top.size("n", &mut p.n, 2, "must be at least 2");
    let mut seed = p.seed as i64;
    top.integer("seed", &mut seed, |s| (s < 0).then_some("must be nonnegative"));
    p.seed = seed as u64;
    top.size("level", &mut p.level, 0, "must be nonnegative");
    top.unknown_keys(&["kind", "numerics", "output"], Some(kind));
    if kind == Kind::Custom {
        p.terms = read_terms(table.get("terms"), &mut errors);
    }

    let mut num = Reader { table: numerics_table, section: "numerics", allowed: kind.numerics_keys(), errors: &mut errors };
    let n = &mut cfg.numerics;
    num.float("t_start", &mut n.t_start, any);
    num.float("t_end", &mut n.t_end, any);
    num.size("n_steps", &mut n.n_steps, 2, "must be at least 2");
    let mut dt = None;
    if num.get("dt").is_some() {
        let mut x = 0.0;
        num.float("dt", &mut x, positive);
        if x > 0.0 {
            dt = Some(x);
        }
        if num.get("n_steps").is_some() {
            num.fail("dt", "give either dt or n_steps, not both");
            dt = None;
        }
    }
    num.float("x_min", &mut n.x_min, any);
    num.float("x_max", &mut n.x_max, any);
    num.float("r_min", &mut n.x_min, |x| (x <= 0.0).then_some("must be positive"));
    num.float("r_max", &mut n.x_max, positive);
    num.size("n_points", &mut n.n_points, 8, "must be at least 8");
    num.size("sample_every", &mut n.sample_every, 0, "must be nonnegative");
    let t_eval_given = num.get("t_eval").is_some();
    num.float("t_eval", &mut n.t_eval, any);
    for (key, slot) in [
        ("fidelity_tol", &mut n.fidelity_tol),
        ("endpoint_fidelity_tol", &mut n.endpoint_fidelity_tol),
        ("cd_fidelity_tol", &mut n.cd_fidelity_tol),
        ("invariant_tol", &mut n.invariant_tol),
        ("continuity_tol", &mut n.continuity_tol),
        ("hj_tol", &mut n.hj_tol),
        ("endpoint_tol", &mut n.endpoint_tol),
        ("newton_tol", &mut n.newton_tol),
        ("residual_tol", &mut n.residual_tol),
        ("spot_tol", &mut n.spot_tol),
        ("norm_tol", &mut n.norm_tol),
        ("rtol", &mut n.rtol),
        ("atol", &mut n.atol),
    ] {
        num.float(key, slot, positive);
    }
    num.size("max_iterations", &mut n.max_iterations, 1, "must be at least 1");
    num.unknown_keys(&[], Some(kind));

    let mut out = Reader { table: output_table, section: "output", allowed: &["dir"], errors: &mut errors };
    if let Some(v) = out.get("dir") {
        match v.as_str() {
            Some(s) if !s.is_empty() => cfg.output.dir = PathBuf::from(s),
            _ => out.fail("dir", "expected a non-empty path string"),
        }
    }
    out.unknown_keys(&[], None);

    let n = &mut cfg.numerics;
    let bad = |field: &str, message: String| Violation { field: field.into(), message };
    if !(n.t_end > n.t_start) {
        errors.push(bad("numerics.t_end", format!("must exceed t_start ({} <= {})", n.t_end, n.t_start)));
    } else if let Some(dt) = dt {
        let steps = ((n.t_end - n.t_start) / dt).round();
        if steps < 2.0 || !steps.is_finite() {
            errors.push(bad("numerics.dt", format!("gives fewer than 2 steps on [{}, {}]", n.t_start, n.t_end)));
        } else {
            n.n_steps = steps as usize;
        }
    }
    if !(n.x_max > n.x_min) {
        let name = if kind == Kind::HydrogenCheck { "numerics.r_max" } else { "numerics.x_max" };
        errors.push(bad(name, format!("must exceed the lower bound ({} <= {})", n.x_max, n.x_min)));
    }
    if kind == Kind::HydrogenCheck {
        if !t_eval_given {
            n.t_eval = 0.5 * (n.t_start + n.t_end);
        } else if !(n.t_eval >= n.t_start && n.t_eval <= n.t_end) {
            errors.push(bad("numerics.t_eval", format!("must lie in [{}, {}]", n.t_start, n.t_end)));
        }
    }
    if kind == Kind::Nlevel && cfg.physics.level >= cfg.physics.n {
        errors.push(bad("level", format!("must be below n = {}", cfg.physics.n)));
    }
    if kind == Kind::Custom {
        if let Some(t) = cfg.physics.terms.first() {
            if cfg.physics.level >= t.matrix.len() {
                errors.push(bad("level", format!("must be below the matrix size {}", t.matrix.len())));
            }
        }
    }

    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(errors))
    }
}
