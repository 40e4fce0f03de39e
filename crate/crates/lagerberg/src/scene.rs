//! Scenes: a fan, named objects and an ordered task list, run into a report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lagerberg_core::complex::WeightedComplex;
use lagerberg_core::correspondence::{compat_checks, complex_positivity_check, lift, round_trip_verify, InvariantComplexCurrent, RoundTrip};
use lagerberg_core::currents::{
    double_exponential_current, exponential_current, exponential_square_current, integration_current, weakly_positive_derivative,
    weakly_positive_lebesgue, CFinite, ClosednessOptions, CurrentVerdict, LagerbergCurrent, PositivityOptions,
};
use lagerberg_core::fan::Fan;
use lagerberg_core::fiber::{ComplexForm, LagerbergForm};
use lagerberg_core::field::{trop_pullback_field, LagerbergFormField};
use lagerberg_core::measures::Domain;
use lagerberg_core::positivity::{complex_positivity_verdict, positivity_verdict, weak_not_positive_form, VerdictOptions};
use lagerberg_core::Error;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::format::{
    self, complex_form_json, complex_json, current_json, domain_json, form_json, rat_vec, shadow_json, AnyCurrent, AnyForm, ComplexSpec,
    CurrentSpec, DomainSpec, FanSpec, FieldSpec, FormSpec, FormatError, Q,
};
use crate::suite;
use crate::witness;

/// Why a scene could not be run; both map to exit code 2.
#[derive(Debug)]
pub enum SceneError {
    Parse(String),
    Validation(String),
}

impl std::fmt::Display for SceneError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SceneError::Parse(m) => write!(f, "parse error: {m}"),
            SceneError::Validation(m) => write!(f, "validation error: {m}"),
        }
    }
}

impl std::error::Error for SceneError {}

impl From<FormatError> for SceneError {
    fn from(e: FormatError) -> Self {
        SceneError::Validation(e.0)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum FanRef {
    Path(String),
    Inline(FanSpec),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectSpec {
    Form(FormSpec),
    Field(FieldSpec),
    Current(CurrentSpec),
    Shadow(CurrentSpec),
    Complex(ComplexSpec),
    IntegrationCurrent {
        complex: ComplexSpec,
        #[serde(default)]
        domain: Option<DomainSpec>,
    },
    Domain(DomainSpec),
    Builtin {
        name: String,
    },
}

#[derive(Clone, Debug)]
pub enum Object {
    Form(LagerbergForm),
    ComplexForm(ComplexForm),
    Field(LagerbergFormField),
    Current(LagerbergCurrent),
    Shadow(InvariantComplexCurrent),
    Complex(WeightedComplex),
    Domain(Domain),
}

impl Object {
    fn kind(&self) -> &'static str {
        match self {
            Object::Form(_) => "form",
            Object::ComplexForm(_) => "complex form",
            Object::Field(_) => "field",
            Object::Current(_) => "current",
            Object::Shadow(_) => "shadow",
            Object::Complex(_) => "complex",
            Object::Domain(_) => "domain",
        }
    }
}

pub const BUILTINS: [&str; 7] = [
    "exponential_square",
    "exponential",
    "double_exponential_derivative",
    "weakly_positive_lebesgue",
    "weakly_positive_derivative",
    "fixed_point_mass",
    "weak_not_positive_form",
];

fn builtin(name: &str) -> Option<Object> {
    Some(match name {
        "exponential_square" => Object::Current(exponential_square_current()),
        "exponential" => Object::Current(exponential_current()),
        "double_exponential_derivative" => Object::Current(double_exponential_current()),
        "weakly_positive_lebesgue" => Object::Current(weakly_positive_lebesgue()),
        "weakly_positive_derivative" => Object::Current(weakly_positive_derivative()),
        "fixed_point_mass" => Object::Shadow(InvariantComplexCurrent::fixed_point_mass()),
        "weak_not_positive_form" => Object::Form(weak_not_positive_form()),
        _ => return None,
    })
}

impl ObjectSpec {
    pub fn build(&self) -> Result<Object, SceneError> {
        Ok(match self {
            ObjectSpec::Form(f) => match f.build()? {
                AnyForm::Lagerberg(f) => Object::Form(f),
                AnyForm::Complex(f) => Object::ComplexForm(f),
            },
            ObjectSpec::Field(f) => Object::Field(f.build()?),
            ObjectSpec::Current(c) => match c.build()? {
                AnyCurrent::Lagerberg(t) => Object::Current(t),
                AnyCurrent::Shadow(s) => Object::Shadow(s),
            },
            ObjectSpec::Shadow(c) => {
                let mut c = c.clone();
                c.shadow = true;
                match c.build()? {
                    AnyCurrent::Shadow(s) => Object::Shadow(s),
                    AnyCurrent::Lagerberg(_) => unreachable!("shadow marker set"),
                }
            }
            ObjectSpec::Complex(c) => Object::Complex(c.build()?),
            ObjectSpec::IntegrationCurrent { complex, domain } => {
                let c = complex.build()?;
                let dom = match domain {
                    Some(d) => d.build()?,
                    None => Domain::torus(c.n(), 0),
                };
                Object::Current(integration_current(&c, dom).map_err(|e| SceneError::Validation(e.to_string()))?)
            }
            ObjectSpec::Domain(d) => Object::Domain(d.build()?),
            ObjectSpec::Builtin { name } => builtin(name).ok_or_else(|| SceneError::Validation(format!("unknown builtin {name:?}")))?,
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TaskKind {
    LimitPoint {
        point: Vec<Q>,
        direction: Vec<Q>,
    },
    FormPositivity {
        form: String,
        #[serde(default = "default_tier")]
        tier: String,
        #[serde(default)]
        pool_size: Option<usize>,
    },
    Integrate {
        field: String,
    },
    CurrentPositivity {
        current: String,
    },
    Closedness {
        current: String,
    },
    CFinite {
        current: String,
        #[serde(default)]
        target: Option<String>,
    },
    Decompose {
        current: String,
    },
    Push {
        shadow: String,
    },
    Lift {
        current: String,
    },
    RoundTrip {
        #[serde(default)]
        currents: Vec<String>,
        /// Extra seeded closed positive currents added to the suite.
        #[serde(default)]
        random: usize,
    },
    Compat {
        shadow: String,
    },
    ElMir {
        current: String,
        target: String,
    },
    Balancing {
        complex: String,
    },
    Counterexamples {},
}

fn default_tier() -> String {
    "positive".into()
}

#[derive(Clone, Debug, Deserialize)]
pub struct Task {
    #[serde(flatten)]
    pub kind: TaskKind,
    #[serde(default)]
    pub expect: Option<Value>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
}

impl Task {
    pub fn new(kind: TaskKind) -> Task {
        Task { kind, expect: None, tol: None, seed: None, samples: None }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            TaskKind::LimitPoint { .. } => "limit_point",
            TaskKind::FormPositivity { .. } => "form_positivity",
            TaskKind::Integrate { .. } => "integrate",
            TaskKind::CurrentPositivity { .. } => "current_positivity",
            TaskKind::Closedness { .. } => "closedness",
            TaskKind::CFinite { .. } => "c_finite",
            TaskKind::Decompose { .. } => "decompose",
            TaskKind::Push { .. } => "push",
            TaskKind::Lift { .. } => "lift",
            TaskKind::RoundTrip { .. } => "round_trip",
            TaskKind::Compat { .. } => "compat",
            TaskKind::ElMir { .. } => "el_mir",
            TaskKind::Balancing { .. } => "balancing",
            TaskKind::Counterexamples {} => "counterexamples",
        }
    }

    fn refs(&self) -> Vec<&str> {
        match &self.kind {
            TaskKind::LimitPoint { .. } | TaskKind::Counterexamples {} => vec![],
            TaskKind::FormPositivity { form, .. } => vec![form],
            TaskKind::Integrate { field } => vec![field],
            TaskKind::CurrentPositivity { current }
            | TaskKind::Closedness { current }
            | TaskKind::Decompose { current }
            | TaskKind::Lift { current } => vec![current],
            TaskKind::CFinite { current, target } => std::iter::once(current.as_str()).chain(target.as_deref()).collect(),
            TaskKind::Push { shadow } | TaskKind::Compat { shadow } => vec![shadow],
            TaskKind::RoundTrip { currents, .. } => currents.iter().map(String::as_str).collect(),
            TaskKind::ElMir { current, target } => vec![current, target],
            TaskKind::Balancing { complex } => vec![complex],
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default)]
    pub fan: Option<FanRef>,
    #[serde(default)]
    pub objects: BTreeMap<String, ObjectSpec>,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
}

/// Run parameters; explicit command-line values override the scene's.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub timings: bool,
}

pub const DEFAULT_TOL: f64 = 1e-8;

/// A parsed and validated scene.
#[derive(Clone, Debug)]
pub struct Scene {
    pub fan: Option<Fan>,
    pub objects: BTreeMap<String, Object>,
    pub tasks: Vec<Task>,
    pub tol: f64,
    pub seed: u64,
    pub samples: Option<usize>,
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, SceneError> {
    serde_json::from_str(text).map_err(|e| SceneError::Parse(e.to_string()))
}

pub fn read_file(path: &Path) -> Result<String, SceneError> {
    std::fs::read_to_string(path).map_err(|e| SceneError::Parse(format!("{}: {e}", path.display())))
}

impl Scene {
    /// Parses a scene; a fan given by path is read relative to `base`.
    pub fn from_str(text: &str, base: Option<&Path>, settings: &Settings) -> Result<Scene, SceneError> {
        let spec: SceneSpec = parse_json(text)?;
        Scene::from_spec(spec, base, settings)
    }

    pub fn from_file(path: &Path, settings: &Settings) -> Result<Scene, SceneError> {
        let text = read_file(path)?;
        Scene::from_str(&text, path.parent(), settings)
    }

    pub fn from_spec(spec: SceneSpec, base: Option<&Path>, settings: &Settings) -> Result<Scene, SceneError> {
        let fan = match spec.fan {
            None => None,
            Some(FanRef::Inline(f)) => Some(f.build()?),
            Some(FanRef::Path(p)) => {
                let path: PathBuf = base.map_or_else(|| PathBuf::from(&p), |b| b.join(&p));
                let f: FanSpec = parse_json(&read_file(&path)?)?;
                Some(f.build()?)
            }
        };
        let mut objects = BTreeMap::new();
        for (name, o) in &spec.objects {
            let obj = o.build().map_err(|e| match e {
                SceneError::Validation(m) => SceneError::Validation(format!("object {name:?}: {m}")),
                e => e,
            })?;
            objects.insert(name.clone(), obj);
        }
        let scene = Scene {
            fan,
            objects,
            tasks: spec.tasks,
            tol: settings.tol.or(spec.tol).unwrap_or(DEFAULT_TOL),
            seed: settings.seed.or(spec.seed).unwrap_or(0),
            samples: settings.samples.or(spec.samples),
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Validates a scene assembled in code rather than parsed.
    pub fn validate_assembled(scene: Scene) -> Result<Scene, SceneError> {
        scene.validate()?;
        Ok(scene)
    }

    /// References resolve to objects of the right kind; charts fit the fan.
    fn validate(&self) -> Result<(), SceneError> {
        if !(self.tol > 0.0) {
            return Err(SceneError::Validation("tolerance must be positive".into()));
        }
        for (ix, t) in self.tasks.iter().enumerate() {
            for r in t.refs() {
                if !self.objects.contains_key(r) && builtin(r).is_none() {
                    return Err(SceneError::Validation(format!("task {ix} ({}) refers to unknown object {r:?}", t.name())));
                }
            }
            let want = |name: &str, kinds: &[&str]| -> Result<(), SceneError> {
                let o = self.object(name).expect("checked above");
                if kinds.contains(&o.kind()) {
                    Ok(())
                } else {
                    Err(SceneError::Validation(format!("task {ix} ({}) needs a {} for {name:?}, found a {}", t.name(), kinds.join(" or "), o.kind())))
                }
            };
            match &t.kind {
                TaskKind::LimitPoint { point, direction } => {
                    let Some(f) = &self.fan else {
                        return Err(SceneError::Validation(format!("task {ix} (limit_point) needs a fan")));
                    };
                    if point.len() != f.rank() || direction.len() != f.rank() {
                        return Err(SceneError::Validation(format!("task {ix} (limit_point): vectors must have length {}", f.rank())));
                    }
                }
                TaskKind::FormPositivity { form, tier, .. } => {
                    want(form, &["form", "complex form"])?;
                    if witness::parse_tier(tier).is_none() {
                        return Err(SceneError::Validation(format!("task {ix}: unknown tier {tier:?}")));
                    }
                }
                TaskKind::Integrate { field } => want(field, &["field"])?,
                TaskKind::CurrentPositivity { current } => want(current, &["current", "shadow"])?,
                TaskKind::Closedness { current } | TaskKind::Decompose { current } | TaskKind::Lift { current } => want(current, &["current"])?,
                TaskKind::CFinite { current, target } => {
                    want(current, &["current"])?;
                    if let Some(d) = target {
                        want(d, &["domain"])?;
                    }
                }
                TaskKind::Push { shadow } | TaskKind::Compat { shadow } => want(shadow, &["shadow"])?,
                TaskKind::RoundTrip { currents, .. } => currents.iter().try_for_each(|c| want(c, &["current"]))?,
                TaskKind::ElMir { current, target } => {
                    want(current, &["current"])?;
                    want(target, &["domain"])?;
                }
                TaskKind::Balancing { complex } => want(complex, &["complex"])?,
                TaskKind::Counterexamples {} => {}
            }
        }
        if let Some(f) = &self.fan {
            let top = f.cones().iter().map(|c| c.dim()).max().unwrap_or(0);
            for (name, o) in &self.objects {
                let chart = match o {
                    Object::Current(t) => Some(t.domain()),
                    Object::Shadow(s) => Some(s.domain()),
                    Object::Domain(d) => Some(d),
                    _ => None,
                };
                if let Some(d) = chart {
                    if d.n != f.rank() || d.k > top {
                        return Err(SceneError::Validation(format!(
                            "object {name:?} lives on a chart with {} infinite axes in rank {}, which the fan has no cone for",
                            d.k, d.n
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn object(&self, name: &str) -> Option<Object> {
        self.objects.get(name).cloned().or_else(|| builtin(name))
    }

    /// Runs every task in order.
    pub fn run(&self, timings: bool) -> Report {
        let records = self.tasks.iter().enumerate().map(|(ix, t)| self.run_task(ix, t, timings)).collect();
        Report { tol: self.tol, seed: self.seed, records }
    }

    fn run_task(&self, index: usize, task: &Task, timings: bool) -> Record {
        let seed = task.seed.unwrap_or(self.seed);
        let tol = task.tol.unwrap_or(self.tol);
        let samples = task.samples.or(self.samples);
        let popts = PositivityOptions { samples: samples.unwrap_or(64), tol, seed, ..PositivityOptions::default() };
        let copts = ClosednessOptions { samples: samples.unwrap_or(100), tol, seed };
        let start = Instant::now();
        let (verdict, details) = match self.execute(task, tol, seed, &popts, &copts) {
            Ok(v) => v,
            Err(e) => (json!("error"), json!({"message": e.to_string()})),
        };
        let elapsed_ms = timings.then(|| start.elapsed().as_secs_f64() * 1e3);
        let matched = task.expect.as_ref().map(|e| *e == verdict);
        Record { index, task: task.name(), target: task.refs().join(","), verdict, expect: task.expect.clone(), matched, seed, details, elapsed_ms }
    }

    fn current(&self, name: &str) -> LagerbergCurrent {
        match self.object(name) {
            Some(Object::Current(t)) => t,
            _ => unreachable!("validated"),
        }
    }

    fn shadow(&self, name: &str) -> InvariantComplexCurrent {
        match self.object(name) {
            Some(Object::Shadow(s)) => s,
            _ => unreachable!("validated"),
        }
    }

    fn domain(&self, name: &str) -> Domain {
        match self.object(name) {
            Some(Object::Domain(d)) => d,
            _ => unreachable!("validated"),
        }
    }

    fn execute(&self, task: &Task, tol: f64, seed: u64, popts: &PositivityOptions, copts: &ClosednessOptions) -> lagerberg_core::Result<(Value, Value)> {
        let s = |(v, d): (&str, Value)| (json!(v), d);
        Ok(match &task.kind {
            TaskKind::LimitPoint { point, direction } => {
                let fan = self.fan.as_ref().expect("validated");
                let p: Vec<_> = point.iter().map(|x| x.0.clone()).collect();
                let v: Vec<_> = direction.iter().map(|x| x.0.clone()).collect();
                let x = fan.limit_point(&p, &v)?;
                let cone = fan.cone(x.stratum)?;
                (json!({"cone": cone.generators, "coords": rat_vec(&x.coords)}), json!({"stratum_id": x.stratum}))
            }
            TaskKind::FormPositivity { form, tier, pool_size } => {
                let tier = witness::parse_tier(tier).expect("validated");
                match self.object(form) {
                    Some(Object::Form(f)) => {
                        let mut vo = VerdictOptions { seed, ..VerdictOptions::default() };
                        if let Some(p) = pool_size {
                            vo.pool_size = *p;
                        }
                        let v = positivity_verdict(&f, tier, &vo)?;
                        s(witness::form_verdict(&v, &|f| form_json(f), &|x| format::rat(x)))
                    }
                    Some(Object::ComplexForm(f)) => {
                        let v = complex_positivity_verdict(&f, tier)?;
                        s(witness::form_verdict(&v, &|f| complex_form_json(f), &witness::gaussian))
                    }
                    _ => unreachable!("validated"),
                }
            }
            TaskKind::Integrate { field } => {
                let Some(Object::Field(f)) = self.object(field) else { unreachable!("validated") };
                let trop = f.integrate_top(tol)?;
                let cplx = trop_pullback_field(&f.dense_table()).integrate_top(tol)?;
                let agree = (trop - cplx).abs() <= 2.0 * tol;
                (json!(if agree { "agree" } else { "disagree" }), json!({"tropical": trop, "complex": cplx, "difference": (trop - cplx).abs()}))
            }
            TaskKind::CurrentPositivity { current } => match self.object(current) {
                Some(Object::Current(t)) => s(witness::current_verdict(&t.positivity_check(popts)?)),
                Some(Object::Shadow(sh)) => s(witness::current_verdict(&complex_positivity_check(&sh, popts)?)),
                _ => unreachable!("validated"),
            },
            TaskKind::Closedness { current } => s(witness::closedness(&self.current(current).closedness_test(copts)?)),
            TaskKind::CFinite { current, target } => {
                let t = self.current(current);
                let c = match target {
                    Some(d) => t.c_finite_test_in(&self.domain(d))?,
                    None => t.c_finite_test()?,
                };
                s(witness::c_finite(&c))
            }
            TaskKind::Decompose { current } => {
                let t = self.current(current);
                let parts = t.canonical_decomposition()?;
                let mut sum = LagerbergCurrent::zero(t.domain().clone(), t.p());
                let mut out = Vec::new();
                for (l, part) in &parts {
                    sum = sum.add(part)?;
                    let (pv, _) = witness::current_verdict(&part.positivity_check(popts)?);
                    out.push(json!({"stratum": format::mask(*l), "positivity": pv, "current": current_json(part)}));
                }
                let exact = sum.cocoefficients().eq(t.cocoefficients());
                (json!(if exact { "exact" } else { "mismatch" }), json!({"parts": out}))
            }
            TaskKind::Push { shadow } => {
                let t = self.shadow(shadow).push_forward()?;
                (json!(if t.is_zero() { "zero" } else { "nonzero" }), json!({"current": current_json(&t)}))
            }
            TaskKind::Lift { current } => match lift(&self.current(current), popts) {
                Ok(sh) => (json!("lifted"), json!({"shadow": shadow_json(&sh)})),
                Err(Error::NotPositive(why)) => (json!("rejected"), json!({"reason": "not positive", "message": why})),
                Err(Error::NotCFinite(w)) => (json!("rejected"), json!({"reason": "no C-finite mass", "witness": witness::ray_witness(&w)})),
                Err(e) => return Err(e),
            },
            TaskKind::RoundTrip { currents, random } => {
                let mut items: Vec<(String, LagerbergCurrent)> = currents.iter().map(|c| (c.clone(), self.current(c))).collect();
                let mut rng = suite::rng(seed);
                for i in 0..*random {
                    items.push((format!("random#{i}"), suite::random_closed_positive(&mut rng)?));
                }
                let suite_currents: Vec<_> = items.iter().map(|(_, t)| t.clone()).collect();
                let results = round_trip_verify(&suite_currents, popts);
                let failed: Vec<Value> = items
                    .iter()
                    .zip(&results)
                    .filter_map(|((name, _), r)| match r {
                        RoundTrip::Exact => None,
                        RoundTrip::Failed(why) => Some(json!({"current": name, "reason": why})),
                    })
                    .collect();
                (json!(if failed.is_empty() { "exact" } else { "failed" }), json!({"size": items.len(), "failures": failed}))
            }
            TaskKind::Compat { shadow } => {
                let r = compat_checks(&self.shadow(shadow), popts)?;
                (
                    json!(if r.all_pass() { "pass" } else { "fail" }),
                    json!({"decomposition": r.decomposition, "support": r.support, "top_degree": r.top_degree}),
                )
            }
            TaskKind::ElMir { current, target } => {
                let t = self.current(current);
                let dom = self.domain(target);
                match t.c_finite_test_in(&dom)? {
                    CFinite::Finite => {}
                    c => {
                        let (v, d) = witness::c_finite(&c);
                        return Ok((json!("rejected"), json!({"c_finite": v, "details": d})));
                    }
                }
                let ext = t.extend_by_zero(&dom)?;
                let (cv, cd) = witness::closedness(&ext.closedness_test(copts)?);
                let pos = ext.positivity_check(popts)?;
                let (pv, pd) = witness::current_verdict(&pos);
                let verdict = match (cv, pos) {
                    ("closed", CurrentVerdict::Positive) => "closed_positive",
                    ("closed", _) => "not_positive",
                    _ => "not_closed",
                };
                (
                    json!(verdict),
                    json!({"closedness": cv, "closedness_details": cd, "positivity": pv, "positivity_details": pd, "extension": current_json(&ext), "target": domain_json(&dom)}),
                )
            }
            TaskKind::Balancing { complex } => {
                let Some(Object::Complex(c)) = self.object(complex) else { unreachable!("validated") };
                let (v, d) = witness::balancing(&c.balancing_check());
                (json!(v), json!({"witness": d, "complex": complex_json(&c)}))
            }
            TaskKind::Counterexamples {} => {
                let checks = suite::counterexamples(popts, copts);
                let ok = checks.iter().all(|c| c.passed());
                (json!(if ok { "as_expected" } else { "deviates" }), json!({"checks": checks.iter().map(|c| c.to_json()).collect::<Vec<_>>()}))
            }
        })
    }
}

/// One task's outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub index: usize,
    pub task: &'static str,
    pub target: String,
    pub verdict: Value,
    pub expect: Option<Value>,
    /// `None` when the task declares no expectation.
    pub matched: Option<bool>,
    pub seed: u64,
    pub details: Value,
    pub elapsed_ms: Option<f64>,
}

impl Record {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "index": self.index,
            "task": self.task,
            "target": self.target,
            "verdict": self.verdict,
            "expect": self.expect,
            "matched": self.matched,
            "seed": self.seed,
            "details": self.details,
        });
        if let Some(t) = self.elapsed_ms {
            v["elapsed_ms"] = json!(t);
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub tol: f64,
    pub seed: u64,
    pub records: Vec<Record>,
}

impl Report {
    /// Every declared expectation met.
    pub fn all_matched(&self) -> bool {
        self.records.iter().all(|r| r.matched != Some(false))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tol": self.tol,
            "seed": self.seed,
            "all_matched": self.all_matched(),
            "records": self.records.iter().map(Record::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("values serialize");
        s.push('\n');
        s
    }

    /// One row per record; structured verdicts are written as compact JSON.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["index", "task", "target", "verdict", "expect", "matched", "seed"];
        let timed = self.records.iter().any(|r| r.elapsed_ms.is_some());
        if timed {
            header.push("elapsed_ms");
        }
        w.write_record(&header).expect("in-memory write");
        let flat = |v: &Value| match v {
            Value::String(s) => s.clone(),
            v => v.to_string(),
        };
        for r in &self.records {
            let mut row = vec![
                r.index.to_string(),
                r.task.to_string(),
                r.target.clone(),
                flat(&r.verdict),
                r.expect.as_ref().map(flat).unwrap_or_default(),
                r.matched.map(|m| m.to_string()).unwrap_or_default(),
                r.seed.to_string(),
            ];
            if timed {
                row.push(r.elapsed_ms.map(|t| format!("{t:.3}")).unwrap_or_default());
            }
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flushed")).expect("utf-8")
    }
}
