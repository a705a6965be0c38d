//! Declarative scenario files: parsing, execution and CSV output.
//!
//! A scenario is a flat list of `key = value` lines; `#` starts a comment.
//!
//! ```text
//! name = fig1
//! model.family = ising          # ising | xy | xy-gamma | ising-nnn
//! model.n = 7
//! model.j = pst                 # number, `pst`, or [j1, j2, ...]
//! drive.axis = z
//! drive.omega_scale = 100       # ω = scale · max|J| unless drive.omega is set
//! drive.target_a = 0            # g from J0(4g/ω) = A unless drive.g is set
//! task.kind = transfer          # transfer | concurrence
//! grid.kind = stroboscopic      # stroboscopic | uniform
//! grid.horizon = 3
//! runs = driven, effective, undriven
//! ```
//!
//! Couplings: `model.j` for ising, xy-gamma (with `model.gamma`) and
//! ising-nnn (with `model.l`); `model.jx` and `model.jy` for xy, where
//! `model.j` sets both. Any `noise.*` key enables noise (`axes`, `sigma`,
//! `mu`, `tau`, `trials`, `seed`, `concurrence_order`). Task keys: `basis`,
//! `initial` and `target` (bit strings, label 0 is the +1 eigenstate of
//! `σ_basis`), `pair` (`a, b`). Grid keys: `stride` (stroboscopic),
//! `samples` (uniform). Propagator keys: `steps_per_period`,
//! `convergence_tol`, `check_convergence`, `undriven_substep`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use crate::dynamics::{
    evolve_constant, evolve_driven, stroboscopic_times, EvolutionResult, PropagatorConfig, TimeGrid,
};
use crate::error::{Error, Result};
use crate::models::{
    build_static_hamiltonian, effective_hamiltonian, effective_terms, ChainFamily, ChainModel, CouplingProfile,
    DriveSpec,
};
use crate::noise::{evolve_noisy, evolve_noisy_terms, NoiseSpec};
use crate::observables::{fidelity_series, pair_concurrence, ConcurrenceOrder};
use crate::operators::{basis_product_state, Axis, PureState};

const KEYS: &[&str] = &[
    "name",
    "model.family",
    "model.n",
    "model.j",
    "model.jx",
    "model.jy",
    "model.gamma",
    "model.l",
    "drive.axis",
    "drive.omega",
    "drive.omega_scale",
    "drive.g",
    "drive.target_a",
    "noise.axes",
    "noise.sigma",
    "noise.mu",
    "noise.tau",
    "noise.trials",
    "noise.seed",
    "noise.concurrence_order",
    "task.kind",
    "task.basis",
    "task.initial",
    "task.target",
    "task.pair",
    "grid.kind",
    "grid.horizon",
    "grid.stride",
    "grid.samples",
    "propagator.steps_per_period",
    "propagator.convergence_tol",
    "propagator.check_convergence",
    "propagator.undriven_substep",
    "runs",
];

pub const DEFAULT_OMEGA_SCALE: f64 = 100.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub family: ChainFamily,
    pub n_sites: usize,
    pub jx: CouplingProfile,
    pub jy: CouplingProfile,
    pub gamma: f64,
    pub l: CouplingProfile,
}

impl ModelSpec {
    pub fn build(&self) -> Result<ChainModel> {
        match self.family {
            ChainFamily::Ising => ChainModel::ising(self.n_sites, &self.jx),
            ChainFamily::Xy => ChainModel::xy(self.n_sites, &self.jx, &self.jy),
            ChainFamily::XyGamma => ChainModel::xy_gamma(self.n_sites, &self.jx, self.gamma),
            ChainFamily::IsingNnn => ChainModel::ising_nnn(self.n_sites, &self.jx, &self.l),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskKind {
    Transfer,
    Concurrence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub basis: Axis,
    pub initial: Vec<u8>,
    /// Used by transfer tasks.
    pub target: Vec<u8>,
    /// Used by concurrence tasks.
    pub pair: (usize, usize),
}

impl TaskSpec {
    pub fn initial_state(&self) -> Result<PureState> {
        basis_product_state(self.initial.len(), &self.initial, self.basis)
    }

    pub fn target_state(&self) -> Result<PureState> {
        basis_product_state(self.target.len(), &self.target, self.basis)
    }

    pub fn observable(&self) -> String {
        match self.kind {
            TaskKind::Transfer => "fidelity".into(),
            TaskKind::Concurrence => format!("concurrence({},{})", self.pair.0, self.pair.1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridKind {
    Stroboscopic { stride: usize },
    Uniform { samples: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub kind: GridKind,
    pub horizon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunKind {
    Driven,
    Effective,
    Undriven,
    NoisyDriven,
    NoisyUndriven,
    NoisyEffective,
}

impl RunKind {
    pub const ALL: [RunKind; 6] = [
        RunKind::Driven,
        RunKind::Effective,
        RunKind::Undriven,
        RunKind::NoisyDriven,
        RunKind::NoisyUndriven,
        RunKind::NoisyEffective,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RunKind::Driven => "driven",
            RunKind::Effective => "effective",
            RunKind::Undriven => "undriven",
            RunKind::NoisyDriven => "noisy-driven",
            RunKind::NoisyUndriven => "noisy-undriven",
            RunKind::NoisyEffective => "noisy-effective",
        }
    }

    pub fn needs_drive(self) -> bool {
        matches!(
            self,
            RunKind::Driven | RunKind::Effective | RunKind::NoisyDriven | RunKind::NoisyEffective
        )
    }

    pub fn needs_noise(self) -> bool {
        matches!(
            self,
            RunKind::NoisyDriven | RunKind::NoisyUndriven | RunKind::NoisyEffective
        )
    }
}

impl FromStr for RunKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        RunKind::ALL
            .into_iter()
            .find(|r| r.label() == s)
            .ok_or_else(|| format!("unknown run `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub model: ModelSpec,
    pub drive: Option<DriveSpec>,
    pub noise: Option<NoiseSpec>,
    pub concurrence_order: ConcurrenceOrder,
    pub task: TaskSpec,
    pub grid: GridSpec,
    pub propagator: PropagatorConfig,
    pub runs: Vec<RunKind>,
}

impl Scenario {
    /// Multiplies the drive frequency and amplitude by `k`, keeping `4g/ω`.
    pub fn scale_omega(&mut self, k: f64) -> Result<()> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Model(format!("omega scale must be positive, got {k}")));
        }
        if let Some(d) = &mut self.drive {
            *d = DriveSpec::new(d.axis, d.g * k, d.omega * k)?;
        }
        Ok(())
    }

    pub fn set_seed(&mut self, seed: u64) {
        if let Some(n) = &mut self.noise {
            n.master_seed = seed;
        }
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        match self.grid.kind {
            GridKind::Stroboscopic { stride } => {
                let d = self
                    .drive
                    .as_ref()
                    .ok_or_else(|| Error::Model("stroboscopic grid needs a drive".into()))?;
                Ok(stroboscopic_times(d.omega, self.grid.horizon)?.decimated(stride))
            }
            GridKind::Uniform { samples } => TimeGrid::uniform(self.grid.horizon, samples),
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Fields {
    map: BTreeMap<String, Entry>,
}

fn parse_err(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

impl Fields {
    fn read(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| parse_err(line, content, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(parse_err(line, key, "unknown key"));
            }
            if value.is_empty() {
                return Err(parse_err(line, key, "missing value"));
            }
            if let Some(prev) = map.get(key) {
                let prev: &Entry = prev;
                return Err(parse_err(line, key, format!("repeats line {}", prev.line)));
            }
            map.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
        }
        Ok(Self { map })
    }

    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |e| e.line)
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.map.keys().any(|k| k.starts_with(prefix))
    }

    fn get<T>(&self, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Option<T>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(e) => parse(&e.value).map(Some).map_err(|m| parse_err(e.line, key, m)),
        }
    }

    fn require<T>(&self, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<T> {
        self.get(key, parse)?
            .ok_or_else(|| parse_err(0, key, "required key is missing"))
    }

    fn forbid(&self, key: &str, why: &str) -> Result<()> {
        match self.map.get(key) {
            Some(e) => Err(parse_err(e.line, key, why)),
            None => Ok(()),
        }
    }
}

fn number(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v = number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn count(s: &str) -> std::result::Result<usize, String> {
    s.parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn boolean(s: &str) -> std::result::Result<bool, String> {
    s.parse().map_err(|_| format!("`{s}` is not true or false"))
}

fn profile(s: &str) -> std::result::Result<CouplingProfile, String> {
    if s == "pst" {
        return Ok(CouplingProfile::Pst);
    }
    if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let values = inner
            .split(',')
            .map(|v| number(v.trim()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        return Ok(CouplingProfile::Explicit(values));
    }
    number(s).map(CouplingProfile::Uniform)
}

fn labels(s: &str) -> std::result::Result<Vec<u8>, String> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(format!("`{other}` is not a site label (0 or 1)")),
        })
        .collect()
}

fn pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected `a, b`")?;
    Ok((count(a.trim())?, count(b.trim())?))
}

fn list<T: FromStr<Err = E>, E: ToString>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<T>().map_err(|e| e.to_string()))
        .collect()
}

fn parsed<T: FromStr<Err = E>, E: ToString>(s: &str) -> std::result::Result<T, String> {
    s.parse::<T>().map_err(|e| e.to_string())
}

fn model_err(f: &Fields, e: Error) -> Error {
    parse_err(f.line("model.family"), "model", e.to_string())
}

/// Parses and fully resolves a scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let f = Fields::read(text)?;
    let name = f.require("name", |s| Ok(s.to_string()))?;
    if name
        .chars()
        .any(|c| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'))
    {
        return Err(parse_err(f.line("name"), "name", "use letters, digits, `_` or `-`"));
    }

    let model = parse_model(&f)?;
    let chain = model.build().map_err(|e| model_err(&f, e))?;
    let n = model.n_sites;

    let drive = if f.has_prefix("drive.") {
        let axis: Axis = f.require("drive.axis", parsed)?;
        let omega = match f.get("drive.omega", positive)? {
            Some(w) => {
                f.forbid("drive.omega_scale", "give drive.omega or drive.omega_scale, not both")?;
                w
            }
            None => f.get("drive.omega_scale", positive)?.unwrap_or(DEFAULT_OMEGA_SCALE) * chain.max_coupling(),
        };
        let d = match f.get("drive.g", number)? {
            Some(g) => {
                f.forbid("drive.target_a", "give drive.g or drive.target_a, not both")?;
                DriveSpec::new(axis, g, omega)
            }
            None => DriveSpec::calibrated(axis, f.get("drive.target_a", number)?.unwrap_or(0.0), omega),
        };
        Some(d.map_err(|e| parse_err(f.line("drive.axis"), "drive", e.to_string()))?)
    } else {
        None
    };

    let (noise, concurrence_order) = if f.has_prefix("noise.") {
        let transverse: Vec<Axis> = match &drive {
            Some(d) => Axis::ALL.into_iter().filter(|a| *a != d.axis).collect(),
            None => vec![Axis::X, Axis::Y],
        };
        let defaults = NoiseSpec::default();
        let spec = NoiseSpec {
            mu: f.get("noise.mu", number)?.unwrap_or(defaults.mu),
            sigma: f.get("noise.sigma", number)?.unwrap_or(defaults.sigma),
            tau: f.get("noise.tau", number)?.unwrap_or(defaults.tau),
            axes: f.get("noise.axes", list::<Axis, _>)?.unwrap_or(transverse),
            trials: f.get("noise.trials", count)?.unwrap_or(defaults.trials),
            master_seed: f
                .get("noise.seed", |s| s.parse::<u64>().map_err(|e| e.to_string()))?
                .unwrap_or(0),
        };
        spec.validate().map_err(|e| {
            let key = if !(spec.sigma >= 0.0 && spec.sigma.is_finite()) {
                "noise.sigma"
            } else if !(spec.tau > 0.0 && spec.tau.is_finite()) {
                "noise.tau"
            } else if !spec.mu.is_finite() {
                "noise.mu"
            } else if spec.trials == 0 {
                "noise.trials"
            } else {
                "noise.axes"
            };
            parse_err(f.line(key), key, e.to_string())
        })?;
        let order = f.get("noise.concurrence_order", parsed)?.unwrap_or_default();
        (Some(spec), order)
    } else {
        (None, ConcurrenceOrder::default())
    };

    let task = parse_task(&f, n)?;
    let grid = parse_grid(&f, drive.is_some())?;

    let defaults = PropagatorConfig::default();
    let propagator = PropagatorConfig {
        steps_per_period: f
            .get("propagator.steps_per_period", count)?
            .unwrap_or(defaults.steps_per_period),
        convergence_tol: f
            .get("propagator.convergence_tol", positive)?
            .unwrap_or(defaults.convergence_tol),
        check_convergence: f
            .get("propagator.check_convergence", boolean)?
            .unwrap_or(defaults.check_convergence),
        undriven_substep: f
            .get("propagator.undriven_substep", positive)?
            .unwrap_or(defaults.undriven_substep),
    };
    propagator.validate().map_err(|e| {
        parse_err(
            f.line("propagator.steps_per_period"),
            "propagator.steps_per_period",
            e.to_string(),
        )
    })?;

    let runs = match f.get("runs", list::<RunKind, _>)? {
        Some(r) => r,
        None => {
            let mut r = vec![RunKind::Undriven];
            if drive.is_some() {
                r = vec![RunKind::Driven, RunKind::Effective, RunKind::Undriven];
            }
            if noise.is_some() {
                r.push(if drive.is_some() {
                    RunKind::NoisyDriven
                } else {
                    RunKind::NoisyUndriven
                });
            }
            r
        }
    };
    let line = f.line("runs");
    for (k, r) in runs.iter().enumerate() {
        if runs[..k].contains(r) {
            return Err(parse_err(line, "runs", format!("`{}` listed twice", r.label())));
        }
        if r.needs_drive() && drive.is_none() {
            return Err(parse_err(line, "runs", format!("`{}` needs a drive", r.label())));
        }
        if r.needs_noise() && noise.is_none() {
            return Err(parse_err(line, "runs", format!("`{}` needs noise", r.label())));
        }
    }
    if let Some(d) = &drive {
        if runs
            .iter()
            .any(|r| matches!(r, RunKind::Effective | RunKind::NoisyEffective))
        {
            effective_terms(&chain, d).map_err(|e| parse_err(f.line("drive.axis"), "drive.axis", e.to_string()))?;
        }
    }

    Ok(Scenario {
        name,
        model,
        drive,
        noise,
        concurrence_order,
        task,
        grid,
        propagator,
        runs,
    })
}

fn parse_model(f: &Fields) -> Result<ModelSpec> {
    let family: ChainFamily = f.require("model.family", parsed)?;
    let n_sites = f.require("model.n", count)?;
    let zero = CouplingProfile::Uniform(0.0);
    let mut spec = ModelSpec {
        family,
        n_sites,
        jx: zero.clone(),
        jy: zero.clone(),
        gamma: 0.0,
        l: zero,
    };
    let not_for = |key: &str| f.forbid(key, &format!("not used by the {family} family"));
    match family {
        ChainFamily::Xy => {
            let j = f.get("model.j", profile)?;
            match j {
                Some(j) => {
                    f.forbid("model.jx", "give model.j or model.jx/model.jy, not both")?;
                    f.forbid("model.jy", "give model.j or model.jx/model.jy, not both")?;
                    spec.jy = j.clone();
                    spec.jx = j;
                }
                None => {
                    spec.jx = f.require("model.jx", profile)?;
                    spec.jy = f.require("model.jy", profile)?;
                }
            }
            not_for("model.gamma")?;
            not_for("model.l")?;
        }
        _ => {
            spec.jx = f.require("model.j", profile)?;
            not_for("model.jx")?;
            not_for("model.jy")?;
            if family == ChainFamily::XyGamma {
                spec.gamma = f.require("model.gamma", number)?;
            } else {
                not_for("model.gamma")?;
            }
            if family == ChainFamily::IsingNnn {
                spec.l = f.require("model.l", profile)?;
            } else {
                not_for("model.l")?;
            }
        }
    }
    Ok(spec)
}

fn parse_task(f: &Fields, n: usize) -> Result<TaskSpec> {
    let kind = f.require("task.kind", |s| match s {
        "transfer" => Ok(TaskKind::Transfer),
        "concurrence" => Ok(TaskKind::Concurrence),
        other => Err(format!("unknown task `{other}` (expected transfer or concurrence)")),
    })?;
    let mut flipped = vec![1u8; n];
    flipped[0] = 0;
    let mut arrived = vec![1u8; n];
    arrived[n - 1] = 0;
    let task = TaskSpec {
        kind,
        basis: f.get("task.basis", parsed)?.unwrap_or(Axis::Z),
        initial: f.get("task.initial", labels)?.unwrap_or(flipped),
        target: f.get("task.target", labels)?.unwrap_or(arrived),
        pair: f.get("task.pair", pair)?.unwrap_or((1, n)),
    };
    for (key, v) in [("task.initial", &task.initial), ("task.target", &task.target)] {
        if v.len() != n {
            return Err(parse_err(f.line(key), key, format!("{} labels for {n} sites", v.len())));
        }
    }
    match kind {
        TaskKind::Transfer => f.forbid("task.pair", "not used by transfer tasks")?,
        TaskKind::Concurrence => {
            f.forbid("task.target", "not used by concurrence tasks")?;
            let (a, b) = task.pair;
            if a == b || a == 0 || b == 0 || a > n || b > n {
                return Err(parse_err(
                    f.line("task.pair"),
                    "task.pair",
                    format!("({a}, {b}) is not a pair of sites in 1..={n}"),
                ));
            }
        }
    }
    Ok(task)
}

fn parse_grid(f: &Fields, driven: bool) -> Result<GridSpec> {
    let horizon = f.require("grid.horizon", positive)?;
    let kind = match f.get("grid.kind", |s| Ok(s.to_string()))?.as_deref() {
        Some("stroboscopic") | None => {
            if !driven {
                return Err(parse_err(
                    f.line("grid.kind"),
                    "grid.kind",
                    "stroboscopic grid needs a drive",
                ));
            }
            f.forbid("grid.samples", "not used by stroboscopic grids")?;
            let stride = f.get("grid.stride", count)?.unwrap_or(1);
            if stride == 0 {
                return Err(parse_err(f.line("grid.stride"), "grid.stride", "must be >= 1"));
            }
            GridKind::Stroboscopic { stride }
        }
        Some("uniform") => {
            f.forbid("grid.stride", "not used by uniform grids")?;
            let samples = f.require("grid.samples", count)?;
            if samples < 2 {
                return Err(parse_err(f.line("grid.samples"), "grid.samples", "must be >= 2"));
            }
            GridKind::Uniform { samples }
        }
        Some(other) => {
            return Err(parse_err(
                f.line("grid.kind"),
                "grid.kind",
                format!("unknown grid `{other}` (expected stroboscopic or uniform)"),
            ))
        }
    };
    Ok(GridSpec { kind, horizon })
}

fn profile_text(p: &CouplingProfile) -> String {
    match p {
        CouplingProfile::Uniform(v) => format!("{v:?}"),
        CouplingProfile::Pst => "pst".into(),
        CouplingProfile::Explicit(v) => {
            let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
            format!("[{}]", items.join(", "))
        }
    }
}

fn label_text(v: &[u8]) -> String {
    v.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
}

/// Canonical text of a resolved scenario; every default is written out.
pub fn emit_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    put("name", s.name.clone());
    put("model.family", s.model.family.name().into());
    put("model.n", s.model.n_sites.to_string());
    match s.model.family {
        ChainFamily::Xy => {
            put("model.jx", profile_text(&s.model.jx));
            put("model.jy", profile_text(&s.model.jy));
        }
        family => {
            put("model.j", profile_text(&s.model.jx));
            if family == ChainFamily::XyGamma {
                put("model.gamma", format!("{:?}", s.model.gamma));
            }
            if family == ChainFamily::IsingNnn {
                put("model.l", profile_text(&s.model.l));
            }
        }
    }
    if let Some(d) = &s.drive {
        put("drive.axis", d.axis.name().into());
        put("drive.omega", format!("{:?}", d.omega));
        put("drive.g", format!("{:?}", d.g));
    }
    if let Some(n) = &s.noise {
        let axes: Vec<&str> = n.axes.iter().map(|a| a.name()).collect();
        put("noise.axes", axes.join(", "));
        put("noise.sigma", format!("{:?}", n.sigma));
        put("noise.mu", format!("{:?}", n.mu));
        put("noise.tau", format!("{:?}", n.tau));
        put("noise.trials", n.trials.to_string());
        put("noise.seed", n.master_seed.to_string());
        put("noise.concurrence_order", s.concurrence_order.name().into());
    }
    put(
        "task.kind",
        match s.task.kind {
            TaskKind::Transfer => "transfer",
            TaskKind::Concurrence => "concurrence",
        }
        .into(),
    );
    put("task.basis", s.task.basis.name().into());
    put("task.initial", label_text(&s.task.initial));
    match s.task.kind {
        TaskKind::Transfer => put("task.target", label_text(&s.task.target)),
        TaskKind::Concurrence => put("task.pair", format!("{}, {}", s.task.pair.0, s.task.pair.1)),
    }
    match s.grid.kind {
        GridKind::Stroboscopic { stride } => {
            put("grid.kind", "stroboscopic".into());
            put("grid.stride", stride.to_string());
        }
        GridKind::Uniform { samples } => {
            put("grid.kind", "uniform".into());
            put("grid.samples", samples.to_string());
        }
    }
    put("grid.horizon", format!("{:?}", s.grid.horizon));
    put("propagator.steps_per_period", s.propagator.steps_per_period.to_string());
    put(
        "propagator.convergence_tol",
        format!("{:?}", s.propagator.convergence_tol),
    );
    put(
        "propagator.check_convergence",
        s.propagator.check_convergence.to_string(),
    );
    put(
        "propagator.undriven_substep",
        format!("{:?}", s.propagator.undriven_substep),
    );
    let runs: Vec<&str> = s.runs.iter().map(|r| r.label()).collect();
    put("runs", runs.join(", "));
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub scenario: String,
    pub label: String,
    pub observable: String,
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    /// Set for driven runs checked by step doubling.
    pub converged: Option<bool>,
    pub infidelity_on_doubling: Option<f64>,
    pub high_frequency_ok: Option<bool>,
    pub seed: Option<u64>,
    pub wall_time: Duration,
}

impl RunRecord {
    /// Largest value and the time it occurs.
    pub fn peak(&self) -> (f64, f64) {
        crate::observables::peak(self.grid.samples(), &self.values)
    }
}

/// Wall clock for run records; the browser target has no monotonic clock
/// in std, so it reports zero there.
struct Stopwatch(#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        Stopwatch(
            #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
            std::time::Instant::now(),
        )
    }

    fn elapsed(&self) -> Duration {
        #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
        return self.0.elapsed();
        #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
        Duration::ZERO
    }
}

/// Runs every comparison in order and evaluates the task observable.
pub fn run_scenario(s: &Scenario) -> Result<Vec<RunRecord>> {
    s.runs
        .iter()
        .map(|&kind| {
            run_one(s, kind).map_err(|e| Error::Run {
                run: kind.label().to_string(),
                source: Box::new(e),
            })
        })
        .collect()
}

/// A single comparison run, without observable evaluation.
pub fn evolve_run(s: &Scenario, kind: RunKind) -> Result<EvolutionResult> {
    let chain = s.model.build()?;
    let grid = s.time_grid()?;
    let psi0 = s.task.initial_state()?;
    let cfg = &s.propagator;
    let drive = || {
        s.drive
            .as_ref()
            .ok_or_else(|| Error::Model(format!("`{}` needs a drive", kind.label())))
    };
    let noise = || {
        s.noise
            .as_ref()
            .ok_or_else(|| Error::Model(format!("`{}` needs noise", kind.label())))
    };
    match kind {
        RunKind::Driven => evolve_driven(&chain, drive()?, &psi0, &grid, cfg),
        RunKind::Effective => evolve_constant(&effective_hamiltonian(&chain, drive()?)?, &psi0, &grid),
        RunKind::Undriven => evolve_constant(&build_static_hamiltonian(&chain)?, &psi0, &grid),
        RunKind::NoisyDriven => evolve_noisy(&chain, Some(drive()?), noise()?, &psi0, &grid, cfg),
        RunKind::NoisyUndriven => evolve_noisy(&chain, None, noise()?, &psi0, &grid, cfg),
        RunKind::NoisyEffective => {
            evolve_noisy_terms(&effective_terms(&chain, drive()?)?, None, noise()?, &psi0, &grid, cfg)
        }
    }
}

fn run_one(s: &Scenario, kind: RunKind) -> Result<RunRecord> {
    let start = Stopwatch::start();
    let r = evolve_run(s, kind)?;
    let values = match s.task.kind {
        TaskKind::Transfer => fidelity_series(&r, &s.task.target_state()?)?,
        TaskKind::Concurrence => pair_concurrence(&r, s.task.pair, s.concurrence_order)?.values,
    };
    Ok(RunRecord {
        scenario: s.name.clone(),
        label: kind.label().to_string(),
        observable: s.task.observable(),
        grid: r.grid,
        values,
        converged: r.meta.convergence.map(|c| c.converged),
        infidelity_on_doubling: r.meta.convergence.map(|c| c.infidelity_on_doubling),
        high_frequency_ok: r.meta.high_frequency_ok,
        seed: r.meta.noise.map(|n| n.master_seed),
        wall_time: start.elapsed(),
    })
}

/// `v` with 12 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.11e}")
}

/// CSV tables keyed by file name. Runs sharing one grid are merged into
/// `<scenario>.csv`; otherwise each run gets `<scenario>_<label>.csv`.
pub fn csv_tables(records: &[RunRecord]) -> Result<Vec<(String, String)>> {
    let first = records
        .first()
        .ok_or_else(|| Error::Shape("no run records to write".into()))?;
    let shared = records.iter().all(|r| r.grid == first.grid);
    let table = |rs: &[&RunRecord]| {
        let mut out = String::from("t");
        for r in rs {
            out.push(',');
            out.push_str(&r.label);
        }
        out.push('\n');
        for (k, t) in rs[0].grid.samples().iter().enumerate() {
            out.push_str(&format_value(*t));
            for r in rs {
                out.push(',');
                out.push_str(&format_value(r.values[k]));
            }
            out.push('\n');
        }
        out
    };
    if shared {
        let all: Vec<&RunRecord> = records.iter().collect();
        Ok(vec![(format!("{}.csv", first.scenario), table(&all))])
    } else {
        Ok(records
            .iter()
            .map(|r| (format!("{}_{}.csv", r.scenario, r.label), table(&[r])))
            .collect())
    }
}

/// Sidecar metadata: the resolved scenario followed by per-run flags as
/// comments, so the file parses back to the same scenario.
pub fn metadata(s: &Scenario, records: &[RunRecord]) -> String {
    let mut out = format!("# spindrive {}\n", env!("CARGO_PKG_VERSION"));
    out.push_str(&emit_scenario(s));
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    for r in records {
        let _ = writeln!(
            out,
            "# run {}: observable={} samples={} converged={} infidelity_on_doubling={} high_frequency_ok={} seed={}",
            r.label,
            r.observable,
            r.values.len(),
            opt(r.converged.map(|c| c.to_string())),
            opt(r.infidelity_on_doubling.map(|v| format!("{v:.3e}"))),
            opt(r.high_frequency_ok.map(|c| c.to_string())),
            opt(r.seed.map(|c| c.to_string())),
        );
    }
    out
}

/// Writes the CSV tables and `<scenario>.meta` into `dir`.
pub fn emit_csv(s: &Scenario, records: &[RunRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, body) in csv_tables(records)? {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    let path = dir.join(format!("{}.meta", s.name));
    fs::write(&path, metadata(s, records))?;
    written.push(path);
    Ok(written)
}

/// One line per run: peak value, its time, flags and wall time.
pub fn summary(records: &[RunRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let (t, v) = r.peak();
        let _ = write!(
            out,
            "{:<16} peak {} = {:.6} at t = {:.4}  ({:.2?})",
            r.label, r.observable, v, t, r.wall_time
        );
        if r.converged == Some(false) {
            let _ = write!(
                out,
                "  [unconverged: doubling changes final fidelity by {:.2e}]",
                r.infidelity_on_doubling.unwrap_or(f64::NAN)
            );
        }
        if r.high_frequency_ok == Some(false) {
            let _ = write!(out, "  [drive frequency below the high-frequency regime]");
        }
        out.push('\n');
    }
    out
}
