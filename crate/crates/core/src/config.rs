//! Plain-text run and sweep configuration.
//!
//! ```text
//! # Fig. 3 working point
//! [run]
//! g_nl = 2
//! delta_a = 1
//! delta_b = 0.1
//! lambda = 0.01
//!
//! [sweep]
//! param = g_nl
//! values = 0.5, 1, 2
//! ```
//!
//! Keys before the first section belong to `[run]`. Several `key=value`
//! pairs may share a line. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::manifold::{
    Amplitude, DynamicsParams, DynamicsSpec, ManifoldAmplitudes, ManifoldIndex, Sci, TimeGrid,
    DEFAULT_STEP,
};
use crate::model::{huang_rhys, polaron_shift, ModelParams, PhononMode, PhononSpectrum};
use crate::oracle::{FockBasis, OracleMode, OracleSettings};

pub const DEFAULT_T_END: f64 = 25.0;
pub const DEFAULT_SAMPLES: usize = 2500;

const RUN_KEYS: &[&str] = &[
    "preset",
    "g_a",
    "g_b",
    "g_nl",
    "delta_a",
    "delta_b",
    "lambda",
    "omega_a",
    "omega_b",
    "omega_ex",
    "polaron_shift",
    "phonon_modes",
    "m",
    "n",
    "initial",
    "t_start",
    "t_end",
    "samples",
    "step",
    "output",
    "oracle",
    "oracle_mode",
    "cutoff_a",
    "cutoff_b",
];

const SWEEP_KEYS: &[&str] = &["param", "values", "range", "param2", "values2", "range2", "workers"];

/// Built-in parameter sets. `g_a = g_b = 1` sets
/// the unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig3,
    Fig4,
    Fig5,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Fig3, Preset::Fig4, Preset::Fig5];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }

    pub fn params(self) -> DynamicsParams {
        let fig3 = DynamicsParams {
            g_a: 1.0,
            g_b: 1.0,
            g_nl: 2.0,
            delta_a: 1.0,
            delta_b: 0.1,
            huang_rhys: 0.01,
        };
        match self {
            Preset::Fig3 => fig3,
            Preset::Fig4 => DynamicsParams { delta_a: 0.2, ..fig3 },
            Preset::Fig5 => DynamicsParams { g_nl: 0.5, ..fig3 },
        }
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}` (expected fig3, fig4 or fig5)")))
    }
}

/// A fully resolved single run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: DynamicsParams,
    /// Set when the run was specified through `ω_a`, `ω_ex` rather than
    /// detunings.
    pub model: Option<ModelParams>,
    pub index: ManifoldIndex,
    pub initial: Amplitude,
    pub grid: TimeGrid,
    pub output: Option<PathBuf>,
    pub oracle: bool,
    pub oracle_settings: OracleSettings,
    /// `(key, value)` of every default that was applied.
    pub defaults: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn preset(preset: Preset) -> Self {
        let index = ManifoldIndex::default();
        RunConfig {
            params: preset.params(),
            model: None,
            index,
            initial: Amplitude::D,
            grid: TimeGrid {
                t_start: 0.0,
                t_end: DEFAULT_T_END,
                samples: DEFAULT_SAMPLES,
                max_step: DEFAULT_STEP,
            },
            output: None,
            oracle: false,
            oracle_settings: OracleSettings::default_for(index, OracleMode::Restricted),
            defaults: vec![
                ("g_a".into(), "1".into()),
                ("g_b".into(), "1".into()),
                ("m".into(), "0".into()),
                ("n".into(), "0".into()),
                ("initial".into(), "d".into()),
            ],
            warnings: Vec::new(),
        }
    }

    /// Hamiltonian parameters behind this run.
    pub fn model(&self) -> ModelParams {
        self.model.unwrap_or_else(|| self.params.to_model())
    }

    pub fn initial_state(&self) -> ManifoldAmplitudes {
        ManifoldAmplitudes::basis(self.initial)
    }

    pub fn dynamics_spec(&self) -> DynamicsSpec {
        DynamicsSpec {
            index: self.index,
            params: self.params,
            initial: self.initial_state(),
            grid: self.grid,
        }
    }

    /// Sets one sweepable parameter, keeping `model` consistent.
    pub fn set(&mut self, param: SweepParam, value: f64) -> Result<()> {
        let p = &mut self.params;
        match param {
            SweepParam::GA => p.g_a = value,
            SweepParam::GB => p.g_b = value,
            SweepParam::GNl => p.g_nl = value,
            SweepParam::Lambda => {
                if value < 0.0 {
                    return Err(Error::Config(format!("lambda must be non-negative, got {value}")));
                }
                p.huang_rhys = value
            }
            SweepParam::DeltaA | SweepParam::DeltaB if self.model.is_some() => {
                return Err(Error::Config(format!(
                    "cannot sweep {} when the run is given by omega_a/omega_ex",
                    param.key()
                )))
            }
            SweepParam::DeltaA => p.delta_a = value,
            SweepParam::DeltaB => p.delta_b = value,
            SweepParam::M | SweepParam::N => {
                if value < 0.0 || value.fract() != 0.0 || value > f64::from(u32::MAX) {
                    return Err(Error::Config(format!(
                        "{} must be a non-negative integer, got {value}",
                        param.key()
                    )));
                }
                if param == SweepParam::M {
                    self.index.m = value as u32;
                } else {
                    self.index.n = value as u32;
                }
                self.oracle_settings = OracleSettings::default_for(self.index, self.oracle_settings.mode);
            }
        }
        if let Some(model) = &mut self.model {
            model.g_a = self.params.g_a;
            model.g_b = self.params.g_b;
            model.g_nl = self.params.g_nl;
            model.huang_rhys = self.params.huang_rhys;
        }
        Ok(())
    }

    /// Serializes the resolved parameters back to config text. Floats use
    /// 17 significant digits, so parsing the text reproduces them exactly.
    pub fn to_config_text(&self) -> String {
        let mut s = String::from("[run]\n");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let p = &self.params;
        kv("g_a", Sci(p.g_a).to_string());
        kv("g_b", Sci(p.g_b).to_string());
        kv("g_nl", Sci(p.g_nl).to_string());
        match &self.model {
            Some(model) => {
                kv("omega_a", Sci(model.omega_a).to_string());
                kv("omega_ex", Sci(model.omega_ex).to_string());
                kv("polaron_shift", Sci(model.polaron_shift).to_string());
            }
            None => {
                kv("delta_a", Sci(p.delta_a).to_string());
                kv("delta_b", Sci(p.delta_b).to_string());
            }
        }
        kv("lambda", Sci(p.huang_rhys).to_string());
        kv("m", self.index.m.to_string());
        kv("n", self.index.n.to_string());
        kv("initial", self.initial.letter().to_string());
        kv("t_start", Sci(self.grid.t_start).to_string());
        kv("t_end", Sci(self.grid.t_end).to_string());
        kv("samples", self.grid.samples.to_string());
        kv("step", Sci(self.grid.max_step).to_string());
        if let Some(out) = &self.output {
            kv("output", out.display().to_string());
        }
        kv("oracle", self.oracle.to_string());
        kv("oracle_mode", self.oracle_settings.mode.to_string());
        kv("cutoff_a", self.oracle_settings.basis.max_a.to_string());
        kv("cutoff_b", self.oracle_settings.basis.max_b.to_string());
        s
    }
}

/// Run parameters that a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    GA,
    GB,
    GNl,
    DeltaA,
    DeltaB,
    Lambda,
    M,
    N,
}

impl SweepParam {
    const ALL: [SweepParam; 8] = [
        SweepParam::GA,
        SweepParam::GB,
        SweepParam::GNl,
        SweepParam::DeltaA,
        SweepParam::DeltaB,
        SweepParam::Lambda,
        SweepParam::M,
        SweepParam::N,
    ];

    pub fn key(self) -> &'static str {
        match self {
            SweepParam::GA => "g_a",
            SweepParam::GB => "g_b",
            SweepParam::GNl => "g_nl",
            SweepParam::DeltaA => "delta_a",
            SweepParam::DeltaB => "delta_b",
            SweepParam::Lambda => "lambda",
            SweepParam::M => "m",
            SweepParam::N => "n",
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        SweepParam::ALL.into_iter().find(|p| p.key() == s).ok_or_else(|| {
            let names: Vec<_> = SweepParam::ALL.iter().map(|p| p.key()).collect();
            format!("cannot sweep `{s}`; sweepable: {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linear_range(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|k| {
                if k == count - 1 {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub template: RunConfig,
    pub axes: Vec<SweepAxis>,
    pub workers: Option<usize>,
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub values: Vec<f64>,
    pub config: Result<RunConfig, String>,
}

impl SweepConfig {
    /// Grid points in row-major order (first axis slowest).
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &self.axes {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    axis.values.iter().map(move |&v| {
                        let mut c = prefix.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .map(|values| {
                let mut cfg = self.template.clone();
                let config = self
                    .axes
                    .iter()
                    .zip(&values)
                    .try_for_each(|(axis, &v)| cfg.set(axis.param, v))
                    .map(|_| cfg)
                    .map_err(|e| e.to_string());
                SweepPoint { values, config }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Config {
    Run(RunConfig),
    Sweep(SweepConfig),
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

type Section = BTreeMap<String, Entry>;

/// Removes whitespace that touches `=`, `,` or `:` so that `k = v` and
/// `a, b` collapse into single tokens.
fn normalize(line: &str) -> String {
    let chars: Vec<char> = line.chars().collect();
    let glue = |c: char| matches!(c, '=' | ',' | ':');
    let mut out = String::with_capacity(line.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            let mut j = i;
            while j < chars.len() && chars[j].is_whitespace() {
                j += 1;
            }
            let prev = out.chars().last();
            let next = chars.get(j).copied();
            let touches = prev.is_some_and(glue) || next.is_some_and(glue);
            if !touches && prev.is_some() && next.is_some() {
                out.push(' ');
            }
            i = j;
        } else {
            out.push(chars[i]);
            i += 1;
        }
    }
    out
}

fn split_sections(text: &str) -> Result<(Section, Option<Section>)> {
    let mut run = Section::new();
    let mut sweep: Option<Section> = None;
    let mut current = "run";
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = match name.trim() {
                "run" => "run",
                "sweep" => {
                    sweep.get_or_insert_with(Section::new);
                    "sweep"
                }
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("unknown section [{other}]"),
                    })
                }
            };
            continue;
        }
        for token in normalize(line).split(' ') {
            let Some((key, value)) = token.split_once('=') else {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected key = value, got `{token}`"),
                });
            };
            let (allowed, section) = if current == "run" {
                (RUN_KEYS, &mut run)
            } else {
                (SWEEP_KEYS, sweep.as_mut().expect("sweep section exists"))
            };
            if !allowed.contains(&key) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unknown key `{key}` in [{current}]"),
                });
            }
            if value.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("empty value for `{key}`"),
                });
            }
            let entry = Entry {
                value: value.to_string(),
                line: line_no,
            };
            if let Some(prev) = section.insert(key.to_string(), entry) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate key `{key}` (first set on line {})", prev.line),
                });
            }
        }
    }
    Ok((run, sweep))
}

fn parse_err(entry: &Entry, message: impl Into<String>) -> Error {
    Error::Parse {
        line: entry.line,
        message: message.into(),
    }
}

fn get_f64(section: &Section, key: &str) -> Result<Option<f64>> {
    section
        .get(key)
        .map(|e| {
            e.value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(e, format!("`{key}` expects a finite number, got `{}`", e.value)))
        })
        .transpose()
}

fn get_parsed<T: FromStr>(section: &Section, key: &str, what: &str) -> Result<Option<T>> {
    section
        .get(key)
        .map(|e| {
            e.value
                .parse::<T>()
                .map_err(|_| parse_err(e, format!("`{key}` expects {what}, got `{}`", e.value)))
        })
        .transpose()
}

fn parse_list(entry: &Entry, key: &str) -> Result<Vec<f64>> {
    entry
        .value
        .split(',')
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(entry, format!("`{key}` expects numbers, got `{v}`")))
        })
        .collect()
}

fn parse_spectrum(entry: &Entry) -> Result<PhononSpectrum> {
    let mut modes = Vec::new();
    for item in entry.value.split(',') {
        let (m, w) = item
            .split_once(':')
            .ok_or_else(|| parse_err(entry, format!("phonon mode `{item}` must be coupling:frequency")))?;
        let (m, w) = match (m.parse::<f64>(), w.parse::<f64>()) {
            (Ok(m), Ok(w)) => (m, w),
            _ => return Err(parse_err(entry, format!("phonon mode `{item}` is not numeric"))),
        };
        modes.push(PhononMode::new(m, w).map_err(|e| parse_err(entry, e.to_string()))?);
    }
    Ok(PhononSpectrum::new(modes))
}

fn resolve_run(run: &Section) -> Result<RunConfig> {
    let mut defaults: Vec<(String, String)> = Vec::new();
    let mut warnings = Vec::new();

    let preset = get_parsed::<String>(run, "preset", "a preset name")?
        .map(|name| name.parse::<Preset>().map_err(|e| parse_err(&run["preset"], e.to_string())))
        .transpose()?;
    let base = preset.map(Preset::params);

    let physical = run.contains_key("omega_a") || run.contains_key("omega_ex");
    let direct = run.contains_key("delta_a") || run.contains_key("delta_b");
    if physical && direct {
        let e = run.get("delta_a").or_else(|| run.get("delta_b")).unwrap();
        return Err(parse_err(e, "delta_a/delta_b cannot be combined with omega_a/omega_ex"));
    }

    let spectrum = run.get("phonon_modes").map(parse_spectrum).transpose()?;
    let mut lambda = get_f64(run, "lambda")?;
    if let Some(spec) = &spectrum {
        let from_spec = huang_rhys(spec).map_err(|e| parse_err(&run["phonon_modes"], e.to_string()))?;
        if lambda.is_some() {
            warnings.push(format!(
                "lambda given directly; ignoring the phonon spectrum's lambda = {from_spec}"
            ));
        } else {
            lambda = Some(from_spec);
        }
    }

    let mut missing = Vec::new();
    let mut require = |key: &str, v: Option<f64>, fallback: Option<f64>| -> f64 {
        match v.or(fallback) {
            Some(x) => x,
            None => {
                missing.push(key.to_string());
                f64::NAN
            }
        }
    };

    let g_nl = require("g_nl", get_f64(run, "g_nl")?, base.map(|b| b.g_nl));
    let (params, model);
    if physical {
        let omega_a = require("omega_a", get_f64(run, "omega_a")?, None);
        let omega_ex = require("omega_ex", get_f64(run, "omega_ex")?, None);
        let lam = require("lambda", lambda, base.map(|b| b.huang_rhys));
        if !missing.is_empty() {
            return Err(Error::MissingKeys(missing));
        }
        if let (Some(wb), Some(e)) = (get_f64(run, "omega_b")?, run.get("omega_b")) {
            if (wb - 2.0 * omega_a).abs() > 1e-12 * (1.0 + omega_a.abs()) {
                return Err(parse_err(e, format!("omega_b must equal 2·omega_a = {}", 2.0 * omega_a)));
            }
        }
        let shift = match (get_f64(run, "polaron_shift")?, &spectrum) {
            (Some(d), _) => d,
            (None, Some(spec)) => polaron_shift(spec).map_err(|e| parse_err(&run["phonon_modes"], e.to_string()))?,
            (None, None) => {
                defaults.push(("polaron_shift".into(), "0".into()));
                0.0
            }
        };
        let m = ModelParams {
            omega_a,
            omega_ex,
            g_a: 1.0,
            g_b: 1.0,
            g_nl,
            huang_rhys: lam,
            polaron_shift: shift,
        };
        model = Some(m);
        params = DynamicsParams::from(&m);
    } else {
        if let Some(e) = run.get("polaron_shift").or_else(|| run.get("omega_b")) {
            return Err(parse_err(e, "polaron_shift and omega_b only apply together with omega_a/omega_ex"));
        }
        let delta_a = require("delta_a", get_f64(run, "delta_a")?, base.map(|b| b.delta_a));
        let delta_b = require("delta_b", get_f64(run, "delta_b")?, base.map(|b| b.delta_b));
        let lam = require("lambda", lambda, base.map(|b| b.huang_rhys));
        if !missing.is_empty() {
            return Err(Error::MissingKeys(missing));
        }
        model = None;
        params = DynamicsParams {
            g_a: 1.0,
            g_b: 1.0,
            g_nl,
            delta_a,
            delta_b,
            huang_rhys: lam,
        };
    }
    if params.huang_rhys < 0.0 {
        let e = run.get("lambda").or_else(|| run.get("phonon_modes")).unwrap();
        return Err(parse_err(e, "lambda must be non-negative"));
    }

    let mut num = |key: &str, fallback: f64, shown: &str| -> Result<f64> {
        Ok(match get_f64(run, key)? {
            Some(v) => v,
            None => {
                defaults.push((key.to_string(), shown.to_string()));
                fallback
            }
        })
    };
    let g_a = num("g_a", base.map_or(1.0, |b| b.g_a), "1")?;
    let g_b = num("g_b", base.map_or(1.0, |b| b.g_b), "1")?;
    let t_start = num("t_start", 0.0, "0")?;
    let t_end = num("t_end", DEFAULT_T_END, "25")?;
    let step = num("step", DEFAULT_STEP, "0.001")?;

    let mut int = |key: &str, fallback: u32| -> Result<u32> {
        Ok(match get_parsed::<u32>(run, key, "a non-negative integer")? {
            Some(v) => v,
            None => {
                defaults.push((key.to_string(), fallback.to_string()));
                fallback
            }
        })
    };
    let index = ManifoldIndex::new(int("m", 0)?, int("n", 0)?);
    let samples = match get_parsed::<usize>(run, "samples", "a positive integer")? {
        Some(v) => v,
        None => {
            defaults.push(("samples".into(), DEFAULT_SAMPLES.to_string()));
            DEFAULT_SAMPLES
        }
    };

    let initial = match run.get("initial") {
        Some(e) => {
            let mut chars = e.value.chars();
            match (chars.next().and_then(Amplitude::from_letter), chars.next()) {
                (Some(a), None) => a,
                _ => return Err(parse_err(e, format!("`initial` expects one of a-f, got `{}`", e.value))),
            }
        }
        None => {
            defaults.push(("initial".into(), "d".into()));
            Amplitude::D
        }
    };

    let grid = TimeGrid {
        t_start,
        t_end,
        samples,
        max_step: step,
    };
    if let Err(err) = grid.validate() {
        let e = ["samples", "step", "t_end", "t_start"]
            .iter()
            .find_map(|k| run.get(*k))
            .cloned()
            .unwrap_or(Entry { value: String::new(), line: 0 });
        return Err(parse_err(&e, err.to_string()));
    }

    let oracle = get_parsed::<bool>(run, "oracle", "true or false")?.unwrap_or(false);
    let mode = get_parsed::<String>(run, "oracle_mode", "restricted or full")?
        .map(|s| s.parse::<OracleMode>().map_err(|e| parse_err(&run["oracle_mode"], e.to_string())))
        .transpose()?
        .unwrap_or_default();
    let mut oracle_settings = OracleSettings::default_for(index, mode);
    if let Some(a) = get_parsed::<u32>(run, "cutoff_a", "a non-negative integer")? {
        oracle_settings.basis = FockBasis::new(a, oracle_settings.basis.max_b);
    }
    if let Some(b) = get_parsed::<u32>(run, "cutoff_b", "a non-negative integer")? {
        oracle_settings.basis = FockBasis::new(oracle_settings.basis.max_a, b);
    }
    if oracle_settings.basis.manifold_indices(index).is_err() {
        let e = run.get("cutoff_a").or_else(|| run.get("cutoff_b")).unwrap();
        return Err(parse_err(e, "cutoffs too small to contain the manifold"));
    }

    let params = DynamicsParams { g_a, g_b, ..params };
    let model = model.map(|m| ModelParams { g_a, g_b, ..m });

    Ok(RunConfig {
        params,
        model,
        index,
        initial,
        grid,
        output: run.get("output").map(|e| PathBuf::from(&e.value)),
        oracle,
        oracle_settings,
        defaults,
        warnings,
    })
}

fn resolve_axis(sweep: &Section, param_key: &str, values_key: &str, range_key: &str) -> Result<Option<SweepAxis>> {
    let Some(pe) = sweep.get(param_key) else {
        if let Some(e) = sweep.get(values_key).or_else(|| sweep.get(range_key)) {
            return Err(parse_err(e, format!("`{param_key}` is required with `{values_key}`/`{range_key}`")));
        }
        return Ok(None);
    };
    let param = pe.value.parse::<SweepParam>().map_err(|m| parse_err(pe, m))?;
    let values = match (sweep.get(values_key), sweep.get(range_key)) {
        (Some(v), None) => parse_list(v, values_key)?,
        (None, Some(r)) => {
            let parts: Vec<&str> = r.value.split(',').collect();
            let parsed = match parts.as_slice() {
                [a, b, c] => match (a.parse::<f64>(), b.parse::<f64>(), c.parse::<usize>()) {
                    (Ok(a), Ok(b), Ok(c)) if a.is_finite() && b.is_finite() => Some((a, b, c)),
                    _ => None,
                },
                _ => None,
            };
            let (start, stop, count) =
                parsed.ok_or_else(|| parse_err(r, format!("`{range_key}` expects start, stop, count")))?;
            if count == 0 {
                return Err(parse_err(r, "range count must be at least 1"));
            }
            linear_range(start, stop, count)
        }
        (Some(v), Some(_)) => {
            return Err(parse_err(v, format!("give either `{values_key}` or `{range_key}`, not both")))
        }
        (None, None) => {
            return Err(parse_err(pe, format!("`{param_key}` needs `{values_key}` or `{range_key}`")))
        }
    };
    if values.is_empty() {
        return Err(parse_err(pe, "sweep needs at least one value"));
    }
    Ok(Some(SweepAxis { param, values }))
}

/// Parses a run or sweep configuration.
pub fn parse_config(text: &str) -> Result<Config> {
    let (mut run, sweep) = split_sections(text)?;
    let Some(sweep) = sweep else {
        return resolve_run(&run).map(Config::Run);
    };

    let first = resolve_axis(&sweep, "param", "values", "range")?;
    let second = resolve_axis(&sweep, "param2", "values2", "range2")?;
    let Some(first) = first else {
        return Err(Error::Config("[sweep] requires `param`".into()));
    };
    let axes: Vec<SweepAxis> = std::iter::once(first).chain(second).collect();
    if axes.len() == 2 && axes[0].param == axes[1].param {
        return Err(parse_err(&sweep["param2"], "param2 must differ from param"));
    }
    // swept keys need not appear in [run]
    let physical = run.contains_key("omega_a") || run.contains_key("omega_ex");
    for axis in &axes {
        if physical && matches!(axis.param, SweepParam::DeltaA | SweepParam::DeltaB) {
            continue;
        }
        run.entry(axis.param.key().to_string()).or_insert(Entry {
            value: axis.values[0].to_string(),
            line: 0,
        });
    }
    let template = resolve_run(&run)?;
    let workers = get_parsed::<usize>(&sweep, "workers", "a positive integer")?;
    if workers == Some(0) {
        return Err(parse_err(&sweep["workers"], "workers must be at least 1"));
    }
    Ok(Config::Sweep(SweepConfig {
        template,
        axes,
        workers,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> RunConfig {
        match parse_config(text).unwrap() {
            Config::Run(r) => r,
            other => panic!("expected run config, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_is_fig3() {
        let cfg = run("g_nl=2 delta_a=1 delta_b=0.1 lambda=0.01");
        assert_eq!(cfg.params, Preset::Fig3.params());
        assert_eq!(cfg.dynamics_spec(), RunConfig::preset(Preset::Fig3).dynamics_spec());
        let keys: Vec<&str> = cfg.defaults.iter().map(|(k, _)| k.as_str()).collect();
        for k in ["g_a", "g_b", "m", "n", "initial", "t_end", "samples", "step"] {
            assert!(keys.contains(&k), "default {k} not echoed");
        }
    }

    #[test]
    fn empty_file_lists_required_keys() {
        match parse_config("# nothing here\n") {
            Err(Error::MissingKeys(keys)) => assert_eq!(keys, ["g_nl", "delta_a", "delta_b", "lambda"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        match parse_config("g_nl = 2\n\nfoo = 1\n") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("foo"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_mismatch_and_constraints_report_line() {
        let base = "g_nl=2 delta_a=1 delta_b=0.1\n";
        for (extra, line) in [
            ("lambda = abc\n", 2),
            ("lambda = -0.1\n", 2),
            ("lambda = 0.1\nm = -1\n", 3),
            ("lambda = 0.1\nsamples = 0\n", 3),
            ("lambda = 0.1\ninitial = z\n", 3),
            ("lambda = 0.1\noracle_mode = partial\n", 3),
            ("lambda = 0.1\ncutoff_a = 1\n", 3),
            ("lambda = 0.1\nlambda = 0.2\n", 3),
        ] {
            match parse_config(&format!("{base}{extra}")) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{extra}"),
                other => panic!("{extra}: {other:?}"),
            }
        }
    }

    #[test]
    fn preset_key_and_overrides() {
        let cfg = run("preset = fig4\nt_end = 10\nsamples = 100\n");
        assert_eq!(cfg.params, Preset::Fig4.params());
        assert_eq!(cfg.grid.t_end, 10.0);
        let cfg = run("preset = fig5\ng_nl = 0.7\n");
        assert_eq!(cfg.params.g_nl, 0.7);
        assert!(parse_config("preset = fig9").is_err());
    }

    #[test]
    fn preset_parameter_values() {
        let expect = [(2.0, 1.0, 0.1, 0.01), (2.0, 0.2, 0.1, 0.01), (0.5, 1.0, 0.1, 0.01)];
        for (p, (g_nl, da, db, l)) in Preset::ALL.into_iter().zip(expect) {
            let q = p.params();
            assert_eq!((q.g_nl, q.delta_a, q.delta_b, q.huang_rhys), (g_nl, da, db, l));
            assert_eq!((q.g_a, q.g_b), (1.0, 1.0));
            let cfg = RunConfig::preset(p);
            assert_eq!(cfg.index, ManifoldIndex::new(0, 0));
            assert_eq!(cfg.initial, Amplitude::D);
            assert_eq!((cfg.grid.t_start, cfg.grid.t_end, cfg.grid.samples), (0.0, 25.0, 2500));
        }
    }

    #[test]
    fn physical_route() {
        let cfg = run("g_nl = 1\nomega_a = 1\nomega_ex = 2.11\npolaron_shift = 0.01\nlambda = 0.3\n");
        assert!((cfg.params.delta_a - 1.1).abs() < 1e-14);
        assert!((cfg.params.delta_b - 0.1).abs() < 1e-14);
        assert_eq!(cfg.model().omega_a, 1.0);

        let cfg = run("g_nl = 1\nomega_a = 1\nomega_ex = 3\nphonon_modes = 0.1:1.0, 0.2:2.0\n");
        assert!((cfg.model().polaron_shift - 0.03).abs() < 1e-15);
        assert!((cfg.params.huang_rhys - 0.02).abs() < 1e-15);
        assert!(cfg.warnings.is_empty());

        let cfg = run("g_nl = 1\nomega_a = 1\nomega_ex = 3\nlambda = 0.5\nphonon_modes = 0.1:1.0\n");
        assert_eq!(cfg.params.huang_rhys, 0.5);
        assert_eq!(cfg.warnings.len(), 1);

        assert!(parse_config("g_nl=1 omega_a=1 omega_ex=2 lambda=0 delta_a=1").is_err());
        assert!(parse_config("g_nl=1 omega_a=1 omega_ex=2 lambda=0 omega_b=3").is_err());
        assert!(parse_config("g_nl=1 omega_a=1 omega_ex=2 lambda=0 omega_b=2").is_ok());
        assert!(parse_config("g_nl=1 omega_a=1 omega_ex=2 phonon_modes=0.1:0").is_err());
        assert!(parse_config("g_nl=1 delta_a=1 delta_b=0 lambda=0 polaron_shift=0.1").is_err());
    }

    #[test]
    fn benchmark_lambda_round_trips_exactly() {
        let cfg = run("g_nl=2 delta_a=1 delta_b=0.1 lambda=0.015");
        assert_eq!(cfg.params.huang_rhys, 0.015);
        let again = run(&cfg.to_config_text());
        assert_eq!(again.params.huang_rhys.to_bits(), 0.015f64.to_bits());
        assert_eq!(again.dynamics_spec(), cfg.dynamics_spec());
    }

    #[test]
    fn sweep_over_gnl_gives_two_runs() {
        let text = "[run]\ndelta_a = 1\ndelta_b = 0.1\nlambda = 0.01\n[sweep]\nparam = g_nl\nvalues = 0.5, 2\n";
        let Config::Sweep(sweep) = parse_config(text).unwrap() else { panic!() };
        let points = sweep.points();
        assert_eq!(points.len(), 2);
        let a = points[0].config.clone().unwrap();
        let b = points[1].config.clone().unwrap();
        assert_eq!(a.params.g_nl, 0.5);
        assert_eq!(b.params.g_nl, 2.0);
        assert_eq!(DynamicsParams { g_nl: 0.5, ..b.params }, a.params);
        assert_eq!(b.params, Preset::Fig3.params());
        assert_eq!(a.params, Preset::Fig5.params());
    }

    #[test]
    fn two_axis_range_sweep() {
        let text = "preset = fig3\n[sweep]\nparam = lambda\nrange = 0, 1, 3\nparam2 = m\nvalues2 = 0, 1\nworkers = 2\n";
        let Config::Sweep(sweep) = parse_config(text).unwrap() else { panic!() };
        assert_eq!(sweep.workers, Some(2));
        let pts = sweep.points();
        let vals: Vec<_> = pts.iter().map(|p| p.values.clone()).collect();
        assert_eq!(
            vals,
            [[0.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 1.0], [1.0, 0.0], [1.0, 1.0]]
        );
        assert_eq!(pts[3].config.as_ref().unwrap().index, ManifoldIndex::new(1, 0));
    }

    #[test]
    fn sweep_errors() {
        for text in [
            "preset=fig3\n[sweep]\nparam = omega\nvalues = 1\n",
            "preset=fig3\n[sweep]\nparam = g_nl\n",
            "preset=fig3\n[sweep]\nparam = g_nl\nrange = 0, 1, 0\n",
            "preset=fig3\n[sweep]\nparam = g_nl\nvalues = 1\nrange = 0,1,2\n",
            "preset=fig3\n[sweep]\nparam = g_nl\nvalues = 1\nparam2 = g_nl\nvalues2 = 2\n",
            "preset=fig3\n[sweep]\nvalues = 1\n",
            "preset=fig3\n[other]\n",
        ] {
            assert!(parse_config(text).is_err(), "{text}");
        }
        let text = "g_nl=1 omega_a=1 omega_ex=2 lambda=0\n[sweep]\nparam = delta_a\nvalues = 1\n";
        let Config::Sweep(s) = parse_config(text).unwrap() else { panic!() };
        assert!(s.points()[0].config.is_err());
    }

    #[test]
    fn linear_range_endpoints() {
        assert_eq!(linear_range(0.0, 1.0, 1), [0.0]);
        assert_eq!(linear_range(0.0, 1.0, 5), [0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(linear_range(0.1, 0.7, 3).last(), Some(&0.7));
    }

    #[test]
    fn normalize_collapses_spacing() {
        assert_eq!(normalize("a = 1   b=2"), "a=1 b=2");
        assert_eq!(normalize("values = 0.5 , 2"), "values=0.5,2");
        assert_eq!(normalize("phonon_modes = 0.1 : 1, 0.2:2"), "phonon_modes=0.1:1,0.2:2");
    }
}
