//! Batch execution: single runs, sweeps and oracle checks, with their
//! on-disk artifacts and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::analysis::{dominant_frequency, extrema};
use crate::config::{RunConfig, SweepConfig};
use crate::error::{Error, Result};
use crate::manifold::{integrate, Sci, TimeSeries};
use crate::oracle::{compare, run_oracle, OracleMode};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const P2_FILE: &str = "p2.csv";
pub const ORACLE_FILE: &str = "oracle_report.txt";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Maximum componentwise deviation accepted between the restricted oracle
/// and the manifold integrator.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

/// Flat `key = value` record of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunManifest {
    pub entries: Vec<(String, String)>,
    /// `(file name, sha256 hex)` of every emitted artifact.
    pub files: Vec<(String, String)>,
}

impl RunManifest {
    fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (name, digest) in &self.files {
            let _ = writeln!(s, "file.{name} = sha256:{digest}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = RunManifest::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(" = ").ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("malformed manifest line `{line}`"),
            })?;
            match k.strip_prefix("file.") {
                Some(name) => {
                    let digest = v.strip_prefix("sha256:").ok_or_else(|| Error::Parse {
                        line: i + 1,
                        message: "file digest must start with sha256:".into(),
                    })?;
                    m.files.push((name.to_string(), digest.to_string()));
                }
                None => m.entries.push((k.to_string(), v.to_string())),
            }
        }
        Ok(m)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Recomputes every digest listed in `dir/manifest.txt`.
pub fn verify_manifest(dir: &Path) -> Result<()> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest = RunManifest::parse(&text)?;
    for (name, digest) in &manifest.files {
        let file = dir.join(name);
        let bytes = fs::read(&file).map_err(|e| Error::io(&file, e))?;
        let actual = sha256_hex(&bytes);
        if &actual != digest {
            return Err(Error::Config(format!(
                "digest mismatch for {}: manifest {digest}, file {actual}",
                file.display()
            )));
        }
    }
    Ok(())
}

fn write_artifact(
    dir: &Path,
    name: &str,
    manifest: &mut RunManifest,
    fill: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
) -> Result<()> {
    let path = dir.join(name);
    let mut bytes = Vec::new();
    fill(&mut bytes).map_err(|e| Error::io(&path, e))?;
    fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
    manifest.files.push((name.to_string(), sha256_hex(&bytes)));
    Ok(())
}

fn resolved_entries(cfg: &RunConfig, manifest: &mut RunManifest) {
    manifest.push("artifact", env!("CARGO_PKG_NAME"));
    manifest.push("version", env!("CARGO_PKG_VERSION"));
    let p = &cfg.params;
    manifest.push("g_a", Sci(p.g_a));
    manifest.push("g_b", Sci(p.g_b));
    manifest.push("g_nl", Sci(p.g_nl));
    manifest.push("delta_a", Sci(p.delta_a));
    manifest.push("delta_b", Sci(p.delta_b));
    manifest.push("lambda", Sci(p.huang_rhys));
    let model = cfg.model();
    manifest.push("omega_a", Sci(model.omega_a));
    manifest.push("omega_ex", Sci(model.omega_ex));
    manifest.push("polaron_shift", Sci(model.polaron_shift));
    manifest.push("m", cfg.index.m);
    manifest.push("n", cfg.index.n);
    manifest.push("initial", cfg.initial.letter());
    manifest.push("t_start", Sci(cfg.grid.t_start));
    manifest.push("t_end", Sci(cfg.grid.t_end));
    manifest.push("samples", cfg.grid.samples);
    manifest.push("integrator", "rk4-fixed");
    manifest.push("step", Sci(cfg.grid.step()));
    manifest.push("units", "frequencies and times in multiples of the reference coupling");
    for (k, v) in &cfg.defaults {
        manifest.push(format!("default.{k}"), v);
    }
    for w in &cfg.warnings {
        manifest.push("warning", w);
    }
}

/// Outcome of an oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub mode: OracleMode,
    pub cutoff_a: u32,
    pub cutoff_b: u32,
    /// Max componentwise deviation; restricted mode only.
    pub max_deviation: Option<f64>,
    /// Max probability outside the manifold.
    pub max_leakage: f64,
}

impl OracleReport {
    /// Leakage never fails a check; only a restricted-mode deviation can.
    pub fn passed(&self) -> bool {
        self.max_deviation.is_none_or(|d| d <= ORACLE_TOLERANCE)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mode = {}", self.mode);
        let _ = writeln!(s, "cutoff_a = {}", self.cutoff_a);
        let _ = writeln!(s, "cutoff_b = {}", self.cutoff_b);
        if let Some(d) = self.max_deviation {
            let _ = writeln!(s, "max_deviation = {}", Sci(d));
            let _ = writeln!(s, "tolerance = {}", Sci(ORACLE_TOLERANCE));
        }
        let _ = writeln!(s, "max_leakage = {}", Sci(self.max_leakage));
        let _ = writeln!(s, "passed = {}", self.passed());
        s
    }
}

/// Compares an integrated trajectory with the Fock-space reference on the
/// same grid.
pub fn oracle_against(cfg: &RunConfig, series: &TimeSeries) -> Result<OracleReport> {
    let settings = cfg.oracle_settings;
    let oracle = run_oracle(&cfg.model(), cfg.index, &cfg.initial_state(), &cfg.grid, settings)?;
    let max_deviation = match settings.mode {
        OracleMode::Restricted => Some(compare(&oracle.series, series)?),
        OracleMode::Full => None,
    };
    Ok(OracleReport {
        mode: settings.mode,
        cutoff_a: settings.basis.max_a,
        cutoff_b: settings.basis.max_b,
        max_deviation,
        max_leakage: oracle.max_leakage(),
    })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub series: TimeSeries,
    pub manifest: RunManifest,
    pub oracle: Option<OracleReport>,
}

/// Integrates one configuration and writes `trajectory.csv`, `p2.csv`,
/// the optional oracle report and, last, `manifest.txt` into `out_dir`.
///
/// A failed integration still writes a manifest with `status = failed`.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<RunOutcome> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let started = Instant::now();
    let mut manifest = RunManifest::default();
    resolved_entries(cfg, &mut manifest);

    let result = integrate(&cfg.dynamics_spec()).and_then(|series| {
        write_artifact(out_dir, TRAJECTORY_FILE, &mut manifest, |w| series.write_csv(w))?;
        write_artifact(out_dir, P2_FILE, &mut manifest, |w| series.write_p2_csv(w))?;
        let oracle = if cfg.oracle {
            let report = oracle_against(cfg, &series)?;
            write_artifact(out_dir, ORACLE_FILE, &mut manifest, |w| {
                std::io::Write::write_all(w, report.render().as_bytes())
            })?;
            Some(report)
        } else {
            None
        };
        Ok((series, oracle))
    });

    match &result {
        Ok((series, _)) => {
            manifest.push("max_norm_drift", Sci(series.max_norm_drift()));
            manifest.push("status", "complete");
        }
        Err(e) => {
            manifest.push("status", "failed");
            manifest.push("error", e);
            manifest.push("partial_outputs", manifest.files.len());
        }
    }
    manifest.push("wall_clock_seconds", format!("{:.6}", started.elapsed().as_secs_f64()));
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.render()).map_err(|e| Error::io(&path, e))?;

    let (series, oracle) = result?;
    Ok(RunOutcome {
        series,
        manifest,
        oracle,
    })
}

/// Runs the restricted or full oracle for a configuration and writes the
/// report. Restricted deviations above [`ORACLE_TOLERANCE`] are reported,
/// not raised; callers decide the exit status from [`OracleReport::passed`].
pub fn oracle_check(cfg: &RunConfig, out_dir: &Path) -> Result<OracleReport> {
    let forced = RunConfig {
        oracle: true,
        ..cfg.clone()
    };
    let outcome = run(&forced, out_dir)?;
    Ok(outcome.oracle.expect("oracle requested"))
}

/// Summary statistics of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub values: Vec<f64>,
    pub dir: PathBuf,
    pub result: std::result::Result<PointStats, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointStats {
    pub max_p2: f64,
    pub min_p2: f64,
    /// Angular frequency of `P₂(t)` from its mean crossings.
    pub dominant_frequency: Option<f64>,
}

impl PointStats {
    pub fn of(series: &TimeSeries) -> Self {
        let p2 = series.p2();
        let (min_p2, max_p2) = extrema(&p2).unwrap_or((f64::NAN, f64::NAN));
        PointStats {
            max_p2,
            min_p2,
            dominant_frequency: dominant_frequency(&series.times(), &p2),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub points: Vec<PointSummary>,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.result.is_err()).count()
    }
}

/// Runs every grid point into `out_dir/point_NNNN/` using up to `workers`
/// threads, then writes `summary.csv`. Failed points are recorded and
/// skipped.
pub fn sweep(cfg: &SweepConfig, out_dir: &Path, workers: Option<usize>) -> Result<SweepOutcome> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let points = cfg.points();
    let workers = workers.or(cfg.workers).unwrap_or(1).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let summaries: Vec<PointSummary> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(k, point)| {
                let dir = out_dir.join(format!("point_{k:04}"));
                let result = match &point.config {
                    Ok(run_cfg) => run(run_cfg, &dir)
                        .map(|o| PointStats::of(&o.series))
                        .map_err(|e| e.to_string()),
                    Err(msg) => Err(msg.clone()),
                };
                PointSummary {
                    values: point.values.clone(),
                    dir,
                    result,
                }
            })
            .collect()
    });

    let mut csv = String::new();
    let names: Vec<&str> = cfg.axes.iter().map(|a| a.param.key()).collect();
    let _ = writeln!(csv, "{},max_p2,min_p2,dominant_frequency,status", names.join(","));
    for s in &summaries {
        let vals: Vec<String> = s.values.iter().map(|v| Sci(*v).to_string()).collect();
        match &s.result {
            Ok(st) => {
                let freq = st.dominant_frequency.map_or("nan".to_string(), |f| Sci(f).to_string());
                let _ = writeln!(
                    csv,
                    "{},{},{},{},ok",
                    vals.join(","),
                    Sci(st.max_p2),
                    Sci(st.min_p2),
                    freq
                );
            }
            Err(_) => {
                let _ = writeln!(csv, "{},nan,nan,nan,failed", vals.join(","));
            }
        }
    }
    let path = out_dir.join(SUMMARY_FILE);
    fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    Ok(SweepOutcome { points: summaries })
}
