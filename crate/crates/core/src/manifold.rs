//! The six-state transition manifold around `|2, m, n⟩` and its
//! interaction-picture equations of motion.
//!
//! Amplitudes are slowly varying (interaction picture with respect to the
//! polaron-frame free Hamiltonian). The six states split into two blocks
//! that never talk to each other:
//!
//! * `A = C(2, m+2, n)` and `B = C(2, m, n+1)`, coupled by the χ⁽²⁾ term;
//! * `Cc = C(1, m, n+1)`, `D = C(2, m, n)`, `E = C(1, m+2, n)`,
//!   `F = C(1, m+1, n)`, where `D` exchanges an excitation with `F`
//!   (mode a) and `Cc` (mode b), and `Cc` exchanges with `E` through χ⁽²⁾.

use std::fmt;
use std::io::Write;
use std::ops::{Add, Index, IndexMut, Mul};

use crate::error::{Error, Result};
use crate::model::{dressed_coupling, Detunings, ModelParams};

/// Photon numbers labelling the manifold: `m` fundamental, `n` second harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ManifoldIndex {
    pub m: u32,
    pub n: u32,
}

impl ManifoldIndex {
    pub fn new(m: u32, n: u32) -> Self {
        Self { m, n }
    }
}

/// One of the six amplitudes of the manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Amplitude {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Amplitude {
    pub const ALL: [Amplitude; 6] = [
        Amplitude::A,
        Amplitude::B,
        Amplitude::C,
        Amplitude::D,
        Amplitude::E,
        Amplitude::F,
    ];

    /// Offset of the real part in the packed 12-component state.
    pub fn offset(self) -> usize {
        2 * self as usize
    }

    /// `(s, m, n)` label of the basis state this amplitude multiplies.
    pub fn state(self, idx: ManifoldIndex) -> (u8, u32, u32) {
        let ManifoldIndex { m, n } = idx;
        match self {
            Amplitude::A => (2, m + 2, n),
            Amplitude::B => (2, m, n + 1),
            Amplitude::C => (1, m, n + 1),
            Amplitude::D => (2, m, n),
            Amplitude::E => (1, m + 2, n),
            Amplitude::F => (1, m + 1, n),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Amplitude::A => 'a',
            Amplitude::B => 'b',
            Amplitude::C => 'c',
            Amplitude::D => 'd',
            Amplitude::E => 'e',
            Amplitude::F => 'f',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.letter() == c.to_ascii_lowercase())
    }
}

/// Packed real/imaginary parts `(a₁, a₂, b₁, b₂, c₁, c₂, d₁, d₂, e₁, e₂, f₁, f₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ManifoldAmplitudes(pub [f64; 12]);

impl ManifoldAmplitudes {
    pub const COLUMNS: [&'static str; 12] = [
        "a1", "a2", "b1", "b2", "c1", "c2", "d1", "d2", "e1", "e2", "f1", "f2",
    ];

    pub fn zero() -> Self {
        Self([0.0; 12])
    }

    /// All amplitude on `which`, with value `1 + 0i`.
    pub fn basis(which: Amplitude) -> Self {
        let mut y = Self::zero();
        y.0[which.offset()] = 1.0;
        y
    }

    pub fn get(&self, which: Amplitude) -> (f64, f64) {
        let o = which.offset();
        (self.0[o], self.0[o + 1])
    }

    pub fn set(&mut self, which: Amplitude, re: f64, im: f64) {
        let o = which.offset();
        self.0[o] = re;
        self.0[o + 1] = im;
    }

    pub fn probability(&self, which: Amplitude) -> f64 {
        let (re, im) = self.get(which);
        re * re + im * im
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for ManifoldAmplitudes {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ManifoldAmplitudes {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for ManifoldAmplitudes {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
        self
    }
}

impl Mul<ManifoldAmplitudes> for f64 {
    type Output = ManifoldAmplitudes;
    fn mul(self, mut rhs: ManifoldAmplitudes) -> ManifoldAmplitudes {
        rhs.0.iter_mut().for_each(|a| *a *= self);
        rhs
    }
}

/// Excited-state population `P₂ = d₁² + d₂²`.
pub fn excited_population(y: &ManifoldAmplitudes) -> f64 {
    y.probability(Amplitude::D)
}

/// Coupling parameters as they enter the amplitude equations.
///
/// `g_a` and `g_b` are the bare dot–photon couplings; they are dressed by
/// `e^(−λ/2)` when the rates are formed. `g_nl` is never dressed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams {
    pub g_a: f64,
    pub g_b: f64,
    pub g_nl: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub huang_rhys: f64,
}

impl DynamicsParams {
    pub fn detunings(&self) -> Detunings {
        Detunings {
            delta_a: self.delta_a,
            delta_b: self.delta_b,
        }
    }

    /// Hamiltonian parameters realizing these detunings with `Δ = 0`.
    pub fn to_model(&self) -> ModelParams {
        ModelParams::from_detunings(self.g_a, self.g_b, self.g_nl, self.detunings(), self.huang_rhys)
    }
}

impl From<&ModelParams> for DynamicsParams {
    fn from(p: &ModelParams) -> Self {
        let det = p.detunings();
        Self {
            g_a: p.g_a,
            g_b: p.g_b,
            g_nl: p.g_nl,
            delta_a: det.delta_a,
            delta_b: det.delta_b,
            huang_rhys: p.huang_rhys,
        }
    }
}

/// Fully resolved rates for one manifold: dressed couplings times their
/// ladder factors, and the two detunings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    /// `g_a e^(−λ/2) √(m+1)`
    pub ga: f64,
    /// `g_b e^(−λ/2) √(n+1)`
    pub gb: f64,
    /// `g_nl √(n+1) √(m+1) √(m+2)`
    pub nl: f64,
    pub delta_a: f64,
    pub delta_b: f64,
}

impl Rates {
    pub fn new(params: &DynamicsParams, idx: ManifoldIndex) -> Result<Self> {
        let m = f64::from(idx.m);
        let n = f64::from(idx.n);
        let ga = dressed_coupling(params.g_a, params.huang_rhys)?;
        let gb = dressed_coupling(params.g_b, params.huang_rhys)?;
        Ok(Self {
            ga: ga * (m + 1.0).sqrt(),
            gb: gb * (n + 1.0).sqrt(),
            nl: params.g_nl * (n + 1.0).sqrt() * (m + 1.0).sqrt() * (m + 2.0).sqrt(),
            delta_a: params.delta_a,
            delta_b: params.delta_b,
        })
    }
}

/// Time derivative of the packed amplitudes.
///
/// In complex form:
///
/// ```text
/// i dA/dt = K B                 i dB/dt = K A
/// i dC/dt = G_b e^{-iδ_b t} D + K E
/// i dD/dt = G_a e^{iδ_a t} F + G_b e^{iδ_b t} C
/// i dE/dt = K C                 i dF/dt = G_a e^{-iδ_a t} D
/// ```
///
/// The g_b exchange between `D` and `Cc` rotates at `δ_b`.
pub fn rhs(t: f64, y: &ManifoldAmplitudes, r: &Rates) -> ManifoldAmplitudes {
    let [a1, a2, b1, b2, c1, c2, d1, d2, e1, e2, f1, f2] = y.0;
    let (sa, ca) = (r.delta_a * t).sin_cos();
    let (sb, cb) = (r.delta_b * t).sin_cos();
    let (k, ga, gb) = (r.nl, r.ga, r.gb);

    ManifoldAmplitudes([
        k * b2,
        -k * b1,
        k * a2,
        -k * a1,
        gb * cb * d2 - gb * sb * d1 + k * e2,
        -gb * cb * d1 - gb * sb * d2 - k * e1,
        ga * ca * f2 + ga * sa * f1 + gb * cb * c2 + gb * sb * c1,
        -ga * ca * f1 + ga * sa * f2 - gb * cb * c1 + gb * sb * c2,
        k * c2,
        -k * c1,
        -ga * sa * d1 + ga * ca * d2,
        -ga * ca * d1 - ga * sa * d2,
    ])
}

/// One classical fourth-order Runge–Kutta step from `t` with step `h`
/// (which may be negative).
pub fn rk4_step(t: f64, y: &ManifoldAmplitudes, h: f64, r: &Rates) -> ManifoldAmplitudes {
    let half = 0.5 * h;
    let k1 = rhs(t, y, r);
    let k2 = rhs(t + half, &(*y + half * k1), r);
    let k3 = rhs(t + half, &(*y + half * k2), r);
    let k4 = rhs(t + h, &(*y + h * k3), r);
    *y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Takes `steps` fixed steps of size `h` starting at `t0`.
///
/// Step times are `t0 + k·h`, never accumulated.
pub fn evolve(
    y0: &ManifoldAmplitudes,
    t0: f64,
    h: f64,
    steps: usize,
    r: &Rates,
) -> Result<ManifoldAmplitudes> {
    let mut y = *y0;
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let next = rk4_step(t, &y, h, r);
        if !next.is_finite() {
            return Err(Error::Diverged { last_good_t: t });
        }
        y = next;
    }
    Ok(y)
}

/// Uniform output grid with a fixed-step integrator underneath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    /// Number of output intervals; `samples + 1` rows are produced.
    pub samples: usize,
    /// Largest allowed integrator step.
    pub max_step: f64,
}

pub const DEFAULT_STEP: f64 = 1e-3;

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, samples: usize, max_step: f64) -> Result<Self> {
        let grid = Self {
            t_start,
            t_end,
            samples,
            max_step,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite()) {
            return Err(Error::InvalidSpec("time window must be finite".into()));
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::InvalidSpec(format!(
                "t_end ({}) must exceed t_start ({})",
                self.t_end, self.t_start
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidSpec("need at least one output interval".into()));
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "integrator step must be positive, got {}",
                self.max_step
            )));
        }
        Ok(())
    }

    pub fn output_interval(&self) -> f64 {
        (self.t_end - self.t_start) / self.samples as f64
    }

    /// Integrator steps between consecutive output rows.
    pub fn steps_per_sample(&self) -> usize {
        let ratio = self.output_interval() / self.max_step;
        // tolerate ratios like 9.999999999 that come from decimal inputs
        ((ratio - 1e-9).ceil() as usize).max(1)
    }

    /// Actual integrator step, at most `max_step`.
    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / (self.samples * self.steps_per_sample()) as f64
    }

    pub fn total_steps(&self) -> usize {
        self.samples * self.steps_per_sample()
    }

    /// Output time of row `k`.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.samples {
            self.t_end
        } else {
            self.t_start + k as f64 * self.output_interval()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.samples).map(|k| self.time(k)).collect()
    }
}

/// Everything needed to integrate one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsSpec {
    pub index: ManifoldIndex,
    pub params: DynamicsParams,
    pub initial: ManifoldAmplitudes,
    pub grid: TimeGrid,
}

impl DynamicsSpec {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !self.initial.is_finite() || !(self.initial.norm() > 0.0) {
            return Err(Error::InvalidSpec("initial state must have positive finite norm".into()));
        }
        let p = &self.params;
        let all = [p.g_a, p.g_b, p.g_nl, p.delta_a, p.delta_b, p.huang_rhys];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("all parameters must be finite".into()));
        }
        if p.huang_rhys < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "Huang-Rhys factor must be non-negative, got {}",
                p.huang_rhys
            )));
        }
        Ok(())
    }

    pub fn rates(&self) -> Result<Rates> {
        Rates::new(&self.params, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub y: ManifoldAmplitudes,
}

impl Sample {
    pub fn p2(&self) -> f64 {
        excited_population(&self.y)
    }

    pub fn norm(&self) -> f64 {
        self.y.norm()
    }
}

/// Sampled trajectory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub samples: Vec<Sample>,
}

impl TimeSeries {
    pub const CSV_HEADER: &'static str = "t,a1,a2,b1,b2,c1,c2,d1,d2,e1,e2,f1,f2,p2,norm";

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn p2(&self) -> Vec<f64> {
        self.samples.iter().map(Sample::p2).collect()
    }

    pub fn probability(&self, which: Amplitude) -> Vec<f64> {
        self.samples.iter().map(|s| s.y.probability(which)).collect()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// `max_k |N(t_k) − N(t_0)|`.
    pub fn max_norm_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else {
            return 0.0;
        };
        let n0 = first.norm();
        self.samples
            .iter()
            .map(|s| (s.norm() - n0).abs())
            .fold(0.0, f64::max)
    }

    /// Full 15-column CSV, 17 significant digits, LF line endings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for s in &self.samples {
            write!(w, "{}", Sci(s.t))?;
            for v in s.y.0 {
                write!(w, ",{}", Sci(v))?;
            }
            writeln!(w, ",{},{}", Sci(s.p2()), Sci(s.norm()))?;
        }
        Ok(())
    }

    /// Two-column `t,p2` CSV for plotting.
    pub fn write_p2_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,p2")?;
        for s in &self.samples {
            writeln!(w, "{},{}", Sci(s.t), Sci(s.p2()))?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == Self::CSV_HEADER => {}
            other => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("unexpected header {other:?}"),
                })
            }
        }
        let mut samples = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let values = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 2,
                    message: e.to_string(),
                })?;
            if values.len() != 15 {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!("expected 15 columns, got {}", values.len()),
                });
            }
            let mut y = ManifoldAmplitudes::zero();
            y.0.copy_from_slice(&values[1..13]);
            samples.push(Sample { t: values[0], y });
        }
        Ok(Self { samples })
    }
}

/// Formats a double with 17 significant digits.
#[derive(Debug, Clone, Copy)]
pub struct Sci(pub f64);

impl fmt::Display for Sci {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

/// Integrates the manifold equations with fixed-step RK4 and samples the
/// trajectory on the spec's output grid.
pub fn integrate(spec: &DynamicsSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let rates = spec.rates()?;
    let grid = &spec.grid;
    let per = grid.steps_per_sample();
    let h = grid.step();

    let mut samples = Vec::with_capacity(grid.samples + 1);
    let mut y = spec.initial;
    samples.push(Sample { t: grid.t_start, y });
    for k in 0..grid.samples {
        let base = k * per;
        for j in 0..per {
            let t = grid.t_start + (base + j) as f64 * h;
            let next = rk4_step(t, &y, h, &rates);
            if !next.is_finite() {
                return Err(Error::Diverged { last_good_t: t });
            }
            y = next;
        }
        samples.push(Sample { t: grid.time(k + 1), y });
    }
    Ok(TimeSeries { samples })
}
