//! Brute-force reference for the manifold equations: the polaron-frame
//! Hamiltonian on a truncated `|s, m, n⟩` Fock basis, propagated exactly
//! through its eigendecomposition.
//!
//! The phonon displacement operator is replaced by its zero-temperature
//! mean `e^(−λ/2)` and the bath energy is dropped (a global constant once
//! no phonons are excited). `S_z + ½` is 0 on `|1⟩` and 1 on `|2⟩`.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::manifold::{
    Amplitude, ManifoldAmplitudes, ManifoldIndex, Sample, Sci, TimeGrid, TimeSeries,
};
use crate::model::{dressed_coupling, ModelParams};

/// Largest photon cutoff accepted in full mode.
pub const MAX_FULL_CUTOFF: u32 = 16;

/// Dot level and photon numbers of one basis ket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub s: u8,
    pub m: u32,
    pub n: u32,
}

/// Truncated product basis, ordered s-major, then m, then n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    pub max_a: u32,
    pub max_b: u32,
}

impl FockBasis {
    pub fn new(max_a: u32, max_b: u32) -> Self {
        Self { max_a, max_b }
    }

    pub fn dim(&self) -> usize {
        2 * (self.max_a as usize + 1) * (self.max_b as usize + 1)
    }

    pub fn index(&self, s: BasisState) -> Option<usize> {
        if !(s.s == 1 || s.s == 2) || s.m > self.max_a || s.n > self.max_b {
            return None;
        }
        let per_level = (self.max_a as usize + 1) * (self.max_b as usize + 1);
        Some((s.s as usize - 1) * per_level + s.m as usize * (self.max_b as usize + 1) + s.n as usize)
    }

    pub fn states(&self) -> impl Iterator<Item = BasisState> + '_ {
        (1..=2u8).flat_map(move |s| {
            (0..=self.max_a).flat_map(move |m| (0..=self.max_b).map(move |n| BasisState { s, m, n }))
        })
    }

    /// Basis position of each manifold amplitude, in [`Amplitude::ALL`] order.
    pub fn manifold_indices(&self, idx: ManifoldIndex) -> Result<[usize; 6]> {
        let mut out = [0; 6];
        for (slot, amp) in out.iter_mut().zip(Amplitude::ALL) {
            let (s, m, n) = amp.state(idx);
            *slot = self.index(BasisState { s, m, n }).ok_or_else(|| {
                Error::OracleConfig(format!(
                    "cutoffs (N_a={}, N_b={}) cannot hold |{s},{m},{n}> of manifold (m={}, n={})",
                    self.max_a, self.max_b, idx.m, idx.n
                ))
            })?;
        }
        Ok(out)
    }
}

/// Whether couplings leaving the six manifold states are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    /// Only the six manifold states carry matrix elements.
    #[default]
    Restricted,
    /// Every element inside the cutoffs is kept.
    Full,
}

impl std::str::FromStr for OracleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "restricted" => Ok(Self::Restricted),
            "full" => Ok(Self::Full),
            other => Err(Error::Config(format!(
                "oracle mode must be `restricted` or `full`, got `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for OracleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Restricted => "restricted",
            Self::Full => "full",
        })
    }
}

/// Dense Hermitian Hamiltonian on a [`FockBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperatorMatrix {
    pub basis: FockBasis,
    pub matrix: DMatrix<Complex64>,
}

/// `H₀′` eigenvalue of a basis state: `ω_a m + 2ω_a n + (ω_ex − Δ)(s − 1)`.
pub fn free_energy(p: &ModelParams, s: BasisState) -> f64 {
    p.omega_a * f64::from(s.m) + p.omega_b() * f64::from(s.n) + p.shifted_exciton() * f64::from(s.s - 1)
}

impl FockOperatorMatrix {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn is_hermitian(&self) -> bool {
        let h = &self.matrix;
        (0..h.nrows()).all(|i| (0..h.ncols()).all(|j| h[(i, j)] == h[(j, i)].conj()))
    }

    /// Writes the matrix row-major, one row per line, entries as `re,im`
    /// separated by single spaces.
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|j| {
                    let z = self.matrix[(i, j)];
                    format!("{},{}", Sci(z.re), Sci(z.im))
                })
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Assembles the polaron-frame Hamiltonian `H₀′ + H_I′` with `X → e^(−λ/2)`.
pub fn build_hamiltonian(
    params: &ModelParams,
    basis: FockBasis,
    manifold: ManifoldIndex,
    mode: OracleMode,
) -> Result<FockOperatorMatrix> {
    params.validate()?;
    let keep = basis.manifold_indices(manifold)?;
    if mode == OracleMode::Full && (basis.max_a > MAX_FULL_CUTOFF || basis.max_b > MAX_FULL_CUTOFF) {
        return Err(Error::OracleConfig(format!(
            "full-mode cutoffs are capped at {MAX_FULL_CUTOFF}, got (N_a={}, N_b={})",
            basis.max_a, basis.max_b
        )));
    }
    let ga = dressed_coupling(params.g_a, params.huang_rhys)?;
    let gb = dressed_coupling(params.g_b, params.huang_rhys)?;

    let dim = basis.dim();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let mut couple = |i: usize, j: usize, v: f64| {
        h[(i, j)] += Complex64::new(v, 0.0);
        h[(j, i)] += Complex64::new(v, 0.0);
    };

    for st in basis.states() {
        let i = basis.index(st).expect("enumerated state is in basis");
        let (m, n) = (f64::from(st.m), f64::from(st.n));
        // σ₊a: |1, m+1, n⟩ → |2, m, n⟩ with √(m+1); σ₊b likewise with √(n+1)
        if st.s == 2 {
            if let Some(j) = basis.index(BasisState { s: 1, m: st.m + 1, n: st.n }) {
                couple(i, j, ga * (m + 1.0).sqrt());
            }
            if let Some(j) = basis.index(BasisState { s: 1, m: st.m, n: st.n + 1 }) {
                couple(i, j, gb * (n + 1.0).sqrt());
            }
        }
        // b (a†)²: |s, m, n+1⟩ → |s, m+2, n⟩ with √(n+1)√((m+1)(m+2))
        if let (Some(j), Some(k)) = (
            basis.index(BasisState { s: st.s, m: st.m + 2, n: st.n }),
            basis.index(BasisState { s: st.s, m: st.m, n: st.n + 1 }),
        ) {
            couple(j, k, params.g_nl * (n + 1.0).sqrt() * ((m + 1.0) * (m + 2.0)).sqrt());
        }
    }
    for st in basis.states() {
        let i = basis.index(st).expect("enumerated state is in basis");
        h[(i, i)] = Complex64::new(free_energy(params, st), 0.0);
    }

    if mode == OracleMode::Restricted {
        let outside: Vec<usize> = (0..dim).filter(|i| !keep.contains(i)).collect();
        for &i in &outside {
            h.row_mut(i).fill(Complex64::new(0.0, 0.0));
            h.column_mut(i).fill(Complex64::new(0.0, 0.0));
        }
    }

    Ok(FockOperatorMatrix { basis, matrix: h })
}

/// Spectral form `H = V diag(E) V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Propagator {
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 100_000;

impl Propagator {
    pub fn new(h: &FockOperatorMatrix) -> Result<Self> {
        let report = || {
            let m = &h.matrix;
            let max_entry = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
            format!(
                "dim {}, Frobenius norm {:.3e}, max |entry| {:.3e}, hermitian {}",
                m.nrows(),
                m.norm(),
                max_entry,
                h.is_hermitian()
            )
        };
        if !h.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Eigen(format!("non-finite matrix entries ({})", report())));
        }
        let eig = SymmetricEigen::try_new(h.matrix.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
            .ok_or_else(|| Error::Eigen(format!("QR iteration did not converge ({})", report())))?;
        let vectors = eig.eigenvectors;
        let gram = vectors.adjoint() * &vectors;
        let dev = (0..gram.nrows())
            .flat_map(|i| (0..gram.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| {
                let id = if i == j { 1.0 } else { 0.0 };
                (gram[(i, j)] - Complex64::new(id, 0.0)).norm()
            })
            .fold(0.0, f64::max);
        if dev > 1e-10 {
            return Err(Error::Eigen(format!(
                "eigenvectors not unitary to 1e-10 (max deviation {dev:.3e}; {})",
                report()
            )));
        }
        Ok(Self {
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `e^(−iHt) ψ₀`.
    pub fn evolve(&self, psi0: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let mut coeffs = self.vectors.ad_mul(psi0);
        for (c, &e) in coeffs.iter_mut().zip(&self.energies) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        &self.vectors * coeffs
    }
}

/// `ψ(t) = e^(−iHt) ψ₀` for each requested time.
pub fn propagate(
    h: &FockOperatorMatrix,
    psi0: &DVector<Complex64>,
    times: &[f64],
) -> Result<Vec<DVector<Complex64>>> {
    if psi0.len() != h.dim() {
        return Err(Error::OracleConfig(format!(
            "state has length {} but basis dimension is {}",
            psi0.len(),
            h.dim()
        )));
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::OracleConfig(format!("initial state must be normalized, |ψ₀| = {norm}")));
    }
    let prop = Propagator::new(h)?;
    Ok(times.iter().map(|&t| prop.evolve(psi0, t)).collect())
}

/// Strips the free `H₀′` phases from the six manifold components:
/// `C_k = e^(+iE⁰_k t) ψ_k`.
pub fn to_interaction_picture(
    psi: &DVector<Complex64>,
    t: f64,
    params: &ModelParams,
    basis: FockBasis,
    manifold: ManifoldIndex,
) -> Result<ManifoldAmplitudes> {
    let idx = basis.manifold_indices(manifold)?;
    let mut y = ManifoldAmplitudes::zero();
    for (amp, &i) in Amplitude::ALL.iter().zip(&idx) {
        let (s, m, n) = amp.state(manifold);
        let e0 = free_energy(params, BasisState { s, m, n });
        let c = psi[i] * Complex64::from_polar(1.0, e0 * t);
        y.set(*amp, c.re, c.im);
    }
    Ok(y)
}

/// Oracle trajectory projected onto the manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub series: TimeSeries,
    /// Probability outside the six manifold states, per sample, relative to
    /// the initial norm.
    pub leakage: Vec<f64>,
}

impl OracleResult {
    pub fn max_leakage(&self) -> f64 {
        self.leakage.iter().copied().fold(0.0, f64::max)
    }
}

/// Oracle settings: photon cutoffs and truncation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleSettings {
    pub basis: FockBasis,
    pub mode: OracleMode,
}

impl OracleSettings {
    /// Cutoffs two photons beyond the manifold's highest occupation.
    pub fn default_for(manifold: ManifoldIndex, mode: OracleMode) -> Self {
        Self {
            basis: FockBasis::new(manifold.m + 4, manifold.n + 3),
            mode,
        }
    }
}

/// Propagates the manifold initial state through the Fock-space reference
/// on the given grid and returns the interaction-picture amplitudes.
pub fn run_oracle(
    model: &ModelParams,
    manifold: ManifoldIndex,
    initial: &ManifoldAmplitudes,
    grid: &TimeGrid,
    settings: OracleSettings,
) -> Result<OracleResult> {
    grid.validate()?;
    let model = *model;
    let basis = settings.basis;
    let h = build_hamiltonian(&model, basis, manifold, settings.mode)?;
    let idx = basis.manifold_indices(manifold)?;

    let norm0 = initial.norm();
    if !(norm0 > 0.0) || !norm0.is_finite() {
        return Err(Error::OracleConfig("initial state must have positive finite norm".into()));
    }
    let scale = norm0.sqrt();
    let mut psi0 = DVector::<Complex64>::zeros(basis.dim());
    for (amp, &i) in Amplitude::ALL.iter().zip(&idx) {
        let (re, im) = initial.get(*amp);
        let (s, m, n) = amp.state(manifold);
        let e0 = free_energy(&model, BasisState { s, m, n });
        psi0[i] = Complex64::new(re, im) / scale * Complex64::from_polar(1.0, -e0 * grid.t_start);
    }

    let prop = Propagator::new(&h)?;
    let mut samples = Vec::with_capacity(grid.samples + 1);
    let mut leakage = Vec::with_capacity(grid.samples + 1);
    for t in grid.times() {
        let psi = prop.evolve(&psi0, t - grid.t_start);
        let unit = to_interaction_picture(&psi, t, &model, basis, manifold)?;
        let y = scale * unit;
        leakage.push((psi.norm_squared() - unit.norm()).max(0.0));
        samples.push(Sample { t, y });
    }
    Ok(OracleResult {
        series: TimeSeries { samples },
        leakage,
    })
}

/// Largest absolute difference over all samples and the 12 real components.
pub fn compare(oracle: &TimeSeries, ode: &TimeSeries) -> Result<f64> {
    if oracle.len() != ode.len() {
        return Err(Error::Comparison(format!(
            "sample counts differ: {} vs {}",
            oracle.len(),
            ode.len()
        )));
    }
    let mut worst = 0.0f64;
    for (k, (a, b)) in oracle.samples.iter().zip(&ode.samples).enumerate() {
        if (a.t - b.t).abs() > 1e-12 * (1.0 + a.t.abs()) {
            return Err(Error::Comparison(format!(
                "time grids differ at row {k}: {} vs {}",
                a.t, b.t
            )));
        }
        worst = worst.max(a.y.max_abs_diff(&b.y));
    }
    Ok(worst)
}
