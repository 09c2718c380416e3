//! Physical parameters of the dot–cavity–phonon system and the closed-form
//! polaron and material formulas derived from them.
//!
//! Dynamics parameters are dimensionless multiples of a reference rate
//! (conventionally `g_a`). Only [`gnl_from_material`] works in SI units.

use crate::error::{Error, Result};

/// Vacuum permittivity in F/m (CODATA 2018).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Reduced Planck constant in J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;

/// One discretized phonon mode coupled diagonally to the exciton.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononMode {
    pub coupling: f64,
    pub frequency: f64,
}

impl PhononMode {
    pub fn new(coupling: f64, frequency: f64) -> Result<Self> {
        let mode = Self { coupling, frequency };
        mode.validate()?;
        Ok(mode)
    }

    fn validate(&self) -> Result<()> {
        if !self.coupling.is_finite() {
            return Err(Error::InvalidSpectrum(format!(
                "phonon coupling must be finite, got {}",
                self.coupling
            )));
        }
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(Error::InvalidSpectrum(format!(
                "phonon frequency must be positive and finite, got {}",
                self.frequency
            )));
        }
        Ok(())
    }
}

/// Discretized phonon bath `{(M_q, ω_q)}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhononSpectrum {
    pub modes: Vec<PhononMode>,
}

impl PhononSpectrum {
    pub fn new(modes: Vec<PhononMode>) -> Self {
        Self { modes }
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Concatenation of two spectra (disjoint union of modes).
    pub fn union(&self, other: &PhononSpectrum) -> PhononSpectrum {
        let mut modes = self.modes.clone();
        modes.extend_from_slice(&other.modes);
        PhononSpectrum { modes }
    }

    fn validate(&self) -> Result<()> {
        self.modes.iter().try_for_each(PhononMode::validate)
    }
}

/// Polaron shift `Δ = Σ_q M_q² / ω_q`.
pub fn polaron_shift(spectrum: &PhononSpectrum) -> Result<f64> {
    spectrum.validate()?;
    Ok(spectrum
        .modes
        .iter()
        .map(|m| m.coupling * m.coupling / m.frequency)
        .sum())
}

/// Huang–Rhys factor `λ = Σ_q (M_q / ω_q)²`.
pub fn huang_rhys(spectrum: &PhononSpectrum) -> Result<f64> {
    spectrum.validate()?;
    Ok(spectrum
        .modes
        .iter()
        .map(|m| {
            let r = m.coupling / m.frequency;
            r * r
        })
        .sum())
}

/// Zero-temperature phonon dressing of a dot–photon coupling: `g·e^(−λ/2)`.
pub fn dressed_coupling(g: f64, huang_rhys: f64) -> Result<f64> {
    if !(huang_rhys >= 0.0) {
        return Err(Error::Domain(format!(
            "Huang-Rhys factor must be non-negative, got {huang_rhys}"
        )));
    }
    Ok(g * (-0.5 * huang_rhys).exp())
}

/// Exciton detunings from the fundamental and second-harmonic modes in the
/// polaron frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detunings {
    pub delta_a: f64,
    pub delta_b: f64,
}

impl Detunings {
    /// Fundamental-mode frequency implied by the pair, `δ_a − δ_b`.
    pub fn implied_omega_a(&self) -> f64 {
        self.delta_a - self.delta_b
    }
}

/// `δ_a = ω_ex − ω_a − Δ`, `δ_b = ω_ex − 2ω_a − Δ`.
///
/// Computed so that `δ_a − δ_b` reproduces `ω_a` to the last bit whenever
/// the subtraction is exact.
pub fn detunings(omega_ex: f64, omega_a: f64, polaron_shift: f64) -> Detunings {
    let shifted = omega_ex - polaron_shift;
    let delta_a = shifted - omega_a;
    let delta_b = delta_a - omega_a;
    Detunings { delta_a, delta_b }
}

/// Inputs of the χ⁽²⁾ coupling calculator, all in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialConstants {
    /// Second-order susceptibility (m/V).
    pub chi2: f64,
    /// Relative permittivity of the host.
    pub eps_r: f64,
    /// Vacuum permittivity (F/m).
    pub eps_0: f64,
    /// Effective nonlinear overlap volume (m³), `1/√V_r = ∫ α(r)³ dr`.
    pub overlap_volume: f64,
}

impl MaterialConstants {
    pub fn new(chi2: f64, eps_r: f64, overlap_volume: f64) -> Self {
        Self {
            chi2,
            eps_r,
            eps_0: VACUUM_PERMITTIVITY,
            overlap_volume,
        }
    }
}

/// Nonlinear coupling rate in rad/s from `ħ g_nl = ε₀ (ħω_a / ε₀ε_r)^{3/2} χ⁽²⁾ / √V_r`.
///
/// `omega_a` is the fundamental angular frequency in rad/s. Divide the
/// result by the chosen reference rate to feed it to the dynamics.
pub fn gnl_from_material(mat: &MaterialConstants, omega_a: f64) -> Result<f64> {
    if !(mat.eps_r > 0.0) {
        return Err(Error::Domain(format!(
            "relative permittivity must be positive, got {}",
            mat.eps_r
        )));
    }
    if !(mat.overlap_volume > 0.0) {
        return Err(Error::Domain(format!(
            "overlap volume must be positive, got {}",
            mat.overlap_volume
        )));
    }
    if !(mat.eps_0 > 0.0) {
        return Err(Error::Domain(format!(
            "vacuum permittivity must be positive, got {}",
            mat.eps_0
        )));
    }
    let photon_energy = HBAR * omega_a;
    let field_scale = (photon_energy / (mat.eps_0 * mat.eps_r)).powf(1.5);
    let energy = mat.eps_0 * field_scale * mat.chi2 / mat.overlap_volume.sqrt();
    Ok(energy / HBAR)
}

/// Full set of frequencies and couplings of the cavity Hamiltonian.
///
/// The second-harmonic frequency is not stored: it is always `2·ω_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega_a: f64,
    pub omega_ex: f64,
    pub g_a: f64,
    pub g_b: f64,
    pub g_nl: f64,
    pub huang_rhys: f64,
    pub polaron_shift: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_a", self.omega_a),
            ("omega_ex", self.omega_ex),
            ("g_a", self.g_a),
            ("g_b", self.g_b),
            ("g_nl", self.g_nl),
            ("lambda", self.huang_rhys),
            ("polaron_shift", self.polaron_shift),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain(format!("{name} must be finite, got {v}")));
        }
        if self.huang_rhys < 0.0 {
            return Err(Error::Domain(format!(
                "Huang-Rhys factor must be non-negative, got {}",
                self.huang_rhys
            )));
        }
        Ok(())
    }

    pub fn omega_b(&self) -> f64 {
        2.0 * self.omega_a
    }

    /// Polaron-shifted exciton frequency `ω_ex − Δ`.
    pub fn shifted_exciton(&self) -> f64 {
        self.omega_ex - self.polaron_shift
    }

    pub fn detunings(&self) -> Detunings {
        detunings(self.omega_ex, self.omega_a, self.polaron_shift)
    }

    /// Parameters realizing given detunings with `Δ = 0`:
    /// `ω_a = δ_a − δ_b`, `ω_ex = δ_a + ω_a`.
    pub fn from_detunings(
        g_a: f64,
        g_b: f64,
        g_nl: f64,
        det: Detunings,
        huang_rhys: f64,
    ) -> Self {
        let omega_a = det.implied_omega_a();
        Self {
            omega_a,
            omega_ex: det.delta_a + omega_a,
            g_a,
            g_b,
            g_nl,
            huang_rhys,
            polaron_shift: 0.0,
        }
    }

    /// Fills `λ` and `Δ` from a phonon spectrum.
    pub fn with_spectrum(mut self, spectrum: &PhononSpectrum) -> Result<Self> {
        self.huang_rhys = huang_rhys(spectrum)?;
        self.polaron_shift = polaron_shift(spectrum)?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(pairs: &[(f64, f64)]) -> PhononSpectrum {
        PhononSpectrum::new(
            pairs
                .iter()
                .map(|&(m, w)| PhononMode { coupling: m, frequency: w })
                .collect(),
        )
    }

    #[test]
    fn polaron_shift_examples() {
        assert_eq!(polaron_shift(&spec(&[])).unwrap(), 0.0);
        assert_relative_eq!(polaron_shift(&spec(&[(0.1, 1.0)])).unwrap(), 0.01, epsilon = 1e-16);
        assert_relative_eq!(
            polaron_shift(&spec(&[(0.1, 1.0), (0.2, 2.0)])).unwrap(),
            0.03,
            epsilon = 1e-15
        );
    }

    #[test]
    fn huang_rhys_examples() {
        assert_eq!(huang_rhys(&spec(&[])).unwrap(), 0.0);
        assert_relative_eq!(huang_rhys(&spec(&[(0.1, 1.0)])).unwrap(), 0.01, epsilon = 1e-16);
    }

    #[test]
    fn nonpositive_phonon_frequency_rejected() {
        for w in [0.0, -1.0, f64::NAN] {
            let s = spec(&[(0.1, 1.0), (0.1, w)]);
            assert!(matches!(polaron_shift(&s), Err(Error::InvalidSpectrum(_))));
            assert!(matches!(huang_rhys(&s), Err(Error::InvalidSpectrum(_))));
        }
        assert!(PhononMode::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn dressed_coupling_examples() {
        assert_eq!(dressed_coupling(1.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(dressed_coupling(2.0, 0.01).unwrap(), 2.0 * (-0.005f64).exp());
        // mpmath: exp(-0.5) = 0.606530659712633423603799534991
        assert_relative_eq!(
            dressed_coupling(1.0, 1.0).unwrap(),
            0.606_530_659_712_633_4,
            epsilon = 1e-15
        );
        assert!(matches!(dressed_coupling(1.0, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn detuning_examples() {
        assert_eq!(detunings(3.0, 1.0, 0.0), Detunings { delta_a: 2.0, delta_b: 1.0 });
        assert_eq!(detunings(1.0, 1.0, 0.0), Detunings { delta_a: 0.0, delta_b: -1.0 });
        let d = detunings(2.11, 1.0, 0.01);
        assert_relative_eq!(d.delta_a, 1.1, epsilon = 1e-14);
        assert_relative_eq!(d.delta_b, 0.1, epsilon = 1e-14);
    }

    #[test]
    fn gnl_material_reference_value() {
        // mpmath (30 digits): eps0=8.8541878128e-12, hbar=1.054571817e-34,
        // omega_a=1.2e15, eps_r=12.9, chi2=1e-10 m/V, V_r=1e-18 m^3
        // -> 309635693.889733738644445866473 rad/s
        let mat = MaterialConstants::new(1e-10, 12.9, 1e-18);
        let g = gnl_from_material(&mat, 1.2e15).unwrap();
        assert_relative_eq!(g, 309_635_693.889_733_7, max_relative = 1e-12);
    }

    #[test]
    fn gnl_material_scaling_and_errors() {
        let base = MaterialConstants::new(1e-10, 12.9, 1e-18);
        let g0 = gnl_from_material(&base, 1e15).unwrap();
        let zero = MaterialConstants { chi2: 0.0, ..base };
        assert_eq!(gnl_from_material(&zero, 1e15).unwrap(), 0.0);
        let doubled = MaterialConstants { chi2: 2e-10, ..base };
        assert_relative_eq!(gnl_from_material(&doubled, 1e15).unwrap(), 2.0 * g0, max_relative = 1e-14);
        let quad = MaterialConstants { overlap_volume: 4e-18, ..base };
        assert_relative_eq!(gnl_from_material(&quad, 1e15).unwrap(), 0.5 * g0, max_relative = 1e-14);
        assert_relative_eq!(
            gnl_from_material(&base, 4e15).unwrap(),
            8.0 * g0,
            max_relative = 1e-13
        );
        for bad in [
            MaterialConstants { eps_r: 0.0, ..base },
            MaterialConstants { overlap_volume: -1.0, ..base },
        ] {
            assert!(matches!(gnl_from_material(&bad, 1e15), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn params_round_trip_through_detunings() {
        let det = Detunings { delta_a: 1.0, delta_b: 0.1 };
        let p = ModelParams::from_detunings(1.0, 1.0, 2.0, det, 0.01);
        assert_eq!(p.omega_b(), 2.0 * p.omega_a);
        let back = p.detunings();
        assert_relative_eq!(back.delta_a, 1.0, epsilon = 1e-15);
        assert_relative_eq!(back.delta_b, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn spectrum_fills_lambda_and_shift() {
        let p = ModelParams::from_detunings(1.0, 1.0, 0.0, Detunings { delta_a: 1.0, delta_b: 0.0 }, 0.0)
            .with_spectrum(&spec(&[(0.1, 1.0), (0.2, 2.0)]))
            .unwrap();
        assert_relative_eq!(p.polaron_shift, 0.03, epsilon = 1e-15);
        assert_relative_eq!(p.huang_rhys, 0.02, epsilon = 1e-15);
    }

    fn mode() -> impl Strategy<Value = (f64, f64)> {
        (-5.0..5.0f64, 0.01..10.0f64)
    }

    proptest! {
        #[test]
        fn sums_are_additive_over_disjoint_spectra(
            s1 in prop::collection::vec(mode(), 0..6),
            s2 in prop::collection::vec(mode(), 0..6),
        ) {
            let (a, b) = (spec(&s1), spec(&s2));
            let u = a.union(&b);
            let tol = 1e-12;
            let lhs = polaron_shift(&u).unwrap();
            let rhs = polaron_shift(&a).unwrap() + polaron_shift(&b).unwrap();
            prop_assert!((lhs - rhs).abs() <= tol * (1.0 + lhs.abs()));
            let lhs = huang_rhys(&u).unwrap();
            let rhs = huang_rhys(&a).unwrap() + huang_rhys(&b).unwrap();
            prop_assert!((lhs - rhs).abs() <= tol * (1.0 + lhs.abs()));
            prop_assert!(polaron_shift(&u).unwrap() >= 0.0);
            prop_assert!(huang_rhys(&u).unwrap() >= 0.0);
        }

        #[test]
        fn detuning_difference_is_omega_a(
            ex in -10.0..10.0f64, wa in -10.0..10.0f64, shift in 0.0..2.0f64,
        ) {
            let d = detunings(ex, wa, shift);
            prop_assert!((d.delta_a - d.delta_b - wa).abs() <= 4.0 * f64::EPSILON * (1.0 + ex.abs() + wa.abs() + shift));
        }

        #[test]
        fn dressing_is_monotone(g in 0.0..10.0f64, l1 in 0.0..5.0f64, l2 in 0.0..5.0f64) {
            let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
            prop_assert!(dressed_coupling(g, hi).unwrap() <= dressed_coupling(g, lo).unwrap());
            prop_assert!(dressed_coupling(g, 0.0).unwrap() == g);
        }
    }
}
