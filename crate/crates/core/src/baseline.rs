//! Closed-form solutions of the limiting two-state problems.

use crate::error::{Error, Result};

/// Excited-state population of the detuned, phonon-dressed two-state
/// exchange `|2,m,n⟩ ↔ |1,m+1,n⟩` starting in `|2,m,n⟩`.
///
/// `G = g e^(−λ/2) √(m+1)`, `Ω = √(δ² + 4G²)`,
/// `P₂(t) = 1 − (4G²/Ω²) sin²(Ωt/2)`.
pub fn jc_baseline(t: f64, g: f64, huang_rhys: f64, delta: f64, m: u32) -> Result<f64> {
    if !(g >= 0.0) {
        return Err(Error::Domain(format!("coupling must be non-negative, got {g}")));
    }
    if !(huang_rhys >= 0.0) {
        return Err(Error::Domain(format!(
            "Huang-Rhys factor must be non-negative, got {huang_rhys}"
        )));
    }
    let big_g = g * (-0.5 * huang_rhys).exp() * (f64::from(m) + 1.0).sqrt();
    let four_g2 = 4.0 * big_g * big_g;
    let omega2 = delta * delta + four_g2;
    if omega2 == 0.0 {
        return Ok(1.0);
    }
    let s = (0.5 * omega2.sqrt() * t).sin();
    Ok(1.0 - four_g2 / omega2 * s * s)
}

/// Generalized Rabi frequency `Ω = √(δ² + 4G²)` of [`jc_baseline`].
pub fn jc_frequency(g: f64, huang_rhys: f64, delta: f64, m: u32) -> f64 {
    let big_g = g * (-0.5 * huang_rhys).exp() * (f64::from(m) + 1.0).sqrt();
    (delta * delta + 4.0 * big_g * big_g).sqrt()
}

/// `Ω_nl = g_nl √((n+1)(m+1)(m+2))`.
pub fn nl_block_frequency(g_nl: f64, m: u32, n: u32) -> f64 {
    let (m, n) = (f64::from(m), f64::from(n));
    g_nl * ((n + 1.0) * (m + 1.0) * (m + 2.0)).sqrt()
}

/// `|B(t)|² = cos²(Ω_nl t)` for the isolated χ⁽²⁾ pair started in `B`.
pub fn nl_block_baseline(t: f64, g_nl: f64, m: u32, n: u32) -> Result<f64> {
    if !(g_nl >= 0.0) {
        return Err(Error::Domain(format!(
            "nonlinear coupling must be non-negative, got {g_nl}"
        )));
    }
    Ok((nl_block_frequency(g_nl, m, n) * t).cos().powi(2))
}
