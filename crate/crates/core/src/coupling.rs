//! Physical trap/laser parameters, the dimensionless coupling context
//! `(eta, g)`, and Fock-state-dependent Rabi frequencies.
//!
//! The carrier Rabi frequency between `|n>|dn>` and `|n'>|up>` is
//!
//! ```text
//! Omega_{n',n} = g exp(-eta^2/2) eta^|dn| sqrt(n_<!/n_>!) L_{n_<}^{|dn|}(eta^2)
//! ```
//!
//! with `dn = n' - n`. The value is kept signed (the Laguerre factor can go
//! negative at large `eta`); its magnitude is the modulus of the displacement
//! matrix element `<n'|exp(i eta (a + a^dag))|n>`.

use crate::error::{Error, Result};
use crate::specfun::{laguerre_unchecked, sqrt_factorial_ratio};

/// Reduced Planck constant in J s (CODATA, 10 significant figures). Pinned so
/// unit-mode outputs are bit-for-bit reproducible at double precision.
pub const HBAR: f64 = 1.054571817e-34;

/// Two-photon stimulated-Raman drive parameters: the two single-beam Rabi
/// frequencies and the (nonzero) detuning from the virtual level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanParams {
    pub g1: f64,
    pub g2: f64,
    pub detuning: f64,
}

/// Physical parameters of one trapped-ion setup, all in SI units
/// (angular frequencies in rad/s).
///
/// `effective_wavevector` is `|k . z|` for a single beam or `|k1 - k2|`
/// projected on the motional axis for a Raman pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    pub total_mass: f64,
    pub trap_frequency: f64,
    pub internal_splitting: f64,
    pub effective_wavevector: f64,
    pub dipole_coupling: f64,
    pub raman: Option<RamanParams>,
    pub rf_drive: Option<f64>,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        Error::check_positive("total_mass", self.total_mass)?;
        Error::check_positive("trap_frequency", self.trap_frequency)?;
        Error::check_positive("internal_splitting", self.internal_splitting)?;
        Error::check_non_negative("effective_wavevector", self.effective_wavevector)?;
        Error::check_positive("dipole_coupling", self.dipole_coupling)?;
        if let Some(raman) = &self.raman {
            if raman.detuning == 0.0 || !raman.detuning.is_finite() {
                return Err(Error::ZeroDetuning);
            }
        }
        if let Some(rf) = self.rf_drive {
            if rf <= self.trap_frequency {
                return Err(Error::RfFrequencyOrder {
                    omega: self.trap_frequency,
                    omega_rf: rf,
                });
            }
        }
        Ok(())
    }
}

/// The dimensionless coupling context for one ion: Lamb-Dicke parameter
/// `eta > 0` and base Rabi frequency `g > 0` (`g = 1` in dimensionless mode,
/// where all durations are expressed as pulse areas).
///
/// No upper bound is placed on `eta`: magic values for higher Fock pairs
/// exceed 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingContext {
    eta: f64,
    g: f64,
}

impl CouplingContext {
    pub fn new(eta: f64, g: f64) -> Result<Self> {
        Error::check_positive("eta", eta)?;
        Error::check_positive("g", g)?;
        Ok(Self { eta, g })
    }

    /// Dimensionless mode: `g = 1`, durations are pulse areas.
    pub fn dimensionless(eta: f64) -> Result<Self> {
        Self::new(eta, 1.0)
    }

    /// Derive the context from physical parameters. Uses the Raman effective
    /// coupling `g1 g2 / Delta` when Raman parameters are present, the direct
    /// dipole coupling otherwise; `eta` uses the caller-supplied effective
    /// wavevector either way.
    pub fn from_physical(params: &PhysicalParams) -> Result<Self> {
        params.validate()?;
        let eta = lamb_dicke(params)?;
        let g = match &params.raman {
            Some(r) => raman_effective_g(r.g1, r.g2, r.detuning)?,
            None => params.dipole_coupling,
        };
        Self::new(eta, g)
    }

    pub fn eta(&self) -> f64 { self.eta }
    pub fn g(&self) -> f64 { self.g }
}

/// Zero-point spread of the center-of-mass mode, `z0 = sqrt(hbar / (2 M omega))`.
pub fn zero_point_spread(total_mass: f64, trap_frequency: f64) -> Result<f64> {
    Error::check_positive("total_mass", total_mass)?;
    Error::check_positive("trap_frequency", trap_frequency)?;
    Ok((HBAR / (2.0 * total_mass * trap_frequency)).sqrt())
}

/// Lamb-Dicke parameter `eta = |dk| z0`. Errors when the effective
/// wavevector vanishes: without it the laser cannot couple internal and
/// motional states and no gate is possible.
pub fn lamb_dicke(params: &PhysicalParams) -> Result<f64> {
    params.validate()?;
    if params.effective_wavevector == 0.0 {
        return Err(Error::ZeroWavevector);
    }
    let z0 = zero_point_spread(params.total_mass, params.trap_frequency)?;
    Ok(params.effective_wavevector * z0)
}

/// Effective two-photon Rabi frequency `g1 g2 / Delta` of a stimulated Raman
/// transition through a far-detuned virtual level.
pub fn raman_effective_g(g1: f64, g2: f64, detuning: f64) -> Result<f64> {
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(Error::ZeroDetuning);
    }
    Ok(g1 * g2 / detuning)
}

/// Pseudopotential micromotion correction for rf (Paul) trap confinement
/// along the motional axis: `eta -> eta [1 - omega / (2 sqrt(2) omega_rf)]`.
///
/// Only valid for rf confinement with `omega << omega_rf`; there is no
/// correction for a mode confined by static fields.
pub fn micromotion_corrected_eta(eta: f64, omega: f64, omega_rf: f64) -> Result<f64> {
    Error::check_positive("eta", eta)?;
    Error::check_positive("omega", omega)?;
    if !omega_rf.is_finite() || omega_rf <= omega {
        return Err(Error::RfFrequencyOrder { omega, omega_rf });
    }
    Ok(eta * (1.0 - omega / (2.0 * std::f64::consts::SQRT_2 * omega_rf)))
}

/// Rabi frequency `Omega_{n_to,n_from}` coupling `|n_from>|dn>` and
/// `|n_to>|up>`, signed per the Laguerre closed form. Symmetric in its two
/// Fock arguments. For `n_from = n_to = n` this is the carrier value
/// `g exp(-eta^2/2) L_n(eta^2)`; in particular
/// `Omega_00 = g exp(-eta^2/2)` and `Omega_11 = g exp(-eta^2/2)(1 - eta^2)`.
pub fn rabi_frequency(n_from: usize, n_to: usize, ctx: &CouplingContext) -> f64 {
    ctx.g * rabi_ratio(n_from, n_to, ctx.eta)
}

/// `Omega_{n_to,n_from} / g`: the dimensionless part of the Rabi frequency.
pub(crate) fn rabi_ratio(n_from: usize, n_to: usize, eta: f64) -> f64 {
    let lo = n_from.min(n_to);
    let hi = n_from.max(n_to);
    let delta = hi - lo;
    let x = eta * eta;
    (-x / 2.0).exp()
        * eta.powi(delta as i32)
        * sqrt_factorial_ratio(lo, hi).expect("lo <= hi by construction")
        * laguerre_unchecked(lo, delta, x)
}

#[cfg(test)]
mod tests {
    // eta literals are quoted at the published table's precision
    #![allow(clippy::approx_constant)]

    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {b}, got {a} (tol {tol})");
    }

    fn be9_params() -> PhysicalParams {
        PhysicalParams {
            total_mass: 1.49645e-26,
            trap_frequency: std::f64::consts::TAU * 10.0e6,
            internal_splitting: std::f64::consts::TAU * 1.25e9,
            effective_wavevector: 2.0 * std::f64::consts::TAU / 313.0e-9,
            dipole_coupling: std::f64::consts::TAU * 500.0e3,
            raman: None,
            rf_drive: None,
        }
    }

    #[test]
    fn zero_point_spread_value_and_scaling() {
        // mpmath oracle: sqrt(hbar / (2 M omega)) for a single 9Be+ ion in a
        // 10 MHz trap.
        let z0 = zero_point_spread(1.49645e-26, std::f64::consts::TAU * 10.0e6).unwrap();
        close(z0, 7.48862430464104e-9, 1e-20);

        // Power laws: doubling M scales by 1/sqrt(2); quadrupling omega halves.
        let base = zero_point_spread(1.0e-26, 1.0e7).unwrap();
        let heavier = zero_point_spread(2.0e-26, 1.0e7).unwrap();
        let stiffer = zero_point_spread(1.0e-26, 4.0e7).unwrap();
        close(heavier / base, 0.5f64.sqrt(), 1e-15);
        close(base / stiffer, 2.0, 1e-15);
    }

    #[test]
    fn zero_point_spread_rejects_non_positive() {
        assert!(zero_point_spread(0.0, 1.0).is_err());
        assert!(zero_point_spread(1.0, -1.0).is_err());
    }

    #[test]
    fn lamb_dicke_is_wavevector_times_spread() {
        let mut p = be9_params();
        let z0 = zero_point_spread(p.total_mass, p.trap_frequency).unwrap();

        p.effective_wavevector = 0.707 / z0;
        close(lamb_dicke(&p).unwrap(), 0.707, 1e-12);

        // Linearity in |dk|.
        let eta1 = lamb_dicke(&p).unwrap();
        p.effective_wavevector *= 2.0;
        close(lamb_dicke(&p).unwrap(), 2.0 * eta1, 1e-12);

        // Round trip: pick |dk| so eta = 0.5 and recover it.
        p.effective_wavevector = 0.5 / z0;
        close(lamb_dicke(&p).unwrap(), 0.5, 1e-12);
    }

    #[test]
    fn lamb_dicke_rejects_zero_wavevector() {
        let mut p = be9_params();
        p.effective_wavevector = 0.0;
        assert_eq!(lamb_dicke(&p), Err(Error::ZeroWavevector));
    }

    #[test]
    fn raman_effective_coupling() {
        use std::f64::consts::TAU;
        close(raman_effective_g(1.0, 1.0, 1.0).unwrap(), 1.0, 0.0);
        // Two 2pi x 500 kHz beams detuned 2pi x 50 GHz -> 2pi x 5 Hz.
        let g = raman_effective_g(TAU * 5.0e5, TAU * 5.0e5, TAU * 5.0e10).unwrap();
        close(g, TAU * 5.0, 1e-9);
        // Linear in 1/Delta.
        let half = raman_effective_g(TAU * 5.0e5, TAU * 5.0e5, TAU * 1.0e11).unwrap();
        close(half, g / 2.0, 1e-12);
        assert_eq!(raman_effective_g(1.0, 1.0, 0.0), Err(Error::ZeroDetuning));
    }

    #[test]
    fn raman_context_changes_g_but_not_eta() {
        let mut p = be9_params();
        let direct = CouplingContext::from_physical(&p).unwrap();
        p.raman = Some(RamanParams { g1: 2.0e5, g2: 3.0e5, detuning: 1.0e10 });
        let raman = CouplingContext::from_physical(&p).unwrap();
        close(raman.eta(), direct.eta(), 0.0);
        close(raman.g(), 2.0e5 * 3.0e5 / 1.0e10, 1e-9);
    }

    #[test]
    fn micromotion_correction() {
        // omega_rf = 10 omega: eta (1 - 1/(20 sqrt 2)); mpmath oracle below.
        let eta = micromotion_corrected_eta(0.707, 1.0, 10.0).unwrap();
        close(eta, 0.6820037752850555, 1e-15);

        // Correction factor is independent of eta.
        let a = micromotion_corrected_eta(0.3, 1.0, 10.0).unwrap() / 0.3;
        let b = micromotion_corrected_eta(1.1, 1.0, 10.0).unwrap() / 1.1;
        close(a, b, 1e-15);

        // Vanishes as omega_rf -> infinity.
        let far = micromotion_corrected_eta(0.707, 1.0, 1.0e12).unwrap();
        close(far, 0.707, 1e-12);

        assert!(micromotion_corrected_eta(0.707, 2.0, 1.0).is_err());
        assert!(micromotion_corrected_eta(0.707, 1.0, 1.0).is_err());
    }

    #[test]
    fn rabi_frequency_eq5_values() {
        let ctx = CouplingContext::dimensionless(0.707107).unwrap();
        // Omega_00/g = exp(-eta^2/2), Omega_11/g = exp(-eta^2/2)(1 - eta^2)
        close(rabi_frequency(0, 0, &ctx), 0.7788006625718524, 1e-15);
        close(rabi_frequency(1, 1, &ctx), 0.38940009028684, 1e-15);
        // Ratio (2k+1)/2m at the k=0, m=1 magic point.
        let ratio = rabi_frequency(1, 1, &ctx) / rabi_frequency(0, 0, &ctx);
        close(ratio, 0.5, 1e-6); // eta quoted to 6 digits
    }

    #[test]
    fn rabi_frequency_sideband_value_and_symmetry() {
        let ctx = CouplingContext::dimensionless(0.5).unwrap();
        // |<0|exp(i eta (a+a^dag))|1>| = eta exp(-eta^2/2)
        close(rabi_frequency(0, 1, &ctx), 0.4412484512922977, 1e-15);

        let ctx = CouplingContext::dimensionless(0.913).unwrap();
        close(
            rabi_frequency(2, 5, &ctx),
            rabi_frequency(5, 2, &ctx),
            0.0,
        );
    }

    #[test]
    fn rabi_frequency_scales_with_g() {
        let a = CouplingContext::new(0.62, 1.0).unwrap();
        let b = CouplingContext::new(0.62, 2.5e5).unwrap();
        close(
            rabi_frequency(3, 1, &b),
            2.5e5 * rabi_frequency(3, 1, &a),
            1e-9,
        );
    }

    #[test]
    fn eq5_identities_exact_over_eta_grid() {
        // Algebraic special cases of the general closed form, checked on the
        // same grid the acceptance suite uses.
        for i in 1..=100 {
            let eta = 1.5 * (i as f64) / 100.0;
            let ctx = CouplingContext::dimensionless(eta).unwrap();
            let w00 = (-eta * eta / 2.0).exp();
            let w11 = w00 * (1.0 - eta * eta);
            close(rabi_frequency(0, 0, &ctx), w00, 1e-14);
            close(rabi_frequency(1, 1, &ctx), w11, 1e-14);
        }
    }

    #[test]
    fn diagonal_rabi_bounded_by_g() {
        // |<n|U|n>| <= 1 for a unitary, so |Omega_nn| <= g.
        for n in 0..=12usize {
            for &eta in &[0.1, 0.5, 0.707, 0.913, 1.3, 1.9] {
                let ctx = CouplingContext::dimensionless(eta).unwrap();
                let w = rabi_frequency(n, n, &ctx);
                assert!(w <= 1.0 + 1e-12, "Omega_{n}{n}({eta}) = {w}");
                assert!(w.abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn context_validation() {
        assert!(CouplingContext::new(0.0, 1.0).is_err());
        assert!(CouplingContext::new(-0.5, 1.0).is_err());
        assert!(CouplingContext::new(0.5, 0.0).is_err());
        assert!(CouplingContext::new(f64::NAN, 1.0).is_err());
        // Large eta is allowed: higher-Fock magic values exceed 1.
        assert!(CouplingContext::dimensionless(1.93).is_ok());
    }
}
