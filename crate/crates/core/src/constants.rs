//! Physical constants and the handful of unit conversions the models need.
//!
//! Everything inside the crate is SI. Conversions from amu, Å³ or degrees
//! happen only where data enters (config files, presets).
//!
//! # Polarizability convention
//!
//! Polarizabilities are carried as *polarizability volumes* α (m³), the
//! Gaussian-unit convention in which tabulated cluster polarizabilities are
//! usually quoted in Å³. With that convention the retarded Casimir-Polder
//! coefficient of a particle in front of a perfectly conducting plane is
//!
//! ```text
//! C4 = 3 ħ c α / (8π)        [J·m⁴]
//! ```
//!
//! A polarizability given in SI (C·m²/V) must be divided by 4πε₀ before use.

use std::f64::consts::PI;

use crate::error::{require_positive, Result};

/// Planck constant (J·s), exact since the 2019 SI revision.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant ħ = h/2π (J·s).
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Boltzmann constant (J/K), exact.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Standard gravitational acceleration used throughout (m/s²).
pub const GRAVITY: f64 = 9.81;
/// Angular frequency of Earth's rotation (rad/s), 73 µrad/s.
pub const EARTH_ROTATION: f64 = 7.3e-5;
/// Atomic mass unit (kg), CODATA 2018.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// One cubic ångström in m³.
pub const ANGSTROM3: f64 = 1e-30;

/// The constant set as a value, for code that wants to pass it around or
/// override `g` / `ω` (e.g. a different site).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub h: f64,
    pub hbar: f64,
    pub k_b: f64,
    pub c: f64,
    pub g: f64,
    pub omega_earth: f64,
    pub amu: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            h: PLANCK,
            hbar: HBAR,
            k_b: BOLTZMANN,
            c: SPEED_OF_LIGHT,
            g: GRAVITY,
            omega_earth: EARTH_ROTATION,
            amu: AMU,
        }
    }
}

pub fn amu_to_kg(mass_amu: f64) -> Result<f64> {
    require_positive("amu_to_kg", "mass", mass_amu)?;
    Ok(mass_amu * AMU)
}

pub fn kg_to_amu(mass_kg: f64) -> Result<f64> {
    require_positive("kg_to_amu", "mass", mass_kg)?;
    Ok(mass_kg / AMU)
}

/// Casimir-Polder coefficient C4 = 3ħcα/8π for a polarizability volume `alpha` (m³).
pub fn polarizability_to_c4(alpha: f64) -> Result<f64> {
    require_positive("polarizability_to_c4", "alpha", alpha)?;
    Ok(3.0 * HBAR * SPEED_OF_LIGHT * alpha / (8.0 * PI))
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn constant_set_is_consistent() {
        let c = PhysicalConstants::default();
        assert_relative_eq!(c.hbar, c.h / (2.0 * PI), max_relative = 1e-15);
        for v in [c.h, c.hbar, c.k_b, c.c, c.g, c.omega_earth, c.amu] {
            assert!(v > 0.0);
        }
        assert_eq!(c.omega_earth, 73e-6);
    }

    #[test]
    fn amu_examples() {
        assert_relative_eq!(amu_to_kg(1.0).unwrap(), 1.660539e-27, max_relative = 1e-6);
        assert_relative_eq!(amu_to_kg(720.0).unwrap(), 1.1956e-24, max_relative = 1e-4);
        assert_relative_eq!(amu_to_kg(1e6).unwrap(), 1.6605e-21, max_relative = 1e-4);
        assert!(amu_to_kg(0.0).is_err());
        assert!(amu_to_kg(-3.0).is_err());
        assert!(amu_to_kg(f64::NAN).is_err());
    }

    #[test]
    fn c4_examples() {
        // Au5000, 2.5e4 Å³
        let c4 = polarizability_to_c4(2.5e4 * ANGSTROM3).unwrap();
        assert_relative_eq!(c4, 9.4e-53, max_relative = 0.01);
        // C60, 89 Å³
        let c4 = polarizability_to_c4(89.0 * ANGSTROM3).unwrap();
        assert_relative_eq!(c4, 3.4e-55, max_relative = 0.02);
        assert!(polarizability_to_c4(0.0).is_err());
    }

    proptest! {
        #[test]
        fn c4_is_linear(alpha in 1e-31f64..1e-24, factor in 0.1f64..100.0) {
            let a = polarizability_to_c4(alpha).unwrap();
            let b = polarizability_to_c4(alpha * factor).unwrap();
            prop_assert!((b / a - factor).abs() <= 1e-12 * factor);
        }

        #[test]
        fn amu_round_trip(m in 1e-3f64..1e9) {
            let back = kg_to_amu(amu_to_kg(m).unwrap()).unwrap();
            prop_assert!((back - m).abs() <= 1e-12 * m);
        }
    }
}
