//! Constants, the particle catalog and thermal occupation.

use alloc::string::{String, ToString};
use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{require, Error, Result};

/// CODATA 2018 values in SI units.
pub mod consts {
    /// Elementary charge, C.
    pub const E_CHARGE: f64 = 1.602_176_634e-19;
    /// Electron mass, kg.
    pub const M_E: f64 = 9.109_383_701_5e-31;
    /// Proton mass, kg.
    pub const M_P: f64 = 1.672_621_923_69e-27;
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Boltzmann constant, J/K.
    pub const K_B: f64 = 1.380_649e-23;
    /// Vacuum permittivity, F/m.
    pub const EPS0: f64 = 8.854_187_812_8e-12;
    /// One electronvolt in joules.
    pub const EV: f64 = E_CHARGE;
}

use consts::*;

/// Ordinary frequency (Hz) to angular (rad/s).
pub fn angular(f_hz: f64) -> f64 {
    2.0 * PI * f_hz
}

/// Angular frequency (rad/s) to ordinary (Hz).
pub fn hertz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Particle {
    pub name: String,
    /// Signed charge, C.
    pub charge: f64,
    /// Mass, kg.
    pub mass: f64,
}

impl Particle {
    pub fn new(name: &str, charge: f64, mass: f64) -> Result<Self> {
        require(mass > 0.0 && mass.is_finite(), "mass", "must be positive")?;
        require(
            charge != 0.0 && charge.is_finite(),
            "charge",
            "must be nonzero",
        )?;
        Ok(Particle {
            name: name.to_string(),
            charge,
            mass,
        })
    }

    /// Singly charged ion of mass number `a`, using `a` proton masses.
    pub fn ion(name: &str, a: u32) -> Self {
        Particle {
            name: name.to_string(),
            charge: E_CHARGE,
            mass: a as f64 * M_P,
        }
    }

    pub fn electron() -> Self {
        Particle {
            name: "electron".to_string(),
            charge: -E_CHARGE,
            mass: M_E,
        }
    }

    pub fn abs_charge(&self) -> f64 {
        self.charge.abs()
    }
}

/// Names accepted by [`particle_lookup`].
pub const CATALOG: [&str; 5] = ["electron", "9Be+", "24Mg+", "40Ca+", "88Sr+"];

pub fn particle_lookup(name: &str) -> Result<Particle> {
    match name {
        "electron" | "e-" => Ok(Particle::electron()),
        "9Be+" => Ok(Particle::ion("9Be+", 9)),
        "24Mg+" => Ok(Particle::ion("24Mg+", 24)),
        "40Ca+" => Ok(Particle::ion("40Ca+", 40)),
        "88Sr+" => Ok(Particle::ion("88Sr+", 88)),
        other => Err(Error::UnknownSpecies(other.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Environment {
    /// Bath temperature, K.
    pub temperature: f64,
}

impl Environment {
    pub fn new(temperature: f64) -> Result<Self> {
        require(
            temperature > 0.0 && temperature.is_finite(),
            "temperature",
            "must be positive",
        )?;
        Ok(Environment { temperature })
    }
}

/// Bose occupation 1/(exp(ħω/k_BT) − 1).
pub fn thermal_occupation(omega0: f64, env: &Environment) -> f64 {
    let x = HBAR * omega0 / (K_B * env.temperature);
    // exp_m1 keeps precision in the classical limit
    1.0 / x.exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn catalog_masses() {
        let e = particle_lookup("electron").unwrap();
        assert_eq!(e.mass, M_E);
        assert_eq!(e.charge, -E_CHARGE);
        assert_eq!(particle_lookup("9Be+").unwrap().mass, 9.0 * M_P);
        let sr = particle_lookup("88Sr+").unwrap();
        assert_eq!(sr.mass, 88.0 * M_P);
        assert_eq!(sr.charge, E_CHARGE);
        assert!(matches!(
            particle_lookup("Yb+"),
            Err(Error::UnknownSpecies(ref s)) if s == "Yb+"
        ));
    }

    #[test]
    fn lookups_compare_equal() {
        for name in CATALOG {
            assert_eq!(particle_lookup(name).unwrap(), particle_lookup(name).unwrap());
        }
    }

    #[test]
    fn occupation_reference_points() {
        let env = Environment::new(4.0).unwrap();
        // independent oracle: plain exp, no expm1
        let w = angular(1.3e9);
        let oracle = 1.0 / ((HBAR * w / (K_B * 4.0)).exp() - 1.0);
        let n = thermal_occupation(w, &env);
        assert!((n - oracle).abs() / oracle < 1e-12);
        assert!((n - 63.6).abs() < 0.1, "{n}");

        let n10 = thermal_occupation(angular(10e6), &env);
        let classical = K_B * 4.0 / (HBAR * angular(10e6));
        assert!((n10 - 8.33e3).abs() / 8.33e3 < 1e-3, "{n10}");
        assert!((n10 - (classical - 0.5)).abs() / n10 < 1e-6);
    }

    #[test]
    fn occupation_vanishes_when_cold() {
        let env = Environment::new(1e-3).unwrap();
        assert!(thermal_occupation(angular(1e12), &env) < 1e-300);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Environment::new(0.0).is_err());
        assert!(Particle::new("x", 0.0, 1.0).is_err());
        assert!(Particle::new("x", 1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn occupation_monotone(f in 1e5f64..1e11, t in 0.01f64..300.0, r in 1.01f64..3.0) {
            let env = Environment::new(t).unwrap();
            let hot = Environment::new(t * r).unwrap();
            let w = angular(f);
            prop_assert!(thermal_occupation(w * r, &env) < thermal_occupation(w, &env));
            prop_assert!(thermal_occupation(w, &hot) > thermal_occupation(w, &env));
        }

        #[test]
        fn classical_limit(f in 1e5f64..1e9, t in 1.0f64..300.0) {
            let env = Environment::new(t).unwrap();
            let w = angular(f);
            let ratio = K_B * t / (HBAR * w);
            prop_assume!(ratio > 100.0);
            let n = thermal_occupation(w, &env);
            prop_assert!((n - ratio + 0.5).abs() < 0.01 * n);
        }
    }
}
