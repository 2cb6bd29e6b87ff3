//! Anomalous heating extrapolated from a measured ion rate to another
//! particle, distance and frequency: ṅ ∝ (q²/m)·d⁻⁴·f^−(1+α).

use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{require, Result};
use crate::physcore::Particle;

/// Range of the frequency exponent α seen in experiments.
pub const ALPHA_RANGE: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HeatingReference {
    pub species: Particle,
    /// Particle–surface distance, m.
    pub distance_d: f64,
    /// Trap frequency, Hz.
    pub frequency_f: f64,
    /// quanta/s.
    pub rate: f64,
    /// K.
    pub temperature: f64,
    pub material: String,
}

impl HeatingReference {
    pub fn validate(&self) -> Result<()> {
        require(self.distance_d > 0.0, "distance_d", "must be positive")?;
        require(self.frequency_f > 0.0, "frequency_f", "must be positive")?;
        require(self.rate > 0.0, "rate", "must be positive")?;
        require(self.temperature > 0.0, "temperature", "must be positive")?;
        Ok(())
    }
}

/// Measured ion heating rates used as extrapolation anchors.
pub fn reference_rows() -> Vec<HeatingReference> {
    let row = |material: &str, t, species: Particle, d, f, rate| HeatingReference {
        species,
        distance_d: d,
        frequency_f: f,
        rate,
        temperature: t,
        material: material.into(),
    };
    alloc::vec![
        row("Au on sapphire", 5.0, Particle::ion("88Sr+", 88), 50e-6, 1.32e6, 4.0),
        row("Au on quartz", 300.0, Particle::ion("9Be+", 9), 40e-6, 3.6e6, 58.0),
        row("Nb on sapphire", 6.0, Particle::ion("88Sr+", 88), 100e-6, 1e6, 2.0),
    ]
}

/// Heating rate (quanta/s) for `target` at distance `target_d` (m) and
/// frequency `target_f` (Hz).
pub fn extrapolate(
    reference: &HeatingReference,
    target: &Particle,
    target_d: f64,
    target_f: f64,
    alpha_exp: f64,
) -> Result<f64> {
    reference.validate()?;
    require(target_d > 0.0, "target_d", "must be positive")?;
    require(target_f > 0.0, "target_f", "must be positive")?;
    require(
        (ALPHA_RANGE.0..=ALPHA_RANGE.1).contains(&alpha_exp),
        "alpha_exp",
        "must lie in [0.5, 2]",
    )?;
    let r = &reference.species;
    let charge = (target.charge / r.charge).powi(2) * r.mass / target.mass;
    let distance = (reference.distance_d / target_d).powi(4);
    let freq = (reference.frequency_f / target_f).powf(1.0 + alpha_exp);
    Ok(reference.rate * charge * distance * freq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physcore::consts::{M_E, M_P};

    #[test]
    fn identity() {
        for r in reference_rows() {
            for a in [0.5, 1.0, 2.0] {
                let n = extrapolate(&r, &r.species, r.distance_d, r.frequency_f, a).unwrap();
                assert_eq!(n, r.rate);
            }
        }
    }

    #[test]
    fn electron_band() {
        let e = Particle::electron();
        let rates: Vec<f64> = reference_rows()
            .iter()
            .map(|r| extrapolate(r, &e, 50e-6, 1e9, 0.5).unwrap())
            .collect();
        // oracle: 4·(88 m_p/m_e)·(1.32e6/1e9)^1.5
        let sr = 4.0 * 88.0 * M_P / M_E * (1.32e-3f64).powf(1.5);
        assert!((rates[0] / sr - 1.0).abs() < 1e-12);
        assert!((rates[0] - 31.0).abs() < 0.1, "{rates:?}");
        let lo = rates.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = rates.iter().cloned().fold(0.0, f64::max);
        assert!((lo / 30.0 - 1.0).abs() < 0.1 && (hi / 160.0 - 1.0).abs() < 0.1);
        for r in reference_rows() {
            assert!(extrapolate(&r, &e, 50e-6, 1e9, 2.0).unwrap() < 0.02);
        }
    }

    #[test]
    fn alpha_out_of_range() {
        let r = &reference_rows()[0];
        assert!(extrapolate(r, &Particle::electron(), 50e-6, 1e9, 0.4).is_err());
        assert!(extrapolate(r, &Particle::electron(), 50e-6, 1e9, 2.1).is_err());
        assert!(extrapolate(r, &Particle::electron(), 0.0, 1e9, 1.0).is_err());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn particle(i: usize) -> Particle {
        match i {
            0 => Particle::electron(),
            1 => Particle::ion("9Be+", 9),
            _ => Particle::ion("40Ca+", 40),
        }
    }

    proptest! {
        #[test]
        fn composes(
            row in 0usize..3, pa in 0usize..3, pb in 0usize..3,
            da in 10e-6f64..500e-6, db in 10e-6f64..500e-6,
            fa in 1e5f64..1e10, fb in 1e5f64..1e10, alpha in 0.5f64..2.0,
        ) {
            let r = &reference_rows()[row];
            let (a, b) = (particle(pa), particle(pb));
            let via = HeatingReference {
                species: a.clone(),
                distance_d: da,
                frequency_f: fa,
                rate: extrapolate(r, &a, da, fa, alpha).unwrap(),
                ..r.clone()
            };
            let two = extrapolate(&via, &b, db, fb, alpha).unwrap();
            let one = extrapolate(r, &b, db, fb, alpha).unwrap();
            prop_assert!((two / one - 1.0).abs() < 1e-12);
        }

        #[test]
        fn closer_and_slower_is_hotter(d in 10e-6f64..500e-6, f in 1e5f64..1e10, alpha in 0.5f64..2.0) {
            let r = &reference_rows()[0];
            let e = Particle::electron();
            let base = extrapolate(r, &e, d, f, alpha).unwrap();
            prop_assert!(extrapolate(r, &e, 0.9 * d, f, alpha).unwrap() > base);
            prop_assert!(extrapolate(r, &e, d, 0.9 * f, alpha).unwrap() > base);
        }
    }
}
