//! Equivalent circuits and coupling-rate formulas for oscillators joined by
//! springs or capacitors, plus the swap-count figure of merit.

use core::f64::consts::{E, PI};
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{require, Error, Result};
use crate::physcore::consts::{HBAR, K_B};
use crate::physcore::{thermal_occupation, Environment, Particle};

/// Series L, R, C with a parallel C₀: the Butterworth–Van Dyke network.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BvdEquivalent {
    pub series_inductance: f64,
    pub series_resistance: f64,
    pub series_capacitance: f64,
    pub shunt_capacitance: f64,
}

impl BvdEquivalent {
    /// 1/√(LC), rad/s.
    pub fn resonance(&self) -> f64 {
        1.0 / (self.series_inductance * self.series_capacitance).sqrt()
    }
}

/// Maps a damped oscillator (mass, friction, ω₀) driven through a
/// transduction factor β (force per volt) onto a BVD network.
pub fn bvd_equivalent(
    mass: f64,
    friction: f64,
    omega0: f64,
    beta: f64,
    shunt_c: f64,
) -> Result<BvdEquivalent> {
    require(mass > 0.0, "mass", "must be positive")?;
    require(omega0 > 0.0, "omega0", "must be positive")?;
    require(friction >= 0.0, "friction", "must be non-negative")?;
    require(shunt_c >= 0.0, "shunt_c", "must be non-negative")?;
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::ZeroTransduction);
    }
    let b2 = beta * beta;
    Ok(BvdEquivalent {
        series_inductance: mass / b2,
        series_resistance: friction / b2,
        series_capacitance: b2 / (mass * omega0 * omega0),
        shunt_capacitance: shunt_c,
    })
}

/// Trapped particle between plates a gap `d` apart, geometry factor α.
pub fn particle_bvd(p: &Particle, gap_d: f64, alpha: f64, omega0: f64) -> Result<BvdEquivalent> {
    require(gap_d > 0.0, "gap_d", "must be positive")?;
    require(alpha > 0.0 && alpha <= 1.0, "alpha", "must lie in (0, 1]")?;
    require(omega0 > 0.0, "omega0", "must be positive")?;
    let qa = alpha * p.abs_charge();
    let l = p.mass * gap_d * gap_d / (qa * qa);
    Ok(BvdEquivalent {
        series_inductance: l,
        series_resistance: 0.0,
        series_capacitance: 1.0 / (l * omega0 * omega0),
        shunt_capacitance: 0.0,
    })
}

/// How the spring between two oscillators is used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpringDrive {
    /// Static spring, oscillators on resonance.
    Resonant,
    /// Spring modulated by a fraction η at the difference frequency.
    Parametric { eta: f64 },
}

/// Coupling rate of two masses joined by a spring of constant `k`.
///
/// For the resonant case with unequal frequencies the geometric mean is used,
/// which keeps the expression symmetric and reduces to k/(2ω₀√(m₁m₂)).
pub fn spring_coupling(
    k: f64,
    omega1: f64,
    omega2: f64,
    m1: f64,
    m2: f64,
    drive: SpringDrive,
) -> Result<f64> {
    require(k >= 0.0, "k", "must be non-negative")?;
    require(omega1 > 0.0 && omega2 > 0.0, "omega", "must be positive")?;
    require(m1 > 0.0 && m2 > 0.0, "mass", "must be positive")?;
    let root = (omega1 * omega2 * m1 * m2).sqrt();
    match drive {
        SpringDrive::Resonant => Ok(k / (2.0 * root)),
        SpringDrive::Parametric { eta } => {
            require(eta > 0.0 && eta <= 1.0, "eta", "must lie in (0, 1]")?;
            Ok(eta * k / (4.0 * root))
        }
    }
}

/// Two LC resonators sharing a coupling capacitor `c_shared`.
pub fn capacitive_coupling(c1: f64, c2: f64, c_shared: f64, omega0: f64) -> Result<f64> {
    require(
        c1 > 0.0 && c2 > 0.0 && c_shared > 0.0,
        "capacitance",
        "must be positive",
    )?;
    Ok(0.5 * omega0 * (c1 * c2 / ((c1 + c_shared) * (c2 + c_shared))).sqrt())
}

/// Particle (or common mode of `n_particles`) coupled to a lumped resonator
/// through the trap capacitance, in the large-resonator-capacitance limit.
pub fn particle_resonator_coupling(
    p: &Particle,
    gap_d: f64,
    alpha: f64,
    c_trap: f64,
    n_particles: u32,
) -> Result<f64> {
    require(gap_d > 0.0, "gap_d", "must be positive")?;
    require(c_trap > 0.0, "c_trap", "must be positive")?;
    require(n_particles >= 1, "n_particles", "must be at least 1")?;
    let n = n_particles as f64;
    Ok(alpha * p.abs_charge() / (2.0 * gap_d) * (n / (p.mass * c_trap)).sqrt())
}

/// Lumped parallel-LC equivalent of a shorted quarter-wave line near resonance.
pub fn quarterwave_lumped(z0: f64, omega0: f64) -> Result<(f64, f64)> {
    require(z0 > 0.0, "z0", "must be positive")?;
    require(omega0 > 0.0, "omega0", "must be positive")?;
    let c = PI / (4.0 * omega0 * z0);
    Ok((1.0 / (omega0 * omega0 * c), c))
}

/// Particle coupled to a resonator of capacitance `c_res` in parallel with
/// the trap capacitance: (ω₀/2)√(C_p/(C + C_trap)).
pub fn particle_parallel_lc_coupling(
    p: &Particle,
    gap_d: f64,
    alpha: f64,
    omega0: f64,
    c_res: f64,
    c_trap: f64,
) -> Result<f64> {
    let bvd = particle_bvd(p, gap_d, alpha, omega0)?;
    Ok(0.5 * omega0 * (bvd.series_capacitance / (c_res + c_trap)).sqrt())
}

/// Which swap time enters the swap count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SwapConvention {
    /// τ_swap = π/g, the complete-exchange time.
    #[default]
    HalfPeriod,
    /// τ_swap = 2π/g; reproduces the coupling table's Q_min column.
    FullPeriod,
}

impl SwapConvention {
    fn factor(self) -> f64 {
        match self {
            SwapConvention::HalfPeriod => PI,
            SwapConvention::FullPeriod => 2.0 * PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    StrongQuantum,
    Marginal,
    Classical,
}

/// Swap-count cutoffs for [`Regime`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    pub strong: f64,
    pub marginal: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            strong: 10.0,
            marginal: 1.0,
        }
    }
}

impl RegimeThresholds {
    pub fn classify(&self, n_swap: f64) -> Regime {
        if n_swap >= self.strong {
            Regime::StrongQuantum
        } else if n_swap >= self.marginal {
            Regime::Marginal
        } else {
            Regime::Classical
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouplingReport {
    pub coupling_rate_g: f64,
    pub swap_count_n: f64,
    /// Q giving a swap count of 1 at this g, ω₀ and temperature.
    pub min_quality_factor: f64,
    pub regime: Regime,
}

fn swap_count(g: f64, q: f64, omega0: f64, env: &Environment, conv: SwapConvention) -> f64 {
    let n_th = thermal_occupation(omega0, env);
    g * q / (conv.factor() * (n_th + 1.0) * omega0)
}

pub fn swap_metric(
    g: f64,
    q_factor: f64,
    omega0: f64,
    env: &Environment,
    conv: SwapConvention,
    thresholds: &RegimeThresholds,
) -> Result<CouplingReport> {
    require(g > 0.0, "g", "must be positive")?;
    require(q_factor > 0.0, "q_factor", "must be positive")?;
    require(omega0 > 0.0, "omega0", "must be positive")?;
    let n = swap_count(g, q_factor, omega0, env, conv);
    Ok(CouplingReport {
        coupling_rate_g: g,
        swap_count_n: n,
        min_quality_factor: min_quality_factor(g, omega0, env, 1.0, conv)?,
        regime: thresholds.classify(n),
    })
}

/// Smallest Q whose swap count reaches `n_target`.
pub fn min_quality_factor(
    g: f64,
    omega0: f64,
    env: &Environment,
    n_target: f64,
    conv: SwapConvention,
) -> Result<f64> {
    require(g > 0.0, "g", "must be positive")?;
    require(n_target >= 1.0, "n_target", "must be at least 1")?;
    let n_th = thermal_occupation(omega0, env);
    Ok(n_target * conv.factor() * (n_th + 1.0) * omega0 / g)
}

/// High-temperature denominator πk_BT/ħ of the swap count, rad/s.
pub fn high_temperature_swap_scale(env: &Environment) -> f64 {
    PI * K_B * env.temperature / HBAR
}

/// Sideband-limited occupation and thermal coherence time of a resonator
/// cooled through a coupling `g`.
pub fn cooling_limit(g: f64, q_factor: f64, env: &Environment) -> Result<(f64, f64)> {
    require(g > 0.0, "g", "must be positive")?;
    require(q_factor > 0.0, "q_factor", "must be positive")?;
    let kt = K_B * env.temperature;
    let n_bar = PI * (1.0 - 1.0 / E) * kt / (HBAR * g * q_factor);
    let tau = HBAR * q_factor / kt;
    Ok((n_bar, tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physcore::consts::*;
    use crate::physcore::{angular, hertz, particle_lookup};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn bvd_resonance_identity() {
        let b = bvd_equivalent(1e-9, 0.0, angular(1e6), 2.5e-6, 0.0).unwrap();
        assert_eq!(b.series_resistance, 0.0);
        let w = angular(1e6);
        assert!((b.series_inductance * b.series_capacitance * w * w - 1.0).abs() < 1e-14);
        let b2 = bvd_equivalent(1e-9, 0.0, w, 5e-6, 0.0).unwrap();
        assert!(rel(b2.series_inductance, b.series_inductance / 4.0) < 1e-15);
        assert!(rel(b2.series_capacitance, b.series_capacitance * 4.0) < 1e-15);
        assert!(rel(b2.resonance(), b.resonance()) < 1e-14);
        assert_eq!(
            bvd_equivalent(1e-9, 0.0, w, 0.0, 0.0),
            Err(Error::ZeroTransduction)
        );
    }

    #[test]
    fn particle_bvd_matches_generic_map() {
        let e = particle_lookup("electron").unwrap();
        let w = angular(1.3e9);
        let direct = particle_bvd(&e, 50e-6, 1.0, w).unwrap();
        let generic = bvd_equivalent(e.mass, 0.0, w, E_CHARGE / 50e-6, 0.0).unwrap();
        assert!(rel(direct.series_inductance, generic.series_inductance) < 1e-14);
        assert!(rel(direct.series_capacitance, generic.series_capacitance) < 1e-14);
        // m d² / q² worked out by hand
        assert!(rel(direct.series_inductance, 8.8715e-2) < 1e-3);
        let half = particle_bvd(&e, 50e-6, 0.5, w).unwrap();
        assert!(rel(half.series_inductance, 4.0 * direct.series_inductance) < 1e-14);
    }

    #[test]
    fn beryllium_capacitance_below_fifth_attofarad() {
        let be = particle_lookup("9Be+").unwrap();
        let b = particle_bvd(&be, 50e-6, 1.0, angular(10e6)).unwrap();
        assert!(b.series_capacitance < 0.2e-18, "{}", b.series_capacitance);
    }

    #[test]
    fn electron_equivalent_consistent_with_trap_b() {
        let e = particle_lookup("electron").unwrap();
        let w = angular(1.2e9);
        let b = particle_bvd(&e, 100e-6, 1.0, w).unwrap();
        let via_caps = 0.5 * w * (b.series_capacitance / 15e-15).sqrt();
        let direct = particle_resonator_coupling(&e, 100e-6, 1.0, 15e-15, 1).unwrap();
        assert!(rel(via_caps, direct) < 1e-12);
        assert!(rel(hertz(direct), 1.2e6) < 0.15);
    }

    #[test]
    fn spring_cases() {
        let w = angular(1e6);
        let g = spring_coupling(1e-3, w, w, 1e-20, 1e-20, SpringDrive::Resonant).unwrap();
        assert!(rel(g, 1e-3 / (2.0 * w * 1e-20)) < 1e-14);
        let gp = spring_coupling(1e-3, w, w, 1e-20, 1e-20, SpringDrive::Parametric { eta: 1.0 })
            .unwrap();
        assert!(rel(gp, g / 2.0) < 1e-14);
    }

    #[test]
    fn capacitive_cases() {
        let w = angular(1e9);
        let g = capacitive_coupling(1e-15, 1e-15, 1e-15, w).unwrap();
        assert!(rel(g, w / 4.0) < 1e-14);
        let big = 1e-6;
        let g_big = capacitive_coupling(2e-15, 3e-15, big, w).unwrap();
        assert!(rel(g_big, 0.5 * w * (6e-30f64).sqrt() / big) < 1e-8);
    }

    #[test]
    fn quartz_via_shunt_in_band() {
        let be = particle_lookup("9Be+").unwrap();
        let w = angular(9.4e6);
        let cp = particle_bvd(&be, 50e-6, 1.0, w).unwrap().series_capacitance;
        // the 10-20 Hz band sits at the low end of measured quartz
        // motional capacitances
        let g = capacitive_coupling(cp, 1e-18, 0.18e-12, w).unwrap();
        let f = hertz(g);
        assert!((10.0..=20.0).contains(&f), "{f}");
        // at 100 aF the same network gives ten times more
        let g100 = capacitive_coupling(cp, 100e-18, 0.18e-12, w).unwrap();
        let oracle = 0.5 * 9.4e6 * (cp * 100e-18).sqrt() / 0.18e-12;
        assert!(rel(hertz(g100), oracle) < 1e-3, "{}", hertz(g100));
    }

    #[test]
    fn coupling_table_values() {
        // (name, table g in Hz)
        let rows = [("electron", 1.2e6), ("9Be+", 9e3)];
        for (name, g_table) in rows {
            let p = particle_lookup(name).unwrap();
            let g = particle_resonator_coupling(&p, 50e-6, 1.0, 50e-15, 1).unwrap();
            assert!(rel(hertz(g), g_table) < 0.05, "{name}: {}", hertz(g));
        }
        let e = particle_lookup("electron").unwrap();
        let g1 = particle_resonator_coupling(&e, 50e-6, 1.0, 50e-15, 1).unwrap();
        let g100 = particle_resonator_coupling(&e, 50e-6, 1.0, 50e-15, 100).unwrap();
        assert!(rel(g100, 10.0 * g1) < 1e-14);
    }

    #[test]
    fn mass_scaling() {
        let e = particle_lookup("electron").unwrap();
        let be = particle_lookup("9Be+").unwrap();
        let ge = particle_resonator_coupling(&e, 50e-6, 1.0, 50e-15, 1).unwrap();
        let gb = particle_resonator_coupling(&be, 50e-6, 1.0, 50e-15, 1).unwrap();
        assert!(rel(ge / gb, (9.0 * M_P / M_E).sqrt()) < 1e-3);
    }

    #[test]
    fn quarterwave_reference() {
        let w = angular(10e6);
        let (l, c) = quarterwave_lumped(50.0, w).unwrap();
        assert!(rel(c, 250e-12) < 0.02, "{c}");
        assert!((l * c * w * w - 1.0).abs() < 1e-14);
        let (l2, c2) = quarterwave_lumped(100.0, w).unwrap();
        assert!(rel(c2, c / 2.0) < 1e-14 && rel(l2, 2.0 * l) < 1e-14);

        let be = particle_lookup("9Be+").unwrap();
        let lumped = particle_parallel_lc_coupling(&be, 50e-6, 1.0, w, c, 50e-15).unwrap();
        let table = particle_resonator_coupling(&be, 50e-6, 1.0, 50e-15, 1).unwrap();
        let factor = table / lumped;
        assert!((factor - 70.0).abs() < 14.0, "{factor}");
    }

    #[test]
    fn swap_scale_at_four_kelvin() {
        let env = Environment::new(4.0).unwrap();
        let scale = high_temperature_swap_scale(&env);
        assert!(rel(hertz(scale), 262e9) < 0.01, "{}", hertz(scale));
        // the exact count approaches the shortcut when ħω ≪ k_BT
        let w = angular(10e6);
        let g = angular(9e3);
        let exact = swap_metric(g, 1e8, w, &env, SwapConvention::HalfPeriod, &Default::default())
            .unwrap()
            .swap_count_n;
        let shortcut = g * 1e8 / scale;
        assert!(rel(exact, shortcut) < 1e-3);
    }

    #[test]
    fn zero_temperature_limit() {
        let env = Environment::new(1e-4).unwrap();
        let w = angular(1e9);
        let r = swap_metric(1e6, 1e4, w, &env, SwapConvention::HalfPeriod, &Default::default())
            .unwrap();
        assert!(rel(r.swap_count_n, 1e6 * 1e4 / (PI * w)) < 1e-12);
    }

    #[test]
    fn table_quality_factors_full_period() {
        let env4 = Environment::new(4.0).unwrap();
        let env50 = Environment::new(0.05).unwrap();
        let e = particle_lookup("electron").unwrap();
        let g = particle_resonator_coupling(&e, 50e-6, 1.0, 50e-15, 1).unwrap();
        let w = angular(1.3e9);
        let q4 = min_quality_factor(g, w, &env4, 1.0, SwapConvention::FullPeriod).unwrap();
        let q50 = min_quality_factor(g, w, &env50, 1.0, SwapConvention::FullPeriod).unwrap();
        assert!(q4 / 4e5 < 2.0 && 4e5 / q4 < 2.0, "{q4}");
        assert!(q50 / 7e3 < 2.0 && 7e3 / q50 < 2.0, "{q50}");
        let sr = particle_lookup("88Sr+").unwrap();
        let gs = particle_resonator_coupling(&sr, 50e-6, 1.0, 50e-15, 1).unwrap();
        let qs = min_quality_factor(gs, angular(3.2e6), &env4, 1.0, SwapConvention::FullPeriod)
            .unwrap();
        assert!(qs / 1.76e8 < 2.0 && 1.76e8 / qs < 2.0, "{qs}");
        let q10 = min_quality_factor(g, w, &env4, 10.0, SwapConvention::FullPeriod).unwrap();
        assert!(rel(q10, 10.0 * q4) < 1e-14);
        let half = min_quality_factor(g, w, &env4, 1.0, SwapConvention::HalfPeriod).unwrap();
        assert!(rel(half, q4 / 2.0) < 1e-14);
    }

    #[test]
    fn cooling_limit_reference() {
        let g = angular(15.0);
        let (n4, tau) = cooling_limit(g, 1e9, &Environment::new(4.0).unwrap()).unwrap();
        let (n50, _) = cooling_limit(g, 1e9, &Environment::new(0.05).unwrap()).unwrap();
        assert!((8.0..=32.0).contains(&n4), "{n4}");
        assert!((0.1..=0.4).contains(&n50), "{n50}");
        assert!(rel(tau, 1.9e-3) < 0.02, "{tau}");
    }

    #[test]
    fn regime_labels() {
        let t = RegimeThresholds::default();
        assert_eq!(t.classify(12.0), Regime::StrongQuantum);
        assert_eq!(t.classify(3.0), Regime::Marginal);
        assert_eq!(t.classify(0.5), Regime::Classical);
    }

    proptest! {
        #[test]
        fn bvd_identity_holds(m in 1e-31f64..1e-3, w in 1e3f64..1e11, beta in 1e-9f64..1e2) {
            let b = bvd_equivalent(m, 0.0, w, beta, 0.0).unwrap();
            prop_assert!((b.series_inductance * b.series_capacitance * w * w - 1.0).abs() < 1e-12);
        }

        #[test]
        fn capacitive_symmetric(c1 in 1e-19f64..1e-12, c2 in 1e-19f64..1e-12, c in 1e-16f64..1e-9) {
            let w = 1e7;
            let a = capacitive_coupling(c1, c2, c, w).unwrap();
            let b = capacitive_coupling(c2, c1, c, w).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * a);
        }

        #[test]
        fn spring_symmetric(w1 in 1e3f64..1e9, w2 in 1e3f64..1e9, m1 in 1e-27f64..1e-6, m2 in 1e-27f64..1e-6) {
            let a = spring_coupling(1.0, w1, w2, m1, m2, SpringDrive::Parametric { eta: 0.1 }).unwrap();
            let b = spring_coupling(1.0, w2, w1, m2, m1, SpringDrive::Parametric { eta: 0.1 }).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * a);
        }

        #[test]
        fn min_q_round_trips(g in 1.0f64..1e7, f in 1e5f64..1e10, t in 0.01f64..10.0, n in 1.0f64..100.0) {
            let env = Environment::new(t).unwrap();
            let w = angular(f);
            for conv in [SwapConvention::HalfPeriod, SwapConvention::FullPeriod] {
                let q = min_quality_factor(g, w, &env, n, conv).unwrap();
                let r = swap_metric(g, q, w, &env, conv, &Default::default()).unwrap();
                prop_assert!((r.swap_count_n - n).abs() <= 1e-12 * n);
            }
        }

        #[test]
        fn swap_count_continuous_across_crossover(g in 1e3f64..1e6) {
            // k_BT = ħω₀ at T where this ω₀ sits; probe just either side
            let w = angular(1e9);
            let t0 = HBAR * w / K_B;
            let lo = Environment::new(t0 * (1.0 - 1e-9)).unwrap();
            let hi = Environment::new(t0 * (1.0 + 1e-9)).unwrap();
            let a = swap_metric(g, 1e5, w, &lo, SwapConvention::HalfPeriod, &Default::default()).unwrap();
            let b = swap_metric(g, 1e5, w, &hi, SwapConvention::HalfPeriod, &Default::default()).unwrap();
            prop_assert!((a.swap_count_n - b.swap_count_n).abs() < 1e-6 * a.swap_count_n);
        }
    }
}
