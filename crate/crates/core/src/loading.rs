//! Loading electrons by ionizing helium with a primary beam: rate balance,
//! the capture-energy threshold, post-loading energy evolution and the
//! expected time to catch one electron.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::ControlFlow;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{require, Result};
use crate::ode::{self, Options};
use crate::physcore::consts::{E_CHARGE, EPS0, EV, K_B, M_E};

/// One square ångström in m².
pub const ANGSTROM2: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct LoadingConfig {
    /// Primary beam current density, A/m².
    pub current_density_j: f64,
    pub beam_radius_r0: f64,
    /// Pa.
    pub helium_pressure: f64,
    pub gas_temperature: f64,
    /// Radius of the spherical trapping volume, m.
    pub trap_radius_l: f64,
    /// eV.
    pub trap_depth: f64,
    /// m².
    pub sigma_ion: f64,
    /// m².
    pub sigma_elastic: f64,
    /// 1/s.
    pub gamma_cool: f64,
    /// Energy below which a fresh electron counts as caught, eV.
    pub e_init: f64,
    /// Detection time after each pulse, s.
    pub t_detect: f64,
}

impl Default for LoadingConfig {
    fn default() -> Self {
        LoadingConfig {
            current_density_j: 10.0,
            beam_radius_r0: 10e-6,
            helium_pressure: 1e-2,
            gas_temperature: 4.0,
            // sphere with the volume of a 95 µm cube
            trap_radius_l: 95e-6 * (3.0 / (4.0 * PI)).cbrt(),
            trap_depth: 1.0,
            sigma_ion: 0.05 * ANGSTROM2,
            sigma_elastic: 6.0 * ANGSTROM2,
            gamma_cool: 1e5,
            e_init: 3e-4,
            t_detect: 0.0,
        }
    }
}

impl LoadingConfig {
    pub fn validate(&self) -> Result<()> {
        require(self.current_density_j >= 0.0, "current_density_j", "must be non-negative")?;
        require(self.beam_radius_r0 > 0.0, "beam_radius_r0", "must be positive")?;
        require(self.helium_pressure >= 0.0, "helium_pressure", "must be non-negative")?;
        require(self.gas_temperature > 0.0, "gas_temperature", "must be positive")?;
        require(self.trap_radius_l > 0.0, "trap_radius_l", "must be positive")?;
        require(self.trap_depth > 0.0, "trap_depth", "must be positive")?;
        require(
            self.sigma_ion > 0.0 && self.sigma_ion < self.sigma_elastic,
            "sigma_ion",
            "must be positive and below sigma_elastic",
        )?;
        require(self.gamma_cool > 0.0, "gamma_cool", "must be positive")?;
        require(self.e_init > 0.0, "e_init", "must be positive")?;
        require(self.t_detect >= 0.0, "t_detect", "must be non-negative")
    }

    /// Ideal-gas helium number density, 1/m³.
    pub fn helium_density(&self) -> f64 {
        self.helium_pressure / (K_B * self.gas_temperature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rates {
    /// Secondary electrons created in the trap volume, 1/s.
    pub gamma_ion: f64,
    /// Loss from heating by primary-beam collisions, 1/s.
    pub gamma_e: f64,
    /// Loss from helium collisions converting micromotion, 1/s.
    pub gamma_he: f64,
    pub n_steady: f64,
    /// 1/e time to approach the steady state, s.
    pub tau_1e: f64,
}

pub fn rates(cfg: &LoadingConfig) -> Result<Rates> {
    cfg.validate()?;
    let n_he = cfg.helium_density();
    let j = cfg.current_density_j;
    let r0 = cfg.beam_radius_r0;
    let u_d = cfg.trap_depth * EV;
    let gamma_ion = j * PI * r0 * r0 / E_CHARGE * n_he * cfg.trap_radius_l * cfg.sigma_ion;
    let gamma_e = j * r0 * E_CHARGE / (4.0 * EPS0 * u_d);
    let gamma_he = cfg.sigma_elastic * n_he * (2.0 * u_d / M_E).sqrt() / (3.0 * PI);
    let loss = gamma_e + gamma_he;
    let (n_steady, tau_1e) = if loss > 0.0 {
        (gamma_ion / loss, 1.0 / loss)
    } else {
        (0.0, f64::INFINITY)
    };
    Ok(Rates {
        gamma_ion,
        gamma_e,
        gamma_he,
        n_steady,
        tau_1e,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CaptureEnergy {
    /// Energy at which cooling balances helium heating, eV.
    pub e_capture: f64,
    /// min(E_capture, E_init), eV.
    pub e_thresh: f64,
}

/// E_capture = (m_e/2)(πΓ_cool/(σ_el n_He))².
pub fn capture_energy(cfg: &LoadingConfig) -> Result<CaptureEnergy> {
    cfg.validate()?;
    let n = cfg.helium_density();
    let e_capture = if n > 0.0 {
        let v = PI * cfg.gamma_cool / (cfg.sigma_elastic * n);
        0.5 * M_E * v * v / EV
    } else {
        f64::INFINITY
    };
    Ok(CaptureEnergy {
        e_capture,
        e_thresh: e_capture.min(cfg.e_init),
    })
}

/// dE/dt in eV/s for energy `e` in eV.
pub fn energy_rate(e: f64, cfg: &LoadingConfig) -> f64 {
    let heat = cfg.sigma_elastic * cfg.helium_density() / PI * (2.0 * e.max(0.0) * EV / M_E).sqrt();
    (heat - cfg.gamma_cool) * e
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTrajectory {
    /// (t, E) at every accepted step, s and eV.
    pub samples: Vec<(f64, f64)>,
    /// Time at which E reaches the trap depth, if within the horizon.
    pub boil_off_time: Option<f64>,
}

/// Integrates the trapped electron's energy after the beam is switched off.
pub fn energy_ode(e0: f64, cfg: &LoadingConfig, horizon: f64) -> Result<EnergyTrajectory> {
    cfg.validate()?;
    require(e0 > 0.0 && e0 <= cfg.trap_depth, "e0", "must lie in (0, trap_depth]")?;
    require(horizon > 0.0, "horizon", "must be positive")?;
    let rhs = |_t: f64, y: &[f64; 1]| [energy_rate(y[0], cfg)];
    let opts = Options {
        rtol: 1e-9,
        atol: 1e-12 * e0,
        ..Default::default()
    };
    let depth = cfg.trap_depth;
    let mut samples = Vec::new();
    samples.push((0.0, e0));
    let mut prev = (0.0, e0);
    let mut crossed = None;
    if e0 >= depth {
        return Ok(EnergyTrajectory {
            samples,
            boil_off_time: Some(0.0),
        });
    }
    ode::integrate(&rhs, 0.0, [e0], horizon, &opts, |t, y| {
        samples.push((t, y[0]));
        if y[0] >= depth {
            crossed = Some((prev, t));
            return ControlFlow::Break(());
        }
        prev = (t, y[0]);
        ControlFlow::Continue(())
    })?;
    let boil_off_time = match crossed {
        None => None,
        Some(((t0, e_start), t1)) => {
            // bisect the crossing inside the last step
            let (mut lo, mut hi) = (0.0, t1 - t0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let out = ode::integrate(&rhs, 0.0, [e_start], mid, &opts, |_, _| ControlFlow::Continue(()))?;
                if out.y[0] >= depth {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(t0 + 0.5 * (lo + hi))
        }
    };
    Ok(EnergyTrajectory {
        samples,
        boil_off_time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LoadingCell {
    pub current_density_j: f64,
    pub helium_pressure: f64,
    pub n_steady: f64,
    pub tau_1e: f64,
    pub e_thresh: f64,
    pub pulses_needed: f64,
    pub t_total: f64,
}

/// Expected pulses and total time to catch one electron for one (J, P).
/// With trapped energies uniform on [0, U_d], a fraction E_thresh/U_d of
/// the N_ss electrons is cold enough.
pub fn time_to_trap_cell(cfg: &LoadingConfig) -> Result<LoadingCell> {
    let r = rates(cfg)?;
    let c = capture_energy(cfg)?;
    let pulses_needed = (cfg.trap_depth / c.e_thresh) / r.n_steady;
    Ok(LoadingCell {
        current_density_j: cfg.current_density_j,
        helium_pressure: cfg.helium_pressure,
        n_steady: r.n_steady,
        tau_1e: r.tau_1e,
        e_thresh: c.e_thresh,
        pulses_needed,
        t_total: pulses_needed * (r.tau_1e + cfg.t_detect),
    })
}

/// Row-major sweep, pressure varying fastest.
pub fn time_to_trap(base: &LoadingConfig, currents: &[f64], pressures: &[f64]) -> Result<Vec<LoadingCell>> {
    require(!currents.is_empty() && !pressures.is_empty(), "grid", "must be non-empty")?;
    let mut out = Vec::with_capacity(currents.len() * pressures.len());
    for &j in currents {
        for &p in pressures {
            let cfg = LoadingConfig {
                current_density_j: j,
                helium_pressure: p,
                ..*base
            };
            out.push(time_to_trap_cell(&cfg)?);
        }
    }
    Ok(out)
}

/// `n` log-spaced points from `a` to `b` inclusive.
pub fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn helium_loss_time() {
        let cfg = LoadingConfig::default();
        let r = rates(&cfg).unwrap();
        let t = 1.0 / r.gamma_he;
        assert!((1.3e-6..=1.5e-6).contains(&t), "{t}");
        assert!(rel(t, 1.46e-6) < 0.01);
        assert!(rel(cfg.trap_radius_l, 58.9e-6) < 1e-3);
    }

    #[test]
    fn no_beam_no_electrons() {
        let cfg = LoadingConfig {
            current_density_j: 0.0,
            ..Default::default()
        };
        let r = rates(&cfg).unwrap();
        assert_eq!((r.gamma_ion, r.gamma_e, r.n_steady), (0.0, 0.0, 0.0));
    }

    #[test]
    fn steady_state_linear_in_pressure_when_beam_dominates() {
        let a = LoadingConfig {
            current_density_j: 100.0,
            helium_pressure: 1e-4,
            ..Default::default()
        };
        let b = LoadingConfig {
            helium_pressure: 2e-4,
            ..a
        };
        let (ra, rb) = (rates(&a).unwrap(), rates(&b).unwrap());
        assert!(ra.gamma_e > 10.0 * ra.gamma_he);
        assert!(rel(rb.n_steady / ra.n_steady, 2.0) < 0.02);
    }

    #[test]
    fn steady_state_is_rate_equation_fixed_point() {
        let cfg = LoadingConfig::default();
        let r = rates(&cfg).unwrap();
        let f = |_t: f64, y: &[f64; 1]| [r.gamma_ion - y[0] * (r.gamma_e + r.gamma_he)];
        let out = ode::integrate(&f, 0.0, [0.0], 40.0 * r.tau_1e, &Options::default(), |_, _| {
            ControlFlow::Continue(())
        })
        .unwrap();
        assert!(rel(out.y[0], r.n_steady) < 1e-6);
    }

    #[test]
    fn capture_crossover_pressure() {
        // bisect P where E_capture = 0.3 meV
        let (mut lo, mut hi) = (1e-4f64, 1.0f64);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            let cfg = LoadingConfig {
                helium_pressure: mid,
                ..Default::default()
            };
            if capture_energy(&cfg).unwrap().e_capture > 3e-4 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!(rel(lo, 0.027) < 0.2, "{lo}");
        assert!(rel(lo, 0.02815) < 1e-3, "{lo}");
    }

    #[test]
    fn capture_energy_inverse_square_in_pressure() {
        let a = capture_energy(&LoadingConfig::default()).unwrap();
        let b = capture_energy(&LoadingConfig {
            helium_pressure: 2e-2,
            ..Default::default()
        })
        .unwrap();
        assert!(rel(a.e_capture / b.e_capture, 4.0) < 1e-12);
        let vac = capture_energy(&LoadingConfig {
            helium_pressure: 0.0,
            ..Default::default()
        })
        .unwrap();
        assert!(vac.e_capture.is_infinite());
        assert_eq!(vac.e_thresh, 3e-4);
    }

    #[test]
    fn capture_energy_is_rate_zero() {
        let cfg = LoadingConfig {
            helium_pressure: 0.05,
            ..Default::default()
        };
        let ec = capture_energy(&cfg).unwrap().e_capture;
        let (mut lo, mut hi) = (ec * 0.1, ec * 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if energy_rate(mid, &cfg) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!(rel(lo, ec) < 1e-10);
        let out = energy_ode(ec, &cfg, 1e-3).unwrap();
        assert!(out.samples.iter().all(|&(_, e)| rel(e, ec) < 1e-6));
    }

    #[test]
    fn cold_electron_cools_down() {
        let cfg = LoadingConfig::default();
        let ec = capture_energy(&cfg).unwrap().e_capture;
        let e0 = 0.5 * ec.min(1.0);
        let out = energy_ode(e0, &cfg, 1e-3).unwrap();
        assert!(out.boil_off_time.is_none());
        // past the absolute tolerance the samples are integrator noise
        let live: Vec<_> = out.samples.iter().filter(|s| s.1 > 1e-9 * e0).collect();
        assert!(live.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(out.samples.last().unwrap().1 < 1e-9 * e0);
    }

    fn boil_off_closed_form(e0: f64, cfg: &LoadingConfig) -> f64 {
        // u = E^(-1/2) obeys u' = (Γu - c)/2
        let c = cfg.sigma_elastic * cfg.helium_density() / PI * (2.0 * EV / M_E).sqrt();
        let g = cfg.gamma_cool;
        let (u0, ud) = (e0.powf(-0.5), cfg.trap_depth.powf(-0.5));
        2.0 / g * ((ud - c / g) / (u0 - c / g)).ln()
    }

    #[test]
    fn hot_electron_boils_off() {
        let e0 = 2.0
            * capture_energy(&LoadingConfig {
                helium_pressure: 0.1,
                ..Default::default()
            })
            .unwrap()
            .e_capture;
        let mut last = f64::INFINITY;
        for p in [0.1, 0.2, 0.4] {
            let cfg = LoadingConfig {
                helium_pressure: p,
                ..Default::default()
            };
            let out = energy_ode(e0, &cfg, 1.0).unwrap();
            let t = out.boil_off_time.unwrap();
            assert!(out.samples.windows(2).all(|w| w[1].1 > w[0].1));
            assert!(rel(t, boil_off_closed_form(e0, &cfg)) < 1e-6, "{t}");
            assert!(t < last);
            last = t;
        }
    }

    #[test]
    fn pulses_scale_with_threshold() {
        let a = LoadingConfig {
            helium_pressure: 1e-3,
            ..Default::default()
        };
        let b = LoadingConfig { e_init: 1.5e-4, ..a };
        let (ca, cb) = (time_to_trap_cell(&a).unwrap(), time_to_trap_cell(&b).unwrap());
        assert!(rel(cb.pulses_needed / ca.pulses_needed, 2.0) < 1e-12);
        assert!(rel(cb.t_total / ca.t_total, 2.0) < 1e-12);
    }

    #[test]
    fn pressure_knee_for_total_time() {
        let base = LoadingConfig {
            current_density_j: 10.0,
            t_detect: 10e-6,
            ..Default::default()
        };
        let ps = log_space(1e-4, 1e-1, 61);
        let grid = time_to_trap(&base, &[10.0], &ps).unwrap();
        let (best, _) = grid
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.t_total.total_cmp(&b.1.t_total))
            .unwrap();
        let p_best = ps[best];
        assert!(p_best > 0.01 && p_best < 0.06, "{p_best}");
        // beyond the knee the time rises again
        assert!(grid.last().unwrap().t_total > grid[best].t_total);
    }

    proptest! {
        #[test]
        fn rates_finite_and_nonnegative(j in 1e-2f64..1e3, p in 1e-6f64..1.0, t in 1.0f64..300.0) {
            let cfg = LoadingConfig { current_density_j: j, helium_pressure: p, gas_temperature: t, ..Default::default() };
            let r = rates(&cfg).unwrap();
            prop_assert!(r.gamma_ion >= 0.0 && r.gamma_e >= 0.0 && r.gamma_he >= 0.0);
            let c = time_to_trap_cell(&cfg).unwrap();
            prop_assert!(c.n_steady.is_finite() && c.t_total.is_finite() && c.t_total > 0.0);
        }

        #[test]
        fn grid_order_independent(js in prop::collection::vec(1.0f64..100.0, 1..4), ps in prop::collection::vec(1e-4f64..0.1, 1..4)) {
            let base = LoadingConfig::default();
            let grid = time_to_trap(&base, &js, &ps).unwrap();
            for (i, &j) in js.iter().enumerate().rev() {
                for (k, &p) in ps.iter().enumerate().rev() {
                    let cfg = LoadingConfig { current_density_j: j, helium_pressure: p, ..base };
                    prop_assert_eq!(grid[i * ps.len() + k], time_to_trap_cell(&cfg).unwrap());
                }
            }
        }
    }
}
