//! Collisions between a primary (beam) electron and a trapped target
//! electron: Rutherford kinematics, the analytic per-collision heating
//! bound, and direct two-body integration inside a harmonic or rf trap.
//!
//! The integrator works in scaled units (µm, ns, eV) so positions,
//! velocities and energies all sit within a few decades of one.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::ControlFlow;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{require, Error, Result};
use crate::ode::{self, Options, System};
use crate::physcore::consts::{E_CHARGE, EPS0, EV, M_E};

/// Electron mass in eV·ns²/µm².
const MASS: f64 = M_E * 1e6 / EV;
/// q²/4πε₀ in eV·µm.
const COULOMB: f64 = E_CHARGE / (4.0 * PI * EPS0) * 1e6;
const UM: f64 = 1e6;
const NS: f64 = 1e9;

/// q²/4πε₀ expressed in eV·m.
fn coulomb_ev_m() -> f64 {
    E_CHARGE / (4.0 * PI * EPS0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RfDrive {
    pub omega_rf: f64,
    pub q_mathieu: f64,
    pub initial_phase: f64,
    /// The quadrupole field fills |z| ≤ half_height_z, ρ ≤ radius_rho (m).
    pub half_height_z: f64,
    pub radius_rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CollisionConfig {
    /// eV.
    pub primary_energy_ep: f64,
    /// m.
    pub beam_radius_r0: f64,
    /// Secular frequencies (x, y, z), rad/s.
    pub trap_freqs: [f64; 3],
    /// Radius of the sphere holding the harmonic potential, m.
    pub trap_volume_l: f64,
    /// Upper end of the target energy distribution, eV.
    pub u_depth: f64,
    /// Largest target energy entering the γ factor, eV.
    pub e_thresh: f64,
    pub rf: Option<RfDrive>,
    /// Primary start plane, m. The run ends once it is 2·|injection_z| away.
    pub injection_z: f64,
    pub seed: u64,
}

impl CollisionConfig {
    /// Isotropic 1 GHz trap in a 95 µm sphere with a 30 eV beam of
    /// 100 µm radius.
    pub fn harmonic_1ghz() -> Self {
        let w = 2.0 * PI * 1e9;
        CollisionConfig {
            primary_energy_ep: 30.0,
            beam_radius_r0: 100e-6,
            trap_freqs: [w; 3],
            trap_volume_l: 95e-6,
            u_depth: 1.01,
            e_thresh: 1.01,
            rf: None,
            injection_z: -1e-3,
            seed: 0,
        }
    }

    /// Five-wire design at 7.15 GHz and q = 0.6, field confined to a
    /// 200 µm × 240 µm cylinder, 0.9 eV deep.
    pub fn rf_design_b() -> Self {
        let omega = 2.0 * PI * 7.15e9;
        let q = 0.6;
        let wz = q * omega / (2.0 * 2f64.sqrt());
        CollisionConfig {
            primary_energy_ep: 30.0,
            beam_radius_r0: 100e-6,
            trap_freqs: [wz / 2.0, wz / 2.0, wz],
            trap_volume_l: 100e-6,
            u_depth: 0.9,
            e_thresh: 1.0,
            rf: Some(RfDrive {
                omega_rf: omega,
                q_mathieu: q,
                initial_phase: 0.0,
                half_height_z: 100e-6,
                radius_rho: 120e-6,
            }),
            injection_z: -1e-3,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require(self.primary_energy_ep > 0.0, "primary_energy_ep", "must be positive")?;
        require(self.beam_radius_r0 > 0.0, "beam_radius_r0", "must be positive")?;
        require(
            self.trap_freqs.iter().all(|w| *w > 0.0),
            "trap_freqs",
            "must be positive",
        )?;
        require(self.trap_volume_l > 0.0, "trap_volume_l", "must be positive")?;
        require(self.u_depth > 0.0, "u_depth", "must be positive")?;
        require(self.e_thresh > 0.0, "e_thresh", "must be positive")?;
        require(self.injection_z < 0.0, "injection_z", "must be negative")?;
        if let Some(rf) = &self.rf {
            require(rf.omega_rf > 0.0, "rf.omega_rf", "must be positive")?;
            require(
                rf.q_mathieu > 0.0 && rf.q_mathieu < 1.0,
                "rf.q_mathieu",
                "must lie in (0, 1)",
            )?;
            require(
                rf.half_height_z > 0.0 && rf.radius_rho > 0.0,
                "rf.region",
                "must be positive",
            )?;
            require(
                rf.half_height_z < -self.injection_z,
                "injection_z",
                "must start outside the rf region",
            )?;
        }
        Ok(())
    }
}

/// Deflection of the relative velocity in a repulsive e–e encounter.
pub fn rutherford_angle(impact_b: f64, rel_speed_v: f64) -> Result<f64> {
    require(impact_b > 0.0, "impact_b", "must be positive")?;
    require(rel_speed_v > 0.0, "rel_speed_v", "must be positive")?;
    let mu = M_E / 2.0;
    let k = E_CHARGE * E_CHARGE / (4.0 * PI * EPS0);
    Ok(2.0 * (k / impact_b / (mu * rel_speed_v * rel_speed_v)).atan())
}

/// (1 + √r)(1 + 3√r) with r = E_thresh/E_p.
pub fn gamma_factor(e_thresh: f64, e_p: f64) -> f64 {
    let s = (e_thresh / e_p).sqrt();
    (1.0 + s) * (1.0 + 3.0 * s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KickBound {
    pub gamma: f64,
    /// q²/4πε₀r₀, eV.
    pub coulomb_scale: f64,
    /// γ·q²/4πε₀r₀, eV.
    pub mean_kick: f64,
    /// J·r₀/4ε₀ (γ ≈ 1), eV/s.
    pub beam_heating: f64,
}

/// Beam-averaged bound on |ΔE| per collision and the matching heating
/// rate for a current density `current_density_j` (A/m²).
pub fn kick_bound(cfg: &CollisionConfig, current_density_j: f64) -> Result<KickBound> {
    cfg.validate()?;
    require(current_density_j >= 0.0, "current_density_j", "must be non-negative")?;
    let gamma = gamma_factor(cfg.e_thresh, cfg.primary_energy_ep);
    let scale = coulomb_ev_m() / cfg.beam_radius_r0;
    Ok(KickBound {
        gamma,
        coulomb_scale: scale,
        mean_kick: gamma * scale,
        beam_heating: current_density_j * cfg.beam_radius_r0 / (4.0 * EPS0),
    })
}

/// Energy handed to a target at rest, eV.
pub fn static_kick(e_p: f64, impact_b: f64) -> Result<f64> {
    require(e_p > 0.0, "e_p", "must be positive")?;
    require(impact_b > 0.0, "impact_b", "must be positive")?;
    let x = coulomb_ev_m() / impact_b / e_p;
    Ok(e_p * x * x / (1.0 + x * x))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

// ---------------------------------------------------------------------------
// dynamics

/// The rf field fades out over this width (µm) inside its boundary; a
/// hard edge stalls the step-size control on the primary's entry.
const RF_EDGE: f64 = 1.0;

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

#[derive(Debug, Clone, Copy)]
enum Field {
    /// Harmonic inside a sphere, force-free outside. Values in ns⁻², µm².
    Static { w2: [f64; 3], l2: f64 },
    /// Quadrupole rf inside a cylinder. `a` = qΩ²/2 in ns⁻².
    Rf {
        a: f64,
        omega: f64,
        phase: f64,
        half_z: f64,
        rho: f64,
        /// Pseudopotential curvature for energy bookkeeping.
        w2: [f64; 3],
    },
}

impl Field {
    fn from_config(cfg: &CollisionConfig, phase: Option<f64>) -> Self {
        let w2 = cfg.trap_freqs.map(|w| (w / NS) * (w / NS));
        match cfg.rf {
            None => Field::Static {
                w2,
                l2: (cfg.trap_volume_l * UM).powi(2),
            },
            Some(rf) => {
                let omega = rf.omega_rf / NS;
                let q = rf.q_mathieu;
                let wz = q * omega / (2.0 * 2f64.sqrt());
                Field::Rf {
                    a: q * omega * omega / 2.0,
                    omega,
                    phase: phase.unwrap_or(rf.initial_phase),
                    half_z: rf.half_height_z * UM,
                    rho: rf.radius_rho * UM,
                    w2: [wz * wz / 4.0, wz * wz / 4.0, wz * wz],
                }
            }
        }
    }

    fn inside(&self, r: &[f64]) -> bool {
        match *self {
            Field::Static { l2, .. } => dot(r, r) <= l2,
            Field::Rf { half_z, rho, .. } => {
                r[2].abs() <= half_z && r[0] * r[0] + r[1] * r[1] <= rho * rho
            }
        }
    }

    fn accel(&self, t: f64, r: &[f64]) -> [f64; 3] {
        if !self.inside(r) {
            return [0.0; 3];
        }
        match *self {
            Field::Static { w2, .. } => [-w2[0] * r[0], -w2[1] * r[1], -w2[2] * r[2]],
            Field::Rf {
                a,
                omega,
                phase,
                half_z,
                rho,
                ..
            } => {
                let edge = smoothstep((half_z - r[2].abs()) / RF_EDGE)
                    * smoothstep((rho - (r[0] * r[0] + r[1] * r[1]).sqrt()) / RF_EDGE);
                let c = edge * a * (omega * t + phase).cos();
                [-0.5 * c * r[0], -0.5 * c * r[1], c * r[2]]
            }
        }
    }

    /// Trap energy of one electron, eV. Outside a static sphere the
    /// potential sits at its mean rim value; the rf case uses the
    /// pseudopotential.
    fn potential(&self, r: &[f64]) -> f64 {
        match *self {
            Field::Static { w2, l2 } => {
                if dot(r, r) <= l2 {
                    0.5 * MASS * (w2[0] * r[0] * r[0] + w2[1] * r[1] * r[1] + w2[2] * r[2] * r[2])
                } else {
                    0.5 * MASS * l2 * (w2[0] + w2[1] + w2[2]) / 3.0
                }
            }
            Field::Rf { w2, .. } => {
                0.5 * MASS * (w2[0] * r[0] * r[0] + w2[1] * r[1] * r[1] + w2[2] * r[2] * r[2])
            }
        }
    }
}

/// State: primary r, v; target r, v; Coulomb velocity change of the target.
type State = [f64; 15];

struct TwoBody {
    field: Field,
    coupled: bool,
}

impl System<15> for TwoBody {
    fn rhs(&self, t: f64, y: &State) -> State {
        let ap = self.field.accel(t, &y[0..3]);
        let at = self.field.accel(t, &y[6..9]);
        let mut f = [0.0; 3];
        if self.coupled {
            let d = [y[0] - y[6], y[1] - y[7], y[2] - y[8]];
            let r2 = dot(&d, &d);
            let s = COULOMB / (MASS * r2 * r2.sqrt());
            f = [s * d[0], s * d[1], s * d[2]];
        }
        [
            y[3],
            y[4],
            y[5],
            ap[0] + f[0],
            ap[1] + f[1],
            ap[2] + f[2],
            y[9],
            y[10],
            y[11],
            at[0] - f[0],
            at[1] - f[1],
            at[2] - f[2],
            -f[0],
            -f[1],
            -f[2],
        ]
    }

    fn max_step(&self, _t: f64, y: &State) -> f64 {
        if !self.coupled {
            return f64::INFINITY;
        }
        let d = [y[0] - y[6], y[1] - y[7], y[2] - y[8]];
        let v = [y[3] - y[9], y[4] - y[10], y[5] - y[11]];
        let r = norm(&d);
        let fly = r / norm(&v).max(1e-300);
        let fall = (MASS * r * r * r / COULOMB).sqrt();
        0.05 * fly.min(fall)
    }
}

fn options() -> Options {
    Options {
        rtol: 1e-10,
        atol: 1e-12,
        max_steps: 2_000_000,
        ..Options::default()
    }
}

fn speed(energy_ev: f64) -> f64 {
    (2.0 * energy_ev / MASS).sqrt()
}

fn kinetic(v: &[f64]) -> f64 {
    0.5 * MASS * dot(v, v)
}

#[derive(Debug, Clone, Copy)]
struct Closest {
    r: f64,
    y: State,
}

#[derive(Debug, Clone, Copy)]
struct Run {
    y: State,
    closest: Option<Closest>,
    target_left: bool,
}

/// Runs until the primary is `stop_radius` (µm) from the origin, then
/// keeps going for `follow` ns. Without coupling it simply runs `follow` ns.
fn run(
    field: Field,
    coupled: bool,
    y0: State,
    stop_radius: f64,
    follow: f64,
    mut record: Option<&mut Vec<(f64, State)>>,
) -> Result<Run> {
    let sys = TwoBody { field, coupled };
    let horizon = if coupled {
        let v = norm(&y0[3..6]).max(1e-3);
        20.0 * stop_radius / v + follow
    } else {
        follow
    };
    let mut closest: Option<Closest> = None;
    let mut target_left = !field.inside(&y0[6..9]);
    let mut stop_at = if coupled { f64::INFINITY } else { horizon };
    if let Some(rec) = record.as_deref_mut() {
        rec.push((0.0, y0));
    }
    ode::integrate(&sys, 0.0, y0, horizon, &options(), |t, y| {
        if let Some(rec) = record.as_deref_mut() {
            rec.push((t, *y));
        }
        if !field.inside(&y[6..9]) {
            target_left = true;
        }
        if coupled {
            let r = norm(&[y[0] - y[6], y[1] - y[7], y[2] - y[8]]);
            if closest.map_or(true, |c| r < c.r) {
                closest = Some(Closest { r, y: *y });
            }
            if stop_at.is_infinite() && norm(&y[0..3]) > stop_radius {
                stop_at = t + follow;
            }
        }
        if t >= stop_at {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })
    .map(|out| Run {
        y: out.y,
        closest,
        target_left,
    })
}

/// Impact parameter and asymptotic relative speed from the closest sampled
/// state, treating the pair as a bare Coulomb problem.
fn encounter(c: &Closest) -> (f64, f64) {
    let y = &c.y;
    let d = [y[0] - y[6], y[1] - y[7], y[2] - y[8]];
    let v = [y[3] - y[9], y[4] - y[10], y[5] - y[11]];
    let l = [
        d[1] * v[2] - d[2] * v[1],
        d[2] * v[0] - d[0] * v[2],
        d[0] * v[1] - d[1] * v[0],
    ];
    let mu = MASS / 2.0;
    let v_inf = (dot(&v, &v) + 2.0 * COULOMB / (mu * c.r)).sqrt();
    (norm(&l) / v_inf, v_inf)
}

/// ½m·v², i.e. μ·v² with μ = m/2.
fn impact_energy(v_inf: f64) -> f64 {
    0.5 * MASS * v_inf * v_inf
}

fn half_angle_sine(b: f64, v_inf: f64) -> f64 {
    let mu = MASS / 2.0;
    let x = COULOMB / (b * mu * v_inf * v_inf);
    x / (1.0 + x * x).sqrt()
}

fn stop_radius(cfg: &CollisionConfig) -> f64 {
    2.0 * cfg.injection_z.abs() * UM
}

fn primary_start(cfg: &CollisionConfig, x: f64, y: f64) -> [f64; 6] {
    [x, y, cfg.injection_z * UM, 0.0, 0.0, speed(cfg.primary_energy_ep)]
}

// ---------------------------------------------------------------------------
// Monte Carlo in the static trap

/// One Monte Carlo collision. Energies in eV, lengths in m.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CollisionSample {
    pub target_e0: f64,
    /// Change of the target's kinetic plus trap energy.
    pub delta_e: f64,
    pub impact_b: f64,
    /// γ(E_s0)·E_p·sin(θ_R/2) for this encounter.
    pub bound: f64,
}

/// Draws and integrates sample `index` of the stream keyed by `cfg.seed`.
pub fn collision_sample(cfg: &CollisionConfig, index: u64) -> Result<CollisionSample> {
    require(cfg.rf.is_none(), "rf", "Monte Carlo runs in the static trap")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let e0 = cfg.u_depth * rng.gen::<f64>();
    let cz = 2.0 * rng.gen::<f64>() - 1.0;
    let az = 2.0 * PI * rng.gen::<f64>();
    let sz = (1.0 - cz * cz).max(0.0).sqrt();
    let v0 = speed(e0);
    let rho = cfg.beam_radius_r0 * UM * rng.gen::<f64>().sqrt();
    let ap = 2.0 * PI * rng.gen::<f64>();
    let p = primary_start(cfg, rho * ap.cos(), rho * ap.sin());
    let mut y0 = [0.0; 15];
    y0[..6].copy_from_slice(&p);
    y0[9] = v0 * sz * az.cos();
    y0[10] = v0 * sz * az.sin();
    y0[11] = v0 * cz;

    let field = Field::from_config(cfg, None);
    let out = run(field, true, y0, stop_radius(cfg), 0.0, None)?;
    let c = out.closest.ok_or(Error::StepUnderflow { t: 0.0 })?;
    let e_end = kinetic(&out.y[9..12]) + field.potential(&out.y[6..9]);
    let e_start = kinetic(&y0[9..12]) + field.potential(&y0[6..9]);
    let (b, v_inf) = encounter(&c);
    let ep = cfg.primary_energy_ep;
    Ok(CollisionSample {
        target_e0: e0,
        delta_e: e_end - e_start,
        impact_b: b / UM,
        bound: gamma_factor(e0, ep) * ep * half_angle_sine(b, v_inf),
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KickHistogram {
    /// eV, one more than `counts`.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// eV.
    pub mean_abs_de: f64,
    pub sample_count: u64,
    pub seed: u64,
    /// Samples whose integration failed.
    pub rejected: u64,
    /// Samples above their own γ bound by more than the slack.
    pub bound_violations: u64,
}

/// Relative and absolute (eV) slack on the per-sample bound.
pub const BOUND_SLACK: (f64, f64) = (0.05, 1e-9);

pub fn within_bound(s: &CollisionSample) -> bool {
    s.delta_e.abs() <= s.bound * (1.0 + BOUND_SLACK.0) + BOUND_SLACK.1
}

impl KickHistogram {
    /// Bins |ΔE| linearly from zero to the largest value. Results must be
    /// in sample order for bit-exact output.
    pub fn from_samples<I>(seed: u64, samples: I, n_bins: usize) -> Self
    where
        I: IntoIterator<Item = Result<CollisionSample>>,
    {
        let mut kept = Vec::new();
        let mut rejected = 0;
        for s in samples {
            match s {
                Ok(s) => kept.push(s),
                Err(_) => rejected += 1,
            }
        }
        let n_bins = n_bins.max(1);
        let top = kept
            .iter()
            .map(|s| s.delta_e.abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let width = top / n_bins as f64;
        let bin_edges = (0..=n_bins).map(|i| i as f64 * width).collect();
        let mut counts = alloc::vec![0u64; n_bins];
        let mut sum = 0.0;
        let mut violations = 0;
        for s in &kept {
            let a = s.delta_e.abs();
            sum += a;
            counts[((a / width) as usize).min(n_bins - 1)] += 1;
            if !within_bound(s) {
                violations += 1;
            }
        }
        KickHistogram {
            bin_edges,
            counts,
            mean_abs_de: if kept.is_empty() { 0.0 } else { sum / kept.len() as f64 },
            sample_count: kept.len() as u64,
            seed,
            rejected,
            bound_violations: violations,
        }
    }
}

/// Serial Monte Carlo over `n_samples` collisions.
pub fn collision_mc(cfg: &CollisionConfig, n_samples: u64) -> Result<KickHistogram> {
    cfg.validate()?;
    require(cfg.rf.is_none(), "rf", "Monte Carlo runs in the static trap")?;
    require(n_samples > 0, "n_samples", "must be positive")?;
    Ok(KickHistogram::from_samples(
        cfg.seed,
        (0..n_samples).map(|i| collision_sample(cfg, i)),
        60,
    ))
}

// ---------------------------------------------------------------------------
// rf-driven encounters with a target at rest

/// One encounter with the target at rest at the trap centre.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RfEncounter {
    pub phase: f64,
    /// Energy of the Coulomb impulse on the target, eV.
    pub e_s: f64,
    /// Lab energy of a primary meeting a resting target at the encounter's
    /// asymptotic relative speed, eV.
    pub e_p_col: f64,
    /// Impact parameter of the encounter actually flown, m.
    pub b_col: f64,
    /// E_p,col·sin(θ_R/2) with the flown b and speed, eV.
    pub kick_scale: f64,
}

pub fn rf_encounter(cfg: &CollisionConfig, impact_b: f64, phase: f64) -> Result<RfEncounter> {
    cfg.validate()?;
    require(cfg.rf.is_some(), "rf", "required for the phase scan")?;
    require(impact_b > 0.0, "impact_b", "must be positive")?;
    let field = Field::from_config(cfg, Some(phase));
    let mut y0 = [0.0; 15];
    y0[..6].copy_from_slice(&primary_start(cfg, impact_b * UM, 0.0));
    let out = run(field, true, y0, stop_radius(cfg), 0.0, None)?;
    let c = out.closest.ok_or(Error::StepUnderflow { t: 0.0 })?;
    let (b, v_inf) = encounter(&c);
    let e_p_col = impact_energy(v_inf);
    Ok(RfEncounter {
        phase,
        e_s: kinetic(&out.y[12..15]),
        e_p_col,
        b_col: b / UM,
        kick_scale: e_p_col * half_angle_sine(b, v_inf),
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseSpread {
    /// m.
    pub impact_b: f64,
    /// Rest-target kick without rf, eV.
    pub static_e_s: f64,
    pub min_e_s: f64,
    pub median_e_s: f64,
    pub max_e_s: f64,
    pub min_e_p_col: f64,
    pub max_e_p_col: f64,
    /// (max − min)/(2·median).
    pub spread: f64,
    /// The same after rescaling each E_s from the flown impact parameter
    /// back to the nominal one with the rest-target law, leaving only the
    /// rf change of the primary energy.
    pub spread_flown_b: f64,
    pub encounters: Vec<RfEncounter>,
}

fn spread_of(v: &mut [f64]) -> (f64, f64, f64) {
    let med = median(v);
    (v[0], med, v[v.len() - 1])
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sweeps `n_phase` evenly spaced rf phases at each impact parameter.
pub fn rf_phase_scan(
    cfg: &CollisionConfig,
    impact_grid: &[f64],
    n_phase: usize,
) -> Result<Vec<PhaseSpread>> {
    require(n_phase >= 2, "n_phase", "need at least two phases")?;
    let mut out = Vec::with_capacity(impact_grid.len());
    for &b in impact_grid {
        let encounters = (0..n_phase)
            .map(|k| rf_encounter(cfg, b, 2.0 * PI * k as f64 / n_phase as f64))
            .collect::<Result<Vec<_>>>()?;
        out.push(summarize_phase_scan(cfg, b, encounters)?);
    }
    Ok(out)
}

/// Reduces encounters at one impact parameter (any order).
pub fn summarize_phase_scan(
    cfg: &CollisionConfig,
    impact_b: f64,
    encounters: Vec<RfEncounter>,
) -> Result<PhaseSpread> {
    require(!encounters.is_empty(), "encounters", "must not be empty")?;
    let ep0 = cfg.primary_energy_ep;
    let nominal = static_kick(ep0, impact_b)?;
    let mut es: Vec<f64> = encounters.iter().map(|e| e.e_s).collect();
    let (lo, med, hi) = spread_of(&mut es);
    let mut flown = encounters
        .iter()
        .map(|e| Ok(e.e_s * nominal / static_kick(ep0, e.b_col)?))
        .collect::<Result<Vec<f64>>>()?;
    let (flo, fmed, fhi) = spread_of(&mut flown);
    let ep = encounters.iter().map(|e| e.e_p_col);
    Ok(PhaseSpread {
        impact_b,
        static_e_s: nominal,
        min_e_s: lo,
        median_e_s: med,
        max_e_s: hi,
        min_e_p_col: ep.clone().fold(f64::INFINITY, f64::min),
        max_e_p_col: ep.fold(0.0, f64::max),
        spread: (hi - lo) / (2.0 * med),
        spread_flown_b: (fhi - flo) / (2.0 * fmed),
        encounters,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseAveragedKick {
    /// γ used on both sides, from the slowest primary seen.
    pub gamma: f64,
    /// γ/(2πr₀²)·∫₀^r₀ b db ∫ dφ E_p,col sin(θ_R/2), eV. The prefactor
    /// makes this half the disk average, the same normalization the
    /// analytic bound gets from integrating b up to 2r₀.
    pub numeric: f64,
    /// γ·q²/4πε₀r₀, eV.
    pub analytic: f64,
}

/// Beam-and-phase average of the kick scale: midpoint rule in b²/r0²
/// over the disk (`n_b` rings) times `n_phase` phases.
pub fn phase_averaged_kick(
    cfg: &CollisionConfig,
    n_b: usize,
    n_phase: usize,
) -> Result<PhaseAveragedKick> {
    require(n_b >= 1 && n_phase >= 1, "grid", "must be non-empty")?;
    let r0 = cfg.beam_radius_r0;
    let mut sum = 0.0;
    let mut slowest = f64::INFINITY;
    for i in 0..n_b {
        // equal-area rings
        let b = r0 * ((i as f64 + 0.5) / n_b as f64).sqrt();
        for k in 0..n_phase {
            let e = rf_encounter(cfg, b, 2.0 * PI * k as f64 / n_phase as f64)?;
            sum += e.kick_scale;
            slowest = slowest.min(e.e_p_col);
        }
    }
    let sum = 0.5 * sum / (n_b * n_phase) as f64;
    let gamma = gamma_factor(cfg.e_thresh, slowest);
    Ok(PhaseAveragedKick {
        gamma,
        numeric: gamma * sum,
        analytic: gamma * coulomb_ev_m() / r0,
    })
}

// ---------------------------------------------------------------------------
// single trajectories

/// Initial conditions for [`two_electron_trajectory`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryInit {
    /// Target energy at the centre, eV.
    pub target_e0: f64,
    pub target_dir: [f64; 3],
    /// Primary (x, y) on the injection plane, m.
    pub impact_offset: [f64; 2],
    /// rf phase at injection; ignored without rf.
    pub phase: f64,
    pub with_primary: bool,
    /// Extra time after the primary leaves, or the whole run without one, s.
    pub follow_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryPoint {
    /// s.
    pub t: f64,
    /// m and m/s.
    pub primary_pos: [f64; 3],
    pub primary_vel: [f64; 3],
    pub target_pos: [f64; 3],
    pub target_vel: [f64; 3],
    /// eV.
    pub primary_kinetic: f64,
    /// Kinetic plus trap (pseudo)potential, eV.
    pub target_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Energy of the Coulomb impulse on the target, eV.
    pub kick: f64,
    /// Impact energy of the encounter, as in [`RfEncounter`], eV.
    pub e_p_col: Option<f64>,
    /// Static trap: final energy above `u_depth`. rf trap: the target
    /// left the field region.
    pub escaped: bool,
}

pub fn two_electron_trajectory(cfg: &CollisionConfig, init: &TrajectoryInit) -> Result<Trajectory> {
    cfg.validate()?;
    require(init.target_e0 >= 0.0, "target_e0", "must be non-negative")?;
    require(init.follow_time >= 0.0, "follow_time", "must be non-negative")?;
    let dn = norm(&init.target_dir);
    require(
        init.target_e0 == 0.0 || dn > 0.0,
        "target_dir",
        "must be non-zero",
    )?;
    let field = Field::from_config(cfg, Some(init.phase));
    let v0 = speed(init.target_e0);
    let mut y0 = [0.0; 15];
    let p = primary_start(
        cfg,
        init.impact_offset[0] * UM,
        init.impact_offset[1] * UM,
    );
    y0[..6].copy_from_slice(&p);
    if dn > 0.0 {
        for i in 0..3 {
            y0[9 + i] = v0 * init.target_dir[i] / dn;
        }
    }
    let mut rec = Vec::new();
    let out = run(
        field,
        init.with_primary,
        y0,
        stop_radius(cfg),
        init.follow_time * NS,
        Some(&mut rec),
    )?;
    let points = rec
        .iter()
        .map(|(t, y)| TrajectoryPoint {
            t: t / NS,
            primary_pos: [y[0] / UM, y[1] / UM, y[2] / UM],
            primary_vel: [y[3] * 1e3, y[4] * 1e3, y[5] * 1e3],
            target_pos: [y[6] / UM, y[7] / UM, y[8] / UM],
            target_vel: [y[9] * 1e3, y[10] * 1e3, y[11] * 1e3],
            primary_kinetic: kinetic(&y[3..6]),
            target_energy: kinetic(&y[9..12]) + field.potential(&y[6..9]),
        })
        .collect::<Vec<_>>();
    let escaped = match field {
        Field::Rf { .. } => out.target_left,
        Field::Static { .. } => {
            kinetic(&out.y[9..12]) + field.potential(&out.y[6..9]) > cfg.u_depth
        }
    };
    Ok(Trajectory {
        points,
        kick: kinetic(&out.y[12..15]),
        e_p_col: out.closest.map(|c| impact_energy(encounter(&c).1)),
        escaped,
    })
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn static_kick_between_zero_and_ep(ep in 0.1f64..200.0, lb in -12.0f64..-3.0) {
            let e = static_kick(ep, 10f64.powf(lb)).unwrap();
            prop_assert!(e > 0.0 && e <= ep);
        }

        #[test]
        fn static_kick_is_half_angle_transfer(ep in 0.1f64..200.0, lb in -12.0f64..-3.0) {
            // target at rest: E_s = E_p sin²(θ_R/2)
            let b = 10f64.powf(lb);
            let v = (2.0 * ep * EV / M_E).sqrt();
            let th = rutherford_angle(b, v).unwrap();
            let e = static_kick(ep, b).unwrap();
            prop_assert!(((e - ep * (th / 2.0).sin().powi(2)) / e).abs() < 1e-9);
        }

        #[test]
        fn gamma_grows_with_threshold(ep in 1.0f64..100.0, a in 1e-5f64..1.0, b in 1e-5f64..1.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(gamma_factor(lo, ep) <= gamma_factor(hi, ep));
            prop_assert!(gamma_factor(lo, ep) >= 1.0);
        }
    }
}
