//! GHz Paul traps for electrons: stability, depth, drive power, detection
//! bandwidth, arm asymmetry and parametric mode coupling.

use core::f64::consts::SQRT_2;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{require, Error, Result};
use crate::physcore::consts::{EV, HBAR};
use crate::physcore::Particle;

/// Capacitances of the trap and its drive/detection network, F.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CapacitanceNetwork {
    pub c_rf1: f64,
    pub c_rf2: f64,
    pub c_cap: f64,
    pub c_iso1: f64,
    pub c_iso2: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub c_iso3: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub c_iso4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrapDesign {
    pub v_rf: f64,
    pub omega_rf: f64,
    /// Endcap separation, m.
    pub scale_d: f64,
    /// Geometry factor in the Mathieu q.
    pub beta_geom: f64,
    /// Depth divisor, D = qV q_m / ζ.
    pub zeta_depth: f64,
    pub capacitances: CapacitanceNetwork,
    /// Endcap-to-particle field factor.
    pub alpha: f64,
    /// Total capacitance seen between the endcaps, F.
    pub c_trap: f64,
    /// Anharmonic prefactor for x-z parametric coupling, if known.
    #[cfg_attr(feature = "serde", serde(default))]
    pub zeta_anharmonic: Option<f64>,
}

impl TrapDesign {
    pub fn validate(&self) -> Result<()> {
        require(self.v_rf > 0.0, "v_rf", "must be positive")?;
        require(self.omega_rf > 0.0, "omega_rf", "must be positive")?;
        require(self.scale_d > 0.0, "scale_d", "must be positive")?;
        require(
            self.beta_geom > 0.0 && self.beta_geom <= 1.0,
            "beta_geom",
            "must lie in (0, 1]",
        )?;
        require(self.zeta_depth > 0.0, "zeta_depth", "must be positive")?;
        let c = &self.capacitances;
        require(
            [c.c_rf1, c.c_rf2, c.c_cap, c.c_iso1, c.c_iso2, c.c_iso3, c.c_iso4, self.c_trap]
                .iter()
                .all(|v| *v >= 0.0 && v.is_finite()),
            "capacitances",
            "must be non-negative",
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FilmWire {
    pub width_w: f64,
    pub thickness_b: f64,
    pub penetration_lambda: f64,
    pub critical_density_jc: f64,
}

/// q_m = 8βqV/(md²Ω²). Values ≥ 1 are outside the first stability region.
pub fn mathieu_q(p: &Particle, trap: &TrapDesign) -> f64 {
    8.0 * trap.beta_geom * p.abs_charge() * trap.v_rf
        / (p.mass * trap.scale_d * trap.scale_d * trap.omega_rf * trap.omega_rf)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DepthSecular {
    pub q_mathieu: f64,
    /// Pseudopotential depth, J.
    pub depth: f64,
    pub omega_secular: f64,
}

impl DepthSecular {
    pub fn depth_ev(&self) -> f64 {
        self.depth / EV
    }
}

/// Depth qV q_m/ζ and lowest-order secular frequency q_mΩ/(2√2).
pub fn trap_depth_and_secular(trap: &TrapDesign, p: &Particle) -> Result<DepthSecular> {
    trap.validate()?;
    let q = mathieu_q(p, trap);
    if q >= 1.0 {
        return Err(Error::Unstable { q_mathieu: q });
    }
    Ok(DepthSecular {
        q_mathieu: q,
        depth: p.abs_charge() * trap.v_rf * q / trap.zeta_depth,
        omega_secular: q * trap.omega_rf / (2.0 * SQRT_2),
    })
}

/// I_c = Λ√(wb) J_c / 0.74.
pub fn critical_current(wire: &FilmWire) -> Result<f64> {
    require(
        wire.width_w > 0.0
            && wire.thickness_b > 0.0
            && wire.penetration_lambda > 0.0
            && wire.critical_density_jc > 0.0,
        "wire",
        "all dimensions and constants must be positive",
    )?;
    Ok(wire.penetration_lambda * (wire.width_w * wire.thickness_b).sqrt() * wire.critical_density_jc / 0.74)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RfLoad {
    /// ΩCV²/Q, W.
    pub dissipation: f64,
    /// ΩCV, A.
    pub peak_current: f64,
}

pub fn rf_power_current(omega_rf: f64, c_total: f64, v_rf: f64, q_factor: f64) -> Result<RfLoad> {
    require(omega_rf > 0.0, "omega_rf", "must be positive")?;
    require(c_total > 0.0, "c_total", "must be positive")?;
    require(v_rf > 0.0, "v_rf", "must be positive")?;
    require(q_factor > 0.0, "q_factor", "must be positive")?;
    let i = omega_rf * c_total * v_rf;
    Ok(RfLoad {
        dissipation: i * v_rf / q_factor,
        peak_current: i,
    })
}

fn series(a: f64, b: f64) -> f64 {
    if a.is_infinite() {
        return b;
    }
    if b.is_infinite() {
        return a;
    }
    if a + b == 0.0 {
        0.0
    } else {
        a * b / (a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Detection {
    pub c_total: f64,
    /// Signal width R_det/L_e, rad/s.
    pub linewidth: f64,
}

/// Capacitance across the detection inductor and the resulting signal width.
pub fn detection_metrics(trap: &TrapDesign, p: &Particle, q_det: f64, omega0: f64) -> Result<Detection> {
    require(q_det > 0.0, "q_det", "must be positive")?;
    require(omega0 > 0.0, "omega0", "must be positive")?;
    let c = &trap.capacitances;
    let c_total = c.c_cap + series(c.c_rf1, c.c_rf2) + series(c.c_iso1, c.c_iso2);
    require(c_total > 0.0, "capacitances", "total must be positive")?;
    let q = p.abs_charge();
    let linewidth =
        q_det * q * q * trap.alpha * trap.alpha / (omega0 * c_total * p.mass * trap.scale_d * trap.scale_d);
    Ok(Detection { c_total, linewidth })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Crosstalk {
    pub dq_rf_rel: f64,
    pub dq_det_rel: f64,
    pub epsilon: f64,
}

/// Quality-factor shifts of the drive and detection resonators caused by
/// unequal arms of the capacitance bridge.
pub fn crosstalk(trap: &TrapDesign, q_rf: f64, q_det: f64, omega0: f64, omega_rf: f64) -> Result<Crosstalk> {
    require(q_rf > 0.0 && q_det > 0.0, "quality factors", "must be positive")?;
    require(omega0 > 0.0 && omega_rf > 0.0, "frequencies", "must be positive")?;
    let c = &trap.capacitances;
    let arm = c.c_rf1 + c.c_iso1;
    require(arm > 0.0, "capacitances", "rf and iso arm must be positive")?;
    let epsilon = ((c.c_rf1 - c.c_rf2).abs() + (c.c_iso1 - c.c_iso2).abs()) / arm;
    let denom = arm + 2.0 * c.c_cap;
    Ok(Crosstalk {
        dq_rf_rel: q_rf * omega0 / (q_det * omega_rf) * c.c_cap / denom * epsilon,
        dq_det_rel: q_det * omega0 / (q_rf * omega_rf) * arm / denom * epsilon,
        epsilon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Parametric {
    /// x-z exchange rate 2ξα, rad/s.
    pub rate: f64,
    /// Endcap-driven z amplitude, m.
    pub drive_amplitude: f64,
    /// 2ω_x − ω_z, rad/s.
    pub drive_freq: f64,
}

/// Exchange rate between two secular modes when the endcaps are driven at
/// the difference frequency through the trap anharmonicity.
pub fn parametric_rate(
    trap: &TrapDesign,
    p: &Particle,
    omega_x: f64,
    omega_z: f64,
    v_drive: f64,
) -> Result<Parametric> {
    let zeta = trap.zeta_anharmonic.ok_or(Error::InvalidInput {
        field: "zeta_anharmonic",
        reason: "design has no anharmonic prefactor",
    })?;
    require(omega_x > 0.0 && omega_z > 0.0, "secular frequencies", "must be positive")?;
    let q = p.abs_charge();
    let m = p.mass;
    let d = trap.scale_d;
    let rate = zeta * (2.0 * HBAR).sqrt() * q.powi(3) * trap.v_rf * trap.v_rf * v_drive.abs()
        / (m.powf(3.5) * trap.omega_rf * trap.omega_rf * omega_x * omega_z.powf(2.5) * d.powi(7));
    let drive_freq = 2.0 * omega_x - omega_z;
    let detuning = (omega_z * omega_z - drive_freq * drive_freq).abs();
    require(detuning > 0.0, "omega_x", "drive lands on the z resonance")?;
    let drive_amplitude = trap.alpha * q * v_drive.abs() / (d * m * detuning);
    Ok(Parametric {
        rate,
        drive_amplitude,
        drive_freq,
    })
}

/// Largest offset from the rf null at which micromotion kinetic energy
/// m v² stays below `e_capture`, with v = q_m x Ω/2.
pub fn micromotion_limit(e_capture: f64, q_m: f64, omega_rf: f64, p: &Particle) -> Result<f64> {
    require(e_capture > 0.0, "e_capture", "must be positive")?;
    require(q_m > 0.0, "q_m", "must be positive")?;
    require(omega_rf > 0.0, "omega_rf", "must be positive")?;
    Ok(2.0 * (e_capture / p.mass).sqrt() / (q_m * omega_rf))
}

/// Outcome of validating a user design against operating limits.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignCheck {
    pub q_mathieu: f64,
    pub stable: bool,
    pub depth_ev: Option<f64>,
    pub omega_secular: Option<f64>,
    pub rf: RfLoad,
    /// I_c / I_rf; above 1 the leads stay superconducting.
    pub current_margin: Option<f64>,
    pub within_cooling_budget: Option<bool>,
}

impl DesignCheck {
    pub fn passes(&self) -> bool {
        self.stable
            && self.current_margin.map_or(true, |m| m > 1.0)
            && self.within_cooling_budget.unwrap_or(true)
    }
}

pub fn check_design(
    trap: &TrapDesign,
    p: &Particle,
    q_rf: f64,
    wire: Option<&FilmWire>,
    cooling_budget_w: Option<f64>,
) -> Result<DesignCheck> {
    trap.validate()?;
    let q = mathieu_q(p, trap);
    let ds = trap_depth_and_secular(trap, p).ok();
    let rf = rf_power_current(trap.omega_rf, trap.c_trap, trap.v_rf, q_rf)?;
    let current_margin = match wire {
        Some(w) => Some(critical_current(w)? / rf.peak_current),
        None => None,
    };
    Ok(DesignCheck {
        q_mathieu: q,
        stable: q < 1.0,
        depth_ev: ds.map(|d| d.depth_ev()),
        omega_secular: ds.map(|d| d.omega_secular),
        rf,
        current_margin,
        within_cooling_budget: cooling_budget_w.map(|b| rf.dissipation <= b),
    })
}
