//! The materials, particles, modes and designs database.
//!
//! One JSON file, versioned by `schema_version`. Every physical quantity
//! carries its unit as a key suffix; frequencies are in Hz here and become
//! angular only when handed to the core crate.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trapcouple_core::etrap::{CapacitanceNetwork, FilmWire, TrapDesign};
use trapcouple_core::heatex::HeatingReference;
use trapcouple_core::loading::LoadingConfig;
use trapcouple_core::mech::{
    bva_mode, cantilever_mode, membrane_mode, BeamSection, BvaGeometry, MembraneKind, ModeModel,
    SectionShape,
};
use trapcouple_core::physcore::consts::{E_CHARGE, M_P};
use trapcouple_core::physcore::{angular, Particle};
use trapcouple_core::piezo::{rotate_piezo, trigonal_32, PiezoMaterial};
use trapcouple_core::scatter::{CollisionConfig, RfDrive};

use crate::error::{AppError, AppResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const DATABASE_ENV: &str = "TRAPCOUPLE_DATABASE";

const BUNDLED: &str = include_str!("../data/database.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Database {
    pub schema_version: u32,
    pub particles: Vec<ParticleEntry>,
    pub coupling_table: CouplingTable,
    pub quarter_wave: QuarterWave,
    pub materials: Vec<MaterialEntry>,
    pub superconductors: Vec<Superconductor>,
    pub critical_current_anchors: Vec<CriticalCurrentAnchor>,
    pub modes: Vec<ModeEntry>,
    pub quartz_coupling: QuartzCoupling,
    pub cooling: Cooling,
    pub designs: Vec<DesignEntry>,
    pub planar_trap: serde_json::Value,
    pub dissipation_corner: DissipationCorner,
    pub heating_references: Vec<HeatingRow>,
    pub heating_target: HeatingTarget,
    pub loading: LoadingEntry,
    pub collisions: Collisions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleEntry {
    pub name: String,
    pub charge_e: f64,
    #[serde(default)]
    pub mass_kg: Option<f64>,
    /// Mass in proton masses.
    #[serde(default)]
    pub mass_number: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingTable {
    pub gap_m: f64,
    pub c_trap_f: f64,
    pub alpha: f64,
    pub convention: String,
    pub temperatures_k: [f64; 2],
    pub rows: Vec<CouplingRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingRow {
    pub species: String,
    pub frequency_hz: f64,
    pub reference: CouplingRowRef,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingRowRef {
    pub g_hz: f64,
    pub q_min_4k: f64,
    pub q_min_50mk: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuarterWave {
    pub impedance_ohm: f64,
    pub frequency_hz: f64,
    pub species: String,
    pub reference: QuarterWaveRef,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuarterWaveRef {
    pub capacitance_f: f64,
    pub degradation_factor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialEntry {
    pub name: String,
    /// `trigonal_32` or `single_coefficient`.
    pub class: String,
    #[serde(default)]
    pub e11_c_per_m2: Option<f64>,
    #[serde(default)]
    pub e14_c_per_m2: Option<f64>,
    #[serde(default)]
    pub cut_euler_deg: Option<[f64; 3]>,
    #[serde(default)]
    pub coefficient_c_per_m2: Option<f64>,
    /// (row, Voigt column) of the single coefficient.
    #[serde(default)]
    pub coefficient_index: Option<[usize; 2]>,
    pub permittivity_f_per_m: f64,
    pub density_kg_per_m3: f64,
    pub sound_speed_m_per_s: f64,
    #[serde(default)]
    pub calibration: Option<String>,
    #[serde(default)]
    pub reference: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Superconductor {
    pub name: String,
    pub penetration_depth_m: f64,
    pub lambda_jc_product_a_per_m: f64,
    pub calibration: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalCurrentAnchor {
    pub material: String,
    pub width_m: f64,
    pub thickness_m: f64,
    pub reference_a: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub name: String,
    /// `cantilever`, `bva` or `membrane`.
    pub kind: String,
    #[serde(default)]
    pub material: Option<String>,
    #[serde(default)]
    pub species: Option<String>,
    #[serde(default)]
    pub ion_height_m: Option<f64>,
    // cantilever
    #[serde(default)]
    pub length_m: Option<f64>,
    #[serde(default)]
    pub section: Option<SectionShape>,
    #[serde(default)]
    pub section_radius_m: Option<f64>,
    #[serde(default)]
    pub youngs_modulus_pa: Option<f64>,
    // bulk acoustic disk
    #[serde(default)]
    pub thickness_m: Option<f64>,
    #[serde(default)]
    pub curvature_radius_m: Option<f64>,
    #[serde(default)]
    pub disk_radius_m: Option<f64>,
    #[serde(default)]
    pub overtone: Option<u32>,
    #[serde(default)]
    pub polarization: Option<[f64; 3]>,
    #[serde(default)]
    pub sound_speed_m_per_s: Option<f64>,
    // membrane
    #[serde(default)]
    pub membrane: Option<MembraneKind>,
    #[serde(default)]
    pub side_m: Option<f64>,
    #[serde(default)]
    pub frequency_hz: Option<f64>,
    #[serde(default)]
    pub bias_v: Option<f64>,
    #[serde(default)]
    pub distance_m: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub thickness_assumption: Option<String>,
    pub density_kg_per_m3: f64,
    #[serde(default)]
    pub reference: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuartzCoupling {
    pub species: String,
    pub mode: String,
    pub ion_height_m: f64,
    pub trap_gap_m: f64,
    pub effective_coefficient_c_per_m2: f64,
    pub c_trap_f: f64,
    pub overtones: Vec<u32>,
    pub aligned_geometric_integral: f64,
    pub reference: QuartzCouplingRef,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuartzCouplingRef {
    pub cs_bound_hz: f64,
    pub aligned_bound_hz: f64,
    pub shunt_g_hz: f64,
    pub electrode_over_spot: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cooling {
    pub g_hz: f64,
    pub quality_factor: f64,
    pub reference: CoolingRef,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolingRef {
    pub n_bar_4k: f64,
    pub n_bar_50mk: f64,
    pub coherence_time_4k_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Capacitances {
    pub rf1: f64,
    pub rf2: f64,
    pub cap: f64,
    pub iso1: f64,
    pub iso2: f64,
    #[serde(default)]
    pub iso3: f64,
    #[serde(default)]
    pub iso4: f64,
}

/// A trap design. Also the format accepted by `trap check`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignEntry {
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default = "default_species")]
    pub species: String,
    pub v_rf_v: f64,
    pub rf_frequency_hz: f64,
    pub endcap_distance_m: f64,
    pub beta_geom: f64,
    pub zeta_depth: f64,
    #[serde(default)]
    pub zeta_anharmonic: Option<f64>,
    #[serde(default = "one")]
    pub alpha: f64,
    pub c_trap_f: f64,
    pub capacitances_f: Capacitances,
    #[serde(default = "default_q_rf")]
    pub q_rf: f64,
    #[serde(default = "default_q_det")]
    pub q_det: f64,
    #[serde(default = "default_detection_hz")]
    pub detection_frequency_hz: f64,
    #[serde(default)]
    pub secular_x_hz: Option<f64>,
    #[serde(default)]
    pub secular_z_hz: Option<f64>,
    #[serde(default)]
    pub parametric_drive_v: Vec<f64>,
    /// Lead wire for the critical-current margin.
    #[serde(default)]
    pub wire: Option<WireEntry>,
    #[serde(default)]
    pub cooling_budget_w: Option<f64>,
    #[serde(default)]
    pub reference: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireEntry {
    pub material: String,
    pub width_m: f64,
    pub thickness_m: f64,
}

fn default_species() -> String {
    "electron".into()
}
fn one() -> f64 {
    1.0
}
fn default_q_rf() -> f64 {
    1e4
}
fn default_q_det() -> f64 {
    1e3
}
fn default_detection_hz() -> f64 {
    1e9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationCorner {
    pub c_rf_f: f64,
    pub rf_frequency_hz: f64,
    pub v_rf_v: f64,
    pub q_rf: f64,
    pub budget_w: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatingRow {
    pub material: String,
    pub temperature_k: f64,
    pub species: String,
    pub distance_m: f64,
    pub frequency_hz: f64,
    pub rate_quanta_per_s: f64,
    pub citation: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatingTarget {
    pub species: String,
    pub distance_m: f64,
    pub frequency_hz: f64,
    pub reference_band_quanta_per_s: [f64; 2],
    pub alpha_high_ceiling_quanta_per_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadingEntry {
    pub current_density_a_per_m2: f64,
    pub beam_radius_m: f64,
    pub helium_pressure_pa: f64,
    pub gas_temperature_k: f64,
    /// The trapping sphere gets the volume of a cube this size.
    pub trap_cube_side_m: f64,
    pub trap_depth_ev: f64,
    pub sigma_ion_m2: f64,
    pub sigma_elastic_m2: f64,
    pub gamma_cool_per_s: f64,
    pub e_init_ev: f64,
    pub t_detect_s: f64,
    pub map_current_density_a_per_m2: [f64; 2],
    pub map_pressure_pa: [f64; 2],
    pub map_points: usize,
    pub fig10b_t_detect_s: f64,
    pub reference: LoadingRef,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadingRef {
    pub helium_loss_time_s: f64,
    pub knee_pressure_pa: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Collisions {
    #[serde(rename = "static")]
    pub static_trap: CollisionEntry,
    pub rf: CollisionEntry,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionEntry {
    pub primary_energy_ev: f64,
    pub beam_radius_m: f64,
    /// Omitted for rf traps: derived from q and the drive.
    #[serde(default)]
    pub trap_frequencies_hz: Option<[f64; 3]>,
    pub trap_radius_m: f64,
    pub u_depth_ev: f64,
    pub e_thresh_ev: f64,
    pub injection_z_m: f64,
    #[serde(default)]
    pub rf_frequency_hz: Option<f64>,
    #[serde(default)]
    pub q_mathieu: Option<f64>,
    #[serde(default)]
    pub half_height_m: Option<f64>,
    #[serde(default)]
    pub radius_m: Option<f64>,
    /// Impact parameter for the single-trajectory escape comparison.
    #[serde(default)]
    pub escape_impact_m: Option<f64>,
    #[serde(default)]
    pub reference: BTreeMap<String, f64>,
}

fn missing(what: &str, field: &str) -> AppError {
    AppError::Config(format!("{what}: missing field `{field}`"))
}

impl Database {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED, "bundled database").expect("bundled database is valid")
    }

    pub fn parse(text: &str, origin: &str) -> AppResult<Self> {
        #[derive(Deserialize)]
        struct Version {
            schema_version: Option<u32>,
        }
        let v: Version = serde_json::from_str(text)
            .map_err(|e| AppError::Config(format!("{origin}: {e}")))?;
        if v.schema_version != Some(SCHEMA_VERSION) {
            return Err(AppError::Config(format!(
                "{origin}: schema_version {:?} is not supported (expected {SCHEMA_VERSION})",
                v.schema_version
            )));
        }
        serde_json::from_str(text).map_err(|e| AppError::Config(format!("{origin}: {e}")))
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Explicit path, else the environment override, else the bundled copy.
    /// Returns the database and a label for where it came from.
    pub fn resolve(explicit: Option<&Path>) -> AppResult<(Self, String)> {
        let from_env = std::env::var_os(DATABASE_ENV).map(PathBuf::from);
        match explicit.map(Path::to_path_buf).or(from_env) {
            Some(p) => Ok((Self::load(&p)?, p.display().to_string())),
            None => Ok((Self::bundled(), "bundled".into())),
        }
    }

    pub fn particle(&self, name: &str) -> AppResult<Particle> {
        let e = self
            .particles
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| AppError::Config(format!("unknown species `{name}`")))?;
        let mass = match (e.mass_kg, e.mass_number) {
            (Some(m), None) => m,
            (None, Some(a)) => a * M_P,
            _ => {
                return Err(AppError::Config(format!(
                    "particle `{name}`: give exactly one of mass_kg, mass_number"
                )))
            }
        };
        Ok(Particle::new(name, e.charge_e * E_CHARGE, mass)?)
    }

    pub fn material(&self, name: &str) -> AppResult<PiezoMaterial> {
        let m = self
            .materials
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| AppError::Config(format!("unknown material `{name}`")))?;
        let what = format!("material `{name}`");
        let e = match m.class.as_str() {
            "trigonal_32" => {
                let e11 = m.e11_c_per_m2.ok_or_else(|| missing(&what, "e11_c_per_m2"))?;
                let e14 = m.e14_c_per_m2.ok_or_else(|| missing(&what, "e14_c_per_m2"))?;
                let cut = m.cut_euler_deg.unwrap_or([0.0; 3]).map(f64::to_radians);
                rotate_piezo(&trigonal_32(e11, e14), cut)
            }
            "single_coefficient" => {
                let v = m
                    .coefficient_c_per_m2
                    .ok_or_else(|| missing(&what, "coefficient_c_per_m2"))?;
                let [i, a] = m
                    .coefficient_index
                    .ok_or_else(|| missing(&what, "coefficient_index"))?;
                if i > 2 || a > 5 {
                    return Err(AppError::Config(format!("{what}: coefficient_index out of range")));
                }
                let mut e = [[0.0; 6]; 3];
                e[i][a] = v;
                e
            }
            other => {
                return Err(AppError::Config(format!("{what}: unknown class `{other}`")))
            }
        };
        Ok(PiezoMaterial::new(
            name,
            e,
            m.permittivity_f_per_m,
            m.density_kg_per_m3,
            m.sound_speed_m_per_s,
        )?)
    }

    pub fn mode_entry(&self, name: &str) -> AppResult<&ModeEntry> {
        self.modes
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| AppError::Config(format!("unknown mode `{name}`")))
    }

    pub fn design(&self, name: &str) -> AppResult<&DesignEntry> {
        self.designs
            .iter()
            .find(|d| d.name == name || d.aliases.iter().any(|a| a == name))
            .ok_or_else(|| AppError::Config(format!("unknown design `{name}`")))
    }

    pub fn film_wire(&self, w: &WireEntry) -> AppResult<FilmWire> {
        let s = self
            .superconductors
            .iter()
            .find(|s| s.name == w.material)
            .ok_or_else(|| AppError::Config(format!("unknown superconductor `{}`", w.material)))?;
        Ok(FilmWire {
            width_w: w.width_m,
            thickness_b: w.thickness_m,
            penetration_lambda: s.penetration_depth_m,
            critical_density_jc: s.lambda_jc_product_a_per_m / s.penetration_depth_m,
        })
    }

    pub fn heating_reference(&self, row: &HeatingRow) -> AppResult<HeatingReference> {
        Ok(HeatingReference {
            species: self.particle(&row.species)?,
            distance_d: row.distance_m,
            frequency_f: row.frequency_hz,
            rate: row.rate_quanta_per_s,
            temperature: row.temperature_k,
            material: row.material.clone(),
        })
    }

    pub fn loading_config(&self) -> LoadingConfig {
        let l = &self.loading;
        LoadingConfig {
            current_density_j: l.current_density_a_per_m2,
            beam_radius_r0: l.beam_radius_m,
            helium_pressure: l.helium_pressure_pa,
            gas_temperature: l.gas_temperature_k,
            trap_radius_l: l.trap_cube_side_m * (3.0 / (4.0 * std::f64::consts::PI)).cbrt(),
            trap_depth: l.trap_depth_ev,
            sigma_ion: l.sigma_ion_m2,
            sigma_elastic: l.sigma_elastic_m2,
            gamma_cool: l.gamma_cool_per_s,
            e_init: l.e_init_ev,
            t_detect: l.t_detect_s,
        }
    }
}

impl ModeEntry {
    fn need<T: Copy>(&self, v: Option<T>, field: &str) -> AppResult<T> {
        v.ok_or_else(|| missing(&format!("mode `{}`", self.name), field))
    }

    pub fn build(&self) -> AppResult<ModeModel> {
        let rho = self.density_kg_per_m3;
        Ok(match self.kind.as_str() {
            "cantilever" => {
                let shape = self.need(self.section, "section")?;
                let sec = BeamSection::new(shape, self.need(self.section_radius_m, "section_radius_m")?)?;
                cantilever_mode(
                    self.need(self.length_m, "length_m")?,
                    &sec,
                    self.need(self.youngs_modulus_pa, "youngs_modulus_pa")?,
                    rho,
                )?
            }
            "bva" => bva_mode(
                &BvaGeometry {
                    thickness_t: self.need(self.thickness_m, "thickness_m")?,
                    curvature_r: self.need(self.curvature_radius_m, "curvature_radius_m")?,
                    disk_radius_l: self.need(self.disk_radius_m, "disk_radius_m")?,
                    overtone_n: self.need(self.overtone, "overtone")?,
                },
                rho,
                self.need(self.sound_speed_m_per_s, "sound_speed_m_per_s")?,
                self.need(self.polarization, "polarization")?,
            )?,
            "membrane" => membrane_mode(
                self.need(self.membrane, "membrane")?,
                self.need(self.side_m, "side_m")?,
                self.need(self.thickness_m, "thickness_m")?,
                rho,
                angular(self.need(self.frequency_hz, "frequency_hz")?),
            )?,
            other => {
                return Err(AppError::Config(format!(
                    "mode `{}`: unknown kind `{other}`",
                    self.name
                )))
            }
        })
    }

    /// Ion position a height above the resonator's top face (cantilever,
    /// +z) or its upper disk face (+y).
    pub fn ion_position(&self, mode: &ModeModel, height: f64) -> [f64; 3] {
        match self.kind.as_str() {
            "bva" => {
                let t = self.thickness_m.unwrap_or(0.0);
                [0.0, 0.5 * t + height, 0.0]
            }
            _ => {
                let top = mode.volume.closest_point([0.0, 0.0, f64::MAX / 4.0])[2];
                [0.0, 0.0, top + height]
            }
        }
    }
}

impl DesignEntry {
    pub fn trap(&self) -> TrapDesign {
        let c = &self.capacitances_f;
        TrapDesign {
            v_rf: self.v_rf_v,
            omega_rf: angular(self.rf_frequency_hz),
            scale_d: self.endcap_distance_m,
            beta_geom: self.beta_geom,
            zeta_depth: self.zeta_depth,
            capacitances: CapacitanceNetwork {
                c_rf1: c.rf1,
                c_rf2: c.rf2,
                c_cap: c.cap,
                c_iso1: c.iso1,
                c_iso2: c.iso2,
                c_iso3: c.iso3,
                c_iso4: c.iso4,
            },
            alpha: self.alpha,
            c_trap: self.c_trap_f,
            zeta_anharmonic: self.zeta_anharmonic,
        }
    }

    pub fn reference(&self, key: &str) -> Option<f64> {
        self.reference.get(key).copied()
    }
}

impl CollisionEntry {
    pub fn config(&self, seed: u64) -> AppResult<CollisionConfig> {
        let rf = match (self.rf_frequency_hz, self.q_mathieu) {
            (Some(f), Some(q)) => Some(RfDrive {
                omega_rf: angular(f),
                q_mathieu: q,
                initial_phase: 0.0,
                half_height_z: self.half_height_m.ok_or_else(|| missing("rf collision preset", "half_height_m"))?,
                radius_rho: self.radius_m.ok_or_else(|| missing("rf collision preset", "radius_m"))?,
            }),
            (None, None) => None,
            _ => {
                return Err(AppError::Config(
                    "collision preset: rf_frequency_hz and q_mathieu go together".into(),
                ))
            }
        };
        let trap_freqs = match (self.trap_frequencies_hz, &rf) {
            (Some(f), _) => f.map(angular),
            (None, Some(d)) => {
                let wz = d.q_mathieu * d.omega_rf / (2.0 * std::f64::consts::SQRT_2);
                [wz / 2.0, wz / 2.0, wz]
            }
            (None, None) => return Err(missing("collision preset", "trap_frequencies_hz")),
        };
        let cfg = CollisionConfig {
            primary_energy_ep: self.primary_energy_ev,
            beam_radius_r0: self.beam_radius_m,
            trap_freqs,
            trap_volume_l: self.trap_radius_m,
            u_depth: self.u_depth_ev,
            e_thresh: self.e_thresh_ev,
            rf,
            injection_z: self.injection_z_m,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn reference(&self, key: &str) -> AppResult<f64> {
        self.reference
            .get(key)
            .copied()
            .ok_or_else(|| missing("collision preset reference", key))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use trapcouple_core::physcore::particle_lookup;
    use trapcouple_core::scatter::CollisionConfig;

    #[test]
    fn bundled_parses_and_matches_catalog() {
        let db = Database::bundled();
        for name in trapcouple_core::physcore::CATALOG {
            assert_eq!(db.particle(name).unwrap(), particle_lookup(name).unwrap());
        }
    }

    #[test]
    fn collision_presets_match_core() {
        let db = Database::bundled();
        assert_eq!(db.collisions.rf.config(0).unwrap(), CollisionConfig::rf_design_b());
        let s = db.collisions.static_trap.config(0).unwrap();
        let h = CollisionConfig::harmonic_1ghz();
        assert_eq!(s.rf, None);
        assert_eq!(s.u_depth, h.u_depth);
        for i in 0..3 {
            assert!((s.trap_freqs[i] / h.trap_freqs[i] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn loading_matches_core_default() {
        let db = Database::bundled();
        let a = db.loading_config();
        let b = LoadingConfig::default();
        let close = |x: f64, y: f64| (x / y - 1.0).abs() < 1e-15;
        assert!(close(a.trap_radius_l, b.trap_radius_l));
        assert!(close(a.sigma_elastic, b.sigma_elastic));
        let a = LoadingConfig { trap_radius_l: b.trap_radius_l, sigma_elastic: b.sigma_elastic, ..a };
        assert_eq!(a, b);
    }

    #[test]
    fn wrong_schema_rejected() {
        let text = BUNDLED.replacen("\"schema_version\": 1", "\"schema_version\": 7", 1);
        assert!(matches!(Database::parse(&text, "x"), Err(AppError::Config(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = BUNDLED.replacen("\"gap_m\"", "\"gap\": 1, \"gap_m\"", 1);
        let err = Database::parse(&text, "x").unwrap_err();
        assert!(err.to_string().contains("gap"), "{err}");
    }

    #[test]
    fn every_mode_builds() {
        let db = Database::bundled();
        for m in &db.modes {
            m.build().unwrap();
            if let Some(mat) = &m.material {
                db.material(mat).unwrap();
            }
        }
    }
}
