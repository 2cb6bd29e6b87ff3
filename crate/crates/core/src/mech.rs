//! Mechanical eigenmodes: membranes, a clamped-free beam and the bulk
//! acoustic mode of a plano-convex quartz disk.
//!
//! Shapes are normalized to max|s| = 1, so the mode mass is the effective
//! mass at the antinode.

use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{require, Result};
use crate::physcore::Particle;
use crate::quad::{self, QuadResult, QuadratureSpec, Region};

/// First root of 1 + cos(x)cosh(x) = 0.
pub const CANTILEVER_KL: f64 = 1.875_104_068_711_961;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SectionShape {
    Circular,
    Hexagonal,
}

/// Beam cross section. For a hexagon the radius is that of the
/// circumscribed circle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BeamSection {
    pub shape: SectionShape,
    pub radius_a: f64,
    pub area: f64,
    pub beta_factor: f64,
}

impl BeamSection {
    pub fn new(shape: SectionShape, radius_a: f64) -> Result<Self> {
        require(radius_a > 0.0, "radius_a", "must be positive")?;
        let (area, beta_factor) = match shape {
            SectionShape::Circular => (PI * radius_a * radius_a, 3.09),
            SectionShape::Hexagonal => (1.5 * 3.0.sqrt() * radius_a * radius_a, 2.57),
        };
        Ok(BeamSection {
            shape,
            radius_a,
            area,
            beta_factor,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MembraneKind {
    /// Square drum clamped on all edges, fundamental sin·sin mode.
    ClampedDrum,
    /// Pad on soft tethers moving rigidly.
    TrampolineCom,
}

/// Displacement pattern of a mode.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ModeShape {
    /// Out-of-plane sin(πx/a)sin(πy/a) on [0, a]².
    Drum { side: f64 },
    /// Rigid out-of-plane motion.
    Trampoline,
    /// Flexure along z of a beam along x, root at x = 0, unit tip deflection.
    Cantilever { length: f64 },
    /// Gaussian spot times a standing wave through the thickness; the disk
    /// spans y in [-t/2, t/2] so odd overtones have antinodes on both faces.
    Bva {
        sigma: f64,
        wavenumber: f64,
        polarization: [f64; 3],
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModeModel {
    pub omega0: f64,
    pub mode_mass: f64,
    pub density: f64,
    pub shape: ModeShape,
    pub volume: Region,
}

fn cantilever_raw(kx: f64) -> (f64, f64) {
    let kl = CANTILEVER_KL;
    let s1 = (kl.cosh() + kl.cos()) / (kl.sinh() + kl.sin());
    let v = (kx.cosh() - kx.cos()) - s1 * (kx.sinh() - kx.sin());
    let dv = (kx.sinh() + kx.sin()) - s1 * (kx.cosh() - kx.cos());
    (v, dv)
}

fn cantilever_tip() -> f64 {
    cantilever_raw(CANTILEVER_KL).0
}

impl ModeModel {
    pub fn total_mass(&self) -> f64 {
        self.density * self.volume.volume()
    }

    pub fn polarization_axis(&self) -> Option<[f64; 3]> {
        match self.shape {
            ModeShape::Bva { polarization, .. } => Some(polarization),
            _ => None,
        }
    }

    /// Scalar envelope and its gradient; the displacement is envelope
    /// times a fixed direction.
    fn envelope(&self, r: [f64; 3]) -> (f64, [f64; 3], [f64; 3]) {
        match self.shape {
            ModeShape::Drum { side } => {
                let k = PI / side;
                let (sx, cx) = (k * r[0]).sin_cos();
                let (sy, cy) = (k * r[1]).sin_cos();
                (sx * sy, [k * cx * sy, k * sx * cy, 0.0], [0.0, 0.0, 1.0])
            }
            ModeShape::Trampoline => (1.0, [0.0; 3], [0.0, 0.0, 1.0]),
            ModeShape::Cantilever { length } => {
                let k = CANTILEVER_KL / length;
                let tip = cantilever_tip();
                let (v, dv) = cantilever_raw(k * r[0]);
                (v / tip, [k * dv / tip, 0.0, 0.0], [0.0, 0.0, 1.0])
            }
            ModeShape::Bva {
                sigma,
                wavenumber,
                polarization,
            } => {
                let s2 = sigma * sigma;
                let g = (-(r[0] * r[0] + r[2] * r[2]) / (2.0 * s2)).exp();
                let (sy, cy) = (wavenumber * r[1]).sin_cos();
                let f = g * sy;
                (
                    f,
                    [-r[0] / s2 * f, wavenumber * cy * g, -r[2] / s2 * f],
                    polarization,
                )
            }
        }
    }

    /// Dimensionless displacement s(r).
    pub fn displacement(&self, r: [f64; 3]) -> [f64; 3] {
        let (f, _, d) = self.envelope(r);
        [f * d[0], f * d[1], f * d[2]]
    }

    /// grad[j][k] = ∂s_k/∂r_j.
    pub fn displacement_gradient(&self, r: [f64; 3]) -> [[f64; 3]; 3] {
        let (_, df, d) = self.envelope(r);
        let mut g = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                g[j][k] = df[j] * d[k];
            }
        }
        g
    }

    /// Engineering strain in Voigt order (xx, yy, zz, yz, xz, xy).
    pub fn strain_voigt(&self, r: [f64; 3]) -> [f64; 6] {
        let g = self.displacement_gradient(r);
        [
            g[0][0],
            g[1][1],
            g[2][2],
            g[1][2] + g[2][1],
            g[0][2] + g[2][0],
            g[0][1] + g[1][0],
        ]
    }

    /// Standing-wave wavenumber through the thickness, BVA modes only.
    pub fn wavenumber(&self) -> Option<f64> {
        match self.shape {
            ModeShape::Bva { wavenumber, .. } => Some(wavenumber),
            _ => None,
        }
    }

    pub fn spot_size(&self) -> Option<f64> {
        match self.shape {
            ModeShape::Bva { sigma, .. } => Some(sigma),
            _ => None,
        }
    }
}

/// ρ∫|s|²dV by adaptive cubature.
pub fn mode_mass(mode: &ModeModel, spec: &QuadratureSpec) -> Result<QuadResult<1>> {
    let mut res = quad::integrate(
        |r| {
            let s = mode.displacement(r);
            [s[0] * s[0] + s[1] * s[1] + s[2] * s[2]]
        },
        &mode.volume,
        spec,
    )?;
    res.value[0] *= mode.density;
    res.error_bound *= mode.density;
    Ok(res)
}

/// Square membrane in the xy plane, thickness along z. ω₀ is an input.
pub fn membrane_mode(
    kind: MembraneKind,
    side: f64,
    thickness: f64,
    density: f64,
    omega0: f64,
) -> Result<ModeModel> {
    require(side > 0.0, "side", "must be positive")?;
    require(thickness > 0.0, "thickness", "must be positive")?;
    require(density > 0.0, "density", "must be positive")?;
    require(omega0 > 0.0, "omega0", "must be positive")?;
    let total = density * thickness * side * side;
    let (shape, mode_mass) = match kind {
        MembraneKind::ClampedDrum => (ModeShape::Drum { side }, total / 4.0),
        MembraneKind::TrampolineCom => (ModeShape::Trampoline, total),
    };
    Ok(ModeModel {
        omega0,
        mode_mass,
        density,
        shape,
        volume: Region::Box {
            lo: [0.0, 0.0, 0.0],
            hi: [side, side, thickness],
        },
    })
}

/// Ion above a biased membrane: g = αqU/(2d₀²ω₀√(mM)).
pub fn membrane_coupling(
    p: &Particle,
    bias_u: f64,
    d0: f64,
    omega0: f64,
    mode_mass: f64,
    alpha: f64,
) -> Result<f64> {
    require(d0 > 0.0, "d0", "must be positive")?;
    require(omega0 > 0.0, "omega0", "must be positive")?;
    require(mode_mass > 0.0, "mode_mass", "must be positive")?;
    require((0.5..=1.0).contains(&alpha), "alpha", "must lie in [0.5, 1]")?;
    Ok(alpha * p.abs_charge() * bias_u.abs()
        / (2.0 * d0 * d0 * omega0 * (p.mass * mode_mass).sqrt()))
}

/// Clamped-free beam along x. The section is replaced by an equal-area
/// square so the body is a box, x ∈ [0, l], y, z ∈ [-w/2, w/2].
pub fn cantilever_mode(
    length_l: f64,
    section: &BeamSection,
    youngs_e: f64,
    density: f64,
) -> Result<ModeModel> {
    require(length_l > 0.0, "length_l", "must be positive")?;
    require(youngs_e > 0.0, "youngs_e", "must be positive")?;
    require(density > 0.0, "density", "must be positive")?;
    let a = section.radius_a;
    let omega0 = (section.beta_factor * a * a * youngs_e / (density * length_l.powi(4))).sqrt();
    let w = section.area.sqrt();
    let mut mode = ModeModel {
        omega0,
        mode_mass: 0.0,
        density,
        shape: ModeShape::Cantilever { length: length_l },
        volume: Region::Box {
            lo: [0.0, -0.5 * w, -0.5 * w],
            hi: [length_l, 0.5 * w, 0.5 * w],
        },
    };
    // the shape depends on x only, so the volume integral is 1D
    mode.mode_mass = density * section.area * beam_profile_integral(length_l);
    Ok(mode)
}

/// ∫₀ˡ s(x)² dx by composite Gauss over 16 panels.
fn beam_profile_integral(length: f64) -> f64 {
    const X: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const W: [f64; 4] = [
        0.347_854_845_137_453_9,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
    ];
    let panels = 16;
    let h = length / panels as f64;
    let k = CANTILEVER_KL / length;
    let tip = cantilever_tip();
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for i in 0..4 {
            let s = cantilever_raw(k * (mid + 0.5 * h * X[i])).0 / tip;
            acc += W[i] * 0.5 * h * s * s;
        }
    }
    acc
}

/// Plano-convex disk geometry for a bulk acoustic resonator.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BvaGeometry {
    pub thickness_t: f64,
    pub curvature_r: f64,
    pub disk_radius_l: f64,
    pub overtone_n: u32,
}

/// Gaussian spot radius of overtone n on a disk with curved face of radius R.
pub fn bva_spot_size(thickness_t: f64, curvature_r: f64, overtone_n: u32) -> f64 {
    let n = overtone_n as f64;
    (curvature_r * thickness_t.powi(3) / (3.0 * n * n * PI * PI)).powf(0.25)
}

pub fn bva_mode(
    geom: &BvaGeometry,
    density: f64,
    sound_speed: f64,
    direction: [f64; 3],
) -> Result<ModeModel> {
    let BvaGeometry {
        thickness_t: t,
        curvature_r,
        disk_radius_l,
        overtone_n,
    } = *geom;
    require(
        overtone_n >= 3 && overtone_n % 2 == 1,
        "overtone_n",
        "must be odd and at least 3",
    )?;
    require(t > 0.0, "thickness_t", "must be positive")?;
    require(curvature_r > 10.0 * t, "curvature_r", "must be much larger than the thickness")?;
    require(disk_radius_l > 0.0, "disk_radius_l", "must be positive")?;
    require(density > 0.0, "density", "must be positive")?;
    require(sound_speed > 0.0, "sound_speed", "must be positive")?;
    let norm = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
    require(norm > 0.0 && norm.is_finite(), "direction", "must be a nonzero vector")?;
    let polarization = [direction[0] / norm, direction[1] / norm, direction[2] / norm];

    let sigma = bva_spot_size(t, curvature_r, overtone_n);
    let k = overtone_n as f64 * PI / t;
    let l2 = disk_radius_l * disk_radius_l;
    let mode_mass = density * PI * sigma * sigma * 0.5 * t * (1.0 - (-l2 / (sigma * sigma)).exp());
    Ok(ModeModel {
        omega0: sound_speed * k,
        mode_mass,
        density,
        shape: ModeShape::Bva {
            sigma,
            wavenumber: k,
            polarization,
        },
        volume: Region::CylinderY {
            radius: disk_radius_l,
            y_lo: -0.5 * t,
            y_hi: 0.5 * t,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physcore::{angular, hertz, particle_lookup};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn bva(n: u32) -> ModeModel {
        bva_mode(
            &BvaGeometry {
                thickness_t: 1.08e-3,
                curvature_r: 0.3,
                disk_radius_l: 6.5e-3,
                overtone_n: n,
            },
            2600.0,
            6757.0,
            [0.226, 0.968, 0.111],
        )
        .unwrap()
    }

    #[test]
    fn drum_and_trampoline_masses() {
        let d = membrane_mode(MembraneKind::ClampedDrum, 500e-6, 100e-9, 3100.0, 1.0).unwrap();
        assert!(rel(d.mode_mass, 0.25 * d.total_mass()) < 1e-15);
        assert!(rel(d.mode_mass, 19.375e-12) < 1e-12);
        let q = mode_mass(&d, &QuadratureSpec::with_tolerance(1e-8)).unwrap();
        assert!(rel(q.value[0], d.mode_mass) < 1e-6);

        let t = membrane_mode(MembraneKind::TrampolineCom, 100e-6, 100e-9, 3100.0, 1.0).unwrap();
        assert!(rel(t.mode_mass, t.total_mass()) < 1e-15);
        let q = mode_mass(&t, &QuadratureSpec::default()).unwrap();
        assert!(rel(q.value[0], t.total_mass()) < 1e-12);
    }

    #[test]
    fn membrane_couplings_near_quoted() {
        let be = particle_lookup("9Be+").unwrap();
        let w = angular(1e6);
        let d = membrane_mode(MembraneKind::ClampedDrum, 500e-6, 100e-9, 3100.0, w).unwrap();
        let g = hertz(membrane_coupling(&be, 1.0, 100e-6, w, d.mode_mass, 1.0).unwrap());
        // hand evaluation: 0.376 Hz
        assert!(rel(g, 0.3757) < 2e-3, "{g}");
        assert!(g / 0.24 < 3.0 && 0.24 / g < 3.0);

        let w = angular(140e3);
        let t = membrane_mode(MembraneKind::TrampolineCom, 100e-6, 100e-9, 3100.0, w).unwrap();
        let g = hertz(membrane_coupling(&be, 1.0, 100e-6, w, t.mode_mass, 1.0).unwrap());
        assert!(g / 12.0 < 3.0 && 12.0 / g < 3.0, "{g}");
        assert_eq!(membrane_coupling(&be, 0.0, 100e-6, w, t.mode_mass, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn drum_vanishes_on_edges() {
        let d = membrane_mode(MembraneKind::ClampedDrum, 1.0, 0.01, 1.0, 1.0).unwrap();
        for x in [0.0, 0.3, 0.7, 1.0] {
            assert!(d.displacement([x, 0.0, 0.0])[2].abs() < 1e-12);
            assert!(d.displacement([1.0, x, 0.0])[2].abs() < 1e-12);
        }
        assert!((d.displacement([0.5, 0.5, 0.0])[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cantilever_shape_and_mass() {
        let sec = BeamSection::new(SectionShape::Hexagonal, 347e-9).unwrap();
        let m = cantilever_mode(15e-6, &sec, 3e11, 6.15e4).unwrap();
        assert!((m.displacement([15e-6, 0.0, 0.0])[2] - 1.0).abs() < 1e-12);
        assert_eq!(m.displacement([0.0, 0.0, 0.0])[2], 0.0);
        let ratio = m.mode_mass / m.total_mass();
        assert!((ratio - 0.25).abs() < 0.005, "{ratio}");
        // independent oracle: adaptive cubature over the box
        let q = mode_mass(&m, &QuadratureSpec::with_tolerance(1e-9)).unwrap();
        assert!(rel(q.value[0], m.mode_mass) < 1e-8);
        assert!(rel(hertz(m.omega0), 868e3) < 0.2, "{}", hertz(m.omega0));
        // physical density with a smaller radius gives the same frequency
        let sec2 = BeamSection::new(SectionShape::Hexagonal, 110e-9).unwrap();
        let m2 = cantilever_mode(15e-6, &sec2, 3e11, 6.15e3).unwrap();
        assert!(rel(hertz(m2.omega0), 868e3) < 0.2, "{}", hertz(m2.omega0));
    }

    #[test]
    fn cantilever_root_is_exact() {
        let x = CANTILEVER_KL;
        assert!((1.0 + x.cos() * x.cosh()).abs() < 1e-13);
        // clamped end has zero slope, free end zero curvature
        let m = cantilever_mode(1.0, &BeamSection::new(SectionShape::Circular, 0.01).unwrap(), 1.0, 1.0)
            .unwrap();
        assert!(m.displacement_gradient([0.0, 0.0, 0.0])[0][2].abs() < 1e-12);
    }

    #[test]
    fn bva_reference_values() {
        let m = bva(3);
        assert!(rel(hertz(m.omega0), 9.4e6) < 0.01, "{}", hertz(m.omega0));
        let sigma = m.spot_size().unwrap();
        assert!(rel(sigma, 1.0913e-3) < 1e-3, "{sigma}");
        assert!(rel(m.mode_mass, 5.2527e-6) < 1e-3, "{}", m.mode_mass);
        assert!(m.mode_mass > 1e-6 && m.mode_mass < 1e-5);
        // antinode on the face, unit amplitude
        let s = m.displacement([0.0, 0.54e-3, 0.0]);
        assert!(((s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bva_mass_quadrature_matches_closed_form() {
        let m = bva(3);
        let q = mode_mass(&m, &QuadratureSpec::with_tolerance(1e-6)).unwrap();
        assert!(rel(q.value[0], m.mode_mass) < 1e-4, "{} {}", q.value[0], m.mode_mass);
    }

    #[test]
    fn bva_rejects_even_overtones() {
        let g = BvaGeometry {
            thickness_t: 1e-3,
            curvature_r: 0.3,
            disk_radius_l: 5e-3,
            overtone_n: 4,
        };
        assert!(bva_mode(&g, 2600.0, 6757.0, [0.0, 1.0, 0.0]).is_err());
        let g1 = BvaGeometry { overtone_n: 1, ..g };
        assert!(bva_mode(&g1, 2600.0, 6757.0, [0.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn strain_matches_finite_difference() {
        let m = bva(5);
        let r = [0.3e-3, 0.1e-3, -0.2e-3];
        let g = m.displacement_gradient(r);
        let h = 1e-9;
        for j in 0..3 {
            let mut a = r;
            let mut b = r;
            a[j] += h;
            b[j] -= h;
            let (sa, sb) = (m.displacement(a), m.displacement(b));
            for k in 0..3 {
                let fd = (sa[k] - sb[k]) / (2.0 * h);
                assert!((fd - g[j][k]).abs() < 1e-5 * (1.0 + g[j][k].abs()) * 1e3);
            }
        }
    }

    proptest! {
        #[test]
        fn bva_scalings(n in prop::sample::select(alloc::vec![3u32, 5, 7, 9, 11, 13])) {
            let m3 = bva(3);
            let m = bva(n);
            let r = n as f64 / 3.0;
            prop_assert!(rel(m.omega0 / m3.omega0, r) < 1e-12);
            prop_assert!(rel(m.spot_size().unwrap() / m3.spot_size().unwrap(), r.powf(-0.5)) < 1e-12);
            prop_assert!(m.mode_mass <= m.total_mass());
        }

        #[test]
        fn cantilever_frequency_quarter_on_doubling(l in 1e-6f64..1e-3, a in 1e-8f64..1e-6) {
            let sec = BeamSection::new(SectionShape::Hexagonal, a).unwrap();
            let m1 = cantilever_mode(l, &sec, 3e11, 6150.0).unwrap();
            let m2 = cantilever_mode(2.0 * l, &sec, 3e11, 6150.0).unwrap();
            prop_assert!(rel(m2.omega0 / m1.omega0, 0.25) < 1e-12);
            prop_assert!(m1.mode_mass <= m1.total_mass());
        }

        #[test]
        fn shapes_bounded(x in 0.0f64..1.0, y in -0.5f64..0.5, z in -0.5f64..0.5) {
            let m = bva(7);
            let t = 1.08e-3;
            let s = m.displacement([x * 6.5e-3, y * t, z * 6.5e-3]);
            prop_assert!(s.iter().all(|c| c.is_finite()));
            prop_assert!(s.iter().map(|c| c * c).sum::<f64>() <= 1.0 + 1e-12);
            let sec = BeamSection::new(SectionShape::Hexagonal, 1e-7).unwrap();
            let c = cantilever_mode(1e-5, &sec, 3e11, 6150.0).unwrap();
            let v = c.displacement([x * 1e-5, 0.0, 0.0])[2];
            prop_assert!(v.abs() <= 1.0 + 1e-12);
        }
    }
}
