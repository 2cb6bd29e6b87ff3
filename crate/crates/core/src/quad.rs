//! Adaptive cubature over boxes and cylinders for vector-valued integrands.
//!
//! Each cell carries an order-4 tensor Gauss estimate; the difference to an
//! order-3 estimate on the same cell is its error. The worst cell is split
//! into eight until the summed error falls under tolerance.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{require, Error, Result};

const G3_X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const G3_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
const G4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const G4_W: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum QuadRule {
    /// Uniform grid of order-4 Gauss cells, `cells_per_axis` along each side.
    TensorGauss { cells_per_axis: usize },
    /// Error-driven octree refinement.
    AdaptiveSubdivision,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub max_subdivisions: usize,
    pub rule: QuadRule,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            relative_tolerance: 1e-4,
            absolute_tolerance: 0.0,
            max_subdivisions: 200_000,
            rule: QuadRule::AdaptiveSubdivision,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(rel: f64) -> Self {
        QuadratureSpec {
            relative_tolerance: rel,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    /// Summed per-cell error estimate (Euclidean norm over components).
    pub error_bound: f64,
    pub cells: usize,
}

/// Integration domain in physical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Region {
    Box { lo: [f64; 3], hi: [f64; 3] },
    /// Solid cylinder around the y axis, centred on x = z = 0.
    CylinderY { radius: f64, y_lo: f64, y_hi: f64 },
}

impl Region {
    pub fn volume(&self) -> f64 {
        match *self {
            Region::Box { lo, hi } => (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]),
            Region::CylinderY {
                radius,
                y_lo,
                y_hi,
            } => PI * radius * radius * (y_hi - y_lo),
        }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        match *self {
            Region::Box { lo, hi } => (0..3).all(|i| p[i] >= lo[i] && p[i] <= hi[i]),
            Region::CylinderY {
                radius,
                y_lo,
                y_hi,
            } => p[0] * p[0] + p[2] * p[2] <= radius * radius && p[1] >= y_lo && p[1] <= y_hi,
        }
    }

    /// Point of the region closest to `p`.
    pub fn closest_point(&self, p: [f64; 3]) -> [f64; 3] {
        match *self {
            Region::Box { lo, hi } => [
                p[0].clamp(lo[0], hi[0]),
                p[1].clamp(lo[1], hi[1]),
                p[2].clamp(lo[2], hi[2]),
            ],
            Region::CylinderY {
                radius,
                y_lo,
                y_hi,
            } => {
                let r = (p[0] * p[0] + p[2] * p[2]).sqrt();
                let s = if r > radius { radius / r } else { 1.0 };
                [p[0] * s, p[1].clamp(y_lo, y_hi), p[2] * s]
            }
        }
    }

    /// Parametric box and the map from it to physical space with Jacobian.
    fn parametric(&self) -> ([f64; 3], [f64; 3]) {
        match *self {
            Region::Box { lo, hi } => (lo, hi),
            Region::CylinderY {
                radius,
                y_lo,
                y_hi,
            } => ([0.0, 0.0, y_lo], [radius, 2.0 * PI, y_hi]),
        }
    }

    fn map(&self, u: [f64; 3]) -> ([f64; 3], f64) {
        match self {
            Region::Box { .. } => (u, 1.0),
            Region::CylinderY { .. } => {
                let (s, c) = u[1].sin_cos();
                ([u[0] * c, u[2], u[0] * s], u[0])
            }
        }
    }
}

struct Cell<const N: usize> {
    lo: [f64; 3],
    hi: [f64; 3],
    value: [f64; N],
    err: f64,
}

impl<const N: usize> PartialEq for Cell<N> {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Cell<N> {}
impl<const N: usize> PartialOrd for Cell<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Cell<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn norm<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rule<const N: usize, const K: usize, F>(
    f: &mut F,
    region: &Region,
    lo: [f64; 3],
    hi: [f64; 3],
    xs: &[f64; K],
    ws: &[f64; K],
) -> [f64; N]
where
    F: FnMut([f64; 3]) -> [f64; N],
{
    let half = [
        0.5 * (hi[0] - lo[0]),
        0.5 * (hi[1] - lo[1]),
        0.5 * (hi[2] - lo[2]),
    ];
    let mid = [
        0.5 * (hi[0] + lo[0]),
        0.5 * (hi[1] + lo[1]),
        0.5 * (hi[2] + lo[2]),
    ];
    let mut acc = [0.0; N];
    for i in 0..K {
        for j in 0..K {
            for k in 0..K {
                let u = [
                    mid[0] + half[0] * xs[i],
                    mid[1] + half[1] * xs[j],
                    mid[2] + half[2] * xs[k],
                ];
                let (x, jac) = region.map(u);
                let w = ws[i] * ws[j] * ws[k] * jac;
                let v = f(x);
                for n in 0..N {
                    acc[n] += w * v[n];
                }
            }
        }
    }
    let vol = half[0] * half[1] * half[2];
    for a in acc.iter_mut() {
        *a *= vol;
    }
    acc
}

fn make_cell<const N: usize, F>(f: &mut F, region: &Region, lo: [f64; 3], hi: [f64; 3]) -> Cell<N>
where
    F: FnMut([f64; 3]) -> [f64; N],
{
    let v4 = rule(f, region, lo, hi, &G4_X, &G4_W);
    let v3 = rule(f, region, lo, hi, &G3_X, &G3_W);
    let mut d = [0.0; N];
    for n in 0..N {
        d[n] = v4[n] - v3[n];
    }
    Cell {
        lo,
        hi,
        value: v4,
        err: norm(&d),
    }
}

/// Integrates `f` over `region`. `f` receives physical coordinates.
pub fn integrate<const N: usize, F>(
    mut f: F,
    region: &Region,
    spec: &QuadratureSpec,
) -> Result<QuadResult<N>>
where
    F: FnMut([f64; 3]) -> [f64; N],
{
    require(
        spec.relative_tolerance > 0.0 && spec.relative_tolerance < 1.0,
        "relative_tolerance",
        "must lie in (0, 1)",
    )?;
    let (lo, hi) = region.parametric();
    match spec.rule {
        QuadRule::TensorGauss { cells_per_axis } => {
            require(cells_per_axis > 0, "cells_per_axis", "must be positive")?;
            let n = cells_per_axis;
            let mut value = [0.0; N];
            let mut err = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let idx = [i, j, k];
                        let mut clo = [0.0; 3];
                        let mut chi = [0.0; 3];
                        for a in 0..3 {
                            let h = (hi[a] - lo[a]) / n as f64;
                            clo[a] = lo[a] + h * idx[a] as f64;
                            chi[a] = clo[a] + h;
                        }
                        let c: Cell<N> = make_cell(&mut f, region, clo, chi);
                        for m in 0..N {
                            value[m] += c.value[m];
                        }
                        err += c.err;
                    }
                }
            }
            Ok(QuadResult {
                value,
                error_bound: err,
                cells: n * n * n,
            })
        }
        QuadRule::AdaptiveSubdivision => adaptive(&mut f, region, lo, hi, spec),
    }
}

fn adaptive<const N: usize, F>(
    f: &mut F,
    region: &Region,
    lo: [f64; 3],
    hi: [f64; 3],
    spec: &QuadratureSpec,
) -> Result<QuadResult<N>>
where
    F: FnMut([f64; 3]) -> [f64; N],
{
    let mut heap = BinaryHeap::new();
    let root: Cell<N> = make_cell(f, region, lo, hi);
    let mut total = root.value;
    let mut total_err = root.err;
    heap.push(root);
    let mut splits = 0usize;
    loop {
        let target = spec
            .absolute_tolerance
            .max(spec.relative_tolerance * norm(&total));
        if total_err <= target {
            break;
        }
        if splits >= spec.max_subdivisions {
            let (value, err) = resum(heap.into_vec());
            return Err(Error::Convergence {
                estimate: norm(&value),
                error_bound: err,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        for n in 0..N {
            total[n] -= worst.value[n];
        }
        total_err -= worst.err;
        let mid = [
            0.5 * (worst.lo[0] + worst.hi[0]),
            0.5 * (worst.lo[1] + worst.hi[1]),
            0.5 * (worst.lo[2] + worst.hi[2]),
        ];
        for octant in 0..8 {
            let mut clo = worst.lo;
            let mut chi = worst.hi;
            for a in 0..3 {
                if octant & (1 << a) == 0 {
                    chi[a] = mid[a];
                } else {
                    clo[a] = mid[a];
                }
            }
            let c = make_cell(f, region, clo, chi);
            for n in 0..N {
                total[n] += c.value[n];
            }
            total_err += c.err;
            heap.push(c);
        }
        splits += 1;
        // running sums drift; rebuild them now and then
        if splits % 4096 == 0 {
            let cells: Vec<Cell<N>> = heap.into_vec();
            let (v, e) = resum_ref(&cells);
            total = v;
            total_err = e;
            heap = BinaryHeap::from(cells);
        }
    }
    let cells = heap.len();
    let (value, err) = resum(heap.into_vec());
    Ok(QuadResult {
        value,
        error_bound: err,
        cells,
    })
}

fn resum_ref<const N: usize>(cells: &[Cell<N>]) -> ([f64; N], f64) {
    // pairwise summation keeps the result insensitive to cell count
    fn pairwise<const N: usize>(cells: &[Cell<N>]) -> ([f64; N], f64) {
        if cells.len() <= 8 {
            let mut v = [0.0; N];
            let mut e = 0.0;
            for c in cells {
                for n in 0..N {
                    v[n] += c.value[n];
                }
                e += c.err;
            }
            return (v, e);
        }
        let (a, b) = cells.split_at(cells.len() / 2);
        let (va, ea) = pairwise(a);
        let (vb, eb) = pairwise(b);
        let mut v = [0.0; N];
        for n in 0..N {
            v[n] = va[n] + vb[n];
        }
        (v, ea + eb)
    }
    pairwise(cells)
}

fn resum<const N: usize>(cells: Vec<Cell<N>>) -> ([f64; N], f64) {
    resum_ref(&cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        // order-4 Gauss integrates degree 7 per axis exactly
        let r = Region::Box {
            lo: [0.0, -1.0, 2.0],
            hi: [1.0, 2.0, 3.0],
        };
        let res = integrate(
            |p| [p[0].powi(3) * p[1] * p[1] + p[2]],
            &r,
            &QuadratureSpec::default(),
        )
        .unwrap();
        // ∫x³ = 1/4, ∫y² over [-1,2] = 3, area factors by hand
        let exact = 0.25 * 3.0 * 1.0 + 2.5 * 3.0;
        assert!((res.value[0] - exact).abs() < 1e-12);
    }

    #[test]
    fn cylinder_volume_and_moment() {
        let r = Region::CylinderY {
            radius: 2.0,
            y_lo: -0.5,
            y_hi: 1.0,
        };
        let res = integrate(
            |p| [1.0, p[0] * p[0] + p[2] * p[2]],
            &r,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((res.value[0] - r.volume()).abs() < 1e-10);
        // ∫ρ² dV = 2π·1.5·R⁴/4
        assert!((res.value[1] - 2.0 * PI * 1.5 * 4.0).abs() < 1e-9);
    }

    #[test]
    fn near_singular_point_source() {
        // z-field of a unit charge a height h above the slab [-1,1]²×[-1,0];
        // the z integral is exact, leaving a 2D integral done offline with
        // scipy dblquad at 1e-13
        let h = 1e-3;
        let r = Region::Box {
            lo: [-1.0, -1.0, -1.0],
            hi: [1.0, 1.0, 0.0],
        };
        let res = integrate(
            |x| {
                let d = [x[0], x[1], x[2] - h];
                let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                [-d[2] / (r2 * r2.sqrt())]
            },
            &r,
            &QuadratureSpec::with_tolerance(1e-6),
        )
        .unwrap();
        let oracle = 3.873_365_094_884_523;
        assert!((res.value[0] - oracle).abs() / oracle < 1e-5, "{}", res.value[0]);
    }

    #[test]
    fn tensor_rule_matches_adaptive_on_smooth() {
        let r = Region::Box {
            lo: [0.0; 3],
            hi: [1.0; 3],
        };
        let f = |p: [f64; 3]| [(p[0] + 2.0 * p[1] - p[2]).exp()];
        let a = integrate(f, &r, &QuadratureSpec::with_tolerance(1e-10)).unwrap();
        let t = integrate(
            f,
            &r,
            &QuadratureSpec {
                rule: QuadRule::TensorGauss { cells_per_axis: 4 },
                ..Default::default()
            },
        )
        .unwrap();
        let e1 = core::f64::consts::E - 1.0;
        let exact = e1 * (e1 * (e1 + 2.0) / 2.0) * (1.0 - (-1.0f64).exp());
        assert!((a.value[0] - exact).abs() / exact < 1e-9);
        assert!((t.value[0] - exact).abs() / exact < 1e-8);
    }

    #[test]
    fn reports_non_convergence() {
        let r = Region::Box {
            lo: [0.0; 3],
            hi: [1.0; 3],
        };
        let spec = QuadratureSpec {
            relative_tolerance: 1e-12,
            max_subdivisions: 3,
            ..Default::default()
        };
        let out = integrate(|p| [1.0 / (p[0] + 1e-9).sqrt()], &r, &spec);
        assert!(matches!(out, Err(Error::Convergence { .. })));
    }

    #[test]
    fn closest_point_on_regions() {
        let c = Region::CylinderY {
            radius: 1.0,
            y_lo: 0.0,
            y_hi: 1.0,
        };
        assert_eq!(c.closest_point([0.0, 2.0, 0.0]), [0.0, 1.0, 0.0]);
        let q = c.closest_point([3.0, 0.5, 4.0]);
        assert!((q[0] - 0.6).abs() < 1e-15 && (q[2] - 0.8).abs() < 1e-15);
        assert!(c.contains([0.5, 0.5, 0.5]));
        assert!(!c.contains([0.9, 0.5, 0.9]));
    }
}
