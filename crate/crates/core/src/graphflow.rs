//! The flow written as a scalar equation for a graph `u` over a planar
//! disc, stepped explicitly with Dirichlet data from a shrinking sphere cap.
//!
//! With `W = √(1 + |Du|²)` and `g^{ij} = δ_{ij} − u_i u_j / W²` the upward
//! unit normal gives `H = −g^{ij}u_{ij}/W`, and the height obeys
//! `∂_t u = −W f(H)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::RadiusHistory;
use crate::speed::SpeedParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Outside,
    /// Inside the disc with a neighbour outside; takes exact values.
    Ring,
    Interior,
}

/// Second-order jet of a height function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphJet {
    pub ux: f64,
    pub uy: f64,
    pub uxx: f64,
    pub uxy: f64,
    pub uyy: f64,
}

impl GraphJet {
    pub fn w(&self) -> f64 {
        (1.0 + self.ux * self.ux + self.uy * self.uy).sqrt()
    }

    /// `−div(Du / W)` expanded by the product rule.
    pub fn h_divergence(&self) -> f64 {
        let w = self.w();
        let w3 = w * w * w;
        let dx = self.uxx / w - self.ux * (self.ux * self.uxx + self.uy * self.uxy) / w3;
        let dy = self.uyy / w - self.uy * (self.ux * self.uxy + self.uy * self.uyy) / w3;
        -(dx + dy)
    }

    /// `−(Δu − Du·D²u·Du / W²) / W`.
    pub fn h_expanded(&self) -> f64 {
        let w = self.w();
        let lap = self.uxx + self.uyy;
        let quad = self.ux * self.ux * self.uxx
            + 2.0 * self.ux * self.uy * self.uxy
            + self.uy * self.uy * self.uyy;
        -(lap - quad / (w * w)) / w
    }

    /// `−g^{ij} u_{ij} / W`.
    pub fn h_metric(&self) -> f64 {
        let w = self.w();
        let w2 = w * w;
        let g11 = 1.0 - self.ux * self.ux / w2;
        let g12 = -self.ux * self.uy / w2;
        let g22 = 1.0 - self.uy * self.uy / w2;
        -(g11 * self.uxx + 2.0 * g12 * self.uxy + g22 * self.uyy) / w
    }
}

#[derive(Debug, Clone)]
pub struct GraphPatch {
    pub h: f64,
    /// Grid points per side, `2m + 1`.
    pub side: usize,
    pub radius: f64,
    pub u: Vec<f64>,
    pub kind: Vec<NodeKind>,
    pub time: f64,
}

impl GraphPatch {
    /// Disc of radius `0.5 r(0)` on a grid of spacing `h`, filled with the
    /// exact cap.
    pub fn sphere_cap(h: f64, source: &dyn RadiusHistory) -> Result<Self> {
        let r0 = source.radius(0.0)?;
        let radius = 0.5 * r0;
        if !(h > 0.0 && h < radius) {
            return Err(Error::Domain(format!(
                "grid spacing {h} must lie in (0, {radius})"
            )));
        }
        let m = (radius / h).floor() as usize;
        let side = 2 * m + 1;
        let inside = |i: isize, j: isize| -> bool {
            if i < 0 || j < 0 || i >= side as isize || j >= side as isize {
                return false;
            }
            let (x, y) = ((i - m as isize) as f64 * h, (j - m as isize) as f64 * h);
            x * x + y * y <= radius * radius * (1.0 + 1e-12)
        };
        let mut kind = vec![NodeKind::Outside; side * side];
        for j in 0..side as isize {
            for i in 0..side as isize {
                if !inside(i, j) {
                    continue;
                }
                let all = (-1..=1).all(|dj| (-1..=1).all(|di| inside(i + di, j + dj)));
                kind[j as usize * side + i as usize] = if all {
                    NodeKind::Interior
                } else {
                    NodeKind::Ring
                };
            }
        }
        let mut p = Self {
            h,
            side,
            radius,
            u: vec![0.0; side * side],
            kind,
            time: 0.0,
        };
        p.u = p.exact(r0)?;
        Ok(p)
    }

    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        let m = (self.side / 2) as f64;
        ((i as f64 - m) * self.h, (j as f64 - m) * self.h)
    }

    /// `√(r² − |p|²)` on every node inside the disc, zero outside.
    pub fn exact(&self, r: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.u.len()];
        for j in 0..self.side {
            for i in 0..self.side {
                let idx = j * self.side + i;
                if self.kind[idx] == NodeKind::Outside {
                    continue;
                }
                let (x, y) = self.point(i, j);
                let q = r * r - x * x - y * y;
                if !(q > 0.0) {
                    return Err(Error::Domain(format!(
                        "sphere of radius {r} no longer covers the patch at ({x}, {y})"
                    )));
                }
                out[idx] = q.sqrt();
            }
        }
        Ok(out)
    }

    /// Centred-difference jet at an interior node.
    pub fn jet(&self, i: usize, j: usize) -> GraphJet {
        let s = self.side;
        let u = |a: usize, b: usize| self.u[b * s + a];
        let h = self.h;
        GraphJet {
            ux: (u(i + 1, j) - u(i - 1, j)) / (2.0 * h),
            uy: (u(i, j + 1) - u(i, j - 1)) / (2.0 * h),
            uxx: (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) / (h * h),
            uyy: (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) / (h * h),
            uxy: (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) + u(i - 1, j - 1))
                / (4.0 * h * h),
        }
    }

    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.side)
            .flat_map(move |j| (0..self.side).map(move |i| (i, j)))
            .filter(move |&(i, j)| self.kind[j * self.side + i] == NodeKind::Interior)
    }

    /// Interior mean curvatures, failing on the first nonpositive one.
    pub fn mean_curvatures(&self) -> Result<Vec<((usize, usize), GraphJet, f64)>> {
        self.interior()
            .map(|(i, j)| {
                let jet = self.jet(i, j);
                let hm = jet.h_metric();
                if !(hm > 0.0) {
                    return Err(Error::NonParabolic { i, j, h: hm });
                }
                Ok(((i, j), jet, hm))
            })
            .collect()
    }

    /// Grid step limit `cfl · h² / max f'(H)`.
    pub fn stable_dt(&self, sp: &SpeedParams, cfl: f64) -> Result<f64> {
        let fp = self
            .mean_curvatures()?
            .iter()
            .map(|(_, _, h)| sp.values(*h).fp)
            .fold(0.0, f64::max);
        Ok(cfl * self.h * self.h / fp)
    }

    /// `(x, y, u)` rows for every node inside the disc.
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for j in 0..self.side {
            for i in 0..self.side {
                if self.kind[j * self.side + i] != NodeKind::Outside {
                    let (x, y) = self.point(i, j);
                    out.push((x, y, self.u[j * self.side + i]));
                }
            }
        }
        out
    }
}

/// `u ← u − dt W f(H)` on interior nodes, ring nodes reset to the exact cap
/// at `t + dt`.
pub fn graph_step(
    patch: &GraphPatch,
    sp: &SpeedParams,
    dt: f64,
    source: &dyn RadiusHistory,
) -> Result<GraphPatch> {
    let curv = patch.mean_curvatures()?;
    let mut next = patch.clone();
    next.time = patch.time + dt;
    for ((i, j), jet, h) in curv {
        next.u[j * patch.side + i] -= dt * jet.w() * sp.values(h).f;
    }
    let exact = patch.exact(source.radius(next.time)?)?;
    for (idx, k) in patch.kind.iter().enumerate() {
        if *k == NodeKind::Ring {
            next.u[idx] = exact[idx];
        }
    }
    Ok(next)
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphRun {
    pub h: f64,
    pub steps: usize,
    pub dt_max: f64,
    pub t_end: f64,
    /// Sup over time of the interior sup-norm error against the exact cap.
    pub max_error: f64,
    pub final_error: f64,
    /// Interior values never exceeded the parabolic-boundary maximum.
    pub max_principle_ok: bool,
    #[serde(skip)]
    pub patch: Option<GraphPatch>,
}

/// Runs from the exact cap to `t_end` with CFL-limited steps, the last one
/// shortened to land on `t_end`.
pub fn run_graph(
    h: f64,
    sp: &SpeedParams,
    source: &dyn RadiusHistory,
    t_end: f64,
    cfl: f64,
) -> Result<GraphRun> {
    let mut patch = GraphPatch::sphere_cap(h, source)?;
    let boundary_max = |p: &GraphPatch| {
        p.u.iter()
            .zip(&p.kind)
            .filter(|(_, k)| **k == NodeKind::Ring)
            .map(|(u, _)| *u)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut parabolic_max = patch.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut max_principle_ok = true;
    let mut max_error: f64 = 0.0;
    let mut final_error = 0.0;
    let mut dt_max: f64 = 0.0;
    let mut steps = 0;
    while patch.time < t_end {
        let dt = patch.stable_dt(sp, cfl)?.min(t_end - patch.time);
        dt_max = dt_max.max(dt);
        patch = graph_step(&patch, sp, dt, source)?;
        if t_end - patch.time < 1e-14 * t_end {
            patch.time = t_end;
        }
        steps += 1;
        parabolic_max = parabolic_max.max(boundary_max(&patch));
        let exact = patch.exact(source.radius(patch.time)?)?;
        let mut err: f64 = 0.0;
        for (i, j) in patch.interior() {
            let idx = j * patch.side + i;
            err = err.max((patch.u[idx] - exact[idx]).abs());
            if patch.u[idx] > parabolic_max {
                max_principle_ok = false;
            }
        }
        max_error = max_error.max(err);
        final_error = err;
    }
    Ok(GraphRun {
        h,
        steps,
        dt_max,
        t_end,
        max_error,
        final_error,
        max_principle_ok,
        patch: Some(patch),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::McfSphere;

    #[test]
    fn forms_agree_on_a_cap() {
        let j = GraphJet {
            ux: 0.3,
            uy: -0.2,
            uxx: -1.1,
            uxy: 0.05,
            uyy: -0.9,
        };
        let a = j.h_divergence();
        assert!((a - j.h_expanded()).abs() < 1e-14);
        assert!((a - j.h_metric()).abs() < 1e-14);
    }

    #[test]
    fn exact_cap_has_sphere_curvature() {
        let s = McfSphere { r0: 1.0, dim_n: 2 };
        let p = GraphPatch::sphere_cap(1.0 / 64.0, &s).unwrap();
        let curv = p.mean_curvatures().unwrap();
        for (_, _, h) in curv {
            assert!((h - 2.0).abs() < 1e-3);
        }
    }

    #[test]
    fn flat_patch_is_not_parabolic() {
        let s = McfSphere { r0: 1.0, dim_n: 2 };
        let mut p = GraphPatch::sphere_cap(1.0 / 16.0, &s).unwrap();
        p.u.iter_mut().for_each(|u| *u = 0.3);
        let sp = SpeedParams::with_alpha(1.0).unwrap();
        assert!(matches!(
            graph_step(&p, &sp, 1e-4, &s),
            Err(Error::NonParabolic { .. })
        ));
    }
}
