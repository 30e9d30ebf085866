//! Scalar reference solutions.
//!
//! A round sphere stays round under the flow, and its radius obeys
//! `dr/dt = −f(n/r)`. That ODE is integrated here with an adaptive
//! Dormand–Prince 5(4) pair to near-collapse and serves as ground truth for
//! the surface solver. The comparison function `ψ` and the integrated form of
//! `dH_max/dt ≤ H_max³ (ln Ĥ_max)^α` live here as well.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowTrace;
use crate::quad;
use crate::singularity::BlowupScale;
use crate::speed::SpeedParams;

/// Anything that can report the radius of a shrinking round sphere.
pub trait RadiusHistory {
    fn radius(&self, t: f64) -> Result<f64>;
}

/// Closed-form mean curvature flow sphere, `r² = r₀² − 2nt`.
#[derive(Debug, Clone, Copy)]
pub struct McfSphere {
    pub r0: f64,
    pub dim_n: u32,
}

impl McfSphere {
    pub fn blowup_time(&self) -> f64 {
        self.r0 * self.r0 / (2.0 * self.dim_n as f64)
    }
}

impl RadiusHistory for McfSphere {
    fn radius(&self, t: f64) -> Result<f64> {
        let r2 = self.r0 * self.r0 - 2.0 * self.dim_n as f64 * t;
        if r2 <= 0.0 {
            return Err(Error::Domain(format!("t = {t} is past the collapse time")));
        }
        Ok(r2.sqrt())
    }
}

/// Dense solution of `dr/dt = −f(n/r)`.
#[derive(Debug, Clone, Serialize)]
pub struct SphereSolution {
    pub r0: f64,
    pub dim_n: u32,
    #[serde(skip)]
    pub speed: SpeedParams,
    pub tol: f64,
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    #[serde(skip)]
    dr: Vec<f64>,
    #[serde(skip)]
    dense: Vec<f64>,
    pub t_blowup: f64,
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrates until `r <= 1e-6 r0`. The blowup time adds the remaining
/// collapse time `∫₀^{r_end} dr / f(n/r)` by quadrature.
pub fn solve_sphere(r0: f64, dim_n: u32, speed: SpeedParams, tol: f64) -> Result<SphereSolution> {
    if !(r0 > 0.0) || dim_n == 0 {
        return Err(Error::Domain(format!(
            "need r0 > 0 and n >= 1, got {r0}, {dim_n}"
        )));
    }
    let n = dim_n as f64;
    let rhs = |r: f64| -> Option<f64> {
        if r > 0.0 {
            Some(-speed.values(n / r).f)
        } else {
            None
        }
    };
    let r_stop = 1e-6 * r0;
    let mut t = 0.0;
    let mut r = r0;
    let mut k1 = rhs(r).unwrap();
    let mut ts = vec![t];
    let mut rs = vec![r];
    let mut drs = vec![k1];
    let mut dense = Vec::new();
    let mut h = 1e-3 * r0 * r0 / n;
    let mut err_prev: f64 = 1e-4;
    while r > r_stop {
        let mut k = [0.0; 7];
        k[0] = k1;
        let mut ok = true;
        for s in 1..7 {
            let y = r + h * (0..s).map(|j| A[s - 1][j] * k[j]).sum::<f64>();
            match rhs(y) {
                Some(v) => k[s] = v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            h *= 0.25;
            continue;
        }
        let r_new = r + h * (0..7).map(|j| B5[j] * k[j]).sum::<f64>();
        let err_abs = h * (0..7).map(|j| (B5[j] - B4[j]) * k[j]).sum::<f64>();
        let scale = tol * (1e-3 * r0 + r.abs().max(r_new.abs()));
        let err = (err_abs / scale).abs().max(1e-12);
        if err <= 1.0 && r_new > 0.0 {
            t += h;
            r = r_new;
            k1 = k[6];
            ts.push(t);
            rs.push(r);
            drs.push(k1);
            dense.push(h * (0..7).map(|j| D[j] * k[j]).sum::<f64>());
            let fac = 0.9 * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 5.0);
            err_prev = err;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
        if h < 1e-300 {
            return Err(Error::Domain("sphere ODE step underflow".into()));
        }
    }
    let r_end = r;
    let tail = quad::integrate(
        |x| {
            if x > 0.0 {
                1.0 / speed.values(n / x).f
            } else {
                0.0
            }
        },
        0.0,
        r_end,
        1e-30,
        1e-12,
    );
    Ok(SphereSolution {
        r0,
        dim_n,
        speed,
        tol,
        t: ts,
        r: rs,
        dr: drs,
        dense,
        t_blowup: t + tail.value,
    })
}

impl SphereSolution {
    pub fn t_end(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn mean_curvature_at(&self, t: f64) -> Result<f64> {
        Ok(self.dim_n as f64 / self.radius(t)?)
    }

    /// Dense output as `(t, r)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t.iter().copied().zip(self.r.iter().copied())
    }
}

impl RadiusHistory for SphereSolution {
    /// Fourth-order continuous extension of the Dormand–Prince pair.
    fn radius(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t > self.t_end() {
            return Err(Error::Domain(format!(
                "t = {t} outside the dense output [0, {}]",
                self.t_end()
            )));
        }
        let i = self
            .t
            .partition_point(|&x| x <= t)
            .saturating_sub(1)
            .min(self.t.len() - 2);
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        let (y0, y1) = (self.r[i], self.r[i + 1]);
        let c2 = y1 - y0;
        let c3 = h * self.dr[i] - c2;
        let c4 = c2 - h * self.dr[i + 1] - c3;
        Ok(y0 + s * (c2 + (1.0 - s) * (c3 + s * (c4 + (1.0 - s) * self.dense[i]))))
    }
}

/// Comparison solution `ψ(t) = (1/H_min(0)² − 2t/n)^{−1/2}`.
pub fn psi_bound(t: f64, h_min0: f64, dim_n: u32) -> Result<f64> {
    let n = dim_n as f64;
    let base = 1.0 / (h_min0 * h_min0) - 2.0 * t / n;
    if !(h_min0 > 0.0) || !(base > 0.0) {
        return Err(Error::Domain(format!(
            "psi bound undefined at t = {t} (blows up at {})",
            n / (2.0 * h_min0 * h_min0)
        )));
    }
    Ok(base.powf(-0.5))
}

/// Upper bound on the maximal existence time, `n / (2 H_min(0)²)`.
pub fn existence_time_bound(h_min0: f64, dim_n: u32) -> f64 {
    dim_n as f64 / (2.0 * h_min0 * h_min0)
}

/// Result of checking `J_α(v(s)) − J_α(v(t)) ≤ s − t` for all sampled
/// `t < s`.
#[derive(Debug, Clone, Serialize)]
pub struct VmaxReport {
    /// `max_{t<s} [J(v(s)) − J(v(t)) − (s − t)]`, clipped below at zero.
    pub max_violation: f64,
    /// Smallest slack `(s − t) − (J(v(s)) − J(v(t)))` over consecutive rows.
    pub min_consecutive_gap: f64,
    pub rows: usize,
    pub pass: bool,
}

/// `D(t) = J(v(t)) − t` must be nonincreasing; the all-pairs maximum is
/// found with a running minimum.
pub fn vmax_bound_check(trace: &FlowTrace, scale: &BlowupScale, tol: f64) -> Result<VmaxReport> {
    let rows = trace.rows();
    if let Some(w) = rows.windows(2).position(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Domain(format!(
            "trace times are not strictly increasing at row {}",
            w + 1
        )));
    }
    let d: Vec<f64> = rows
        .iter()
        .map(|row| scale.j_alpha(row.h_max).map(|j| j - row.t))
        .collect::<Result<_>>()?;
    let mut running_min = f64::INFINITY;
    let mut worst: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    for (i, &di) in d.iter().enumerate() {
        if i > 0 {
            worst = worst.max(di - running_min);
            min_gap = min_gap.min(d[i - 1] - di);
        }
        running_min = running_min.min(di);
    }
    Ok(VmaxReport {
        max_violation: worst,
        min_consecutive_gap: min_gap,
        rows: rows.len(),
        pass: worst <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mcf_sphere_closed_form() {
        let p = SpeedParams::with_alpha(0.0).unwrap();
        let sol = solve_sphere(1.0, 2, p, 1e-10).unwrap();
        assert!((sol.t_blowup - 0.25).abs() < 1e-9, "{}", sol.t_blowup);
        for &t in &[0.0, 0.05, 0.1, 0.2, 0.24] {
            let exact = (1.0_f64 - 4.0 * t).sqrt();
            assert!((sol.radius(t).unwrap() - exact).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn log_speed_sphere_self_consistent() {
        let p = SpeedParams::with_alpha(1.0).unwrap();
        let a = solve_sphere(1.0, 2, p, 1e-10).unwrap();
        let b = solve_sphere(1.0, 2, p, 5e-11).unwrap();
        assert!((a.t_blowup - b.t_blowup).abs() < 1e-9);
        assert!(a.t_blowup < 0.25);
        // independent route: T = ∫₀^{r0} dr / f(2/r)
        let q = quad::integrate(
            |r| {
                if r > 0.0 {
                    1.0 / p.values(2.0 / r).f
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
            1e-15,
            1e-13,
        );
        assert!(
            (a.t_blowup - q.value).abs() < 1e-9,
            "{} vs {}",
            a.t_blowup,
            q.value
        );
    }

    #[test]
    fn radius_is_decreasing() {
        let p = SpeedParams::with_alpha(2.0).unwrap();
        let sol = solve_sphere(1.5, 3, p, 1e-9).unwrap();
        assert!(sol.r.windows(2).all(|w| w[1] < w[0]));
        assert!(*sol.r.last().unwrap() <= 1.5e-6);
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi_bound(0.0, 3.0, 2).unwrap(), 3.0);
        let v = psi_bound(0.1, 2.0, 2).unwrap();
        assert!((v - 1.0 / 0.15f64.sqrt()).abs() < 1e-14);
        assert!((v - 2.5820).abs() < 1e-4);
        assert!(psi_bound(0.25, 2.0, 2).is_err());
        // α = 0 sphere saturates the comparison
        let s = McfSphere { r0: 1.0, dim_n: 2 };
        for &t in &[0.0, 0.1, 0.2] {
            let h = 2.0 / s.radius(t).unwrap();
            assert!((h - psi_bound(t, 2.0, 2).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn existence_bound_for_unit_sphere() {
        assert_eq!(existence_time_bound(2.0, 2), 0.25);
        let p = SpeedParams::with_alpha(1.0).unwrap();
        let sol = solve_sphere(1.0, 2, p, 1e-10).unwrap();
        assert!(sol.t_blowup <= 0.25);
    }
}
