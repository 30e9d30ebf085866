//! Closed convex plane curves (`n = 1`) under `∂_t X = −f(κ) ν`.
//!
//! Only used to validate the time integrator against the one-dimensional
//! circle oracle; `γ ≡ 1` here, so the pinching machinery is vacuous.

use crate::error::{Error, Result};
use crate::speed::SpeedParams;

/// Counter-clockwise polygon approximating a closed convex curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCurve {
    x: Vec<f64>,
    y: Vec<f64>,
    pub time: f64,
}

impl ClosedCurve {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 5 {
            return Err(Error::Degenerate(
                "a closed curve needs at least 5 matching coordinates".into(),
            ));
        }
        Ok(Self { x, y, time: 0.0 })
    }

    pub fn ellipse(a: f64, b: f64, nodes: usize) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Domain(format!(
                "semi-axes must be positive, got {a}, {b}"
            )));
        }
        let (x, y) = (0..nodes)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / nodes as f64;
                (a * t.cos(), b * t.sin())
            })
            .unzip();
        Self::new(x, y)
    }

    pub fn circle(r: f64, nodes: usize) -> Result<Self> {
        Self::ellipse(r, r, nodes)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn nb(&self, i: usize, d: isize) -> (f64, f64) {
        let n = self.len() as isize;
        let j = (i as isize + d).rem_euclid(n) as usize;
        (self.x[j], self.y[j])
    }

    /// Menger curvature, circumscribed-circle tangent and `min` chord.
    pub fn curvature(&self) -> Result<(Vec<f64>, Vec<(f64, f64)>, f64)> {
        let n = self.len();
        let mut kappa = Vec::with_capacity(n);
        let mut tangent = Vec::with_capacity(n);
        let mut ds_min = f64::INFINITY;
        for i in 0..n {
            let (xm, ym) = self.nb(i, -1);
            let (xp, yp) = self.nb(i, 1);
            let a = (self.x[i] - xm, self.y[i] - ym);
            let b = (xp - self.x[i], yp - self.y[i]);
            let la = a.0.hypot(a.1);
            let lb = b.0.hypot(b.1);
            if !(la > 0.0 && lb > 0.0) {
                return Err(Error::Degenerate(format!("repeated node at {i}")));
            }
            ds_min = ds_min.min(la);
            let cross = a.0 * b.1 - a.1 * b.0;
            let k = 2.0 * cross / (la * lb * (a.0 + b.0).hypot(a.1 + b.1));
            if !(k > 0.0) {
                return Err(Error::ConvexityLost {
                    node: i,
                    t: self.time,
                    lambda1: k,
                    lambda2: k,
                });
            }
            kappa.push(k);
            let tx = a.0 * lb / la + b.0 * la / lb;
            let ty = a.1 * lb / la + b.1 * la / lb;
            let tn = tx.hypot(ty);
            tangent.push((tx / tn, ty / tn));
        }
        Ok((kappa, tangent, ds_min))
    }

    fn displaced(&self, v: &[(f64, f64)], dt: f64) -> Self {
        Self {
            x: self.x.iter().zip(v).map(|(x, v)| x + dt * v.0).collect(),
            y: self.y.iter().zip(v).map(|(y, v)| y + dt * v.1).collect(),
            time: self.time + dt,
        }
    }

    fn velocity(&self, sp: &SpeedParams) -> Result<(Vec<(f64, f64)>, f64, f64)> {
        let (k, t, ds) = self.curvature()?;
        let fp = k.iter().map(|&k| sp.values(k).fp).fold(0.0, f64::max);
        let v = k
            .iter()
            .zip(&t)
            .map(|(&k, &(tx, ty))| {
                let f = sp.values(k).f;
                (-f * ty, f * tx)
            })
            .collect();
        Ok((v, ds, fp))
    }

    /// One midpoint step at `min(cfl Δs²/max f', dt_cap)`.
    pub fn step(&self, sp: &SpeedParams, cfl: f64, dt_cap: f64) -> Result<Self> {
        let (v1, ds, fp) = self.velocity(sp)?;
        let dt = (cfl * ds * ds / fp).min(dt_cap);
        let half = self.displaced(&v1, 0.5 * dt);
        let (v2, _, _) = half.velocity(sp)?;
        Ok(self.displaced(&v2, dt))
    }

    pub fn run_to(&self, sp: &SpeedParams, t_end: f64, cfl: f64) -> Result<Self> {
        let mut c = self.clone();
        while c.time < t_end {
            c = c.step(sp, cfl, t_end - c.time)?;
        }
        Ok(c)
    }

    /// Mean distance to the centroid of the nodes.
    pub fn mean_radius(&self) -> f64 {
        let n = self.len() as f64;
        let cx = self.x.iter().sum::<f64>() / n;
        let cy = self.y.iter().sum::<f64>() / n;
        self.x
            .iter()
            .zip(&self.y)
            .map(|(x, y)| (x - cx).hypot(y - cy))
            .sum::<f64>()
            / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{solve_sphere, RadiusHistory};

    #[test]
    fn circle_matches_one_dimensional_oracle() {
        for &a in &[0.0, 1.0] {
            let sp = SpeedParams::with_alpha(a).unwrap();
            let sol = solve_sphere(1.0, 1, sp, 1e-11).unwrap();
            let t = 0.8 * sol.t_blowup;
            let c = ClosedCurve::circle(1.0, 128)
                .unwrap()
                .run_to(&sp, t, 0.2)
                .unwrap();
            let r = sol.radius(t).unwrap();
            assert!((c.mean_radius() / r - 1.0).abs() < 1e-4, "alpha={a}");
        }
    }

    #[test]
    fn ellipse_stays_convex() {
        let sp = SpeedParams::with_alpha(1.0).unwrap();
        let c = ClosedCurve::ellipse(1.0, 0.6, 96)
            .unwrap()
            .run_to(&sp, 0.05, 0.2)
            .unwrap();
        assert!(c.curvature().is_ok());
    }
}
