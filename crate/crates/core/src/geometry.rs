//! Convex surfaces of revolution sampled along their generating profile, and
//! the curvature quantities computed from those samples.
//!
//! The profile runs from the south pole to the north pole in the `(ρ, z)`
//! half plane, so the outward normal is the tangent rotated clockwise. All
//! stencils use reflected ghost nodes across the axis: `ρ` is odd and `z` is
//! even in the arclength distance to either pole, which makes centred
//! stencils valid up to and including the poles.
//!
//! The meridian curvature is the signed Menger curvature of three
//! consecutive nodes and the tangent is the tangent of the same circumscribed
//! circle. Both are exact on circles for any spacing and second order on
//! smoothly graded meshes.

use crate::error::{Error, Result};
use crate::jet::{CurvatureJet, Scalar2, DIM, UMBILIC_GAMMA};

/// Exact round sphere of dimension `dim_n` in `R^{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereState {
    pub radius: f64,
    pub dim_n: u32,
}

impl SphereState {
    pub fn new(radius: f64, dim_n: u32) -> Result<Self> {
        if !(radius > 0.0) || dim_n == 0 {
            return Err(Error::Domain(format!(
                "sphere needs radius > 0 and n >= 1, got r = {radius}, n = {dim_n}"
            )));
        }
        Ok(Self { radius, dim_n })
    }

    pub fn mean_curvature(&self) -> f64 {
        self.dim_n as f64 / self.radius
    }

    pub fn gauss_curvature(&self) -> f64 {
        self.radius.powi(-(self.dim_n as i32))
    }

    pub fn gamma(&self) -> f64 {
        let n = self.dim_n as f64;
        n.powf(-n)
    }
}

/// Generating profile of a closed axisymmetric surface, pole to pole.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiSurface {
    rho: Vec<f64>,
    z: Vec<f64>,
    pub time: f64,
}

/// Per-node curvature data. Poles carry the umbilic limits: equal principal
/// curvatures, vanishing gradients, `Δu = 2u''` and `Y² = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    /// Cumulative chord length from the south pole.
    pub s: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub h: Vec<f64>,
    pub k: Vec<f64>,
    pub norm_a2: Vec<f64>,
    pub gamma: Vec<f64>,
    pub grad_h: Vec<f64>,
    pub lap_h: Vec<f64>,
    pub y2: Vec<f64>,
    /// Unit tangent `(t_ρ, t_z)`.
    pub tangent: Vec<(f64, f64)>,
    /// `ρ_s/ρ`, zero at the poles.
    pub conn: Vec<f64>,
    pub dl1: Vec<f64>,
    pub dl2: Vec<f64>,
    pub ddl1: Vec<f64>,
    pub ddl2: Vec<f64>,
    pub ds_min: f64,
    pub ds_max: f64,
}

impl CurvatureField {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Interior node indices (poles excluded).
    pub fn interior(&self) -> std::ops::Range<usize> {
        1..self.len() - 1
    }

    pub fn jet(&self, i: usize) -> CurvatureJet {
        debug_assert!(i > 0 && i + 1 < self.len());
        CurvatureJet {
            l1: self.lambda1[i],
            l2: self.lambda2[i],
            dl1: self.dl1[i],
            dl2: self.dl2[i],
            ddl1: self.ddl1[i],
            ddl2: self.ddl2[i],
            conn: self.conn[i],
        }
    }

    pub fn h_min(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        self.h.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First node attaining `H_max`.
    pub fn argmax_h(&self) -> usize {
        argmax(&self.h)
    }

    pub fn norm_a2_max(&self) -> f64 {
        self.norm_a2
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_convex(&self) -> bool {
        self.lambda1.iter().chain(&self.lambda2).all(|&l| l > 0.0)
    }

    /// Arclength derivatives at node `i` of a nodal field that is even about
    /// both poles.
    pub fn deriv(&self, u: &[f64], i: usize) -> Scalar2 {
        even_derivs(&self.s, u, i)
    }

    /// Surface Laplacian of an axisymmetric nodal field.
    pub fn laplacian(&self, u: &[f64], i: usize) -> f64 {
        let d = self.deriv(u, i);
        if i == 0 || i + 1 == self.len() {
            2.0 * d.dd
        } else {
            d.lap(self.conn[i])
        }
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Cumulative chord length of `s` extended by reflection past either end.
fn ghost_s(s: &[f64], i: isize) -> f64 {
    let n = s.len() as isize - 1;
    if i < 0 {
        -s[(-i) as usize]
    } else if i > n {
        2.0 * s[n as usize] - s[(2 * n - i) as usize]
    } else {
        s[i as usize]
    }
}

fn ghost_even(u: &[f64], i: isize) -> f64 {
    let n = u.len() as isize - 1;
    if i < 0 {
        u[(-i) as usize]
    } else if i > n {
        u[(2 * n - i) as usize]
    } else {
        u[i as usize]
    }
}

/// Three-point nonuniform first and second derivatives.
fn even_derivs(s: &[f64], u: &[f64], i: usize) -> Scalar2 {
    let ii = i as isize;
    let hm = ghost_s(s, ii) - ghost_s(s, ii - 1);
    let hp = ghost_s(s, ii + 1) - ghost_s(s, ii);
    let um = ghost_even(u, ii - 1);
    let u0 = u[i];
    let up = ghost_even(u, ii + 1);
    let denom = hm * hp * (hm + hp);
    Scalar2 {
        v: u0,
        d: (hm * hm * up - hp * hp * um + (hp * hp - hm * hm) * u0) / denom,
        dd: 2.0 * (hm * up - (hm + hp) * u0 + hp * um) / denom,
    }
}

impl AxiSurface {
    /// Validates and wraps a profile. Pole radii are snapped to exactly zero.
    pub fn new(mut rho: Vec<f64>, z: Vec<f64>, time: f64) -> Result<Self> {
        if rho.len() != z.len() {
            return Err(Error::Degenerate("rho and z lengths differ".into()));
        }
        if rho.len() < 5 {
            return Err(Error::Degenerate(format!(
                "profile needs at least 5 nodes, got {}",
                rho.len()
            )));
        }
        let last = rho.len() - 1;
        if rho[0].abs() > 1e-12 || rho[last].abs() > 1e-12 {
            return Err(Error::Degenerate(
                "profile must start and end on the axis".into(),
            ));
        }
        rho[0] = 0.0;
        rho[last] = 0.0;
        if let Some(i) = (1..last).find(|&i| !(rho[i] > 0.0)) {
            return Err(Error::Degenerate(format!(
                "interior node {i} has rho = {}",
                rho[i]
            )));
        }
        for i in 0..last {
            let d = (rho[i + 1] - rho[i]).hypot(z[i + 1] - z[i]);
            if !(d > 0.0) {
                return Err(Error::Degenerate(format!(
                    "nodes {i} and {} coincide; ordering is not monotone in arclength",
                    i + 1
                )));
            }
        }
        Ok(Self { rho, z, time })
    }

    /// Round sphere of radius `r` with `segments` uniform arcs.
    pub fn sphere(r: f64, segments: usize) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        let n = segments;
        let (rho, z) = (0..=n)
            .map(|i| {
                let s = std::f64::consts::PI * i as f64 / n as f64;
                (r * s.sin(), -r * s.cos())
            })
            .unzip();
        Self::new(rho, z, 0.0)
    }

    /// Spheroid with equatorial semi-axis `a` and polar semi-axis `c`,
    /// sampled uniformly in arclength.
    pub fn spheroid(a: f64, c: f64, segments: usize) -> Result<Self> {
        if !(a > 0.0 && c > 0.0) {
            return Err(Error::Domain(format!(
                "spheroid axes must be positive, got a = {a}, c = {c}"
            )));
        }
        Self::from_parametric(segments, |t| {
            (a * t.sin(), -c * t.cos(), a * t.cos(), c * t.sin())
        })
    }

    /// Samples a profile `t ∈ [0, π] ↦ (ρ, z, ρ_t, z_t)` uniformly in
    /// arclength.
    pub fn from_parametric<F>(segments: usize, curve: F) -> Result<Self>
    where
        F: Fn(f64) -> (f64, f64, f64, f64),
    {
        let speed = |t: f64| {
            let (_, _, dr, dz) = curve(t);
            dr.hypot(dz)
        };
        let panels = 64 * segments.max(8);
        let dt = std::f64::consts::PI / panels as f64;
        let mut cum = Vec::with_capacity(panels + 1);
        cum.push(0.0);
        for p in 0..panels {
            let a = p as f64 * dt;
            let len = gauss5(&speed, a, a + dt);
            cum.push(cum[p] + len);
        }
        let total = cum[panels];
        let mut rho = Vec::with_capacity(segments + 1);
        let mut z = Vec::with_capacity(segments + 1);
        for j in 0..=segments {
            let target = total * j as f64 / segments as f64;
            let t = if j == 0 {
                0.0
            } else if j == segments {
                std::f64::consts::PI
            } else {
                let p = cum
                    .partition_point(|&c| c <= target)
                    .saturating_sub(1)
                    .min(panels - 1);
                let a = p as f64 * dt;
                let (mut lo, mut hi) = (a, a + dt);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if cum[p] + gauss5(&speed, a, mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            let (r, zz, _, _) = curve(t);
            rho.push(r);
            z.push(zz);
        }
        rho[0] = 0.0;
        rho[segments] = 0.0;
        Self::new(rho, z, 0.0)
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn segments(&self) -> usize {
        self.rho.len() - 1
    }

    /// Reflected ghost position for `i ∈ [-1, N+1]`.
    fn pos(&self, i: isize) -> (f64, f64) {
        let n = self.segments() as isize;
        if i < 0 {
            let j = (-i) as usize;
            (-self.rho[j], self.z[j])
        } else if i > n {
            let j = (2 * n - i) as usize;
            (-self.rho[j], self.z[j])
        } else {
            (self.rho[i as usize], self.z[i as usize])
        }
    }

    pub fn chord_lengths(&self) -> Vec<f64> {
        (0..self.segments())
            .map(|i| (self.rho[i + 1] - self.rho[i]).hypot(self.z[i + 1] - self.z[i]))
            .collect()
    }

    pub fn cumulative_length(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.len());
        s.push(0.0);
        for (i, c) in self.chord_lengths().into_iter().enumerate() {
            s.push(s[i] + c);
        }
        s
    }

    /// `(min, max)` chord length divided by the mean chord length.
    pub fn spacing_ratio(&self) -> (f64, f64) {
        let c = self.chord_lengths();
        let mean = c.iter().sum::<f64>() / c.len() as f64;
        let (lo, hi) = c
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        (lo / mean, hi / mean)
    }

    /// Area of the polyhedral surface of revolution (sum of frusta).
    pub fn area(&self) -> f64 {
        let pi = std::f64::consts::PI;
        (0..self.segments())
            .map(|i| {
                let l = (self.rho[i + 1] - self.rho[i]).hypot(self.z[i + 1] - self.z[i]);
                pi * (self.rho[i] + self.rho[i + 1]) * l
            })
            .sum()
    }

    /// Enclosed volume of the polyhedral body of revolution (sum of frusta).
    pub fn volume(&self) -> f64 {
        let pi = std::f64::consts::PI;
        (0..self.segments())
            .map(|i| {
                let (a, b) = (self.rho[i], self.rho[i + 1]);
                pi * (a * a + a * b + b * b) / 3.0 * (self.z[i + 1] - self.z[i])
            })
            .sum()
    }

    /// Dilation about the origin by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rho: self.rho.iter().map(|r| r * factor).collect(),
            z: self.z.iter().map(|z| z * factor).collect(),
            time: self.time,
        }
    }

    /// `(F − (0, z0)) / eps`.
    pub fn rescaled_about(&self, z0: f64, eps: f64) -> Self {
        Self {
            rho: self.rho.iter().map(|r| r / eps).collect(),
            z: self.z.iter().map(|z| (z - z0) / eps).collect(),
            time: self.time,
        }
    }

    /// Moves every node by `dt · velocity`, keeping the poles on the axis.
    pub fn displaced(&self, velocity: &[(f64, f64)], dt: f64) -> Self {
        let mut rho: Vec<f64> = self
            .rho
            .iter()
            .zip(velocity)
            .map(|(r, v)| r + dt * v.0)
            .collect();
        let z = self
            .z
            .iter()
            .zip(velocity)
            .map(|(z, v)| z + dt * v.1)
            .collect();
        let last = rho.len() - 1;
        rho[0] = 0.0;
        rho[last] = 0.0;
        Self {
            rho,
            z,
            time: self.time + dt,
        }
    }

    pub fn curvatures(&self) -> Result<CurvatureField> {
        let n = self.segments();
        let len = n + 1;
        let s = self.cumulative_length();
        let mut lambda1 = vec![0.0; len];
        let mut lambda2 = vec![0.0; len];
        let mut tangent = vec![(0.0, 0.0); len];
        let mut conn = vec![0.0; len];
        let mut ds_min = f64::INFINITY;
        let mut ds_max: f64 = 0.0;
        for i in 0..len {
            let ii = i as isize;
            let (r0, z0) = self.pos(ii);
            let (rm, zm) = self.pos(ii - 1);
            let (rp, zp) = self.pos(ii + 1);
            let a = (r0 - rm, z0 - zm);
            let b = (rp - r0, zp - z0);
            let la = a.0.hypot(a.1);
            let lb = b.0.hypot(b.1);
            if !(la > 0.0 && lb > 0.0) {
                return Err(Error::Degenerate(format!(
                    "zero-length segment at node {i}"
                )));
            }
            if i > 0 {
                ds_min = ds_min.min(la);
                ds_max = ds_max.max(la);
            }
            let cross = a.0 * b.1 - a.1 * b.0;
            let chord = (a.0 + b.0).hypot(a.1 + b.1);
            lambda1[i] = 2.0 * cross / (la * lb * chord);
            let tr = a.0 * lb / la + b.0 * la / lb;
            let tz = a.1 * lb / la + b.1 * la / lb;
            let tn = tr.hypot(tz);
            tangent[i] = (tr / tn, tz / tn);
            if i == 0 || i == n {
                lambda2[i] = lambda1[i];
            } else {
                if !(self.rho[i] > 0.0) {
                    return Err(Error::Degenerate(format!(
                        "interior node {i} reached the axis"
                    )));
                }
                lambda2[i] = tangent[i].1 / self.rho[i];
                conn[i] = tangent[i].0 / self.rho[i];
            }
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Degenerate("arclength is not increasing".into()));
        }

        let mut dl1 = vec![0.0; len];
        let mut dl2 = vec![0.0; len];
        let mut ddl1 = vec![0.0; len];
        let mut ddl2 = vec![0.0; len];
        for i in 0..len {
            let d1 = even_derivs(&s, &lambda1, i);
            let d2 = even_derivs(&s, &lambda2, i);
            ddl1[i] = d1.dd;
            ddl2[i] = d2.dd;
            if i > 0 && i < n {
                dl1[i] = d1.d;
                dl2[i] = (lambda1[i] - lambda2[i]) * conn[i];
            }
        }

        let h: Vec<f64> = lambda1.iter().zip(&lambda2).map(|(a, b)| a + b).collect();
        let k: Vec<f64> = lambda1.iter().zip(&lambda2).map(|(a, b)| a * b).collect();
        let norm_a2 = lambda1
            .iter()
            .zip(&lambda2)
            .map(|(a, b)| a * a + b * b)
            .collect();
        let gamma = h.iter().zip(&k).map(|(h, k)| k / h.powf(DIM)).collect();
        let mut grad_h = vec![0.0; len];
        let mut lap_h = vec![0.0; len];
        let mut y2 = vec![0.0; len];
        for i in 0..len {
            if i == 0 || i == n {
                lap_h[i] = 2.0 * even_derivs(&s, &h, i).dd;
                continue;
            }
            let jet = CurvatureJet {
                l1: lambda1[i],
                l2: lambda2[i],
                dl1: dl1[i],
                dl2: dl2[i],
                ddl1: ddl1[i],
                ddl2: ddl2[i],
                conn: conn[i],
            };
            let hm = jet.mean();
            grad_h[i] = hm.d;
            lap_h[i] = hm.lap(conn[i]);
            y2[i] = jet.y2();
        }
        Ok(CurvatureField {
            s,
            lambda1,
            lambda2,
            h,
            k,
            norm_a2,
            gamma,
            grad_h,
            lap_h,
            y2,
            tangent,
            conn,
            dl1,
            dl2,
            ddl1,
            ddl2,
            ds_min,
            ds_max,
        })
    }

    /// Resamples the nodes to uniform chord-length spacing by local cubic
    /// interpolation of `(ρ, z)` against cumulative chord length, using the
    /// reflected ghosts at the poles. Node count and time are preserved.
    pub fn redistribute(&self) -> Self {
        let n = self.segments();
        let s = self.cumulative_length();
        let total = s[n];
        let mut rho = Vec::with_capacity(n + 1);
        let mut z = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let target = total * j as f64 / n as f64;
            let seg = s
                .partition_point(|&x| x <= target)
                .saturating_sub(1)
                .min(n - 1);
            let mut r = 0.0;
            let mut zz = 0.0;
            for m in -1..=2isize {
                let idx = seg as isize + m;
                let mut w = 1.0;
                for q in -1..=2isize {
                    if q != m {
                        let sq = ghost_s(&s, seg as isize + q);
                        w *= (target - sq) / (ghost_s(&s, idx) - sq);
                    }
                }
                let (pr, pz) = self.pos(idx);
                r += w * pr;
                zz += w * pz;
            }
            rho.push(r);
            z.push(zz);
        }
        rho[0] = 0.0;
        rho[n] = 0.0;
        z[0] = self.z[0];
        z[n] = self.z[n];
        Self {
            rho,
            z,
            time: self.time,
        }
    }
}

fn gauss5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    h * X.iter().zip(&W).map(|(x, w)| w * f(c + h * x)).sum::<f64>()
}

/// `(min γ, max γ, argmin)` over all nodes, ties to the lowest index.
pub fn gamma_extrema(field: &CurvatureField) -> (f64, f64, usize) {
    let mut arg = 0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &g) in field.gamma.iter().enumerate() {
        if g < lo {
            lo = g;
            arg = i;
        }
        hi = hi.max(g);
    }
    (lo, hi, arg)
}

/// `max (λ_max/λ_min) − 1` over nodes.
pub fn roundness(field: &CurvatureField) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, (&a, &b)) in field.lambda1.iter().zip(&field.lambda2).enumerate() {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Degenerate(format!(
                "nonpositive principal curvature at node {i}: ({a}, {b})"
            )));
        }
        worst = worst.max(a.max(b) / a.min(b) - 1.0);
    }
    Ok(worst)
}

/// `max (1/nⁿ − γ)`.
pub fn umbilic_gap(field: &CurvatureField) -> f64 {
    field
        .gamma
        .iter()
        .map(|g| UMBILIC_GAMMA - g)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_curvatures_are_exact() {
        let s = AxiSurface::sphere(1.0, 64).unwrap();
        let f = s.curvatures().unwrap();
        for i in 0..f.len() {
            assert!(
                (f.lambda1[i] - 1.0).abs() < 1e-12,
                "node {i}: {}",
                f.lambda1[i]
            );
            assert!((f.lambda2[i] - 1.0).abs() < 1e-12);
            assert!((f.h[i] - 2.0).abs() < 1e-12);
            assert!((f.k[i] - 1.0).abs() < 1e-12);
            assert!((f.gamma[i] - 0.25).abs() < 1e-12);
            assert!(f.y2[i].abs() < 1e-16 + 1e-12);
        }
        let (lo, hi, arg) = gamma_extrema(&f);
        assert!((lo - 0.25).abs() < 1e-12 && (hi - 0.25).abs() < 1e-12);
        assert_eq!(arg, argmin_first(&f.gamma));
        assert!(roundness(&f).unwrap() < 1e-10);
    }

    fn argmin_first(v: &[f64]) -> usize {
        let m = v.iter().copied().fold(f64::INFINITY, f64::min);
        v.iter().position(|&x| x == m).unwrap()
    }

    #[test]
    fn spheroid_equator_and_pole() {
        let s = AxiSurface::spheroid(1.0, 2.0, 256).unwrap();
        let f = s.curvatures().unwrap();
        let eq = 128;
        assert!((s.rho()[eq] - 1.0).abs() < 1e-9);
        assert!((f.lambda1[eq] - 0.25).abs() < 1e-4);
        assert!((f.lambda2[eq] - 1.0).abs() < 1e-6);
        assert!((f.gamma[eq] - 0.16).abs() < 1e-4);
        assert!((f.lambda1[0] - 2.0).abs() < 1e-3);
        assert!((f.k[0] - 4.0).abs() < 3e-3);
        let (lo, hi, arg) = gamma_extrema(&f);
        assert_eq!(arg, eq);
        assert!((lo - 0.16).abs() < 1e-4);
        assert!(hi <= 0.25 + 1e-10);
        assert!((roundness(&f).unwrap() - 3.0).abs() < 2e-3);
    }

    #[test]
    fn cauchy_schwarz_bounds_hold() {
        let s = AxiSurface::spheroid(1.0, 1.7, 128).unwrap();
        let f = s.curvatures().unwrap();
        for i in 0..f.len() {
            let h2 = f.h[i] * f.h[i];
            assert!(f.norm_a2[i] <= h2 && f.norm_a2[i] >= h2 / 2.0 - 1e-12);
            assert!(f.gamma[i] >= 0.0 && f.gamma[i] <= 0.25 + 1e-12);
            assert!(f.y2[i] >= 0.0);
        }
    }

    #[test]
    fn gamma_is_scale_invariant() {
        let s = AxiSurface::spheroid(1.0, 1.4, 96).unwrap();
        let g0 = s.curvatures().unwrap().gamma;
        let g1 = s.scaled(0.003).curvatures().unwrap().gamma;
        for (a, b) in g0.iter().zip(&g1) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_degenerate_profiles() {
        let rho = vec![0.0, 0.5, -0.1, 0.5, 0.0];
        let z = vec![-1.0, -0.5, 0.0, 0.5, 1.0];
        assert!(matches!(
            AxiSurface::new(rho, z, 0.0),
            Err(Error::Degenerate(_))
        ));
        let rho = vec![0.0, 0.5, 0.5, 0.5, 0.0];
        let z = vec![-1.0, -0.5, -0.5, 0.5, 1.0];
        assert!(AxiSurface::new(rho, z, 0.0).is_err());
    }

    #[test]
    fn redistribute_uniform_sphere_is_fixed_point() {
        let s = AxiSurface::sphere(1.0, 100).unwrap();
        let r = s.redistribute();
        for i in 0..s.len() {
            assert!((s.rho()[i] - r.rho()[i]).abs() < 1e-12);
            assert!((s.z()[i] - r.z()[i]).abs() < 1e-12);
        }
    }

    fn perturbed_sphere(n: usize) -> AxiSurface {
        let (rho, z): (Vec<f64>, Vec<f64>) = (0..=n)
            .map(|i| {
                let x = PI * i as f64 / n as f64;
                let u = x + 0.2 * (2.0 * x).sin();
                (u.sin(), -u.cos())
            })
            .unzip();
        AxiSurface::new(rho, z, 0.0).unwrap()
    }

    #[test]
    fn redistribute_restores_uniform_spacing_on_sphere() {
        let mut errs = Vec::new();
        for &n in &[32usize, 64, 128] {
            let s = perturbed_sphere(n);
            let (lo, hi) = s.spacing_ratio();
            assert!(hi / lo > 1.5);
            let r = s.redistribute();
            let (lo, hi) = r.spacing_ratio();
            assert!(hi / lo < 1.0 + 1e-2, "n={n} {lo} {hi}");
            let f = r.curvatures().unwrap();
            let e = f
                .lambda1
                .iter()
                .chain(&f.lambda2)
                .map(|l| (l - 1.0).abs())
                .fold(0.0, f64::max);
            let v = (r.volume() - s.volume()).abs();
            let ds = PI / n as f64;
            assert!(v <= ds.powi(3), "volume change {v} at n={n}");
            errs.push(e);
        }
        let order = (errs[1] / errs[2]).log2();
        assert!(order > 1.8, "errors {errs:?}");
    }

    #[test]
    fn sphere_state_reference_values() {
        let s = SphereState::new(2.0, 2).unwrap();
        assert_eq!(s.mean_curvature(), 1.0);
        assert_eq!(s.gauss_curvature(), 0.25);
        assert_eq!(s.gamma(), 0.25);
        assert!(SphereState::new(-1.0, 2).is_err());
    }
}
