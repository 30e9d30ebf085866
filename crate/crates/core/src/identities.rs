//! Residual checks of the evolution equations for `H`, `K`, `γ` and `g_σ`.
//!
//! Right-hand sides are evaluated on [`CurvatureJet`]s, so the same code
//! serves the flow residuals (jets from stencils on a snapshot) and the pure
//! algebraic recombination checks (any jet).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::euler_step;
use crate::geometry::{AxiSurface, CurvatureField};
use crate::jet::{CurvatureJet, DIM};
use crate::pinching::reaction_terms;
use crate::speed::SpeedParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    H,
    K,
    Gamma,
    GSigma,
}

impl Equation {
    pub const ALL: [Equation; 4] = [Equation::H, Equation::K, Equation::Gamma, Equation::GSigma];
}

/// `f'ΔH + f''|∇H|² + f|A|²`.
pub fn rhs_h(jet: &CurvatureJet, sp: &SpeedParams) -> f64 {
    let h = jet.mean();
    let v = sp.values(h.v);
    v.fp * h.lap(jet.conn) + v.fpp * h.d * h.d + v.f * jet.norm_a2()
}

/// `K[H(f − Hf') + f' b^{jk}Δh_{jk} + f'' b^{jk}∇_jH∇_kH + n|A|²f']`.
pub fn rhs_k_time(jet: &CurvatureJet, sp: &SpeedParams) -> f64 {
    let h = jet.mean().v;
    let k = jet.gauss().v;
    let v = sp.values(h);
    k * (-h * v.hfp_minus_f
        + v.fp * jet.b_lap_h()
        + v.fpp * jet.b_grad_h2()
        + DIM * jet.norm_a2() * v.fp)
}

/// The same rate with `K b^{jk}Δh_{jk}` eliminated through `ΔK`.
pub fn rhs_k_ev(jet: &CurvatureJet, sp: &SpeedParams) -> f64 {
    let n = DIM;
    let hs = jet.mean();
    let ks = jet.gauss();
    let gs = jet.gamma();
    let (h, k) = (hs.v, ks.v);
    let v = sp.values(h);
    v.fp * ks.lap(jet.conn)
        - v.fp * (n - 1.0) / n * ks.d * ks.d / k
        - v.fp * h.powf(2.0 * n) / (n * k) * gs.d * gs.d
        + v.fp * k / (h * h) * jet.y2()
        + v.fpp * k * jet.b_grad_h2()
        - h * k * v.hfp_minus_f
        + v.fp * n * k * jet.norm_a2()
}

/// Both sides of `ΔK = K b^{jk}Δh_{jk} + (n−1)/(nK)|∇K|² − K Y²/H² + H^{2n}/(nK)|∇γ|²`.
pub fn lap_k_sides(jet: &CurvatureJet) -> (f64, f64) {
    let n = DIM;
    let hs = jet.mean();
    let ks = jet.gauss();
    let gs = jet.gamma();
    let (h, k) = (hs.v, ks.v);
    let lhs = ks.lap(jet.conn);
    let rhs = k * jet.b_lap_h() + (n - 1.0) / (n * k) * ks.d * ks.d - k / (h * h) * jet.y2()
        + h.powf(2.0 * n) / (n * k) * gs.d * gs.d;
    (lhs, rhs)
}

pub fn rhs_gamma(jet: &CurvatureJet, sp: &SpeedParams) -> f64 {
    let n = DIM;
    let hs = jet.mean();
    let ks = jet.gauss();
    let gs = jet.gamma();
    let (h, k, g) = (hs.v, ks.v, gs.v);
    let v = sp.values(h);
    v.fp * gs.lap(jet.conn) + v.fp * (n + 1.0) * gs.d * hs.d / h
        - v.fp * (n - 1.0) / (n * k) * gs.d * ks.d
        - v.fp * h.powf(n) / (n * k) * gs.d * gs.d
        + v.hfp_minus_f / h * (n * jet.norm_a2() - h * h) * g
        + v.fp * jet.y2() / (h * h) * g
        + v.fpp * jet.umbilic_defect_grad_h2() * g
}

/// `φ = (ln Ĥ)^σ` and its first two derivatives in `H`.
fn phi(sp: &SpeedParams, h: f64, sigma: f64) -> (f64, f64, f64) {
    let hat = h + sp.h0();
    let l = hat.ln();
    (
        l.powf(sigma),
        sigma * l.powf(sigma - 1.0) / hat,
        sigma * l.powf(sigma - 2.0) * ((sigma - 1.0) - l) / (hat * hat),
    )
}

/// `g_σ` and its first two arclength derivatives.
fn gsigma_jet(jet: &CurvatureJet, sp: &SpeedParams, sigma: f64) -> (f64, f64, f64) {
    let hs = jet.mean();
    let gs = jet.gamma();
    let g = DIM.powf(-DIM) - gs.v;
    let (p, dp, ddp) = phi(sp, hs.v, sigma);
    let v = g * p;
    let d = -p * gs.d + g * dp * hs.d;
    let lap = -p * gs.lap(jet.conn) + g * (ddp * hs.d * hs.d + dp * hs.lap(jet.conn))
        - 2.0 * dp * gs.d * hs.d;
    (v, d, lap)
}

pub fn rhs_gsigma(jet: &CurvatureJet, sp: &SpeedParams, sigma: f64) -> f64 {
    let n = DIM;
    let hs = jet.mean();
    let h = hs.v;
    let k = jet.gauss().v;
    let g = n.powf(-n) - jet.gamma().v;
    let (p, dp, _) = phi(sp, h, sigma);
    let (_, dgs, lapgs) = gsigma_jet(jet, sp, sigma);
    let fp = sp.values(h).fp;
    let hk = h.powf(n) / k;
    let hpp = h * dp / p;
    fp * lapgs
        + fp / p * hk * dgs * dgs
        + 2.0 * fp * (1.0 - hpp * (1.0 + hk * g)) * dgs * hs.d / h
        + reaction_terms(jet, sigma, sp).sum()
}

pub fn rhs(eq: Equation, jet: &CurvatureJet, sp: &SpeedParams, sigma: f64) -> f64 {
    match eq {
        Equation::H => rhs_h(jet, sp),
        Equation::K => rhs_k_ev(jet, sp),
        Equation::Gamma => rhs_gamma(jet, sp),
        Equation::GSigma => rhs_gsigma(jet, sp, sigma),
    }
}

fn nodal(eq: Equation, field: &CurvatureField, i: usize, sp: &SpeedParams, sigma: f64) -> f64 {
    match eq {
        Equation::H => field.h[i],
        Equation::K => field.k[i],
        Equation::Gamma => field.gamma[i],
        Equation::GSigma => (DIM.powf(-DIM) - field.gamma[i]) * sp.log_hat(field.h[i]).powf(sigma),
    }
}

/// Fraction of the profile length excluded at each pole by [`residual`].
pub const POLAR_MARGIN: f64 = 0.1;

/// `(q(t+dt) − q(t))/dt − RHS(t)` at the nodes of two matched snapshots
/// lying outside the polar caps of relative arclength [`POLAR_MARGIN`].
pub fn residual(
    eq: Equation,
    s0: &AxiSurface,
    s1: &AxiSurface,
    sp: &SpeedParams,
    sigma: f64,
) -> Result<Vec<f64>> {
    if s0.len() != s1.len() {
        return Err(Error::Mismatch(format!(
            "node counts differ: {} vs {}",
            s0.len(),
            s1.len()
        )));
    }
    let dt = s1.time - s0.time;
    if !(dt > 0.0) {
        return Err(Error::Mismatch(format!(
            "snapshots are not forward in time (dt = {dt})"
        )));
    }
    let f0 = s0.curvatures()?;
    let f1 = s1.curvatures()?;
    let total = f0.s[f0.len() - 1];
    Ok(f0
        .interior()
        .filter(|&i| f0.s[i] >= POLAR_MARGIN * total && f0.s[i] <= (1.0 - POLAR_MARGIN) * total)
        .map(|i| {
            (nodal(eq, &f1, i, sp, sigma) - nodal(eq, &f0, i, sp, sigma)) / dt
                - rhs(eq, &f0.jet(i), sp, sigma)
        })
        .collect())
}

pub fn residual_h(s0: &AxiSurface, s1: &AxiSurface, sp: &SpeedParams) -> Result<Vec<f64>> {
    residual(Equation::H, s0, s1, sp, 0.0)
}

pub fn residual_k(s0: &AxiSurface, s1: &AxiSurface, sp: &SpeedParams) -> Result<Vec<f64>> {
    residual(Equation::K, s0, s1, sp, 0.0)
}

pub fn residual_gamma(s0: &AxiSurface, s1: &AxiSurface, sp: &SpeedParams) -> Result<Vec<f64>> {
    residual(Equation::Gamma, s0, s1, sp, 0.0)
}

pub fn residual_gsigma(
    s0: &AxiSurface,
    s1: &AxiSurface,
    sigma: f64,
    sp: &SpeedParams,
) -> Result<Vec<f64>> {
    residual(Equation::GSigma, s0, s1, sp, sigma)
}

/// Largest relative mismatch of each recombination over the interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlgebraicReport {
    /// Rate of `K` from `ΔK` against the rate from `b^{jk}Δh_{jk}`.
    pub time_k_vs_ev_k: f64,
    pub lap_k: f64,
    /// `γ` rate against `K rate / Hⁿ − nγ/H · H rate`.
    pub gamma_quotient: f64,
    /// `g_σ` rate against `−φ γ rate + g φ' H rate`.
    pub gsigma_chain: f64,
}

impl AlgebraicReport {
    pub fn max(&self) -> f64 {
        self.time_k_vs_ev_k
            .max(self.lap_k)
            .max(self.gamma_quotient)
            .max(self.gsigma_chain)
    }
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

/// Recombination checks at one jet. The scale of each comparison is the
/// largest individual term magnitude, so cancellation does not inflate the
/// relative error.
pub fn algebraic_checks_at(jet: &CurvatureJet, sp: &SpeedParams, sigma: f64) -> AlgebraicReport {
    let n = DIM;
    let h = jet.mean().v;
    let k = jet.gauss().v;
    let gamma = jet.gamma().v;
    let tk = rhs_k_time(jet, sp);
    let ek = rhs_k_ev(jet, sp);
    let (ll, lr) = lap_k_sides(jet);
    let rh = rhs_h(jet, sp);
    let rg = rhs_gamma(jet, sp);
    let quotient = ek / h.powf(n) - n * gamma / h * rh;
    let (p, dp, _) = phi(sp, h, sigma);
    let g = n.powf(-n) - gamma;
    let rs = rhs_gsigma(jet, sp, sigma);
    let chain = -p * rg + g * dp * rh;
    let ks = k * (jet.b_lap_h().abs() + jet.norm_a2() + h * h) * sp.values(h).fp.max(1.0);
    let kscale = tk.abs().max(ek.abs()).max(ks);
    let lscale = ll.abs().max(lr.abs()).max(k * jet.b_lap_h().abs());
    let gscale = rg.abs().max(quotient.abs()).max(ks / h.powf(n));
    let sscale = rs.abs().max(chain.abs()).max(p * gscale);
    AlgebraicReport {
        time_k_vs_ev_k: rel(tk, ek, kscale),
        lap_k: rel(ll, lr, lscale),
        gamma_quotient: rel(rg, quotient, gscale),
        gsigma_chain: rel(rs, chain, sscale),
    }
}

/// [`algebraic_checks_at`] maximised over the interior jets of a snapshot.
pub fn algebraic_checks(
    surface: &AxiSurface,
    sp: &SpeedParams,
    sigma: f64,
) -> Result<AlgebraicReport> {
    let field = surface.curvatures()?;
    let mut out = AlgebraicReport {
        time_k_vs_ev_k: 0.0,
        lap_k: 0.0,
        gamma_quotient: 0.0,
        gsigma_chain: 0.0,
    };
    for i in field.interior() {
        let r = algebraic_checks_at(&field.jet(i), sp, sigma);
        out.time_k_vs_ev_k = out.time_k_vs_ev_k.max(r.time_k_vs_ev_k);
        out.lap_k = out.lap_k.max(r.lap_k);
        out.gamma_quotient = out.gamma_quotient.max(r.gamma_quotient);
        out.gsigma_chain = out.gsigma_chain.max(r.gsigma_chain);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderLevel {
    pub segments: usize,
    pub ds: f64,
    pub dt: f64,
    /// Max residual for the space ladder; max change from the next finer
    /// `dt` for the time ladder.
    pub value: f64,
    /// Rounding level `16 ε max|q| / dt` of the difference quotient, with
    /// `γ φ` in place of `q` for `g_σ`.
    pub noise: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fit {
    pub order: f64,
    /// Coefficient of determination of the log-log regression.
    pub r2: f64,
    /// All values at or below the noise floor.
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub equation: Equation,
    pub ds: f64,
    pub dt: f64,
    pub max_residual: f64,
    pub space_levels: Vec<LadderLevel>,
    pub order_ds: Fit,
    pub time_levels: Vec<LadderLevel>,
    pub order_dt: Fit,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_fit(x: &[f64], y: &[f64], floor: f64) -> Fit {
    if y.iter().all(|&v| v <= floor) {
        return Fit {
            order: f64::INFINITY,
            r2: 1.0,
            exact: true,
        };
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y
        .iter()
        .map(|v| v.max(floor).max(f64::MIN_POSITIVE).ln())
        .collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Fit {
        order: slope,
        r2,
        exact: false,
    }
}

/// Refinement settings for [`residual_ladder`].
#[derive(Debug, Clone)]
pub struct LadderConfig {
    /// Space ladder node counts, coarse to fine, with `dt = dt_coeff · Δs²`.
    pub segments: Vec<usize>,
    pub dt_coeff: f64,
    /// Time ladder at a fixed node count.
    pub time_segments: usize,
    /// Time ladder steps, large to small, each half the previous.
    pub dts: Vec<f64>,
    pub sigma: f64,
    pub floor: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            segments: vec![64, 128, 256],
            dt_coeff: 0.05,
            time_segments: 256,
            dts: vec![4e-4, 2e-4, 1e-4, 5e-5],
            sigma: 0.02,
            floor: 1e-12,
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn noise(eq: Equation, s: &AxiSurface, sp: &SpeedParams, sigma: f64, dt: f64) -> Result<f64> {
    let f = s.curvatures()?;
    let q = f
        .interior()
        .map(|i| match eq {
            Equation::GSigma => f.gamma[i].abs() * sp.log_hat(f.h[i]).powf(sigma),
            _ => nodal(eq, &f, i, sp, sigma).abs(),
        })
        .fold(0.0, f64::max);
    Ok(16.0 * f64::EPSILON * q / dt)
}

fn fit(levels: &[LadderLevel], by_dt: bool, floor: f64) -> Fit {
    if levels.iter().all(|l| l.value <= l.noise.max(floor)) {
        return Fit {
            order: f64::INFINITY,
            r2: 1.0,
            exact: true,
        };
    }
    let x: Vec<f64> = levels
        .iter()
        .map(|l| if by_dt { l.dt } else { l.ds })
        .collect();
    let y: Vec<f64> = levels.iter().map(|l| l.value).collect();
    loglog_fit(&x, &y, floor)
}

/// Space ladder (max residual against `Δs`, with `dt ∝ Δs²`) and time
/// ladder (successive residual differences against `dt` at a fixed mesh).
pub fn residual_ladder<F>(
    eq: Equation,
    surface_at: F,
    sp: &SpeedParams,
    cfg: &LadderConfig,
) -> Result<ResidualReport>
where
    F: Fn(usize) -> Result<AxiSurface>,
{
    if cfg.segments.len() < 3 || cfg.dts.len() < 3 {
        return Err(Error::Domain(
            "a refinement ladder needs at least 3 levels".into(),
        ));
    }
    let mut space = Vec::new();
    for &n in &cfg.segments {
        let s0 = surface_at(n)?;
        let ds = s0.chord_lengths().into_iter().fold(0.0, f64::max);
        let dt = cfg.dt_coeff * ds * ds;
        let s1 = euler_step(&s0, sp, dt)?;
        let r = residual(eq, &s0, &s1, sp, cfg.sigma)?;
        space.push(LadderLevel {
            segments: n,
            ds,
            dt,
            value: max_abs(&r),
            noise: noise(eq, &s0, sp, cfg.sigma, dt)?,
        });
    }
    let s0 = surface_at(cfg.time_segments)?;
    let ds_t = s0.chord_lengths().into_iter().fold(0.0, f64::max);
    let mut res = Vec::new();
    let q_noise = noise(eq, &s0, sp, cfg.sigma, 1.0)?;
    for &dt in &cfg.dts {
        let s1 = euler_step(&s0, sp, dt)?;
        res.push(residual(eq, &s0, &s1, sp, cfg.sigma)?);
    }
    let time: Vec<LadderLevel> = res
        .windows(2)
        .zip(&cfg.dts)
        .map(|(w, &dt)| LadderLevel {
            segments: cfg.time_segments,
            ds: ds_t,
            dt,
            value: w[0]
                .iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
            noise: 2.0 * q_noise / dt,
        })
        .collect();
    let order_ds = fit(&space, false, cfg.floor);
    let order_dt = fit(&time, true, cfg.floor);
    let finest = space[space.len() - 1];
    Ok(ResidualReport {
        equation: eq,
        ds: finest.ds,
        dt: finest.dt,
        max_residual: finest.value,
        space_levels: space,
        order_ds,
        time_levels: time,
        order_dt,
    })
}
