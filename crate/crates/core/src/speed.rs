//! The normal speed `f(H) = H (ln Ĥ)^α` with `Ĥ = H + H₀`, and the scalar
//! quantities derived from it.
//!
//! `α = 0` is accepted as a degenerate reference mode where `f(H) = H`
//! (mean curvature flow). It is flagged by [`SpeedParams::is_reference`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TINY_H: f64 = 1e-300;

/// The pair `(α, H₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedParams {
    alpha: f64,
    h0: f64,
}

/// `f` and its derivatives at one value of `H`, sharing a single `ln Ĥ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedValues {
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
    /// `H f' − f`, evaluated from its own closed form.
    pub hfp_minus_f: f64,
    /// `ln Ĥ`.
    pub log_hat: f64,
}

impl SpeedParams {
    pub fn new(alpha: f64, h0: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
        }
        Self::check_h0(h0)?;
        Ok(Self { alpha, h0 })
    }

    /// `α = 0`: the flow reduces to mean curvature flow. `H₀` only enters
    /// through `ln Ĥ`-weighted diagnostics such as `g_σ`.
    pub fn mean_curvature_reference(h0: f64) -> Result<Self> {
        Self::check_h0(h0)?;
        Ok(Self { alpha: 0.0, h0 })
    }

    /// `α` with `H₀ = e`.
    pub fn with_alpha(alpha: f64) -> Result<Self> {
        if alpha == 0.0 {
            Self::mean_curvature_reference(std::f64::consts::E)
        } else {
            Self::new(alpha, std::f64::consts::E)
        }
    }

    fn check_h0(h0: f64) -> Result<()> {
        if !(h0 >= std::f64::consts::E) || !h0.is_finite() {
            return Err(Error::Domain(format!("h0 must be >= e, got {h0}")));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn is_reference(&self) -> bool {
        self.alpha == 0.0
    }

    /// `ln(H + H₀)`.
    #[inline]
    pub fn log_hat(&self, h: f64) -> f64 {
        (h + self.h0).ln()
    }

    /// All scalar quantities at `h` without the domain check. Callers in hot
    /// loops have already established `h >= 0`.
    #[inline]
    pub fn values(&self, h: f64) -> SpeedValues {
        debug_assert!(h >= 0.0, "negative mean curvature {h}");
        let a = self.alpha;
        let hat = h + self.h0;
        let l = hat.ln();
        if a == 0.0 {
            return SpeedValues {
                f: h,
                fp: 1.0,
                fpp: 0.0,
                hfp_minus_f: 0.0,
                log_hat: l,
            };
        }
        let la1 = l.powf(a - 1.0);
        let f = if h < TINY_H { 0.0 } else { h * la1 * l };
        let fp = la1 * (l + a * h / hat);
        let fpp = a / hat * l.powf(a - 2.0) * (l + self.h0 * l / hat + (a - 1.0) * h / hat);
        let hfp_minus_f = if h < TINY_H {
            0.0
        } else {
            a * h * h / hat * la1
        };
        SpeedValues {
            f,
            fp,
            fpp,
            hfp_minus_f,
            log_hat: l,
        }
    }

    pub fn try_values(&self, h: f64) -> Result<SpeedValues> {
        check_h(h)?;
        Ok(self.values(h))
    }

    pub fn f(&self, h: f64) -> Result<f64> {
        Ok(self.try_values(h)?.f)
    }

    pub fn f_prime(&self, h: f64) -> Result<f64> {
        Ok(self.try_values(h)?.fp)
    }

    pub fn f_second(&self, h: f64) -> Result<f64> {
        Ok(self.try_values(h)?.fpp)
    }

    pub fn hf_prime_minus_f(&self, h: f64) -> Result<f64> {
        Ok(self.try_values(h)?.hfp_minus_f)
    }

    /// `H f''/f'` from the closed form of `f''/f'`. Bounded by `2α` for
    /// `H₀ >= e`.
    pub fn h_fpp_over_fp(&self, h: f64) -> Result<f64> {
        check_h(h)?;
        let a = self.alpha;
        if a == 0.0 || h == 0.0 {
            return Ok(0.0);
        }
        let hat = h + self.h0;
        let l = hat.ln();
        let ratio = a / (hat * l) * (1.0 + (self.h0 * l - h) / (hat * l + a * h));
        Ok(h * ratio)
    }
}

fn check_h(h: f64) -> Result<()> {
    if h < 0.0 || h.is_nan() {
        return Err(Error::Domain(format!(
            "mean curvature must be >= 0, got {h}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn p(alpha: f64) -> SpeedParams {
        SpeedParams::with_alpha(alpha).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SpeedParams::new(0.0, E).is_err());
        assert!(SpeedParams::new(-1.0, E).is_err());
        assert!(SpeedParams::new(1.0, 2.0).is_err());
        assert!(SpeedParams::mean_curvature_reference(E)
            .unwrap()
            .is_reference());
    }

    #[test]
    fn negative_h_is_domain_error() {
        let sp = p(1.0);
        assert!(matches!(sp.f(-1e-3), Err(Error::Domain(_))));
        assert!(sp.f_prime(-1.0).is_err());
        assert!(sp.hf_prime_minus_f(-1.0).is_err());
        assert!(sp.h_fpp_over_fp(-1.0).is_err());
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(p(1.0).f(0.0).unwrap(), 0.0);
        let h = E * E - E;
        let v = p(2.0).f(h).unwrap();
        assert!((v - 4.0 * h).abs() < 1e-12 * v);
        assert!((4.0 * h - 18.683098).abs() < 1e-6);
        assert!((p(1.0).f_prime(0.0).unwrap() - 1.0).abs() < 1e-15);
        let fp = p(2.0).f_prime(h).unwrap();
        assert!((fp - 2.0 * (2.0 + 2.0 * h / (E * E))).abs() < 1e-12);
        assert!((fp - 6.528).abs() < 1e-3);
        let hf = p(1.0).hf_prime_minus_f(h).unwrap();
        assert!((hf - h * h / (E * E)).abs() < 1e-12);
        assert!((hf - 2.952492).abs() < 1e-6);
        assert_eq!(p(0.5).hf_prime_minus_f(0.0).unwrap(), 0.0);
        assert_eq!(p(0.5).h_fpp_over_fp(0.0).unwrap(), 0.0);
    }

    #[test]
    fn f_at_five_matches_direct_evaluation() {
        // 5 ln(5 + e), computed independently to 15 digits.
        let expected = 10.217958890929289;
        assert!((p(1.0).f(5.0).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn hf_prime_minus_f_two_routes() {
        for &a in &[0.5, 1.0, 2.0] {
            let sp = p(a);
            for &h in &[0.1, 1.0, 10.0, 100.0] {
                let v = sp.values(h);
                let direct = h * v.fp - v.f;
                assert!(
                    (direct - v.hfp_minus_f).abs() <= 1e-12 * v.hfp_minus_f.abs(),
                    "a={a} h={h}: {direct} vs {}",
                    v.hfp_minus_f
                );
            }
        }
    }

    #[test]
    fn reference_mode_is_linear() {
        let sp = p(0.0);
        for &h in &[0.0, 0.3, 7.0, 1e5] {
            let v = sp.values(h);
            assert_eq!(v.f, h);
            assert_eq!(v.fp, 1.0);
            assert_eq!(v.fpp, 0.0);
        }
    }

    #[test]
    fn h_fpp_over_fp_decays() {
        let sp = p(1.0);
        let mut prev = f64::INFINITY;
        let mut h = 100.0;
        while h < 1e12 {
            let r = sp.h_fpp_over_fp(h).unwrap();
            assert!(r <= prev);
            prev = r;
            h *= 1.5;
        }
        assert!(prev < 0.05);
    }
}
