//! Pointwise second-order jets of the curvature of a surface of revolution.
//!
//! On a surface of revolution in R³ (n = 2) with meridian arclength `s` and
//! radius `ρ(s)`, the orthonormal frame `e₁ = ∂_s`, `e₂ = ∂_φ/ρ` diagonalises
//! the second fundamental form, `h = diag(λ₁, λ₂)`. The only nonzero
//! Christoffel data is `∇_{e₂}e₁ = k e₂`, `∇_{e₂}e₂ = −k e₁` with `k = ρ_s/ρ`.
//!
//! Every tensor contraction appearing in the evolution equations then reduces
//! to scalar algebra on `(λ₁, λ₂, λ₁', λ₂', λ₁'', λ₂'', k)`:
//!
//! * `∇₁h₁₁ = λ₁'`, `∇₁h₂₂ = ∇₂h₁₂ = ∇₂h₂₁ = λ₂' = (λ₁ − λ₂) k` (Codazzi),
//!   all other components vanish;
//! * for an axisymmetric scalar `u`: `|∇u|² = u'²`, `Δu = u'' + k u'`;
//! * `(Δh)₁₁ = λ₁'' + kλ₁' − 2kλ₂'`, `(Δh)₂₂ = λ₂'' + kλ₂' + 2kλ₂'`;
//! * `b = diag(1/λ₁, 1/λ₂)`;
//! * `Y² = Σ_{i,l,m} T_{ilm}² / (λ_l λ_m)` with
//!   `T₁₁₁ = Hλ₁' − λ₁H'`, `T₁₂₂ = Hλ₂' − λ₂H'`, `T₂₁₂ = T₂₂₁ = Hλ₂'`.
//!
//! Jets are only formed at interior nodes; `k` is singular on the axis.

/// Surface dimension of an axisymmetric surface in R³.
pub const DIM: f64 = 2.0;

/// `1/nⁿ` for n = 2.
pub const UMBILIC_GAMMA: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureJet {
    pub l1: f64,
    pub l2: f64,
    pub dl1: f64,
    pub dl2: f64,
    pub ddl1: f64,
    pub ddl2: f64,
    /// Geodesic curvature of the parallels, `ρ_s/ρ`.
    pub conn: f64,
}

/// Value and first two arclength derivatives of an axisymmetric scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar2 {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl Scalar2 {
    pub fn lap(&self, conn: f64) -> f64 {
        self.dd + conn * self.d
    }
}

impl CurvatureJet {
    /// Builds a jet whose `λ₂'` satisfies the Codazzi relation exactly.
    pub fn with_codazzi(l1: f64, l2: f64, dl1: f64, ddl1: f64, ddl2: f64, conn: f64) -> Self {
        Self {
            l1,
            l2,
            dl1,
            dl2: (l1 - l2) * conn,
            ddl1,
            ddl2,
            conn,
        }
    }

    pub fn mean(&self) -> Scalar2 {
        Scalar2 {
            v: self.l1 + self.l2,
            d: self.dl1 + self.dl2,
            dd: self.ddl1 + self.ddl2,
        }
    }

    pub fn gauss(&self) -> Scalar2 {
        Scalar2 {
            v: self.l1 * self.l2,
            d: self.dl1 * self.l2 + self.l1 * self.dl2,
            dd: self.ddl1 * self.l2 + 2.0 * self.dl1 * self.dl2 + self.l1 * self.ddl2,
        }
    }

    pub fn norm_a2(&self) -> f64 {
        self.l1 * self.l1 + self.l2 * self.l2
    }

    /// `γ = K/H²` and its derivatives by the quotient rule.
    pub fn gamma(&self) -> Scalar2 {
        let h = self.mean();
        let k = self.gauss();
        let n = DIM;
        let hn = h.v.powf(n);
        let v = k.v / hn;
        let d = k.d / hn - n * k.v * h.d / (hn * h.v);
        let dd = k.dd / hn - 2.0 * n * k.d * h.d / (hn * h.v) - n * k.v * h.dd / (hn * h.v)
            + n * (n + 1.0) * k.v * h.d * h.d / (hn * h.v * h.v);
        Scalar2 { v, d, dd }
    }

    /// `Y² = g^{ij} b^{lp} b^{mq} (H∇ᵢh_{lm} − h_{lm}∇ᵢH)(H∇ⱼh_{pq} − h_{pq}∇ⱼH)`.
    pub fn y2(&self) -> f64 {
        let h = self.mean();
        let t111 = h.v * self.dl1 - self.l1 * h.d;
        let t122 = h.v * self.dl2 - self.l2 * h.d;
        let t212 = h.v * self.dl2;
        t111 * t111 / (self.l1 * self.l1)
            + t122 * t122 / (self.l2 * self.l2)
            + 2.0 * t212 * t212 / (self.l1 * self.l2)
    }

    /// `b^{jk} Δh_{jk}` from the rough Laplacian of `h`.
    pub fn b_lap_h(&self) -> f64 {
        let k = self.conn;
        let lap11 = self.ddl1 + k * self.dl1 - 2.0 * k * self.dl2;
        let lap22 = self.ddl2 + k * self.dl2 + 2.0 * k * self.dl2;
        lap11 / self.l1 + lap22 / self.l2
    }

    /// `b^{jk} ∇ⱼH ∇ₖH`.
    pub fn b_grad_h2(&self) -> f64 {
        let dh = self.mean().d;
        dh * dh / self.l1
    }

    /// `(b^{ij} − (n/H) g^{ij}) ∇ᵢH ∇ⱼH`.
    pub fn umbilic_defect_grad_h2(&self) -> f64 {
        let h = self.mean();
        (1.0 / self.l1 - DIM / h.v) * h.d * h.d
    }

    /// Scales the jet as the surface is dilated by `1/eps`: curvatures
    /// multiply by `eps`, each arclength derivative adds another factor.
    pub fn rescaled(&self, eps: f64) -> Self {
        Self {
            l1: self.l1 * eps,
            l2: self.l2 * eps,
            dl1: self.dl1 * eps * eps,
            dl2: self.dl2 * eps * eps,
            ddl1: self.ddl1 * eps.powi(3),
            ddl2: self.ddl2 * eps.powi(3),
            conn: self.conn * eps,
        }
    }
}
