//! Shifted Legendre polynomials, the integrated-Legendre Dirichlet basis,
//! rigorous range evaluation of spectral functions, and verified Gauss
//! quadrature on the unit interval.
//!
//! Basis conventions
//! -----------------
//! `Q_n` denotes the Legendre polynomial shifted to `[0, 1]`:
//! `Q_n(x) = P_n(2x - 1)`, so `Q_n(1) = 1`, `Q_n(0) = (-1)^n`,
//! `∫₀¹ Q_m Q_n = δ_{mn}/(2n+1)`.
//!
//! The Dirichlet trial space on the reference square uses the *integrated*
//! Legendre functions
//!
//! ```text
//!     φ_n(x) = x(1-x) Q'_n(x) / (n(n+1)),     n = 1, 2, ...
//! ```
//!
//! which vanish at 0 and 1 and satisfy `φ'_n = -Q_n` (so the 1-D stiffness
//! matrix `∫ φ'_m φ'_n` is exactly `δ_{mn}/(2n+1)`), as well as the
//! band identity `φ_n = (Q_{n-1} - Q_{n+1}) / (2(2n+1))`.
//!
//! A two-dimensional spectral function is `u(x,y) = Σ c_{ij} φ_i(x) φ_j(y)`
//! over a rectangle mapped affinely onto the reference square.  For range
//! evaluation the weight is factored out:
//!
//! ```text
//!     u = x(1-x) y(1-y) · v,     v = Σ c_{ij} ψ_i(x) ψ_j(y),
//!     ψ_n = Q'_n / (n(n+1)),     |ψ_n| ≤ 1 on [0,1].
//! ```
//!
//! The weight range is computed exactly from `x(1-x) = 1/4 - (x - 1/2)²`,
//! which gives *exact zero* lower bounds on boundary cells; positivity of
//! `u` inside the domain then reduces to positivity of the polynomial `v`
//! on closed cells, which survives up to the boundary.
//!
//! All interval evaluations of the three-term recurrences run in affine
//! arithmetic (see the crate-internal `affine` module): plain interval
//! recurrences blow up like `2.4^n` in the degree, affine forms stay `O(n)`
//! ulps wide.

use crate::affine::{AffineContext, AffineForm};
use crate::interval::Interval;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

/// Errors from basis construction, evaluation and quadrature.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LegendreError {
    /// A rectangle with non-increasing or non-finite sides.
    #[error("invalid rectangle: [{x0}, {x1}] x [{y0}, {y1}]")]
    InvalidRectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// Coefficient vector length does not match the declared basis size.
    #[error("coefficient vector has length {got}, expected {expected} (= n^2 with n = {n})")]
    CoefficientLength { got: usize, expected: usize, n: usize },
    /// Quadrature order outside the supported range.
    #[error("quadrature order {order} outside supported range 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },
    /// Interval Newton failed to certify a quadrature node.
    #[error("failed to certify quadrature node {index} of the order-{order} rule")]
    NodeCertification { order: usize, index: usize },
    /// An integrand degree exceeding what the rule integrates exactly.
    #[error("integrand degree {degree} exceeds the rule's exact degree {max} (order {order})")]
    DegreeTooHigh { degree: usize, max: usize, order: usize },
    /// Evaluation box does not intersect the function's domain.
    #[error("evaluation box does not intersect the domain")]
    OutsideDomain,
}

/// Largest supported quadrature order.
pub const MAX_QUAD_ORDER: usize = 512;

// ---------------------------------------------------------------------------
// Rectangle
// ---------------------------------------------------------------------------

/// An axis-aligned open rectangle `(x0, x1) × (y0, y1)`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRectangle")]
pub struct Rectangle {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

/// Unvalidated mirror used to funnel deserialization through `new`.
#[derive(Deserialize)]
struct RawRectangle {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl TryFrom<RawRectangle> for Rectangle {
    type Error = LegendreError;
    fn try_from(raw: RawRectangle) -> Result<Rectangle, LegendreError> {
        Rectangle::new(raw.x0, raw.x1, raw.y0, raw.y1)
    }
}

impl Rectangle {
    /// The reference domain `(0, 1)²`.
    pub const UNIT: Rectangle = Rectangle {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };

    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Rectangle, LegendreError> {
        let ok = x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite() && x0 < x1 && y0 < y1;
        if ok {
            Ok(Rectangle { x0, x1, y0, y1 })
        } else {
            Err(LegendreError::InvalidRectangle { x0, x1, y0, y1 })
        }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn x1(&self) -> f64 {
        self.x1
    }
    pub fn y0(&self) -> f64 {
        self.y0
    }
    pub fn y1(&self) -> f64 {
        self.y1
    }

    pub fn is_unit(&self) -> bool {
        *self == Rectangle::UNIT
    }

    /// Enclosure of the width `x1 - x0`.
    pub fn width(&self) -> Interval {
        Interval::point(self.x1) - Interval::point(self.x0)
    }

    /// Enclosure of the height `y1 - y0`.
    pub fn height(&self) -> Interval {
        Interval::point(self.y1) - Interval::point(self.y0)
    }

    /// Enclosure of the area.
    pub fn area(&self) -> Interval {
        self.width() * self.height()
    }

    /// Maps a physical-coordinate box into reference coordinates, clamped to
    /// the closed reference square.  Fails if there is no overlap.
    pub fn to_reference(
        &self,
        bx: Interval,
        by: Interval,
    ) -> Result<(Interval, Interval), LegendreError> {
        let map = |b: Interval, lo: f64, hi: f64| -> Result<Interval, LegendreError> {
            let h = Interval::point(hi) - Interval::point(lo);
            let t = (b - Interval::point(lo)).div(h).expect("positive side length");
            t.intersect(Interval::new(0.0, 1.0))
                .map_err(|_| LegendreError::OutsideDomain)
        };
        Ok((map(bx, self.x0, self.x1)?, map(by, self.y0, self.y1)?))
    }
}

// ---------------------------------------------------------------------------
// Affine-arithmetic recurrence evaluation
// ---------------------------------------------------------------------------

/// Which derivative families to produce alongside `Q`.
#[derive(Copy, Clone, PartialEq)]
pub(crate) enum FamilyKind {
    Values,
    WithDeriv,
    WithSecondDeriv,
}

pub(crate) struct AffineFamilies {
    pub q: Vec<AffineForm>,
    pub dq: Vec<AffineForm>,
    pub d2q: Vec<AffineForm>,
}

/// Evaluates `Q_0..=nmax` (and requested derivatives) over the interval `x`
/// in affine arithmetic with per-step error condensation.
pub(crate) fn affine_families(nmax: usize, x: Interval, kind: FamilyKind) -> AffineFamilies {
    let mut ctx = AffineContext::new();
    // t = 2x - 1 (both scalar ops exact or tracked by the affine form).
    let xf = AffineForm::from_interval(x, &mut ctx);
    let t = xf.scale_f64(2.0).sub(&AffineForm::from_point(1.0));

    let mut q: Vec<AffineForm> = Vec::with_capacity(nmax + 1);
    q.push(AffineForm::from_point(1.0));
    if nmax >= 1 {
        q.push(t.clone());
    }
    for n in 1..nmax {
        // (n+1) Q_{n+1} = (2n+1) t Q_n - n Q_{n-1}
        let c1 = Interval::point((2 * n + 1) as f64) / Interval::point((n + 1) as f64);
        let c2 = Interval::point(n as f64) / Interval::point((n + 1) as f64);
        let mut next = t.mul(&q[n]).scale_interval(c1).sub(&q[n - 1].scale_interval(c2));
        next.condense(&mut ctx);
        q.push(next);
    }

    let mut dq: Vec<AffineForm> = Vec::new();
    if kind != FamilyKind::Values {
        // Q'_{n+1} = Q'_{n-1} + 2(2n+1) Q_n, Q'_0 = 0, Q'_1 = 2.
        dq.reserve(nmax + 1);
        dq.push(AffineForm::from_point(0.0));
        if nmax >= 1 {
            dq.push(AffineForm::from_point(2.0));
        }
        for n in 1..nmax {
            let mut next = dq[n - 1].add(&q[n].scale_f64((2 * (2 * n + 1)) as f64));
            next.condense(&mut ctx);
            dq.push(next);
        }
    }

    let mut d2q: Vec<AffineForm> = Vec::new();
    if kind == FamilyKind::WithSecondDeriv {
        // Q''_{n+1} = Q''_{n-1} + 2(2n+1) Q'_n.
        d2q.reserve(nmax + 1);
        d2q.push(AffineForm::from_point(0.0));
        if nmax >= 1 {
            d2q.push(AffineForm::from_point(0.0));
        }
        for n in 1..nmax {
            let mut next = d2q[n - 1].add(&dq[n].scale_f64((2 * (2 * n + 1)) as f64));
            next.condense(&mut ctx);
            d2q.push(next);
        }
    }

    AffineFamilies { q, dq, d2q }
}

/// `Q_0..=nmax` as intervals.
pub(crate) fn q_family(nmax: usize, x: Interval) -> Vec<Interval> {
    affine_families(nmax, x, FamilyKind::Values)
        .q
        .iter()
        .map(|f| f.to_interval())
        .collect()
}

/// `Q'_0..=nmax` as intervals.
pub(crate) fn dq_family(nmax: usize, x: Interval) -> Vec<Interval> {
    affine_families(nmax, x, FamilyKind::WithDeriv)
        .dq
        .iter()
        .map(|f| f.to_interval())
        .collect()
}

/// `φ_1..=n` as intervals (index 0 holds `φ_1`), built from the band
/// identity `φ_k = (Q_{k-1} - Q_{k+1}) / (2(2k+1))` inside affine
/// arithmetic so cancellations near the endpoints survive.
pub(crate) fn phi_family(n: usize, x: Interval) -> Vec<Interval> {
    let fam = affine_families(n + 1, x, FamilyKind::Values);
    (1..=n)
        .map(|k| {
            let s = Interval::ONE / Interval::point((2 * (2 * k + 1)) as f64);
            fam.q[k - 1].sub(&fam.q[k + 1]).scale_interval(s).to_interval()
        })
        .collect()
}

/// `ψ_1..=n` (and optionally `ψ'_1..=n`) as intervals, `ψ_k = Q'_k/(k(k+1))`.
pub(crate) fn psi_family(n: usize, x: Interval, with_deriv: bool) -> (Vec<Interval>, Vec<Interval>) {
    let kind = if with_deriv {
        FamilyKind::WithSecondDeriv
    } else {
        FamilyKind::WithDeriv
    };
    let fam = affine_families(n, x, kind);
    let scale = |k: usize| Interval::ONE / Interval::point((k * (k + 1)) as f64);
    let psi = (1..=n)
        .map(|k| fam.dq[k].scale_interval(scale(k)).to_interval())
        .collect();
    let dpsi = if with_deriv {
        (1..=n)
            .map(|k| fam.d2q[k].scale_interval(scale(k)).to_interval())
            .collect()
    } else {
        Vec::new()
    };
    (psi, dpsi)
}

// Float (non-rigorous) recurrences for the Galerkin solver and plotting.

/// `Q_0..=nmax` in plain f64.
pub(crate) fn q_family_f64(nmax: usize, x: f64) -> Vec<f64> {
    let t = 2.0 * x - 1.0;
    let mut q = Vec::with_capacity(nmax + 1);
    q.push(1.0);
    if nmax >= 1 {
        q.push(t);
    }
    for n in 1..nmax {
        let next = ((2 * n + 1) as f64 * t * q[n] - n as f64 * q[n - 1]) / (n + 1) as f64;
        q.push(next);
    }
    q
}

/// `Q'_0..=nmax` in plain f64.
pub(crate) fn dq_family_f64(nmax: usize, x: f64) -> Vec<f64> {
    let q = q_family_f64(nmax, x);
    let mut dq = Vec::with_capacity(nmax + 1);
    dq.push(0.0);
    if nmax >= 1 {
        dq.push(2.0);
    }
    for n in 1..nmax {
        dq.push(dq[n - 1] + (2 * (2 * n + 1)) as f64 * q[n]);
    }
    dq
}

/// `φ_1..=n` in plain f64.
pub(crate) fn phi_family_f64(n: usize, x: f64) -> Vec<f64> {
    let q = q_family_f64(n + 1, x);
    (1..=n)
        .map(|k| (q[k - 1] - q[k + 1]) / (2 * (2 * k + 1)) as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// ShiftedLegendre: public single-polynomial evaluator
// ---------------------------------------------------------------------------

/// A single shifted Legendre polynomial `Q_n` on `[0, 1]`.
#[derive(Copy, Clone, Debug)]
pub struct ShiftedLegendre {
    n: usize,
}

impl ShiftedLegendre {
    pub fn new(n: usize) -> ShiftedLegendre {
        ShiftedLegendre { n }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Rigorous enclosure of `{ Q_n(x) : x ∈ input }`.
    pub fn eval(&self, x: Interval) -> Interval {
        q_family(self.n, x)[self.n]
    }

    /// Rigorous enclosure of the derivative `Q'_n` over the input.
    pub fn eval_deriv(&self, x: Interval) -> Interval {
        dq_family(self.n, x)[self.n]
    }

    /// Plain f64 evaluation (not validated).
    pub fn eval_f64(&self, x: f64) -> f64 {
        q_family_f64(self.n, x)[self.n]
    }
}

// ---------------------------------------------------------------------------
// LegendreFunction: 2-D spectral function with rigorous range evaluation
// ---------------------------------------------------------------------------

/// Box width (in reference coordinates) below which range evaluation
/// switches from direct contraction to the mean-value form.
pub const MEAN_VALUE_WIDTH_THRESHOLD: f64 = 0.0625; // 2^-4

/// Range evaluation strategy for [`LegendreFunction::eval_with_mode`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RangeMode {
    /// Contract per-axis basis ranges directly.
    Direct,
    /// First-order mean-value form around the box midpoint (sharper on
    /// narrow boxes).
    MeanValue,
    /// Choose by box width against [`MEAN_VALUE_WIDTH_THRESHOLD`].
    Auto,
}

/// A function `u(x, y) = Σ_{i,j=1}^{n} c_{ij} φ_i(ξ) φ_j(η)` where
/// `(ξ, η)` are the reference coordinates of `(x, y)` in `domain`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawLegendreFunction")]
pub struct LegendreFunction {
    n: usize,
    /// Row-major `n × n`: `coeffs[(i-1)*n + (j-1)]` multiplies `φ_i(ξ)φ_j(η)`.
    coeffs: Vec<f64>,
    domain: Rectangle,
}

/// Unvalidated mirror used to funnel deserialization through `new`.
#[derive(Deserialize)]
struct RawLegendreFunction {
    n: usize,
    coeffs: Vec<f64>,
    domain: Rectangle,
}

impl TryFrom<RawLegendreFunction> for LegendreFunction {
    type Error = LegendreError;
    fn try_from(raw: RawLegendreFunction) -> Result<LegendreFunction, LegendreError> {
        LegendreFunction::new(raw.n, raw.coeffs, raw.domain)
    }
}

impl LegendreFunction {
    pub fn new(n: usize, coeffs: Vec<f64>, domain: Rectangle) -> Result<Self, LegendreError> {
        if coeffs.len() != n * n {
            return Err(LegendreError::CoefficientLength {
                got: coeffs.len(),
                expected: n * n,
                n,
            });
        }
        if !coeffs.iter().all(|c| c.is_finite()) {
            return Err(LegendreError::CoefficientLength {
                got: coeffs.len(),
                expected: n * n,
                n,
            });
        }
        Ok(LegendreFunction { n, coeffs, domain })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain(&self) -> Rectangle {
        self.domain
    }

    #[inline]
    pub(crate) fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs[(i - 1) * self.n + (j - 1)]
    }

    /// Plain f64 evaluation at a physical point (not validated).
    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        let xi = (x - self.domain.x0) / (self.domain.x1 - self.domain.x0);
        let eta = (y - self.domain.y0) / (self.domain.y1 - self.domain.y0);
        if !(0.0..=1.0).contains(&xi) || !(0.0..=1.0).contains(&eta) {
            return 0.0;
        }
        let px = phi_family_f64(self.n, xi);
        let py = phi_family_f64(self.n, eta);
        let mut acc = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for j in 0..self.n {
                row += self.coeffs[i * self.n + j] * py[j];
            }
            acc += px[i] * row;
        }
        acc
    }

    /// Rigorous enclosure of `{ u(x,y) : (x,y) ∈ box ∩ closure(domain) }`,
    /// choosing the evaluation mode automatically.
    pub fn eval(&self, bx: Interval, by: Interval) -> Result<Interval, LegendreError> {
        self.eval_with_mode(bx, by, RangeMode::Auto)
    }

    /// Rigorous range enclosure with an explicit mode (see [`RangeMode`]).
    pub fn eval_with_mode(
        &self,
        bx: Interval,
        by: Interval,
        mode: RangeMode,
    ) -> Result<Interval, LegendreError> {
        let (xi, eta) = self.domain.to_reference(bx, by)?;
        let v = self.vhat_range_ref(xi, eta, mode);
        Ok(weight_range(xi) * weight_range(eta) * v)
    }

    /// Range of the weight-factored polynomial `v` over a reference box.
    pub(crate) fn vhat_range_ref(&self, xi: Interval, eta: Interval, mode: RangeMode) -> Interval {
        let use_mean_value = match mode {
            RangeMode::Direct => false,
            RangeMode::MeanValue => true,
            RangeMode::Auto => {
                xi.width() < MEAN_VALUE_WIDTH_THRESHOLD && eta.width() < MEAN_VALUE_WIDTH_THRESHOLD
            }
        };
        if !use_mean_value {
            let (px, _) = psi_family(self.n, xi, false);
            let (py, _) = psi_family(self.n, eta, false);
            self.contract(&px, &py)
        } else {
            let mx = Interval::point(xi.mid());
            let my = Interval::point(eta.mid());
            let (pmx, _) = psi_family(self.n, mx, false);
            let (pmy, _) = psi_family(self.n, my, false);
            let center = self.contract(&pmx, &pmy);
            let (px, dpx) = psi_family(self.n, xi, true);
            let (py, dpy) = psi_family(self.n, eta, true);
            let vx = self.contract(&dpx, &py);
            let vy = self.contract(&px, &dpy);
            let dx = xi - mx;
            let dy = eta - my;
            let mean_value = center + vx * dx + vy * dy;
            // Intersect with the direct form (the basis ranges are already
            // computed): both enclose the true range, so the intersection
            // is nonempty, and it keeps range enclosures monotone under
            // box refinement — a sub-box result can never escape its
            // parent's direct enclosure.
            let direct = self.contract(&px, &py);
            mean_value
                .intersect(direct)
                .expect("two enclosures of one range overlap")
        }
    }

    /// `Σ c_ij a_i b_j` with interval basis vectors (deterministic order).
    pub(crate) fn contract(&self, ax: &[Interval], by: &[Interval]) -> Interval {
        debug_assert_eq!(ax.len(), self.n);
        debug_assert_eq!(by.len(), self.n);
        let mut acc = Interval::ZERO;
        for i in 0..self.n {
            let mut row = Interval::ZERO;
            for j in 0..self.n {
                let c = self.coeffs[i * self.n + j];
                if c != 0.0 {
                    row = row + by[j] * c;
                }
            }
            acc = acc + ax[i] * row;
        }
        acc
    }

    /// Rigorous enclosure of the physical gradient `(∂u/∂x, ∂u/∂y)` over a
    /// box.  Uses `∂ξ[Σ c φφ] = -Σ c Q_i(ξ) φ_j(η)` and the chain rule.
    pub fn grad(&self, bx: Interval, by: Interval) -> Result<[Interval; 2], LegendreError> {
        let (xi, eta) = self.domain.to_reference(bx, by)?;
        let qx = q_family(self.n, xi);
        let qy = q_family(self.n, eta);
        let px = phi_family(self.n, xi);
        let py = phi_family(self.n, eta);
        let mut gx = Interval::ZERO;
        let mut gy = Interval::ZERO;
        for i in 1..=self.n {
            let mut row_x = Interval::ZERO;
            let mut row_y = Interval::ZERO;
            for j in 1..=self.n {
                let c = self.coeff(i, j);
                if c != 0.0 {
                    row_x = row_x + py[j - 1] * c;
                    row_y = row_y + qy[j] * c;
                }
            }
            gx = gx + qx[i] * row_x;
            gy = gy + px[i - 1] * row_y;
        }
        let inv_hx = Interval::ONE / self.domain.width();
        let inv_hy = Interval::ONE / self.domain.height();
        Ok([gx.neg() * inv_hx, gy.neg() * inv_hy])
    }

    /// Rigorous enclosure of the physical Laplacian over a box, from
    /// `φ''_k = -Q'_k`.
    pub fn laplacian(&self, bx: Interval, by: Interval) -> Result<Interval, LegendreError> {
        let (xi, eta) = self.domain.to_reference(bx, by)?;
        let dqx = dq_family(self.n, xi);
        let dqy = dq_family(self.n, eta);
        let px = phi_family(self.n, xi);
        let py = phi_family(self.n, eta);
        let mut lxx = Interval::ZERO;
        let mut lyy = Interval::ZERO;
        for i in 1..=self.n {
            let mut row_xx = Interval::ZERO;
            let mut row_yy = Interval::ZERO;
            for j in 1..=self.n {
                let c = self.coeff(i, j);
                if c != 0.0 {
                    row_xx = row_xx + py[j - 1] * c;
                    row_yy = row_yy + dqy[j] * c;
                }
            }
            lxx = lxx + dqx[i] * row_xx;
            lyy = lyy + px[i - 1] * row_yy;
        }
        let sx = (Interval::ONE / self.domain.width()).pow_int(2);
        let sy = (Interval::ONE / self.domain.height()).pow_int(2);
        Ok(lxx.neg() * sx + lyy.neg() * sy)
    }

    /// Float estimate of `max |u|` on a sampling grid (diagnostic only).
    pub fn max_abs_estimate(&self, samples_per_axis: usize) -> f64 {
        let m = samples_per_axis.max(2);
        let mut best = 0.0f64;
        for i in 0..=m {
            let x = self.domain.x0 + (self.domain.x1 - self.domain.x0) * (i as f64) / (m as f64);
            for j in 0..=m {
                let y =
                    self.domain.y0 + (self.domain.y1 - self.domain.y0) * (j as f64) / (m as f64);
                best = best.max(self.eval_f64(x, y).abs());
            }
        }
        best
    }
}

/// Exact-endpoint range of the boundary weight `ξ(1-ξ)` over `ξ ⊆ [0,1]`,
/// via the identity `ξ(1-ξ) = 1/4 - (ξ - 1/2)²` whose even power absorbs
/// the sign of `ξ - 1/2`.  On a box touching an endpoint the lower bound is
/// exactly 0.
pub(crate) fn weight_range(xi: Interval) -> Interval {
    let centered = xi - Interval::point(0.5);
    let range = Interval::point(0.25) - centered.pow_int(2);
    // ξ ⊆ [0,1] means the true range is within [0, 1/4]; the interval
    // computation may round below 0 by an ulp, which the intersection
    // removes without losing containment.
    range.intersect(Interval::new(0.0, 0.25)).unwrap_or(range)
}

// ---------------------------------------------------------------------------
// Verified Gauss–Legendre quadrature on (0, 1)
// ---------------------------------------------------------------------------

/// A Gauss–Legendre rule on `(0, 1)` with certified node and weight
/// enclosures: the true nodes/weights of the exact rule lie inside the
/// stored intervals (each node enclosure is validated by an interval Newton
/// contraction, and is pairwise disjoint from its neighbours).
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    order: usize,
    nodes: Vec<Interval>,
    weights: Vec<Interval>,
}

impl QuadratureRule {
    /// Builds the order-`k` rule with certified enclosures.
    pub fn gauss(order: usize) -> Result<QuadratureRule, LegendreError> {
        if order == 0 || order > MAX_QUAD_ORDER {
            return Err(LegendreError::OrderOutOfRange {
                order,
                max: MAX_QUAD_ORDER,
            });
        }
        let k = order;
        // Float approximations: Chebyshev-angle initial guesses + Newton.
        let mut approx = Vec::with_capacity(k);
        for i in 0..k {
            // Roots of P_k on (-1,1), descending; map to (0,1) ascending.
            let theta = core::f64::consts::PI * (4.0 * (i as f64) + 3.0) / (4.0 * (k as f64) + 2.0);
            let mut t = -theta.cos(); // ascending in i
            for _ in 0..60 {
                let x = 0.5 * (t + 1.0);
                let q = q_family_f64(k, x);
                let dq = dq_family_f64(k, x);
                // d/dt = (1/2) d/dx
                let step = q[k] / (0.5 * dq[k]);
                t -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            approx.push(0.5 * (t + 1.0));
        }
        approx.sort_by(|a, b| a.partial_cmp(b).unwrap());

        // Certify each root by interval Newton contraction.
        let mut nodes = Vec::with_capacity(k);
        for (i, &x0) in approx.iter().enumerate() {
            let node = certify_root(k, x0)
                .ok_or(LegendreError::NodeCertification { order, index: i })?;
            nodes.push(node);
        }
        // Structural checks: ascending, pairwise disjoint, strictly inside.
        for i in 0..k {
            let ok_inside = nodes[i].lo() > 0.0 && nodes[i].hi() < 1.0;
            let ok_disjoint = i == 0 || nodes[i - 1].hi() < nodes[i].lo();
            if !(ok_inside && ok_disjoint) {
                return Err(LegendreError::NodeCertification { order, index: i });
            }
        }

        // Weights w_i = 1 / (x(1-x) Q'_k(x)^2) over the certified enclosures.
        let mut weights = Vec::with_capacity(k);
        for &x in &nodes {
            let dq = dq_family(k, x);
            let w = Interval::ONE
                .div(weight_range_strict(x) * dq[k].pow_int(2))
                .map_err(|_| LegendreError::NodeCertification { order, index: 0 })?;
            weights.push(w);
        }
        Ok(QuadratureRule {
            order,
            nodes,
            weights,
        })
    }

    /// Cached rule lookup (rules are deterministic, so sharing is safe).
    pub fn gauss_cached(order: usize) -> Result<Arc<QuadratureRule>, LegendreError> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().unwrap().get(&order) {
            return Ok(rule.clone());
        }
        let rule = Arc::new(QuadratureRule::gauss(order)?);
        cache.lock().unwrap().insert(order, rule.clone());
        Ok(rule)
    }

    /// Smallest rule order whose exactness degree covers `degree`.
    pub fn order_for_degree(degree: usize) -> usize {
        degree / 2 + 1
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[Interval] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Interval] {
        &self.weights
    }

    /// Highest polynomial degree the rule integrates exactly.
    pub fn max_exact_degree(&self) -> usize {
        2 * self.order - 1
    }

    /// Encloses `∫₀¹ g` for a polynomial `g` of degree at most `degree`,
    /// given a pointwise range enclosure `g_encl` of `g`.
    ///
    /// Soundness: the exact rule integrates `g` exactly, the true nodes and
    /// weights lie in the stored enclosures, and `g_encl(X) ⊇ g(X)`, so the
    /// interval sum contains `∫ g`.  The degree guard is what makes the
    /// first premise true — callers must not understate the degree.
    pub fn integrate_poly_1d(
        &self,
        degree: usize,
        mut g_encl: impl FnMut(Interval) -> Interval,
    ) -> Result<Interval, LegendreError> {
        if degree > self.max_exact_degree() {
            return Err(LegendreError::DegreeTooHigh {
                degree,
                max: self.max_exact_degree(),
                order: self.order,
            });
        }
        let mut acc = Interval::ZERO;
        for (x, w) in self.nodes.iter().zip(self.weights.iter()) {
            acc = acc + *w * g_encl(*x);
        }
        Ok(acc)
    }
}

/// Like [`weight_range`] but without the `[0, 1/4]` clamp (nodes are strict
/// interior points, so the product is strictly positive).
fn weight_range_strict(x: Interval) -> Interval {
    x * (Interval::ONE - x)
}

/// Interval Newton certification of a simple root of `Q_k` near `x0`.
/// Returns an enclosure `X` with a unique root of `Q_k` in `X`.
fn certify_root(k: usize, x0: f64) -> Option<Interval> {
    // Initial bracket: a couple of hundred ulps around the float root; widen
    // geometrically if contraction fails.
    let mut half_width = (x0.abs() * 1e-13).max(1e-15);
    for _attempt in 0..6 {
        let mut x = Interval::new(x0 - half_width, x0 + half_width);
        let mut certified = false;
        for _iter in 0..4 {
            let m = Interval::point(x.mid());
            let qm = q_family(k, m)[k];
            let dqx = dq_family(k, x)[k];
            let quotient = match qm.div(dqx) {
                Ok(q) => q,
                Err(_) => break, // derivative enclosure contains 0: widen
            };
            let candidate = m - quotient;
            if candidate.is_interior_to(x) {
                certified = true;
            }
            match candidate.intersect(x) {
                Ok(next) => {
                    if certified {
                        x = next;
                    } else {
                        break;
                    }
                }
                Err(_) => return None, // no root in the bracket at all
            }
        }
        if certified {
            return Some(x);
        }
        half_width *= 32.0;
    }
    None
}

// ---------------------------------------------------------------------------
// Exact closed forms for the 1-D Galerkin matrices
// ---------------------------------------------------------------------------

/// Diagonal 1-D stiffness entry `∫₀¹ φ'_n φ'_n = 1/(2n+1)` (off-diagonals
/// vanish identically because `φ'_n = -Q_n`).
pub fn stiffness_diag(n: usize) -> Interval {
    Interval::ONE / Interval::point((2 * n + 1) as f64)
}

/// 1-D mass matrix entry `∫₀¹ φ_i φ_j` (1-based indices); pentadiagonal:
/// nonzero only for `|i - j| ∈ {0, 2}`.
pub fn mass_entry(i: usize, j: usize) -> Interval {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    if i == j {
        // [1/(2i-1) + 1/(2i+3)] / (4 (2i+1)^2)
        let a = Interval::ONE / Interval::point((2 * i - 1) as f64);
        let b = Interval::ONE / Interval::point((2 * i + 3) as f64);
        let d = Interval::point(4.0) * Interval::point((2 * i + 1) as f64).pow_int(2);
        (a + b) / d
    } else if j == i + 2 {
        // -1 / (4 (2i+1)(2i+3)(2i+5))
        let d = Interval::point(4.0)
            * Interval::point((2 * i + 1) as f64)
            * Interval::point((2 * i + 3) as f64)
            * Interval::point((2 * i + 5) as f64);
        (Interval::ONE / d).neg()
    } else {
        Interval::ZERO
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
