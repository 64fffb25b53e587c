//! Floating-point spectral Galerkin solver (Newton iteration).
//!
//! Nothing in this module is validated: it produces *candidate*
//! approximations `û` whose quality is later established rigorously by the
//! `rigor`/`eigen`/`certify` modules.  Accordingly, everything here runs in
//! plain f64 with non-verified Gauss rules.
//!
//! The discretisation uses the integrated-Legendre Dirichlet basis of the
//! `legendre` module.  Because the 1-D stiffness matrix is the diagonal
//! `1/(2k+1)` and the mass matrix is pentadiagonal, the 2-D linear part is
//! applied as `D C M + M C D` with tiny dense 1-D factors.
//!
//! When the problem is invariant under `x ↦ 1-x` and `y ↦ 1-y` (always the
//! case here: the nonlinearity is autonomous and the domain is a
//! rectangle), the solver can restrict to the symmetric subspace spanned by
//! odd-index modes (`φ_k(1-x) = (-1)^{k+1} φ_k(x)`), which quarters the
//! unknown count and — more importantly — returns a bitwise symmetric
//! approximation, so downstream eigenvalue problems decouple into parity
//! blocks.

use crate::interval::Interval;
use crate::legendre::{
    mass_entry, phi_family_f64, q_family_f64, stiffness_diag, LegendreFunction, Rectangle,
};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from problem validation and the Newton solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalerkinError {
    #[error("nonlinear term exponent {0} is below 2")]
    ExponentTooSmall(u32),
    #[error("basis size must be at least 1")]
    EmptyBasis,
    #[error("initial guess has basis size {got}, expected at most {max}")]
    InitialGuessTooLarge { got: usize, max: usize },
    #[error("Newton iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian encountered at iteration {0}")]
    SingularJacobian(usize),
}

/// One power term `a · t|t|^{e-1}` of the nonlinearity.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearTerm {
    /// Exponent `e >= 2`.
    pub exponent: u32,
    /// Coefficient enclosure `a`.
    pub coeff: Interval,
}

/// Sign classification of the nonlinear coefficients (for strategy
/// selection).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoeffSigns {
    /// No nonlinear terms at all.
    NoTerms,
    /// Every coefficient is `>= 0` (and at least one is `> 0`).
    AllNonnegative,
    /// Every coefficient is `<= 0` (and at least one is `< 0`).
    AllNonpositive,
    /// Coefficients of both signs (or a coefficient enclosure straddling 0).
    Mixed,
}

/// The boundary value problem `-Δu = f(u)` on a rectangle with homogeneous
/// Dirichlet data, where `f(t) = λ t + Σ aᵢ t|t|^{i-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    lambda: Interval,
    terms: Vec<NonlinearTerm>,
    domain: Rectangle,
}

impl ProblemSpec {
    /// Creates a problem; exponents must be `>= 2`.  Duplicate exponents are
    /// merged by adding their coefficients; zero-coefficient terms are kept
    /// (their presence is harmless and preserves the caller's intent).
    pub fn new(
        lambda: Interval,
        terms: Vec<(u32, Interval)>,
        domain: Rectangle,
    ) -> Result<ProblemSpec, GalerkinError> {
        let mut merged: Vec<NonlinearTerm> = Vec::new();
        for (exponent, coeff) in terms {
            if exponent < 2 {
                return Err(GalerkinError::ExponentTooSmall(exponent));
            }
            match merged.iter_mut().find(|t| t.exponent == exponent) {
                Some(t) => t.coeff = t.coeff + coeff,
                None => merged.push(NonlinearTerm { exponent, coeff }),
            }
        }
        merged.sort_by_key(|t| t.exponent);
        Ok(ProblemSpec {
            lambda,
            terms: merged,
            domain,
        })
    }

    /// The superlinear power problem `-Δu = u|u|^{p-1}` on the unit square.
    pub fn emden(p: u32) -> ProblemSpec {
        ProblemSpec::new(
            Interval::ZERO,
            vec![(p, Interval::ONE)],
            Rectangle::UNIT,
        )
        .expect("p >= 2 by construction")
    }

    /// The balanced double-well problem `-Δu = ε⁻²(u - u³)` on the unit
    /// square.
    pub fn allen_cahn(epsilon: Interval) -> ProblemSpec {
        let lam = Interval::ONE / epsilon.pow_int(2);
        ProblemSpec::new(lam, vec![(3, lam.neg())], Rectangle::UNIT)
            .expect("exponent 3 is valid")
    }

    pub fn lambda(&self) -> Interval {
        self.lambda
    }

    pub fn terms(&self) -> &[NonlinearTerm] {
        &self.terms
    }

    pub fn domain(&self) -> Rectangle {
        self.domain
    }

    /// Largest nonlinear exponent (0 when there are no terms).
    pub fn max_exponent(&self) -> u32 {
        self.terms.iter().map(|t| t.exponent).max().unwrap_or(0)
    }

    /// True when every term has odd exponent, i.e. `f` is a polynomial
    /// (`t|t|^{e-1} = t^e` for odd `e`).
    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(|t| t.exponent % 2 == 1)
    }

    /// Sign classification of the nonzero nonlinear coefficients.
    pub fn coeff_signs(&self) -> CoeffSigns {
        let mut any_pos = false;
        let mut any_neg = false;
        let mut any_mixed = false;
        for t in &self.terms {
            if t.coeff.lo() == 0.0 && t.coeff.hi() == 0.0 {
                continue;
            }
            if t.coeff.lo() >= 0.0 {
                any_pos = true;
            } else if t.coeff.hi() <= 0.0 {
                any_neg = true;
            } else {
                any_mixed = true;
            }
        }
        match (any_pos, any_neg, any_mixed) {
            (false, false, false) => CoeffSigns::NoTerms,
            (true, false, false) => CoeffSigns::AllNonnegative,
            (false, true, false) => CoeffSigns::AllNonpositive,
            _ => CoeffSigns::Mixed,
        }
    }

    /// Detects the exact balanced double-well shape `f(t) = λ(t - t³)` with
    /// `λ > 0` (the only form for which the vacuum-comparison positivity
    /// upgrade applies).  Returns `λ`.
    pub fn balanced_cubic_lambda(&self) -> Option<Interval> {
        if self.terms.len() != 1 || self.lambda.lo() <= 0.0 {
            return None;
        }
        let t = &self.terms[0];
        if t.exponent == 3 && t.coeff == self.lambda.neg() {
            Some(self.lambda)
        } else {
            None
        }
    }

    /// Pointwise enclosure of `f(u)` for an enclosure of `u`.
    pub fn f_interval(&self, u: Interval) -> Interval {
        let mut acc = self.lambda * u;
        for t in &self.terms {
            acc = acc + t.coeff * u.signed_pow(t.exponent);
        }
        acc
    }

    /// Pointwise enclosure of `f'(u) = λ + Σ aᵢ i |u|^{i-1}`.
    pub fn fprime_interval(&self, u: Interval) -> Interval {
        let mut acc = self.lambda;
        for t in &self.terms {
            acc = acc + t.coeff * (t.exponent as f64) * u.abs().pow_int(t.exponent - 1);
        }
        acc
    }

    /// Float evaluation of `f` (midpoint coefficients; not validated).
    pub fn f_f64(&self, u: f64) -> f64 {
        let mut acc = self.lambda.mid() * u;
        for t in &self.terms {
            acc += t.coeff.mid() * u * u.abs().powi(t.exponent as i32 - 1);
        }
        acc
    }

    /// Float evaluation of `f'` (midpoint coefficients; not validated).
    pub fn fprime_f64(&self, u: f64) -> f64 {
        let mut acc = self.lambda.mid();
        for t in &self.terms {
            acc += t.coeff.mid() * t.exponent as f64 * u.abs().powi(t.exponent as i32 - 1);
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Float Gauss rules (non-verified)
// ---------------------------------------------------------------------------

/// Float Gauss–Legendre rule on (0, 1): `(nodes, weights)`.
pub(crate) fn gauss_f64(order: usize) -> (Vec<f64>, Vec<f64>) {
    let k = order;
    let mut nodes = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    for i in 0..k {
        let theta = core::f64::consts::PI * (4.0 * (i as f64) + 3.0) / (4.0 * (k as f64) + 2.0);
        let mut t = -theta.cos();
        for _ in 0..60 {
            let x = 0.5 * (t + 1.0);
            let q = q_family_f64(k, x);
            let dq = crate::legendre::dq_family_f64(k, x);
            let step = q[k] / (0.5 * dq[k]);
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let x = 0.5 * (t + 1.0);
        let dq = crate::legendre::dq_family_f64(k, x);
        nodes.push(x);
        weights.push(1.0 / (x * (1.0 - x) * dq[k] * dq[k]));
    }
    (nodes, weights)
}

// ---------------------------------------------------------------------------
// Newton solver
// ---------------------------------------------------------------------------

/// Options for [`solve`].
#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Basis size per axis (modes `φ_1..φ_n`).
    pub n: usize,
    /// Target peak height of the initial guess; `None` balances the scale
    /// of the lowest mode against the nonlinearity automatically.
    pub amplitude: Option<f64>,
    /// Optional initial iterate (coefficients are copied/truncated/padded
    /// to size `n`); overrides `amplitude`.
    pub initial: Option<LegendreFunction>,
    /// Absolute tolerance on the coefficient-space residual 2-norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Restrict to the `x ↦ 1-x`, `y ↦ 1-y` symmetric subspace (odd-index
    /// modes).  The returned function is exactly symmetric.
    pub symmetric: bool,
}

impl SolveOptions {
    pub fn new(n: usize) -> SolveOptions {
        SolveOptions {
            n,
            amplitude: None,
            initial: None,
            tol: 1e-12,
            max_iter: 50,
            symmetric: true,
        }
    }
}

/// Convergence report for a Newton solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final coefficient-space residual 2-norm.
    pub residual_norm: f64,
    pub converged: bool,
}

/// Computes a floating-point Galerkin approximation of a solution of
/// `-Δu = f(u)`, `u|∂Ω = 0`.
pub fn solve(
    problem: &ProblemSpec,
    opts: &SolveOptions,
) -> Result<(LegendreFunction, SolveReport), GalerkinError> {
    if opts.n == 0 {
        return Err(GalerkinError::EmptyBasis);
    }
    let n = opts.n;
    let modes: Vec<usize> = if opts.symmetric {
        (1..=n).step_by(2).collect()
    } else {
        (1..=n).collect()
    };
    let m = modes.len();

    // Quadrature order: integrands are f(û)·φ with per-axis degree
    // max_exp·(n+1) + (n+1); a couple of extra points cost nothing.
    let deg = (problem.max_exponent().max(1) as usize + 1) * (n + 1);
    let order = deg / 2 + 2;
    let (nodes, weights) = gauss_f64(order);
    let k = nodes.len();

    // Basis tables P[s][a] = φ_modes[a](node_s) and the 1-D matrices.
    let mut p_tab = DMatrix::<f64>::zeros(k, m);
    for (s, &x) in nodes.iter().enumerate() {
        let phis = phi_family_f64(n, x);
        for (a, &mode) in modes.iter().enumerate() {
            p_tab[(s, a)] = phis[mode - 1];
        }
    }
    let mut d1 = DMatrix::<f64>::zeros(m, m);
    let mut m1 = DMatrix::<f64>::zeros(m, m);
    for (a, &ma) in modes.iter().enumerate() {
        d1[(a, a)] = stiffness_diag(ma).mid();
        for (b, &mb) in modes.iter().enumerate() {
            m1[(a, b)] = mass_entry(ma, mb).mid();
        }
    }

    // Geometry scaling: on a general rectangle with side lengths hx, hy the
    // weak form of -Δ scales the x-stiffness by hy/hx and the y-stiffness
    // by hx/hy, while the load term scales by hx·hy.
    let hx = problem.domain().width().mid();
    let hy = problem.domain().height().mid();
    let (sx, sy, jac) = (hy / hx, hx / hy, hx * hy);

    // Initial iterate.
    let mut c = initial_coeffs(problem, n, &modes, opts, &nodes, &weights, &p_tab, &d1, &m1, sx, sy, jac);

    // Newton iteration with residual-decreasing damping.  Flattening is
    // row-major, matching the Jacobian's (a*m + b) indexing.
    let flat = |cm: &DMatrix<f64>| -> DVector<f64> {
        DVector::from_fn(m * m, |idx, _| cm[(idx / m, idx % m)])
    };
    let residual = |cm: &DMatrix<f64>| -> DMatrix<f64> {
        // Linear part: sx·D C M + sy·M C D (scaled), minus the load.
        let lin = &d1 * cm * &m1 * sx + &m1 * cm * &d1 * sy;
        // û at the tensor nodes: (P C Pᵀ).
        let u_nodes = &p_tab * cm * p_tab.transpose();
        let mut wf = DMatrix::<f64>::zeros(k, k);
        for s in 0..k {
            for t in 0..k {
                wf[(s, t)] = weights[s] * weights[t] * problem.f_f64(u_nodes[(s, t)]) * jac;
            }
        }
        let load = p_tab.transpose() * wf * &p_tab;
        lin - load
    };

    let mut res = residual(&c);
    let mut res_norm = res.norm();
    let mut iterations = 0;
    for iter in 0..opts.max_iter {
        if res_norm <= opts.tol {
            break;
        }
        iterations = iter + 1;
        // Jacobian: A2 - K with K[(ab),(cd)] = ∫ f'(û) φ_a φ_c (x) φ_b φ_d (y).
        let u_nodes = &p_tab * &c * p_tab.transpose();
        let mut jmat = DMatrix::<f64>::zeros(m * m, m * m);
        // A2 part via Kronecker structure.
        for a in 0..m {
            for b in 0..m {
                let row = a * m + b;
                for cc in 0..m {
                    for dd in 0..m {
                        let col = cc * m + dd;
                        let v = sx * d1[(a, cc)] * m1[(b, dd)] + sy * m1[(a, cc)] * d1[(b, dd)];
                        jmat[(row, col)] = v;
                    }
                }
            }
        }
        // K part: per x-node inner contraction.
        // S_s[b,d] = Σ_t w_t f'(u(s,t)) P[t,b] P[t,d]
        let mut s_stack: Vec<DMatrix<f64>> = Vec::with_capacity(k);
        for s in 0..k {
            let mut fs = DVector::<f64>::zeros(k);
            for t in 0..k {
                fs[t] = weights[t] * problem.fprime_f64(u_nodes[(s, t)]);
            }
            // S_s = Pᵀ diag(fs) P
            let mut scaled = p_tab.clone();
            for t in 0..k {
                for b in 0..m {
                    scaled[(t, b)] *= fs[t];
                }
            }
            s_stack.push(p_tab.transpose() * scaled);
        }
        for a in 0..m {
            for cc in 0..m {
                let mut block = DMatrix::<f64>::zeros(m, m);
                for s in 0..k {
                    let wac = weights[s] * p_tab[(s, a)] * p_tab[(s, cc)];
                    if wac != 0.0 {
                        block += &s_stack[s] * wac;
                    }
                }
                for b in 0..m {
                    for dd in 0..m {
                        jmat[(a * m + b, cc * m + dd)] -= jac * block[(b, dd)];
                    }
                }
            }
        }

        let rhs = -flat(&res);
        let lu = jmat.lu();
        let delta = lu.solve(&rhs).ok_or(GalerkinError::SingularJacobian(iter))?;
        let delta_m = DMatrix::from_fn(m, m, |a, b| delta[a * m + b]);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..10 {
            let trial = &c + &delta_m * alpha;
            let trial_res = residual(&trial);
            let trial_norm = trial_res.norm();
            if trial_norm < res_norm || trial_norm <= opts.tol {
                c = trial;
                res = trial_res;
                res_norm = trial_norm;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Take the full step once; if the residual then fails to
            // decrease again we will run out of iterations and report.
            c += &delta_m;
            res = residual(&c);
            res_norm = res.norm();
        }
        if delta.norm() < 1e-15 * c.norm().max(1.0) {
            break;
        }
    }

    let converged = res_norm <= opts.tol;
    if !converged {
        return Err(GalerkinError::NoConvergence {
            iterations,
            residual: res_norm,
        });
    }

    // Expand to the full n×n coefficient array (zeros on skipped modes keep
    // the symmetry exact).
    let mut coeffs = vec![0.0; n * n];
    for (a, &ma) in modes.iter().enumerate() {
        for (b, &mb) in modes.iter().enumerate() {
            coeffs[(ma - 1) * n + (mb - 1)] = c[(a, b)];
        }
    }
    let u = LegendreFunction::new(n, coeffs, problem.domain()).expect("sizes match");
    Ok((
        u,
        SolveReport {
            iterations,
            residual_norm: res_norm,
            converged,
        },
    ))
}

/// Builds the initial coefficient matrix on the restricted mode set.
#[allow(clippy::too_many_arguments)]
fn initial_coeffs(
    problem: &ProblemSpec,
    n: usize,
    modes: &[usize],
    opts: &SolveOptions,
    nodes: &[f64],
    weights: &[f64],
    p_tab: &DMatrix<f64>,
    d1: &DMatrix<f64>,
    m1: &DMatrix<f64>,
    sx: f64,
    sy: f64,
    jac: f64,
) -> DMatrix<f64> {
    let m = modes.len();
    if let Some(init) = &opts.initial {
        let mut c = DMatrix::<f64>::zeros(m, m);
        let nn = init.n();
        for (a, &ma) in modes.iter().enumerate() {
            for (b, &mb) in modes.iter().enumerate() {
                if ma <= nn && mb <= nn {
                    c[(a, b)] = init.coeffs()[(ma - 1) * nn + (mb - 1)];
                }
            }
        }
        return c;
    }

    // 1-D L² projection of sin(πx) onto the selected modes: M p = b.
    let k = nodes.len();
    let mut b = DVector::<f64>::zeros(m);
    for (a, &mode) in modes.iter().enumerate() {
        let mut acc = 0.0;
        for s in 0..k {
            let phis = phi_family_f64(n, nodes[s]);
            acc += weights[s] * (core::f64::consts::PI * nodes[s]).sin() * phis[mode - 1];
        }
        b[a] = acc;
    }
    let p = m1
        .clone()
        .lu()
        .solve(&b)
        .unwrap_or_else(|| DVector::from_element(m, 0.0));
    let g = &p * p.transpose(); // sin⊗sin projection coefficients

    let g_nodes = p_tab * &g * p_tab.transpose();
    let peak = g_nodes.iter().cloned().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);

    if let Some(amp) = opts.amplitude {
        return &g * (amp / peak);
    }

    // Scalar balance: find s > 0 with s·(∇ĝ,∇ĝ) = (f(s ĝ), ĝ).
    let a_g = (d1 * &g * m1 * sx + m1 * &g * d1 * sy)
        .iter()
        .zip(g.iter())
        .map(|(x, y)| x * y)
        .sum::<f64>();
    let h = |s: f64| -> f64 {
        let mut rhs = 0.0;
        for i in 0..k {
            for j in 0..k {
                let gv = g_nodes[(i, j)];
                rhs += weights[i] * weights[j] * problem.f_f64(s * gv) * gv * jac;
            }
        }
        s * a_g - rhs
    };
    // Scan for a sign change over peak heights spanning [1e-3, 1e3].
    let s_unit = 1.0 / peak;
    let mut lo = 1e-3 * s_unit;
    let mut hi_s = lo;
    let mut found = false;
    let h_lo0 = h(lo);
    for step in 1..=120 {
        let cand = 1e-3 * s_unit * (1e6f64).powf(step as f64 / 120.0);
        if h(cand) * h_lo0 < 0.0 {
            hi_s = cand;
            found = true;
            break;
        }
        lo = cand;
    }
    let s = if found {
        let mut a = lo;
        let mut b2 = hi_s;
        let ha = h(a);
        for _ in 0..80 {
            let mid = 0.5 * (a + b2);
            if h(mid) * ha <= 0.0 {
                b2 = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b2)
    } else {
        s_unit // fall back to peak height 1
    };
    &g * s
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
