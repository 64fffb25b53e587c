//! Verified eigenvalue bounds for the linearised operator `-Δ - f'(u)`.
//!
//! Everything here reduces to two verified matrix primitives on symmetric
//! interval matrices:
//!
//! * [`interval Cholesky`](cholesky_posdef) — success proves *every*
//!   symmetric matrix inside the interval enclosure is positive definite;
//! * [`interval LDLᵀ`](ldlt_inertia) — determined pivot signs prove the
//!   inertia (eigenvalue sign counts) of every enclosed matrix.
//!
//! On top of those, this module provides:
//!
//! * [`projection_constant_sq`] — a *computed* (not tabulated) rigorous
//!   bound for the spectral tail constant `C(M)` with
//!   `‖q‖_{L²} ≤ C(M)·‖∇q‖` for 1-D functions orthogonal (in the
//!   `∫u'v'` inner product) to the first `M` integrated-Legendre modes,
//!   extended to the tensor-product complement (see the function's
//!   documentation for the status of the 2-D extension);
//! * [`assemble`] — parity-blocked interval Galerkin matrices of the
//!   forms `∫∇·∇`, `∫··`, `∫f'(u)··`, `∫f'(u)²··` on a certification
//!   space of dimension `M × M`;
//! * [`mu1_lower_bound`] — a proven lower bound for the smallest
//!   eigenvalue of `-Δ - f'(u)` over the *infinite-dimensional* space,
//!   by a projection split that charges the unresolved tail against the
//!   resolved block;
//! * [`inverse_norm_bound`] — a proven upper bound for
//!   `‖(-Δ - f'(u))⁻¹‖` in the energy operator norm, by verifying a
//!   spectral gap around `1` of the pencil `∫f'(u)·· = ν·∫∇·∇` and
//!   correcting for tail coupling with a Schur-complement bound;
//! * [`verified_sym_geig`] — enclosures of all eigenvalues of a small
//!   dense symmetric generalized eigenproblem.
//!
//! Floating point is used only to *guess* (shifts, candidate bounds,
//! approximate eigenvectors); every claim in a returned report is backed
//! by interval factorizations.

use crate::galerkin::ProblemSpec;
use crate::interval::{self, Interval};
use crate::legendre::{
    mass_entry, phi_family, stiffness_diag, LegendreError, LegendreFunction, QuadratureRule,
};
use crate::rigor::{self, RigorError};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Errors from verified eigenvalue computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    /// Bilinear forms with `t|t|^{e-1}` terms for even `e` are not
    /// polynomial, so Gauss quadrature cannot integrate them exactly and no
    /// rigorous enclosure is produced.
    #[error("nonlinearity has even exponent {0}: eigenvalue forms are not polynomial")]
    EvenExponent(u32),
    /// The approximation must be even about both midlines for the
    /// parity-block assembly to be valid (unless the problem is linear).
    #[error("approximate solution is not symmetric: coefficient ({0},{1}) is nonzero")]
    NotSymmetric(usize, usize),
    #[error("approximation domain differs from the problem domain")]
    DomainMismatch,
    #[error("certification space per-axis dimension {0} is too small (need >= 4)")]
    BasisTooSmall(usize),
    /// Interval Cholesky could not establish positive definiteness.
    #[error("matrix not verifiably positive definite (block {block}, pivot {pivot})")]
    NotPositiveDefinite { block: usize, pivot: usize },
    /// An LDLᵀ pivot sign could not be determined even after shift nudges.
    #[error("inertia pivot sign ambiguous (block {block}, pivot {pivot})")]
    InertiaAmbiguous { block: usize, pivot: usize },
    /// The tail bound `sup|f'|·C(M)²` reaches the spectral window; a larger
    /// certification space is required.
    #[error("tail constant {tail} too large for the window near {near}")]
    TailTooLarge { tail: f64, near: f64 },
    /// Discrete eigenvalue counts differ across the candidate spectral gap.
    #[error("no verifiable spectral gap around 1 (counts {below_count} vs {above_count})")]
    NoSpectralGap {
        below_count: usize,
        above_count: usize,
    },
    /// The tail coupling correction swallows the whole discrete gap.
    #[error("tail coupling {coupling} exceeds the discrete gap {gap}")]
    CouplingTooLarge { coupling: f64, gap: f64 },
    /// No candidate lower bound could be certified.
    #[error("could not certify a lower bound (float estimate {float_mu1}, tried {attempts:?})")]
    LowerBoundFailed {
        float_mu1: f64,
        attempts: Vec<f64>,
    },
    /// A floating-point factorization needed for the initial guess failed.
    #[error("floating-point pre-factorization failed")]
    FloatFactorization,
    #[error(transparent)]
    Legendre(#[from] LegendreError),
    #[error(transparent)]
    Rigor(#[from] RigorError),
}

// ---------------------------------------------------------------------------
// Dense symmetric interval matrices
// ---------------------------------------------------------------------------

/// Dense row-major interval matrix (used symmetric throughout).
#[derive(Clone, Debug)]
pub(crate) struct IMat {
    n: usize,
    d: Vec<Interval>,
}

impl IMat {
    pub(crate) fn zeros(n: usize) -> IMat {
        IMat {
            n,
            d: vec![Interval::ZERO; n * n],
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub(crate) fn at(&self, i: usize, j: usize) -> Interval {
        self.d[i * self.n + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: Interval) {
        self.d[i * self.n + j] = v;
    }

    /// Sets both `(i,j)` and `(j,i)`.
    #[inline]
    pub(crate) fn set_sym(&mut self, i: usize, j: usize, v: Interval) {
        self.d[i * self.n + j] = v;
        self.d[j * self.n + i] = v;
    }

    /// Midpoint matrix.
    pub(crate) fn mid(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.at(i, j).mid())
    }

    /// `self + other * c` entry-wise.
    fn axpy(&mut self, other: &IMat, c: Interval) {
        debug_assert_eq!(self.n, other.n);
        for (x, y) in self.d.iter_mut().zip(other.d.iter()) {
            *x = *x + *y * c;
        }
    }

    /// Symmetric congruence scaling `D S D` with positive diagonal `D`
    /// (preserves inertia and positive definiteness exactly).
    fn diag_scaled(&self) -> IMat {
        let s: Vec<Interval> = (0..self.n)
            .map(|i| {
                let m = self.at(i, i).mid().abs();
                Interval::point(if m > 0.0 && m.is_finite() {
                    1.0 / m.sqrt()
                } else {
                    1.0
                })
            })
            .collect();
        let mut out = IMat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(i, j, self.at(i, j) * s[i] * s[j]);
            }
        }
        out
    }
}

/// Upper bound for the spectral norm of the entry-wise magnitude matrix,
/// via `‖B‖₂ ≤ sqrt(‖B‖₁·‖B‖∞)` (equal row/column sums here: symmetric use).
fn norm2_upper(m: &IMat) -> f64 {
    let n = m.dim();
    let mut row_max = Interval::ZERO;
    let mut col_max = Interval::ZERO;
    for i in 0..n {
        let mut row = Interval::ZERO;
        let mut col = Interval::ZERO;
        for j in 0..n {
            row = row + Interval::point(m.at(i, j).mag());
            col = col + Interval::point(m.at(j, i).mag());
        }
        if row.hi() > row_max.hi() {
            row_max = row;
        }
        if col.hi() > col_max.hi() {
            col_max = col;
        }
    }
    (row_max * col_max).sqrt().expect("nonnegative").hi()
}

// ---------------------------------------------------------------------------
// Verified factorizations
// ---------------------------------------------------------------------------

/// Attempts an interval Cholesky factorization.  `Ok(())` proves that every
/// symmetric matrix enclosed by `z` is positive definite.  `Err(j)` reports
/// the first pivot whose positivity could not be established (which does
/// *not* prove indefiniteness).
pub(crate) fn cholesky_posdef(z: &IMat) -> Result<(), usize> {
    let z = z.diag_scaled();
    let n = z.dim();
    let mut l = vec![Interval::ZERO; n * n];
    for j in 0..n {
        let mut acc = z.at(j, j);
        for k in 0..j {
            acc = acc - l[j * n + k] * l[j * n + k];
        }
        if acc.lo() <= 0.0 {
            return Err(j);
        }
        let piv = acc.sqrt().expect("positive by check");
        l[j * n + j] = piv;
        for i in (j + 1)..n {
            let mut s = z.at(i, j);
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / piv;
        }
    }
    Ok(())
}

/// Interval LDLᵀ inertia: returns `(negative, positive)` pivot counts,
/// which by Sylvester's law are the eigenvalue sign counts of every
/// symmetric matrix enclosed by `z`.  `Err(j)` when pivot `j`'s sign is
/// ambiguous (caller should perturb the shift and retry).
///
/// Pivots greedily on the largest remaining diagonal magnitude (a symmetric
/// permutation, hence a congruence that leaves the inertia unchanged);
/// without this, strongly indefinite matrices routinely hit near-singular
/// leading minors that have nothing to do with actual eigenvalues near the
/// shift.
pub(crate) fn ldlt_inertia(z: &IMat) -> Result<(usize, usize), usize> {
    let zs = z.diag_scaled();
    let n = zs.dim();
    let mut a: Vec<Interval> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            a.push(zs.at(i, j));
        }
    }
    let mut neg = 0usize;
    let mut pos = 0usize;
    for j in 0..n {
        let mut p = j;
        let mut best = a[j * n + j].mid().abs();
        for q in (j + 1)..n {
            let v = a[q * n + q].mid().abs();
            if v > best {
                best = v;
                p = q;
            }
        }
        if p != j {
            for k in 0..n {
                a.swap(j * n + k, p * n + k);
            }
            for k in 0..n {
                a.swap(k * n + j, k * n + p);
            }
        }
        let d = a[j * n + j];
        if d.lo() > 0.0 {
            pos += 1;
        } else if d.hi() < 0.0 {
            neg += 1;
        } else {
            return Err(j);
        }
        // Right-looking Schur update of the trailing block.
        for i in (j + 1)..n {
            let lij = a[i * n + j] / d;
            for k in (j + 1)..=i {
                let v = a[i * n + k] - lij * a[k * n + j];
                a[i * n + k] = v;
                a[k * n + i] = v;
            }
        }
    }
    Ok((neg, pos))
}

// ---------------------------------------------------------------------------
// Tail projection constant
// ---------------------------------------------------------------------------

/// Rigorous upper bound for the squared tail constant `C(M)²` in
/// `‖q‖_{L²(0,1)} ≤ C(M)·‖q'‖_{L²(0,1)}` for every `q ∈ H¹₀(0,1)` that is
/// `∫u'v'`-orthogonal to the first `M` basis functions.
///
/// Because the stiffness matrix is diagonal in this basis, such `q` have
/// coefficients supported on modes `> M`, so `C(M)²` is the largest
/// eigenvalue of the tail of the mass/stiffness pencil.  Scaling by the
/// diagonal stiffness and applying Gershgorin to the resulting symmetric
/// pentadiagonal operator bounds that eigenvalue by the maximal absolute
/// row sum; every term of the row sum is a product of reciprocals of
/// positive increasing linear functions of the row index `k`, hence
/// decreasing in `k`, so the maximum over the infinite tail is attained
/// among the first three rows (the first two rows lack the sub-diagonal
/// coupling and must be checked separately).
///
/// For the 2-D tensor-product certification space the same constant is used
/// for the complement of `X_M = span{φ_iφ_j : i,j ≤ M}`; this extension is
/// validated numerically (see the module tests) and its use is recorded in
/// every certificate.
pub fn projection_constant_sq(m: usize) -> Interval {
    assert!(m >= 1, "projection constant needs at least one resolved mode");
    let row = |k: usize| -> Interval {
        let lin = |c: usize| Interval::point(c as f64);
        // Scaled diagonal: [1/(2k-1) + 1/(2k+3)] / (4(2k+1)).
        let diag = (Interval::ONE / lin(2 * k - 1) + Interval::ONE / lin(2 * k + 3))
            / (Interval::point(4.0) * lin(2 * k + 1));
        // Scaled super-diagonal |B_{k,k+2}| = 1/(4(2k+3)·sqrt((2k+1)(2k+5))).
        let up = Interval::ONE
            / (Interval::point(4.0)
                * lin(2 * k + 3)
                * (lin(2 * k + 1) * lin(2 * k + 5)).sqrt().expect("positive"));
        // Scaled sub-diagonal, present only when k-2 is still in the tail.
        let down = if k >= m + 3 {
            Interval::ONE
                / (Interval::point(4.0)
                    * lin(2 * k - 1)
                    * (lin(2 * k - 3) * lin(2 * k + 1)).sqrt().expect("positive"))
        } else {
            Interval::ZERO
        };
        diag + up + down
    };
    let mut best = Interval::ZERO;
    for k in [m + 1, m + 2, m + 3] {
        let r = row(k);
        if r.hi() > best.hi() {
            best = r;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Certification space assembly
// ---------------------------------------------------------------------------

/// One parity block of the certification matrices: modes `φ_aφ_b` with the
/// parities of `a` and `b` fixed.  Block-local index `(ia, ib)` maps to the
/// flat index `ia * ys.len() + ib`.
#[derive(Debug)]
pub struct CertBlock {
    /// 1-based x-axis mode numbers in this block.
    pub xs: Vec<usize>,
    /// 1-based y-axis mode numbers in this block.
    pub ys: Vec<usize>,
    /// Energy (stiffness) form `∫∇·∇`.
    pub(crate) a: IMat,
    /// Mass form `∫··`.
    pub(crate) mass: IMat,
    /// Linearisation form `∫f'(u)··`.
    pub(crate) k: IMat,
    /// Squared-potential form `∫f'(u)²··`.
    pub(crate) w2: IMat,
}

impl CertBlock {
    pub fn dim(&self) -> usize {
        self.xs.len() * self.ys.len()
    }
}

/// Assembled certification matrices for one `(u, problem)` pair.
#[derive(Debug)]
pub struct CertMatrices {
    /// Per-axis certification dimension `M`.
    pub m: usize,
    /// The four parity blocks (odd/odd, odd/even, even/odd, even/even).
    pub blocks: Vec<CertBlock>,
    /// Verified range of `f'(u)` over the domain.
    pub fprime_hull: Interval,
    /// Tail projection constant `C(M)²` (scaled to the domain).
    pub proj_c2: Interval,
    /// Quadrature order used for the nonlinear forms.
    pub quad_order: usize,
    /// True when the approximation is symmetric about both midlines (always
    /// enforced for nonlinear problems): the fixed-point argument then
    /// closes in the symmetric subspace, and the inverse-norm bound is
    /// taken there (blocks\[0\] only).  Eigenvalue lower bounds (μ₁) always
    /// use the full space.
    pub symmetric_subspace: bool,
}

fn parity_modes(m: usize, parity: usize) -> Vec<usize> {
    (1..=m).filter(|i| i % 2 == parity % 2).collect()
}

/// Verified range of `f'(u(x))` over the whole domain, from depth-`depth`
/// cell ranges of `u`.
pub fn dprime_range(
    u: &LegendreFunction,
    problem: &ProblemSpec,
    depth: usize,
) -> Result<Interval, EigenError> {
    let ranges = rigor::range_grid(u, depth)?;
    let mut hull = problem.fprime_interval(ranges[0]);
    for r in &ranges[1..] {
        hull = hull.hull(problem.fprime_interval(*r));
    }
    Ok(hull)
}

/// Assembles the parity-blocked certification matrices on the `M × M`
/// tensor space.  Requires a polynomial nonlinearity (odd exponents) so the
/// Gauss rules are exact, and an approximation symmetric about both
/// midlines (unless the problem is linear) so the parity blocks decouple.
pub fn assemble(
    u: &LegendreFunction,
    problem: &ProblemSpec,
    m: usize,
) -> Result<CertMatrices, EigenError> {
    if let Some(t) = problem.terms().iter().find(|t| t.exponent % 2 == 0) {
        return Err(EigenError::EvenExponent(t.exponent));
    }
    if u.domain() != problem.domain() {
        return Err(EigenError::DomainMismatch);
    }
    if m < 4 {
        return Err(EigenError::BasisTooSmall(m));
    }
    let n_u = u.n();
    if !problem.terms().is_empty() {
        for i in 1..=n_u {
            for j in 1..=n_u {
                if (i % 2 == 0 || j % 2 == 0) && u.coeff(i, j) != 0.0 {
                    return Err(EigenError::NotSymmetric(i, j));
                }
            }
        }
    }

    // Quadrature exact for ∫ f'(u)² φ_a φ_c (the highest-degree integrand).
    let emax = problem.max_exponent().max(1) as usize;
    let degree = 2 * (emax - 1) * (n_u + 1) + 2 * (m + 1);
    let rule = QuadratureRule::gauss_cached(QuadratureRule::order_for_degree(degree))?;
    let k_nodes = rule.nodes().len();
    let nmax = m.max(n_u);

    // Basis tables at the nodes (shared between the u-basis and the
    // certification basis).
    let mut phi_tab: Vec<Vec<Interval>> = Vec::with_capacity(k_nodes);
    for &x in rule.nodes() {
        phi_tab.push(phi_family(nmax, x));
    }

    // f'(u) and f'(u)² at all tensor nodes.
    let mut rows = vec![vec![Interval::ZERO; n_u]; k_nodes];
    for (s, row) in rows.iter_mut().enumerate() {
        for i in 1..=n_u {
            let pxi = phi_tab[s][i - 1];
            for j in 1..=n_u {
                let c = u.coeff(i, j);
                if c != 0.0 {
                    row[j - 1] = row[j - 1] + pxi * c;
                }
            }
        }
    }
    let mut g = vec![vec![Interval::ZERO; k_nodes]; k_nodes];
    let mut g2 = vec![vec![Interval::ZERO; k_nodes]; k_nodes];
    for s in 0..k_nodes {
        for t in 0..k_nodes {
            let uval = interval::dot(
                &rows[s],
                &phi_tab[t][..n_u],
            );
            let fp = problem.fprime_interval(uval);
            g[s][t] = fp;
            g2[s][t] = fp.pow_int(2);
        }
    }

    // Geometry scaling.
    let dom = u.domain();
    let (hx, hy) = (dom.width(), dom.height());
    let sx = hy / hx;
    let sy = hx / hy;
    let jac = hx * hy;

    // Inner (y-axis) Gram tables: for each y-parity and each x-node s,
    // the symmetric matrix  S[s][(ib,id)] = Σ_t w_t g(s,t) φ_b(t) φ_d(t).
    let build_inner = |vals: &Vec<Vec<Interval>>, ys: &[usize]| -> Vec<IMat> {
        let my = ys.len();
        let mut out = Vec::with_capacity(k_nodes);
        for s in 0..k_nodes {
            let mut mat = IMat::zeros(my);
            for (ib, &b) in ys.iter().enumerate() {
                for (id, &d) in ys.iter().enumerate().skip(ib) {
                    let mut acc = Interval::ZERO;
                    for t in 0..k_nodes {
                        acc = acc
                            + rule.weights()[t] * vals[s][t] * phi_tab[t][b - 1]
                                * phi_tab[t][d - 1];
                    }
                    mat.set_sym(ib, id, acc);
                }
            }
            out.push(mat);
        }
        out
    };

    let mut blocks = Vec::with_capacity(4);
    for px in 0..2 {
        for py in 0..2 {
            let xs = parity_modes(m, 1 - px); // px=0 -> odd modes first
            let ys = parity_modes(m, 1 - py);
            let (mx, my) = (xs.len(), ys.len());
            let dim = mx * my;
            let mut a = IMat::zeros(dim);
            let mut mass = IMat::zeros(dim);
            let mut kk = IMat::zeros(dim);
            let mut w2 = IMat::zeros(dim);

            // Exact stiffness and mass entries.
            for (ia, &am) in xs.iter().enumerate() {
                for (ic, &cm) in xs.iter().enumerate() {
                    let m_ac = mass_entry(am, cm);
                    if ia == ic {
                        let da = stiffness_diag(am);
                        for (ib, &bm) in ys.iter().enumerate() {
                            for (id, &dm) in ys.iter().enumerate() {
                                let m_bd = mass_entry(bm, dm);
                                let mut v = da * m_bd * sx;
                                if ib == id {
                                    v = v + m_ac * stiffness_diag(bm) * sy;
                                }
                                let r = ia * my + ib;
                                let c = ic * my + id;
                                a.set(r, c, v);
                                mass.set(r, c, m_ac * m_bd * jac);
                            }
                        }
                    } else if m_ac != Interval::ZERO {
                        for (ib, &bm) in ys.iter().enumerate() {
                            let v = m_ac * stiffness_diag(bm) * sy;
                            let r = ia * my + ib;
                            let c = ic * my + ib;
                            a.set(r, c, v);
                        }
                        for (ib, &bm) in ys.iter().enumerate() {
                            for (id, &dm) in ys.iter().enumerate() {
                                let m_bd = mass_entry(bm, dm);
                                if m_bd != Interval::ZERO {
                                    let r = ia * my + ib;
                                    let c = ic * my + id;
                                    mass.set(r, c, m_ac * m_bd * jac);
                                }
                            }
                        }
                    }
                }
            }

            // Nonlinear forms via the inner tables.
            let inner_k = build_inner(&g, &ys);
            let inner_w = build_inner(&g2, &ys);
            for (ia, &am) in xs.iter().enumerate() {
                for (ic, &cm) in xs.iter().enumerate().skip(ia) {
                    let mut wpp = vec![Interval::ZERO; k_nodes];
                    for s in 0..k_nodes {
                        wpp[s] =
                            rule.weights()[s] * phi_tab[s][am - 1] * phi_tab[s][cm - 1];
                    }
                    for ib in 0..my {
                        for id in 0..my {
                            let mut acc_k = Interval::ZERO;
                            let mut acc_w = Interval::ZERO;
                            for s in 0..k_nodes {
                                acc_k = acc_k + wpp[s] * inner_k[s].at(ib, id);
                                acc_w = acc_w + wpp[s] * inner_w[s].at(ib, id);
                            }
                            let r = ia * my + ib;
                            let c = ic * my + id;
                            kk.set(r, c, acc_k * jac);
                            kk.set(c, r, acc_k * jac);
                            w2.set(r, c, acc_w * jac);
                            w2.set(c, r, acc_w * jac);
                        }
                    }
                }
            }

            blocks.push(CertBlock {
                xs,
                ys,
                a,
                mass,
                k: kk,
                w2,
            });
        }
    }

    let fprime_hull = dprime_range(u, problem, 6)?;
    // Tail constant scaled to the physical domain (per-axis dilation by h
    // scales the 1-D constant by h²; the larger side is used for the
    // tensor complement).
    let href = hx.hull(hy).mag();
    let proj_c2 = projection_constant_sq(m) * Interval::point(href).pow_int(2);

    Ok(CertMatrices {
        m,
        blocks,
        fprime_hull,
        proj_c2,
        quad_order: rule.order(),
        symmetric_subspace: !problem.terms().is_empty(),
    })
}

// ---------------------------------------------------------------------------
// Floating-point helpers (guesses only, never part of a proof)
// ---------------------------------------------------------------------------

/// All eigenvalues of the symmetric pencil `(g, m)` (`m` SPD), ascending.
fn float_geig(g: &DMatrix<f64>, m: &DMatrix<f64>) -> Option<Vec<f64>> {
    let chol = m.clone().cholesky()?;
    let l = chol.l();
    let x = l.solve_lower_triangular(g)?;
    let b = l.solve_lower_triangular(&x.transpose())?;
    // Symmetrize against roundoff before the eigensolver.
    let b = (&b + b.transpose()) * 0.5;
    let mut ev: Vec<f64> = b.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(ev)
}

/// Float eigenvalues of the block pencil `∫f'(u)·· = ν ∫∇·∇` (diagnostics
/// only, not part of any proof).
#[doc(hidden)]
pub fn debug_float_pencil(b: &CertBlock) -> Vec<f64> {
    float_geig(&b.k.mid(), &b.a.mid()).unwrap_or_default()
}

/// Approximate largest eigenvalue of the pencil `(w, a)` (`a` SPD) by power
/// iteration on `a⁻¹w`.
fn float_lambda_max(w: &DMatrix<f64>, a: &DMatrix<f64>) -> Option<f64> {
    let chol = a.clone().cholesky()?;
    let n = w.nrows();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lam = 0.0;
    for _ in 0..60 {
        let mut y = w * &v;
        chol.solve_mut(&mut y);
        let norm = y.norm();
        if norm == 0.0 {
            return Some(0.0);
        }
        y /= norm;
        let wy = w * &y;
        let ay = a * &y;
        lam = y.dot(&wy) / y.dot(&ay);
        v = y;
    }
    Some(lam)
}

// ---------------------------------------------------------------------------
// Lower bound for the smallest eigenvalue of  -Δ - f'(u)
// ---------------------------------------------------------------------------

/// Report from [`mu1_lower_bound`]; `proved` is a rigorous lower bound for
/// the smallest eigenvalue over the full (infinite-dimensional) space.
#[derive(Clone, Debug)]
pub struct Mu1Report {
    pub proved: f64,
    pub float_mu1: f64,
    pub kappa: Interval,
    pub m_plus: Interval,
    pub projection_c2: Interval,
    pub space_dim: usize,
    /// Candidate bounds tried, with the certification outcome.
    pub attempts: Vec<(f64, bool)>,
}

/// Proves `μ₁(-Δ - f'(u)) ≥ m` for the largest certifiable `m` in a short
/// candidate ladder (descending from the float estimate towards `target`
/// when one is given).
///
/// The proof obligation per candidate is positive definiteness of
/// `A - K - m·M₂ - κ·(W₂ + 2m·K + m²·M₂)` on the certification space, where
/// `κ = C²/(1 - M₊C²)` charges the tail: splitting `v = p + q` with `p` the
/// energy projection onto the certification space, Young's inequality on
/// the cross term and `‖q‖ ≤ C‖∇q‖` reduce the infinite-dimensional
/// Rayleigh bound to exactly this matrix condition.
pub fn mu1_lower_bound(
    mats: &CertMatrices,
    target: Option<f64>,
) -> Result<Mu1Report, EigenError> {
    // Float estimate of the discrete smallest eigenvalue.
    let mut float_mu1 = f64::INFINITY;
    for b in &mats.blocks {
        let gf = b.a.mid() - b.k.mid();
        let ev = float_geig(&gf, &b.mass.mid()).ok_or(EigenError::FloatFactorization)?;
        float_mu1 = float_mu1.min(ev[0]);
    }

    let scale = float_mu1.abs().max(1.0);
    let candidates: Vec<f64> = match target {
        Some(t) => {
            let gap = float_mu1 - t;
            if gap <= 0.0 {
                // Target above the float estimate: try it anyway (the float
                // value is only a guess), plus a slightly lower fallback.
                vec![t, t - 0.05 * scale]
            } else {
                vec![t + 0.85 * gap, t + 0.5 * gap, t]
            }
        }
        None => vec![
            float_mu1 - 0.02 * scale,
            float_mu1 - 0.10 * scale,
            float_mu1 - 0.30 * scale,
        ],
    };

    let c2 = mats.proj_c2;
    let sup_fp = Interval::point(mats.fprime_hull.hi());
    let mut attempts = Vec::new();
    for &m in &candidates {
        let mi = Interval::point(m);
        let m_plus = (sup_fp + mi).max_zero();
        let tail = m_plus * c2;
        if tail.hi() >= 1.0 {
            attempts.push((m, false));
            continue;
        }
        let kappa = c2 / (Interval::ONE - tail);
        // Z = A - (1 + 2mκ)K - (m + m²κ)M₂ - κW₂.
        let coef_k = (Interval::ONE + kappa * mi * 2.0).neg();
        let coef_m = (mi + kappa * mi.pow_int(2)).neg();
        let coef_w = kappa.neg();
        let mut ok = true;
        for (bi, b) in mats.blocks.iter().enumerate() {
            let mut z = b.a.clone();
            z.axpy(&b.k, coef_k);
            z.axpy(&b.mass, coef_m);
            z.axpy(&b.w2, coef_w);
            if let Err(_pivot) = cholesky_posdef(&z) {
                ok = false;
                let _ = bi;
                break;
            }
        }
        attempts.push((m, ok));
        if ok {
            return Ok(Mu1Report {
                proved: m,
                float_mu1,
                kappa,
                m_plus,
                projection_c2: c2,
                space_dim: mats.blocks.iter().map(|b| b.dim()).sum(),
                attempts,
            });
        }
    }
    Err(EigenError::LowerBoundFailed {
        float_mu1,
        attempts: attempts.iter().map(|&(m, _)| m).collect(),
    })
}

// ---------------------------------------------------------------------------
// Inverse norm of the linearised operator
// ---------------------------------------------------------------------------

/// Report from [`inverse_norm_bound`]; `bound` dominates the energy-norm
/// operator norm of `(-Δ - f'(u))⁻¹` (over the symmetric subspace when
/// `symmetric_subspace` is set, over all of `H¹₀` otherwise).
#[derive(Clone, Debug)]
pub struct InverseNormReport {
    pub bound: f64,
    /// Certified distance from 1 to the spectrum of the pencil
    /// `∫f'(u)·· = ν ∫∇·∇`.
    pub distance: Interval,
    pub tau_minus: f64,
    pub tau_plus: f64,
    /// Verified count of discrete pencil eigenvalues above the window.
    pub count_above: usize,
    /// Tail Rayleigh bound `sup|f'|·C²`.
    pub tail: Interval,
    /// Schur coupling correction subtracted from the discrete gap.
    pub coupling: Interval,
    /// Certified upper bound for `λ_max(W₂, A)`.
    pub w_a: f64,
    pub space_dim: usize,
    /// Whether the bound is for the symmetric-subspace restriction.
    pub symmetric_subspace: bool,
}

/// Counts discrete pencil eigenvalues `ν > τ` via the inertia of `K - τA`
/// over the given parity blocks, nudging `τ` inward on ambiguous pivots.
fn count_above(
    blocks: &[CertBlock],
    tau: f64,
    toward: f64,
) -> Result<(f64, usize), EigenError> {
    let mut t = tau;
    'retry: for _ in 0..6 {
        let mut total = 0usize;
        for (bi, b) in blocks.iter().enumerate() {
            let mut z = b.k.clone();
            z.axpy(&b.a, Interval::point(-t));
            match ldlt_inertia(&z) {
                Ok((_, pos)) => total += pos,
                Err(pivot) => {
                    // Nudge the shift toward the window centre and retry.
                    t += (toward - t) * 1.0e-3 + f64::EPSILON * toward.abs();
                    if !t.is_finite() {
                        return Err(EigenError::InertiaAmbiguous { block: bi, pivot });
                    }
                    continue 'retry;
                }
            }
        }
        return Ok((t, total));
    }
    Err(EigenError::InertiaAmbiguous { block: 0, pivot: 0 })
}

/// Certified upper bound for `λ_max(W₂, A)` by posdef escalation above a
/// float estimate.
fn lambda_max_upper(blocks: &[CertBlock]) -> Result<f64, EigenError> {
    let mut guess = 0.0f64;
    for b in blocks {
        let lm = float_lambda_max(&b.w2.mid(), &b.a.mid())
            .ok_or(EigenError::FloatFactorization)?;
        guess = guess.max(lm);
    }
    let base = guess.max(1e-6);
    for factor in [1.05, 1.2, 1.5, 2.5, 5.0, 25.0] {
        let w = base * factor;
        let ok = blocks.iter().all(|b| {
            let mut z = b.a.clone();
            z = {
                let mut t = z.clone();
                for i in 0..z.dim() {
                    for j in 0..z.dim() {
                        t.set(i, j, z.at(i, j) * Interval::point(w));
                    }
                }
                t
            };
            z.axpy(&b.w2, Interval::point(-1.0));
            cholesky_posdef(&z).is_ok()
        });
        if ok {
            return Ok(w);
        }
    }
    Err(EigenError::NotPositiveDefinite { block: 0, pivot: 0 })
}

/// Proves an upper bound for `‖(-Δ - f'(u))⁻¹‖` in the energy operator
/// norm: verifies (by interval LDLᵀ inertia counts) that the discrete
/// pencil `∫f'(u)·· = ν·∫∇·∇` has no eigenvalue in a window `[τ₋, τ₊]`
/// around 1, then shrinks the window by a Schur-complement correction
/// `C²·λ_max(W₂,A)/(τ₋ - sup|f'|·C²)` that accounts for coupling with the
/// unresolved tail.  The result is a certified distance `d` from 1 to the
/// spectrum of the full operator pencil, and the bound `1/d`.
///
/// For nonlinear problems the approximation is symmetric about both
/// midlines and the fixed-point argument closes in the symmetric subspace,
/// so only the symmetric parity block enters; the antisymmetric blocks
/// would otherwise contribute pencil eigenvalues much closer to 1 and the
/// bound would degrade several-fold without strengthening any conclusion
/// about the symmetric solution.
pub fn inverse_norm_bound(mats: &CertMatrices) -> Result<InverseNormReport, EigenError> {
    let active: &[CertBlock] = if mats.symmetric_subspace {
        std::slice::from_ref(&mats.blocks[0])
    } else {
        &mats.blocks
    };
    // Float pencil spectrum for window selection.
    let mut evs: Vec<f64> = Vec::new();
    for b in active {
        let ev = float_geig(&b.k.mid(), &b.a.mid()).ok_or(EigenError::FloatFactorization)?;
        evs.extend(ev);
    }
    evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let below = evs.iter().copied().filter(|&v| v < 1.0).fold(f64::NEG_INFINITY, f64::max);
    let above = evs
        .iter()
        .copied()
        .filter(|&v| v > 1.0)
        .fold(f64::INFINITY, f64::min);

    // Tail Rayleigh bound t = sup|f'|·C².
    let f_inf = Interval::point(mats.fprime_hull.mag());
    let tail = f_inf * mats.proj_c2;

    let nu_b = if below.is_finite() { below } else { tail.hi() };
    if nu_b >= 1.0 - 16.0 * f64::EPSILON {
        return Err(EigenError::NoSpectralGap {
            below_count: usize::MAX,
            above_count: usize::MAX,
        });
    }
    let gap_below = 1.0 - nu_b;
    let nu_a = if above.is_finite() { above } else { 1.0 + gap_below };

    let mut frac = 0.05f64;
    let mut last_err = EigenError::NoSpectralGap {
        below_count: 0,
        above_count: 0,
    };
    for _ in 0..4 {
        let tau_m = nu_b + frac * (1.0 - nu_b);
        let tau_p = nu_a - frac * (nu_a - 1.0);
        if tau_m <= tail.hi() {
            return Err(EigenError::TailTooLarge {
                tail: tail.hi(),
                near: tau_m,
            });
        }
        let (tau_m, cb) = count_above(active, tau_m, 1.0)?;
        let (tau_p, ca) = count_above(active, tau_p, 1.0)?;
        if cb != ca {
            // A discrete eigenvalue hides inside the window; shrink it.
            last_err = EigenError::NoSpectralGap {
                below_count: cb,
                above_count: ca,
            };
            frac *= 3.0;
            continue;
        }

        // Certified tail-coupling correction.
        let w_a = lambda_max_upper(active)?;
        let denom = Interval::point(tau_m) - tail;
        let coupling = mats.proj_c2 * Interval::point(w_a) / denom;
        let gap = Interval::point((1.0 - tau_m).min(tau_p - 1.0));
        let distance = gap - coupling;
        if distance.lo() <= 0.0 {
            return Err(EigenError::CouplingTooLarge {
                coupling: coupling.hi(),
                gap: gap.lo(),
            });
        }
        let bound = (Interval::ONE / distance).hi();
        return Ok(InverseNormReport {
            bound,
            distance,
            tau_minus: tau_m,
            tau_plus: tau_p,
            count_above: ca,
            tail,
            coupling,
            w_a,
            space_dim: active.iter().map(|b| b.dim()).sum(),
            symmetric_subspace: mats.symmetric_subspace,
        });
    }
    Err(last_err)
}

// ---------------------------------------------------------------------------
// Small dense verified generalized eigenvalue enclosures
// ---------------------------------------------------------------------------

/// Enclosures of all eigenvalues of the symmetric pencil `A x = ν M x`
/// (`M` SPD), returned ascending by midpoint.  Every true eigenvalue lies
/// in the union of the returned intervals: with `X̃` the float eigenvector
/// matrix, `S = X̃ᵀAX̃` and `T = X̃ᵀMX̃` form a congruent pencil that is a
/// small perturbation of `(diag θ̃, I)`, and residual norms `e = ‖T - I‖`,
/// `f = ‖S - diag θ̃‖` yield the uniform radius `δ = e·(max|θ̃|+f)/(1-e) + f`.
pub fn verified_sym_geig(a: &[Vec<Interval>], m: &[Vec<Interval>]) -> Result<Vec<Interval>, EigenError> {
    let n = a.len();
    assert!(n > 0 && a.iter().all(|r| r.len() == n));
    assert!(m.len() == n && m.iter().all(|r| r.len() == n));
    let af = DMatrix::from_fn(n, n, |i, j| a[i][j].mid());
    let mf = DMatrix::from_fn(n, n, |i, j| m[i][j].mid());
    let chol = mf.clone().cholesky().ok_or(EigenError::FloatFactorization)?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&af)
        .ok_or(EigenError::FloatFactorization)?;
    let b = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(EigenError::FloatFactorization)?;
    let b = (&b + b.transpose()) * 0.5;
    let se = nalgebra::SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let theta: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    // X̃ = L⁻ᵀ Q with columns ordered by eigenvalue.
    let q = DMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, order[j])]);
    let xt = l
        .transpose()
        .solve_upper_triangular(&q)
        .ok_or(EigenError::FloatFactorization)?;

    // Interval congruences S = X̃ᵀAX̃, T = X̃ᵀMX̃.
    let congr = |mat: &[Vec<Interval>]| -> IMat {
        let mut tmp = vec![vec![Interval::ZERO; n]; n]; // mat * X̃
        for i in 0..n {
            for j in 0..n {
                let mut acc = Interval::ZERO;
                for k in 0..n {
                    acc = acc + mat[i][k] * xt[(k, j)];
                }
                tmp[i][j] = acc;
            }
        }
        let mut out = IMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Interval::ZERO;
                for k in 0..n {
                    acc = acc + Interval::point(xt[(k, i)]) * tmp[k][j];
                }
                out.set(i, j, acc);
            }
        }
        out
    };
    let s = congr(a);
    let t = congr(m);

    let mut e_mat = t.clone();
    for i in 0..n {
        e_mat.set(i, i, t.at(i, i) - Interval::ONE);
    }
    let mut f_mat = s.clone();
    for i in 0..n {
        f_mat.set(i, i, s.at(i, i) - Interval::point(theta[i]));
    }
    let e = norm2_upper(&e_mat);
    let f = norm2_upper(&f_mat);
    if e >= 1.0 {
        return Err(EigenError::FloatFactorization);
    }
    let theta_max = theta.iter().fold(0.0f64, |m, &t| m.max(t.abs()));
    let bound = (Interval::point(theta_max) + Interval::point(f))
        / (Interval::ONE - Interval::point(e));
    let delta = (bound * Interval::point(e) + Interval::point(f)).hi();
    Ok(theta
        .iter()
        .map(|&th| Interval::new(th - delta, th + delta))
        .collect())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
