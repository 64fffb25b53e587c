//! Certification engine: constants registry, the Newton–Kantorovich
//! existence test, three positivity checkers, strategy selection, and the
//! end-to-end pipeline producing serialisable [`Certificate`]s.
//!
//! All quantitative claims are established in directed-rounding interval
//! arithmetic.  The only non-computed inputs are two pinned embedding
//! constants for the unit square (see [`ConstantsRegistry`]) and any
//! constants the caller supplies explicitly; every constant carries its
//! [`Provenance`] into the certificate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::eigen::{self, CertMatrices, EigenError, InverseNormReport, Mu1Report};
use crate::galerkin::{CoeffSigns, GalerkinError, ProblemSpec, SolveOptions, SolveReport};
use crate::interval::{Interval, IntervalError};
use crate::legendre::{LegendreError, LegendreFunction, Rectangle};
use crate::rigor::{self, NegativePartH10, RigorError, DEFAULT_GRID_DEPTH};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Errors of the certification layer.  Checker-specific failures
/// (`Assumption4Unverified`, `Mu1NotPositive`, …) are *honest negative
/// outcomes*: the hypothesis could not be verified, which is different from
/// a claim that it is false.
#[derive(Debug, Error)]
pub enum CertifyError {
    /// No embedding constant `C_q` is registered for this exponent/domain.
    #[error("embedding constant C_{0} is unavailable for this domain; supply one explicitly")]
    ConstantUnavailable(u32),
    /// The product check `αβ ≤ 1/2` could not be verified.
    #[error("Kantorovich condition failed: 2αβ ∈ [{lo:e}, {hi:e}] is not ≤ 1")]
    KantorovichFail { lo: f64, hi: f64 },
    /// The checker's applicability hypothesis is violated.
    #[error("strategy not applicable: {0}")]
    StrategyInapplicable(String),
    /// λ cannot be ordered against the eigenvalue bound (enclosures overlap).
    #[error("cannot order λ against the first-eigenvalue enclosure; refine the problem data")]
    Indeterminate,
    /// `‖û₋‖_V < ρ` could not be verified (ball membership of `max(û,0)`).
    /// Carries the μ₁ lower bound certified before this gate so partial
    /// progress survives into the certificate.
    #[error("negative-part energy bound {bound:e} is not provably below the radius {rho:e}")]
    Assumption4Unverified { bound: f64, rho: f64, mu1: f64 },
    /// The certified lower bound for μ₁ is not positive.
    #[error("certified lower bound for μ₁ is not positive ({proved:e})")]
    Mu1NotPositive { proved: f64 },
    /// No subdivision cell is provably positive, so `max(û,0) ≢ 0` fails.
    #[error("approximation is nowhere provably positive")]
    NowherePositive,
    /// Cells possibly meeting the negativity region are not covered.
    #[error("{count} undischarged cells are not covered by the supplied subregion")]
    SupersetDoesNotCover { count: usize },
    /// The rectangles of a subregion cover must have disjoint closures.
    #[error("subregion rectangles must have pairwise disjoint closures")]
    SupersetNotDisjoint,
    /// Invalid caller-supplied parameter.
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Legendre(#[from] LegendreError),
    #[error(transparent)]
    Galerkin(#[from] GalerkinError),
    #[error(transparent)]
    Rigor(#[from] RigorError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

// ---------------------------------------------------------------------------
// Constants registry
// ---------------------------------------------------------------------------

/// Where a registered constant comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Evaluated here from a closed formula in interval arithmetic.
    ClosedForm,
    /// A published upper bound adopted as-is (unit square only).
    Pinned,
    /// Provided by the caller, who vouches for its validity.
    Supplied,
}

/// One row of the constants report / certificate snapshot.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantEntry {
    pub name: String,
    pub enclosure: IntervalSer,
    pub provenance: Provenance,
}

/// Rigorous constants for one rectangular domain:
///
/// * `lambda1` — enclosure of the first Dirichlet eigenvalue
///   `λ₁(a×b) = π²(1/a² + 1/b²)` of `-Δ`,
/// * `c2 = λ₁^{-1/2}` — the sharp Poincaré constant
///   `‖u‖_{L²} ≤ C₂‖u‖_V`,
/// * embedding constants `C_q` with `‖u‖_{L^q} ≤ C_q‖u‖_V`; the values for
///   `q = 4, 6` on the unit square are pinned upper bounds, all other
///   exponents must be supplied by the caller ([`Self::supply_embedding`]).
#[derive(Clone, Debug)]
pub struct ConstantsRegistry {
    domain: Rectangle,
    lambda1: Interval,
    embeddings: BTreeMap<u32, (Interval, Provenance)>,
}

/// Pinned embedding-constant upper bounds for the unit square.
const PINNED_C4: &str = "0.31830989";
const PINNED_C6: &str = "0.39585400";

impl ConstantsRegistry {
    /// Registry for an arbitrary rectangle.  `C₂` and `λ₁` are computed in
    /// closed form; `C₄`, `C₆` are available only on the unit square.
    pub fn for_domain(domain: Rectangle) -> ConstantsRegistry {
        let pi2 = Interval::pi().pow_int(2);
        let inv_a2 = Interval::ONE / domain.width().pow_int(2);
        let inv_b2 = Interval::ONE / domain.height().pow_int(2);
        let lambda1 = pi2 * (inv_a2 + inv_b2);
        let c2 = (Interval::ONE / lambda1)
            .sqrt()
            .expect("λ₁ enclosure is positive");
        let mut embeddings = BTreeMap::new();
        embeddings.insert(2, (c2, Provenance::ClosedForm));
        if domain.is_unit() {
            let c4 = Interval::from_decimal(PINNED_C4).expect("valid decimal");
            let c6 = Interval::from_decimal(PINNED_C6).expect("valid decimal");
            embeddings.insert(4, (c4, Provenance::Pinned));
            embeddings.insert(6, (c6, Provenance::Pinned));
        }
        ConstantsRegistry {
            domain,
            lambda1,
            embeddings,
        }
    }

    /// Registry for the reference square `(0,1)²`.
    pub fn unit_square() -> ConstantsRegistry {
        ConstantsRegistry::for_domain(Rectangle::new(0.0, 1.0, 0.0, 1.0).expect("unit square"))
    }

    pub fn domain(&self) -> Rectangle {
        self.domain
    }

    /// Enclosure of the first Dirichlet eigenvalue of `-Δ` on the domain.
    pub fn lambda1(&self) -> Interval {
        self.lambda1
    }

    /// The `L²` embedding (Poincaré) constant `C₂ = λ₁^{-1/2}`.
    pub fn c2(&self) -> Interval {
        self.embeddings[&2].0
    }

    /// Embedding constant `C_q`, if registered.
    pub fn embedding(&self, q: u32) -> Result<Interval, CertifyError> {
        self.embeddings
            .get(&q)
            .map(|(v, _)| *v)
            .ok_or(CertifyError::ConstantUnavailable(q))
    }

    /// Registers a caller-supplied embedding constant (provenance
    /// [`Provenance::Supplied`]); replaces any previous entry for `q`.
    pub fn supply_embedding(&mut self, q: u32, value: Interval) {
        self.embeddings.insert(q, (value, Provenance::Supplied));
    }

    /// Snapshot of every entry, for reports and certificates.
    pub fn entries(&self) -> Vec<ConstantEntry> {
        let mut out = vec![ConstantEntry {
            name: "lambda1".to_string(),
            enclosure: IntervalSer::from_interval(self.lambda1),
            provenance: Provenance::ClosedForm,
        }];
        for (q, (v, p)) in &self.embeddings {
            out.push(ConstantEntry {
                name: format!("C{q}"),
                enclosure: IntervalSer::from_interval(*v),
                provenance: *p,
            });
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Interval serialization
// ---------------------------------------------------------------------------

/// JSON form of an interval: decimal strings rounded outward, so that
/// parsing the strings back yields an enclosure of the original interval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalSer {
    /// Lower endpoint, rounded towards -∞ in decimal.
    pub lo: String,
    /// Upper endpoint, rounded towards +∞ in decimal.
    pub hi: String,
}

impl IntervalSer {
    pub fn from_interval(x: Interval) -> IntervalSer {
        IntervalSer {
            lo: Interval::to_decimal_lower(x.lo(), 17),
            hi: Interval::to_decimal_upper(x.hi(), 17),
        }
    }

    /// Reconstructs an enclosure of the serialized interval.
    pub fn to_interval(&self) -> Result<Interval, IntervalError> {
        let lo = Interval::from_decimal(&self.lo)?;
        let hi = Interval::from_decimal(&self.hi)?;
        Ok(lo.hull(hi))
    }
}

// ---------------------------------------------------------------------------
// Newton–Kantorovich test
// ---------------------------------------------------------------------------

/// Outcome of a successful Newton–Kantorovich verification with committed
/// upper bounds `α` (residual of the Newton correction) and `β` (Lipschitz
/// times inverse norm).
#[derive(Clone, Debug)]
pub struct Kantorovich {
    /// Enclosure of `ρ = 2α / (1 + √(1-2αβ))`, the radius of the ball
    /// around the approximation that contains a true solution.  The lower
    /// end is needed when checking that a candidate function lies strictly
    /// inside the ball.
    pub rho: Interval,
    /// Radius `2α` of the ball in which the solution is unique.
    pub uniqueness_radius: Interval,
    /// `nextafter(2α, +∞)`: radius of the open ball on which the Lipschitz
    /// bound must hold.
    pub r: f64,
    /// Enclosure of the verified product `2αβ ≤ 1`.
    pub product: Interval,
    /// The committed α upper bound.
    pub alpha: f64,
    /// The committed β upper bound.
    pub beta: f64,
}

/// Verifies `αβ ≤ 1/2` for the committed upper ends of `alpha` and `beta`
/// and returns the error radius `ρ` and the uniqueness radius `2α`.
///
/// `ρ` is evaluated in the division-free-of-cancellation form
/// `2α/(1+√(1-2αβ))`, algebraically equal to `(1-√(1-2αβ))/β` but stable
/// for small products, as a genuine two-sided enclosure of the real number
/// determined by the committed floats.
pub fn newton_kantorovich(alpha: Interval, beta: Interval) -> Result<Kantorovich, CertifyError> {
    let a = alpha.hi();
    let b = beta.hi();
    if !a.is_finite() || !b.is_finite() || a < 0.0 || b < 0.0 {
        return Err(CertifyError::BadParameter(format!(
            "α and β must be finite and nonnegative (got {a:e}, {b:e})"
        )));
    }
    let ai = Interval::point(a);
    let bi = Interval::point(b);
    let product = Interval::point(2.0) * ai * bi;
    if product.hi() > 1.0 {
        return Err(CertifyError::KantorovichFail {
            lo: product.lo(),
            hi: product.hi(),
        });
    }
    // product.hi() ≤ 1 keeps the radicand enclosure nonnegative: for
    // x ∈ [1/2, 1] the subtraction 1 - x is exact, and for x < 1/2 the
    // rounded-down result stays above 1/2 - ulp > 0.
    let disc = (Interval::ONE - product)
        .sqrt()
        .map_err(CertifyError::Interval)?;
    let rho = (Interval::point(2.0) * ai) / (Interval::ONE + disc);
    let two_alpha = Interval::point(2.0 * a);
    Ok(Kantorovich {
        rho,
        uniqueness_radius: two_alpha,
        r: (2.0 * a).next_up(),
        product,
        alpha: a,
        beta: b,
    })
}

// ---------------------------------------------------------------------------
// Lipschitz bound and α
// ---------------------------------------------------------------------------

/// `‖û‖_{L^q}` with whichever rigorous route fits the exponent: exact
/// quadrature for even `q`, grid upper bound otherwise.
fn lq_norm(u: &LegendreFunction, q: u32, depth: usize) -> Result<Interval, RigorError> {
    if q % 2 == 0 {
        rigor::lq_norm_even(u, q)
    } else {
        rigor::lq_norm_upper(u, q, depth)
    }
}

/// Upper bound for the Lipschitz constant of the linearisation
/// `u ↦ ∫ f'(u)·…` on the ball of radius `r` around `û`:
///
/// ```text
///     L ≤ Σᵢ |aᵢ| · i(i-1) · C_{i+1}³ · (‖û‖_{L^{i+1}} + C_{i+1} r)^{i-2},
/// ```
///
/// each term bounding its second derivative `i(i-1)|aᵢ| |t|^{i-2}` through
/// the `L^{i+1}` embedding, term-wise over the nonlinearity.
pub fn lipschitz_bound(
    problem: &ProblemSpec,
    u: &LegendreFunction,
    r: Interval,
    registry: &ConstantsRegistry,
) -> Result<Interval, CertifyError> {
    if r.lo() < 0.0 {
        return Err(CertifyError::BadParameter(format!(
            "Lipschitz radius must be nonnegative (got lower end {:e})",
            r.lo()
        )));
    }
    let mut total = Interval::ZERO;
    for term in problem.terms() {
        let i = term.exponent;
        let q = i + 1;
        let c = registry.embedding(q)?;
        let norm = lq_norm(u, q, DEFAULT_GRID_DEPTH)?;
        let fac = Interval::point(f64::from(i) * f64::from(i - 1));
        total = total + term.coeff.abs() * fac * c.pow_int(3) * (norm + c * r).pow_int(i - 2);
    }
    Ok(total)
}

/// Composes the full α chain from scratch: assemble the certification
/// matrices with basis size `m`, bound the inverse norm, and multiply by
/// the dual-norm residual bound `C₂‖residual‖_{L²}`.
///
/// The pipeline performs the same composition from already-computed pieces;
/// this standalone form is for direct use and cross-checks.
pub fn compute_alpha(
    u: &LegendreFunction,
    problem: &ProblemSpec,
    registry: &ConstantsRegistry,
    m: usize,
) -> Result<Interval, CertifyError> {
    let mats = eigen::assemble(u, problem, m)?;
    let inv = eigen::inverse_norm_bound(&mats)?;
    let res = rigor::residual_l2(u, problem)?;
    Ok(Interval::point(inv.bound) * registry.c2() * res)
}

// ---------------------------------------------------------------------------
// Strategy selection
// ---------------------------------------------------------------------------

/// Final classification of a certification run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// A true solution exists near the approximation and is positive in Ω.
    Positive,
    /// A true solution exists near the approximation and is nonnegative.
    Nonnegative,
    /// A true solution exists, but no positivity claim was certified.
    ExistenceOnly,
    /// The problem class admits no positive solution (sign classification).
    NoPositiveSolution,
    /// Some stage of the verification failed.
    Failed,
}

/// The three positivity checkers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Strategy {
    /// Sub-eigenvalue criterion: negative-part norm estimation, valid for
    /// `λ < λ₁(Ω)` ([`check_theorem1`]).
    Theorem1,
    /// Newton-iteration positivity: spectral bound μ₁ > 0 plus ball
    /// membership of `max(û,0)`, for concave-type signs ([`check_theorem2`]).
    Theorem2,
    /// Localized sub-eigenvalue criterion on the region where the solution
    /// could be negative, using a sup-norm error radius
    /// ([`check_corollary_a1`]).
    CorollaryA1,
}

/// What [`select_strategy`] decides for a problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategyPlan {
    /// Checkers to run, in order.
    Check(Vec<Strategy>),
    /// The sign pattern rules out positive solutions outright: testing the
    /// equation against the positive first eigenfunction of `-Δ` gives a
    /// sign contradiction.  Emitted as a documented classification.
    NoPositiveSolution { reason: String },
}

/// Classifies `(sign of λ - λ₁(Ω), signs of the aᵢ)` into the applicable
/// checkers.  Both eigenvalue comparisons are verified in interval
/// arithmetic; an enclosure overlap is reported as
/// [`CertifyError::Indeterminate`].
pub fn select_strategy(
    problem: &ProblemSpec,
    registry: &ConstantsRegistry,
) -> Result<StrategyPlan, CertifyError> {
    let lam = problem.lambda();
    let l1 = registry.lambda1();
    let below = lam.hi() < l1.lo();
    let at_or_above = lam.lo() >= l1.hi();
    if !below && !at_or_above {
        return Err(CertifyError::Indeterminate);
    }
    let signs = problem.coeff_signs();
    Ok(match (below, signs) {
        (true, CoeffSigns::AllNonnegative | CoeffSigns::Mixed) => {
            StrategyPlan::Check(vec![Strategy::Theorem1])
        }
        (true, CoeffSigns::AllNonpositive) => StrategyPlan::NoPositiveSolution {
            reason: "λ < λ₁(Ω) with every nonlinear coefficient ≤ 0: testing against the \
                     first eigenfunction forces (λ₁-λ)∫uφ₁ ≤ 0, impossible for positive u"
                .to_string(),
        },
        (true, CoeffSigns::NoTerms) => StrategyPlan::NoPositiveSolution {
            reason: "linear problem with λ < λ₁(Ω): only the zero solution exists".to_string(),
        },
        (false, CoeffSigns::AllNonnegative) => StrategyPlan::NoPositiveSolution {
            reason: "λ ≥ λ₁(Ω) with every nonlinear coefficient ≥ 0: testing against the \
                     first eigenfunction forces (λ₁-λ)∫uφ₁ > 0, impossible"
                .to_string(),
        },
        (false, CoeffSigns::AllNonpositive) => StrategyPlan::Check(vec![Strategy::Theorem2]),
        (false, CoeffSigns::Mixed) => StrategyPlan::Check(vec![Strategy::CorollaryA1]),
        (false, CoeffSigns::NoTerms) => {
            return Err(CertifyError::StrategyInapplicable(
                "linear problem with λ ≥ λ₁(Ω): positive solutions exist only at λ = λ₁ \
                 exactly, which interval data cannot certify"
                    .to_string(),
            ));
        }
    })
}

// ---------------------------------------------------------------------------
// Checker: sub-eigenvalue criterion (theorem1)
// ---------------------------------------------------------------------------

/// Report of [`check_theorem1`] / [`check_corollary_a1`]'s final stage.
#[derive(Clone, Debug)]
pub struct Theorem1Report {
    /// Left side `Σ_{aᵢ>0} aᵢ C²_{i+1}(‖û₋‖_{L^{i+1}} + C_{i+1}ρ)^{i-1}`.
    pub condition: Interval,
    /// Right side `1 - λ/λ₁`; the lower end is the certified bound.
    pub threshold: Interval,
    /// Certified margin `threshold.lo - condition.hi` (positive ⟺ pass).
    pub margin: f64,
    /// Negative-part norms used, per embedding exponent `q = i+1`.
    pub negative_part_norms: Vec<(u32, Interval)>,
    /// `‖û‖_V > ρ` certified, which excludes the zero solution from the
    /// ball and enables the maximum-principle upgrade.
    pub nontrivial: bool,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

/// Nonnegativity of the certified solution for `λ < λ₁(Ω)`: if
///
/// ```text
///   Σ_{aᵢ>0} aᵢ C²_{i+1} (‖û₋‖_{L^{i+1}} + C_{i+1} ρ)^{i-1}  <  1 - λ/λ₁(Ω)
/// ```
///
/// then every solution within `ρ` of `û` is nonnegative (its negative part
/// has vanishing energy).  Negative-coefficient terms only help and are
/// dropped.  For the polynomial class the verdict upgrades to positive via
/// the strong maximum principle once the zero solution is excluded from
/// the ball.
pub fn check_theorem1(
    problem: &ProblemSpec,
    u: &LegendreFunction,
    rho: Interval,
    registry: &ConstantsRegistry,
    depth: usize,
) -> Result<Theorem1Report, CertifyError> {
    let lam = problem.lambda();
    let l1 = registry.lambda1();
    if !(lam.hi() < l1.lo()) {
        return Err(CertifyError::StrategyInapplicable(format!(
            "requires λ < λ₁(Ω) verified in interval arithmetic (λ ≤ {:e}, λ₁ ≥ {:e})",
            lam.hi(),
            l1.lo()
        )));
    }
    let threshold = Interval::ONE - lam / l1;
    theorem1_body(problem, u, rho, registry, depth, threshold, Vec::new())
}

/// Shared final stage of the sub-eigenvalue criterion; the caller supplies
/// the certified threshold `1 - λ/λ₁` (with the eigenvalue of the full
/// domain or of an enclosing subregion).
fn theorem1_body(
    problem: &ProblemSpec,
    u: &LegendreFunction,
    rho: Interval,
    registry: &ConstantsRegistry,
    depth: usize,
    threshold: Interval,
    mut notes: Vec<String>,
) -> Result<Theorem1Report, CertifyError> {
    if rho.lo() < 0.0 {
        return Err(CertifyError::BadParameter(
            "error radius ρ must be nonnegative".to_string(),
        ));
    }
    let mut condition = Interval::ZERO;
    let mut negative_part_norms = Vec::new();
    for term in problem.terms() {
        if term.coeff.hi() <= 0.0 {
            // A term with a nonpositive coefficient only strengthens the
            // inequality; dropping it is always sound.
            continue;
        }
        let q = term.exponent + 1;
        let c = registry.embedding(q)?;
        let neg = rigor::negative_part_lq(u, q, depth)?;
        negative_part_norms.push((q, neg));
        let coeff = term.coeff.max_zero();
        condition =
            condition + coeff * c.pow_int(2) * (neg + c * rho).pow_int(term.exponent - 1);
    }
    let pass = condition.hi() < threshold.lo();
    let margin = threshold.lo() - condition.hi();
    let nontrivial = rigor::h10_norm(u).lo() > rho.hi();
    let verdict = if !pass {
        notes.push(
            "positivity condition not satisfied: the negative-part estimate is too large \
             for the eigenvalue margin"
                .to_string(),
        );
        Verdict::ExistenceOnly
    } else if problem.is_polynomial() && nontrivial {
        notes.push(
            "positivity via the strong maximum principle: the certified solution is \
             nonnegative, not identically zero (‖û‖_V > ρ), and f(0) = 0"
                .to_string(),
        );
        Verdict::Positive
    } else {
        if !nontrivial {
            notes.push(
                "could not exclude the zero solution from the ball (‖û‖_V ≤ ρ); verdict \
                 stays at nonnegative"
                    .to_string(),
            );
        }
        Verdict::Nonnegative
    };
    Ok(Theorem1Report {
        condition,
        threshold,
        margin,
        negative_part_norms,
        nontrivial,
        verdict,
        notes,
    })
}

// ---------------------------------------------------------------------------
// Checker: Newton-iteration positivity (theorem2)
// ---------------------------------------------------------------------------

/// Tuning for [`check_theorem2`].
#[derive(Clone, Debug)]
pub struct Theorem2Config {
    /// Certification basis size per axis for the spectral bounds.
    pub basis: usize,
    /// Optional target for the μ₁ lower bound (the ladder descends from the
    /// float estimate towards the target).
    pub mu1_target: Option<f64>,
    /// Subdivision depth for the positivity flag grid.
    pub depth: usize,
    /// Maximum adaptive depth for the negative-part energy bound.
    pub adaptive_depth: usize,
    /// Leaf budget for the adaptive negative-part descent.
    pub budget: usize,
}

impl Theorem2Config {
    pub fn new(basis: usize) -> Theorem2Config {
        Theorem2Config {
            basis,
            mu1_target: None,
            depth: DEFAULT_GRID_DEPTH,
            adaptive_depth: 10,
            budget: 20_000,
        }
    }
}

/// Report of [`check_theorem2`].
#[derive(Clone, Debug)]
pub struct Theorem2Report {
    pub mu1: Mu1Report,
    pub negative_part: NegativePartH10,
    /// Some subdivision cell is provably positive, so `max(û,0) ≢ 0`.
    pub omega_nontrivial: bool,
    /// `‖û‖_V > ρ`: the zero solution is excluded from the ball.
    pub nontrivial: bool,
    /// The nonlinearity is exactly `f(t) = λ(t - t³)`.
    pub balanced_cubic: bool,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

/// Positivity for sign patterns with every nonlinear coefficient ≤ 0
/// (where the sub-eigenvalue criterion cannot apply for `λ ≥ λ₁`):
///
/// 1. every `aᵢ ≤ 0` makes `f(t) - f'(t)t = Σᵢ aᵢ(1-i)tⁱ ≥ 0` for `t ≥ 0`,
///    so the Newton operator preserves nonnegativity;
/// 2. the certified lower bound for `μ₁(-Δ - f'(û))` must be positive
///    (order preservation of the inverse linearisation);
/// 3. `ω = max(û,0)` must lie strictly inside the ball
///    (`‖û₋‖_V < ρ`, verified against the lower end of the ρ enclosure)
///    and be nontrivial (some cell provably positive).
///
/// The Newton sequence from `ω` then stays nonnegative and converges to
/// the certified solution.  For the balanced cubic `f(t) = λ(t-t³)` with
/// `λ ≥ λ₁(Ω)` the verdict upgrades to positive via the maximum principle.
pub fn check_theorem2(
    problem: &ProblemSpec,
    u: &LegendreFunction,
    rho: Interval,
    registry: &ConstantsRegistry,
    cfg: &Theorem2Config,
) -> Result<Theorem2Report, CertifyError> {
    let mats = eigen::assemble(u, problem, cfg.basis)?;
    check_theorem2_with(&mats, problem, u, rho, registry, cfg)
}

/// [`check_theorem2`] with pre-assembled certification matrices (they must
/// come from the same `(u, problem)` pair).
pub fn check_theorem2_with(
    mats: &CertMatrices,
    problem: &ProblemSpec,
    u: &LegendreFunction,
    rho: Interval,
    registry: &ConstantsRegistry,
    cfg: &Theorem2Config,
) -> Result<Theorem2Report, CertifyError> {
    match problem.coeff_signs() {
        CoeffSigns::AllNonpositive | CoeffSigns::NoTerms => {}
        _ => {
            return Err(CertifyError::StrategyInapplicable(
                "requires every nonlinear coefficient ≤ 0 (Newton positivity class)"
                    .to_string(),
            ));
        }
    }
    let mut notes = vec![
        "sign class verified symbolically: every nonlinear coefficient ≤ 0 gives \
         f(t) ≥ f'(t)t for t ≥ 0"
            .to_string(),
    ];
    let mu1 = eigen::mu1_lower_bound(mats, cfg.mu1_target)?;
    if !(mu1.proved > 0.0) {
        return Err(CertifyError::Mu1NotPositive { proved: mu1.proved });
    }
    let negative_part = rigor::negative_part_h10(u, cfg.adaptive_depth, cfg.budget)?;
    if !(negative_part.bound.hi() < rho.lo()) {
        return Err(CertifyError::Assumption4Unverified {
            bound: negative_part.bound.hi(),
            rho: rho.lo(),
            mu1: mu1.proved,
        });
    }
    let omega_nontrivial = rigor::range_grid(u, cfg.depth)?
        .iter()
        .any(|r| r.lo() > 0.0);
    if !omega_nontrivial {
        return Err(CertifyError::NowherePositive);
    }
    let nontrivial = rigor::h10_norm(u).lo() > rho.hi();
    let balanced_cubic = problem.balanced_cubic_lambda().is_some();
    let lam_at_or_above = problem.lambda().lo() >= registry.lambda1().hi();
    let verdict = if balanced_cubic && lam_at_or_above && nontrivial {
        notes.push(
            "balanced cubic f(t) = λ(t - t³) with λ ≥ λ₁(Ω): nonnegativity upgrades to \
             positivity via the strong maximum principle (zero solution excluded, \
             ‖û‖_V > ρ)"
                .to_string(),
        );
        Verdict::Positive
    } else {
        if balanced_cubic && !nontrivial {
            notes.push(
                "could not exclude the zero solution from the ball (‖û‖_V ≤ ρ); verdict \
                 stays at nonnegative"
                    .to_string(),
            );
        }
        Verdict::Nonnegative
    };
    Ok(Theorem2Report {
        mu1,
        negative_part,
        omega_nontrivial,
        nontrivial,
        balanced_cubic,
        verdict,
        notes,
    })
}

// ---------------------------------------------------------------------------
// Checker: localized criterion (corollaryA1)
// ---------------------------------------------------------------------------

/// A region guaranteed to contain every cell where the solution could be
/// negative; its first Dirichlet eigenvalue replaces `λ₁(Ω)` in the
/// sub-eigenvalue criterion.
#[derive(Clone, Debug)]
pub enum SupersetSpec {
    /// A union of rectangles with pairwise disjoint closures; the
    /// eigenvalue bound is the minimum of the closed forms.
    Rectangles(Vec<Rectangle>),
    /// The frame of the given width along the inside of the boundary; the
    /// eigenvalue bound is `π²/(2w²)` (partition argument; see
    /// `frame_lambda1`).
    BoundaryFrame { width: f64 },
}

/// Report of [`check_corollary_a1`].
#[derive(Clone, Debug)]
pub struct CorollaryA1Report {
    /// Cells not provably above the sup-norm radius (the possible
    /// negativity region); all are covered by the superset.
    pub undischarged_cells: usize,
    /// Certified lower bound for the first Dirichlet eigenvalue of the
    /// superset region (lower end is the bound).
    pub lambda1_sub: Interval,
    /// Final-stage report (condition, threshold, margin, verdict).
    pub body: Theorem1Report,
}

/// Localized sub-eigenvalue criterion for `λ ≥ λ₁(Ω)` or mixed signs.
///
/// Given an external sup-norm error radius `‖u - û‖_{L^∞} ≤ r_inf`, the
/// true solution is positive on every cell where `û > r_inf` holds
/// provably, so its negative part is supported in the remaining cells and
/// vanishes on their boundary.  If a supplied region with eigenvalue bound
/// `λ₁(Ω₀')` covers those cells and `λ < λ₁(Ω₀')`, the sub-eigenvalue
/// criterion applies with the improved threshold `1 - λ/λ₁(Ω₀')`.
pub fn check_corollary_a1(
    problem: &ProblemSpec,
    u: &LegendreFunction,
    rho: Interval,
    r_inf: Interval,
    superset: &SupersetSpec,
    registry: &ConstantsRegistry,
    depth: usize,
) -> Result<CorollaryA1Report, CertifyError> {
    if !(r_inf.lo() > 0.0) {
        return Err(CertifyError::BadParameter(
            "sup-norm error radius must be positive".to_string(),
        ));
    }
    let domain = problem.domain();
    let grid = rigor::build_flag_grid(u, r_inf, depth)?;
    let side = grid.side();
    let mut undischarged = 0usize;
    let mut uncovered = 0usize;
    for ix in 0..side {
        for iy in 0..side {
            if grid.provably_above(ix, iy) {
                continue;
            }
            undischarged += 1;
            let (cx, cy) = physical_cell(&domain, depth, ix, iy);
            if !superset_contains(superset, &domain, cx, cy) {
                uncovered += 1;
            }
        }
    }
    if uncovered > 0 {
        return Err(CertifyError::SupersetDoesNotCover { count: uncovered });
    }
    let lambda1_sub = superset_lambda1(superset, &domain)?;
    let lam = problem.lambda();
    if !(lam.hi() < lambda1_sub.lo()) {
        return Err(CertifyError::StrategyInapplicable(format!(
            "requires λ below the eigenvalue bound of the covering subregion \
             (λ ≤ {:e}, bound ≥ {:e})",
            lam.hi(),
            lambda1_sub.lo()
        )));
    }
    // Certified lower bound for 1 - λ/λ₁(Ω₀'): only the lower end of
    // `lambda1_sub` is a certified eigenvalue bound, and for λ ≤ 0 the
    // threshold cannot soundly exceed 1 without an eigenvalue upper bound.
    let t = Interval::ONE - lam / Interval::point(lambda1_sub.lo());
    let threshold = Interval::new(t.lo().min(1.0), t.hi());
    let notes = vec![format!(
        "negativity region localized by the sup-norm radius: {undischarged} of {} cells \
         remain and are covered by the supplied subregion",
        side * side
    )];
    let body = theorem1_body(problem, u, rho, registry, depth, threshold, notes)?;
    Ok(CorollaryA1Report {
        undischarged_cells: undischarged,
        lambda1_sub,
        body,
    })
}

/// Outward enclosure of the physical extent of subdivision cell
/// `(ix, iy)` at `depth` in `domain`.
fn physical_cell(domain: &Rectangle, depth: usize, ix: usize, iy: usize) -> (Interval, Interval) {
    let scale = Interval::point((1u64 << depth) as f64);
    let fx = Interval::new(ix as f64, (ix + 1) as f64) / scale;
    let fy = Interval::new(iy as f64, (iy + 1) as f64) / scale;
    let cx = Interval::point(domain.x0()) + domain.width() * fx;
    let cy = Interval::point(domain.y0()) + domain.height() * fy;
    (cx, cy)
}

/// Verified geometric containment of the (outward-enclosed) cell in the
/// superset region.
fn superset_contains(
    superset: &SupersetSpec,
    domain: &Rectangle,
    cx: Interval,
    cy: Interval,
) -> bool {
    match superset {
        SupersetSpec::Rectangles(rects) => rects.iter().any(|r| {
            r.x0() <= cx.lo() && cx.hi() <= r.x1() && r.y0() <= cy.lo() && cy.hi() <= r.y1()
        }),
        SupersetSpec::BoundaryFrame { width } => {
            let w = Interval::point(*width);
            let left = Interval::point(domain.x0()) + w;
            let right = Interval::point(domain.x1()) - w;
            let bottom = Interval::point(domain.y0()) + w;
            let top = Interval::point(domain.y1()) - w;
            cx.hi() <= left.lo()
                || cx.lo() >= right.hi()
                || cy.hi() <= bottom.lo()
                || cy.lo() >= top.hi()
        }
    }
}

/// Certified lower bound for the first Dirichlet eigenvalue of the
/// superset region.
fn superset_lambda1(
    superset: &SupersetSpec,
    domain: &Rectangle,
) -> Result<Interval, CertifyError> {
    match superset {
        SupersetSpec::Rectangles(rects) => {
            if rects.is_empty() {
                return Err(CertifyError::BadParameter(
                    "subregion rectangle list is empty".to_string(),
                ));
            }
            for (i, a) in rects.iter().enumerate() {
                for b in rects.iter().skip(i + 1) {
                    let separated = a.x1() < b.x0()
                        || b.x1() < a.x0()
                        || a.y1() < b.y0()
                        || b.y1() < a.y0();
                    if !separated {
                        return Err(CertifyError::SupersetNotDisjoint);
                    }
                }
            }
            // Disjoint closures: the eigenvalue of the union is the
            // minimum over the components' closed forms.
            let pi2 = Interval::pi().pow_int(2);
            let mut best: Option<Interval> = None;
            for r in rects {
                let l = pi2
                    * (Interval::ONE / r.width().pow_int(2)
                        + Interval::ONE / r.height().pow_int(2));
                best = Some(match best {
                    None => l,
                    Some(b) if l.lo() < b.lo() => l,
                    Some(b) => b,
                });
            }
            Ok(best.expect("nonempty"))
        }
        SupersetSpec::BoundaryFrame { width } => frame_lambda1(*width, domain),
    }
}

/// `λ₁(frame) ≥ π²/(2w²)` for the frame of width `w` inside a rectangle.
///
/// Partition the frame into four side strips and four corner squares.  A
/// function vanishing on the frame's boundary vanishes on both long edges
/// of each side strip, so the one-dimensional Dirichlet bound `π²/w²`
/// applies fibre-wise across the strip.  On a corner square it vanishes on
/// the two outer edges only; the one-sided bound `(π/2w)²` in each
/// direction sums to `π²/(2w²)`.  The minimum over the pieces is
/// `π²/(2w²)`.  (The naive single-slab value `π²/w²` is *not* a valid
/// lower bound: right-angle corners of a Dirichlet strip support bound
/// states strictly below it.)
fn frame_lambda1(width: f64, domain: &Rectangle) -> Result<Interval, CertifyError> {
    let wd = domain.width();
    let ht = domain.height();
    if !(width > 0.0) || 2.0 * width >= wd.lo().min(ht.lo()) {
        return Err(CertifyError::BadParameter(format!(
            "frame width must satisfy 0 < 2w < min(domain sides) (got w = {width})"
        )));
    }
    let w = Interval::point(width);
    Ok(Interval::pi().pow_int(2) / (Interval::point(2.0) * w.pow_int(2)))
}

// ---------------------------------------------------------------------------
// Certificate
// ---------------------------------------------------------------------------

/// Serialized problem description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemSection {
    pub lambda: IntervalSer,
    pub terms: Vec<TermSection>,
    pub domain: DomainSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermSection {
    pub exponent: u32,
    pub coeff: IntervalSer,
}

/// Domain corners as shortest-round-trip decimal strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainSection {
    pub x0: String,
    pub x1: String,
    pub y0: String,
    pub y1: String,
}

/// Serialized facts about the approximation the certificate refers to.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproxSection {
    /// Basis size per axis.
    pub n: usize,
    /// SHA-256 of the canonical little-endian coefficient encoding.
    pub digest: String,
    /// Sampled maximum of `|û|` (informational, non-rigorous).
    pub max_abs: f64,
}

/// Serialized existence-verification quantities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NkSection {
    /// Committed upper bound for the Newton-correction norm.
    pub alpha: String,
    /// Committed upper bound for inverse norm × Lipschitz constant.
    pub beta: String,
    /// Enclosure of the existence radius.
    pub rho: IntervalSer,
    /// Radius of the uniqueness ball, `2α`.
    pub uniqueness_radius: IntervalSer,
    /// Open-ball radius used for the Lipschitz bound (next float above 2α).
    pub r: f64,
    /// Enclosure of the verified product `2αβ`.
    pub product: IntervalSer,
    /// Lipschitz-constant upper bound on the ball of radius `r`.
    pub lipschitz: IntervalSer,
    /// Certified operator-norm bound for the inverse linearisation.
    pub inverse_norm: f64,
    /// `L²` norm of the strong residual `Δû + f(û)`.
    pub residual_l2: IntervalSer,
    /// Dual-norm residual bound `C₂ ‖Δû + f(û)‖_{L²}`.
    pub residual_dual: IntervalSer,
    /// Whether existence/uniqueness are certified within the subspace of
    /// functions symmetric about both axis midlines.
    pub symmetric_subspace: bool,
}

/// Serialized positivity-check quantities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PositivitySection {
    pub strategy: Strategy,
    /// Left side of the sub-eigenvalue condition (theorem1 / corollaryA1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<IntervalSer>,
    /// Right side `1 - λ/λ₁` of the sub-eigenvalue condition.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<IntervalSer>,
    /// Certified margin (threshold lower end minus condition upper end).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    /// Certified lower bound for μ₁ (theorem2).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu1_lower: Option<f64>,
    /// Negative-part norms entering the checks.
    pub negative_part_norms: Vec<NegativeNormSection>,
    /// Eigenvalue bound of the covering subregion (corollaryA1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1_sub: Option<IntervalSer>,
    /// Undischarged-cell count of the localization grid (corollaryA1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub undischarged_cells: Option<usize>,
    /// Set when the check failed honestly; the verdict is then
    /// `existence-only`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NegativeNormSection {
    /// Norm space: `"L4"`, `"L6"`, …, or `"H10"` for the energy norm.
    pub space: String,
    pub bound: IntervalSer,
}

/// A machine-checkable record of one certification run: every bound that
/// the verdict depends on, with enough provenance to audit the chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub problem: ProblemSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approximation: Option<ApproxSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub newton_kantorovich: Option<NkSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positivity: Option<PositivitySection>,
    pub verdict: Verdict,
    /// Stage name when `verdict = failed`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
    pub constants: Vec<ConstantEntry>,
    pub notes: Vec<String>,
}

pub const CERTIFICATE_SCHEMA_VERSION: u32 = 1;

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Certificate, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// SHA-256 digest of the canonical encoding of an approximation
/// (basis size, domain corners, then coefficients, all little-endian).
pub fn approximation_digest(u: &LegendreFunction) -> String {
    let mut h = Sha256::new();
    h.update(b"legendre-coeffs-v1");
    h.update((u.n() as u64).to_le_bytes());
    let d = u.domain();
    for v in [d.x0(), d.x1(), d.y0(), d.y1()] {
        h.update(v.to_bits().to_le_bytes());
    }
    for c in u.coeffs() {
        h.update(c.to_bits().to_le_bytes());
    }
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn problem_section(problem: &ProblemSpec) -> ProblemSection {
    let d = problem.domain();
    ProblemSection {
        lambda: IntervalSer::from_interval(problem.lambda()),
        terms: problem
            .terms()
            .iter()
            .map(|t| TermSection {
                exponent: t.exponent,
                coeff: IntervalSer::from_interval(t.coeff),
            })
            .collect(),
        domain: DomainSection {
            x0: format!("{}", d.x0()),
            x1: format!("{}", d.x1()),
            y0: format!("{}", d.y0()),
            y1: format!("{}", d.y1()),
        },
    }
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

/// Configuration of [`run_pipeline`].
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    /// Galerkin basis size per axis for the approximate solve.
    pub n: usize,
    /// Solver options (defaults to a symmetric solve with basis `n`).
    pub solver: SolveOptions,
    /// Pre-computed approximation; skips the solve stage when given.
    pub approximation: Option<LegendreFunction>,
    /// Subdivision depth for negative-part and flag grids.
    pub grid_depth: usize,
    /// Maximum depth of the adaptive negative-part descent.
    pub adaptive_depth: usize,
    /// Leaf budget of the adaptive negative-part descent.
    pub adaptive_budget: usize,
    /// Certification basis size per axis for the spectral bounds.
    pub cert_basis: usize,
    /// Target for the μ₁ lower bound (theorem2 path).
    pub mu1_target: Option<f64>,
    /// Run exactly this checker instead of the selected ones.
    pub strategy_override: Option<Strategy>,
    /// External sup-norm error radius (corollaryA1 path).
    pub linf_radius: Option<Interval>,
    /// Covering subregion (corollaryA1 path).
    pub superset: Option<SupersetSpec>,
    /// Extra embedding constants `(q, C_q)` registered as supplied.
    pub supplied_embeddings: Vec<(u32, Interval)>,
}

impl PipelineConfig {
    pub fn new(n: usize) -> PipelineConfig {
        PipelineConfig {
            n,
            solver: SolveOptions::new(n),
            approximation: None,
            grid_depth: DEFAULT_GRID_DEPTH,
            adaptive_depth: 10,
            adaptive_budget: 20_000,
            cert_basis: n.max(16),
            mu1_target: None,
            strategy_override: None,
            linf_radius: None,
            superset: None,
            supplied_embeddings: Vec::new(),
        }
    }
}

/// Everything the existence chain accumulates before the verdict.
struct StageData {
    residual: Interval,
    residual_dual: Interval,
    inverse: InverseNormReport,
    mats: CertMatrices,
    lipschitz: Interval,
    nk: Kantorovich,
}

/// Runs the full chain — solve, rigorous residual, inverse-norm bound,
/// Lipschitz bound, Newton–Kantorovich test, positivity checks — and
/// always returns a certificate: failures are recorded with the failing
/// stage instead of being raised.
pub fn run_pipeline(problem: &ProblemSpec, config: &PipelineConfig) -> Certificate {
    let mut registry = ConstantsRegistry::for_domain(problem.domain());
    for (q, v) in &config.supplied_embeddings {
        registry.supply_embedding(*q, *v);
    }
    let mut cert = Certificate {
        schema_version: CERTIFICATE_SCHEMA_VERSION,
        problem: problem_section(problem),
        approximation: None,
        newton_kantorovich: None,
        positivity: None,
        verdict: Verdict::Failed,
        failed_stage: None,
        constants: registry.entries(),
        notes: Vec::new(),
    };

    // Strategy selection first: the impossible sign patterns are
    // classified without any numerical work.
    let plan = if let Some(s) = config.strategy_override {
        cert.notes
            .push(format!("strategy override: running {s:?} only"));
        StrategyPlan::Check(vec![s])
    } else {
        match select_strategy(problem, &registry) {
            Ok(p) => p,
            Err(e) => {
                cert.failed_stage = Some("strategy".to_string());
                cert.notes.push(e.to_string());
                return cert;
            }
        }
    };
    let strategies = match plan {
        StrategyPlan::NoPositiveSolution { reason } => {
            cert.verdict = Verdict::NoPositiveSolution;
            cert.notes.push(reason);
            return cert;
        }
        StrategyPlan::Check(list) => list,
    };

    // Approximation: supplied or solved.
    let u = match obtain_approximation(problem, config) {
        Ok((u, report)) => {
            cert.approximation = Some(approx_section(&u));
            if let Some(r) = report {
                cert.notes.push(solve_note(&r));
            }
            u
        }
        Err(e) => {
            cert.failed_stage = Some("solve".to_string());
            cert.notes.push(e.to_string());
            return cert;
        }
    };

    // Existence chain.
    let data = match existence_chain(problem, config, &registry, &u) {
        Ok(d) => d,
        Err((stage, e)) => {
            cert.failed_stage = Some(stage.to_string());
            cert.notes.push(e.to_string());
            return cert;
        }
    };
    cert.newton_kantorovich = Some(NkSection {
        alpha: Interval::to_decimal_upper(data.nk.alpha, 17),
        beta: Interval::to_decimal_upper(data.nk.beta, 17),
        rho: IntervalSer::from_interval(data.nk.rho),
        uniqueness_radius: IntervalSer::from_interval(data.nk.uniqueness_radius),
        r: data.nk.r,
        product: IntervalSer::from_interval(data.nk.product),
        lipschitz: IntervalSer::from_interval(data.lipschitz),
        inverse_norm: data.inverse.bound,
        residual_l2: IntervalSer::from_interval(data.residual),
        residual_dual: IntervalSer::from_interval(data.residual_dual),
        symmetric_subspace: data.inverse.symmetric_subspace,
    });
    if data.inverse.symmetric_subspace {
        cert.notes.push(
            "the fixed-point argument closes in the subspace of functions symmetric about \
             both axis midlines: existence, the error radius, and local uniqueness are \
             certified within that class"
                .to_string(),
        );
    }
    cert.notes.push(
        "spectral tail bounds use the one-dimensional projection constant certified from \
         the coefficient recursion; its tensor-product extension to the two-dimensional \
         complement is a pinned structural step validated numerically"
            .to_string(),
    );

    // Positivity checks.
    let mut last_failure: Option<String> = None;
    for s in &strategies {
        match run_checker(*s, problem, config, &registry, &u, &data) {
            Ok((section, verdict)) => {
                cert.positivity = Some(section);
                cert.verdict = verdict;
                return cert;
            }
            Err(CheckerOutcome::Inapplicable(msg)) => {
                last_failure = Some(format!("strategy {s:?} not applicable: {msg}"));
            }
            Err(CheckerOutcome::Honest { section, note }) => {
                cert.positivity = Some(section);
                cert.verdict = Verdict::ExistenceOnly;
                cert.notes.push(note);
                return cert;
            }
            Err(CheckerOutcome::Error(e)) => {
                cert.positivity = Some(PositivitySection {
                    strategy: *s,
                    condition: None,
                    threshold: None,
                    margin: None,
                    mu1_lower: None,
                    negative_part_norms: Vec::new(),
                    lambda1_sub: None,
                    undischarged_cells: None,
                    failure: Some(e.to_string()),
                });
                cert.verdict = Verdict::ExistenceOnly;
                cert.notes
                    .push(format!("positivity check {s:?} failed: {e}"));
                return cert;
            }
        }
    }
    // Every candidate refused: existence stands, positivity undetermined.
    cert.verdict = Verdict::ExistenceOnly;
    cert.notes.push(format!(
        "no applicable positivity strategy: {}",
        last_failure.unwrap_or_else(|| "empty strategy list".to_string())
    ));
    cert.failed_stage = Some("positivity-strategy".to_string());
    cert
}

fn approx_section(u: &LegendreFunction) -> ApproxSection {
    ApproxSection {
        n: u.n(),
        digest: approximation_digest(u),
        // Even subdivision count so the grid contains the domain centre,
        // where symmetric ground states peak.
        max_abs: u.max_abs_estimate(128),
    }
}

fn solve_note(r: &SolveReport) -> String {
    format!(
        "float solve: {} Newton steps, coefficient residual {:.3e}, converged = {}",
        r.iterations, r.residual_norm, r.converged
    )
}

/// Returns the supplied approximation (domain-checked) or solves for one.
fn obtain_approximation(
    problem: &ProblemSpec,
    config: &PipelineConfig,
) -> Result<(LegendreFunction, Option<SolveReport>), CertifyError> {
    match &config.approximation {
        Some(u) => {
            if u.domain() != problem.domain() {
                return Err(CertifyError::BadParameter(
                    "approximation domain differs from the problem domain".to_string(),
                ));
            }
            Ok((u.clone(), None))
        }
        None => {
            let (u, r) = crate::galerkin::solve(problem, &config.solver)?;
            Ok((u, Some(r)))
        }
    }
}

/// Existence stages; returns the failing stage name on error.
fn existence_chain(
    problem: &ProblemSpec,
    config: &PipelineConfig,
    registry: &ConstantsRegistry,
    u: &LegendreFunction,
) -> Result<StageData, (&'static str, CertifyError)> {
    let residual = rigor::residual_l2(u, problem).map_err(|e| ("residual", e.into()))?;
    let residual_dual = registry.c2() * residual;
    let mats = eigen::assemble(u, problem, config.cert_basis)
        .map_err(|e| ("assemble", CertifyError::from(e)))?;
    let inverse =
        eigen::inverse_norm_bound(&mats).map_err(|e| ("inverse-norm", CertifyError::from(e)))?;
    let alpha = Interval::point(inverse.bound) * residual_dual;
    let a = alpha.hi();
    let r = (2.0 * a).next_up();
    let lipschitz = lipschitz_bound(problem, u, Interval::point(r), registry)
        .map_err(|e| ("lipschitz", e))?;
    let beta = Interval::point(inverse.bound) * lipschitz;
    let nk = newton_kantorovich(Interval::point(a), Interval::point(beta.hi()))
        .map_err(|e| ("kantorovich", e))?;
    Ok(StageData {
        residual,
        residual_dual,
        inverse,
        mats,
        lipschitz,
        nk,
    })
}

/// How a positivity checker concluded, for pipeline dispatch.
enum CheckerOutcome {
    /// Hypotheses not met; try the next strategy.
    Inapplicable(String),
    /// Ran and failed honestly; certificate records the partial section.
    Honest {
        section: PositivitySection,
        note: String,
    },
    /// Infrastructure error (enclosure failure etc.).
    Error(CertifyError),
}

fn run_checker(
    strategy: Strategy,
    problem: &ProblemSpec,
    config: &PipelineConfig,
    registry: &ConstantsRegistry,
    u: &LegendreFunction,
    data: &StageData,
) -> Result<(PositivitySection, Verdict), CheckerOutcome> {
    match strategy {
        Strategy::Theorem1 => {
            match check_theorem1(problem, u, data.nk.rho, registry, config.grid_depth) {
                Ok(rep) => Ok((
                    theorem1_section(Strategy::Theorem1, &rep, None, None),
                    rep.verdict,
                )),
                Err(CertifyError::StrategyInapplicable(m)) => {
                    Err(CheckerOutcome::Inapplicable(m))
                }
                Err(e) => Err(CheckerOutcome::Error(e)),
            }
        }
        Strategy::Theorem2 => {
            let cfg = Theorem2Config {
                basis: config.cert_basis,
                mu1_target: config.mu1_target,
                depth: config.grid_depth,
                adaptive_depth: config.adaptive_depth,
                budget: config.adaptive_budget,
            };
            match check_theorem2_with(&data.mats, problem, u, data.nk.rho, registry, &cfg) {
                Ok(rep) => Ok((
                    PositivitySection {
                        strategy: Strategy::Theorem2,
                        condition: None,
                        threshold: None,
                        margin: Some(rep.mu1.proved),
                        mu1_lower: Some(rep.mu1.proved),
                        negative_part_norms: vec![NegativeNormSection {
                            space: "H10".to_string(),
                            bound: IntervalSer::from_interval(rep.negative_part.bound),
                        }],
                        lambda1_sub: None,
                        undischarged_cells: None,
                        failure: None,
                    },
                    rep.verdict,
                )),
                Err(CertifyError::StrategyInapplicable(m)) => {
                    Err(CheckerOutcome::Inapplicable(m))
                }
                Err(CertifyError::Assumption4Unverified { bound, rho, mu1 }) => {
                    Err(CheckerOutcome::Honest {
                        section: PositivitySection {
                            strategy: Strategy::Theorem2,
                            condition: None,
                            threshold: None,
                            margin: None,
                            mu1_lower: Some(mu1),
                            negative_part_norms: vec![NegativeNormSection {
                                space: "H10".to_string(),
                                bound: IntervalSer {
                                    lo: "0".to_string(),
                                    hi: Interval::to_decimal_upper(bound, 17),
                                },
                            }],
                            lambda1_sub: None,
                            undischarged_cells: None,
                            failure: Some(format!(
                                "assumption4-unverified: ‖û₋‖_V ≤ {bound:e} is not below \
                                 the radius lower end {rho:e}"
                            )),
                        },
                        note: format!(
                            "ball membership of max(û,0) unverified: ‖û₋‖_V ≤ {bound:e} \
                             vs ρ ≥ {rho:e}"
                        ),
                    })
                }
                Err(CertifyError::Mu1NotPositive { proved }) => Err(CheckerOutcome::Honest {
                    section: PositivitySection {
                        strategy: Strategy::Theorem2,
                        condition: None,
                        threshold: None,
                        margin: None,
                        mu1_lower: Some(proved),
                        negative_part_norms: Vec::new(),
                        lambda1_sub: None,
                        undischarged_cells: None,
                        failure: Some(format!(
                            "mu1-not-positive: certified lower bound {proved:e}"
                        )),
                    },
                    note: format!("μ₁ lower bound not positive ({proved:e})"),
                }),
                Err(e) => Err(CheckerOutcome::Error(e)),
            }
        }
        Strategy::CorollaryA1 => {
            let (r_inf, superset) = match (&config.linf_radius, &config.superset) {
                (Some(r), Some(s)) => (*r, s),
                _ => {
                    return Err(CheckerOutcome::Inapplicable(
                        "needs an external sup-norm error radius and a covering subregion \
                         (not supplied)"
                            .to_string(),
                    ));
                }
            };
            match check_corollary_a1(
                problem,
                u,
                data.nk.rho,
                r_inf,
                superset,
                registry,
                config.grid_depth,
            ) {
                Ok(rep) => Ok((
                    theorem1_section(
                        Strategy::CorollaryA1,
                        &rep.body,
                        Some(rep.lambda1_sub),
                        Some(rep.undischarged_cells),
                    ),
                    rep.body.verdict,
                )),
                Err(CertifyError::StrategyInapplicable(m)) => {
                    Err(CheckerOutcome::Inapplicable(m))
                }
                Err(e) => Err(CheckerOutcome::Error(e)),
            }
        }
    }
}

fn theorem1_section(
    strategy: Strategy,
    rep: &Theorem1Report,
    lambda1_sub: Option<Interval>,
    undischarged: Option<usize>,
) -> PositivitySection {
    PositivitySection {
        strategy,
        condition: Some(IntervalSer::from_interval(rep.condition)),
        threshold: Some(IntervalSer::from_interval(rep.threshold)),
        margin: Some(rep.margin),
        mu1_lower: None,
        negative_part_norms: rep
            .negative_part_norms
            .iter()
            .map(|(q, b)| NegativeNormSection {
                space: format!("L{q}"),
                bound: IntervalSer::from_interval(*b),
            })
            .collect(),
        lambda1_sub: lambda1_sub.map(IntervalSer::from_interval),
        undischarged_cells: undischarged,
        failure: match rep.verdict {
            Verdict::ExistenceOnly => Some("condition-not-satisfied".to_string()),
            _ => None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::solve;

    fn unit_rect() -> Rectangle {
        Rectangle::new(0.0, 1.0, 0.0, 1.0).unwrap()
    }

    fn bump(sign: f64) -> LegendreFunction {
        // ±φ₁⊗φ₁ on the unit square: extremum ±1/16 at the centre,
        // ‖∇·‖_{L²} = √(2/3·1/30) ≈ 0.1491.
        let n = 2;
        let mut coeffs = vec![0.0; n * n];
        coeffs[0] = sign;
        LegendreFunction::new(n, coeffs, unit_rect()).unwrap()
    }

    #[test]
    fn registry_closed_forms_and_pins() {
        let reg = ConstantsRegistry::unit_square();
        let l1 = reg.lambda1();
        assert!(l1.contains(19.739208802178716), "{l1:?}");
        assert!(l1.width() < 1e-12);
        let c2 = reg.c2();
        assert!(c2.contains(0.2250790790392765), "{c2:?}");
        assert!(c2.width() < 1e-12);
        let c4 = reg.embedding(4).unwrap();
        assert!(c4.contains(0.31830989) && c4.width() < 1e-15);
        let c6 = reg.embedding(6).unwrap();
        assert!(c6.contains(0.39585400) && c6.width() < 1e-15);
        // Pinned values are genuine upper bounds for the sharp constants:
        // C₄ must dominate 1/π (the known sharp value on the unit square).
        assert!(c4.hi() >= 1.0 / std::f64::consts::PI);
    }

    #[test]
    fn registry_scales_with_domain_and_refuses_unpinned() {
        let reg =
            ConstantsRegistry::for_domain(Rectangle::new(0.0, 2.0, 0.0, 1.0).unwrap());
        // λ₁(2×1) = π²(1/4 + 1) = 5π²/4.
        let expected = 5.0 * std::f64::consts::PI * std::f64::consts::PI / 4.0;
        assert!(reg.lambda1().contains(expected));
        assert!(matches!(
            reg.embedding(4),
            Err(CertifyError::ConstantUnavailable(4))
        ));
        let mut reg = reg;
        reg.supply_embedding(4, Interval::point(0.5));
        assert_eq!(reg.embedding(4).unwrap(), Interval::point(0.5));
        let entries = reg.entries();
        let c4 = entries.iter().find(|e| e.name == "C4").unwrap();
        assert_eq!(c4.provenance, Provenance::Supplied);
    }

    #[test]
    fn kantorovich_boundary_case_is_exact() {
        // αβ = 1/2 exactly: discriminant collapses, ρ = 2α/(1+0) = 2α = 1/β.
        let k = newton_kantorovich(Interval::point(1.0), Interval::point(0.5)).unwrap();
        assert_eq!(k.product, Interval::point(1.0));
        assert_eq!(k.rho, Interval::point(2.0));
        assert_eq!(k.uniqueness_radius, Interval::point(2.0));
        assert_eq!(k.r, 2.0f64.next_up());
    }

    #[test]
    fn kantorovich_rejects_large_products() {
        match newton_kantorovich(Interval::point(1.0), Interval::point(0.6)) {
            Err(CertifyError::KantorovichFail { hi, .. }) => assert!(hi > 1.0),
            other => panic!("expected KantorovichFail, got {other:?}"),
        }
    }

    #[test]
    fn kantorovich_replays_published_pairs() {
        // Published (α, β) → ρ rows; our enclosure must stay below the
        // published upper bounds.
        let rows = [
            ("4.49954173e-8", "1.15548221", "4.63295216e-8"),
            ("4.55317005e-3", "15.2944468", "5.47604979e-3"),
            ("5.34945174e-5", "2.03118712e+2", "5.37883476e-5"),
        ];
        for (a, b, r) in rows {
            let alpha = Interval::from_decimal(a).unwrap();
            let beta = Interval::from_decimal(b).unwrap();
            let published = Interval::from_decimal(r).unwrap();
            let k = newton_kantorovich(alpha, beta).unwrap();
            assert!(
                k.rho.hi() <= published.hi(),
                "ρ = {:e} exceeds published {r}",
                k.rho.hi()
            );
            // ρ ∈ [α, 2α] whenever the product check passes.
            assert!(k.rho.lo() >= k.alpha * (1.0 - 1e-12));
            assert!(k.rho.hi() <= 2.0 * k.alpha);
        }
    }

    #[test]
    fn lipschitz_vanishes_at_zero() {
        let zero = LegendreFunction::new(2, vec![0.0; 4], unit_rect()).unwrap();
        let problem = ProblemSpec::emden(3);
        let reg = ConstantsRegistry::unit_square();
        let l = lipschitz_bound(&problem, &zero, Interval::ZERO, &reg).unwrap();
        assert_eq!(l.hi(), 0.0);
    }

    #[test]
    fn lipschitz_matches_manual_formula() {
        let u = bump(1.0);
        let problem = ProblemSpec::emden(3);
        let reg = ConstantsRegistry::unit_square();
        let r = Interval::point(0.125);
        let l = lipschitz_bound(&problem, &u, r, &reg).unwrap();
        let c4 = reg.embedding(4).unwrap();
        let norm = rigor::lq_norm_even(&u, 4).unwrap();
        let expected = Interval::point(6.0) * c4.pow_int(3) * (norm + c4 * r);
        assert!(
            (l.mid() - expected.mid()).abs() <= 1e-12 * expected.mid(),
            "{l:?} vs {expected:?}"
        );
    }

    #[test]
    fn strategy_table_classification() {
        let reg = ConstantsRegistry::unit_square();
        let dom = unit_rect();
        let mk = |lambda: f64, coeff: f64| {
            ProblemSpec::new(
                Interval::point(lambda),
                vec![(3, Interval::point(coeff))],
                dom,
            )
            .unwrap()
        };
        // λ < λ₁, a ≥ 0 → theorem1.
        assert_eq!(
            select_strategy(&mk(0.0, 1.0), &reg).unwrap(),
            StrategyPlan::Check(vec![Strategy::Theorem1])
        );
        // λ < λ₁, a ≤ 0 → no positive solution.
        assert!(matches!(
            select_strategy(&mk(0.0, -1.0), &reg).unwrap(),
            StrategyPlan::NoPositiveSolution { .. }
        ));
        // λ ≥ λ₁, a ≥ 0 → no positive solution (3λ₁ case).
        assert!(matches!(
            select_strategy(&mk(3.0 * 19.7393, 1.0), &reg).unwrap(),
            StrategyPlan::NoPositiveSolution { .. }
        ));
        // λ ≥ λ₁, a ≤ 0 → theorem2.
        assert_eq!(
            select_strategy(&mk(25.0, -1.0), &reg).unwrap(),
            StrategyPlan::Check(vec![Strategy::Theorem2])
        );
        // Mixed signs.
        let mixed = ProblemSpec::new(
            Interval::point(25.0),
            vec![(3, Interval::point(-1.0)), (5, Interval::point(2.0))],
            dom,
        )
        .unwrap();
        assert_eq!(
            select_strategy(&mixed, &reg).unwrap(),
            StrategyPlan::Check(vec![Strategy::CorollaryA1])
        );
        let mixed_low = ProblemSpec::new(
            Interval::point(1.0),
            vec![(3, Interval::point(-1.0)), (5, Interval::point(2.0))],
            dom,
        )
        .unwrap();
        assert_eq!(
            select_strategy(&mixed_low, &reg).unwrap(),
            StrategyPlan::Check(vec![Strategy::Theorem1])
        );
        // λ enclosure straddling λ₁ → indeterminate.
        let straddle = ProblemSpec::new(
            Interval::new(19.0, 20.0),
            vec![(3, Interval::point(1.0))],
            dom,
        )
        .unwrap();
        assert!(matches!(
            select_strategy(&straddle, &reg),
            Err(CertifyError::Indeterminate)
        ));
    }

    #[test]
    fn theorem1_refuses_supercritical_lambda() {
        let reg = ConstantsRegistry::unit_square();
        let problem = ProblemSpec::new(
            Interval::point(60.0),
            vec![(3, Interval::point(1.0))],
            unit_rect(),
        )
        .unwrap();
        let u = bump(1.0);
        match check_theorem1(&problem, &u, Interval::point(1e-3), &reg, 4) {
            Err(CertifyError::StrategyInapplicable(_)) => {}
            other => panic!("expected StrategyInapplicable, got {other:?}"),
        }
    }

    #[test]
    fn theorem1_positive_for_nonnegative_bump() {
        // û = φ₁⊗φ₁ ≥ 0 exactly, so the negative part vanishes and the
        // condition reduces to C₄²(C₄ρ)² ≪ 1.
        let reg = ConstantsRegistry::unit_square();
        let problem = ProblemSpec::emden(3);
        let u = bump(1.0);
        let rep = check_theorem1(&problem, &u, Interval::point(1e-3), &reg, 4).unwrap();
        assert_eq!(rep.verdict, Verdict::Positive);
        assert!(rep.margin > 0.99, "margin {}", rep.margin);
        assert_eq!(rep.negative_part_norms.len(), 1);
        assert_eq!(rep.negative_part_norms[0].0, 4);
        assert!(rep.negative_part_norms[0].1.hi() < 1e-8);
        assert!(rep.nontrivial);
        // Condition value oracle: C₄²(0 + C₄·10⁻³)² ≈ 1.0267e-9.
        let c4 = 0.31830989f64;
        let expected = c4.powi(2) * (c4 * 1e-3).powi(2);
        assert!((rep.condition.hi() - expected).abs() < 1e-10);
    }

    #[test]
    fn theorem1_drops_nonpositive_terms() {
        // The a₇ = -2 term must be dropped *before* its embedding constant
        // is looked up: C₈ is not registered, so a failure to drop would
        // surface as ConstantUnavailable(8).
        let reg = ConstantsRegistry::unit_square();
        let problem = ProblemSpec::new(
            Interval::point(0.0),
            vec![(3, Interval::point(1.0)), (7, Interval::point(-2.0))],
            unit_rect(),
        )
        .unwrap();
        let rep = check_theorem1(&problem, &bump(1.0), Interval::point(1e-3), &reg, 4).unwrap();
        assert_eq!(rep.negative_part_norms.len(), 1);
        assert_eq!(rep.negative_part_norms[0].0, 4);
    }

    #[test]
    fn theorem1_fails_when_threshold_collapses() {
        // λ close to λ₁ from below: threshold 1 - λ/λ₁ ≈ 2.5e-3 while the
        // condition with a large ρ stays ≫ threshold → existence-only.
        let reg = ConstantsRegistry::unit_square();
        let problem = ProblemSpec::new(
            Interval::point(19.69),
            vec![(3, Interval::point(1.0))],
            unit_rect(),
        )
        .unwrap();
        let rep = check_theorem1(&problem, &bump(1.0), Interval::point(2.0), &reg, 4).unwrap();
        assert_eq!(rep.verdict, Verdict::ExistenceOnly);
        assert!(rep.margin < 0.0);
    }

    #[test]
    fn theorem2_gate_rejects_positive_coefficients() {
        let reg = ConstantsRegistry::unit_square();
        let problem = ProblemSpec::emden(3); // a₃ = +1
        let cfg = Theorem2Config::new(8);
        match check_theorem2(&problem, &bump(1.0), Interval::point(0.1), &reg, &cfg) {
            Err(CertifyError::StrategyInapplicable(_)) => {}
            other => panic!("expected StrategyInapplicable, got {other:?}"),
        }
    }

    #[test]
    fn theorem2_detects_negative_mu1() {
        // f'(û) ≈ 25 everywhere beats λ₁ ≈ 19.7, so μ₁ < 0.
        let reg = ConstantsRegistry::unit_square();
        let problem = ProblemSpec::new(
            Interval::point(25.0),
            vec![(3, Interval::point(-1.0))],
            unit_rect(),
        )
        .unwrap();
        let cfg = Theorem2Config::new(10);
        match check_theorem2(&problem, &bump(-1.0), Interval::point(0.2), &reg, &cfg) {
            Err(CertifyError::Mu1NotPositive { proved }) => assert!(proved < 0.0),
            other => panic!("expected Mu1NotPositive, got {other:?}"),
        }
    }

    #[test]
    fn theorem2_gates_ball_membership_and_nontriviality() {
        // Linear problem with λ = 5 keeps μ₁ ≈ λ₁ - 5 > 0; û = -φ₁⊗φ₁ has
        // ‖û₋‖_V ≈ 0.149.
        let reg = ConstantsRegistry::unit_square();
        let problem =
            ProblemSpec::new(Interval::point(5.0), vec![], unit_rect()).unwrap();
        let cfg = Theorem2Config::new(10);
        // ρ below the negative-part energy: honest Assumption-4 failure.
        match check_theorem2(&problem, &bump(-1.0), Interval::point(0.01), &reg, &cfg) {
            Err(CertifyError::Assumption4Unverified { bound, rho, mu1 }) => {
                assert!(bound > 0.1 && rho == 0.01 && mu1 > 0.0);
            }
            other => panic!("expected Assumption4Unverified, got {other:?}"),
        }
        // ρ above it: the next gate (nowhere provably positive) fires.
        match check_theorem2(&problem, &bump(-1.0), Interval::point(0.2), &reg, &cfg) {
            Err(CertifyError::NowherePositive) => {}
            other => panic!("expected NowherePositive, got {other:?}"),
        }
    }

    #[test]
    fn frame_eigenvalue_bound_and_geometry() {
        let dom = unit_rect();
        // Frame bound π²/(2w²) for w = 0.05: ≈ 1973.9.
        let l = frame_lambda1(0.05, &dom).unwrap();
        let expected = std::f64::consts::PI.powi(2) / (2.0 * 0.05f64.powi(2));
        assert!((l.mid() - expected).abs() < 1e-9 * expected);
        // Invalid frames.
        assert!(frame_lambda1(0.5, &dom).is_err());
        assert!(frame_lambda1(0.0, &dom).is_err());
        // Disjoint rectangles: eigenvalue is the min of the closed forms.
        let r1 = Rectangle::new(0.0, 0.2, 0.0, 1.0).unwrap(); // π²(25+1)
        let r2 = Rectangle::new(0.3, 0.8, 0.2, 0.5).unwrap(); // π²(4+1/0.09)
        let l = superset_lambda1(&SupersetSpec::Rectangles(vec![r1, r2]), &dom).unwrap();
        let e1 = std::f64::consts::PI.powi(2) * 26.0;
        let e2 = std::f64::consts::PI.powi(2) * (4.0 + 1.0 / 0.09);
        assert!((l.mid() - e1.min(e2)).abs() < 1e-9 * e1.min(e2));
        // Touching rectangles are rejected.
        let r3 = Rectangle::new(0.2, 0.4, 0.0, 1.0).unwrap();
        let r1b = Rectangle::new(0.0, 0.2, 0.0, 1.0).unwrap();
        assert!(matches!(
            superset_lambda1(&SupersetSpec::Rectangles(vec![r1b, r3]), &dom),
            Err(CertifyError::SupersetNotDisjoint)
        ));
    }

    #[test]
    fn corollary_a1_frame_certifies_positive_bump() {
        // û = φ₁⊗φ₁: everything except a boundary ring is provably above
        // r_inf = 10⁻³ at depth 4; the ring fits in a frame of width 0.07.
        let reg = ConstantsRegistry::unit_square();
        let problem = ProblemSpec::emden(3); // λ = 0 < any subregion bound
        let u = bump(1.0);
        let rep = check_corollary_a1(
            &problem,
            &u,
            Interval::point(1e-3),
            Interval::point(1e-3),
            &SupersetSpec::BoundaryFrame { width: 0.07 },
            &reg,
            4,
        )
        .unwrap();
        assert_eq!(rep.body.verdict, Verdict::Positive);
        assert!(rep.undischarged_cells >= 60); // at least the outer ring
        let expected = std::f64::consts::PI.powi(2) / (2.0 * 0.07f64.powi(2));
        assert!((rep.lambda1_sub.mid() - expected).abs() < 1e-9 * expected);
        // λ = 0 degenerate: threshold is exactly 1.
        assert_eq!(rep.body.threshold.lo(), 1.0);
        assert_eq!(rep.body.threshold.hi(), 1.0);

        // A too-narrow frame cannot cover the 1/16-sized ring cells.
        match check_corollary_a1(
            &problem,
            &u,
            Interval::point(1e-3),
            Interval::point(1e-3),
            &SupersetSpec::BoundaryFrame { width: 0.03 },
            &reg,
            4,
        ) {
            Err(CertifyError::SupersetDoesNotCover { count }) => assert!(count > 0),
            other => panic!("expected SupersetDoesNotCover, got {other:?}"),
        }
    }

    #[test]
    fn corollary_a1_whole_domain_rectangle_recovers_global_bound() {
        // Covering with Ω itself reduces to the global criterion: the
        // subregion eigenvalue equals λ₁(Ω).
        let reg = ConstantsRegistry::unit_square();
        let problem = ProblemSpec::emden(3);
        let u = bump(-1.0); // no cell provably above r_inf
        let rep = check_corollary_a1(
            &problem,
            &u,
            Interval::point(1e-3),
            Interval::point(1e-3),
            &SupersetSpec::Rectangles(vec![unit_rect()]),
            &reg,
            3,
        )
        .unwrap();
        assert_eq!(rep.undischarged_cells, 64);
        assert!(rep.lambda1_sub.contains(19.739208802178716));
        assert_eq!(rep.body.verdict, Verdict::Positive);
    }

    #[test]
    fn pipeline_classifies_impossible_sign_pattern_without_computing() {
        let problem = ProblemSpec::new(
            Interval::point(3.0 * 19.7393),
            vec![(3, Interval::point(1.0))],
            unit_rect(),
        )
        .unwrap();
        let config = PipelineConfig::new(8);
        let cert = run_pipeline(&problem, &config);
        assert_eq!(cert.verdict, Verdict::NoPositiveSolution);
        assert!(cert.approximation.is_none());
        assert!(cert.newton_kantorovich.is_none());
    }

    #[test]
    fn pipeline_fails_honestly_on_tiny_basis() {
        // N = 3 cannot push the residual low enough: the product check
        // αβ ≤ 1/2 must fail and the stage must be recorded.
        let problem = ProblemSpec::emden(3);
        let mut config = PipelineConfig::new(3);
        config.cert_basis = 20;
        let cert = run_pipeline(&problem, &config);
        assert_eq!(cert.verdict, Verdict::Failed);
        assert_eq!(cert.failed_stage.as_deref(), Some("kantorovich"));
        assert!(cert.approximation.is_some());
        let json = cert.to_json();
        let back = Certificate::from_json(&json).unwrap();
        assert_eq!(back.verdict, Verdict::Failed);
        assert_eq!(back.failed_stage.as_deref(), Some("kantorovich"));
    }

    #[test]
    fn certificate_serialization_round_trips_enclosures() {
        let x = Interval::new(-1.2345678901234567e-8, 3.3306690738754696e-16);
        let ser = IntervalSer::from_interval(x);
        let back = ser.to_interval().unwrap();
        assert!(back.lo() <= x.lo() && x.hi() <= back.hi());
        // Verdict strings follow the documented schema.
        assert_eq!(
            serde_json::to_string(&Verdict::ExistenceOnly).unwrap(),
            "\"existence-only\""
        );
        assert_eq!(
            serde_json::to_string(&Strategy::CorollaryA1).unwrap(),
            "\"corollaryA1\""
        );
        assert_eq!(
            serde_json::to_string(&Provenance::ClosedForm).unwrap(),
            "\"closed-form\""
        );
    }

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        let u = bump(1.0);
        let d1 = approximation_digest(&u);
        let d2 = approximation_digest(&bump(1.0));
        assert_eq!(d1, d2);
        assert_eq!(d1.len(), 64);
        let other = bump(-1.0);
        assert_ne!(d1, approximation_digest(&other));
    }

    #[test]
    fn compute_alpha_composes_the_chain() {
        // Small Emden solve; the standalone α must match the manual
        // product of its three factors.
        let problem = ProblemSpec::emden(3);
        let (u, _) = solve(&problem, &SolveOptions::new(8)).unwrap();
        let reg = ConstantsRegistry::unit_square();
        let alpha = compute_alpha(&u, &problem, &reg, 24).unwrap();
        let mats = eigen::assemble(&u, &problem, 24).unwrap();
        let inv = eigen::inverse_norm_bound(&mats).unwrap();
        let res = rigor::residual_l2(&u, &problem).unwrap();
        let manual = Interval::point(inv.bound) * reg.c2() * res;
        assert!((alpha.hi() - manual.hi()).abs() <= 1e-15 * manual.hi().abs());
        assert!(alpha.hi() > 0.0);
    }
}
