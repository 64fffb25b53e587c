//! Run configuration: a TOML file with sections `[problem]`, `[solver]`,
//! `[rigor]`, `[output]`.
//!
//! Every value that feeds a rigorous computation (λ, coefficients, ε, the
//! `L∞` radius, supplied constants) is written as a *decimal string* and
//! parsed into an outward-rounded interval, so the configured number — not
//! a silently rounded binary neighbour — is what gets certified.  Plain
//! TOML floats are rejected in those positions.  Rectangle corners and
//! heuristic solver knobs are ordinary floats: the rectangle's binary
//! corners *define* the domain, and the solver tolerances never enter a
//! proof.

use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use ellipcert_core::certify::{Strategy, SupersetSpec};
use ellipcert_core::galerkin::{ProblemSpec, SolveOptions};
use ellipcert_core::interval::Interval;
use ellipcert_core::legendre::{QuadratureRule, Rectangle, MAX_QUAD_ORDER};

/// Configuration-level failures; all of them map to exit code 2.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

// ---------------------------------------------------------------------------
// Exact decimals
// ---------------------------------------------------------------------------

/// A decimal literal kept as text so serialisation round-trips exactly and
/// the rigorous path can parse it outward.  Accepts TOML strings and
/// integers; rejects TOML floats (their decimal text is already lost).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decimal(String);

impl Decimal {
    pub fn parse(s: &str) -> Result<Decimal, ConfigError> {
        Interval::from_decimal(s)
            .map_err(|e| invalid(format!("bad decimal literal {s:?}: {e}")))?;
        Ok(Decimal(s.to_string()))
    }

    /// Outward-rounded enclosure of the decimal value.
    pub fn interval(&self) -> Interval {
        Interval::from_decimal(&self.0).expect("validated on construction")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Decimal, D::Error> {
        struct V;
        impl<'de> serde::de::Visitor<'de> for V {
            type Value = Decimal;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a decimal string (or integer)")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Decimal, E> {
                Decimal::parse(v).map_err(E::custom)
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Decimal, E> {
                Decimal::parse(&v.to_string()).map_err(E::custom)
            }
            fn visit_f64<E: serde::de::Error>(self, _: f64) -> Result<Decimal, E> {
                Err(E::custom(
                    "write this value as a string: TOML floats are binary and lose \
                     the decimal digits the rigorous path must parse outward",
                ))
            }
        }
        d.deserialize_any(V)
    }
}

// ---------------------------------------------------------------------------
// Sections
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub solver: SolverConfig,
    pub rigor: RigorConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemConfig {
    /// Linear coefficient λ (decimal string or integer).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Decimal>,
    /// Nonlinear terms `aᵢ · t|t|^{i−1}`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermConfig>,
    /// Shortcut for `f(t) = ε⁻²(t − t³)`; mutually exclusive with
    /// `lambda`/`terms`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Decimal>,
    /// Domain `[x0, x1, y0, y1]`; defaults to the unit square.  The binary
    /// float corners define the domain exactly.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rectangle: Option<[f64; 4]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub exponent: u32,
    pub coeff: Decimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Galerkin basis size per axis (≥ 2).
    pub n: usize,
    /// Newton tolerance on the coefficient-space residual 2-norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial-guess peak height (`None`: scale automatically).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Solve in the subspace symmetric about both axis midlines.
    pub symmetric: bool,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            n: 24,
            tol: 1e-13,
            max_iter: 50,
            amplitude: None,
            symmetric: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RigorConfig {
    /// Subdivision depth k of the uniform range/flag grids (1..=12).
    pub depth: usize,
    /// Spare quadrature-order capacity to require at validation time.  The
    /// rigorous chains already integrate every polynomial integrand with a
    /// rule of exactly sufficient degree; the margin makes configurations
    /// that would come within `quad_margin` of the largest supported order
    /// fail fast at parse time instead of mid-run.
    pub quad_margin: usize,
    /// Basis size per axis of the spectral certification space (defaults
    /// to `max(solver.n, 16)`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cert_basis: Option<usize>,
    /// Maximum depth of the adaptive negative-part descent (1..=12).
    pub adaptive_depth: usize,
    /// Leaf budget of the adaptive negative-part descent.
    pub adaptive_budget: usize,
    /// Run exactly this positivity checker: `"theorem1"`, `"theorem2"`, or
    /// `"corollaryA1"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    /// Target for the μ₁ lower bound (theorem2 path).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu1_target: Option<f64>,
    /// Externally certified `L∞` error radius (corollaryA1 path).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linf_radius: Option<Decimal>,
    /// Covering superset: boundary frame of this width…
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_width: Option<f64>,
    /// …or a list of pairwise disjoint rectangles `[x0, x1, y0, y1]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub superset: Option<Vec<[f64; 4]>>,
    /// Caller-supplied embedding constants (provenance `supplied`).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub embeddings: Vec<EmbeddingConfig>,
}

impl Default for RigorConfig {
    fn default() -> RigorConfig {
        RigorConfig {
            depth: 7,
            quad_margin: 0,
            cert_basis: None,
            adaptive_depth: 10,
            adaptive_budget: 20_000,
            strategy: None,
            mu1_target: None,
            linf_radius: None,
            frame_width: None,
            superset: None,
            embeddings: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingConfig {
    /// Exponent q of `‖u‖_{L^q} ≤ C_q ‖u‖_V`.
    pub q: u32,
    /// Certified enclosure endpoints, as decimals.
    pub lo: Decimal,
    pub hi: Decimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Approximation file written by `solve` / read by `certify`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approx: Option<PathBuf>,
    /// Certificate JSON written by `certify`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<PathBuf>,
    /// Surface-sample CSV written by `plot-data`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
    /// Flag-grid CSV written by `plot-data` (only when set).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag_grid: Option<PathBuf>,
    /// Samples per axis of the surface CSV (≥ 2; odd counts include the
    /// domain centre).
    pub plot_points: usize,
}

impl Default for OutputConfig {
    fn default() -> OutputConfig {
        OutputConfig {
            approx: None,
            certificate: None,
            plot: None,
            flag_grid: None,
            plot_points: 101,
        }
    }
}

// ---------------------------------------------------------------------------
// Loading, validation, derived objects
// ---------------------------------------------------------------------------

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|err| ConfigError::Io {
            path: path.display().to_string(),
            err,
        })?;
        RunConfig::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical serialisation; `from_toml(to_toml(c)) == c` exactly.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialisation cannot fail")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.solver.n < 2 {
            return Err(invalid(format!(
                "solver.n = {} but the basis needs at least 2 modes per axis",
                self.solver.n
            )));
        }
        if !(1..=12).contains(&self.rigor.depth) {
            return Err(invalid(format!(
                "rigor.depth = {} outside 1..=12",
                self.rigor.depth
            )));
        }
        if !(1..=12).contains(&self.rigor.adaptive_depth) {
            return Err(invalid(format!(
                "rigor.adaptive_depth = {} outside 1..=12",
                self.rigor.adaptive_depth
            )));
        }
        if let Some(m) = self.rigor.cert_basis {
            if m < 4 {
                return Err(invalid("rigor.cert_basis must be at least 4"));
            }
        }
        if self.output.plot_points < 2 {
            return Err(invalid("output.plot_points must be at least 2"));
        }
        if self.problem.epsilon.is_some()
            && (self.problem.lambda.is_some() || !self.problem.terms.is_empty())
        {
            return Err(invalid(
                "problem.epsilon is a shortcut for λ = ε⁻², a₃ = -ε⁻²; \
                 do not combine it with problem.lambda / problem.terms",
            ));
        }
        if let Some(eps) = &self.problem.epsilon {
            if eps.interval().lo() <= 0.0 {
                return Err(invalid("problem.epsilon must be positive"));
            }
        }
        if self.rigor.frame_width.is_some() && self.rigor.superset.is_some() {
            return Err(invalid(
                "rigor.frame_width and rigor.superset are alternative covering \
                 supersets; give one of them",
            ));
        }
        if let Some(s) = &self.rigor.strategy {
            self.strategy_override()?;
            let _ = s;
        }
        for e in &self.rigor.embeddings {
            if e.q < 2 {
                return Err(invalid("embedding exponent q must be ≥ 2"));
            }
            if e.lo.interval().lo() > e.hi.interval().hi() {
                return Err(invalid(format!(
                    "embedding C{}: lo > hi",
                    e.q
                )));
            }
        }
        self.check_quadrature_capacity()?;
        Ok(())
    }

    pub fn domain(&self) -> Result<Rectangle, ConfigError> {
        match self.problem.rectangle {
            None => Ok(Rectangle::UNIT),
            Some([x0, x1, y0, y1]) => Rectangle::new(x0, x1, y0, y1)
                .map_err(|e| invalid(format!("problem.rectangle: {e}"))),
        }
    }

    /// Builds the problem the run certifies.
    pub fn problem_spec(&self) -> Result<ProblemSpec, ConfigError> {
        let domain = self.domain()?;
        if let Some(eps) = &self.problem.epsilon {
            if domain.is_unit() {
                return Ok(ProblemSpec::allen_cahn(eps.interval()));
            }
            let e = eps.interval();
            let lam = Interval::ONE / (e * e);
            return ProblemSpec::new(lam, vec![(3, -lam)], domain)
                .map_err(|e| invalid(format!("problem: {e}")));
        }
        if self.problem.lambda.is_none() && self.problem.terms.is_empty() {
            return Err(invalid(
                "empty [problem] section: give epsilon, or lambda and/or terms",
            ));
        }
        let lambda = self
            .problem
            .lambda
            .as_ref()
            .map(|d| d.interval())
            .unwrap_or(Interval::ZERO);
        let terms = self
            .problem
            .terms
            .iter()
            .map(|t| (t.exponent, t.coeff.interval()))
            .collect();
        ProblemSpec::new(lambda, terms, domain).map_err(|e| invalid(format!("problem: {e}")))
    }

    pub fn solve_options(&self) -> SolveOptions {
        let mut o = SolveOptions::new(self.solver.n);
        o.tol = self.solver.tol;
        o.max_iter = self.solver.max_iter;
        o.amplitude = self.solver.amplitude;
        o.symmetric = self.solver.symmetric;
        o
    }

    pub fn cert_basis(&self) -> usize {
        self.rigor.cert_basis.unwrap_or(self.solver.n.max(16))
    }

    pub fn strategy_override(&self) -> Result<Option<Strategy>, ConfigError> {
        match self.rigor.strategy.as_deref() {
            None => Ok(None),
            Some("theorem1") => Ok(Some(Strategy::Theorem1)),
            Some("theorem2") => Ok(Some(Strategy::Theorem2)),
            Some("corollaryA1") => Ok(Some(Strategy::CorollaryA1)),
            Some(other) => Err(invalid(format!(
                "rigor.strategy = {other:?}; expected \"theorem1\", \"theorem2\" \
                 or \"corollaryA1\""
            ))),
        }
    }

    pub fn superset_spec(&self) -> Result<Option<SupersetSpec>, ConfigError> {
        if let Some(w) = self.rigor.frame_width {
            return Ok(Some(SupersetSpec::BoundaryFrame { width: w }));
        }
        match &self.rigor.superset {
            None => Ok(None),
            Some(rects) => {
                let mut out = Vec::with_capacity(rects.len());
                for &[x0, x1, y0, y1] in rects {
                    out.push(
                        Rectangle::new(x0, x1, y0, y1)
                            .map_err(|e| invalid(format!("rigor.superset: {e}")))?,
                    );
                }
                Ok(Some(SupersetSpec::Rectangles(out)))
            }
        }
    }

    pub fn supplied_embeddings(&self) -> Vec<(u32, Interval)> {
        self.rigor
            .embeddings
            .iter()
            .map(|e| (e.q, e.lo.interval().hull(e.hi.interval())))
            .collect()
    }

    /// Fail-fast capacity check: the largest quadrature order the run will
    /// request, plus the configured margin, must be supported.
    fn check_quadrature_capacity(&self) -> Result<(), ConfigError> {
        let emax = self
            .problem
            .terms
            .iter()
            .map(|t| t.exponent as usize)
            .chain(self.problem.epsilon.iter().map(|_| 3))
            .max()
            .unwrap_or(1);
        let n = self.solver.n;
        let m = self.cert_basis();
        // Dominant requirement: the certification forms integrate
        // f′(û)·φφ and f′(û)²·φφ, of degree ≤ 2(emax−1)(n+1) + 2(m+1).
        let degree = 2 * emax.saturating_sub(1) * (n + 1) + 2 * (m + 1);
        let order = QuadratureRule::order_for_degree(degree);
        if order + self.rigor.quad_margin > MAX_QUAD_ORDER {
            return Err(invalid(format!(
                "certification integrals need Gauss order {order} \
                 (+ margin {}) but only order ≤ {MAX_QUAD_ORDER} is supported; \
                 lower solver.n or rigor.cert_basis",
                self.rigor.quad_margin
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
[problem]
lambda = "0"
terms = [{ exponent = 3, coeff = "1" }]

[solver]
n = 16

[rigor]
depth = 5

[output]
certificate = "emden3.cert.json"
"#;

    #[test]
    fn parses_and_round_trips_idempotently() {
        let c1 = RunConfig::from_toml(EXAMPLE).unwrap();
        let s1 = c1.to_toml();
        let c2 = RunConfig::from_toml(&s1).unwrap();
        let s2 = c2.to_toml();
        assert_eq!(c1, c2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn rejects_tiny_basis() {
        let err = RunConfig::from_toml("[problem]\nlambda = \"1\"\n[solver]\nn = 0\n")
            .unwrap_err();
        assert!(err.to_string().contains("at least 2"), "{err}");
    }

    #[test]
    fn rejects_float_decimals() {
        let err = RunConfig::from_toml("[problem]\nlambda = 0.5\n").unwrap_err();
        assert!(err.to_string().contains("string"), "{err}");
    }

    #[test]
    fn epsilon_shortcut_builds_allen_cahn() {
        let c = RunConfig::from_toml("[problem]\nepsilon = \"0.1\"\n").unwrap();
        let p = c.problem_spec().unwrap();
        assert!(p.lambda().contains(100.0));
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].exponent, 3);
        assert!(p.terms()[0].coeff.contains(-100.0));
    }

    #[test]
    fn epsilon_conflicts_with_terms() {
        let err = RunConfig::from_toml(
            "[problem]\nepsilon = \"0.1\"\nterms = [{ exponent = 3, coeff = \"1\" }]\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("shortcut"), "{err}");
    }

    #[test]
    fn depth_range_enforced() {
        let err =
            RunConfig::from_toml("[problem]\nlambda = \"1\"\n[rigor]\ndepth = 13\n").unwrap_err();
        assert!(err.to_string().contains("1..=12"), "{err}");
    }

    #[test]
    fn quadrature_capacity_guard_trips() {
        let err = RunConfig::from_toml(
            "[problem]\nterms = [{ exponent = 9, coeff = \"1\" }]\n[solver]\nn = 120\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("Gauss order"), "{err}");
    }

    #[test]
    fn strategy_names_checked() {
        let err = RunConfig::from_toml(
            "[problem]\nlambda = \"1\"\n[rigor]\nstrategy = \"theorem9\"\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("theorem9"), "{err}");
        let c = RunConfig::from_toml(
            "[problem]\nlambda = \"1\"\n[rigor]\nstrategy = \"corollaryA1\"\n",
        )
        .unwrap();
        assert_eq!(c.strategy_override().unwrap(), Some(Strategy::CorollaryA1));
    }
}
