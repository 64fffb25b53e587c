//! The four commands: `solve`, `certify`, `plot-data`, `constants`.
//!
//! Exit-code contract (enforced by `CliError::exit_code` and
//! [`certify_exit_code`]):
//!
//! * `0` — success; for `certify`, exactly when the verdict is
//!   `nonnegative` or `positive`,
//! * `1` — runtime failure (I/O, diverging solver),
//! * `2` — configuration / input parse errors,
//! * `3` — a certificate was produced but the verdict is not a positivity
//!   result (`failed`, `existence-only`, `no-positive-solution`),
//! * `4` — no positivity strategy was applicable to the problem class.
//!
//! On every non-zero exit the failing stage is written to stderr as
//! `stage: <name>`.

use std::path::{Path, PathBuf};

use thiserror::Error;

use ellipcert_core::certify::{
    run_pipeline, Certificate, ConstantsRegistry, PipelineConfig, Verdict,
};
use ellipcert_core::galerkin::{self, GalerkinError, ProblemSpec};
use ellipcert_core::interval::Interval;
use ellipcert_core::legendre::LegendreFunction;
use ellipcert_core::rigor::{build_flag_grid, RigorError};

use crate::approx;
use crate::config::{ConfigError, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Approx(#[from] approx::ApproxError),
    #[error("cannot write {path}: {err}")]
    Write { path: String, err: std::io::Error },
    #[error("solver failed: {0}")]
    Solve(#[from] GalerkinError),
    #[error("range evaluation failed: {0}")]
    Rigor(#[from] RigorError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Approx(_) | CliError::Usage(_) => 2,
            CliError::Write { .. } | CliError::Solve(_) | CliError::Rigor(_) => 1,
        }
    }

    /// Stage name reported on stderr.
    pub fn stage(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Usage(_) => "config",
            CliError::Approx(_) => "approx-file",
            CliError::Write { .. } => "output",
            CliError::Solve(_) => "solve",
            CliError::Rigor(_) => "flag-grid",
        }
    }
}

/// Resolved command-line context shared by all commands.
pub struct Ctx {
    pub config_path: Option<PathBuf>,
    pub config: RunConfig,
    pub approx_path: Option<PathBuf>,
    pub depth_override: Option<usize>,
    pub out: Option<PathBuf>,
    /// Worker-thread cap from `--jobs` or `ELLIPCERT_THREADS`.  Every
    /// rigorous chain in this build is single-threaded, so any cap ≥ 1 is
    /// trivially honored; the value is validated and recorded.
    pub jobs: usize,
}

impl Ctx {
    fn require_config_path(&self) -> Result<&Path, CliError> {
        self.config_path
            .as_deref()
            .ok_or_else(|| CliError::Usage("this command needs --config <file>".to_string()))
    }

    fn depth(&self) -> usize {
        self.depth_override.unwrap_or(self.config.rigor.depth)
    }

    /// Output path resolution: `--out`, then the configured path, then a
    /// name derived from the config file.
    fn resolve_out(
        &self,
        configured: Option<&Path>,
        extension: &str,
        fallback: &str,
    ) -> PathBuf {
        if let Some(o) = &self.out {
            return o.clone();
        }
        if let Some(c) = configured {
            return c.to_path_buf();
        }
        match &self.config_path {
            Some(p) => p.with_extension(extension),
            None => PathBuf::from(fallback),
        }
    }
}

pub fn parse_depth_flag(depth: Option<usize>) -> Result<Option<usize>, CliError> {
    match depth {
        Some(d) if !(1..=12).contains(&d) => Err(CliError::Usage(format!(
            "--depth {d} outside 1..=12"
        ))),
        other => Ok(other),
    }
}

pub fn resolve_jobs(flag: Option<usize>) -> Result<usize, CliError> {
    let jobs = match flag {
        Some(j) => j,
        None => match std::env::var("ELLIPCERT_THREADS") {
            Err(_) => 1,
            Ok(v) => v.parse().map_err(|_| {
                CliError::Usage(format!(
                    "ELLIPCERT_THREADS = {v:?} is not a thread count"
                ))
            })?,
        },
    };
    if jobs == 0 {
        return Err(CliError::Usage("the worker-thread cap must be ≥ 1".to_string()));
    }
    Ok(jobs)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|err| CliError::Write {
        path: path.display().to_string(),
        err,
    })
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

pub fn cmd_solve(ctx: &Ctx) -> Result<i32, CliError> {
    ctx.require_config_path()?;
    let problem = ctx.config.problem_spec()?;
    let options = ctx.config.solve_options();
    let (u, report) = galerkin::solve(&problem, &options)?;
    let digest = approx::problem_digest(&problem);
    let path = ctx.resolve_out(ctx.config.output.approx.as_deref(), "approx", "solution.approx");
    approx::write(&path, &u, &digest)?;
    // Even subdivision count ⇒ the grid contains the domain centre, where
    // the symmetric ground states peak.
    let max = u.max_abs_estimate(128);
    println!(
        "solved: n = {}, {} Newton steps, coefficient residual {:.3e}, converged = {}",
        u.n(),
        report.iterations,
        report.residual_norm,
        report.converged
    );
    println!("max |û| ≈ {max:.5} on a 129×129 sample grid");
    println!("wrote {}", path.display());
    Ok(0)
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

pub fn cmd_certify(ctx: &Ctx) -> Result<i32, CliError> {
    ctx.require_config_path()?;
    let problem = ctx.config.problem_spec()?;

    let mut pipeline = PipelineConfig::new(ctx.config.solver.n);
    pipeline.solver = ctx.config.solve_options();
    pipeline.grid_depth = ctx.depth();
    pipeline.adaptive_depth = ctx.config.rigor.adaptive_depth.max(ctx.depth());
    pipeline.adaptive_budget = ctx.config.rigor.adaptive_budget;
    pipeline.cert_basis = ctx.config.cert_basis();
    pipeline.mu1_target = ctx.config.rigor.mu1_target;
    pipeline.strategy_override = ctx.config.strategy_override()?;
    pipeline.linf_radius = ctx.config.rigor.linf_radius.as_ref().map(|d| d.interval());
    pipeline.superset = ctx.config.superset_spec()?;
    pipeline.supplied_embeddings = ctx.config.supplied_embeddings();

    if let Some(path) = &ctx.approx_path {
        let (u, stored_digest) = approx::read(path)?;
        let expected = approx::problem_digest(&problem);
        if stored_digest != expected {
            return Err(CliError::Usage(format!(
                "{} was solved for a different problem (digest {} ≠ {})",
                path.display(),
                &stored_digest[..12.min(stored_digest.len())],
                &expected[..12]
            )));
        }
        pipeline.approximation = Some(u);
    }

    let cert = run_pipeline(&problem, &pipeline);

    let json = cert.to_json();
    let path = ctx.resolve_out(
        ctx.config.output.certificate.as_deref(),
        "cert.json",
        "certificate.json",
    );
    write_file(&path, &json)?;
    print_certificate_table(&cert, &path);

    let code = certify_exit_code(&cert);
    if code != 0 {
        eprintln!(
            "stage: {}",
            cert.failed_stage.as_deref().unwrap_or("positivity")
        );
        eprintln!("verdict: {}", verdict_str(cert.verdict));
    }
    Ok(code)
}

pub fn certify_exit_code(cert: &Certificate) -> i32 {
    match cert.verdict {
        Verdict::Positive | Verdict::Nonnegative => 0,
        _ => match cert.failed_stage.as_deref() {
            // No applicable strategy: selection refused, or every checker
            // found its hypotheses violated.
            Some("strategy") | Some("positivity-strategy") => 4,
            _ => 3,
        },
    }
}

/// Re-renders an exact scientific decimal string (as produced by the
/// certificate serialisation) in positional notation when that is readable,
/// e.g. `2.2507907903927645e-1` → `0.22507907903927645`.  The conversion is
/// pure digit shuffling: every printed digit is preserved.
fn positional(s: &str) -> String {
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", s),
    };
    let Some((mantissa, exp)) = body.split_once(['e', 'E']) else {
        return s.to_string();
    };
    let Ok(exp) = exp.parse::<i32>() else {
        return s.to_string();
    };
    if !(-4..=16).contains(&exp) {
        return s.to_string();
    }
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return s.to_string();
    }
    let point = 1 + exp; // decimal point position within `digits`
    let out = if point <= 0 {
        format!("0.{}{}", "0".repeat(-point as usize), digits)
    } else if (point as usize) >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        format!("{}.{}", &digits[..point as usize], &digits[point as usize..])
    };
    format!("{sign}{out}")
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Positive => "positive",
        Verdict::Nonnegative => "nonnegative",
        Verdict::ExistenceOnly => "existence-only",
        Verdict::NoPositiveSolution => "no-positive-solution",
        Verdict::Failed => "failed",
    }
}

fn print_certificate_table(cert: &Certificate, json_path: &Path) {
    let mut terms = String::new();
    for t in &cert.problem.terms {
        terms.push_str(&format!(
            "  +  [{}, {}] · t|t|^{}",
            positional(&t.coeff.lo),
            positional(&t.coeff.hi),
            t.exponent - 1
        ));
    }
    println!(
        "problem      -Δu = [{}, {}] · u{terms}",
        positional(&cert.problem.lambda.lo),
        positional(&cert.problem.lambda.hi)
    );
    println!(
        "domain       ({}, {}) × ({}, {})",
        cert.problem.domain.x0, cert.problem.domain.x1, cert.problem.domain.y0, cert.problem.domain.y1
    );
    if let Some(a) = &cert.approximation {
        println!(
            "candidate    n = {}, max |û| ≈ {:.5}, digest {}…",
            a.n,
            a.max_abs,
            &a.digest[..12.min(a.digest.len())]
        );
    }
    if let Some(nk) = &cert.newton_kantorovich {
        println!("existence    ‖F′(û)⁻¹‖        ≤ {:.9}", nk.inverse_norm);
        println!("             ‖F(û)‖_L²        ≤ {}", positional(&nk.residual_l2.hi));
        println!("             ‖F(û)‖_V*        ≤ {}", positional(&nk.residual_dual.hi));
        println!(
            "             L                 ≤ {}   on B(û, {:.6e})",
            positional(&nk.lipschitz.hi),
            nk.r
        );
        println!("             α                 ≤ {}", positional(&nk.alpha));
        println!("             β                 ≤ {}", positional(&nk.beta));
        println!(
            "             2αβ               ≤ {}   (needs ≤ 1)",
            positional(&nk.product.hi)
        );
        println!("             ρ                 ≤ {}", positional(&nk.rho.hi));
        println!(
            "             unique within     B(û, {})",
            positional(&nk.uniqueness_radius.hi)
        );
        if nk.symmetric_subspace {
            println!("             (within the doubly mirror-symmetric subspace)");
        }
    }
    if let Some(p) = &cert.positivity {
        println!("positivity   strategy          {}", strategy_str(p.strategy));
        if let (Some(c), Some(t)) = (&p.condition, &p.threshold) {
            println!("             condition         ≤ {}", positional(&c.hi));
            println!("             threshold         > {}", positional(&t.lo));
        }
        if let Some(m) = p.margin {
            println!("             margin            ≥ {m:.6e}");
        }
        if let Some(mu) = p.mu1_lower {
            println!("             μ₁                ≥ {mu:.8}");
        }
        for n in &p.negative_part_norms {
            println!(
                "             ‖û₋‖_{:<4}         ≤ {}",
                n.space,
                positional(&n.bound.hi)
            );
        }
        if let Some(l) = &p.lambda1_sub {
            println!("             λ₁(subregion)     ≥ {}", positional(&l.lo));
        }
        if let Some(u) = p.undischarged_cells {
            println!("             undischarged cells {u}");
        }
        if let Some(f) = &p.failure {
            println!("             failure           {f}");
        }
    }
    println!("constants");
    for c in &cert.constants {
        println!(
            "             {:<8} ∈ [{}, {}]   ({})",
            c.name,
            positional(&c.enclosure.lo),
            positional(&c.enclosure.hi),
            provenance_str(&c.provenance)
        );
    }
    if let Some(stage) = &cert.failed_stage {
        println!("failed stage {stage}");
    }
    for note in &cert.notes {
        println!("note         {note}");
    }
    println!("verdict      {}", verdict_str(cert.verdict).to_uppercase());
    println!("certificate  {}", json_path.display());
}

fn strategy_str(s: ellipcert_core::certify::Strategy) -> &'static str {
    match s {
        ellipcert_core::certify::Strategy::Theorem1 => "sub-eigenvalue criterion",
        ellipcert_core::certify::Strategy::Theorem2 => "spectral/Newton positivity",
        ellipcert_core::certify::Strategy::CorollaryA1 => "localized sub-eigenvalue criterion",
    }
}

fn provenance_str(p: &ellipcert_core::certify::Provenance) -> &'static str {
    match p {
        ellipcert_core::certify::Provenance::ClosedForm => "closed-form",
        ellipcert_core::certify::Provenance::Pinned => "pinned",
        ellipcert_core::certify::Provenance::Supplied => "supplied",
    }
}

// ---------------------------------------------------------------------------
// plot-data
// ---------------------------------------------------------------------------

pub fn cmd_plot_data(ctx: &Ctx) -> Result<i32, CliError> {
    let path = ctx.approx_path.as_deref().ok_or_else(|| {
        CliError::Usage("plot-data needs --approx <file> (written by solve)".to_string())
    })?;
    let (u, _digest) = approx::read(path)?;

    let pts = ctx.config.output.plot_points;
    let surface_path = ctx.resolve_out(ctx.config.output.plot.as_deref(), "csv", "surface.csv");
    let mut csv = String::with_capacity(pts * pts * 24);
    csv.push_str("x,y,u\n");
    let d = u.domain();
    let mut max_sample = f64::NEG_INFINITY;
    for iy in 0..pts {
        let y = d.y0() + (d.y1() - d.y0()) * (iy as f64) / ((pts - 1) as f64);
        for ix in 0..pts {
            let x = d.x0() + (d.x1() - d.x0()) * (ix as f64) / ((pts - 1) as f64);
            let v = u.eval_f64(x, y);
            max_sample = max_sample.max(v.abs());
            csv.push_str(&format!("{x},{y},{v}\n"));
        }
    }
    write_file(&surface_path, &csv)?;
    println!(
        "wrote {} ({pts}×{pts} row-major samples), max |û| ≈ {max_sample:.5}",
        surface_path.display()
    );

    if let Some(flag_path) = &ctx.config.output.flag_grid {
        let depth = ctx.depth();
        let threshold = ctx
            .config
            .rigor
            .linf_radius
            .as_ref()
            .map(|d| d.interval())
            .unwrap_or(Interval::ZERO);
        let grid = build_flag_grid(&u, threshold, depth)?;
        let side = grid.side();
        // One line per cell, 4^depth lines, no header.
        let mut out = String::with_capacity(side * side * 8);
        for iy in 0..side {
            for ix in 0..side {
                out.push_str(&format!(
                    "{ix},{iy},{}\n",
                    u8::from(grid.provably_above(ix, iy))
                ));
            }
        }
        let flag_path = flag_path.clone();
        write_file(&flag_path, &out)?;
        println!(
            "wrote {} ({} cells at depth {depth}, threshold sup ≤ {})",
            flag_path.display(),
            side * side,
            threshold.hi()
        );
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

pub fn cmd_constants(ctx: &Ctx) -> Result<i32, CliError> {
    let registry = if ctx.config_path.is_some() {
        let mut r = ConstantsRegistry::for_domain(ctx.config.domain()?);
        for (q, v) in ctx.config.supplied_embeddings() {
            r.supply_embedding(q, v);
        }
        r
    } else {
        ConstantsRegistry::unit_square()
    };
    let d = registry.domain();
    println!(
        "constants for ({}, {}) × ({}, {})",
        d.x0(),
        d.x1(),
        d.y0(),
        d.y1()
    );
    for e in registry.entries() {
        println!(
            "{:<8} ∈ [{}, {}]   ({})",
            e.name,
            positional(&e.enclosure.lo),
            positional(&e.enclosure.hi),
            provenance_str(&e.provenance)
        );
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// shared helpers for tests
// ---------------------------------------------------------------------------

/// Solves a problem through the public config path (test helper).
pub fn solve_for_tests(
    config: &RunConfig,
) -> Result<(ProblemSpec, LegendreFunction), CliError> {
    let problem = config.problem_spec()?;
    let (u, _) = galerkin::solve(&problem, &config.solve_options())?;
    Ok((problem, u))
}

#[cfg(test)]
mod tests {
    use super::positional;

    #[test]
    fn positional_rendering_preserves_digits() {
        assert_eq!(
            positional("2.2507907903927645e-1"),
            "0.22507907903927645"
        );
        assert_eq!(positional("1.9739208802178712e1"), "19.739208802178712");
        assert_eq!(positional("-3.5e2"), "-350");
        assert_eq!(positional("1.0000000000000000e0"), "1.0000000000000000");
        // Out-of-band exponents stay scientific.
        assert_eq!(positional("4.63295216e-8"), "4.63295216e-8");
        assert_eq!(positional("1.2e30"), "1.2e30");
        // Non-scientific input is passed through.
        assert_eq!(positional("inf"), "inf");
    }
}
