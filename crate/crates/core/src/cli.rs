//! `fracpert` command-line front end.
//!
//! Exit codes: 0 success, 2 bad spec or arguments, 3 numerical failure,
//! 4 verification failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use crate::error::Error;
use crate::families::{check_functional_equation, generator_limit, Families};
use crate::laplace::{LaplaceVerifier, Residual};
use crate::linalg::{max_abs_diff, norm, Matrix};
use crate::problem::{Problem, ProblemSpec, DEFAULT_SPEC};
use crate::quadrature::QuadratureConfig;
use crate::resolvent::{
    corollary_scaled_check, lemma_bound_check, neumann_resolvent, resolvent, ResolventPoint,
};
use crate::series::{
    induction_bound_check, majorant_check, Chain, SeriesEngine, StopReason, TERM_CAP_ENV,
};
use crate::special::{g, gamma_unchecked};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SPEC: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "fracpert",
    version,
    about = "Fractional cosine families under bounded perturbation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Problem spec (TOML); the built-in default when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for random matrix builders, overriding the spec.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Series tolerance, overriding the spec.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Cap on series terms.
    #[arg(long, env = TERM_CAP_ENV)]
    pub term_cap: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesFamily {
    Cosine,
    Sine,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trajectory v(t) = C(t) v0 + S(t) v1 for the perturbed generator, as CSV.
    Solve(Common),
    /// Run every identity and bound check, one JSON record per line.
    Verify(Common),
    /// Truncation error against the direct oracle per series term, as CSV.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "sine")]
        family: SeriesFamily,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
pub enum CliError {
    Spec(String),
    Numerical(Error),
    Verification(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) => EXIT_SPEC,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Verification(_) => EXIT_VERIFY,
        }
    }

    /// One-line JSON diagnostic.
    pub fn diagnostic(&self) -> String {
        let (kind, msg) = match self {
            CliError::Spec(m) => ("spec_error".to_string(), m.clone()),
            CliError::Numerical(e) => (e.name().to_string(), e.to_string()),
            CliError::Verification(n) => (
                "verification_failed".to_string(),
                format!("{n} check(s) failed"),
            ),
        };
        format!(
            "{{\"error\":{},\"message\":{}}}",
            serde_json::Value::String(kind),
            serde_json::Value::String(msg)
        )
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) => CliError::Spec(m),
            other => CliError::Numerical(other),
        }
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn json_f64(x: f64) -> String {
    if x.is_finite() {
        fmt_f64(x)
    } else {
        "null".into()
    }
}

fn load(common: &Common) -> Result<Problem, CliError> {
    let text = match &common.spec {
        Some(p) => {
            fs::read_to_string(p).map_err(|e| CliError::Spec(format!("{}: {e}", p.display())))?
        }
        None => DEFAULT_SPEC.to_string(),
    };
    let spec = ProblemSpec::parse(&text)?;
    let mut p = spec.build(common.seed)?;
    if let Some(tol) = common.tol {
        if !(tol > 0.0) {
            return Err(CliError::Spec(format!("--tol must be positive, got {tol}")));
        }
        p.tol = tol;
    }
    Ok(p)
}

fn engine(p: &Problem, common: &Common) -> Result<SeriesEngine, CliError> {
    let mut e = SeriesEngine::new(p.alpha, &p.t_grid, &p.a, &p.b, &p.quad)?;
    if let Some(cap) = common.term_cap {
        e.set_term_cap(cap);
    }
    Ok(e)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Spec(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn cmd_solve(common: &Common) -> Result<String, CliError> {
    let p = load(common)?;
    let eng = engine(&p, common)?;
    let (c, _) = numeric(eng.sum(Chain::Cosine, p.tol))?;
    let (s, _) = numeric(eng.sum(Chain::Sine, p.tol))?;
    let traj: Vec<DVector<f64>> = c
        .iter()
        .zip(&s)
        .map(|(c, s)| c * &p.v0 + s * &p.v1)
        .collect();
    let d = p.a.dim();
    let mut out = String::from("t");
    for i in 0..d {
        write!(out, ",v{i}").unwrap();
    }
    out.push('\n');
    for (t, v) in p.t_grid.iter().zip(&traj) {
        out.push_str(&fmt_f64(*t));
        for x in v.iter() {
            out.push(',');
            out.push_str(&fmt_f64(*x));
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    HypothesisNotMet,
    Informational,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::HypothesisNotMet => "hypothesis_not_met",
            Status::Informational => "informational",
        }
    }
}

struct Report {
    lines: String,
    failures: usize,
}

impl Report {
    fn push(
        &mut self,
        check: &str,
        anchor: &str,
        measured: f64,
        relation: Relation,
        bound: f64,
        status: Status,
    ) {
        let s = format!(
            "{{\"check\":{},\"anchor\":{},\"measured\":{},\"relation\":\"{}\",\"bound\":{},\"status\":\"{}\"}}\n",
            serde_json::Value::String(check.into()),
            serde_json::Value::String(anchor.into()),
            json_f64(measured),
            if relation == Relation::AtMost { "<=" } else { ">=" },
            json_f64(bound),
            status.as_str()
        );
        self.lines.push_str(&s);
        if status == Status::Fail {
            self.failures += 1;
        }
    }

    fn check(&mut self, check: &str, anchor: &str, measured: f64, relation: Relation, bound: f64) {
        let ok = match relation {
            Relation::AtMost => measured <= bound,
            Relation::AtLeast => measured >= bound,
        };
        self.push(
            check,
            anchor,
            measured,
            relation,
            bound,
            if ok { Status::Pass } else { Status::Fail },
        );
    }

    fn info(&mut self, check: &str, anchor: &str, measured: f64, relation: Relation, bound: f64) {
        self.push(
            check,
            anchor,
            measured,
            relation,
            bound,
            Status::Informational,
        );
    }

    fn not_met(&mut self, check: &str, anchor: &str, measured: f64) {
        self.push(
            check,
            anchor,
            measured,
            Relation::AtMost,
            f64::NAN,
            Status::HypothesisNotMet,
        );
    }

    fn residual(&mut self, check: &str, anchor: &str, r: Residual, tol: f64) {
        self.check(
            check,
            anchor,
            r.measured,
            Relation::AtMost,
            tol.max(r.error_budget),
        );
    }
}

const A_FUNCTIONAL: &str = "functional equation of the cosine family";
const A_GENERATOR: &str = "generator: Gamma(a+1)(C(t)x - x)/t^a -> Ax";
const A_SERIES: &str = "series expansion of the perturbed families";
const A_SINE_TERM: &str = "term bound ||S_n(t)|| <= M^(n+1)|B|^n e^(wt) g_(na+2)(t)";
const A_COSINE_TERM: &str =
    "term bound ||C_n(t)|| <= M^(n+1)|B|^n e^(wt) g_((n-1)a+3)(t), sine-fed terms";
const A_COSINE_FED_TERM: &str =
    "term bound ||C_n(t)|| <= M^(n+1)|B|^n e^(wt) g_(na+1)(t), cosine-fed terms";
const A_SINE_MAJ: &str = "majorant ||S(t;A+B)|| <= M e^(wt) t E_(a,2)(M|B|t^a)";
const A_COSINE_MAJ: &str = "majorant ||C(t;A+B)|| <= M e^(wt) E_(a,1)(M|B|t^a)";
const A_CORRECTED_MAJ: &str =
    "majorant of the sine-fed cosine series M e^(wt)(1 + M|B|t^2 E_(a,3)(M|B|t^a))";
const A_STATED_MAJ: &str = "majorant M e^(wt) t^(2-a) E_(a,3-a)(M|B|t^a) for the cosine family";
const A_NEUMANN: &str = "Neumann series R(A+B) = sum R(A)[B R(A)]^n";
const A_LEMMA: &str = "perturbed resolvent difference bound";
const A_COROLLARY: &str = "scaled perturbed resolvent difference bound";
const A_LAPLACE: &str = "Laplace transforms of C, S, T";
const A_TERM_LAPLACE: &str = "Laplace transform of the term recursions";
const A_SUM_LAPLACE: &str = "Laplace transforms of the perturbed families";

fn numeric<T>(r: crate::error::Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::from)
}

/// Run every check; returns the report text and the number of failures.
pub fn verify_report(p: &Problem, common: &Common) -> Result<(String, usize), CliError> {
    let mut rep = Report {
        lines: String::new(),
        failures: 0,
    };
    let alpha = p.alpha;
    let al = alpha.value();
    let eng = engine(p, common)?;
    let bound = numeric(eng.bound())?;
    let grid = &p.t_grid;
    let t_hi = *grid.last().unwrap();

    // family axioms
    for (s, t) in [
        (0.25 * t_hi, 0.5 * t_hi),
        (0.5 * t_hi, t_hi),
        (t_hi, 0.1 * t_hi),
    ] {
        let r = numeric(check_functional_equation(alpha, &p.a, s, t, &p.quad))?;
        rep.check(
            &format!("functional_equation(s={s},t={t})"),
            A_FUNCTIONAL,
            r,
            Relation::AtMost,
            1e-6,
        );
    }
    let x = DVector::from_element(p.a.dim(), 1.0);
    let t0 = 1e-3;
    let lim = numeric(generator_limit(alpha, &p.a, &x, &[t0]))?;
    let ax = p.a.matrix() * &x;
    let err = (&lim[0] - &ax).amax();
    let model = gamma_unchecked(al + 1.0) / gamma_unchecked(2.0 * al + 1.0)
        * t0.powf(al)
        * (p.a.matrix() * &ax).amax();
    rep.check(
        "generator_limit(t=1e-3)",
        A_GENERATOR,
        err,
        Relation::AtMost,
        10.0 * model + 1e-12,
    );

    // series against the direct oracle
    let (cos, crep) = numeric(eng.sum(Chain::Cosine, p.tol))?;
    let (sin, srep) = numeric(eng.sum(Chain::Sine, p.tol))?;
    let (csf, _) = numeric(eng.sum(Chain::SineFedCosine, p.tol))?;
    let ab = numeric(p.a.add(&p.b))?;
    let fam_ab = Families::new(alpha, &ab);
    let mut dc: f64 = 0.0;
    let mut ds: f64 = 0.0;
    for (i, &t) in grid.iter().enumerate() {
        dc = dc.max(max_abs_diff(&cos[i], &numeric(fam_ab.cosine(t))?));
        ds = ds.max(max_abs_diff(&sin[i], &numeric(fam_ab.sine(t))?));
    }
    let series_tol = p.tol + 10.0 * p.quad.target_tol;
    rep.check(
        &format!("perturbed_cosine_vs_oracle(terms={})", crep.n_used),
        A_SERIES,
        dc,
        Relation::AtMost,
        series_tol,
    );
    rep.check(
        &format!("perturbed_sine_vs_oracle(terms={})", srep.n_used),
        A_SERIES,
        ds,
        Relation::AtMost,
        series_tol,
    );

    // induction bounds
    let b_norm = p.b.norm();
    for n in 1..=6 {
        for (chain, anchor) in [
            (Chain::Sine, A_SINE_TERM),
            (Chain::SineFedCosine, A_COSINE_TERM),
            (Chain::Cosine, A_COSINE_FED_TERM),
        ] {
            let term = numeric(eng.term(chain, n))?;
            let slack = induction_bound_check(alpha, &term, &bound, b_norm)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let name = match chain {
                Chain::Sine => "sine",
                Chain::SineFedCosine => "cosine",
                _ => "cosine_fed",
            };
            rep.check(
                &format!("induction_bound_{name}(n={n})"),
                anchor,
                slack,
                Relation::AtLeast,
                -1e-9,
            );
        }
    }
    let c0 = numeric(eng.term(Chain::SineFedCosine, 0))?;
    let slack0 = grid
        .iter()
        .zip(&c0.term_norm)
        .map(|(&t, &nrm)| bound.at(t) * g(3.0 - al, t) - nrm)
        .fold(f64::INFINITY, f64::min);
    rep.info(
        "induction_bound_cosine(n=0)",
        A_COSINE_TERM,
        slack0,
        Relation::AtLeast,
        -1e-9,
    );

    // majorants
    let pos: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] > 0.0).collect();
    let pick = |v: &[Matrix]| pos.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
    let tg: Vec<f64> = pos.iter().map(|&i| grid[i]).collect();
    let maj = numeric(majorant_check(
        alpha,
        &tg,
        b_norm,
        &bound,
        &pick(&sin),
        &pick(&cos),
        Some(&pick(&csf)),
    ))?;
    rep.check(
        "majorant_sine",
        A_SINE_MAJ,
        maj.min_sine_slack,
        Relation::AtLeast,
        -1e-9,
    );
    rep.check(
        "majorant_cosine",
        A_COSINE_MAJ,
        maj.min_cosine_slack,
        Relation::AtLeast,
        -1e-9,
    );
    rep.check(
        "majorant_cosine_sine_fed",
        A_CORRECTED_MAJ,
        maj.min_corrected_slack.unwrap_or(f64::INFINITY),
        Relation::AtLeast,
        -1e-9,
    );
    rep.info(
        "majorant_cosine_as_stated",
        A_STATED_MAJ,
        maj.min_stated_cosine_slack,
        Relation::AtLeast,
        -1e-9,
    );

    // resolvent and Laplace checks per lambda
    let omega = bound.omega;
    let lambdas: Vec<f64> = if p.lambda_list.is_empty() {
        vec![omega + 1.0, omega + 2.0, omega + 5.0]
    } else {
        p.lambda_list.clone()
    };
    let lv = numeric(LaplaceVerifier::new(alpha, &p.a, &p.b, &p.laplace))?;
    for &lambda in &lambdas {
        let tag = format!("lambda={}", fmt_f64(lambda));
        let point = numeric(ResolventPoint::new(lambda, alpha))?;
        match neumann_resolvent(&point, &p.a, &p.b, 1e-14) {
            Ok((rn, report)) => {
                let rd = numeric(resolvent(&point, &ab))?;
                let scale = norm(&rd).max(1.0);
                rep.check(
                    &format!("neumann_vs_direct({tag})"),
                    A_NEUMANN,
                    norm(&(&rn - &rd)),
                    Relation::AtMost,
                    1e-10 * scale,
                );
                let lemma = numeric(lemma_bound_check(&point, &p.a, &p.b))?;
                rep.check(
                    &format!("lemma_bound({tag})"),
                    A_LEMMA,
                    lemma.lhs - lemma.rhs,
                    Relation::AtMost,
                    1e-10,
                );
                let cor = numeric(corollary_scaled_check(&point, &p.a, &p.b))?;
                rep.check(
                    &format!("corollary_scaled_bound({tag})"),
                    A_COROLLARY,
                    cor.check.lhs - cor.check.rhs,
                    Relation::AtMost,
                    1e-10,
                );
                let _ = report;
            }
            Err(Error::HypothesisViolated { theta }) => {
                for (c, a) in [
                    ("neumann_vs_direct", A_NEUMANN),
                    ("lemma_bound", A_LEMMA),
                    ("corollary_scaled_bound", A_COROLLARY),
                ] {
                    rep.not_met(&format!("{c}({tag})"), a, theta);
                }
            }
            Err(e) => return Err(e.into()),
        }

        let tol = p.laplace.tolerance;
        match lv.transform_relations(lambda) {
            Ok(r) => {
                rep.residual(&format!("laplace_cosine({tag})"), A_LAPLACE, r.cosine, tol);
                rep.residual(&format!("laplace_sine({tag})"), A_LAPLACE, r.sine, tol);
                rep.residual(
                    &format!("laplace_riemann_liouville({tag})"),
                    A_LAPLACE,
                    r.riemann_liouville,
                    tol,
                );
            }
            Err(e @ (Error::TailTooLarge { .. } | Error::Domain { .. })) => {
                rep.not_met(&format!("laplace_families({tag})"), A_LAPLACE, tail_of(&e));
            }
            Err(e) => return Err(e.into()),
        }
        for n in 1..=2 {
            match lv.term_recursion(n, lambda) {
                Ok(r) => {
                    let tn = format!("n={n},{tag}");
                    rep.residual(
                        &format!("laplace_sine_term_recursion({tn})"),
                        A_TERM_LAPLACE,
                        r.sine_recursion,
                        tol,
                    );
                    rep.residual(
                        &format!("laplace_sine_term_closed_form({tn})"),
                        A_TERM_LAPLACE,
                        r.sine_closed_form,
                        tol,
                    );
                    rep.residual(
                        &format!("laplace_cosine_term_recursion({tn})"),
                        A_TERM_LAPLACE,
                        r.cosine_recursion,
                        tol,
                    );
                    rep.residual(
                        &format!("laplace_cosine_fed_term_recursion({tn})"),
                        A_TERM_LAPLACE,
                        r.cosine_fed_recursion,
                        tol,
                    );
                    rep.residual(
                        &format!("laplace_cosine_fed_term_closed_form({tn})"),
                        A_TERM_LAPLACE,
                        r.cosine_fed_closed_form,
                        tol,
                    );
                    rep.info(
                        &format!("laplace_sine_term_closed_form_unscaled({tn})"),
                        A_TERM_LAPLACE,
                        r.sine_closed_form_without_scale.measured,
                        Relation::AtMost,
                        tol,
                    );
                }
                Err(e @ (Error::TailTooLarge { .. } | Error::Domain { .. })) => {
                    rep.not_met(
                        &format!("laplace_term_recursion(n={n},{tag})"),
                        A_TERM_LAPLACE,
                        tail_of(&e),
                    );
                }
                Err(e) => return Err(e.into()),
            }
        }
        match lv.perturbed_transforms(lambda) {
            Ok(r) => {
                rep.residual(
                    &format!("laplace_perturbed_sine_neumann({tag})"),
                    A_SUM_LAPLACE,
                    r.sine_neumann,
                    tol,
                );
                rep.residual(
                    &format!("laplace_perturbed_sine_direct({tag})"),
                    A_SUM_LAPLACE,
                    r.sine_direct,
                    tol,
                );
                rep.residual(
                    &format!("laplace_perturbed_cosine_neumann({tag})"),
                    A_SUM_LAPLACE,
                    r.cosine_neumann,
                    tol,
                );
                rep.residual(
                    &format!("laplace_perturbed_cosine_direct({tag})"),
                    A_SUM_LAPLACE,
                    r.cosine_direct,
                    tol,
                );
                rep.info(
                    &format!("laplace_perturbed_sine_unscaled({tag})"),
                    A_SUM_LAPLACE,
                    r.sine_without_scale.measured,
                    Relation::AtMost,
                    tol,
                );
                rep.info(
                    &format!("laplace_sine_fed_cosine_series({tag})"),
                    A_SUM_LAPLACE,
                    r.sine_fed_cosine.measured,
                    Relation::AtMost,
                    tol,
                );
            }
            Err(
                e @ (Error::HypothesisViolated { .. }
                | Error::TailTooLarge { .. }
                | Error::Domain { .. }),
            ) => {
                rep.not_met(
                    &format!("laplace_perturbed({tag})"),
                    A_SUM_LAPLACE,
                    tail_of(&e),
                );
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((rep.lines, rep.failures))
}

fn tail_of(e: &Error) -> f64 {
    match *e {
        Error::TailTooLarge { tail, .. } => tail,
        Error::HypothesisViolated { theta } => theta,
        Error::Domain { value, .. } => value,
        _ => f64::NAN,
    }
}

/// Convergence table for one family, plus a quadrature refinement table.
pub fn convergence_tables(
    p: &Problem,
    common: &Common,
    family: SeriesFamily,
) -> Result<(String, String), CliError> {
    let eng = engine(p, common)?;
    let chain = match family {
        SeriesFamily::Cosine => Chain::Cosine,
        SeriesFamily::Sine => Chain::Sine,
    };
    let (n_max, _, stop) = numeric(eng.truncation_index(chain, p.tol))?;
    let n_terms = n_max + 1;
    let (_, report) = numeric(eng.sum_terms(chain, n_terms, 0.0, stop))?;
    let ab = numeric(p.a.add(&p.b))?;
    let fam = Families::new(p.alpha, &ab);
    let oracle: Vec<Matrix> = p
        .t_grid
        .iter()
        .map(|&t| match family {
            SeriesFamily::Cosine => fam.cosine(t),
            SeriesFamily::Sine => fam.sine(t),
        })
        .collect::<crate::error::Result<_>>()
        .map_err(CliError::from)?;
    let d = p.a.dim();
    let mut partial = vec![Matrix::zeros(d, d); p.t_grid.len()];
    let mut out = String::from("n,term_norm,majorant,cumulative_error,decay_ratio,stop_reason\n");
    for n in 0..n_terms {
        let term = numeric(eng.term(chain, n))?;
        let mut err: f64 = 0.0;
        for (i, s) in partial.iter_mut().enumerate() {
            *s += &term.values[i];
            err = err.max(max_abs_diff(s, &oracle[i]));
        }
        let ratio = if n == 0 || report.per_term_norms[n - 1] == 0.0 {
            f64::NAN
        } else {
            report.per_term_norms[n] / report.per_term_norms[n - 1]
        };
        let stop_col = if n + 1 == n_terms {
            match stop {
                StopReason::ToleranceMet => "tolerance_met",
                StopReason::TermCap => "term_cap",
            }
        } else {
            ""
        };
        writeln!(
            out,
            "{n},{},{},{},{},{stop_col}",
            fmt_f64(report.per_term_norms[n]),
            fmt_f64(report.majorant_values[n]),
            fmt_f64(err),
            fmt_f64(ratio)
        )
        .unwrap();
    }

    // quadrature error of the first term against a fine reference
    let mut quad_out = String::from("nodes_per_panel,panels,error,observed_order\n");
    if n_terms > 1 {
        let reference = first_term(
            p,
            chain,
            QuadratureConfig {
                panels: 64,
                ..p.quad
            },
        )?;
        for nodes in [4usize, p.quad.nodes_per_panel] {
            let mut prev: Option<f64> = None;
            for panels in [1usize, 2, 4, 8, 16] {
                let q = QuadratureConfig {
                    panels,
                    nodes_per_panel: nodes,
                    target_tol: 1.0,
                    ..p.quad
                };
                let vals = first_term(p, chain, q)?;
                let err = vals
                    .iter()
                    .zip(&reference)
                    .map(|(a, b)| max_abs_diff(a, b))
                    .fold(0.0, f64::max);
                let order = match prev {
                    Some(e) if err > 0.0 && e > 0.0 => (e / err).log2(),
                    _ => f64::NAN,
                };
                writeln!(
                    quad_out,
                    "{nodes},{panels},{},{}",
                    fmt_f64(err),
                    fmt_f64(order)
                )
                .unwrap();
                prev = Some(err);
            }
        }
    }
    Ok((out, quad_out))
}

fn first_term(p: &Problem, chain: Chain, q: QuadratureConfig) -> Result<Vec<Matrix>, CliError> {
    let e = SeriesEngine::new(p.alpha, &p.t_grid, &p.a, &p.b, &q)?;
    Ok(numeric(e.term(chain, 1))?.values.clone())
}

/// Run a parsed command; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Solve(c) => cmd_solve(c).and_then(|s| write_out(c.out.as_deref(), &s)),
        Command::Verify(c) => load(c).and_then(|p| {
            let (text, failures) = verify_report(&p, c)?;
            write_out(c.out.as_deref(), &text)?;
            if failures > 0 {
                Err(CliError::Verification(failures))
            } else {
                Ok(())
            }
        }),
        Command::Convergence { common, family } => load(common).and_then(|p| {
            let (table, quad) = convergence_tables(&p, common, *family)?;
            write_out(common.out.as_deref(), &table)?;
            if let Some(out) = &common.out {
                let mut qp = out.clone().into_os_string();
                qp.push(".quadrature.csv");
                write_out(Some(Path::new(&qp)), &quad)?;
            }
            Ok(())
        }),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            e.exit_code()
        }
    }
}
