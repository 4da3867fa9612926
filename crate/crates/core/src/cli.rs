//! Command-line front end.
//!
//! Inputs are file paths, or `@name[:p1,p2,…]` for built-in objects: ensembles
//! (`@two_state`, `@bb84:0.39`, …) and bipartite states (`@bell`, `@schmidt:0.39`,
//! `@cq:two_state`, `@swapped:two_state`, `@product`).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::ensembles::{
    cq_state, named_ensemble, swapped_embedding, AuxChannel, BipartiteState, CQEnsemble,
};
use crate::error::{Error, Result};
use crate::info::{conditional_entropy_xq, holevo_chi, shannon_entropy, sw_point};
use crate::io::{parse_separable, povm_to_json, read_bipartite, read_ensemble, witnesses_to_json};
use crate::linalg::{vn_entropy, DensityMatrix};
use crate::measurement::{
    accessible_info, c1_curve, check_pure_additivity, check_separable_additivity, d1_infty,
    MeasuredAdditivity, MeasurementConfig,
};
use crate::tradeoff::{
    check_additivity, check_duality, trace_curve, uniform_curve_at_rates, RGrid, SolverConfig,
};
use crate::typicality::{lemma3_check, rows_to_csv, verify_trace_bounds};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ENVELOPE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "crdistill",
    version,
    about = "Common-randomness distillation from classical-quantum correlations"
)]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Random starts per optimization.
    #[arg(long, global = true, default_value_t = 32)]
    pub starts: usize,
    /// Rate grid as min:max:count.
    #[arg(long, global = true, default_value = "0:1:33")]
    pub grid: RGrid,
    /// Solver tolerance for curves; pass/fail tolerance for checks.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the main output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Where to write witness channels or POVMs as JSON.
    #[arg(long, global = true)]
    pub witness_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Entropies, Holevo quantity and Slepian-Wolf point of an ensemble.
    Info { input: String },
    /// Trade-off curve as CSV with columns R,C,D.
    Curve {
        input: Option<String>,
        /// Emit an exact curve instead of optimizing.
        #[arg(long, value_enum)]
        closed_form: Option<ClosedForm>,
        /// Companion gnuplot script referencing the CSV.
        #[arg(long)]
        plot_script: Option<PathBuf>,
    },
    /// Numerical checks; exit status 1 when a residual exceeds its tolerance.
    Check {
        #[command(subcommand)]
        kind: CheckKind,
    },
    /// Measurement optimization on the first party.
    Measure {
        #[command(subcommand)]
        kind: MeasureKind,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum ClosedForm {
    /// Uniformly distributed pure qubit states.
    Uniform,
}

#[derive(Subcommand, Debug)]
pub enum CheckKind {
    /// `D*(x) + Q*(D*(x) + x) = H(Q)` at evenly spaced x.
    Duality {
        input: String,
        #[arg(long, default_value_t = 5)]
        points: usize,
    },
    /// `D*` of a product ensemble against the best split of the rate.
    Additivity {
        input: String,
        second: Option<String>,
        #[arg(long, default_value_t = 0.4)]
        rate: f64,
    },
    /// Measured additivity with a separable first factor (given as a decomposition file).
    Separable {
        decomposition: PathBuf,
        sigma: String,
    },
    /// Measured additivity with a pure first factor.
    Pure { psi: String, sigma: String },
    /// Randomized entropy-bound inequality.
    Lemma3 {
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Typical-projector traces and retained masses along a blocklength ladder.
    Typicality {
        input: String,
        #[arg(long, value_delimiter = ',', default_value = "8,12,16")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0.15)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum MeasureKind {
    /// Accessible information of an ensemble.
    Accinfo { input: String },
    /// Largest one-shot `I(X;B)` over measurements on the first party.
    D1inf { input: String },
    /// Trade-off curve after an optimized measurement on the first party.
    C1curve { input: String },
}

/// Everything that determines a run's output.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub starts: usize,
    pub grid: RGrid,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub witness_out: Option<PathBuf>,
}

impl From<&RunArgs> for RunConfig {
    fn from(a: &RunArgs) -> Self {
        Self {
            seed: a.seed,
            starts: a.starts,
            grid: a.grid,
            tol: a.tol,
            threads: a.threads,
            out: a.out.clone(),
            witness_out: a.witness_out.clone(),
        }
    }
}

impl RunConfig {
    pub fn solver(&self) -> SolverConfig {
        let mut cfg = SolverConfig {
            seed: self.seed,
            starts: self.starts,
            ..Default::default()
        };
        if let Some(t) = self.tol {
            cfg.rel_tol = t;
        }
        cfg
    }

    pub fn measurement(&self) -> MeasurementConfig {
        MeasurementConfig {
            seed: self.seed,
            starts: self.starts.min(32),
            ..Default::default()
        }
    }

    /// Provenance comment; the thread count is left out because it does not affect results.
    pub fn header_comment(&self) -> String {
        let tol = self
            .tol
            .map_or_else(|| "default".to_string(), |t| t.to_string());
        format!(
            "# seed={} starts={} grid={} tol={}\n",
            self.seed, self.starts, self.grid, tol
        )
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = RunConfig::from(&cli.run);
    let outcome = match cfg.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
        {
            Ok(pool) => pool.install(|| dispatch(&cli.command, &cfg)),
            Err(e) => Err(Error::BadParam(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli.command, &cfg),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::EnvelopeExceeded(_) = e {
                eprintln!("hint: the computation is capped at small dimensions; use smaller systems or blocklengths");
                EXIT_ENVELOPE
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<i32> {
    match cmd {
        Command::Info { input } => cmd_info(input, cfg),
        Command::Curve {
            input,
            closed_form,
            plot_script,
        } => cmd_curve(input.as_deref(), *closed_form, plot_script.as_deref(), cfg),
        Command::Check { kind } => cmd_check(kind, cfg),
        Command::Measure { kind } => cmd_measure(kind, cfg),
    }
}

fn parse_params(rest: &str) -> Result<Vec<f64>> {
    rest.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::BadParam(format!("parameter `{t}`")))
        })
        .collect()
}

fn split_builtin(spec: &str) -> Option<(&str, &str)> {
    let body = spec.strip_prefix('@')?;
    Some(body.split_once(':').unwrap_or((body, "")))
}

/// An ensemble from a file or `@name[:params]`.
pub fn load_ensemble(spec: &str) -> Result<CQEnsemble> {
    match split_builtin(spec) {
        Some((name, rest)) => named_ensemble(name, &parse_params(rest)?),
        None => read_ensemble(spec),
    }
}

/// A bipartite state from a file or a built-in name.
pub fn load_bipartite(spec: &str) -> Result<BipartiteState> {
    let Some((name, rest)) = split_builtin(spec) else {
        return read_bipartite(spec);
    };
    match name {
        "bell" => Ok(BipartiteState::bell()),
        "schmidt" => {
            let p = parse_params(rest)?;
            Ok(BipartiteState::schmidt_pair(
                *p.first().unwrap_or(&std::f64::consts::FRAC_PI_8),
            ))
        }
        "product" => Ok(BipartiteState::product(
            &DensityMatrix::basis(2, 0),
            &DensityMatrix::maximally_mixed(2),
        )),
        "cq" => Ok(cq_state(&load_ensemble(&format!("@{rest}"))?)),
        "swapped" => Ok(swapped_embedding(&load_ensemble(&format!("@{rest}"))?)),
        other => Err(Error::UnknownName(other.to_string())),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_info(input: &str, cfg: &RunConfig) -> Result<i32> {
    let e = load_ensemble(input)?;
    let sw = sw_point(&e);
    let report = json!({
        "ensemble": e.label.clone().unwrap_or_else(|| input.to_string()),
        "alphabet": e.len(),
        "dim": e.dim(),
        "H(X)": shannon_entropy(e.probs()),
        "H(Q)": vn_entropy(&e.average_state()),
        "chi": holevo_chi(&e),
        "H(X|Q)": conditional_entropy_xq(&e),
        "sw_point": {"C": sw.cr_rate, "R": sw.comm_rate, "D": sw.distilled},
        "pure": e.is_pure(),
    });
    emit(
        cfg.out.as_deref(),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&report).expect("serializable")
        ),
    )?;
    Ok(EXIT_OK)
}

/// CSV rows `R,C,D` with `C = R + D`, in shortest round-trip notation.
pub fn curve_csv(header: &str, points: &[(f64, f64)], warnings: &[String]) -> String {
    let mut out = String::from(header);
    out.push_str("R,C,D\n");
    for &(r, d) in points {
        let _ = writeln!(out, "{r},{},{d}", r + d);
    }
    for w in warnings {
        let _ = writeln!(out, "# warning: {w}");
    }
    out
}

fn plot_script(csv: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\nset key top left\nset xlabel 'R (bits)'\nset ylabel 'bits'\n\
         set title '{title}'\nplot '{csv}' using 1:3 skip 2 with lines title 'D(R)', \\\n     \
         '{csv}' using 1:2 skip 2 with lines title 'C(R)'\n"
    )
}

fn cmd_curve(
    input: Option<&str>,
    closed: Option<ClosedForm>,
    script: Option<&Path>,
    cfg: &RunConfig,
) -> Result<i32> {
    let rates = cfg.grid.values();
    let (label, csv) = match (closed, input) {
        (Some(ClosedForm::Uniform), _) => {
            let pts = uniform_curve_at_rates(&rates)?;
            let header = format!("{}# closed-form=uniform\n", cfg.header_comment());
            let rows: Vec<(f64, f64)> =
                rates.iter().zip(&pts).map(|(r, (_, d))| (*r, *d)).collect();
            (
                "uniform (closed form)".to_string(),
                curve_csv(&header, &rows, &[]),
            )
        }
        (None, Some(inp)) => {
            let e = load_ensemble(inp)?;
            let curve = trace_curve(&e, &cfg.grid, &cfg.solver())?;
            if let Some(w) = &cfg.witness_out {
                let pts: Vec<(f64, f64, &AuxChannel)> = curve
                    .points
                    .iter()
                    .map(|p| (p.comm_rate, p.distilled, &p.channel))
                    .collect();
                std::fs::write(w, witnesses_to_json(Some(&curve.ensemble_id), &pts))?;
            }
            let rows: Vec<(f64, f64)> = curve
                .points
                .iter()
                .map(|p| (p.comm_rate, p.distilled))
                .collect();
            (
                curve.ensemble_id.clone(),
                curve_csv(&cfg.header_comment(), &rows, &curve.warnings),
            )
        }
        (None, None) => {
            return Err(Error::BadParam(
                "curve needs an input or --closed-form".into(),
            ))
        }
    };
    emit(cfg.out.as_deref(), &csv)?;
    if let Some(path) = script {
        let csv_name = cfg
            .out
            .as_ref()
            .map_or_else(|| "curve.csv".to_string(), |p| p.display().to_string());
        std::fs::write(path, plot_script(&csv_name, &label))?;
    }
    Ok(EXIT_OK)
}

fn verdict(check: &str, pass: bool, tol: f64, mut body: Value, cfg: &RunConfig) -> Result<i32> {
    body["check"] = json!(check);
    body["pass"] = json!(pass);
    body["tolerance"] = json!(tol);
    emit(
        cfg.out.as_deref(),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&body).expect("serializable")
        ),
    )?;
    if !pass {
        eprintln!("check `{check}` failed");
    }
    Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn additivity_json(rep: &MeasuredAdditivity) -> Value {
    json!({
        "first": rep.first.value,
        "second": rep.second.value,
        "joint_solver": rep.joint_solver,
        "joint_product": rep.joint_product,
        "joint": rep.joint,
        "sum": rep.sum,
        "gap": rep.gap,
    })
}

fn cmd_check(kind: &CheckKind, cfg: &RunConfig) -> Result<i32> {
    match kind {
        CheckKind::Duality { input, points } => {
            let e = load_ensemble(input)?;
            let hxq = conditional_entropy_xq(&e);
            let n = (*points).max(1);
            let xs: Vec<f64> = (0..n).map(|i| hxq * i as f64 / n as f64).collect();
            let rep = check_duality(&e, &xs, &cfg.solver())?;
            let tol = cfg.tol.unwrap_or(1e-3);
            let rows: Vec<Value> = rep
                .rows
                .iter()
                .map(|r| json!({"x": r.0, "D": r.1, "Q": r.2, "residual": r.3}))
                .collect();
            verdict(
                "duality",
                rep.max_residual <= tol,
                tol,
                json!({"H(Q)": rep.h_q, "max_residual": rep.max_residual, "rows": rows}),
                cfg,
            )
        }
        CheckKind::Additivity {
            input,
            second,
            rate,
        } => {
            let e1 = load_ensemble(input)?;
            let e2 = match second {
                Some(s) => load_ensemble(s)?,
                None => e1.clone(),
            };
            let rep = check_additivity(&e1, &e2, *rate, &cfg.solver())?;
            let tol = cfg.tol.unwrap_or(5e-3);
            let body = json!({
                "R": rep.comm_rate, "lhs": rep.lhs, "rhs": rep.rhs, "gap": rep.gap,
                "joint_solver": rep.joint_solver, "joint_product": rep.joint_product,
                "best_split": [rep.best_split.0, rep.best_split.1],
            });
            verdict("additivity", rep.gap.abs() <= tol, tol, body, cfg)
        }
        CheckKind::Separable {
            decomposition,
            sigma,
        } => {
            let (w, parts) = parse_separable(&std::fs::read_to_string(decomposition)?)?;
            let rep = check_separable_additivity(
                &w,
                &parts,
                &load_bipartite(sigma)?,
                &cfg.measurement(),
            )?;
            let tol = cfg.tol.unwrap_or(5e-3);
            verdict(
                "separable",
                rep.gap.abs() <= tol,
                tol,
                additivity_json(&rep),
                cfg,
            )
        }
        CheckKind::Pure { psi, sigma } => {
            let rep = check_pure_additivity(
                &load_bipartite(psi)?,
                &load_bipartite(sigma)?,
                &cfg.measurement(),
            )?;
            let tol = cfg.tol.unwrap_or(5e-3);
            let (ent, resid) = rep.entanglement.unwrap_or((f64::NAN, f64::NAN));
            let mut body = additivity_json(&rep);
            body["entanglement_entropy"] = json!(ent);
            body["entropy_residual"] = json!(resid);
            verdict("pure", rep.gap.abs() <= tol && resid <= tol, tol, body, cfg)
        }
        CheckKind::Lemma3 { dim, trials } => {
            let rep = lemma3_check(*dim, *trials, cfg.seed)?;
            let tol = cfg.tol.unwrap_or(1e-9);
            let body = json!({"dim": rep.dim, "trials": rep.trials, "violations": rep.violations, "max_excess": rep.max_excess});
            verdict(
                "lemma3",
                rep.violations == 0 && rep.max_excess <= tol,
                tol,
                body,
                cfg,
            )
        }
        CheckKind::Typicality {
            input,
            n,
            delta,
            trials,
        } => {
            let e = load_ensemble(input)?;
            let w = AuxChannel::identity(e.len());
            let rep = verify_trace_bounds(&e, &w, n, *delta, *trials, cfg.seed)?;
            let tol = cfg.tol.unwrap_or(0.2);
            let last_mass = rep
                .rows
                .iter()
                .filter(|r| r.quantity == "mass_q_exact")
                .last()
                .map_or(0.0, |r| r.value);
            let c_fit = rep.c_fit_of("q").unwrap_or(f64::NAN);
            let pass = rep.mass_nondecreasing && last_mass >= 1.0 - tol && c_fit <= rep.c_bound;
            let csv = rows_to_csv(&rep.rows);
            let body = json!({
                "mass_nondecreasing": rep.mass_nondecreasing,
                "final_exact_mass": last_mass,
                "c_fit": rep.c_fit.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
                "c_bound": rep.c_bound,
                "rows": if cfg.out.is_none() { json!(csv) } else { Value::Null },
            });
            if let Some(p) = &cfg.out {
                std::fs::write(p, csv)?;
                let quiet = RunConfig {
                    out: None,
                    ..cfg.clone()
                };
                return verdict("typicality", pass, tol, body, &quiet);
            }
            verdict("typicality", pass, tol, body, cfg)
        }
    }
}

fn cmd_measure(kind: &MeasureKind, cfg: &RunConfig) -> Result<i32> {
    let mcfg = cfg.measurement();
    let (rep, extra) = match kind {
        MeasureKind::Accinfo { input } => {
            let e = load_ensemble(input)?;
            (accessible_info(&e, &mcfg)?, json!({"chi": holevo_chi(&e)}))
        }
        MeasureKind::D1inf { input } => (d1_infty(&load_bipartite(input)?, &mcfg)?, json!({})),
        MeasureKind::C1curve { input } => {
            let rho = load_bipartite(input)?;
            let c1 = c1_curve(&rho, &cfg.grid, &cfg.solver(), &mcfg)?;
            let mut out = cfg.header_comment();
            out.push_str("R,C,D,D_hull\n");
            for (p, h) in c1.curve.points.iter().zip(&c1.hull) {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    p.comm_rate,
                    p.comm_rate + p.distilled,
                    p.distilled,
                    h
                );
            }
            for w in &c1.curve.warnings {
                let _ = writeln!(out, "# warning: {w}");
            }
            emit(cfg.out.as_deref(), &out)?;
            if let Some(w) = &cfg.witness_out {
                let best = c1
                    .measurement
                    .iter()
                    .copied()
                    .max_by_key(|&j| c1.measurement.iter().filter(|&&k| k == j).count());
                std::fs::write(w, povm_to_json(&c1.povms[best.unwrap_or(0)]))?;
            }
            return Ok(EXIT_OK);
        }
    };
    if let Some(w) = &cfg.witness_out {
        std::fs::write(w, povm_to_json(&rep.povm))?;
    }
    let mut body =
        json!({"value": rep.value, "n_outcomes": rep.n_outcomes, "converged": rep.converged});
    if let (Value::Object(b), Value::Object(x)) = (&mut body, extra) {
        b.extend(x);
    }
    emit(
        cfg.out.as_deref(),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&body).expect("serializable")
        ),
    )?;
    Ok(EXIT_OK)
}
