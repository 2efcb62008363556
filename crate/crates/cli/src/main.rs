//! `sublinear`: certify, construct and solve `L u = m u^p` problems described
//! by a JSON config.
//!
//! Exit codes: 0 exists / solved, 1 no solution, 2 inconclusive, 3 input error.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use sublinear::analysis::Analysis;
use sublinear::certify::{certify_analysis, Certificate, ConditionName, Verdict};
use sublinear::config::{ProblemConfig, SweepAxis};
use sublinear::construct::{construct_subsolution, verify_subsolution};
use sublinear::general::solve_general_f;
use sublinear::pipeline::solve_analysis;
use sublinear::pstar::pstar_search_analysis;
use sublinear::solve::SolveResult;
use sublinear::{Error, Problem};

#[derive(Parser, Debug)]
#[command(name = "sublinear", version, about = "Positive solutions of -a u'' + b u' + c u = m u^p with Dirichlet data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem description (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Interior nodes of the finite-difference grid.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Quadrature tolerance for the condition integrals.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sweep axis `FIELD[,FIELD..]:LO:HI:STEPS`; a leading `-` negates a field.
    #[arg(long, global = true, allow_hyphen_values = true)]
    sweep: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Evaluate every existence and nonexistence condition.
    Certify,
    /// Certify, construct a subsolution and solve by monotone iteration.
    Solve,
    /// Certify and write the glued subsolution.
    Subsolution,
    /// Bracket the critical exponent.
    Pstar,
    /// Certify across a parameter sweep.
    Sweep,
    /// Solve with the nonlinearity given in the config.
    Nonlinearity,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::Solve => "solve",
            Command::Subsolution => "subsolution",
            Command::Pstar => "pstar",
            Command::Sweep => "sweep",
            Command::Nonlinearity => "nonlinearity",
        }
    }
}

type Outcome = Verdict;

fn exit_code(v: Outcome) -> u8 {
    match v {
        Verdict::Exists => 0,
        Verdict::NotExists => 1,
        Verdict::Inconclusive => 2,
    }
}

struct Run {
    cfg: ProblemConfig,
    raw: Value,
    out: PathBuf,
}

fn input_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

fn load(cli: &Cli) -> Result<Run, Error> {
    let path = cli.config.as_ref().ok_or_else(|| input_err("--config PATH is required"))?;
    let text = fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    let mut cfg = ProblemConfig::from_json_str(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    let mut raw: Value = serde_json::from_str(&text).map_err(input_err)?;
    if let Some(n) = cli.grid {
        if n < 4 {
            return Err(input_err(format!("--grid {n}: need at least 4 interior nodes")));
        }
        cfg.grid = n;
        raw["grid"] = json!(n);
    }
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(input_err(format!("--tol {t}: must be positive")));
        }
        cfg.tolerances.quadrature = t;
        raw["tolerances"] = serde_json::to_value(cfg.tolerances).map_err(input_err)?;
    }
    fs::create_dir_all(&cli.out).map_err(|e| input_err(format!("{}: {e}", cli.out.display())))?;
    Ok(Run { cfg, raw, out: cli.out.clone() })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Error> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn write_json(dir: &Path, value: &Value) -> Result<(), Error> {
    let mut w = create(dir, "report.json")?;
    serde_json::to_writer_pretty(&mut w, value).map_err(input_err)?;
    writeln!(w).and_then(|_| w.flush()).map_err(input_err)
}

fn write_conditions(dir: &Path, cert: &Certificate) -> Result<(), Error> {
    let mut w = create(dir, "conditions.csv")?;
    let io = |e: std::io::Error| input_err(e);
    writeln!(w, "name,lhs,rhs,margin,holds").map_err(io)?;
    for r in &cert.reports {
        writeln!(w, "{},{:e},{:e},{:e},{}", r.name.as_str(), r.lhs, r.rhs, r.margin, r.holds).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn write_trace(dir: &Path, s: &SolveResult) -> Result<(), Error> {
    let mut w = create(dir, "trace.csv")?;
    let io = |e: std::io::Error| input_err(e);
    writeln!(w, "iteration,change").map_err(io)?;
    for (i, c) in s.monotone_trace.iter().enumerate() {
        writeln!(w, "{},{:e}", i + 1, c).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn write_solution(dir: &Path, problem: &Problem, s: &SolveResult) -> Result<(), Error> {
    let mut w = create(dir, "solution.csv")?;
    s.write_csv(problem, &mut w)?;
    w.flush().map_err(input_err)?;
    write_trace(dir, s)
}

#[derive(Serialize)]
struct SolveSummary {
    n: usize,
    residual_inf: f64,
    converged: bool,
    min_interior: f64,
    max: f64,
    iterations: usize,
    newton_iterations: usize,
    order_defect: f64,
}

fn summary(s: &SolveResult) -> SolveSummary {
    SolveSummary {
        n: s.grid.n,
        residual_inf: s.residual_inf,
        converged: s.converged,
        min_interior: s.min_interior,
        max: s.max(),
        iterations: s.iterations,
        newton_iterations: s.newton_iterations,
        order_defect: s.order_defect,
    }
}

fn proving_condition(cert: &Certificate) -> Option<ConditionName> {
    match cert.verdict {
        Verdict::Exists => cert.witness.as_ref().map(|w| w.condition),
        Verdict::NotExists => cert.reports.iter().find(|r| r.name.is_necessary() && r.decisively_fails()).map(|r| r.name),
        Verdict::Inconclusive => None,
    }
}

fn certificate_json(cert: &Certificate) -> Value {
    json!({
        "verdict": cert.verdict,
        "reason": cert.reason,
        "proving_condition": proving_condition(cert),
        "witness": cert.witness,
        "interval": cert.interval,
        "conditions": cert.reports,
    })
}

fn analysis(run: &Run) -> Result<(Problem, Analysis), Error> {
    let pr = run.cfg.problem()?;
    let an = Analysis::new(&pr, run.cfg.analysis_options())?;
    Ok((pr, an))
}

fn failure(report: &mut Value, e: &Error) -> Outcome {
    report["error"] = json!(e.to_string());
    Verdict::Inconclusive
}

fn execute(cmd: Command, cli: &Cli) -> Result<(Outcome, Value), Error> {
    let run = load(cli)?;
    let dir = &run.out;
    let mut report = json!({ "command": cmd.name() });
    let outcome = match cmd {
        Command::Certify => {
            let (_, an) = analysis(&run)?;
            let cert = certify_analysis(&an);
            write_conditions(dir, &cert)?;
            report["certificate"] = certificate_json(&cert);
            cert.verdict
        }
        Command::Subsolution => {
            let (_, an) = analysis(&run)?;
            let cert = certify_analysis(&an);
            write_conditions(dir, &cert)?;
            report["certificate"] = certificate_json(&cert);
            match (&cert.witness, cert.verdict) {
                (Some(w), Verdict::Exists) => match construct_subsolution(&an, w) {
                    Ok(spec) => {
                        let ver = verify_subsolution(&spec);
                        let mut f = create(dir, "subsolution.csv")?;
                        spec.write_csv(run.cfg.grid, &mut f)?;
                        f.flush().map_err(input_err)?;
                        report["subsolution"] = json!(spec);
                        report["verification"] = json!(ver);
                        if ver.passed {
                            Verdict::Exists
                        } else {
                            Verdict::Inconclusive
                        }
                    }
                    Err(e) => failure(&mut report, &e),
                },
                (_, v) => v,
            }
        }
        Command::Solve => {
            let (pr, an) = analysis(&run)?;
            let cert = certify_analysis(&an);
            write_conditions(dir, &cert)?;
            report["certificate"] = certificate_json(&cert);
            if cert.verdict != Verdict::Exists {
                cert.verdict
            } else {
                match solve_analysis(&an, &run.cfg.solve_options()) {
                    Ok(s) => {
                        write_solution(dir, &pr, &s.solution)?;
                        report["tau"] = json!(s.tau);
                        report["subsolution"] = json!(s.subsolution);
                        report["verification"] = json!(s.verification);
                        report["supersolution"] = json!(s.supersolution);
                        report["scaled"] = json!(summary(&s.scaled));
                        report["solution"] = json!(summary(&s.solution));
                        report["apriori"] = json!(s.apriori);
                        if s.solution.converged && s.solution.min_interior > 0.0 {
                            Verdict::Exists
                        } else {
                            Verdict::Inconclusive
                        }
                    }
                    Err(e) => failure(&mut report, &e),
                }
            }
        }
        Command::Pstar => {
            let (_, an) = analysis(&run)?;
            let r = pstar_search_analysis(&an, &run.cfg.pstar_options())?;
            let mut w = create(dir, "pstar.csv")?;
            let io = |e: std::io::Error| input_err(e);
            writeln!(w, "p,verdict,condition").map_err(io)?;
            for pr in &r.probes {
                writeln!(w, "{},{},{}", pr.p, pr.verdict.as_str(), pr.condition.map(|c| c.as_str()).unwrap_or("")).map_err(io)?;
            }
            w.flush().map_err(io)?;
            report["bracket"] = json!({ "lower": r.lower, "upper": r.upper, "width": r.width(), "empty": r.empty });
            report["probes"] = json!(r.probes);
            if r.empty {
                Verdict::NotExists
            } else if r.upper.is_some() {
                Verdict::Exists
            } else {
                Verdict::Inconclusive
            }
        }
        Command::Sweep => {
            let spec = cli.sweep.clone().or_else(|| run.cfg.sweep.clone()).ok_or_else(|| input_err("sweep needs --sweep FIELD:LO:HI:STEPS or a `sweep` entry in the config"))?;
            let axis = SweepAxis::parse(&spec)?;
            let values = axis.values();
            let configs = values
                .iter()
                .map(|&x| {
                    let cfg = ProblemConfig::from_value(axis.apply(&run.raw, x)?)?;
                    let pr = cfg.problem()?;
                    Ok((x, cfg, pr))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let points: Vec<(f64, Certificate)> = configs
                .par_iter()
                .map(|(x, cfg, pr)| Ok((*x, certify_analysis(&Analysis::new(pr, cfg.analysis_options())?))))
                .collect::<Result<_, Error>>()?;
            let mut w = create(dir, "sweep.csv")?;
            let io = |e: std::io::Error| input_err(e);
            writeln!(w, "value,verdict,condition").map_err(io)?;
            for (x, c) in &points {
                writeln!(w, "{},{},{}", x, c.verdict.as_str(), proving_condition(c).map(|c| c.as_str()).unwrap_or("")).map_err(io)?;
            }
            w.flush().map_err(io)?;
            report["axis"] = json!(axis);
            report["points"] = Value::Array(points.iter().map(|(x, c)| json!({ "value": x, "certificate": certificate_json(c) })).collect());
            let all = |v: Verdict| points.iter().all(|(_, c)| c.verdict == v);
            if all(Verdict::Exists) {
                Verdict::Exists
            } else if all(Verdict::NotExists) {
                Verdict::NotExists
            } else {
                Verdict::Inconclusive
            }
        }
        Command::Nonlinearity => {
            let nl = run.cfg.nonlinearity.ok_or_else(|| input_err("field `nonlinearity`: required by the nonlinearity command"))?;
            let pr = run.cfg.problem()?;
            report["nonlinearity"] = json!(nl);
            match solve_general_f(&pr, &nl.to_spec(), &run.cfg.solve_options()) {
                Ok(r) => {
                    write_solution(dir, &pr, &r.solution)?;
                    report["k_under"] = json!(r.k_under);
                    report["k_super"] = json!(r.k_super);
                    report["phi_sup"] = json!(r.phi_sup);
                    report["lower"] = json!(summary(&r.lower));
                    report["solution"] = json!(summary(&r.solution));
                    if r.solution.converged && r.solution.min_interior > 0.0 {
                        Verdict::Exists
                    } else {
                        Verdict::Inconclusive
                    }
                }
                Err(e @ (Error::Nonlinearity { .. } | Error::Config(_))) => return Err(e),
                Err(e) => failure(&mut report, &e),
            }
        }
    };
    report["outcome"] = json!(outcome);
    report["exit_code"] = json!(exit_code(outcome));
    write_json(dir, &report)?;
    Ok((outcome, report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command, &cli) {
        Ok((outcome, report)) => {
            let cond = report["certificate"]["proving_condition"].as_str().map(|c| format!(" ({c})")).unwrap_or_default();
            println!("{}: {}{}", cli.command.name(), outcome.as_str(), cond);
            ExitCode::from(exit_code(outcome))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
