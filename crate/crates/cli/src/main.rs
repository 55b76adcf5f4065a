mod args;
mod error;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use cquant::asymptotics::{analyze, ErrorSequence};
use cquant::distortion::distortion_value;
use cquant::solver::{solve, solve_sequence};
use cquant::{Curve, Family, FamilyId, SegmentLineFamily, SolverConfig, UniformMeasure, Window};
use serde_json::{json, Value};

use args::{AsymptoticsArgs, ClosedFormArgs, Cli, Command, Format, ProblemArgs, SolveArgs, SolverArgs};
use error::{CliError, CliResult};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::ClosedForm(a) => cmd_closed_form(a),
        Command::Asymptotics(a) => cmd_asymptotics(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cquant: {e}");
            e.exit_code()
        }
    }
}

/// A fully resolved problem: measure, constraint and window.
struct Problem {
    family: Option<Family>,
    measure: UniformMeasure,
    constraint: Curve,
    window: Window,
}

fn required(value: Option<f64>, flag: &str, family: FamilyId) -> CliResult<f64> {
    value.ok_or_else(|| CliError::BadInput(format!("family `{family}` needs --{flag}")))
}

fn build_family(id: FamilyId, p: &ProblemArgs) -> CliResult<Family> {
    let fam = match id {
        FamilyId::SegmentLine => {
            let f = SegmentLineFamily::new(
                required(p.a, "a", id)?,
                required(p.b, "b", id)?,
                required(p.m, "m", id)?,
                required(p.c, "c", id)?,
                required(p.d, "d", id)?,
                required(p.e, "e", id)?,
            )
            .map_err(CliError::input)?;
            Family::SegmentLine(f)
        }
        FamilyId::Clamped => Family::Clamped,
        FamilyId::OneSided => Family::OneSided,
        FamilyId::CircleCircle => Family::circle_circle(p.a.unwrap_or(1.0)).map_err(CliError::input)?,
        FamilyId::Diameter => Family::Diameter,
        FamilyId::Chord => Family::Chord,
    };
    Ok(fam)
}

/// Reads JSON given inline or as a path to a file.
fn read_json<T: serde::de::DeserializeOwned>(arg: &str, what: &str) -> CliResult<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::BadInput(format!("cannot read {what} `{arg}`: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::BadInput(format!("invalid {what} JSON: {e}")))
}

fn resolve_problem(p: &ProblemArgs) -> CliResult<Problem> {
    let (family, measure, constraint) = match (p.family, &p.measure, &p.constraint) {
        (Some(id), None, None) => {
            let fam = build_family(id, p)?;
            (Some(fam), fam.measure(), fam.constraint())
        }
        (None, Some(m), Some(c)) => {
            let measure: UniformMeasure = read_json(m, "measure")?;
            let constraint: Curve = read_json(c, "constraint")?;
            (None, measure, constraint)
        }
        _ => {
            return Err(CliError::BadInput(
                "give exactly one of --family or --measure/--constraint".into(),
            ))
        }
    };
    let window = match p.window {
        Some((lo, hi)) => Window::new(lo, hi),
        None => constraint.full_window(),
    };
    Ok(Problem {
        family,
        measure,
        constraint,
        window,
    })
}

fn solver_config(a: &SolverArgs) -> CliResult<SolverConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::BadInput(format!("cannot read config `{}`: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::BadInput(format!("invalid config: {e}")))?
        }
        None => SolverConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(s) = a.starts {
        cfg.starts = s;
    }
    if let Some(m) = a.max_iters {
        cfg.max_iters = m;
    }
    cfg.validate().map_err(|e| CliError::BadInput(e.to_string()))?;
    Ok(cfg)
}

fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn emit_json(output: Option<&Path>, value: &impl serde::Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    emit(output, &text)
}

fn cmd_solve(a: SolveArgs) -> CliResult<()> {
    let problem = resolve_problem(&a.problem)?;
    let cfg = solver_config(&a.solver)?;
    let res = solve(&problem.measure, &problem.constraint, problem.window, a.n, &cfg).map_err(CliError::run)?;
    emit_json(a.output.as_deref(), &res)
}

fn cmd_closed_form(a: ClosedFormArgs) -> CliResult<()> {
    let problem = resolve_problem(&a.problem)?;
    let fam = problem
        .family
        .ok_or_else(|| CliError::BadInput("closed forms need --family".into()))?;
    if a.n == 0 {
        return Err(CliError::BadInput("--n must be at least 1".into()));
    }
    let cf = fam.closed_form(a.n).map_err(CliError::input)?;
    let mut out = json!({
        "family": cf.family,
        "n": cf.n,
        "params": cf.codebook.params(),
        "points": cf.codebook.points(),
        "value": cf.value,
        "stated_value": cf.stated_value,
    });
    if a.verify {
        let d = distortion_value(&problem.measure, &cf.codebook);
        out["distortion"] = json!(d);
        out["discrepancy"] = json!((d - cf.value).abs());
        if let Some(s) = cf.stated_value {
            out["stated_discrepancy"] = json!((d - s).abs());
        }
    }
    emit_json(a.output.as_deref(), &out)
}

fn cmd_asymptotics(a: AsymptoticsArgs) -> CliResult<()> {
    if a.n_max < a.n_min || a.n_max - a.n_min + 1 < 4 {
        return Err(CliError::BadInput(format!(
            "need at least 4 values of n, got {}..={}",
            a.n_min, a.n_max
        )));
    }
    if a.n_min == 0 {
        return Err(CliError::BadInput("--n-min must be at least 1".into()));
    }
    let problem = resolve_problem(&a.problem)?;

    let (mode, entries): (&str, Vec<(usize, f64)>) = if a.exact {
        let fam = problem
            .family
            .ok_or_else(|| CliError::BadInput("--exact needs --family".into()))?;
        if a.stated {
            let from = fam.stated_from().unwrap_or(1).max(a.n_min);
            let entries = (from..=a.n_max)
                .map(|n| {
                    fam.stated_error(n).map(|v| (n, v)).ok_or_else(|| {
                        CliError::run(cquant::Error::Unsupported {
                            family: fam.id().to_string(),
                            n,
                            hint: "no reference error; drop --stated or use the solver".into(),
                        })
                    })
                })
                .collect::<CliResult<_>>()?;
            ("stated", entries)
        } else {
            // Small n without a closed form (the one-point segment-line
            // case) are skipped; gaps further up are errors.
            let entries = (a.n_min..=a.n_max)
                .map(|n| fam.closed_form(n).map(|c| (n, c.value)))
                .skip_while(|r| matches!(r, Err(cquant::Error::Unsupported { .. })))
                .map(|r| r.map_err(CliError::run))
                .collect::<CliResult<_>>()?;
            ("exact", entries)
        }
    } else {
        let cfg = solver_config(&a.solver)?;
        let seq = solve_sequence(&problem.measure, &problem.constraint, problem.window, a.n_max, &cfg)
            .map_err(CliError::run)?;
        let entries = seq.into_iter().filter(|r| r.n >= a.n_min).map(|r| (r.n, r.value)).collect();
        ("solver", entries)
    };

    let known_limit = match (problem.family, a.estimate_limit) {
        (Some(fam), false) if a.stated => fam.stated_v_infinity(),
        (Some(fam), false) => Some(fam.v_infinity()),
        _ => None,
    };
    let seq = match known_limit {
        Some(v) => ErrorSequence::with_exact(entries, v),
        None => ErrorSequence::estimated(entries),
    }
    .map_err(CliError::run)?;
    let report = analyze(&seq, a.order).map_err(CliError::run)?;

    if let Some(path) = &a.csv {
        fs::write(path, report.to_csv())?;
    }
    match a.format {
        Format::Csv => emit(a.output.as_deref(), &report.to_csv()),
        Format::Json => {
            let summary: Value = json!({
                "family": problem.family.map(|f| f.id()),
                "mode": mode,
                "n_min": seq.entries().first().map(|e| e.0),
                "n_max": a.n_max,
                "v_inf": report.v_infinity,
                "v_inf_source": report.v_infinity_source,
                "dim": report.dimension,
                "coef": report.coefficient,
                "order": report.order,
                "fit_residual": report.diagnostics.fit_residual,
                "coefficient_diverging": report.diagnostics.coefficient_diverging,
            });
            emit_json(a.output.as_deref(), &summary)
        }
    }
}
