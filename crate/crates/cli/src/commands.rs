use std::path::Path;

use fracal::grid::sample_real;
use fracal::ops::{combined_derivative, left_rl_derivative, right_rl_derivative};
use fracal::solver::{minimize_action, SolveReport};
use fracal::suites::{run_suite, Suite, SuiteReport};
use fracal::SampledFunction;

use crate::config::Problem;
use crate::output::{float, write_atomic, Report, Table};
use crate::CliError;

pub const FUNCTIONS: [&str; 7] = ["identity", "zero", "constant", "square", "cube", "sine", "exp"];

fn test_function(name: &str) -> Result<fn(f64) -> f64, CliError> {
    let f: fn(f64) -> f64 = match name {
        "identity" => |t| t,
        "zero" => |_| 0.0,
        "constant" => |_| 1.0,
        "square" => |t| t * t,
        "cube" => |t| t * t * t,
        "sine" => f64::sin,
        "exp" => f64::exp,
        other => {
            return Err(CliError::Config {
                field: "function".into(),
                reason: format!("unknown function `{other}` (expected one of {})", FUNCTIONS.join(", ")),
            })
        }
    };
    Ok(f)
}

pub fn ops(problem: &Problem, function: Option<&str>, out: &Path) -> Result<(), CliError> {
    let name = function.or(problem.function.as_deref()).unwrap_or("identity");
    let f = sample_real(&problem.grid, test_function(name)?);
    let left = left_rl_derivative(&f, problem.order.alpha())?;
    let right = right_rl_derivative(&f, problem.order.beta())?;
    let combined = combined_derivative(&f, &problem.order)?;

    let mut table = Table::new(&[
        "node",
        "tau",
        "input",
        "left_derivative",
        "right_derivative",
        "combined_re",
        "combined_im",
    ]);
    for j in 0..f.len() {
        let z = combined.scalar(j);
        table.row(&[
            j.to_string(),
            float(problem.grid.node(j)),
            float(f.scalar(j).re),
            float(left.scalar(j).re),
            float(right.scalar(j).re),
            float(z.re),
            float(z.im),
        ]);
    }
    write_atomic(&out.join("ops.csv"), &table.into_string())?;
    println!(
        "ops: function={name} n_points={} -> {}",
        f.len(),
        out.join("ops.csv").display()
    );
    Ok(())
}

fn path_table(path: &SampledFunction) -> String {
    let d = path.dim();
    let mut header = vec!["node".to_string(), "tau".to_string()];
    if d == 1 {
        header.push("q".into());
    } else {
        header.extend((0..d).map(|k| format!("q{k}")));
    }
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&refs);
    for j in 0..path.len() {
        let mut cells = vec![j.to_string(), float(path.grid().node(j))];
        cells.extend(path.at(j).iter().map(|z| float(z.re)));
        table.row(&cells);
    }
    table.into_string()
}

fn solve_report(problem: &Problem, r: &SolveReport) -> String {
    let mut rep = Report::default();
    let g = &problem.grid;
    let o = &problem.order;
    rep.str("command", "minimize")
        .str("method", r.method)
        .bool("converged", r.converged)
        .int("iterations", r.iterations as u64)
        .float("final_action_re", r.final_action.re)
        .float("final_action_im", r.final_action.im)
        .float("gradient_norm", r.gradient_norm)
        .float("el_residual_norm", r.el_residual_norm)
        .float("gradient_tolerance", problem.solve.gradient_tolerance)
        .int("max_iterations", problem.solve.max_iterations as u64)
        .str("lagrangian", &problem.lagrangian_kind)
        .int("n_points", g.n_points() as u64)
        .float("a", g.a())
        .float("b", g.b())
        .float("t_obs", g.t_obs())
        .float("alpha", o.alpha())
        .float("beta", o.beta())
        .float("gamma_re", o.gamma().re)
        .float("gamma_im", o.gamma().im);
    rep.into_string()
}

/// Returns whether the solver converged.
pub fn minimize(problem: &Problem, out: &Path) -> Result<bool, CliError> {
    let result = minimize_action(
        problem.lagrangian.as_ref(),
        &problem.order,
        &problem.grid,
        &problem.q_a,
        &problem.q_b,
        &problem.solve,
    );
    let r = match result {
        Ok(r) => r,
        Err(fracal::Error::NonFinite {
            what,
            iteration,
            iterate,
        }) => {
            let mut table = Table::new(&["index", "value"]);
            for (k, v) in iterate.iter().enumerate() {
                table.row(&[k.to_string(), float(*v)]);
            }
            let dump = out.join("nonfinite_iterate.csv");
            write_atomic(&dump, &table.into_string())?;
            eprintln!("iterate written to {}", dump.display());
            return Err(CliError::Core(fracal::Error::NonFinite {
                what,
                iteration,
                iterate,
            }));
        }
        Err(e) => return Err(e.into()),
    };
    write_atomic(&out.join("path.csv"), &path_table(&r.final_path))?;
    write_atomic(&out.join("report.toml"), &solve_report(problem, &r))?;
    println!(
        "minimize: converged={} iterations={} action={} gradient_norm={} el_residual_norm={}",
        r.converged,
        r.iterations,
        float(r.final_action.re),
        float(r.gradient_norm),
        float(r.el_residual_norm)
    );
    Ok(r.converged)
}

fn suite_table(report: &SuiteReport) -> String {
    let mut table = Table::new(&["suite", "case", "n_points", "measured", "threshold", "order", "pass"]);
    for c in &report.cases {
        table.row(&[
            report.suite.name().to_string(),
            format!("\"{}\"", c.case),
            c.n_points.to_string(),
            float(c.measured),
            float(c.threshold),
            c.order.map(float).unwrap_or_default(),
            c.pass.to_string(),
        ]);
    }
    table.into_string()
}

/// Returns whether every case passed.
pub fn verify(suite: &str, seed: u64, out: &Path) -> Result<bool, CliError> {
    let suite: Suite = suite
        .parse()
        .map_err(|e: fracal::Error| CliError::Usage(e.to_string()))?;
    let report = run_suite(suite, seed)?;
    let base = format!("verify_{}", suite.name());
    write_atomic(&out.join(format!("{base}.csv")), &suite_table(&report))?;
    let passed = report.cases.iter().filter(|c| c.pass).count();
    let mut rep = Report::default();
    rep.str("command", "verify")
        .str("suite", suite.name())
        .int("seed", seed)
        .int("cases", report.cases.len() as u64)
        .int("passed", passed as u64)
        .bool("all_passed", report.all_passed());
    write_atomic(&out.join(format!("{base}.toml")), &rep.into_string())?;
    for c in &report.cases {
        println!(
            "{} {} [{}] n={} measured={} threshold={}{}",
            if c.pass { "PASS" } else { "FAIL" },
            suite.name(),
            c.case,
            c.n_points,
            float(c.measured),
            float(c.threshold),
            c.order.map(|o| format!(" order={o:.3}")).unwrap_or_default()
        );
    }
    println!("{}: {passed}/{} cases passed", suite.name(), report.cases.len());
    Ok(report.all_passed())
}
