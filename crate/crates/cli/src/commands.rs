//! Subcommand bodies. Each returns a JSON report, or the core error together
//! with context for the diagnostic file.

use std::path::Path;

use serde_json::{json, Value};
use toda_core::connection::{assemble_raw, commutator_norm, curvature, holonomy as hol, ConnectionForm, GridPath};
use toda_core::goldman::{
    fiber_form, fiber_pairing_closed_form, lagrangian_check, pairing, variation_q1, variation_q2, LagrangianSide,
};
use toda_core::geometry::ComplexMetricField;
use toda_core::io::{parse_json, to_pair, FieldFile, MetricSpec, RunConfig, ScalarSpec};
use toda_core::lie::{CartanSign, CartanType, LieData};
use toda_core::opers::{bd_oper_connection, connection_relation_check, relative_position_check, OperConnection};
use toda_core::suite::{run_suite, to_csv, SuiteOptions};
use toda_core::toda::{newton_solve, residual, u_minus_delta, TodaProblem};
use toda_core::{Error, Result};

use crate::{Failure, Output};

type CmdResult = std::result::Result<Value, (Error, Value)>;

fn with_context<T>(r: Result<T>, context: &Value) -> std::result::Result<T, (Error, Value)> {
    r.map_err(|e| (e, context.clone()))
}

fn config_context(path: &Path) -> Value {
    json!({ "config": path.display().to_string() })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn lie_dump(kind: &str, rank: usize, sign: CartanSign, full: bool, out: Option<&Path>) -> CmdResult {
    let ctx = json!({ "type": kind, "rank": rank });
    let run = || -> Result<Value> {
        let lie = LieData::with_options(CartanType::parse(kind)?, rank, sign, 1.0)?;
        let cb = &lie.basis;
        let td = &lie.toda;
        let nu_delta = lie.killing_form(&cb.unit(cb.highest()), &cb.unit(cb.neg_highest()));
        let mut report = json!({
            "type": kind.to_uppercase(),
            "rank": rank,
            "dim": lie.dim(),
            "d": td.d,
            "r": td.r,
            "n": td.n,
            "exponents": lie.hw.exponents,
            "cartan_matrix": cb.roots.cartan_matrix,
            "a": td.a,
            "a_delta": td.a_delta(),
            "xi": td.xi,
            "h_delta": td.h_delta,
            "convention": td.convention,
            "higgs_scale": td.higgs_scale,
            "constant_solution_U": td.s,
            "nu_delta": to_pair(nu_delta),
        });
        if full {
            report["roots"] = json!(cb.roots.roots);
            report["heights"] = json!(cb.roots.heights);
            report["structure_constants"] = json!(cb.n_table);
            report["e"] = json!(lie.triple.e.iter().map(|z| to_pair(*z)).collect::<Vec<_>>());
            report["e_tilde"] = json!(lie.triple.e_tilde.iter().map(|z| to_pair(*z)).collect::<Vec<_>>());
        }
        if let Some(p) = out {
            write_text(p, &toda_core::io::to_json_pretty(&report)?)?;
        }
        Ok(report)
    };
    with_context(run(), &ctx)
}

struct Prepared {
    cfg: RunConfig,
    lie: LieData,
    problem: TodaProblem,
}

fn prepare(config: &Path) -> Result<Prepared> {
    let cfg = RunConfig::from_path(config)?;
    let lie = cfg.lie_data()?;
    let problem = cfg.toda_problem(&lie)?;
    Ok(Prepared { cfg, lie, problem })
}

fn load_solution(path: &Path, p: &Prepared) -> Result<Vec<toda_core::geometry::FieldC>> {
    let file = FieldFile::read(path)?;
    if file.n != p.problem.n() {
        return Err(Error::Shape(format!("solution has N = {}, the configuration uses {}", file.n, p.problem.n())));
    }
    (0..p.lie.rank()).map(|i| file.field(&format!("u_{i}"))).collect()
}

fn solved_u(p: &Prepared, solution: Option<&Path>) -> Result<Vec<toda_core::geometry::FieldC>> {
    match solution {
        Some(path) => load_solution(path, p),
        None => Ok(newton_solve(&p.problem, None, &p.cfg.solver)?.u),
    }
}

fn connection_of(p: &Prepared, u: &[toda_core::geometry::FieldC]) -> Result<ConnectionForm> {
    let xd = p.lie.basis.unit(p.lie.basis.highest());
    assemble_raw(&p.lie, &p.problem.metric, u, &[(p.problem.q1.clone(), xd)], &p.problem.q2bar)
}

pub fn toda_solve(config: &Path, out: Option<&Path>) -> CmdResult {
    let ctx = config_context(config);
    let run = || -> Result<Value> {
        let p = prepare(config)?;
        let sol = newton_solve(&p.problem, None, &p.cfg.solver)?;
        let mut report = json!({
            "residual_norm": sol.residual_norm,
            "newton_iterations": sol.newton_iterations,
            "converged": sol.report.converged,
            "linear_solver": sol.report.linear_solver,
            "form": sol.form,
            "max_imag": sol.max_imag(),
            "u_mean": sol.u.iter().map(|f| to_pair(f.mean())).collect::<Vec<_>>(),
            "u_oscillation": sol.u.iter().map(|f| f.sub(&toda_core::geometry::FieldC::constant(f.n, f.mean())).sup_norm()).collect::<Vec<_>>(),
        });
        if let Some(path) = out {
            let mut file = FieldFile::new(p.problem.n());
            for (i, f) in sol.u.iter().enumerate() {
                file.insert(&format!("u_{i}"), f)?;
            }
            file.meta = Some(json!({ "report": sol.report, "form": sol.form, "s": sol.s }));
            file.write(path)?;
            report["out"] = json!(path.display().to_string());
        }
        Ok(report)
    };
    with_context(run(), &ctx)
}

pub fn connection_verify(config: &Path, solution: Option<&Path>) -> CmdResult {
    let ctx = config_context(config);
    let run = || -> Result<Value> {
        let p = prepare(config)?;
        let u = solved_u(&p, solution)?;
        let res = residual(&p.problem, &p.problem.restrict(&u)).iter().map(|f| f.sup_norm()).fold(0.0, f64::max);
        let conn = connection_of(&p, &u)?;
        let f = curvature(&p.lie, &p.problem.metric.grid, &conn);
        Ok(json!({
            "toda_residual": res,
            "curvature_sup": f.sup_norm(),
            "connection_sup": conn.sup_norm(),
            "representation": conn.rep,
        }))
    };
    with_context(run(), &ctx)
}

pub fn holonomy(config: &Path, solution: Option<&Path>, paths: &[String], out: Option<&Path>) -> CmdResult {
    let ctx = config_context(config);
    let run = || -> Result<Value> {
        let p = prepare(config)?;
        let n = p.problem.n();
        let specs: Vec<String> =
            if paths.is_empty() { vec!["loop:x".into(), "loop:y".into()] } else { paths.to_vec() };
        let parsed: Vec<GridPath> = specs.iter().map(|s| GridPath::parse(s, n)).collect::<Result<_>>()?;
        let u = solved_u(&p, solution)?;
        let conn = connection_of(&p, &u)?;
        let results = parsed
            .iter()
            .map(|path| hol(&p.lie, &p.problem.metric.grid, &conn, path))
            .collect::<Result<Vec<_>>>()?;
        let mut report = json!({
            "paths": specs,
            "all_converged": results.iter().all(|r| r.converged),
            "traces": results.iter().map(|r| to_pair(r.trace)).collect::<Vec<_>>(),
            "determinants": results.iter().map(|r| to_pair(r.determinant)).collect::<Vec<_>>(),
            "holonomies": serde_json::to_value(&results)?,
        });
        if results.len() >= 2 {
            report["commutator_norm"] = json!(commutator_norm(&results[0].matrix, &results[1].matrix));
        }
        if let Some(path) = out {
            write_text(path, &toda_core::io::to_json_pretty(&report)?)?;
        }
        Ok(report)
    };
    with_context(run(), &ctx)
}

fn zero_logs(p: &Prepared) -> Vec<toda_core::geometry::FieldC> {
    vec![toda_core::geometry::FieldC::zeros(p.problem.n()); p.lie.rank()]
}

fn scalar(p: &Prepared, spec: &str) -> Result<toda_core::geometry::FieldC> {
    let s: ScalarSpec = parse_json(spec)?;
    s.evaluate(&p.problem.metric.grid, &p.cfg.base_dir)
}

pub fn goldman_pair(config: &Path, q1_dot: &str, q2bar_dot: &str) -> CmdResult {
    let ctx = config_context(config);
    let run = || -> Result<Value> {
        let p = prepare(config)?;
        let metric = &p.problem.metric;
        let (a_dot, b_dot) = (scalar(&p, q1_dot)?, scalar(&p, q2bar_dot)?);
        let logs = zero_logs(&p);
        let a = variation_q1(&p.lie, &a_dot);
        let b = variation_q2(&p.lie, metric, &logs, &b_dot)?;
        let value = pairing(&p.lie, metric, &a, &b)?;
        let umd = u_minus_delta(&p.lie.toda, &logs).data[0];
        let closed = fiber_pairing_closed_form(&p.lie, metric, &a_dot, &b_dot, umd).ok();
        Ok(json!({
            "pairing": to_pair(value.value),
            "integrand_sup": value.integrand_sup,
            "rule": value.rule,
            "closed_form": closed.map(to_pair),
            "closed_form_error": closed.map(|c| (c - value.value).norm()),
        }))
    };
    with_context(run(), &ctx)
}

pub fn goldman_fiber(config: &Path, q_dot: &str) -> CmdResult {
    let ctx = config_context(config);
    let run = || -> Result<Value> {
        let p = prepare(config)?;
        let q = scalar(&p, q_dot)?;
        let v = fiber_form(&p.lie, &p.problem.metric, &q, &zero_logs(&p))?;
        Ok(json!({ "fiber_form": to_pair(v), "relative_imaginary_part": v.im.abs() / v.re.abs() }))
    };
    with_context(run(), &ctx)
}

pub fn goldman_lagrangian(config: &Path, side: LagrangianSide, dir_a: &str, dir_b: &str, step: f64) -> CmdResult {
    let ctx = config_context(config);
    let run = || -> Result<Value> {
        let p = prepare(config)?;
        let (a, b) = (scalar(&p, dir_a)?, scalar(&p, dir_b)?);
        let rep = lagrangian_check(&p.lie, &p.problem, side, &a, &b, step, &p.cfg.solver)?;
        Ok(serde_json::to_value(rep)?)
    };
    with_context(run(), &ctx)
}

/// Opers live on a conformal chart; for a perturbed metric the unperturbed
/// background `λ₀` is used.
fn oper_of(p: &Prepared) -> Result<OperConnection> {
    let grid = &p.problem.metric.grid;
    let q = p.cfg.differential_fields(grid)?;
    match &p.cfg.metric {
        MetricSpec::Perturbed { lambda0, .. } => {
            let background = ComplexMetricField::conformal(grid.clone(), lambda0.evaluate(grid, &p.cfg.base_dir)?)?;
            bd_oper_connection(&p.lie, &background, &q)
        }
        _ => bd_oper_connection(&p.lie, &p.problem.metric, &q),
    }
}

pub fn oper_build(config: &Path, out: Option<&Path>) -> CmdResult {
    let ctx = config_context(config);
    let run = || -> Result<Value> {
        let p = prepare(config)?;
        let oper = oper_of(&p)?;
        let curv = curvature(&p.lie, &p.problem.metric.grid, &oper.conn).sup_norm();
        let mut report = json!({
            "borel_grade": oper.borel_grade,
            "curvature_sup": curv,
            "grades_present": toda_core::opers::grades_present(&p.lie, &oper.conn, 0.0),
        });
        if let Some(path) = out {
            let mut file = FieldFile::new(p.problem.n());
            for (k, f) in oper.conn.a_z.comps.iter().enumerate() {
                file.insert(&format!("a_z_{k:02}"), f)?;
            }
            for (k, f) in oper.conn.a_zb.comps.iter().enumerate() {
                file.insert(&format!("a_zb_{k:02}"), f)?;
            }
            file.meta = Some(json!({ "basis_dim": p.lie.dim(), "representation": oper.conn.rep }));
            file.write(path)?;
            report["out"] = json!(path.display().to_string());
        }
        Ok(report)
    };
    with_context(run(), &ctx)
}

pub fn oper_check(config: &Path) -> CmdResult {
    let ctx = config_context(config);
    let run = || -> Result<Value> {
        let p = prepare(config)?;
        let rep = relative_position_check(&p.lie, &oper_of(&p)?);
        Ok(json!({ "pass": rep.pass, "failing_nodes": rep.failing_nodes, "min_per_root": rep.min_per_root }))
    };
    with_context(run(), &ctx)
}

pub fn oper_relation(config: &Path) -> CmdResult {
    let ctx = config_context(config);
    let run = || -> Result<Value> {
        let cfg = RunConfig::from_path(config)?;
        let MetricSpec::Perturbed { lambda0, phi0 } = &cfg.metric else {
            return Err(Error::Schema { path: "metric.kind".into(), message: "oper relation needs a perturbed metric".into() });
        };
        let lie = cfg.lie_data()?;
        let grid = toda_core::geometry::Grid::periodic(cfg.grid.n, cfg.grid.backend)?;
        let l0 = lambda0.evaluate(&grid, &cfg.base_dir)?;
        let p0 = phi0.evaluate(&grid, &cfg.base_dir)?;
        let q = cfg.differential_fields(&grid)?;
        Ok(serde_json::to_value(connection_relation_check(&lie, &grid, &l0, &p0, &q)?)?)
    };
    with_context(run(), &ctx)
}

pub fn suite(seed: u64, only: Option<Vec<u32>>, out: Option<&Path>, output: &Output) -> std::result::Result<(), Failure> {
    let results = run_suite(&SuiteOptions { seed, only, ..SuiteOptions::default() });
    let csv = to_csv(&results);
    match out {
        Some(path) => write_text(path, &csv).map_err(|e| Failure::Usage(e.to_string()))?,
        None => print!("{csv}"),
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.pass()).map(|r| r.id).collect();
    if out.is_some() {
        for r in &results {
            if !output.quiet {
                eprintln!("criterion {:>2} {:<22} {}", r.id, r.title, if r.pass() { "PASS" } else { "FAIL" });
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical {
            message: format!("criteria {failed:?} failed"),
            report: out.map(Path::to_path_buf),
        })
    }
}
