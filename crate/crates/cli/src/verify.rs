use dspec_core::analysis::{self, fit_asymptotics};
use dspec_core::spectrum::{self, SpectralData};
use dspec_core::transform;
use dspec_core::{Error, Problem, Result, SolverOptions};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Serialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub detail: Value,
}

#[derive(Serialize)]
pub struct Report {
    pub overall: &'static str,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }
}

const ASYMPTOTICS_COUNT: usize = 60;
const OSCILLATION_COUNT: usize = 16;
const TRACE_TERMS: usize = 50;
const SHIFT_COUNT: usize = 11;

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn asymptotics(p: &Problem, count: usize, opts: &SolverOptions) -> Result<(Status, Value)> {
    let data = spectrum::spectral_data(p, count.max(ASYMPTOTICS_COUNT), opts)?;
    let fit = fit_asymptotics(&data)?;
    let sigma = p.sigma();
    let ind_f = 2.0 * p.left.index() as f64;
    let ok = fit.l_hat == p.half_index_sum()
        && (fit.sigma_hat - sigma).abs() <= 1e-2
        && (fit.gamma_exponent - ind_f).abs() <= 0.05
        && fit.residuals_plateau();
    Ok((
        status(ok),
        json!({
            "L": p.half_index_sum(),
            "L_hat": fit.l_hat,
            "sigma": sigma,
            "sigma_hat": fit.sigma_hat,
            "gamma_exponent": fit.gamma_exponent,
            "expected_gamma_exponent": ind_f,
            "plateau": fit.residuals_plateau(),
        }),
    ))
}

fn oscillation(p: &Problem, opts: &SolverOptions) -> Result<(Status, Value)> {
    let data = spectrum::spectral_data(p, OSCILLATION_COUNT, opts)?;
    let r = analysis::oscillation_check(p, &data, opts)?;
    Ok((status(r.passed()), json!({"counts": r.counts, "expected": r.expected})))
}

fn trace(p: &Problem, opts: &SolverOptions) -> Result<(Status, Value)> {
    let tight = opts.clone().with_rtol(opts.rtol.min(1e-12));
    let r = analysis::trace_report(p, TRACE_TERMS, &tight)?;
    Ok((
        status(r.gap() <= 1e-3),
        json!({"series": r.series_value, "closed_form": r.closed_form, "a": r.a, "b": r.b, "gap": r.gap()}),
    ))
}

fn invariant(p: &Problem, opts: &SolverOptions) -> Result<(Status, Value)> {
    let r = analysis::lemma_invariant_check(p, opts)?;
    Ok((status(r.passed(1e-4)), json!({"before": r.before, "after": r.after})))
}

fn transformation(p: &Problem, opts: &SolverOptions) -> Result<(Status, Value)> {
    let data = spectrum::spectral_data(p, SHIFT_COUNT + 1, opts)?;
    let step = transform::t_hat_at(p, data.lambdas[0], data.gammas[0], opts)?;
    let hat = spectrum::spectral_data(&step.problem, SHIFT_COUNT, opts)?;
    let mut lambda_err = 0.0f64;
    let mut gamma_err = 0.0f64;
    for n in 0..SHIFT_COUNT {
        let l = data.lambdas[n + 1];
        lambda_err = lambda_err.max((hat.lambdas[n] - l).abs() / l.abs().max(1.0));
        let g = hat.gammas[n] * (l - data.lambdas[0]);
        gamma_err = gamma_err.max((g / data.gammas[n + 1] - 1.0).abs());
    }
    let back = transform::t_tilde(step.mu, step.nu, &step.problem, opts)?;
    let q_err = transform::retained_distance(&back.problem.q, &p.q);
    let f_err = back.problem.left.coefficient_distance(&p.left);
    let big_f_err = back.problem.right.coefficient_distance(&p.right);
    let ok = lambda_err <= 1e-5 && gamma_err <= 1e-4 && q_err <= 1e-5 && f_err <= 1e-8 && big_f_err <= 1e-8;
    Ok((
        status(ok),
        json!({
            "lambda_rel_err": lambda_err,
            "gamma_rel_err": gamma_err,
            "roundtrip_q_err": q_err,
            "roundtrip_f_err": f_err,
            "roundtrip_F_err": big_f_err,
            "route_gap": step.route_gap,
        }),
    ))
}

fn chain(p: &Problem, count: usize, opts: &SolverOptions) -> Result<(Status, Value)> {
    const K: usize = 2;
    let data = spectrum::spectral_data(p, count.max(ASYMPTOTICS_COUNT), opts)?;
    let l0 = data.lambdas[0];
    let (lambdas, gammas) = analysis::data_chain(&data.lambdas, &data.gammas, K, &[l0 - 2.0, l0 - 1.0], &[1.0, 1.0])?;
    let shifted = SpectralData {
        lambdas: lambdas.clone(),
        gammas: gammas.clone(),
        betas: vec![f64::NAN; lambdas.len()],
        ind_f: data.ind_f + K as i64,
        ind_right: data.ind_right + K as i64,
    };
    let fit = fit_asymptotics(&shifted)?;
    let (mut l, mut g) = (lambdas, gammas);
    for _ in 0..K {
        (l, g) = analysis::hat_data_map(&l, &g)?;
    }
    let inverse_err = l
        .iter()
        .zip(&data.lambdas)
        .chain(g.iter().zip(&data.gammas))
        .map(|(a, b)| ((a - b) / b.abs().max(1e-300)).abs())
        .fold(0.0, f64::max);
    let expected_l = p.half_index_sum() + K as f64;
    let ok = fit.l_hat == expected_l
        && (fit.gamma_exponent - 2.0 * shifted.ind_f as f64).abs() <= 0.05
        && inverse_err <= 1e-10;
    Ok((
        status(ok),
        json!({
            "K": K,
            "L_hat": fit.l_hat,
            "expected_L": expected_l,
            "gamma_exponent": fit.gamma_exponent,
            "inverse_rel_err": inverse_err,
        }),
    ))
}

fn symmetry(p: &Problem, count: usize, opts: &SolverOptions) -> Result<(Status, Value)> {
    let data = spectrum::spectral_data(p, count, opts)?;
    let by_beta = analysis::symmetric_check(&data);
    let by_structure = p.is_symmetric(1e-10);
    Ok((
        status(by_beta == by_structure),
        json!({"beta_test": by_beta, "structural": by_structure}),
    ))
}

fn run_check(name: &str, p: &Problem, count: usize, opts: &SolverOptions) -> CheckResult {
    let outcome = match name {
        "asymptotics" => asymptotics(p, count, opts),
        "oscillation" => oscillation(p, opts),
        "trace" => trace(p, opts),
        "invariant" => invariant(p, opts),
        "transformation" => transformation(p, opts),
        "chain" => chain(p, count, opts),
        "symmetry" => symmetry(p, count, opts),
        other => Err(Error::InvalidInput(format!("unknown check '{other}'"))),
    };
    let (status, detail) = match outcome {
        Ok(v) => v,
        Err(e @ Error::Unsupported(_)) => (Status::Skipped, json!({"reason": e.to_string()})),
        Err(e) => (Status::Fail, json!({"error": e.to_string()})),
    };
    CheckResult {
        name: name.to_string(),
        status,
        detail,
    }
}

pub fn run(p: &Problem, suite: &[String], count: usize, opts: &SolverOptions) -> Report {
    let checks: Vec<CheckResult> = suite.par_iter().map(|n| run_check(n, p, count, opts)).collect();
    let overall = if checks.iter().any(|c| c.status == Status::Fail) {
        "fail"
    } else if checks.iter().any(|c| c.status == Status::Skipped) {
        "pass_with_skips"
    } else {
        "pass"
    };
    Report { overall, checks }
}
