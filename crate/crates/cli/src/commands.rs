//! One function per subcommand. Each returns a [`Report`]; writing it out is the caller's job.

use std::collections::BTreeMap;

use hodge_cgo::algebra::AlgebraTables;
use hodge_cgo::cgo::{self, Family};
use hodge_cgo::checks::{self, CheckResult};
use hodge_cgo::media::{self, DerivedMedium};
use hodge_cgo::uniqueness::{self, UcpCoefficients};
use hodge_cgo::{Error, FormField};
use serde_json::{json, Value};

use crate::config::{ConfigError, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_RESONANT: i32 = 4;
pub const EXIT_TREND: i32 = 5;

/// Exit code for an engine error.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Divergence { .. } | Error::NotConverged { .. } | Error::StudyAborted { .. } => EXIT_DIVERGENCE,
        Error::ResonantGrid { .. } => EXIT_RESONANT,
        Error::Algebra(_) => EXIT_CHECK_FAILED,
        _ => EXIT_CONFIG,
    }
}

/// Failure before any table could be produced.
#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Engine(Error),
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Config(e) => e.fmt(f),
            CommandError::Engine(e) => e.fmt(f),
        }
    }
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => EXIT_CONFIG,
            CommandError::Engine(e) => exit_code_for(e),
        }
    }
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        CommandError::Engine(e)
    }
}

/// Table plus diagnostics of one command run.
#[derive(Debug, Default)]
pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Check results, for the check-* commands.
    pub checks: Vec<CheckResult>,
    pub diagnostics: Value,
    pub flags: BTreeMap<String, bool>,
    pub exit_code: i32,
    pub snapshot: Option<FormField>,
    /// Secondary tables written next to results.csv.
    pub extra_tables: Vec<(String, Vec<&'static str>, Vec<Vec<String>>)>,
}

impl Report {
    fn from_checks(checks: Vec<CheckResult>) -> Self {
        let rows = checks
            .iter()
            .map(|c| vec![c.name.clone(), num(c.max_error), num(c.tolerance), c.passed.to_string()])
            .collect();
        let all = checks::all_passed(&checks);
        let mut flags = BTreeMap::new();
        flags.insert("all_passed".to_string(), all);
        Report {
            header: vec!["check", "max_error", "tolerance", "passed"],
            rows,
            checks,
            flags,
            exit_code: if all { EXIT_OK } else { EXIT_CHECK_FAILED },
            ..Default::default()
        }
    }

    /// Lowers the exit code to the trend-failure code when a flag is false.
    fn flag(&mut self, name: &str, ok: bool) {
        self.flags.insert(name.to_string(), ok);
        if !ok && self.exit_code == EXIT_OK {
            self.exit_code = EXIT_TREND;
        }
    }
}

/// Shortest round-trip formatting; identical inputs give identical bytes.
fn num(v: f64) -> String {
    format!("{v:e}")
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn derived(cfg: &RunConfig) -> Result<DerivedMedium, CommandError> {
    let m = cfg.sample_medium()?;
    media::derive(&m).map_err(|e| ConfigError::new("medium", e.to_string()).into())
}

pub fn check_algebra(cfg: &RunConfig, fault: bool) -> Report {
    let tables = if fault { AlgebraTables::with_injected_fault() } else { AlgebraTables::build() };
    let mut r = Report::from_checks(checks::algebra_suite(&tables, cfg.sampling.seed, cfg.checks.n_random));
    r.diagnostics = json!({ "fault_injected": fault, "n_random": cfg.checks.n_random });
    r
}

pub fn check_calculus(cfg: &RunConfig) -> Result<Report, CommandError> {
    let g = cfg.grid()?;
    let mut results = checks::calculus_suite(g, cfg.sampling.seed, cfg.checks.band);
    // resolvent norm at the first configured s; k of the medium keeps ζ on the characteristic set
    let k = media::wavenumber(cfg.medium.omega, cfg.medium.eps0, cfg.medium.mu0);
    let geom = cfg.geometry_at(&g, cfg.geometry.s_list[0], k)?;
    results.extend(checks::resolvent_norm_check(g, &geom.zeta1, cfg.clamp(&g), cfg.sampling.seed));
    let mut r = Report::from_checks(results);
    r.diagnostics = json!({ "band": cfg.checks.band, "zeta_norm": geom.zeta1.norm() });
    Ok(r)
}

pub fn check_factorization(cfg: &RunConfig) -> Result<Report, CommandError> {
    let dm = derived(cfg)?;
    let mut r = Report::from_checks(checks::factorization_suite(&dm, cfg.sampling.seed, cfg.checks.pairs, cfg.checks.band));
    r.diagnostics = json!({
        "pairs": cfg.checks.pairs,
        "band": cfg.checks.band,
        "background": dm.is_background(),
        "chain_rule_defect": dm.chain_rule_defect(),
    });
    Ok(r)
}

pub fn run_cgo(cfg: &RunConfig) -> Result<Report, CommandError> {
    let dm = derived(cfg)?;
    let g = dm.grid;
    let settings = cfg.solver(&g);
    let mut r = Report {
        header: vec![
            "s",
            "angle",
            "polarization",
            "iterations",
            "residual",
            "r_norm",
            "qa_norm",
            "clamped_fraction",
            "contraction",
            "grade03_ratio",
            "status",
        ],
        ..Default::default()
    };
    let mut diags = Vec::new();
    let mut ratios: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for pol in cfg.geometry.polarization.modes() {
        for &s in &cfg.geometry.s_list {
            let geom = cfg.geometry_at(&g, s, dm.k)?;
            let mut row = vec![num(s), num(cfg.geometry.angle), pol.label().to_string()];
            match cgo::solve_family(&dm, &geom, pol, Family::W1, &settings) {
                Ok((used, sol)) => {
                    let d = sol.diagnostics;
                    let ratio = cgo::check_grade03(&dm, &sol);
                    ratios.entry(pol.label()).or_default().push(ratio);
                    row[0] = num(used.s);
                    row.extend([
                        d.iterations.to_string(),
                        num(d.residual),
                        num(d.remainder_norm),
                        num(d.qa_norm),
                        num(d.clamp.fraction()),
                        num(d.contraction),
                        num(ratio),
                        "ok".to_string(),
                    ]);
                    diags.push(json!({ "s": used.s, "polarization": pol, "diagnostics": d }));
                    r.snapshot = Some(sol.remainder);
                }
                Err(e) => {
                    let code = exit_code_for(&e);
                    let contraction = match e {
                        Error::Divergence { contraction, .. } => contraction,
                        _ => f64::NAN,
                    };
                    row.extend(["0", "NaN", "NaN", "NaN", "NaN"].map(String::from));
                    row.extend([num(contraction), "NaN".to_string(), code_label(code).to_string()]);
                    diags.push(json!({ "s": s, "polarization": pol, "error": e.to_string(), "contraction": contraction }));
                    if r.exit_code == EXIT_OK {
                        r.exit_code = code;
                    }
                }
            }
            r.rows.push(row);
        }
    }
    r.diagnostics = json!({ "k": dm.k, "omega": dm.omega, "solves": diags });
    if r.exit_code == EXIT_OK && cfg.geometry.s_list.len() > 1 {
        for (pol, v) in &ratios {
            r.flag(&format!("grade03_decreasing_{pol}"), strictly_decreasing(v));
        }
    }
    Ok(r)
}

fn code_label(code: i32) -> &'static str {
    match code {
        EXIT_DIVERGENCE => "divergence",
        EXIT_RESONANT => "resonant",
        _ => "error",
    }
}

pub fn run_decay(cfg: &RunConfig) -> Result<Report, CommandError> {
    let dm = derived(cfg)?;
    let settings = cfg.solver(&dm.grid);
    let mut r = Report {
        header: vec![
            "polarization",
            "lambda",
            "sample",
            "s",
            "angle",
            "iterations",
            "residual",
            "r_norm",
            "qa_norm",
            "clamped_fraction",
            "contraction",
            "failed",
        ],
        ..Default::default()
    };
    let mut summaries = Vec::new();
    let mut summary_rows = Vec::new();
    for pol in cfg.geometry.polarization.modes() {
        let (rows, summary) = cgo::decay_study(
            &dm,
            cfg.geometry.rho_index,
            pol,
            &cfg.geometry.lambda_list,
            cfg.sampling.n_samples,
            cfg.sampling.seed,
            &settings,
        )?;
        for row in rows {
            r.rows.push(vec![
                pol.label().to_string(),
                num(row.lambda),
                row.sample.to_string(),
                num(row.s),
                num(row.angle),
                row.iterations.to_string(),
                num(row.residual),
                num(row.r_norm),
                num(row.qa_norm),
                num(row.clamped_fraction),
                num(row.contraction),
                row.failed.to_string(),
            ]);
        }
        for s in &summary {
            summary_rows.push(vec![
                pol.label().to_string(),
                num(s.lambda),
                s.samples.to_string(),
                s.failures.to_string(),
                num(s.mean_r2),
                num(s.stderr_r2),
                num(s.mean_qa2),
            ]);
        }
        let means: Vec<f64> = summary.iter().map(|s| s.mean_r2).collect();
        r.flag(&format!("mean_r2_decreasing_{}", pol.label()), strictly_decreasing(&means));
        summaries.push(json!({ "polarization": pol, "summary": summary }));
    }
    r.extra_tables.push((
        "summary.csv".to_string(),
        vec!["polarization", "lambda", "samples", "failures", "mean_r2", "stderr_r2", "mean_qa2"],
        summary_rows,
    ));
    r.diagnostics = json!({ "k": dm.k, "studies": summaries });
    Ok(r)
}

pub fn run_uniqueness(cfg: &RunConfig) -> Result<Report, CommandError> {
    let mp = cfg.medium_pair()?;
    let settings = cfg.solver(&mp.grid());
    let identical = cfg.medium2.as_ref().map_or(true, |m| *m == cfg.medium);
    let mut r = Report {
        header: vec![
            "polarization",
            "s",
            "pairing_re",
            "pairing_im",
            "target_re",
            "target_im",
            "abs_error",
            "iterations_w1",
            "iterations_v2",
        ],
        ..Default::default()
    };
    let mut outputs = Vec::new();
    for pol in cfg.geometry.polarization.modes() {
        let out = uniqueness::convergence_experiment(&mp, cfg.geometry.rho_index, cfg.geometry.angle, pol, &cfg.geometry.s_list, &settings)?;
        for o in &out {
            r.rows.push(vec![
                pol.label().to_string(),
                num(o.s),
                num(o.pairing.re),
                num(o.pairing.im),
                num(o.limit.re),
                num(o.limit.im),
                num(o.error),
                o.iterations_w1.to_string(),
                o.iterations_v2.to_string(),
            ]);
        }
        if identical {
            let floor = out.iter().map(|o| o.pairing.norm()).fold(0.0, f64::max);
            r.flag(&format!("pairing_at_floor_{}", pol.label()), floor < 1e-9);
        } else if out.len() > 1 {
            r.flag(&format!("error_decreases_{}", pol.label()), out[out.len() - 1].error < out[0].error);
        }
        outputs.extend(out);
    }
    let mut diag = json!({ "k": mp.k(), "identical_media": identical, "outputs": outputs });

    if let Some(ucp) = &cfg.ucp {
        let coeffs = UcpCoefficients::from_pair(&mp);
        let clamp = cfg.clamp(&mp.grid());
        let mut rows = Vec::new();
        let mut reports = Vec::new();
        for &z in &ucp.zeta_norms {
            let zeta = uniqueness::generic_null_covector(z, ucp.angle);
            let rep = uniqueness::ucp_contraction_check(&coeffs, &zeta, ucp.trials, cfg.sampling.seed, clamp)?;
            let worst = rep.fixed_point_norms.iter().copied().fold(0.0, f64::max);
            rows.push(vec![
                num(z),
                num(rep.estimate),
                rep.contraction.to_string(),
                rep.inconclusive.to_string(),
                num(worst),
                rep.fixed_point_iterations.to_string(),
            ]);
            reports.push(rep);
        }
        let est: Vec<f64> = reports.iter().map(|x| x.estimate).collect();
        if !identical {
            r.flag("ucp_estimate_decreasing", strictly_decreasing(&est));
            let last = reports.last().expect("nonempty zeta list");
            r.flag("ucp_contraction_at_largest_zeta", last.estimate < 1.0);
            r.flag("ucp_fixed_point_vanishes", last.fixed_point_norms.iter().all(|&n| n < 1e-8));
        }
        r.extra_tables.push((
            "ucp.csv".to_string(),
            vec!["zeta_norm", "estimate", "contraction", "inconclusive", "max_fixed_point_norm", "iterations"],
            rows,
        ));
        diag["ucp"] = json!(reports);
    }
    r.diagnostics = diag;
    Ok(r)
}

pub fn estimate_qnorm(cfg: &RunConfig) -> Result<Report, CommandError> {
    let dm = derived(cfg)?;
    let g = dm.grid;
    let clamp = cfg.clamp(&g);
    let mut r = Report {
        header: vec!["s", "zeta_norm", "estimate", "h", "smooth_term", "rough_term"],
        ..Default::default()
    };
    let mut est = Vec::new();
    let mut all = Vec::new();
    for &s in &cfg.geometry.s_list {
        let geom = cfg.geometry_at(&g, s, dm.k)?;
        let q = cgo::q_norm_estimate(&dm, &geom.zeta1, cfg.sampling.trials, cfg.sampling.seed, clamp)?;
        r.rows.push(vec![num(s), num(q.zeta_norm), num(q.estimate), num(q.h), num(q.smooth_term), num(q.rough_term)]);
        est.push(q.estimate);
        all.push(q);
    }
    if !dm.is_background() && est.len() > 1 {
        r.flag("estimate_decreasing", strictly_decreasing(&est));
    }
    r.diagnostics = json!({ "k": dm.k, "estimates": all });
    Ok(r)
}
