use std::path::Path;

use serde::Serialize;
use serde_json::json;

use gpc_core::density_evolution::{de_threshold, reduce_symmetric, ThresholdOptions};
use gpc_core::graph_sim::{build_graph, monte_carlo_with, SimOptions};
use gpc_core::potential::{
    min_vs_with, potential_threshold_with, potential_us, potential_vs, verify_regular_optimal,
    OptimalityOptions, PotentialThresholdOptions,
};
use gpc_core::report::{fmt_f64, write_de_states_csv, write_de_summary_csv};
use gpc_core::verify::{run_suite, Suite, VerifyOptions};
use gpc_core::{de_run, validate, DeConfig, ErasureProfile, SparseMatrix};

use crate::config::{
    required, ConstructCfg, DeCfg, OptimizeTauCfg, PotentialCfg, SimulateCfg, Source,
    ThresholdCfg, VerifyCfg,
};
use crate::error::CliError;
use crate::output::OutDir;

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn construct(cfg: &ConstructCfg, out: Option<&Path>) -> Result<OutDir, CliError> {
    let spec = cfg.family.build()?.spec("construct")?;
    let diag = validate(&spec);
    let dir = OutDir::create("construct", out, cfg)?;
    let eta: serde_json::Value = serde_json::from_str(&spec.to_json()).expect("valid json");
    dir.json("eta.json", &json!({ "eta": eta, "nonzeros": spec.eta().count_nonzero() }))?;
    dir.csv("eta.csv", spec.eta_to_csv().as_bytes())?;
    dir.json("diagnostics.json", &diag)?;
    println!(
        "{} code: {}x{} η with {} ones, gamma {}, checks {}",
        spec.family(),
        spec.size(),
        spec.size(),
        spec.eta().count_nonzero(),
        spec.gamma(),
        if diag.passed() { "passed" } else { "FAILED" }
    );
    Ok(dir)
}

fn matrix_for(source: Source, reduce: bool) -> Result<(SparseMatrix, usize), CliError> {
    if !reduce {
        return Ok((source.averaging(), 1));
    }
    let spec = source.spec("--reduce")?;
    let r = reduce_symmetric(&spec)?;
    Ok((r.averaging.to_sparse(), r.stride))
}

pub fn de(cfg: &DeCfg, out: Option<&Path>) -> Result<OutDir, CliError> {
    let source = cfg.family.build()?;
    let profile = cfg.profile.build()?;
    let config = DeConfig {
        c: required(cfg.c, "c")?,
        max_iters: cfg.max_iters,
        zero_tol: cfg.zero_tol,
        stall_tol: cfg.stall_tol,
        record_every: cfg.record_every,
    };
    config.validate()?;
    let (b, stride) = matrix_for(source, cfg.reduce)?;
    let trace = de_run(&b, &profile, &config)?;
    let dir = OutDir::create("de", out, cfg)?;
    dir.csv("trace.csv", &csv_bytes(|w| write_de_summary_csv(&trace, w))?)?;
    if cfg.states {
        dir.csv("states.csv", &csv_bytes(|w| write_de_states_csv(&trace, w))?)?;
    }
    let last = trace.summaries.last().copied();
    dir.json(
        "result.json",
        &json!({
            "verdict": trace.verdict,
            "iterations": trace.iterations(),
            "failure_fraction": last.map(|s| s.failure_fraction),
            "positions": b.rows(),
            "stride": stride,
            "final_x": trace.final_x,
        }),
    )?;
    println!(
        "{:?} after {} iterations; failure fraction {}",
        trace.verdict,
        trace.iterations(),
        last.map_or("n/a".into(), |s| fmt_f64(s.failure_fraction))
    );
    Ok(dir)
}

pub fn threshold(cfg: &ThresholdCfg, out: Option<&Path>) -> Result<OutDir, CliError> {
    let source = cfg.family.build()?;
    let profile = cfg.profile.build()?;
    let bracket = match cfg.bracket.as_deref() {
        None => None,
        Some([lo, hi]) => Some((*lo, *hi)),
        Some(_) => return Err(CliError::Usage("--bracket takes two values lo,hi".into())),
    };
    let opts = ThresholdOptions {
        bracket,
        bisect_tol: cfg.bisect_tol,
        max_steps: cfg.max_steps,
        c_cap: cfg.c_cap,
        max_iters: cfg.max_iters,
        ..ThresholdOptions::default()
    };
    let (b, _) = matrix_for(source, cfg.reduce)?;
    let r = de_threshold(&b, &profile, &opts)?;
    let dir = OutDir::create("threshold", out, cfg)?;
    dir.json("threshold.json", &r)?;
    let log = csv_bytes(|w| {
        use std::io::Write;
        writeln!(w, "c,verdict,iterations")?;
        for s in &r.log {
            writeln!(w, "{},{:?},{}", fmt_f64(s.c), s.verdict, s.iterations)?;
        }
        Ok(())
    })?;
    dir.csv("bracket_log.csv", &log)?;
    println!("c_bar = {:.8}", r.c_bar);
    if !r.monotonicity_violations.is_empty() {
        eprintln!(
            "warning: {} probes near c_bar contradict monotonicity in c",
            r.monotonicity_violations.len()
        );
    }
    Ok(dir)
}

#[derive(Serialize)]
struct TableRow {
    t: u32,
    c_p: f64,
    bound: f64,
    holds: bool,
}

pub fn potential(cfg: &PotentialCfg, out: Option<&Path>) -> Result<OutDir, CliError> {
    let popts = PotentialThresholdOptions {
        bisect_tol: cfg.bisect_tol,
        grid: cfg.grid,
        ..PotentialThresholdOptions::default()
    };
    let has_profile = cfg.profile.t.is_some() || cfg.profile.profile.is_some();
    if !has_profile && cfg.t_range.is_none() {
        return Err(CliError::Usage("give --t, --profile or --t-range".into()));
    }
    let mut result = serde_json::Map::new();
    let mut files: Vec<(&str, Vec<u8>)> = Vec::new();
    if has_profile {
        let profile = cfg.profile.build()?;
        let cp = potential_threshold_with(&profile, &popts)?;
        println!("c_p = {cp:.8} for profile {profile}");
        result.insert("c_p".into(), json!(cp));
        result.insert("profile".into(), json!(profile));
        if let Some(c) = cfg.c {
            let eval = min_vs_with(c, &profile, cfg.grid, false)?;
            println!("min V_s = {} at x = {:.8}", fmt_f64(eval.v_min), eval.x_star);
            result.insert("min_vs".into(), json!(eval));
            files.push(("curve.csv", curve(c, &profile, cfg.points)?));
        }
    }
    if let Some(range) = &cfg.t_range {
        let [lo, hi] = range.as_slice() else {
            return Err(CliError::Usage("--t-range takes two values lo,hi".into()));
        };
        if lo > hi || *lo < 1 {
            return Err(CliError::Usage("--t-range needs 1 <= lo <= hi".into()));
        }
        let mut rows = Vec::new();
        for t in *lo..=*hi {
            let cp = potential_threshold_with(&ErasureProfile::regular(t)?, &popts)?;
            let bound = 2.0 * f64::from(t) - 2.0;
            rows.push(TableRow { t, c_p: cp, bound, holds: cp >= bound });
        }
        let t_star = (0..rows.len())
            .find(|&i| rows[i..].iter().all(|r| r.holds))
            .map(|i| rows[i].t);
        println!("t* = {}", t_star.map_or("none".into(), |t| t.to_string()));
        let table = csv_bytes(|w| {
            use std::io::Write;
            writeln!(w, "t,c_p,two_t_minus_2,holds")?;
            for r in &rows {
                writeln!(w, "{},{},{},{}", r.t, fmt_f64(r.c_p), fmt_f64(r.bound), r.holds)?;
            }
            Ok(())
        })?;
        files.push(("table.csv", table));
        result.insert("table".into(), json!(rows));
        result.insert("t_star".into(), json!(t_star));
    }
    let dir = OutDir::create("potential", out, cfg)?;
    dir.json("potential.json", &result)?;
    for (name, body) in files {
        dir.csv(name, &body)?;
    }
    Ok(dir)
}

fn curve(c: f64, profile: &ErasureProfile, points: usize) -> Result<Vec<u8>, CliError> {
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let mut rows = Vec::with_capacity(points);
    for k in 0..points {
        let x = k as f64 / (points - 1) as f64;
        rows.push((x, potential_vs(x, c, profile)?, potential_us(x, c, profile)?));
    }
    csv_bytes(|w| {
        use std::io::Write;
        writeln!(w, "x,V_s,U_s")?;
        for (x, v, u) in rows {
            writeln!(w, "{},{},{}", fmt_f64(x), fmt_f64(v), fmt_f64(u))?;
        }
        Ok(())
    })
}

pub fn optimize_tau(cfg: &OptimizeTauCfg, out: Option<&Path>) -> Result<OutDir, CliError> {
    let t_bar = required(cfg.t_bar, "t-bar")?;
    let opts = OptimalityOptions { t_max: cfg.t_max, tol: cfg.tol, ..OptimalityOptions::default() };
    let r = verify_regular_optimal(t_bar, cfg.samples, cfg.seed, &opts)?;
    let dir = OutDir::create("optimize-tau", out, cfg)?;
    dir.json("optimality.json", &r)?;
    let samples = csv_bytes(|w| {
        use std::io::Write;
        writeln!(w, "index,profile,t_bar,c_p,excess,min_loss_gap")?;
        for (i, s) in r.samples.iter().enumerate() {
            writeln!(
                w,
                "{i},\"{}\",{},{},{},{}",
                s.profile,
                fmt_f64(s.t_bar),
                fmt_f64(s.c_p),
                fmt_f64(s.excess),
                fmt_f64(s.min_loss_gap)
            )?;
        }
        Ok(())
    })?;
    dir.csv("samples.csv", &samples)?;
    println!("semi-regular c_p = {:.8}", r.reference_c_p);
    if let Some(best) = r.best() {
        println!("best sampled c_p = {:.8} ({})", best.c_p, best.profile);
    }
    println!(
        "{} samples exceed the semi-regular threshold by more than {:e}",
        r.threshold_violations, cfg.tol
    );
    Ok(dir)
}

pub fn simulate(cfg: &SimulateCfg, out: Option<&Path>) -> Result<OutDir, CliError> {
    let spec = cfg.family.build()?.spec("simulate")?;
    let profile = cfg.profile.build()?;
    let n = required(cfg.n, "n")?;
    let c = required(cfg.c, "c")?;
    if cfg.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be positive".into()));
    }
    let opts = SimOptions { capability_mode: cfg.capability, schedule: cfg.schedule, jobs: cfg.jobs };
    let r = monte_carlo_with(&spec, n, &profile, c, cfg.trials, cfg.seed, cfg.max_iters, &opts)?;
    let dir = OutDir::create("simulate", out, cfg)?;
    dir.csv("sim.csv", &csv_bytes(|w| r.write_csv(w))?)?;
    let mut meta = r.metadata_json();
    if let Some(m) = meta.as_object_mut() {
        // keep the run config under its own key next to the echoed flags
        let sim = m.remove("config").expect("metadata has config");
        m.insert("simulation".into(), sim);
    }
    dir.json("sim.json", &meta)?;
    if cfg.export_graph {
        let graph = build_graph(&spec, n)?;
        dir.raw("graph.txt", std::str::from_utf8(&csv_bytes(|w| graph.write_edge_list(w))?).expect("ascii"))?;
    }
    let band = r.outside_band(cfg.max_iters.min(10), 3.0);
    println!(
        "{} trials, success rate {:.4}; iterations outside 3 stderr of DE among the first 10: {:?}",
        r.trials, r.success_rate, band
    );
    Ok(dir)
}

pub fn verify(cfg: &VerifyCfg, out: Option<&Path>) -> Result<OutDir, CliError> {
    let mut suites = Vec::new();
    for name in &cfg.suite {
        if name == "all" {
            suites.extend(Suite::ALL);
        } else {
            suites.push(name.parse::<Suite>()?);
        }
    }
    suites.dedup();
    let opts = VerifyOptions { seed: cfg.seed, trials: cfg.trials, samples: cfg.samples, jobs: None };
    let mut reports = Vec::new();
    for suite in suites {
        let r = run_suite(suite, &opts)?;
        for check in &r.checks {
            println!(
                "{} {suite} {}: value {:.3e}, tolerance {:.3e}; {}",
                if check.passed { "PASS" } else { "FAIL" },
                check.name,
                check.value,
                check.tolerance,
                check.detail
            );
        }
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed());
    let dir = OutDir::create("verify", out, cfg)?;
    dir.json("verify.json", &json!({ "passed": passed, "suites": reports }))?;
    if passed {
        Ok(dir)
    } else {
        let failed: Vec<_> = reports.iter().filter(|r| !r.passed()).map(|r| r.suite.as_str()).collect();
        println!("results in {}", dir.path().display());
        Err(CliError::Failed(format!("suites failed: {}", failed.join(", "))))
    }
}
