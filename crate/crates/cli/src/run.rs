//! Dispatch of a plan to its module and emission of artifacts.
//!
//! Artifacts are built in memory and written only after the computation
//! succeeds, so a failing plan leaves no partial output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use wavelab::auxfn::{b_bounds, solve_mode, solve_phi0, BFunction, ModeKind};
use wavelab::digest::{json_hash, sha256_hex};
use wavelab::exponents::{glassey_exponent, strauss_exponent, CouplingKind, Regime};
use wavelab::ode_lemma::{run_delta_ladder, write_delta_ladder_csv, y_cutoff_report};
use wavelab::solver::{evolve, write_snapshots_csv, RunManifest};
use wavelab::sweep::{
    damping_effect_report, run_sweep, upper_bound_check, write_aggregate_csv, write_svg_plot,
    FitMode, FitResult, SweepResult,
};

use crate::config::{AuxConfig, ExponentsConfig, LemmaConfig, ReportConfig, SolveConfig, SweepConfig};
use crate::error::{CliError, CliResult};
use crate::plan::{Emit, Payload, RunPlan};

/// Name of the run manifest in the output directory.
pub const MANIFEST_FILE: &str = "manifest.json";
/// Wall-clock metadata, excluded from the manifest hashes.
pub const META_FILE: &str = "meta.json";

#[derive(Debug, Clone, Copy, Default)]
pub struct ExecOptions {
    /// Worker threads for sweeps and δ ladders; `None` uses every core.
    pub threads: Option<usize>,
}

impl ExecOptions {
    fn width(&self) -> usize {
        self.threads.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Csv,
    Json,
    Svg,
}

struct Artifact {
    name: &'static str,
    kind: Kind,
    bytes: Vec<u8>,
}

#[derive(Default)]
struct Artifacts(Vec<Artifact>);

impl Artifacts {
    fn push(&mut self, name: &'static str, kind: Kind, bytes: Vec<u8>) {
        self.0.push(Artifact { name, kind, bytes });
    }

    fn json<T: Serialize>(&mut self, name: &'static str, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(wavelab::Error::from)?;
        bytes.push(b'\n');
        self.push(name, Kind::Json, bytes);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Human-readable summary for stdout.
    pub summary: String,
    pub out: PathBuf,
    /// Files written, manifest and metadata included.
    pub files: Vec<PathBuf>,
}

pub fn execute(plan: &RunPlan, opts: &ExecOptions) -> CliResult<Outcome> {
    let started = Instant::now();
    plan.payload.validate()?;
    let mut arts = Artifacts::default();
    let summary = match &plan.payload {
        Payload::Exponents(c) => exponents(c, &mut arts)?,
        Payload::Aux(c) => aux(c, &mut arts)?,
        Payload::Solve(c) => solve(c, &mut arts)?,
        Payload::Sweep(c) => sweep(c, opts, &mut arts)?,
        Payload::Lemma(c) => lemma(c, opts, &mut arts)?,
        Payload::Report(c) => report(c, &mut arts)?,
    };
    let files = write_all(plan, arts, started, opts)?;
    Ok(Outcome {
        summary,
        out: plan.out.clone(),
        files,
    })
}

fn selected(emit: &Emit, kind: Kind) -> bool {
    match kind {
        Kind::Csv => emit.csv,
        Kind::Json => emit.json,
        Kind::Svg => emit.svg,
    }
}

fn write_all(
    plan: &RunPlan,
    arts: Artifacts,
    started: Instant,
    opts: &ExecOptions,
) -> CliResult<Vec<PathBuf>> {
    let dir = &plan.out;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    let mut hashes = Vec::new();
    for a in arts.0.into_iter().filter(|a| selected(&plan.emit, a.kind)) {
        let path = dir.join(a.name);
        fs::write(&path, &a.bytes).map_err(|e| CliError::io(&path, e))?;
        hashes.push(json!({"file": a.name, "sha256": sha256_hex(&a.bytes)}));
        files.push(path);
    }
    let portable = plan.portable_value();
    let manifest = json!({
        "tool": "wavelab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": plan.command().name(),
        "plan": portable,
        "plan_hash": json_hash(&portable)?,
        "artifacts": hashes,
    });
    let path = dir.join(MANIFEST_FILE);
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(wavelab::Error::from)?;
    bytes.push(b'\n');
    fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    files.push(path);

    let unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = json!({
        "finished_unix": unix,
        "wall_seconds": started.elapsed().as_secs_f64(),
        "threads": opts.width(),
    });
    let path = dir.join(META_FILE);
    fs::write(&path, serde_json::to_vec_pretty(&meta).map_err(wavelab::Error::from)?)
        .map_err(|e| CliError::io(&path, e))?;
    files.push(path);
    Ok(files)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> wavelab::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn prediction_text(regime: &Regime) -> String {
    match regime {
        Regime::PowerLaw { exponent } => format!("T ~ eps^(-{})", fmt_num(*exponent)),
        Regime::Exponential { rate } => format!("T ~ exp(eps^(-{}))", fmt_num(*rate)),
        Regime::OutsideBlowupRegion => "no blow-up bound".into(),
    }
}

/// Shortest representation for values that are exact to 12 digits.
fn fmt_num(x: f64) -> String {
    let rounded = (x * 1e12).round() / 1e12;
    if (rounded - x).abs() <= 1e-12 * x.abs().max(1.0) {
        format!("{rounded}")
    } else {
        format!("{x:.6}")
    }
}

fn exponents(c: &ExponentsConfig, arts: &mut Artifacts) -> CliResult<String> {
    let (n, pq, pred) = c.resolve()?;
    let (ps, pg) = (strauss_exponent(n), glassey_exponent(n));
    let mut s = String::new();
    let rows = [
        ("kind", c.kind.to_string()),
        ("n", n.get().to_string()),
        ("p", fmt_num(pq.p())),
        ("q", fmt_num(pq.q())),
        ("p_S(n)", fmt_num(ps)),
        ("p_G(n)", fmt_num(pg)),
        ("F1", fmt_num(pred.gap.f1)),
        ("F2", fmt_num(pred.gap.f2)),
        ("gap", fmt_num(pred.gap.value)),
        ("branch", format!("{:?}", pred.gap.branch)),
        ("prediction", prediction_text(&pred.regime)),
        ("case", pred.case_label.clone()),
    ];
    for (k, v) in &rows {
        let _ = writeln!(s, "{k:<12}{v}");
    }
    arts.json(
        "exponents.json",
        &json!({"strauss": ps, "glassey": pg, "prediction": pred}),
    )?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = rows.iter().map(|r| r.0).collect();
    let values: Vec<&str> = rows.iter().map(|r| r.1.as_str()).collect();
    w.write_record(&header).map_err(wavelab::Error::from)?;
    w.write_record(&values).map_err(wavelab::Error::from)?;
    let bytes = w
        .into_inner()
        .map_err(|e| wavelab::Error::Io(e.to_string()))?;
    arts.push("exponents.csv", Kind::Csv, bytes);
    Ok(s)
}

fn aux(c: &AuxConfig, arts: &mut Artifacts) -> CliResult<String> {
    let n = c.dimension()?;
    let d = c.damping()?;
    let v = c.potential()?;
    let phi0 = solve_phi0(&v, n, c.r_max, c.dr)?;
    let phil = solve_mode(ModeKind::PhiLambda, &d, None, c.lambda, n, c.r_max, c.dr)?;
    let bound = phil.two_sided_bound();
    let t_grid = c.t_grid();
    let reach = c.t_max + c.data_radius;
    let b = BFunction::new(d.clone(), n, reach, c.b_dr)?;
    let b_report = b_bounds(&b, c.a, c.data_radius, &t_grid, c.radial_samples, c.quad_nodes)?;

    let radii: Vec<f64> = (0..c.radial_samples.max(2))
        .map(|k| reach * k as f64 / (c.radial_samples.max(2) - 1) as f64)
        .collect();
    let samples = b.sample(c.a, &t_grid, &radii, c.quad_nodes)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "r", "b", "b_r"]).map_err(wavelab::Error::from)?;
    for (i, t) in t_grid.iter().enumerate() {
        for (j, r) in radii.iter().enumerate() {
            if *r > t + c.data_radius {
                continue;
            }
            w.serialize((t, r, samples.value[i][j], samples.deriv[i][j]))
                .map_err(wavelab::Error::from)?;
        }
    }
    let b_csv = w
        .into_inner()
        .map_err(|e| wavelab::Error::Io(e.to_string()))?;

    arts.push("phi0.csv", Kind::Csv, csv_bytes(|b| phi0.write_csv(b))?);
    arts.push("phi_lambda.csv", Kind::Csv, csv_bytes(|b| phil.write_csv(b))?);
    arts.push("b.csv", Kind::Csv, b_csv);
    arts.json(
        "aux.json",
        &json!({
            "phi0": {"positive": phi0.all_positive(), "non_decreasing": phi0.is_non_decreasing()},
            "phi_lambda": {"lambda": c.lambda, "two_sided": bound},
            "b": b_report,
        }),
    )?;
    Ok(format!(
        "phi0 positive: {}\nphi_lambda two-sided bound holds: {} (c1 = {:.4})\nb_{} bounds hold: {} (lower {:.4}, upper {:.4})\n",
        phi0.all_positive(),
        bound.holds,
        bound.c1,
        fmt_num(c.a),
        b_report.holds,
        b_report.lower_constant,
        b_report.upper_constant
    ))
}

fn solve(c: &SolveConfig, arts: &mut Artifacts) -> CliResult<String> {
    let (spec, data, grid, options) = c.resolve()?;
    let run = evolve(&spec, &data, &grid, &options)?;
    let manifest = RunManifest::new(&spec, &data, &options, &run)?;
    arts.push(
        "snapshots.csv",
        Kind::Csv,
        csv_bytes(|b| write_snapshots_csv(&run, b))?,
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "energy_u", "energy_v"])
        .map_err(wavelab::Error::from)?;
    for e in &run.diagnostics.energy {
        w.serialize((e.t, e.u, e.v)).map_err(wavelab::Error::from)?;
    }
    arts.push(
        "energy.csv",
        Kind::Csv,
        w.into_inner()
            .map_err(|e| wavelab::Error::Io(e.to_string()))?,
    );
    arts.json("run.json", &manifest)?;
    Ok(match run.blowup.t_blow {
        Some(t) => format!("blow-up at t = {t:.6} (steps {})\n", run.diagnostics.steps),
        None => format!(
            "no blow-up up to t = {} (steps {})\n",
            fmt_num(run.final_time()),
            run.diagnostics.steps
        ),
    })
}

/// Slope tolerance of the fit verdict: 20%, or 25% for derivative sources of mixed type.
fn with_prediction(fit: FitResult, sweep: &SweepResult) -> FitResult {
    let tol = match sweep.spec.base.kind {
        CouplingKind::SG => 0.25,
        _ => 0.2,
    };
    match sweep.prediction.power_exponent() {
        Some(k) => fit.with_prediction(k, tol),
        None => fit,
    }
}

fn sweep_artifacts(result: &SweepResult, mode_fit: Value, arts: &mut Artifacts) -> CliResult<()> {
    arts.push(
        "aggregate.csv",
        Kind::Csv,
        csv_bytes(|b| write_aggregate_csv(result, b))?,
    );
    arts.push("plot.svg", Kind::Svg, csv_bytes(|b| write_svg_plot(result, b))?);
    arts.json("fit.json", &mode_fit)?;
    Ok(())
}

fn sweep(c: &SweepConfig, opts: &ExecOptions, arts: &mut Artifacts) -> CliResult<String> {
    let spec = c.resolve(opts.width())?;
    let result = run_sweep(&spec)?;
    let fit = with_prediction(result.fit(c.fit_mode)?, &result);
    let verdict = upper_bound_check(&result, &result.prediction).ok();
    arts.json("sweep.json", &result)?;
    sweep_artifacts(
        &result,
        json!({"fit": fit, "upper_bound": verdict, "refinement": result.refinement}),
        arts,
    )?;
    let mut s = String::new();
    let _ = writeln!(s, "{:>10} {:>14} {:>9}", "epsilon", "t_blow", "censored");
    for r in &result.records {
        let t = r.t_blow.map_or("-".to_string(), |t| format!("{t:.4}"));
        let _ = writeln!(s, "{:>10.5} {:>14} {:>9}", r.epsilon, t, r.censored);
    }
    let _ = writeln!(
        s,
        "slope {:.4} (predicted {}), r^2 {:.5}",
        fit.slope,
        result
            .prediction
            .power_exponent()
            .map_or("-".into(), fmt_num),
        fit.r_squared
    );
    Ok(s)
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| wavelab::Error::Configuration(e.to_string()))?;
    Ok(pool.install(f))
}

fn lemma(c: &LemmaConfig, opts: &ExecOptions, arts: &mut Artifacts) -> CliResult<String> {
    let params = c.params()?;
    let deltas = c.deltas();
    let (ladder, fit) = in_pool(opts.width(), || run_delta_ladder(&deltas, &params, c.t_cap))??;
    let end = c.y_box_end;
    let w = move |t: f64| if t <= end { 1.0 } else { 0.0 };
    let y = y_cutoff_report(&w, end, &c.m_grid(), c.y_power, c.y_tolerance)?;

    arts.push(
        "lemma_ladder.csv",
        Kind::Csv,
        csv_bytes(|b| write_delta_ladder_csv(&ladder, b))?,
    );
    let mut wy = csv::Writer::from_writer(Vec::new());
    wy.write_record(["m", "y", "bound_ratio"])
        .map_err(wavelab::Error::from)?;
    for ((m, yv), r) in y.table.m.iter().zip(&y.table.y).zip(&y.bound_ratio) {
        wy.serialize((m, yv, r)).map_err(wavelab::Error::from)?;
    }
    arts.push(
        "y.csv",
        Kind::Csv,
        wy.into_inner()
            .map_err(|e| wavelab::Error::Io(e.to_string()))?,
    );
    arts.json(
        "lemma.json",
        &json!({
            "params": params,
            "fit": fit,
            "y": {
                "identity_error": y.identity_error,
                "max_bound_ratio": y.max_bound_ratio,
                "bound_holds": y.bound_holds,
            },
        }),
    )?;
    Ok(format!(
        "exponent {} K3 {:.5} r^2 {:.6}\nY identity error {:.2e}, Y / eta-integral max {:.5} (ln 2 = {:.5})\n",
        fmt_num(fit.exponent),
        fit.k3,
        fit.r_squared,
        y.identity_error,
        y.max_bound_ratio,
        std::f64::consts::LN_2
    ))
}

fn read_sweep(path: &Path) -> CliResult<SweepResult> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
}

fn report(c: &ReportConfig, arts: &mut Artifacts) -> CliResult<String> {
    let a = read_sweep(&c.sweep)?;
    let fit = with_prediction(a.fit(FitMode::PowerLaw)?, &a);
    let verdict = upper_bound_check(&a, &a.prediction)?;
    let effect = match &c.compare {
        Some(p) => Some(damping_effect_report(&a, &read_sweep(p)?)?),
        None => None,
    };
    sweep_artifacts(
        &a,
        json!({"fit": fit, "upper_bound": verdict, "comparison": effect}),
        arts,
    )?;
    let mut s = format!(
        "slope {:.4}, compensated ratio {:.3}, upper-bound check passes: {}\n",
        fit.slope, verdict.ratio, verdict.passes
    );
    if let Some(e) = effect {
        let _ = writeln!(
            s,
            "slope difference {:.4} ({}: {})",
            e.slope_difference, e.verdict_kind, e.consistent
        );
    }
    Ok(s)
}
