//! `handsim`: drives the tendon-hand toolkit from configuration files.
//!
//! Exit status is 0 on success, 1 on bad input (the message names the file
//! and field) and 2 when a solve fails or a command cannot be met.

mod records;

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;

use tendon_hand::calibration::{
    calibrate_damping, calibrate_stiffness, calibrated_default_hand, fit_variant_factors, CalibrationDataset,
    ModelKind, VariantTension,
};
use tendon_hand::config::{load_hand, load_scenario, save_hand, Scenario};
use tendon_hand::dynamics::{impulse_response_loaded, standard_impulse, ImpactDirection, ImpulseOptions};
use tendon_hand::error::HandError;
use tendon_hand::grasp_taxonomy::{run_scenario, taxonomy_catalog, GraspClass, GraspResult, GraspScenario};
use tendon_hand::hand_model::{build_default_hand, HandModel};
use tendon_hand::statics::{
    equilibrium_excursion_with, equilibrium_tension_with, CommandMode, EquilibriumResult, SolverOptions,
};

use records::{
    AxisAngle, AxisDynamics, CalibrationRecord, EquilibriumRecord, GraspRecord, ImpactRecord, Record, ReportRow,
    ResultFile, TaxonomyRecord, VariantPrediction,
};

#[derive(Parser)]
#[command(name = "handsim", version, about = "Quasi-static and impact simulation of a tendon-driven hand")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario file: graded grasp if it names a class, plain equilibrium otherwise.
    Simulate(SimulateArgs),
    /// Fit skin-variant factors, stiffness and damping to measured tensions.
    Calibrate(CalibrateArgs),
    /// Run the shipped grasp catalog.
    Taxonomy(TaxonomyArgs),
    /// Impulse response time series.
    Impact(ImpactArgs),
    /// Summarize result files into one CSV.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Hand configuration; the calibrated default hand when omitted.
    #[arg(long)]
    hand: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Recorded in result files.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    common: Common,
    /// CSV with columns hole,wrinkle,tension_N.
    #[arg(long)]
    table: PathBuf,
    /// Where to write the calibrated hand; next to `--out` by default.
    #[arg(long)]
    hand_out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("which").required(true).args(["all", "class"])))]
struct TaxonomyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    all: bool,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=16))]
    class: Option<u8>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Blow {
    Standard,
    Palmar,
    Dorsal,
    Lateral,
}

#[derive(Args)]
struct ImpactArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "standard")]
    direction: Blow,
    /// Initial speed of the struck axes (rad/s).
    #[arg(long, default_value_t = 1.0)]
    magnitude: f64,
    /// Tension held on every tendon during the blow (N).
    #[arg(long)]
    hold: Option<f64>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    out: PathBuf,
    /// Result files written by the other subcommands.
    inputs: Vec<PathBuf>,
}

enum Failure {
    Input(String),
    Solver(String),
}

impl Failure {
    fn input(path: &Path, what: impl Display) -> Self {
        Failure::Input(format!("{}: {what}", path.display()))
    }

    /// Sorts a toolkit error raised while running `path`.
    fn from_run(path: &Path, field: &str, e: HandError) -> Self {
        let msg = format!("{}: field `{field}`: {e}", path.display());
        match e {
            HandError::InfeasibleExcursion { .. }
            | HandError::NoSettle(_)
            | HandError::DampingCalibration(_)
            | HandError::NonFiniteState
            | HandError::Dial(_) => Failure::Solver(msg),
            _ => Failure::Input(msg),
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Solver(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Solver(m) => m,
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Calibrate(a) => calibrate(&a),
        Command::Taxonomy(a) => taxonomy(&a),
        Command::Impact(a) => impact(&a),
        Command::Report(a) => report(&a),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("handsim: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn read_hand(path: Option<&Path>) -> Outcome<HandModel> {
    match path {
        Some(p) => load_hand(p).map_err(|e| Failure::input(p, e)),
        None => calibrated_default_hand().map_err(|e| Failure::Solver(format!("default hand: {e}"))),
    }
}

fn write(path: &Path, text: &str) -> Outcome<()> {
    fs::write(path, text).map_err(|e| Failure::input(path, e))
}

fn write_result(path: &Path, file: &ResultFile) -> Outcome<()> {
    let text = file.to_json().map_err(|e| Failure::input(path, e))?;
    write(path, &text)
}

fn csv_text<F>(path: &Path, fill: F) -> Outcome<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    fill(&mut w).map_err(|e| Failure::input(path, e))?;
    let bytes = w.into_inner().map_err(|e| Failure::input(path, e))?;
    String::from_utf8(bytes).map_err(|e| Failure::input(path, e))
}

fn simulate(a: &SimulateArgs) -> Outcome<()> {
    let scenario = load_scenario(&a.scenario).map_err(|e| Failure::input(&a.scenario, e))?;
    let hand = read_hand(a.common.hand.as_deref())?;
    let (record, converged) = match scenario.grasp() {
        Some(g) => {
            let r = run_scenario(&hand, &g).map_err(|e| Failure::from_run(&a.scenario, "script", e))?;
            let converged = r.final_state.converged;
            (Record::Grasp(GraspRecord::new(&hand, &g.world, &r)), converged)
        }
        None => {
            let r = run_script(&hand, &scenario, &a.scenario)?;
            let converged = r.converged;
            (Record::Equilibrium(EquilibriumRecord::new(&hand, &scenario.world, &r)), converged)
        }
    };
    let out = &a.common.out;
    match a.common.format.unwrap_or(Format::Json) {
        Format::Json => write_result(out, &ResultFile::new(a.common.seed, record))?,
        Format::Csv => write(out, &simulate_csv(out, &record)?)?,
    }
    if converged {
        Ok(())
    } else {
        Err(Failure::Solver(format!(
            "{}: equilibrium did not converge",
            a.scenario.display()
        )))
    }
}

/// Runs an ungraded script step by step, each solve warm-started from the last.
fn run_script(hand: &HandModel, scenario: &Scenario, path: &Path) -> Outcome<EquilibriumResult> {
    let mut opts = SolverOptions::default();
    for (i, o) in scenario.overrides.iter().enumerate() {
        let fixed = o
            .resolve(hand)
            .map_err(|e| Failure::from_run(path, &format!("overrides[{i}]"), e))?;
        opts.fixed.push(fixed);
    }
    let world = Some(&scenario.world);
    let mut last = None;
    for (i, cmd) in scenario.script.iter().enumerate() {
        let r = match cmd.mode {
            CommandMode::Tension => equilibrium_tension_with(hand, cmd, world, &opts),
            CommandMode::Excursion => equilibrium_excursion_with(hand, cmd, world, &opts),
        }
        .map_err(|e| Failure::from_run(path, &format!("script[{i}]"), e))?;
        opts.start = Some(r.posture.clone());
        last = Some(r);
    }
    last.ok_or_else(|| Failure::input(path, "field `script`: at least one command is required"))
}

fn simulate_csv(path: &Path, record: &Record) -> Outcome<String> {
    let (eq, verdict) = match record {
        Record::Grasp(g) => (&g.final_state, Some(g.verdict.as_str())),
        Record::Equilibrium(e) => (e, None),
        _ => unreachable!("simulate writes equilibrium or grasp records"),
    };
    csv_text(path, |w| {
        w.write_record(["quantity", "name", "value"])?;
        if let Some(v) = verdict {
            w.write_record(["verdict", "", v])?;
        }
        w.write_record(["converged", "", &eq.converged.to_string()])?;
        w.write_record(["residual", "", &eq.residual.to_string()])?;
        for p in &eq.posture {
            w.write_record(["angle_deg", &p.axis, &p.angle_deg.to_string()])?;
        }
        for t in &eq.tendons {
            w.write_record(["tension_n", &t.tendon, &t.tension_n.to_string()])?;
        }
        for c in &eq.contacts {
            w.write_record(["contact_force_n", &c.link, &c.force_n.to_string()])?;
        }
        Ok(())
    })
}

#[derive(Deserialize)]
struct TableRow {
    hole: String,
    wrinkle: String,
    #[serde(rename = "tension_N")]
    tension_n: f64,
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn read_table(path: &Path) -> Outcome<Vec<VariantTension>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Failure::input(path, e))?;
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<TableRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Failure::input(path, format!("line {line}: {e}")))?;
        let flag = |name: &str, v: &str| {
            parse_flag(v).ok_or_else(|| {
                Failure::input(path, format!("line {line}, field `{name}`: expected true or false, got `{v}`"))
            })
        };
        out.push(VariantTension {
            hole: flag("hole", &row.hole)?,
            wrinkle: flag("wrinkle", &row.wrinkle)?,
            tension: row.tension_n,
        });
    }
    Ok(out)
}

fn calibrate(a: &CalibrateArgs) -> Outcome<()> {
    let data = CalibrationDataset::from_variants(read_table(&a.table)?);
    let base = match a.common.hand.as_deref() {
        Some(p) => load_hand(p).map_err(|e| Failure::input(p, e))?,
        None => build_default_hand(),
    };
    let table_err = |e: HandError| Failure::input(&a.table, format!("field `tension_N`: {e}"));
    let exact4 = fit_variant_factors(&data, ModelKind::Exact4).map_err(table_err)?;
    let multiplicative3 = fit_variant_factors(&data, ModelKind::Multiplicative3).map_err(table_err)?;
    let stiff = calibrate_stiffness(&base, &data).map_err(|e| Failure::from_run(&a.table, "tension_N", e))?;
    let (hand, worst) = calibrate_damping(&stiff, &data).map_err(|e| Failure::from_run(&a.table, "tension_N", e))?;

    let predictions = data
        .variant_tensions
        .iter()
        .map(|v| VariantPrediction {
            hole: v.hole,
            wrinkle: v.wrinkle,
            measured_n: v.tension,
            exact4_n: exact4.predict(v.hole, v.wrinkle),
            multiplicative3_n: multiplicative3.predict(v.hole, v.wrinkle),
        })
        .collect();
    let axes = hand
        .axis_ids()
        .into_iter()
        .map(|id| {
            let ax = hand.axis(id);
            AxisDynamics {
                axis: hand.axis_label(id),
                stiffness_nmm_per_rad: ax.stiffness,
                damping: ax.damping,
                inertia_kg_mm2: ax.inertia,
            }
        })
        .collect();
    let record = CalibrationRecord {
        exact4,
        multiplicative3,
        predictions,
        axes,
        worst_settle_time_s: worst,
    };

    let out = &a.common.out;
    match a.common.format.unwrap_or(Format::Json) {
        Format::Json => write_result(out, &ResultFile::new(a.common.seed, Record::Calibration(record)))?,
        Format::Csv => {
            let text = csv_text(out, |w| {
                w.write_record([
                    "model",
                    "base_tension_n",
                    "hole_absent_factor",
                    "wrinkle_absent_factor",
                    "interaction_factor",
                    "residual",
                ])?;
                for f in [&record.exact4, &record.multiplicative3] {
                    w.write_record([
                        f.model_kind.as_str().to_string(),
                        f.base_tension.to_string(),
                        f.hole_absent_factor.to_string(),
                        f.wrinkle_absent_factor.to_string(),
                        f.interaction_factor.to_string(),
                        f.residual.to_string(),
                    ])?;
                }
                Ok(())
            })?;
            write(out, &text)?;
        }
    }
    let hand_out = a.hand_out.clone().unwrap_or_else(|| out.with_extension("hand.json"));
    save_hand(&hand, &hand_out).map_err(|e| Failure::input(&hand_out, e))
}

fn taxonomy(a: &TaxonomyArgs) -> Outcome<()> {
    let hand = read_hand(a.common.hand.as_deref())?;
    let catalog: Vec<GraspScenario> = taxonomy_catalog()
        .into_iter()
        .filter(|s| a.all || a.class == Some(s.grasp_class.id))
        .collect();
    let results: Vec<(GraspClass, Result<GraspResult, HandError>)> = catalog
        .par_iter()
        .map(|s| (s.grasp_class, run_scenario(&hand, s)))
        .collect();

    let mut records = Vec::with_capacity(results.len());
    let mut traces = String::new();
    let mut failures = Vec::new();
    for ((class, r), s) in results.into_iter().zip(&catalog) {
        let r = match r {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("class {class}: {e}"));
                continue;
            }
        };
        if !r.final_state.converged {
            failures.push(format!("class {class}: equilibrium did not converge"));
        }
        for (step, p) in r.trace.iter().enumerate() {
            let line = serde_json::json!({
                "class_id": class.id,
                "class_name": class.name,
                "step": step,
                "posture_deg": p.degrees(),
            });
            traces.push_str(&line.to_string());
            traces.push('\n');
        }
        records.push(GraspRecord::new(&hand, &s.world, &r));
    }

    let out = &a.common.out;
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => write(out, &taxonomy_csv(out, &records)?)?,
        Format::Json => write_result(
            out,
            &ResultFile::new(a.common.seed, Record::Taxonomy(TaxonomyRecord { results: records })),
        )?,
    }
    write(&out.with_extension("traces.jsonl"), &traces)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Solver(failures.join("; ")))
    }
}

fn taxonomy_csv(path: &Path, records: &[GraspRecord]) -> Outcome<String> {
    csv_text(path, |w| {
        w.write_record([
            "class_id",
            "class_name",
            "family",
            "verdict",
            "converged",
            "max_tension_n",
            "contact_links",
            "failed_rules",
        ])?;
        for g in records {
            let failed: Vec<&str> = g.criteria.iter().filter(|c| !c.passed).map(|c| c.rule.as_str()).collect();
            w.write_record([
                g.class_id.to_string(),
                g.class_name.clone(),
                g.family.clone(),
                g.verdict.as_str().to_string(),
                g.final_state.converged.to_string(),
                g.max_tension_n.to_string(),
                g.contact_links.join(" "),
                failed.join("; "),
            ])?;
        }
        Ok(())
    })
}

fn impact(a: &ImpactArgs) -> Outcome<()> {
    let hand = read_hand(a.common.hand.as_deref())?;
    if !(a.magnitude.is_finite()) {
        return Err(Failure::Input(format!("--magnitude: {} is not finite", a.magnitude)));
    }
    let (label, impulse) = match a.direction {
        Blow::Standard => (
            "standard",
            standard_impulse(&hand).into_iter().map(|v| v * a.magnitude).collect(),
        ),
        Blow::Palmar => ("palmar", ImpactDirection::Palmar.impulse(&hand, a.magnitude)),
        Blow::Dorsal => ("dorsal", ImpactDirection::Dorsal.impulse(&hand, a.magnitude)),
        Blow::Lateral => ("lateral", ImpactDirection::Lateral.impulse(&hand, a.magnitude)),
    };
    let tensions = match a.hold {
        Some(t) if !(t >= 0.0) => return Err(Failure::Input(format!("--hold: tension {t} N is negative"))),
        Some(t) => Some(vec![t; hand.tendons.len()]),
        None => None,
    };
    let hand_path = a.common.hand.clone().unwrap_or_else(|| PathBuf::from("<default hand>"));
    let r = impulse_response_loaded(&hand, &impulse, tensions.as_deref(), &ImpulseOptions::default())
        .map_err(|e| Failure::from_run(&hand_path, "damping", e))?;

    let labels: Vec<String> = hand.axis_ids().into_iter().map(|id| hand.axis_label(id)).collect();
    let out = &a.common.out;
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let text = csv_text(out, |w| {
                let mut header = vec!["time_s".to_string()];
                header.extend(labels.iter().cloned());
                w.write_record(&header)?;
                for (t, p) in r.trajectory.times.iter().zip(&r.trajectory.postures) {
                    let mut row = vec![t.to_string()];
                    row.extend(p.degrees().iter().map(f64::to_string));
                    w.write_record(&row)?;
                }
                Ok(())
            })?;
            write(out, &text)
        }
        Format::Json => {
            let load = if a.hold.is_some() { "tension" } else { "relaxed" };
            let record = ImpactRecord {
                case: format!("{label}/{load}"),
                magnitude_rad_s: a.magnitude,
                settle_time_s: r.settle_time,
                target: labels
                    .iter()
                    .zip(r.target.degrees())
                    .map(|(axis, angle_deg)| AxisAngle {
                        axis: axis.clone(),
                        angle_deg,
                    })
                    .collect(),
                times_s: r.trajectory.times.clone(),
                angles_deg: r.trajectory.postures.iter().map(|p| p.degrees()).collect(),
            };
            write_result(out, &ResultFile::new(a.common.seed, Record::Impact(record)))
        }
    }
}

fn report(a: &ReportArgs) -> Outcome<()> {
    let mut rows = Vec::new();
    for path in &a.inputs {
        let text = fs::read_to_string(path).map_err(|e| Failure::input(path, e))?;
        let file = ResultFile::from_json(&text).map_err(|e| Failure::input(path, format!("{e:#}")))?;
        rows.extend(ReportRow::from_file(&path.display().to_string(), &file));
    }
    let text = csv_text(&a.out, |w| {
        w.write_record(["source", "class", "verdict", "max_tension_n", "settle_time_s"])?;
        let num = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        for r in &rows {
            w.write_record([
                r.source.clone(),
                r.class.clone(),
                r.verdict.clone(),
                num(r.max_tension_n),
                num(r.settle_time_s),
            ])?;
        }
        Ok(())
    })?;
    write(&a.out, &text)
}
