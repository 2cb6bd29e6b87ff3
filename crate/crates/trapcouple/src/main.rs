use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use trapcouple::acceptance::evaluate;
use trapcouple::db::{Database, DesignEntry};
use trapcouple::error::{AppError, AppResult};
use trapcouple::report::{write_artifact, Artifact, Profile};
use trapcouple::scenarios::{run, HeatingQuery, Panel, RunOptions, Scenario};
use trapcouple_core::etrap::check_design;
use trapcouple_core::physcore::hertz;

#[derive(Parser)]
#[command(name = "trapcouple", version, about = "Couplings, traps and loading for trapped charges coupled to electrical and mechanical resonators")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for the Monte Carlo scenarios.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Exit with status 2 if any reproduction check misses.
    #[arg(long, global = true)]
    check: bool,
    #[arg(long, global = true, value_enum, default_value_t = Profile::Paper)]
    tolerance_profile: Profile,
    /// Database file; defaults to $TRAPCOUPLE_DATABASE, then the bundled copy.
    #[arg(long, global = true)]
    database: Option<PathBuf>,
    /// CSV output path; a JSON sidecar is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo samples.
    #[arg(long, global = true, default_value_t = 10_000)]
    samples: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Coupling rates and minimum resonator Q for electron and ions.
    Table1,
    /// Lumped equivalent of a quarter-wave line.
    QuarterWave,
    /// Charged-membrane couplings.
    Membranes,
    /// GaN cantilever coupling against ion height.
    Fig7,
    /// Quartz bulk-acoustic couplings per overtone.
    Table5,
    /// Shunt-electrode coupling and overtone scaling on quartz.
    QuartzShunt,
    /// Cooling limit of a coupled resonator.
    Cooling,
    /// Electron trap designs.
    Table2,
    /// Steady-state loading maps.
    Fig9,
    /// Time-to-trap maps.
    Fig10,
    /// Static-trap collision kick histogram.
    Fig14,
    /// rf-trap collision dynamics.
    Fig15 {
        #[arg(long, value_enum, default_value_t = Panel::C)]
        panel: Panel,
    },
    /// Anomalous heating rates scaled to a new particle, distance and frequency.
    Heating {
        /// Reference row index or material name; all rows when omitted.
        #[arg(long)]
        from: Option<String>,
        /// Target as species,distance_m,frequency_hz,alpha.
        #[arg(long)]
        to: Option<String>,
    },
    /// Mechanical mode catalog.
    Modes {
        #[command(subcommand)]
        action: ModesAction,
    },
    /// Trap design validation.
    Trap {
        #[command(subcommand)]
        action: TrapAction,
    },
    /// Run a named scenario or a scenario file.
    Run { scenario: String },
    /// Every scenario, one verdict per acceptance criterion.
    Acceptance,
}

#[derive(Subcommand)]
enum ModesAction {
    List,
    Describe { name: String },
}

#[derive(Subcommand)]
enum TrapAction {
    /// Stability, rf load, lead margin and cooling budget of a design file.
    Check { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> AppResult<()> {
    let g = cli.global;
    let (db, label) = Database::resolve(g.database.as_deref())?;
    let opts = RunOptions {
        profile: g.tolerance_profile,
        seed: g.seed,
        samples: g.samples,
    };
    let scenario = match cli.command {
        Command::Table1 => Scenario::Table1,
        Command::QuarterWave => Scenario::QuarterWave,
        Command::Membranes => Scenario::Membranes,
        Command::Fig7 => Scenario::Fig7,
        Command::Table5 => Scenario::Table5,
        Command::QuartzShunt => Scenario::QuartzShunt,
        Command::Cooling => Scenario::Cooling,
        Command::Table2 => Scenario::Table2,
        Command::Fig9 => Scenario::Fig9,
        Command::Fig10 => Scenario::Fig10,
        Command::Fig14 => Scenario::Fig14,
        Command::Fig15 { panel } => Scenario::Fig15(panel),
        Command::Heating { from, to } => match to {
            Some(to) => Scenario::Heating(Some(HeatingQuery::parse_target(from, &to)?)),
            None if from.is_some() => {
                return Err(AppError::Config("--from needs --to species,distance_m,frequency_hz,alpha".into()))
            }
            None => Scenario::Heating(None),
        },
        Command::Modes { action } => return modes(&db, action),
        Command::Trap { action: TrapAction::Check { file } } => return trap_check(&db, &file),
        Command::Run { scenario } => return run_file(db, &label, &scenario, g.out, opts, g.check),
        Command::Acceptance => return acceptance(&db, &opts, g.check),
    };
    let a = run(&db, &scenario, &opts)?;
    emit(&a, g.out, &label, &opts, g.check)
}

fn emit(a: &Artifact, out: Option<PathBuf>, label: &str, opts: &RunOptions, check: bool) -> AppResult<()> {
    let csv = out.unwrap_or_else(|| PathBuf::from(format!("{}.csv", a.scenario)));
    let side = write_artifact(a, &csv, label, opts.profile)?;
    println!("{}: {} rows -> {}, {}", a.scenario, a.table.rows.len(), csv.display(), side.display());
    for c in &a.checks {
        println!("  {c}");
    }
    let failed = a.checks.iter().filter(|c| !c.pass).count();
    if check && failed > 0 {
        return Err(AppError::Check(format!("{failed} of {} checks missed in {}", a.checks.len(), a.scenario)));
    }
    Ok(())
}

fn acceptance(db: &Database, opts: &RunOptions, check: bool) -> AppResult<()> {
    let verdicts = evaluate(db, opts)?;
    for v in &verdicts {
        println!("{v}");
    }
    let missed = verdicts.iter().filter(|v| v.status() != "PASS").count();
    if check && missed > 0 {
        return Err(AppError::Check(format!("{missed} of {} criteria not met", verdicts.len())));
    }
    Ok(())
}

fn modes(db: &Database, action: ModesAction) -> AppResult<()> {
    match action {
        ModesAction::List => {
            println!("name,kind,frequency_hz,mode_mass_kg");
            for e in &db.modes {
                let m = e.build()?;
                println!("{},{},{:?},{:?}", e.name, e.kind, hertz(m.omega0), m.mode_mass);
            }
        }
        ModesAction::Describe { name } => {
            let e = db.mode_entry(&name)?;
            let m = e.build()?;
            let v = json!({
                "entry": e,
                "frequency_hz": hertz(m.omega0),
                "mode_mass_kg": m.mode_mass,
                "total_mass_kg": m.total_mass(),
                "wavenumber_per_m": m.wavenumber(),
                "spot_size_m": m.spot_size(),
            });
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
    }
    Ok(())
}

fn trap_check(db: &Database, file: &Path) -> AppResult<()> {
    let text = std::fs::read_to_string(file).map_err(|e| AppError::Config(format!("{}: {e}", file.display())))?;
    let d: DesignEntry = serde_json::from_str(&text).map_err(|e| AppError::Config(format!("{}: {e}", file.display())))?;
    let p = db.particle(&d.species)?;
    let wire = d.wire.as_ref().map(|w| db.film_wire(w)).transpose()?;
    let r = check_design(&d.trap(), &p, d.q_rf, wire.as_ref(), d.cooling_budget_w)?;
    let v = json!({
        "design": d.name,
        "passes": r.passes(),
        "q_mathieu": r.q_mathieu,
        "stable": r.stable,
        "depth_ev": r.depth_ev,
        "secular_hz": r.omega_secular.map(hertz),
        "rf_peak_current_a": r.rf.peak_current,
        "rf_dissipation_w": r.rf.dissipation,
        "current_margin": r.current_margin,
        "within_cooling_budget": r.within_cooling_budget,
    });
    println!("{}", serde_json::to_string_pretty(&v)?);
    if !r.passes() {
        return Err(AppError::Check(format!("design `{}` fails its checks", d.name)));
    }
    Ok(())
}

/// RFC 7386 merge patch.
fn merge(target: &mut Value, patch: &Value) {
    match (target, patch) {
        (Value::Object(t), Value::Object(p)) => {
            for (k, v) in p {
                if v.is_null() {
                    t.remove(k);
                } else {
                    merge(t.entry(k.clone()).or_insert(Value::Null), v);
                }
            }
        }
        (t, p) => *t = p.clone(),
    }
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    kind: String,
    #[serde(default)]
    parameters: Value,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output_path: Option<PathBuf>,
}

/// `run` takes a scenario name, or a JSON file whose `parameters` hold run
/// options (`samples`, `panel`, `from`, `to`) and database overrides keyed
/// by top-level database section.
fn run_file(db: Database, label: &str, arg: &str, out: Option<PathBuf>, mut opts: RunOptions, check: bool) -> AppResult<()> {
    let path = Path::new(arg);
    if !path.is_file() {
        let s = Scenario::from_name(arg)?;
        let a = run(&db, &s, &opts)?;
        return emit(&a, out, label, &opts, check);
    }
    let text = std::fs::read_to_string(path).map_err(|e| AppError::Config(format!("{arg}: {e}")))?;
    let f: ScenarioFile = serde_json::from_str(&text).map_err(|e| AppError::Config(format!("{arg}: {e}")))?;
    let mut params = match f.parameters {
        Value::Null => serde_json::Map::new(),
        Value::Object(m) => m,
        _ => return Err(AppError::Config(format!("{arg}: parameters must be an object"))),
    };
    let mut scenario = Scenario::from_name(&f.kind)?;
    if let Some(n) = params.remove("samples") {
        opts.samples = n.as_u64().ok_or_else(|| AppError::Config(format!("{arg}: parameters.samples must be a positive integer")))?;
    }
    if let Some(p) = params.remove("panel") {
        let p: Panel = clap::ValueEnum::from_str(p.as_str().unwrap_or(""), true)
            .map_err(|_| AppError::Config(format!("{arg}: parameters.panel must be a, b, c or d")))?;
        scenario = Scenario::Fig15(p);
    }
    let from = params.remove("from").and_then(|v| match v {
        Value::String(s) => Some(s),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    });
    if let Some(to) = params.remove("to") {
        let to = to.as_str().ok_or_else(|| AppError::Config(format!("{arg}: parameters.to must be a string")))?;
        scenario = Scenario::Heating(Some(HeatingQuery::parse_target(from, to)?));
    }
    if let Some(s) = f.seed {
        opts.seed = s;
    }
    let db = if params.is_empty() {
        db
    } else {
        let mut v = serde_json::to_value(&db)?;
        merge(&mut v, &Value::Object(params));
        Database::parse(&v.to_string(), &format!("{arg} (database overrides)"))?
    };
    let a = run(&db, &scenario, &opts)?;
    emit(&a, f.output_path.or(out), label, &opts, check)
}
