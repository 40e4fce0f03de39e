use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lagerberg::scene::{parse_json, read_file, Object, ObjectSpec, Scene, SceneError, Settings, Task, TaskKind, DEFAULT_TOL};
use serde_json::Value;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "lagerberg", version, about = "Positivity, closedness and trop correspondence checks for Lagerberg currents")]
struct Cli {
    /// Quadrature and closedness tolerance [default: 1e-8].
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for sampled tests [default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Samples per sampled test.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Record wall-clock time per task (reports are then no longer reproducible byte for byte).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Positivity of a fiber form (at a tier), a Lagerberg current or a shadow current.
    CheckPositivity {
        file: PathBuf,
        #[arg(long, default_value = "positive")]
        tier: String,
        #[arg(long)]
        expect: Option<String>,
    },
    /// Split a current into its stratum parts.
    Decompose { file: PathBuf },
    /// Push a shadow current forward or lift a Lagerberg current.
    Tropicalize {
        #[arg(value_enum)]
        direction: Direction,
        file: PathBuf,
        #[arg(long)]
        expect: Option<String>,
    },
    /// Top-degree integral of a field, tropically and through the pullback.
    Integrate { file: PathBuf },
    /// Extension by zero of a current to a larger chart domain.
    ElMir {
        file: PathBuf,
        /// Domain file for the target.
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        expect: Option<String>,
    },
    /// Round trip push_forward(lift(T)) = T on the given currents and a seeded random suite.
    VerifyCorrespondence {
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
    /// Run the built-in counterexample suite.
    Counterexamples,
    /// Run a scene file.
    Run { scene: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Direction {
    Push,
    Lift,
}

fn load_object(path: &Path, name: &str) -> Result<(String, Object), SceneError> {
    let spec: ObjectSpec = parse_json(&read_file(path)?)?;
    Ok((name.to_string(), spec.build()?))
}

fn one_task(objects: Vec<(String, Object)>, kind: TaskKind, expect: Option<String>, settings: &Settings) -> Result<Scene, SceneError> {
    let mut task = Task::new(kind);
    task.expect = expect.map(Value::String);
    let scene = Scene {
        fan: None,
        objects: objects.into_iter().collect(),
        tasks: vec![task],
        tol: settings.tol.unwrap_or(DEFAULT_TOL),
        seed: settings.seed.unwrap_or(0),
        samples: settings.samples,
    };
    Ok(scene)
}

fn build(cli: &Cli, settings: &Settings) -> Result<Scene, SceneError> {
    match &cli.command {
        Command::Run { scene } => Scene::from_file(scene, settings),
        Command::CheckPositivity { file, tier, expect } => {
            let (name, obj) = load_object(file, "input")?;
            let kind = match obj {
                Object::Form(_) | Object::ComplexForm(_) => TaskKind::FormPositivity { form: name.clone(), tier: tier.clone(), pool_size: None },
                Object::Current(_) | Object::Shadow(_) => TaskKind::CurrentPositivity { current: name.clone() },
                _ => return Err(SceneError::Validation("check-positivity takes a form, a current or a shadow".into())),
            };
            checked(one_task(vec![(name, obj)], kind, expect.clone(), settings)?)
        }
        Command::Decompose { file } => {
            let o = load_object(file, "input")?;
            checked(one_task(vec![o], TaskKind::Decompose { current: "input".into() }, None, settings)?)
        }
        Command::Tropicalize { direction, file, expect } => {
            let o = load_object(file, "input")?;
            let kind = match direction {
                Direction::Push => TaskKind::Push { shadow: "input".into() },
                Direction::Lift => TaskKind::Lift { current: "input".into() },
            };
            checked(one_task(vec![o], kind, expect.clone(), settings)?)
        }
        Command::Integrate { file } => {
            let o = load_object(file, "input")?;
            checked(one_task(vec![o], TaskKind::Integrate { field: "input".into() }, None, settings)?)
        }
        Command::ElMir { file, target, expect } => {
            let o = load_object(file, "input")?;
            let d: lagerberg::format::DomainSpec = parse_json(&read_file(target)?)?;
            let t = ("target".to_string(), Object::Domain(d.build()?));
            checked(one_task(vec![o, t], TaskKind::ElMir { current: "input".into(), target: "target".into() }, expect.clone(), settings)?)
        }
        Command::VerifyCorrespondence { files, random } => {
            let mut objs = Vec::new();
            for (i, f) in files.iter().enumerate() {
                objs.push(load_object(f, &format!("input{i}"))?);
            }
            let names = objs.iter().map(|(n, _)| n.clone()).collect();
            let kind = TaskKind::RoundTrip { currents: names, random: *random };
            checked(one_task(objs, kind, Some("exact".into()), settings)?)
        }
        Command::Counterexamples => checked(one_task(vec![], TaskKind::Counterexamples {}, Some("as_expected".into()), settings)?),
    }
}

fn checked(scene: Scene) -> Result<Scene, SceneError> {
    Scene::validate_assembled(scene)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let settings = Settings { tol: cli.tol, seed: cli.seed, samples: cli.samples, timings: cli.timings };
    let scene = match build(&cli, &settings) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("lagerberg: {e}");
            return ExitCode::from(2);
        }
    };
    let report = scene.run(settings.timings);
    let text = match cli.format {
        Format::Json => report.to_json_string(),
        Format::Csv => report.to_csv(),
    };
    match &cli.output {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("lagerberg: {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.all_matched() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
