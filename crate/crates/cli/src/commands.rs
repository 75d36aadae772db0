use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use entropic_nc::explore::{write_scan, AxisRange, OptimizeOptions};
use entropic_nc::model::{load_observables, Vec4, ORTHOGONALITY_TOL};
use entropic_nc::oracle::{run_classical_oracle, OracleConfig};
use entropic_nc::{
    default_observables, estimate_m_sampled, evaluate_m, make_state, normalize, optimize, scan,
    CyclicObservableSet, Error, ExportFormat, FamilyKind, ScanGrid, StateFamily, StateVector,
};
use serde_json::{json, Map, Value};

use crate::{Cli, Command, Common, EvalArgs, Format, OptimizeArgs, OracleArgs, ScanArgs};

pub const EXIT_CONSISTENCY: u8 = 1;
pub const EXIT_FILE: u8 = 3;
pub const EXIT_CONFIG: u8 = 4;
pub const EXIT_COMPUTE: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } => EXIT_FILE,
            Error::CyclicityViolation { .. } | Error::ExclusivityViolation { .. } => {
                EXIT_CONSISTENCY
            }
            Error::DegenerateState { .. } | Error::ZeroVector { .. } => EXIT_COMPUTE,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: Option<&Path>, e: io::Error) -> Failure {
    let message = match path {
        Some(p) => format!("{}: {e}", p.display()),
        None => e.to_string(),
    };
    Failure {
        code: EXIT_FILE,
        message,
    }
}

fn config_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

pub fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    match &cli.command {
        Command::Verify => cmd_verify(&cli.common),
        Command::Eval(args) => cmd_eval(&cli.common, args),
        Command::Scan(args) => cmd_scan(&cli.common, args),
        Command::Optimize(args) => cmd_optimize(&cli.common, args),
        Command::Oracle(args) => cmd_oracle(&cli.common, args),
    }
}

fn angle(common: &Common, x: f64) -> f64 {
    if common.degrees {
        x.to_radians()
    } else {
        x
    }
}

/// Resolved settings shared by every command's output header.
fn base_config(common: &Common, command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert(
        "observables".into(),
        match &common.observables {
            Some(p) => json!(p.display().to_string()),
            None => json!("builtin"),
        },
    );
    m.insert("seed".into(), json!(common.seed));
    m.insert("workers".into(), json!(common.workers));
    m.insert("degrees".into(), json!(common.degrees));
    m
}

/// Raw label and vectors, before cyclicity is checked.
fn observable_source(common: &Common) -> Result<(String, [Vec4; 5]), Failure> {
    match &common.observables {
        Some(path) => {
            let cfg = load_observables(path)?;
            Ok((cfg.label, cfg.vectors))
        }
        None => {
            let set = default_observables();
            Ok((
                set.label().to_owned(),
                set.directions().map(|d| d.as_vec4()),
            ))
        }
    }
}

fn observables(common: &Common) -> Result<CyclicObservableSet, Failure> {
    let (label, vectors) = observable_source(common)?;
    entropic_nc::build_observables(label, &vectors).map_err(|e| match e {
        Error::ZeroVector { .. } => config_failure(format!("observable configuration: {e}")),
        e => e.into(),
    })
}

fn with_output<F>(common: &Common, write: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match &common.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_failure(Some(path), e))?;
            let mut out = BufWriter::new(file);
            write(&mut out)
                .and_then(|_| out.flush())
                .map_err(|e| io_failure(Some(path), e))
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            write(&mut out).map_err(|e| io_failure(None, e))
        }
    }
}

fn emit_json(common: &Common, value: &Value) -> Result<(), Failure> {
    with_output(common, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        writeln!(out)
    })
}

fn cmd_verify(common: &Common) -> Result<ExitCode, Failure> {
    let (label, vectors) = observable_source(common)?;
    let mut directions = Vec::with_capacity(5);
    for v in &vectors {
        directions.push(
            normalize(v).map_err(|e| config_failure(format!("observable configuration: {e}")))?,
        );
    }
    let directions: [StateVector; 5] = directions.try_into().expect("five vectors");
    let gram = entropic_nc::model::gram(&directions);
    let overlaps: Vec<f64> = (0..5).map(|i| gram[i][(i + 1) % 5].norm()).collect();
    let verdict = entropic_nc::build_observables(label.clone(), &vectors);

    let mut config = base_config(common, "verify");
    config.insert("tolerance".into(), json!(ORTHOGONALITY_TOL));
    let json_out = common.format == Some(Format::Json);
    with_output(common, |out| {
        if json_out {
            let gram_json: Vec<Vec<[f64; 2]>> = gram
                .iter()
                .map(|row| row.iter().map(|c| [c.re, c.im]).collect())
                .collect();
            let value = json!({
                "config": config,
                "label": label,
                "gram": gram_json,
                "adjacent_overlaps": overlaps,
                "pass": verdict.is_ok(),
            });
            serde_json::to_writer_pretty(&mut *out, &value)?;
            return writeln!(out);
        }
        writeln!(out, "# config={}", Value::Object(config.clone()))?;
        writeln!(out, "observables: {label}")?;
        writeln!(out, "gram matrix <v_i|v_j>:")?;
        let complex = gram.iter().flatten().any(|c| c.im != 0.0);
        for row in &gram {
            let cells: Vec<String> = row
                .iter()
                .map(|c| {
                    if complex {
                        format!("{:+.6e}{:+.6e}i", c.re, c.im)
                    } else {
                        format!("{:+.6e}", c.re)
                    }
                })
                .collect();
            writeln!(out, "  {}", cells.join("  "))?;
        }
        writeln!(out, "adjacent overlaps:")?;
        for (i, o) in overlaps.iter().enumerate() {
            writeln!(out, "  |<v{}|v{}>| = {o:.3e}", i + 1, (i + 1) % 5 + 1)?;
        }
        match &verdict {
            Ok(_) => writeln!(out, "PASS"),
            Err(e) => writeln!(out, "FAIL: {e}"),
        }
    })?;
    match verdict {
        Ok(_) => Ok(ExitCode::SUCCESS),
        Err(e) => Err(e.into()),
    }
}

fn cmd_eval(common: &Common, args: &EvalArgs) -> Result<ExitCode, Failure> {
    let set = observables(common)?;
    let mut config = base_config(common, "eval");
    config.insert("label".into(), json!(set.label()));
    let family = match (&args.state, args.family) {
        (Some(amps), _) => {
            let amps: [f64; 4] = amps
                .as_slice()
                .try_into()
                .map_err(|_| config_failure("--state needs 4 amplitudes"))?;
            config.insert("state".into(), json!(amps));
            StateFamily::Custom(Vec4::from_real(amps)?)
        }
        (None, Some(family)) => {
            let (Some(alpha), Some(beta)) = (args.alpha, args.beta) else {
                return Err(config_failure("--family needs both --alpha and --beta"));
            };
            let kind = FamilyKind::from(family);
            let (alpha, beta) = (angle(common, alpha), angle(common, beta));
            config.insert("family".into(), json!(kind));
            config.insert("alpha".into(), json!(alpha));
            config.insert("beta".into(), json!(beta));
            kind.at(alpha, beta)
        }
        (None, None) => {
            return Err(config_failure(
                "give either --state or --family with --alpha/--beta",
            ))
        }
    };
    let state = make_state(&family)?;
    let report = match args.shots {
        Some(shots) => {
            config.insert("shots_per_pair".into(), json!(shots));
            estimate_m_sampled(&set, &state, shots, common.seed)?
        }
        None => evaluate_m(&set, &state)?,
    };
    let mut value = Map::new();
    value.insert("config".into(), Value::Object(config));
    if let Value::Object(fields) = serde_json::to_value(&report).expect("report serializes") {
        value.extend(fields);
    }
    emit_json(common, &Value::Object(value))?;
    Ok(ExitCode::SUCCESS)
}

fn axis(
    common: &Common,
    spec: Option<&Vec<f64>>,
    kind: FamilyKind,
    steps: usize,
) -> Result<AxisRange, Failure> {
    match spec {
        None => Ok(AxisRange::window(kind, steps)),
        Some(v) => {
            let &[start, stop, steps] = v.as_slice() else {
                return Err(config_failure("ranges are start,stop,steps"));
            };
            if steps.fract() != 0.0 || steps < 0.0 {
                return Err(config_failure(format!(
                    "range step count {steps} is not a whole number"
                )));
            }
            Ok(AxisRange::new(
                angle(common, start),
                angle(common, stop),
                steps as usize,
            ))
        }
    }
}

fn cmd_scan(common: &Common, args: &ScanArgs) -> Result<ExitCode, Failure> {
    let set = observables(common)?;
    let kind = FamilyKind::from(args.family);
    let grid = ScanGrid::new(
        kind,
        axis(common, args.alpha_range.as_ref(), kind, args.steps)?,
        axis(common, args.beta_range.as_ref(), kind, args.steps)?,
    )?;
    let format = match common.format {
        None | Some(Format::Csv) => ExportFormat::Csv,
        Some(Format::Json) => ExportFormat::Json,
        Some(Format::Text) => return Err(config_failure("scan writes csv or json")),
    };
    let result = scan(&grid, &set, common.workers)?;

    let mut config = base_config(common, "scan");
    config.insert("format".into(), json!(format));
    let config = Value::Object(config);
    with_output(common, |out| {
        write_scan(&result, format, Some(&config), out)
    })?;
    if let Some(max) = result.max_point {
        eprintln!(
            "max M = {:.6} bits at alpha = {:.4}, beta = {:.4}; violating fraction {:.4}",
            max.m_bits, max.alpha, max.beta, result.violation_fraction
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_optimize(common: &Common, args: &OptimizeArgs) -> Result<ExitCode, Failure> {
    let set = observables(common)?;
    let kind = FamilyKind::from(args.family);
    let window = match args.window.as_deref() {
        None => None,
        Some(&[start, stop]) => Some((angle(common, start), angle(common, stop))),
        Some(_) => return Err(config_failure("--window is start,stop")),
    };
    let options = OptimizeOptions {
        coarse_steps: args.coarse_steps,
        restarts: args.restarts,
        seed: common.seed,
        window,
        workers: common.workers,
    };
    let best = optimize(kind, &set, &options)?;
    let (start, stop) = window.unwrap_or_else(|| kind.default_window());
    let mut config = base_config(common, "optimize");
    config.insert("label".into(), json!(set.label()));
    config.insert("family".into(), json!(kind));
    config.insert("coarse_steps".into(), json!(args.coarse_steps));
    config.insert("restarts".into(), json!(args.restarts));
    config.insert("window".into(), json!([start, stop]));
    let value = json!({
        "config": config,
        "alpha": best.alpha,
        "beta": best.beta,
        "m_bits": best.m_bits,
        "coarse_m_bits": best.coarse_m_bits,
    });
    emit_json(common, &value)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(common: &Common, args: &OracleArgs) -> Result<ExitCode, Failure> {
    let oracle = OracleConfig {
        samples: args.samples,
        seed: common.seed,
        concentrations: args.concentrations.clone(),
        exclusive: args.exclusive,
        workers: common.workers,
    };
    let summary = run_classical_oracle(&oracle)?;
    let mut config = base_config(common, "oracle");
    config.insert("concentrations".into(), json!(args.concentrations));
    config.insert("exclusive".into(), json!(args.exclusive));
    let mut value = Map::new();
    value.insert("config".into(), Value::Object(config));
    if let Value::Object(fields) = serde_json::to_value(&summary).expect("summary serializes") {
        value.extend(fields);
    }
    emit_json(common, &Value::Object(value))?;
    if summary.violations_found > 0 {
        eprintln!(
            "classical bound violated in {} samples",
            summary.violations_found
        );
        return Ok(ExitCode::from(EXIT_CONSISTENCY));
    }
    Ok(ExitCode::SUCCESS)
}
