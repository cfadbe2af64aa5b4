use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tapebot::actuators::{channel_mode, HBridgeInputs, Level};
use tapebot::electrical::{led_current, pick_kit_resistor, series_resistor, DEFAULT_KIT};
use tapebot::ir_codec::{decode_nec, encode_nec, IrCode, NecFrame, NecTiming, PulseTrain};
use tapebot::scenario::load_scenario;
use tapebot::sim_engine::{run_scenario, write_csv, write_jsonl, IrOutcome, Scenario};

/// Line-tracking delivery robot simulator.
#[derive(Debug, Parser)]
#[command(name = "tapebot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TraceFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and check its assertions.
    Simulate {
        scenario: PathBuf,
        /// Write the per-control-boundary trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "jsonl")]
        format: TraceFormat,
        /// Override the scenario's max_time (seconds).
        #[arg(long)]
        max_time: Option<f64>,
        /// Dotted-key override such as control.speed=120; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print the H-bridge channel mode for all 16 input combinations.
    TruthTable,
    /// NEC infrared codec.
    Ir {
        #[command(subcommand)]
        op: IrOp,
    },
    /// Size an LED series resistor.
    Resistor {
        /// Supply voltage (V).
        supply: f64,
        /// LED forward voltage (V).
        forward: f64,
        /// Target current (mA).
        current_ma: f64,
    },
    /// Parse a scenario and report errors without running it.
    Validate {
        scenario: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
enum IrOp {
    /// Print the pulse train for a 32-bit code.
    Encode { code: IrCode },
    /// Read a pulse train from stdin and print the decoded code.
    Decode,
}

enum Failure {
    Input(String),
    Assertions,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn load(path: &Path, overrides: &[String]) -> Result<Scenario, Failure> {
    Ok(load_scenario(path, overrides)?)
}

fn simulate(
    path: &Path,
    trace: Option<&Path>,
    format: TraceFormat,
    max_time: Option<f64>,
    mut overrides: Vec<String>,
) -> Result<(), Failure> {
    if let Some(t) = max_time {
        overrides.push(format!("max_time={t}"));
    }
    let scenario = load(path, &overrides)?;
    let result = run_scenario(&scenario)?;

    if let Some(out) = trace {
        let file = File::create(out).map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
        let w = BufWriter::new(file);
        match format {
            TraceFormat::Jsonl => write_jsonl(&result.trace, w)?,
            TraceFormat::Csv => write_csv(&result.trace, w)?,
        }
    }

    let mut out = io::stdout().lock();
    for entry in &result.ir_log {
        match &entry.outcome {
            IrOutcome::Failed(e) => writeln!(out, "ir  {:.3} s: decode failed: {e}", entry.t)?,
            _ if entry.checksum_warning => writeln!(out, "ir  {:.3} s: checksum mismatch", entry.t)?,
            _ => {}
        }
    }
    let p = result.final_pose;
    writeln!(
        out,
        "ran {:.3} s, {} samples, {} deliveries, final pose ({:.4}, {:.4}, {:.1} deg)",
        result.trace.last().map_or(0.0, |r| r.t),
        result.trace.len(),
        result.deliveries.len(),
        p.x,
        p.y,
        p.heading.to_degrees()
    )?;
    for o in &result.assertion_outcomes {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{verdict} {}: {}", serde_json::to_string(&o.assertion)?, o.detail)?;
    }
    if result.all_passed() {
        Ok(())
    } else {
        Err(Failure::Assertions)
    }
}

fn truth_table() -> io::Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "IN1 IN2 PWM STBY  MODE")?;
    let levels = [Level::Low, Level::High];
    for in1 in levels {
        for in2 in levels {
            for pwm_duty in [0u8, 255] {
                for stby in levels {
                    let mode = channel_mode(HBridgeInputs { in1, in2, pwm_duty, stby });
                    writeln!(
                        out,
                        "{:>3} {:>3} {pwm_duty:>3} {:>4}  {mode}",
                        in1.to_string(),
                        in2.to_string(),
                        stby.to_string()
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn ir(op: IrOp) -> Result<(), Failure> {
    let timing = NecTiming::default();
    match op {
        IrOp::Encode { code } => println!("{}", encode_nec(code, &timing)),
        IrOp::Decode => {
            let mut text = String::new();
            io::stdin().read_to_string(&mut text)?;
            let train: PulseTrain = text.trim().parse()?;
            match decode_nec(&train, &timing)? {
                NecFrame::Code(code) => {
                    println!("{code}");
                    if !code.nec_checksum_ok() {
                        eprintln!("warning: address/command complements do not match");
                    }
                }
                NecFrame::Repeat => println!("REPEAT"),
            }
        }
    }
    Ok(())
}

fn resistor(supply: f64, forward: f64, current_ma: f64) -> Result<(), Failure> {
    let computed = series_resistor(supply, forward, current_ma / 1000.0)?;
    let kit = pick_kit_resistor(computed, DEFAULT_KIT)?;
    let actual = led_current(supply, forward, kit)?;
    println!("computed: {computed} ohm");
    println!("kit: {kit} ohm ({:.3} mA)", actual * 1000.0);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate {
            scenario,
            trace,
            format,
            max_time,
            overrides,
        } => simulate(&scenario, trace.as_deref(), format, max_time, overrides),
        Command::TruthTable => Ok(truth_table()?),
        Command::Ir { op } => ir(op),
        Command::Resistor {
            supply,
            forward,
            current_ma,
        } => resistor(supply, forward, current_ma),
        Command::Validate { scenario, overrides } => {
            let s = load(&scenario, &overrides)?;
            println!(
                "ok: {} ir events, {} assertions, max_time {} s",
                s.ir_events.len(),
                s.assertions.len(),
                s.max_time.as_secs_f64()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertions) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
