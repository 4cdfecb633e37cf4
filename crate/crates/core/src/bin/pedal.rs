use std::fs;
use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pedal_core::dsl::{self, ValidatedModel};
use pedal_core::equivalence::{self, Kind};
use pedal_core::lts::Lts;
use pedal_core::mbt::{self, Mutation, TesterConfig, Verdict, WireAdapter};
use pedal_core::mucalc;
use pedal_core::process_ir;
use pedal_core::semantics::{self, Mode};

#[derive(Parser)]
#[command(name = "pedal", version, about = "Pedal-handling DSL toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LtsMode {
    Reference,
    Tau,
    Compiled,
}

#[derive(Clone, Copy, ValueEnum)]
enum EquivKind {
    Strong,
    Branching,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a model.
    Validate { model: PathBuf },
    /// Generate the LTS of a model in .aut format.
    Lts {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "reference")]
        mode: LtsMode,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare two .aut files.
    Equiv {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value = "strong")]
        kind: EquivKind,
    },
    /// Check a .mcf property against a model.
    Check {
        model: PathBuf,
        property: PathBuf,
        #[arg(long, value_enum, default_value = "reference")]
        mode: LtsMode,
    },
    /// Step through a model interactively.
    Simulate { model: PathBuf },
    /// Run the reference SUT on TCP, or on stdin/stdout without --listen.
    Sut {
        model: PathBuf,
        /// swap-output | drop-first-assign:<Action> | negate-guard:<Action>
        #[arg(long)]
        mutate: Option<String>,
        #[arg(long)]
        listen: Option<String>,
    },
    /// Test a running SUT against a model.
    Mbt {
        model: PathBuf,
        #[arg(long)]
        connect: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        timeout_ms: u64,
        /// Write the wire transcript to this file.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Run the HTTP simulation service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
    },
}

/// Exit status for negative results and for bad input or usage.
const NEGATIVE: u8 = 1;
const USAGE: u8 = 2;
const INCONCLUSIVE: u8 = 3;

struct Failure(u8, String);

type CmdResult = Result<u8, Failure>;

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure(USAGE, msg.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<ValidatedModel, Failure> {
    dsl::load(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn build(model: &ValidatedModel, mode: LtsMode) -> Result<Lts, Failure> {
    match mode {
        LtsMode::Reference => semantics::build_lts(model, Mode::Reference).map_err(|e| Failure(NEGATIVE, e.to_string())),
        LtsMode::Tau => semantics::build_lts(model, Mode::TauConditional).map_err(|e| Failure(NEGATIVE, e.to_string())),
        LtsMode::Compiled => process_ir::build_lts_compiled(model).map_err(|e| Failure(NEGATIVE, e.to_string())),
    }
}

fn load_aut(path: &Path) -> Result<Lts, Failure> {
    Lts::from_aut(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn validate(path: &Path) -> CmdResult {
    match dsl::load(&read(path)?) {
        Ok(m) => {
            println!("OK {} actions, {} rules", m.actions().len(), m.rules().len());
            Ok(0)
        }
        Err(e) => Err(Failure(NEGATIVE, format!("{}: {e}", path.display()))),
    }
}

fn lts(path: &Path, mode: LtsMode, output: Option<&Path>) -> CmdResult {
    let lts = build(&load_model(path)?, mode)?;
    let aut = lts.to_aut();
    match output {
        Some(out) => {
            fs::write(out, aut).map_err(|e| usage(format!("{}: {e}", out.display())))?;
            println!("{} states, {} transitions", lts.num_states(), lts.num_transitions());
        }
        None => print!("{aut}"),
    }
    Ok(0)
}

fn equiv(left: &Path, right: &Path, kind: EquivKind) -> CmdResult {
    let (a, b) = (load_aut(left)?, load_aut(right)?);
    let kind = match kind {
        EquivKind::Strong => Kind::Strong,
        EquivKind::Branching => Kind::Branching,
    };
    let r = equivalence::equivalent(&a, &b, kind);
    if r.equivalent {
        println!("EQUIVALENT");
        return Ok(0);
    }
    println!("NOT EQUIVALENT");
    if let Some(c) = r.counterexample {
        let trace: Vec<String> = c.trace.iter().map(ToString::to_string).collect();
        println!("trace: {}", trace.join(" "));
        let side = if c.enabled_in_left { "left" } else { "right" };
        println!("distinguishing: {} (only in {side}: state {} vs {})", c.label, c.left_state, c.right_state);
    }
    Ok(NEGATIVE)
}

fn check(model: &Path, property: &Path, mode: LtsMode) -> CmdResult {
    let lts = build(&load_model(model)?, mode)?;
    let prop = mucalc::parse_property_file(&read(property)?).map_err(|e| usage(format!("{}: {e}", property.display())))?;
    let r = mucalc::check(&lts, &prop.formula).map_err(|e| usage(e.to_string()))?;
    if r.holds {
        println!("HOLDS");
        return Ok(0);
    }
    println!("FAILS");
    if let Some(t) = r.witness_trace {
        let t: Vec<String> = t.iter().map(ToString::to_string).collect();
        println!("witness: {}", t.join(" "));
    }
    Ok(NEGATIVE)
}

fn simulate(path: &Path) -> CmdResult {
    let model = load_model(path)?;
    let mut state = semantics::initial_state(&model);
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    let mut out = io::stdout().lock();
    let io_err = |e: io::Error| Failure(NEGATIVE, e.to_string());
    loop {
        let vars: Vec<String> = state.describe(&model).into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        let enabled = semantics::enabled_inputs(&model, &state);
        writeln!(out, "state: {}", vars.join(" ")).map_err(io_err)?;
        writeln!(out, "enabled: {}", enabled.join(" ")).map_err(io_err)?;
        write!(out, "> ").map_err(io_err)?;
        out.flush().map_err(io_err)?;
        let Some(line) = lines.next() else { return Ok(0) };
        let line = line.map_err(io_err)?;
        let input = line.trim();
        let action = match input {
            "" => continue,
            "quit" | "exit" => return Ok(0),
            "reset" => {
                state = semantics::initial_state(&model);
                continue;
            }
            _ => match input.parse::<usize>() {
                Ok(i) if (1..=enabled.len()).contains(&i) => enabled[i - 1].to_string(),
                _ => input.to_string(),
            },
        };
        match semantics::step_input(&model, &state, &action) {
            Ok(next) => {
                state = next;
                writeln!(out, "{action} -> {}", state.output()).map_err(io_err)?;
            }
            Err(e) => writeln!(out, "error: {e}").map_err(io_err)?,
        }
    }
}

fn sut(path: &Path, mutate: Option<&str>, listen: Option<&str>) -> CmdResult {
    let model = load_model(path)?;
    let mutation: Mutation = mutate.unwrap_or("none").parse().map_err(usage)?;
    match listen {
        Some(addr) => {
            let server = mbt::SutServer::start(&model, &mutation, addr).map_err(usage)?;
            eprintln!("SUT ({mutation}) listening on {}", server.addr());
            server.join();
        }
        None => {
            let mut s = mbt::Sut::new(&model, &mutation).map_err(usage)?;
            mbt::serve_stream(&mut s, io::stdin().lock(), io::stdout().lock()).map_err(|e| Failure(NEGATIVE, e.to_string()))?;
        }
    }
    Ok(0)
}

fn run_mbt(path: &Path, connect: &str, cfg: TesterConfig, transcript: Option<&Path>) -> CmdResult {
    let model = load_model(path)?;
    let mut adapter = WireAdapter::connect(connect).map_err(|e| usage(format!("{connect}: {e}")))?;
    let verdict = match mbt::reset(&mut adapter, cfg.timeout()) {
        Ok(()) => mbt::run_test(&model, &mut adapter, &cfg),
        Err(e) => Verdict::Inconclusive {
            reason: format!("reset failed: {e}"),
            trace: vec![],
        },
    };
    if let Some(t) = transcript {
        fs::write(t, adapter.transcript()).map_err(|e| usage(format!("{}: {e}", t.display())))?;
    }
    let render = |trace: &[pedal_core::lts::Label]| trace.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    match verdict {
        Verdict::Pass { steps } => {
            println!("PASS {steps} steps");
            Ok(0)
        }
        Verdict::Fail { expected, observed, trace } => {
            println!("FAIL expected {expected}, observed {observed}");
            println!("trace: {}", render(&trace));
            Ok(NEGATIVE)
        }
        Verdict::Inconclusive { reason, trace } => {
            println!("INCONCLUSIVE {reason}");
            println!("trace: {}", render(&trace));
            Ok(INCONCLUSIVE)
        }
    }
}

fn serve(addr: SocketAddr) -> CmdResult {
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure(NEGATIVE, e.to_string()))?;
    eprintln!("listening on http://{addr}");
    rt.block_on(pedal_core::service::serve(addr))
        .map_err(|e| usage(format!("{addr}: {e}")))?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { model } => validate(&model),
        Command::Lts { model, mode, output } => lts(&model, mode, output.as_deref()),
        Command::Equiv { left, right, kind } => equiv(&left, &right, kind),
        Command::Check { model, property, mode } => check(&model, &property, mode),
        Command::Simulate { model } => simulate(&model),
        Command::Sut { model, mutate, listen } => sut(&model, mutate.as_deref(), listen.as_deref()),
        Command::Mbt {
            model,
            connect,
            seed,
            steps,
            timeout_ms,
            transcript,
        } => {
            let cfg = TesterConfig {
                seed,
                max_steps: steps as usize,
                response_timeout_ms: timeout_ms,
            };
            run_mbt(&model, &connect, cfg, transcript.as_deref())
        }
        Command::Serve { listen } => serve(listen),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
