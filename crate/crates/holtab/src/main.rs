use std::path::PathBuf;
use std::process::exit;
use std::time::Duration;

use clap::Parser;

use holtab::engine::{TraceAction, TraceEvent};
use holtab::strategy::{default_schedule, load_schedule, resolve_mode, run_mode, run_schedule};
use holtab::szs::{status_line, SzsStatus};
use holtab::tptp::parse_problem_file;

/// Tableau prover for TPTP TH0 problems.
#[derive(Parser)]
#[command(name = "holtab", version, about)]
struct Opts {
    /// THF problem file
    file: PathBuf,
    /// Wall-clock budget in seconds
    #[arg(short = 't', long = "timeout", default_value_t = 10.0)]
    timeout: f64,
    /// Run a single named mode (builtin name or mode file path) instead
    /// of a schedule
    #[arg(long)]
    mode: Option<String>,
    /// Schedule file of `modename seconds` lines
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Directory for resolving include directives
    #[arg(long)]
    tptp_root: Option<PathBuf>,
    /// Print one line per dispatched command
    #[arg(long)]
    trace: bool,
    /// Write the accumulated clause set as DIMACS
    #[arg(long)]
    dump_dimacs: Option<PathBuf>,
    /// Print the step count
    #[arg(long)]
    steps: bool,
}

fn trace_line(e: &TraceEvent) -> String {
    match &e.action {
        TraceAction::Process(p) => {
            format!("% trace {} p{} process {}", e.seq, e.priority, p.index())
        }
        TraceAction::Instantiate { forall, witness } => format!(
            "% trace {} p{} instantiate {} with {}",
            e.seq,
            e.priority,
            forall.index(),
            witness.index()
        ),
        TraceAction::Mate { pos, neg, .. } => format!(
            "% trace {} p{} mate {} {}",
            e.seq,
            e.priority,
            pos.index(),
            neg.index()
        ),
        TraceAction::Confront { eqn, diseq } => format!(
            "% trace {} p{} confront {} {}",
            e.seq,
            e.priority,
            eqn.index(),
            diseq.index()
        ),
        TraceAction::DefaultInst { sort, created } => format!(
            "% trace {} p{} default_inst ty{}{}",
            e.seq,
            e.priority,
            sort.index(),
            created
                .map(|c| format!(" created {}", c.index()))
                .unwrap_or_default()
        ),
    }
}

fn fail(file: &str, msg: &str) -> ! {
    eprintln!("holtab: {msg}");
    println!("{}", status_line(SzsStatus::Error, file));
    exit(SzsStatus::Error.exit_code());
}

fn main() {
    let opts = Opts::parse();
    let file = opts.file.display().to_string();
    let problem = match parse_problem_file(&opts.file, opts.tptp_root.as_deref()) {
        Ok(p) => p,
        Err(e) => fail(&file, &e.to_string()),
    };
    let wall = Duration::from_secs_f64(opts.timeout.max(0.0));

    let (result, trace, dimacs) = if let Some(mode_arg) = &opts.mode {
        let flags = match resolve_mode(mode_arg) {
            Ok(f) => f,
            Err(e) => fail(&file, &e),
        };
        let (mut eng, result) = run_mode(&problem, &flags, wall, opts.trace);
        let dimacs = eng.sat().dump_dimacs();
        (result, eng.take_trace(), dimacs)
    } else {
        let schedule = match &opts.schedule {
            Some(path) => match load_schedule(path) {
                Ok(s) => s,
                Err(e) => fail(&file, &e),
            },
            None => default_schedule(),
        };
        let outcome = run_schedule(&problem, &schedule, wall, opts.trace);
        (outcome.result, outcome.trace, outcome.dimacs)
    };

    if let Some(path) = &opts.dump_dimacs {
        if let Err(e) = std::fs::write(path, dimacs) {
            fail(&file, &format!("cannot write {}: {e}", path.display()));
        }
    }
    if opts.trace {
        for e in &trace {
            println!("{}", trace_line(e));
        }
    }
    if opts.steps {
        println!("% steps: {}", result.steps);
    }
    let status = SzsStatus::from(result.status);
    println!("{}", status_line(status, &file));
    exit(status.exit_code());
}
