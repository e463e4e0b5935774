mod args;
mod commands;
mod output;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, GaugeKind};
use output::{emit, io_err, usage, CliResult, Row, Verdict, CONFIG_PREFIX};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn exit_code(rows: &[Row]) -> u8 {
    if rows.iter().any(|r| r.verdict == Verdict::Fail) {
        1
    } else {
        0
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    let config = serde_json::to_string(&cli)?;
    let (mut rows, out) = match cli.cmd {
        Command::Exact { what, common } => (commands::exact(what, &common)?, common.out),
        Command::Verify { what, common, extra } => (commands::verify(what, &common, &extra)?, common.out),
        Command::Gauge { what, common, gauge } => {
            if what == GaugeKind::Dualbeta {
                let (lines, rows) = commands::dual_beta_lines(&common)?;
                for l in lines {
                    println!("{l}");
                }
                let mut rows = rows;
                if let Some(p) = &common.out {
                    emit(Some(p), &config, &mut rows)?;
                }
                return Ok(exit_code(&rows));
            }
            (commands::gauge(what, &common, &gauge)?, common.out)
        }
        Command::Sample { what, common, chain } => (commands::sample(what, &common, &chain)?, common.out),
        Command::Ineq { suite, common, worst } => {
            let o = commands::ineq(suite, &common)?;
            let target = worst.or_else(|| common.out.as_ref().map(|p| with_suffix(p, ".worst.txt")));
            if let (Some(p), Some(inst)) = (target, &o.worst) {
                commands::write_worst(&p, inst)?;
            }
            (o.rows, common.out)
        }
        Command::Replay { file, tol, out } => (commands::replay(&file, tol)?, out),
        Command::Report { files, plot, out } => {
            let table = report::run(&files, plot.as_deref())?;
            match out {
                Some(p) => std::fs::write(&p, table).map_err(io_err(&p))?,
                None => print!("{table}"),
            }
            return Ok(0);
        }
        Command::Rerun { file, out } => {
            let mut saved = load_config(&file)?;
            set_out(&mut saved, out);
            return run(saved);
        }
    };
    emit(out.as_deref(), &config, &mut rows)?;
    Ok(exit_code(&rows))
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn load_config(file: &Path) -> CliResult<Cli> {
    let text = std::fs::read_to_string(file).map_err(io_err(file))?;
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix(CONFIG_PREFIX))
        .ok_or_else(|| usage(format!("{}: no run-config header", file.display())))?;
    let cli: Cli = serde_json::from_str(line)?;
    if matches!(cli.cmd, Command::Rerun { .. }) {
        return Err(usage("a rerun cannot rerun itself"));
    }
    Ok(cli)
}

fn set_out(cli: &mut Cli, out: Option<PathBuf>) {
    match &mut cli.cmd {
        Command::Exact { common, .. }
        | Command::Verify { common, .. }
        | Command::Gauge { common, .. }
        | Command::Sample { common, .. }
        | Command::Ineq { common, .. } => common.out = out,
        Command::Replay { out: o, .. } | Command::Report { out: o, .. } | Command::Rerun { out: o, .. } => *o = out,
    }
}
