use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ising_rc::check::{Bound, Check};
use ising_rc::ineq::IneqReport;
use thiserror::Error;

pub const COLUMNS: [&str; 8] = [
    "instance_id",
    "quantity",
    "lhs",
    "rhs",
    "abs_diff",
    "slack",
    "pass",
    "runtime_ms",
];

pub const CONFIG_PREFIX: &str = "# run-config: ";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Engine(#[from] ising_rc::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{file}:{line}: {msg}")]
    Report {
        file: PathBuf,
        line: usize,
        msg: String,
    },
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Outcome of a single row: asserted pass/fail, or reported only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Reported,
}

impl Verdict {
    pub fn of(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pass => "true",
            Self::Fail => "false",
            Self::Reported => "n/a",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "true" => Some(Self::Pass),
            "false" => Some(Self::Fail),
            "n/a" => Some(Self::Reported),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub instance_id: String,
    pub quantity: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub slack: f64,
    pub verdict: Verdict,
    pub runtime_ms: f64,
}

impl Row {
    pub fn check(id: &str, c: &Check, tol: f64, ms: f64) -> Self {
        let d = c.abs_diff();
        Self {
            instance_id: id.to_string(),
            quantity: c.quantity.clone(),
            lhs: c.lhs,
            rhs: c.rhs,
            abs_diff: d,
            slack: -d,
            verdict: Verdict::of(c.passes(tol)),
            runtime_ms: ms,
        }
    }

    /// Identity compared relative to `max(1, |lhs|)`.
    pub fn relative(id: &str, c: &Check, tol: f64, ms: f64) -> Self {
        let r = c.rel_diff();
        Self {
            slack: -r,
            verdict: Verdict::of(r <= tol),
            ..Self::check(id, c, tol, ms)
        }
    }

    pub fn bound(id: &str, b: &Bound, tol: f64, ms: f64) -> Self {
        Self {
            instance_id: id.to_string(),
            quantity: b.quantity.clone(),
            lhs: b.lhs,
            rhs: b.rhs,
            abs_diff: (b.lhs - b.rhs).abs(),
            slack: b.slack(),
            verdict: Verdict::of(b.passes(tol)),
            runtime_ms: ms,
        }
    }

    pub fn ineq(r: &IneqReport, ms: f64) -> Self {
        Self {
            instance_id: r.instance.clone(),
            quantity: r.id.clone(),
            lhs: r.lhs,
            rhs: r.rhs,
            abs_diff: (r.lhs - r.rhs).abs(),
            slack: r.slack,
            verdict: if r.asserted {
                Verdict::of(r.pass)
            } else {
                Verdict::Reported
            },
            runtime_ms: ms,
        }
    }

    /// Monte Carlo estimate against an exact value, passing within `z`
    /// standard errors.
    pub fn estimate(id: &str, quantity: &str, est: f64, stderr: f64, exact: f64, z: f64, ms: f64) -> Self {
        let d = (est - exact).abs();
        let slack = z * stderr - d;
        Self {
            instance_id: id.to_string(),
            quantity: quantity.to_string(),
            lhs: est,
            rhs: exact,
            abs_diff: d,
            slack,
            verdict: Verdict::of(slack >= -1e-12),
            runtime_ms: ms,
        }
    }
}

pub fn num(x: f64) -> String {
    let x = x + 0.0;
    format!("{x:.16e}")
}

pub fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Writes the config header, the column header and the rows sorted by
/// instance id (stable, so rows of one instance keep their order).
pub fn write_csv<W: Write>(w: W, config: &str, rows: &mut [Row]) -> CliResult<()> {
    rows.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    let mut w = w;
    writeln!(w, "{CONFIG_PREFIX}{config}").map_err(io_err(Path::new("<output>")))?;
    let mut c = csv::Writer::from_writer(w);
    c.write_record(COLUMNS)?;
    for r in rows.iter() {
        c.write_record([
            r.instance_id.as_str(),
            r.quantity.as_str(),
            &num(r.lhs),
            &num(r.rhs),
            &num(r.abs_diff),
            &num(r.slack),
            r.verdict.as_str(),
            &format!("{:.3}", r.runtime_ms),
        ])?;
    }
    c.flush().map_err(io_err(Path::new("<output>")))?;
    Ok(())
}

pub fn emit(out: Option<&Path>, config: &str, rows: &mut [Row]) -> CliResult<()> {
    match out {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(io_err(p))?;
            write_csv(std::io::BufWriter::new(f), config, rows)
        }
        None => write_csv(std::io::stdout().lock(), config, rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_sorted_and_formatted() {
        let mut rows = vec![
            Row::check("b=1", &Check::new("q", 1.0, 1.0), 1e-10, 0.0),
            Row::check("b=0.5", &Check::new("q", 0.25, 0.5), 1e-10, 0.0),
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, "{}", &mut rows).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# run-config: {}");
        assert_eq!(lines[1], COLUMNS.join(","));
        assert!(lines[2].starts_with("b=0.5,q,2.5000000000000000e-1,5.0000000000000000e-1,"));
        assert!(lines[2].contains(",false,"));
        assert!(lines[3].contains(",true,"));
    }

    #[test]
    fn estimate_rows() {
        let r = Row::estimate("x", "q", 0.51, 0.01, 0.5, 4.0, 0.0);
        assert_eq!(r.verdict, Verdict::Pass);
        let r = Row::estimate("x", "q", 0.6, 0.01, 0.5, 4.0, 0.0);
        assert_eq!(r.verdict, Verdict::Fail);
    }
}
