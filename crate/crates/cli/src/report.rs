use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::output::{io_err, num, CliError, CliResult, Verdict, COLUMNS};

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedRow {
    pub instance_id: String,
    pub quantity: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub slack: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FileSummary {
    pub name: String,
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub reported: usize,
    pub max_abs_diff: f64,
    pub min_slack: f64,
}

pub fn parse_file(path: &Path) -> CliResult<Vec<ParsedRow>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_text(&text, path)
}

pub fn parse_text(text: &str, path: &Path) -> CliResult<Vec<ParsedRow>> {
    let err = |line: usize, msg: String| CliError::Report {
        file: path.to_path_buf(),
        line,
        msg,
    };
    let mut out = Vec::new();
    let mut header = false;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if !header {
            if rec.iter().ne(COLUMNS) {
                return Err(err(line, "missing column header".into()));
            }
            header = true;
            continue;
        }
        if rec.len() != COLUMNS.len() {
            return Err(err(line, format!("expected {} fields, found {}", COLUMNS.len(), rec.len())));
        }
        let f = |i: usize| -> CliResult<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| err(line, format!("bad {} '{}'", COLUMNS[i], &rec[i])))
        };
        let verdict = Verdict::parse(&rec[6]).ok_or_else(|| err(line, format!("bad pass '{}'", &rec[6])))?;
        f(7)?;
        out.push(ParsedRow {
            instance_id: rec[0].to_string(),
            quantity: rec[1].to_string(),
            lhs: f(2)?,
            rhs: f(3)?,
            abs_diff: f(4)?,
            slack: f(5)?,
            verdict,
        });
    }
    Ok(out)
}

pub fn summarize(name: &str, rows: &[ParsedRow]) -> FileSummary {
    let mut s = FileSummary {
        name: name.to_string(),
        rows: rows.len(),
        max_abs_diff: 0.0,
        min_slack: f64::INFINITY,
        ..Default::default()
    };
    for r in rows {
        match r.verdict {
            Verdict::Pass => s.passed += 1,
            Verdict::Fail => s.failed += 1,
            Verdict::Reported => s.reported += 1,
        }
        if r.verdict != Verdict::Reported {
            s.max_abs_diff = s.max_abs_diff.max(r.abs_diff);
            s.min_slack = s.min_slack.min(r.slack);
        }
    }
    s
}

pub fn summary_table(sums: &[FileSummary]) -> String {
    let mut out = String::from("file,rows,passed,failed,reported,max_abs_diff,min_slack\n");
    let mut total = FileSummary {
        name: "total".into(),
        min_slack: f64::INFINITY,
        ..Default::default()
    };
    for s in sums {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.name,
            s.rows,
            s.passed,
            s.failed,
            s.reported,
            num(s.max_abs_diff),
            num(s.min_slack)
        );
        total.rows += s.rows;
        total.passed += s.passed;
        total.failed += s.failed;
        total.reported += s.reported;
        total.max_abs_diff = total.max_abs_diff.max(s.max_abs_diff);
        total.min_slack = total.min_slack.min(s.min_slack);
    }
    if !sums.is_empty() {
        let _ = writeln!(
            out,
            "total,{},{},{},{},{},{}",
            total.rows,
            total.passed,
            total.failed,
            total.reported,
            num(total.max_abs_diff),
            num(total.min_slack)
        );
    }
    out
}

fn beta_of(instance: &str) -> Option<f64> {
    instance
        .strip_prefix("b=")?
        .split('/')
        .next()?
        .parse()
        .ok()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Nondecreasing,
    Nonincreasing,
    Constant,
    Mixed,
}

impl Trend {
    pub fn of(values: &[f64]) -> Self {
        let up = values.windows(2).all(|w| w[1] >= w[0]);
        let down = values.windows(2).all(|w| w[1] <= w[0]);
        match (up, down) {
            (true, true) => Self::Constant,
            (true, false) => Self::Nondecreasing,
            (false, true) => Self::Nonincreasing,
            (false, false) => Self::Mixed,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Nondecreasing => "nondecreasing",
            Self::Nonincreasing => "nonincreasing",
            Self::Constant => "constant",
            Self::Mixed => "not monotone",
        }
    }
}

/// Whitespace-separated columns `beta quantity lhs rhs`, grouped by
/// series and sorted by beta, with a trend comment per series.
pub fn plot_data(rows: &[ParsedRow]) -> String {
    let mut series: BTreeMap<String, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for r in rows {
        if let Some(b) = beta_of(&r.instance_id) {
            let rest = r.instance_id.split_once('/').map_or("", |(_, t)| t);
            let key = if rest.is_empty() {
                r.quantity.clone()
            } else {
                format!("{}[{rest}]", r.quantity)
            };
            series.entry(key.replace(' ', "_")).or_default().push((b, r.lhs, r.rhs));
        }
    }
    let mut out = String::from("# beta quantity lhs rhs\n");
    for (q, mut pts) in series {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let lhs: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let _ = writeln!(out, "# {q}: {}", Trend::of(&lhs).name());
        for (b, l, r) in pts {
            let _ = writeln!(out, "{} {q} {} {}", num(b), num(l), num(r));
        }
    }
    out
}

pub fn run(files: &[PathBuf], plot: Option<&Path>) -> CliResult<String> {
    let mut sums = Vec::new();
    let mut all = Vec::new();
    for f in files {
        let rows = parse_file(f)?;
        sums.push(summarize(&f.display().to_string(), &rows));
        all.extend(rows);
    }
    if let Some(p) = plot {
        std::fs::write(p, plot_data(&all)).map_err(io_err(p))?;
    }
    Ok(summary_table(&sums))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "# run-config: {}\n\
instance_id,quantity,lhs,rhs,abs_diff,slack,pass,runtime_ms\n\
b=0.2,tau,1e0,1e0,0e0,0e0,true,1.0\n\
b=0.1,tau,5e-1,5e-1,0e0,0e0,true,1.0\n\
b=0.3,tau,2e0,1e0,1e0,-1e0,false,1.0\n\
i-1,ghs-strong-half,1e0,0e0,1e0,-1e0,n/a,1.0\n";

    #[test]
    fn summary_counts() {
        let rows = parse_text(GOOD, Path::new("a.csv")).unwrap();
        let s = summarize("a", &rows);
        assert_eq!((s.rows, s.passed, s.failed, s.reported), (4, 2, 1, 1));
        assert_eq!(s.max_abs_diff, 1.0);
        assert_eq!(s.min_slack, -1.0);
    }

    #[test]
    fn malformed_row_names_line() {
        let bad = GOOD.replace("b=0.1,tau,5e-1", "b=0.1,tau,five");
        match parse_text(&bad, Path::new("a.csv")) {
            Err(CliError::Report { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let short = GOOD.replace(",true,1.0\nb=0.1", "\nb=0.1");
        assert!(matches!(parse_text(&short, Path::new("a.csv")), Err(CliError::Report { line: 3, .. })));
    }

    #[test]
    fn plot_trend() {
        let rows = parse_text(GOOD, Path::new("a.csv")).unwrap();
        let p = plot_data(&rows);
        assert!(p.contains("# tau: nondecreasing"));
        let first = p.lines().find(|l| !l.starts_with('#')).unwrap();
        assert!(first.starts_with("1.0000000000000001e-1 tau"));
        assert_eq!(Trend::of(&[1.0, 0.5, 0.7]), Trend::Mixed);
    }

    #[test]
    fn empty_summary() {
        assert_eq!(summary_table(&[]).lines().count(), 1);
    }
}
