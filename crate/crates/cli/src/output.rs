//! Sweep output as CSV (with `#` header lines) or an equivalent JSON document.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::CliError;

pub const CSV_COLUMNS: &str = "lambda,gamma_mean,gamma_stderr,n,R,classification,near_critical";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub gamma_mean: f64,
    pub gamma_stderr: f64,
    pub n: usize,
    #[serde(rename = "R")]
    pub realizations: usize,
    /// Regime label, or `unclassified` when the classifier was not run.
    pub classification: String,
    pub near_critical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub rows: Vec<SweepRow>,
}

/// 17 significant digits, which round-trips every double.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(w: &mut dyn Write, report: &Report) -> std::io::Result<()> {
    writeln!(w, "# ulyap {}", report.command)?;
    writeln!(w, "# seed = {}", report.seed)?;
    let config = serde_json::to_string(&report.config).expect("config serializes");
    writeln!(w, "# config = {config}")?;
    writeln!(w, "{CSV_COLUMNS}")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            float(r.lambda),
            float(r.gamma_mean),
            float(r.gamma_stderr),
            r.n,
            r.realizations,
            r.classification,
            r.near_critical
        )?;
    }
    Ok(())
}

pub fn write_json(w: &mut dyn Write, report: &Report) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, report)?;
    writeln!(w)
}

pub fn write_report(w: &mut dyn Write, report: &Report, format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(w, report),
        Format::Json => write_json(w, report),
    }
}

fn bad(line: usize, what: &str) -> CliError {
    CliError::Parse(format!("line {line}: {what}"))
}

/// Reads back a CSV written by [`write_csv`]. Header comments are skipped.
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>, CliError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#'));
    match lines.next() {
        Some((_, header)) if header == CSV_COLUMNS => {}
        Some((i, _)) => return Err(bad(i + 1, "unexpected column header")),
        None => return Err(CliError::Parse("empty file".into())),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(bad(i + 1, "expected 7 fields"));
            }
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, "bad float"));
            let int = |s: &str| s.parse::<usize>().map_err(|_| bad(i + 1, "bad integer"));
            Ok(SweepRow {
                lambda: real(f[0])?,
                gamma_mean: real(f[1])?,
                gamma_stderr: real(f[2])?,
                n: int(f[3])?,
                realizations: int(f[4])?,
                classification: f[5].to_string(),
                near_critical: f[6].parse().map_err(|_| bad(i + 1, "bad flag"))?,
            })
        })
        .collect()
}

pub fn parse_json(text: &str) -> Result<Report, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(rows: Vec<SweepRow>) -> Report {
        Report { command: "sweep".into(), seed: 3, config: RunConfig::default(), rows }
    }

    fn row_strategy() -> impl Strategy<Value = SweepRow> {
        (any::<f64>(), any::<f64>(), 0.0..1e3f64, 1usize..1_000_000, 2usize..10_000, any::<bool>()).prop_map(
            |(lambda, gamma_mean, gamma_stderr, n, realizations, near_critical)| SweepRow {
                lambda,
                gamma_mean,
                gamma_stderr,
                n,
                realizations,
                classification: "positive".into(),
                near_critical,
            },
        )
    }

    proptest! {
        #[test]
        fn csv_round_trips_bit_exactly(rows in prop::collection::vec(row_strategy(), 1..8)) {
            let rep = report(rows.clone());
            let mut buf = Vec::new();
            write_csv(&mut buf, &rep).unwrap();
            let back = parse_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
            prop_assert_eq!(back.len(), rows.len());
            for (a, b) in back.iter().zip(&rows) {
                prop_assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
                prop_assert!(a.gamma_mean.to_bits() == b.gamma_mean.to_bits() || (a.gamma_mean.is_nan() && b.gamma_mean.is_nan()));
                prop_assert_eq!(a.gamma_stderr.to_bits(), b.gamma_stderr.to_bits());
                prop_assert_eq!(a.n, b.n);
                prop_assert_eq!(a.near_critical, b.near_critical);
            }
        }
    }

    #[test]
    fn json_round_trips() {
        let rep = report(vec![SweepRow {
            lambda: 0.1 + 0.2,
            gamma_mean: 1.0 / 3.0,
            gamma_stderr: 1e-300,
            n: 10,
            realizations: 4,
            classification: "unclassified".into(),
            near_critical: false,
        }]);
        let mut buf = Vec::new();
        write_json(&mut buf, &rep).unwrap();
        assert_eq!(parse_json(std::str::from_utf8(&buf).unwrap()).unwrap(), rep);
    }

    #[test]
    fn csv_header_echoes_seed_and_config() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &report(vec![])).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# ulyap sweep\n# seed = 3\n# config = {"));
        assert!(text.contains(CSV_COLUMNS));
    }
}
