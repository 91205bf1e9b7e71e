//! Run reports and their JSON / CSV serialisation.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so that every
//! `f64` round-trips; non-finite values become `null`. Timings live under
//! the top-level `timing` key and are the only part of a report that varies
//! between identical runs.

use std::io::{self, Write};

use serde::ser::Serialize;
use serde::Serialize as DeriveSerialize;

/// One pass/fail check with its worst observed value.
#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    /// The bound it was compared against.
    pub threshold: f64,
    /// Items examined.
    pub count: usize,
    /// Items that failed.
    pub failures: usize,
}

impl Check {
    /// Passes iff `worst ≤ threshold` and no item failed.
    pub fn at_most(name: impl Into<String>, worst: f64, threshold: f64, count: usize, failures: usize) -> Self {
        Self {
            name: name.into(),
            passed: failures == 0 && worst <= threshold && !worst.is_nan(),
            worst,
            threshold,
            count,
            failures,
        }
    }

    /// Passes iff no item failed; `worst` is informational.
    pub fn counted(name: impl Into<String>, worst: f64, threshold: f64, count: usize, failures: usize) -> Self {
        Self {
            name: name.into(),
            passed: failures == 0 && count > 0,
            worst,
            threshold,
            count,
            failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct Histogram {
    pub lower: f64,
    pub upper: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub const BINS: usize = 20;

    pub fn of(values: &[f64]) -> Self {
        let lower = values.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0; Self::BINS];
        let width = (upper - lower) / Self::BINS as f64;
        for v in values {
            let bin = if width > 0.0 {
                (((v - lower) / width) as usize).min(Self::BINS - 1)
            } else {
                0
            };
            counts[bin] += 1;
        }
        Self { lower, upper, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Distribution of `Q` over one regime.
#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct QSummary {
    pub label: String,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    /// Fraction of frames with `|Q|` within the equality tolerance.
    pub fraction_at_equality: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Histogram>,
}

impl QSummary {
    pub fn of(label: impl Into<String>, values: &[f64], equality_tolerance: f64, histogram: bool) -> Self {
        let count = values.len();
        let at_eq = values.iter().filter(|q| q.abs() <= equality_tolerance).count();
        Self {
            label: label.into(),
            count,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            fraction_at_equality: if count == 0 { 0.0 } else { at_eq as f64 / count as f64 },
            histogram: histogram.then(|| Histogram::of(values)),
        }
    }
}

/// One row of a spectra table.
#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct SpectrumRow {
    pub label: String,
    pub nodes: usize,
    pub speeds: (f64, f64),
    pub length: f64,
    pub morse_index: usize,
    pub nullity: usize,
    pub lambda_min: f64,
    pub tolerance: f64,
    /// The lowest few eigenvalues.
    pub leading_eigenvalues: Vec<f64>,
    /// `max |H − I|` of the loop holonomy.
    pub holonomy_defect: f64,
    pub asymmetry: f64,
    /// `(μ₆₄ − μ₁₂₈)/(μ₁₂₈ − μ₂₅₆)` for the first eigenvalue above the
    /// index and nullity block, when computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub richardson_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub q_summaries: Vec<QSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub spectra: Vec<SpectrumRow>,
}

impl SuiteReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: true,
            checks: Vec::new(),
            q_summaries: Vec::new(),
            spectra: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct SuiteTiming {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default, DeriveSerialize)]
pub struct Timing {
    pub wall_clock_seconds: f64,
    pub suites: Vec<SuiteTiming>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub spectra: Vec<SuiteTiming>,
}

#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub samples: usize,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
    pub timing: Timing,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, samples: usize) -> Self {
        Self {
            command: command.to_string(),
            seed,
            samples,
            passed: true,
            suites: Vec::new(),
            timing: Timing::default(),
        }
    }

    pub fn push(&mut self, suite: SuiteReport, seconds: f64) {
        self.passed &= suite.passed;
        self.timing.suites.push(SuiteTiming {
            name: suite.name.clone(),
            seconds,
        });
        self.suites.push(suite);
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn write_json<W: Write>(&self, out: W) -> io::Result<()> {
        write_json(self, out)
    }

    /// Long-format CSV: `suite,table,item,metric,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["suite", "table", "item", "metric", "value"])?;
        let mut row = |suite: &str, table: &str, item: &str, metric: &str, value: String| {
            w.write_record([suite, table, item, metric, &value])
        };
        row("", "run", &self.command, "passed", self.passed.to_string())?;
        for s in &self.suites {
            row(&s.name, "suite", "", "passed", s.passed.to_string())?;
            for c in &s.checks {
                row(&s.name, "check", &c.name, "passed", c.passed.to_string())?;
                row(&s.name, "check", &c.name, "worst", fmt_f64(c.worst))?;
                row(&s.name, "check", &c.name, "threshold", fmt_f64(c.threshold))?;
                row(&s.name, "check", &c.name, "count", c.count.to_string())?;
                row(&s.name, "check", &c.name, "failures", c.failures.to_string())?;
            }
            for q in &s.q_summaries {
                row(&s.name, "q_summary", &q.label, "count", q.count.to_string())?;
                row(&s.name, "q_summary", &q.label, "min", fmt_f64(q.min))?;
                row(&s.name, "q_summary", &q.label, "max", fmt_f64(q.max))?;
                row(&s.name, "q_summary", &q.label, "fraction_at_equality", fmt_f64(q.fraction_at_equality))?;
                if let Some(h) = &q.histogram {
                    row(&s.name, "histogram", &q.label, "lower", fmt_f64(h.lower))?;
                    row(&s.name, "histogram", &q.label, "upper", fmt_f64(h.upper))?;
                    for (i, n) in h.counts.iter().enumerate() {
                        row(&s.name, "histogram", &q.label, &format!("bin_{i:02}"), n.to_string())?;
                    }
                }
            }
            for sp in &s.spectra {
                let item = format!("{} N={}", sp.label, sp.nodes);
                row(&s.name, "spectrum", &item, "morse_index", sp.morse_index.to_string())?;
                row(&s.name, "spectrum", &item, "nullity", sp.nullity.to_string())?;
                row(&s.name, "spectrum", &item, "lambda_min", fmt_f64(sp.lambda_min))?;
                row(&s.name, "spectrum", &item, "tolerance", fmt_f64(sp.tolerance))?;
                row(&s.name, "spectrum", &item, "holonomy_defect", fmt_f64(sp.holonomy_defect))?;
                if let Some(r) = sp.richardson_ratio {
                    row(&s.name, "spectrum", &item, "richardson_ratio", fmt_f64(r))?;
                }
                for (i, e) in sp.leading_eigenvalues.iter().enumerate() {
                    row(&s.name, "spectrum", &item, &format!("eigenvalue_{i}"), fmt_f64(*e))?;
                }
            }
        }
        row("", "timing", "", "wall_clock_seconds", fmt_f64(self.timing.wall_clock_seconds))?;
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits, or empty for non-finite values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> io::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SignificantDigits);
    value.serialize(&mut ser).map_err(io::Error::other)?;
    out.write_all(b"\n")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    write_json(value, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_with_17_digits() {
        let values = [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0];
        let text = to_json(&values);
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, values);
        assert!(text.contains("1.0000000000000001e-1"));
        assert_eq!(to_json(&f64::NAN).trim(), "null");
    }

    #[test]
    fn histogram_counts_every_value() {
        let v: Vec<f64> = (0..137).map(|i| -(i as f64).sqrt()).collect();
        assert_eq!(Histogram::of(&v).total(), 137);
        assert_eq!(Histogram::of(&[1.0, 1.0]).total(), 2);
    }

    #[test]
    fn suite_fails_with_any_check() {
        let mut s = SuiteReport::new("x");
        s.push(Check::at_most("a", 1.0, 2.0, 1, 0));
        assert!(s.passed);
        s.push(Check::at_most("b", 3.0, 2.0, 1, 0));
        assert!(!s.passed);
        assert!(!Check::at_most("nan", f64::NAN, 1.0, 1, 0).passed);
    }
}
