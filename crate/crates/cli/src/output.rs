//! CSV curves, JSON threshold reports and run manifests.

use std::io::{Read, Write};

use qread_core::experiment::{CurvePoint, ThresholdReport};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CURVE_HEADER: [&str; 6] = ["n_bar", "p_err", "ci_low", "ci_high", "errors", "trials"];

/// 17 significant digits: enough for every f64 to read back unchanged.
pub fn fmt_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    n_bar: String,
    p_err: String,
    ci_low: String,
    ci_high: String,
    errors: u64,
    trials: u64,
}

pub fn write_curve_csv<W: Write>(out: W, points: &[CurvePoint]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    // the header must appear even with no rows
    w.write_record(CURVE_HEADER)?;
    for p in points {
        w.write_record([
            fmt_sig17(p.n_bar),
            fmt_sig17(p.p_hat),
            fmt_sig17(p.ci_low),
            fmt_sig17(p.ci_high),
            p.errors.to_string(),
            p.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum CurveParseError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
    #[error("row {row}: bad number {text:?}")]
    Number { row: usize, text: String },
}

pub fn read_curve_csv<R: Read>(input: R) -> Result<Vec<CurvePoint>, CurveParseError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CURVE_HEADER {
        return Err(CurveParseError::Header(header));
    }
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<CurveRow>().enumerate() {
        let row = row?;
        let num = |text: &str| {
            text.parse::<f64>().map_err(|_| CurveParseError::Number {
                row: i + 1,
                text: text.to_string(),
            })
        };
        out.push(CurvePoint {
            n_bar: num(&row.n_bar)?,
            p_hat: num(&row.p_err)?,
            ci_low: num(&row.ci_low)?,
            ci_high: num(&row.ci_high)?,
            errors: row.errors,
            trials: row.trials,
        });
    }
    Ok(out)
}

/// SHA-256 of the manifest's key/value lines; comment lines (version,
/// timestamp) do not count.
pub fn manifest_hash(manifest: &str) -> String {
    let mut h = Sha256::new();
    for line in manifest.lines().filter(|l| !l.trim_start().starts_with('#')) {
        h.update(line.as_bytes());
        h.update(b"\n");
    }
    format!("{:x}", h.finalize())
}

/// Manifest text: a comment header then the resolved key/value body.
pub fn manifest_text(body: &str, created_unix: u64) -> String {
    format!(
        "# qread run manifest\n# version = {}\n# created_unix = {created_unix}\n{body}",
        env!("CARGO_PKG_VERSION")
    )
}

#[derive(Debug, Serialize)]
pub struct ThresholdJson<'a> {
    pub baseline: &'a str,
    pub threshold: Option<f64>,
    pub reason: Option<&'a str>,
    pub bracket: Option<[f64; 2]>,
    pub left_censored: bool,
    pub low_resolution: bool,
    pub method: &'a str,
    pub metric: &'a str,
    pub receiver: &'a str,
    pub code: String,
    pub rate: f64,
    pub manifest_sha256: String,
}

impl<'a> ThresholdJson<'a> {
    pub fn new(
        report: &'a ThresholdReport,
        metric: &'a str,
        receiver: &'a str,
        code: String,
        rate: f64,
        manifest: &str,
    ) -> Self {
        Self {
            baseline: report.baseline.name(),
            threshold: report.threshold_n_bar,
            reason: report.reason.as_deref(),
            bracket: report.bracket.map(|(a, b)| [a, b]),
            left_censored: report.left_censored,
            low_resolution: report.low_resolution,
            method: &report.method,
            metric,
            receiver,
            code,
            rate,
            manifest_sha256: manifest_hash(manifest),
        }
    }
}

pub fn write_threshold_json<W: Write>(mut out: W, report: &ThresholdJson<'_>) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use qread_core::baselines::BaselineKind;
    use qread_core::experiment::CurvePoint;

    fn sample() -> Vec<CurvePoint> {
        vec![
            CurvePoint::from_counts(0.1, 17, 300, 5),
            CurvePoint::from_counts(1.0 / 3.0, 0, 300, 5),
            CurvePoint::from_counts(2.75, 1499, 300, 5),
        ]
    }

    #[test]
    fn empty_curve_is_header_only() {
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n_bar,p_err,ci_low,ci_high,errors,trials\n");
    }

    #[test]
    fn one_point_is_two_lines() {
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &sample()[..1]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().starts_with("1.0000000000000001e-1,"));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let pts = sample();
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &pts).unwrap();
        assert_eq!(read_curve_csv(buf.as_slice()).unwrap(), pts);
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(matches!(
            read_curve_csv("a,b\n1,2\n".as_bytes()),
            Err(CurveParseError::Header(_))
        ));
    }

    #[test]
    fn hash_ignores_comments() {
        let a = manifest_text("seed = 1\n", 10);
        let b = manifest_text("seed = 1\n", 99);
        assert_eq!(manifest_hash(&a), manifest_hash(&b));
        assert_ne!(manifest_hash(&a), manifest_hash("seed = 2\n"));
        assert_eq!(manifest_hash(&a).len(), 64);
    }

    #[test]
    fn null_threshold_json() {
        let report = ThresholdReport {
            baseline: BaselineKind::MinOfBoth,
            threshold_n_bar: None,
            bracket: None,
            left_censored: false,
            low_resolution: false,
            method: "m".into(),
            reason: Some("never crosses".into()),
        };
        let j = ThresholdJson::new(&report, "info-bit-error-rate", "dolinar", "RS".into(), 0.1, "seed = 1\n");
        let mut buf = Vec::new();
        write_threshold_json(&mut buf, &j).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert!(v["threshold"].is_null());
        assert_eq!(v["reason"], "never crosses");
        assert_eq!(v["baseline"], "min-of-both");
        assert_eq!(v["manifest_sha256"].as_str().unwrap().len(), 64);
    }
}
