//! CSV form of a sweep table.
//!
//! Reals are written with 17 significant digits so that parsing a file gives
//! back the exact values. Absent values are empty cells.

use std::io::{Read, Write};

use anyhow::{bail, Context};

use crate::sweep::{CurvePoint, McPoint};

pub const HEADER: [&str; 8] = [
    "curve",
    "sweep_db",
    "analytic",
    "asymptotic",
    "mc_estimate",
    "mc_stderr",
    "trials",
    "status",
];

pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_real(v: Option<f64>) -> String {
    v.map(format_real).unwrap_or_default()
}

pub fn write_csv<W: Write>(out: W, rows: &[CurvePoint]) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.curve.clone(),
            format_real(r.sweep_db),
            opt_real(r.analytic),
            opt_real(r.asymptotic),
            opt_real(r.mc.map(|m| m.estimate)),
            opt_real(r.mc.map(|m| m.stderr)),
            r.mc.map(|m| m.trials.to_string()).unwrap_or_default(),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[CurvePoint]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

fn parse_opt<T: std::str::FromStr>(cell: &str, line: usize) -> anyhow::Result<Option<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    if cell.is_empty() {
        Ok(None)
    } else {
        cell.parse()
            .map(Some)
            .with_context(|| format!("line {line}: bad value {cell:?}"))
    }
}

pub fn read_csv<R: Read>(input: R) -> anyhow::Result<Vec<CurvePoint>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().ne(HEADER) {
        bail!("unexpected header {:?}", rdr.headers()?);
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let mc_fields = (
            parse_opt::<f64>(&rec[4], line)?,
            parse_opt::<f64>(&rec[5], line)?,
            parse_opt::<u64>(&rec[6], line)?,
        );
        let mc = match mc_fields {
            (Some(estimate), Some(stderr), Some(trials)) => Some(McPoint {
                estimate,
                stderr,
                trials,
            }),
            (None, None, None) => None,
            _ => bail!("line {line}: MC fields must be all present or all empty"),
        };
        rows.push(CurvePoint {
            curve: rec[0].to_string(),
            sweep_db: rec[1]
                .parse()
                .with_context(|| format!("line {line}: bad sweep_db"))?,
            analytic: parse_opt(&rec[2], line)?,
            asymptotic: parse_opt(&rec[3], line)?,
            mc,
            status: rec[7].to_string(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<CurvePoint> {
        vec![
            CurvePoint {
                curve: "TAS/MRC, k=0.15".into(),
                sweep_db: 2.0,
                analytic: Some(0.1 + 0.2),
                asymptotic: None,
                mc: Some(McPoint {
                    estimate: 0.3004,
                    stderr: 4.58e-4,
                    trials: 1_000_000,
                }),
                status: "closed_form".into(),
            },
            CurvePoint {
                curve: "b".into(),
                sweep_db: 1.0 / 3.0,
                analytic: None,
                asymptotic: Some(f64::MIN_POSITIVE),
                mc: None,
                status: "error: x".into(),
            },
        ]
    }

    #[test]
    fn round_trip_is_exact() {
        let text = to_csv_string(&rows());
        assert!(text.starts_with(
            "curve,sweep_db,analytic,asymptotic,mc_estimate,mc_stderr,trials,status\n"
        ));
        assert!(!text.contains('\r'));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), rows());
    }

    #[test]
    fn partial_mc_rejected() {
        let text = "curve,sweep_db,analytic,asymptotic,mc_estimate,mc_stderr,trials,status\na,1,0.5,,0.5,,,ok\n";
        assert!(read_csv(text.as_bytes()).is_err());
    }
}
