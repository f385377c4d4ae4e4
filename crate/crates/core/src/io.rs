//! Text formats for observations and grouping schemes.
//!
//! Observation CSV: header `time,status`, one subject per row.
//! Scheme file: one cell per line, `lower,upper,representative,closure` with
//! closure in `{oo, oc, co, cc}`. Blank lines and `#` comments are skipped in
//! both formats.

use std::fmt::Write as _;
use std::io::BufRead;

use crate::data::{Closure, GroupingScheme, Interval, Observation};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = match field {
        "inf" | "+inf" | "Inf" => f64::INFINITY,
        "-inf" | "-Inf" => f64::NEG_INFINITY,
        _ => field
            .parse()
            .map_err(|_| parse_err(line, format!("cannot parse {what} '{field}' as a number")))?,
    };
    if v.is_nan() {
        return Err(parse_err(line, format!("{what} is NaN")));
    }
    Ok(v)
}

fn content_lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.to_string())))
            }
        }
    })
}

pub fn read_observations(reader: impl BufRead) -> Result<Vec<Observation>> {
    Ok(read_numbered_observations(reader)?.into_iter().map(|(_, o)| o).collect())
}

/// Observations paired with their 1-based line numbers in the input.
pub fn read_numbered_observations(reader: impl BufRead) -> Result<Vec<(usize, Observation)>> {
    let mut lines = content_lines(reader);
    let (hline, header) = lines.next().transpose()?.ok_or(Error::NoObservations)?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["time", "status"] {
        return Err(parse_err(hline, format!("expected header 'time,status', found '{header}'")));
    }
    let mut out = Vec::new();
    for item in lines {
        let (line, text) = item?;
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(parse_err(line, format!("expected 2 fields, found {}", fields.len())));
        }
        let time = parse_f64(fields[0], line, "time")?;
        if !time.is_finite() {
            return Err(parse_err(line, "time must be finite"));
        }
        let status: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(line, format!("status '{}' is not a nonnegative integer", fields[1])))?;
        out.push((line, Observation::new(time, status)));
    }
    if out.is_empty() {
        return Err(Error::NoObservations);
    }
    Ok(out)
}

pub fn write_observations(observations: &[Observation]) -> String {
    let mut s = String::from("time,status\n");
    for o in observations {
        writeln!(s, "{},{}", o.time, o.status).expect("writing to a String");
    }
    s
}

pub fn read_scheme(reader: impl BufRead) -> Result<GroupingScheme> {
    let mut cells = Vec::new();
    for item in content_lines(reader) {
        let (line, text) = item?;
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(parse_err(line, format!("expected 4 fields, found {}", fields.len())));
        }
        let lower = parse_f64(fields[0], line, "lower bound")?;
        let upper = parse_f64(fields[1], line, "upper bound")?;
        let rep = parse_f64(fields[2], line, "representative")?;
        let closure = Closure::from_code(fields[3])
            .ok_or_else(|| parse_err(line, format!("unknown closure '{}'", fields[3])))?;
        cells.push((Interval::new(lower, upper, closure), rep));
    }
    GroupingScheme::new(cells)
}

pub fn write_scheme(scheme: &GroupingScheme) -> String {
    let mut s = String::new();
    for (iv, rep) in scheme.intervals().iter().zip(scheme.representatives()) {
        writeln!(s, "{},{},{},{}", iv.lower, iv.upper, rep, iv.closure.code())
            .expect("writing to a String");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_observations() {
        let text = "time,status\n2.0,1\n# comment\n\n2,0\n3.5,2\n";
        let obs = read_observations(text.as_bytes()).unwrap();
        assert_eq!(obs, vec![
            Observation::new(2.0, 1),
            Observation::new(2.0, 0),
            Observation::new(3.5, 2)
        ]);
    }

    #[test]
    fn malformed_rows_report_line() {
        let err = read_observations("time,status\n1.0,1\n1.0,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_observations("t,s\n1,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = read_observations("time,status\n1,-1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = read_observations("time,status\n1,1,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn scheme_round_trip() {
        let text = "25,30,27.5,oc\n30,35,32.5,oc\n35,36,35.5,oc\n";
        let scheme = read_scheme(text.as_bytes()).unwrap();
        assert_eq!(scheme.len(), 3);
        assert_eq!(scheme.round(30.7).unwrap(), 32.5);
        assert_eq!(read_scheme(write_scheme(&scheme).as_bytes()).unwrap(), scheme);
    }

    #[test]
    fn scheme_errors() {
        let err = read_scheme("25,30,27.5,xx\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = read_scheme("25,30,27.5,oc\n29,35,32.5,oc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::InvalidScheme(_)));
    }
}
