//! Plain CSV output with shortest round-trip number formatting.

use std::io::{self, BufRead, Write};

use crate::dynamics::Trajectory;
use crate::scalar::Real;

pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "a", "b", "ell", "lambda", "slope_a", "slope_b", "energy"];

/// Shortest decimal string that parses back to exactly `x`.
pub fn format_value<T: Real>(x: T) -> String {
    let mag = x.abs();
    if mag == T::zero() || !x.is_finite() || (mag >= T::lit(1e-4) && mag < T::lit(1e15)) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Writes `# key = value` provenance lines.
pub fn write_comments<W: Write>(w: &mut W, lines: &[(String, String)]) -> io::Result<()> {
    for (k, v) in lines {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

pub fn write_rows<W, T, R>(w: &mut W, header: &[&str], rows: impl IntoIterator<Item = R>) -> io::Result<()>
where
    W: Write,
    T: Real,
    R: AsRef<[T]>,
{
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let row = row.as_ref();
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_trajectory<W: Write, T: Real>(w: &mut W, traj: &Trajectory<T>) -> io::Result<()> {
    let rows = traj
        .samples
        .iter()
        .map(|s| [s.t, s.a, s.b, s.ell, s.lambda, s.slope_a, s.slope_b, s.energy]);
    write_rows(w, &TRAJECTORY_HEADER, rows)
}

/// Parsed table: header plus numeric rows. Comment lines are skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn read_table<R: BufRead>(r: R) -> io::Result<Table> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        match &header {
            None => header = Some(line.split(',').map(|s| s.trim().to_string()).collect()),
            Some(h) => {
                let row = line
                    .split(',')
                    .map(|c| c.trim().parse::<f64>().map_err(|e| bad(format!("line {}: {e}", n + 1))))
                    .collect::<io::Result<Vec<_>>>()?;
                if row.len() != h.len() {
                    return Err(bad(format!("line {}: {} fields, expected {}", n + 1, row.len(), h.len())));
                }
                rows.push(row);
            }
        }
    }
    let header = header.ok_or_else(|| bad("missing header".into()))?;
    Ok(Table { header, rows })
}
