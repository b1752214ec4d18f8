//! CSV helpers shared by every table-shaped output.
//!
//! Numbers are written with 17 significant digits in scientific notation,
//! which round-trips any `f64` exactly, with `.` as decimal separator.

use std::io::{self, Write};

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Writes a header line followed by rows of already formatted cells.
pub fn write_csv<W, I, R>(mut out: W, header: &[&str], rows: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = R>,
    R: AsRef<[String]>,
{
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.as_ref().join(","))?;
    }
    Ok(())
}
