//! Text formats shared by the solvers and the command line.

use std::io::Write;

/// 17 significant digits in scientific notation, round-trip exact.
pub fn csv_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header and rows, each terminated by a single LF.
pub fn write_lines<W, I>(mut out: W, header: &str, rows: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = String>,
{
    out.write_all(header.as_bytes())?;
    out.write_all(b"\n")?;
    for row in rows {
        out.write_all(row.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
