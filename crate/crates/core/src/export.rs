//! Number formatting shared by the CSV emitters.

use std::io::Write;

use crate::error::Result;

/// Scientific notation with 17 significant digits; parses back to the same
/// `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_row<W: Write + ?Sized>(w: &mut W, fields: &[String]) -> Result<()> {
    writeln!(w, "{}", fields.join(","))?;
    Ok(())
}
