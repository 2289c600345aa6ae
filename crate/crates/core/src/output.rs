//! Text formatting shared by every CSV writer.

use std::io::Write;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits in scientific notation; infinities as `inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

/// Inverse of [`fmt_f64`].
pub fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        other => other.parse().ok(),
    }
}

/// First line of every output file.
pub fn provenance_line(config_json: &str) -> String {
    format!("revivals {VERSION} config={config_json}")
}

/// Writes comment lines followed by a CSV header and rows of cells.
pub fn write_table<W: Write>(
    mut out: W,
    preamble: &[String],
    header: &str,
    rows: impl IntoIterator<Item = Vec<String>>,
) -> std::io::Result<()> {
    for line in preamble {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
        for x in [0.1, 1.0 / 3.0, 2853.5315471415443, -1e-300, 6.02e23] {
            assert_eq!(parse_f64(&fmt_f64(x)), Some(x));
        }
        assert_eq!(parse_f64("inf"), Some(f64::INFINITY));
    }
}
