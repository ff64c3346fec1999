//! Strict unit-suffixed literals for command-line flags.
//!
//! Durations take `ps`, `ns`, or `us`; lengths take `mm` or `m`; frequencies
//! take `hz`, `khz`, or `mhz`. Bare numbers are rejected so a forgotten
//! suffix can never silently change scale.

fn split_suffix(text: &str) -> Result<(f64, String), String> {
    let trimmed = text.trim();
    let split = trimmed
        .char_indices()
        .find(|(_, c)| c.is_ascii_alphabetic())
        .map(|(i, _)| i)
        .ok_or_else(|| format!("'{trimmed}' has no unit suffix"))?;
    let (num, unit) = trimmed.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("'{num}' is not a number in '{trimmed}'"))?;
    Ok((value, unit.trim().to_ascii_lowercase()))
}

/// Parse a duration literal into seconds.
pub fn parse_duration_s(text: &str) -> Result<f64, String> {
    let (value, unit) = split_suffix(text)?;
    let scale = match unit.as_str() {
        "ps" => 1e-12,
        "ns" => 1e-9,
        "us" => 1e-6,
        other => {
            return Err(format!(
                "unknown duration unit '{other}' in '{text}' (use ps, ns, or us)"
            ))
        }
    };
    Ok(value * scale)
}

/// Parse a length literal into meters.
pub fn parse_length_m(text: &str) -> Result<f64, String> {
    let (value, unit) = split_suffix(text)?;
    let scale = match unit.as_str() {
        "mm" => 1e-3,
        "m" => 1.0,
        other => {
            return Err(format!(
                "unknown length unit '{other}' in '{text}' (use mm or m)"
            ))
        }
    };
    Ok(value * scale)
}

/// Parse a frequency literal into hertz.
pub fn parse_frequency_hz(text: &str) -> Result<f64, String> {
    let (value, unit) = split_suffix(text)?;
    let scale = match unit.as_str() {
        "hz" => 1.0,
        "khz" => 1e3,
        "mhz" => 1e6,
        other => {
            return Err(format!(
                "unknown frequency unit '{other}' in '{text}' (use hz, khz, or mhz)"
            ))
        }
    };
    Ok(value * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn durations() {
        assert_relative_eq!(parse_duration_s("20ps").unwrap(), 20e-12);
        assert_relative_eq!(parse_duration_s("156.9ns").unwrap(), 156.9e-9);
        assert_relative_eq!(parse_duration_s("8 us").unwrap(), 8e-6);
        assert_relative_eq!(parse_duration_s("-1ps").unwrap(), -1e-12);
        assert!(parse_duration_s("20").is_err());
        assert!(parse_duration_s("20mm").is_err());
        assert!(parse_duration_s("ps").is_err());
    }

    #[test]
    fn lengths() {
        assert_relative_eq!(parse_length_m("90.08mm").unwrap(), 0.09008);
        assert_relative_eq!(parse_length_m("179.2m").unwrap(), 179.2);
        assert!(parse_length_m("90.08").is_err());
        assert!(parse_length_m("90ps").is_err());
    }

    #[test]
    fn frequencies() {
        assert_relative_eq!(parse_frequency_hz("125khz").unwrap(), 125e3);
        assert_relative_eq!(parse_frequency_hz("1.5MHz").unwrap(), 1.5e6);
        assert!(parse_frequency_hz("125").is_err());
    }
}
