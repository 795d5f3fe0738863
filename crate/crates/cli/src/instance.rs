//! Plain-text problem instances.
//!
//! Format: first line `m n`, then `m` lines of `n` whitespace-separated
//! matrix entries, then one line with the `m` observation entries. All values
//! are decimal floats with `.` separators.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fracprox_core::ProblemInstance;

/// Parses an instance from its text representation.
pub fn parse_instance(text: &str) -> Result<ProblemInstance, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty instance file")?;
    let mut dims = header.split_whitespace();
    let m: usize = dims
        .next()
        .ok_or("missing m in header")?
        .parse()
        .map_err(|e| format!("bad m in header: {e}"))?;
    let n: usize = dims
        .next()
        .ok_or("missing n in header")?
        .parse()
        .map_err(|e| format!("bad n in header: {e}"))?;
    if dims.next().is_some() {
        return Err("header must be exactly `m n`".into());
    }

    let mut data = Vec::with_capacity(m * n);
    for i in 0..m {
        let line = lines.next().ok_or_else(|| format!("missing matrix row {}", i + 1))?;
        let row: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
        let row = row.map_err(|e| format!("bad value in matrix row {}: {e}", i + 1))?;
        if row.len() != n {
            return Err(format!(
                "matrix row {} has {} entries, expected {n}",
                i + 1,
                row.len()
            ));
        }
        data.extend_from_slice(&row);
    }

    let obs_line = lines.next().ok_or("missing observation line")?;
    let observation: Result<Vec<f64>, _> =
        obs_line.split_whitespace().map(str::parse).collect();
    let observation = observation.map_err(|e| format!("bad value in observation line: {e}"))?;
    if observation.len() != m {
        return Err(format!(
            "observation line has {} entries, expected {m}",
            observation.len()
        ));
    }
    if lines.next().is_some() {
        return Err("trailing content after observation line".into());
    }

    ProblemInstance::new(m, n, data, observation).map_err(|e| e.to_string())
}

/// Reads an instance from a file.
pub fn read_instance(path: &Path) -> Result<ProblemInstance, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_instance(&text)
}

/// Renders an instance in the text format.
pub fn render_instance(p: &ProblemInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", p.rows(), p.cols());
    for i in 0..p.rows() {
        let row: Vec<String> = p.row(i).iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    let obs: Vec<String> = p.observation().iter().map(|v| format!("{v}")).collect();
    let _ = writeln!(out, "{}", obs.join(" "));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_small_instance() {
        let text = "2 3\n1 0 0.5\n0 1 -2\n3 4\n";
        let p = parse_instance(text).unwrap();
        assert_eq!(p.rows(), 2);
        assert_eq!(p.cols(), 3);
        assert_eq!(p.row(1), &[0.0, 1.0, -2.0]);
        assert_eq!(p.observation(), &[3.0, 4.0]);
    }

    #[test]
    fn round_trips_through_render() {
        let text = "2 4\n1 0 0 0\n0 1 0 0\n1 2\n";
        let p = parse_instance(text).unwrap();
        let q = parse_instance(&render_instance(&p)).unwrap();
        assert_eq!(p.matrix_data(), q.matrix_data());
        assert_eq!(p.observation(), q.observation());
    }

    #[test]
    fn reports_shape_errors() {
        assert!(parse_instance("").is_err());
        assert!(parse_instance("2 2\n1 0\n0 1\n1\n").is_err());
        assert!(parse_instance("2 2\n1 0\n0\n1 2\n").is_err());
        assert!(parse_instance("2 2\n1 0\n0 1\n1 2\nextra\n").is_err());
        // m > n is rejected by the model layer
        assert!(parse_instance("2 1\n1\n0\n1 2\n").is_err());
    }
}
