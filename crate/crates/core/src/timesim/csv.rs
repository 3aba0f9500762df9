use std::io::{self, Write};

use super::SimTrace;

pub const CSV_HEADER: &str = "t,e,u,y,control_input,reset_flag";

/// Writes the trace with 15 significant digits per value.
pub fn write_csv<W: Write>(trace: &SimTrace, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for k in 0..trace.len() {
        writeln!(
            out,
            "{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{}",
            trace.time[k],
            trace.e[k],
            trace.u[k],
            trace.y[k],
            trace.control_input[k],
            u8::from(trace.reset_flags[k])
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lincore::StateSpace;
    use crate::timesim::{simulate_linear, Signal, SimConfig};

    #[test]
    fn header_and_rows() {
        let tr = simulate_linear(
            &StateSpace::gain(2.0),
            &Signal::sine(1.0, 1.0),
            &SimConfig::per_period(1.0, 20),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&tr, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), tr.len() + 1);
        assert!(lines[1].starts_with("0.00000000000000e0,"));
        let v: f64 = lines[5].split(',').nth(3).unwrap().parse().unwrap();
        assert!((v - tr.y[4]).abs() <= 1e-14 * tr.y[4].abs());
    }
}
