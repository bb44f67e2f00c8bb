//! Trajectory rows: `time x y z roll pitch yaw`, angles in radians.

use std::io::Write;

use super::ascii::format_sig9;
use crate::survey::TrajectoryRecord;

pub fn write_trajectory<W: Write>(out: &mut W, records: &[TrajectoryRecord]) -> std::io::Result<()> {
    writeln!(out, "# time x y z roll pitch yaw")?;
    for r in records {
        let row = r.to_row().map(format_sig9);
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raycast::Vec3;

    #[test]
    fn rows() {
        let recs: Vec<TrajectoryRecord> = (0..3)
            .map(|k| TrajectoryRecord {
                time: k as f64 * 0.1,
                position: Vec3::new(1.0, 2.0, 3.0),
                roll: 0.0,
                pitch: 0.0,
                yaw: 0.5,
            })
            .collect();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "0.1 1 2 3 0 0 0.5");
    }
}
