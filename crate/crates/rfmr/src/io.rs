//! Output formatting: round-trip-safe numbers, CSV layouts, atomic writes.
//!
//! Every number leaving the library goes through `{:.16e}` — 17 significant
//! digits, enough to reconstruct the exact double — so artifacts can be
//! diffed bitwise across runs and re-parsed without loss. Files are written
//! to a temporary in the destination directory and renamed into place;
//! a failing command never leaves a partial artifact behind.

use crate::homotopy::PathTrace;
use crate::simulate::Trajectory;
use serde::Serialize;
use std::io::{self, Write};
use std::path::Path;

/// Version tag carried by every JSON artifact.
pub const SCHEMA_VERSION: u64 = 1;

/// Formats a double with 17 significant digits (round-trip exact).
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON serialization with all doubles in the 17-significant-digit format.
pub fn json_g17<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, G17Formatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

struct G17Formatter;

impl serde_json::ser::Formatter for G17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// CSV rendering of a path trace: `t,e_1,...,e_n,residual`, one row per
/// accepted node.
pub fn trace_csv(trace: &PathTrace) -> String {
    let n = trace.lam_end.len();
    let mut out = String::from("t");
    for i in 1..=n {
        out.push_str(&format!(",e_{i}"));
    }
    out.push_str(",residual\n");
    for node in &trace.nodes {
        out.push_str(&fmt_g17(node.t));
        for &v in node.state.as_slice() {
            out.push(',');
            out.push_str(&fmt_g17(v));
        }
        out.push(',');
        out.push_str(&fmt_g17(node.residual_norm));
        out.push('\n');
    }
    out
}

/// CSV rendering of a trajectory: `t,x_1,...,x_n`, one row per recorded
/// step.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.lam.len();
    let mut out = String::from("t");
    for i in 1..=n {
        out.push_str(&format!(",x_{i}"));
    }
    out.push('\n');
    for (t, state) in traj.times.iter().zip(&traj.states) {
        out.push_str(&fmt_g17(*t));
        for &v in state.as_slice() {
            out.push(',');
            out.push_str(&fmt_g17(v));
        }
        out.push('\n');
    }
    out
}

/// Writes `bytes` to `path` atomically: a temporary file in the destination
/// directory is renamed over the target, so readers never observe a partial
/// file and failures leave no artifact.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
