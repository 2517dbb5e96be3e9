//! File outputs. Floats are written with 17 significant digits so that a
//! re-read value is bit-identical to the computed one.

use std::fs;
use std::path::{Path, PathBuf};

use inertial_core::lyapunov::energy_series;
use inertial_core::{ComparisonRow, Trajectory};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const TRAJECTORY_HEADER: [&str; 8] = ["n", "g_x", "g_y", "grad_norm_y", "gap", "E", "delta", "Delta"];
pub const ODE_HEADER: [&str; 4] = ["s", "beta", "n_compared", "sup_distance"];

/// Full-precision float; `NaN` for undefined entries.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("output directory {}: {e}", dir.display())))
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(CliError::io(path))?;
    Ok(csv::Writer::from_writer(file))
}

/// One row per iterate; `E`, `delta` and `Delta` are `NaN` at `n = 0`.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory, lipschitz: f64) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(TRAJECTORY_HEADER)?;
    for (r, e) in traj.records.iter().zip(energy_series(traj, lipschitz)) {
        let (energy, delta, big_delta) = e.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        w.write_record([
            r.n.to_string(),
            fmt_f64(r.g_x),
            fmt_f64(r.g_y),
            fmt_f64(r.grad_norm_y),
            fmt_f64(r.gap),
            fmt_f64(energy),
            fmt_f64(delta),
            fmt_f64(big_delta),
        ])?;
    }
    w.flush().map_err(CliError::io(path))?;
    Ok(())
}

pub fn write_ode_csv(path: &Path, rows: &[ComparisonRow]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(ODE_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.s),
            fmt_f64(r.beta),
            r.n_compared.to_string(),
            fmt_f64(r.sup_distance),
        ])?;
    }
    w.flush().map_err(CliError::io(path))?;
    Ok(())
}

pub fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(CliError::io(path))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(CliError::io(path))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(CliError::io(path))
}

/// Which CSV a plot stub reads.
#[derive(Clone, Copy, Debug)]
pub enum PlotKind {
    Trajectory,
    Summary,
    OdeCompare,
}

/// Writes a small matplotlib script next to the CSV it plots.
pub fn write_plot_stub(dir: &Path, kind: PlotKind) -> CliResult<PathBuf> {
    let (name, body) = match kind {
        PlotKind::Trajectory => (
            "plot_trajectory.py",
            r#"import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("trajectory.csv")))
n = [int(r["n"]) for r in rows]
fig, ax = plt.subplots(1, 2, figsize=(10, 4))
for key in ("g_y", "grad_norm_y", "gap"):
    ax[0].loglog(n[1:], [abs(float(r[key])) for r in rows[1:]], label=key)
ax[0].legend()
ax[1].semilogx(n[1:], [float(r["E"]) for r in rows[1:]], label="E")
ax[1].legend()
plt.tight_layout()
plt.savefig("trajectory.png")
"#,
        ),
        PlotKind::Summary => (
            "plot_summary.py",
            r#"import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("summary.csv")))
for obj in sorted({r["objective"] for r in rows}):
    sel = [r for r in rows if r["objective"] == obj]
    plt.scatter([float(r["beta"]) for r in sel], [float(r["iterations"]) for r in sel], label=obj)
plt.xlabel("beta")
plt.ylabel("iterations")
plt.yscale("log")
plt.legend()
plt.savefig("summary.png")
"#,
        ),
        PlotKind::OdeCompare => (
            "plot_ode_compare.py",
            r#"import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("ode_compare.csv")))
plt.loglog([float(r["s"]) for r in rows], [float(r["sup_distance"]) for r in rows], "o-")
plt.xlabel("s")
plt.ylabel("sup distance")
plt.savefig("ode_compare.png")
"#,
        ),
    };
    let path = dir.join(name);
    write_text(&path, body)?;
    Ok(path)
}
