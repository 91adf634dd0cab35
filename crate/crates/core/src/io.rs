//! CSV and JSON output.
//!
//! Floats are written in scientific notation with 17 significant digits,
//! which round-trips every `f64` and does not depend on the locale.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::delta::ChargeTrajectory;
use crate::error::{Error, Result};
use crate::hartree::ScalarSample;
use crate::manybody::ReducedDensity;
use crate::onebody::{Grid1D, WaveFunction};

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes a header line and one line per row, fields joined by commas.
pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[String]>,
{
    let mut w = create(path)?;
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.as_ref().join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// `x,re,im` rows preceded by a `# L = .., M = .., t = ..` comment line.
pub fn write_state_csv(path: &Path, psi: &WaveFunction, t: f64) -> Result<()> {
    let g = psi.grid();
    let mut w = create(path)?;
    writeln!(
        w,
        "# L = {}, M = {}, t = {}",
        fmt_f64(g.half_width()),
        g.num_points(),
        fmt_f64(t)
    )?;
    writeln!(w, "x,re,im")?;
    for (x, z) in g.nodes().zip(psi.values()) {
        writeln!(w, "{},{},{}", fmt_f64(x), fmt_f64(z.re), fmt_f64(z.im))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_state_csv`]; returns the state and its time.
pub fn read_state_csv(path: &Path) -> Result<(WaveFunction, f64)> {
    let name = path.display().to_string();
    let bad = |reason: String| Error::Parse {
        source_name: name.clone(),
        reason,
    };
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let meta = lines
        .next()
        .transpose()?
        .ok_or_else(|| bad("empty file".into()))?;
    let mut l = None;
    let mut m = None;
    let mut t = None;
    for part in meta.trim_start_matches('#').split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("bad header field `{part}`")))?;
        let value = value.trim();
        match key.trim() {
            "L" => l = value.parse::<f64>().ok(),
            "M" => m = value.parse::<usize>().ok(),
            "t" => t = value.parse::<f64>().ok(),
            other => return Err(bad(format!("unknown header key `{other}`"))),
        }
    }
    let (l, m, t) = match (l, m, t) {
        (Some(l), Some(m), Some(t)) => (l, m, t),
        _ => return Err(bad("header must give L, M and t".into())),
    };
    let grid = Grid1D::new(l, m)?;
    lines.next().transpose()?;
    let mut values = Vec::with_capacity(m);
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("row {}: {e}", row + 1)))?;
        if f.len() != 3 {
            return Err(bad(format!(
                "row {}: expected 3 fields, got {}",
                row + 1,
                f.len()
            )));
        }
        values.push(Complex64::new(f[1], f[2]));
    }
    Ok((WaveFunction::new(grid, values)?, t))
}

/// `t,re_q,im_q,abs_q_sq` on every charge node.
pub fn write_charge_csv(path: &Path, traj: &ChargeTrajectory) -> Result<()> {
    let rows = traj.charges().iter().enumerate().map(|(n, q)| {
        vec![
            fmt_f64(traj.time(n)),
            fmt_f64(q.re),
            fmt_f64(q.im),
            fmt_f64(q.norm_sqr()),
        ]
    });
    write_table(path, &["t", "re_q", "im_q", "abs_q_sq"], rows)
}

/// `i,j,re,im` for every kernel entry, row-major.
pub fn write_density_csv(path: &Path, gamma: &ReducedDensity) -> Result<()> {
    let k = gamma.kernel();
    let m = k.nrows();
    let rows = (0..m).flat_map(|i| {
        (0..m).map(move |j| {
            let z = k[(i, j)];
            vec![i.to_string(), j.to_string(), fmt_f64(z.re), fmt_f64(z.im)]
        })
    });
    write_table(path, &["i", "j", "re", "im"], rows)
}

pub fn write_eigenvalues_csv(path: &Path, eigenvalues: &[f64]) -> Result<()> {
    let rows = eigenvalues
        .iter()
        .enumerate()
        .map(|(i, l)| vec![i.to_string(), fmt_f64(*l)]);
    write_table(path, &["index", "eigenvalue"], rows)
}

/// `t,l2,energy,coupling`.
pub fn write_series_csv(path: &Path, series: &[ScalarSample]) -> Result<()> {
    let rows = series.iter().map(|s| {
        vec![
            fmt_f64(s.t),
            fmt_f64(s.l2),
            fmt_f64(s.energy),
            fmt_f64(s.coupling),
        ]
    });
    write_table(path, &["t", "l2", "energy", "coupling"], rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
