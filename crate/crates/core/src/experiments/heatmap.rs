use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::circuit::Crossbar;
use crate::device::MemristorParams;
use crate::engine::TaskInfo;
use crate::error::{Error, Result};

/// Files written by [`export_heatmap`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HeatmapFiles {
    pub csv: Vec<PathBuf>,
    pub pgm: Vec<PathBuf>,
}

/// Column `j` as a `rows x cols` grid when `grid` is given, else as one
/// value per line. Values in µS.
pub fn column_csv(xb: &Crossbar, j: usize, grid: Option<(usize, usize)>) -> String {
    let g = xb.column(j);
    let (rows, cols) = grid.unwrap_or((g.len(), 1));
    let mut out = String::new();
    for r in 0..rows {
        let line: Vec<String> = (0..cols)
            .map(|c| format!("{:.6}", g[r * cols + c] * 1e6))
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Plain PGM, 255 at `g_max` and 0 at `g_min`.
pub fn column_pgm(xb: &Crossbar, j: usize, rows: usize, cols: usize, device: &MemristorParams) -> String {
    let (lo, hi) = (device.g_min(), device.g_max());
    let mut out = format!("P2\n{cols} {rows}\n255\n");
    for r in 0..rows {
        let line: Vec<String> = (0..cols)
            .map(|c| {
                let g = xb.conductance(j, r * cols + c);
                let level = ((g - lo) / (hi - lo)).clamp(0.0, 1.0) * 255.0;
                format!("{}", level.round() as u8)
            })
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// Rows whose conductance lies above the midpoint of the column's range.
/// A column with no spread has no such rows.
pub fn binarize_column(xb: &Crossbar, j: usize) -> Vec<bool> {
    let g = xb.column(j);
    let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    g.iter().map(|&x| hi > lo && x > mid).collect()
}

/// Writes `column_<j>.csv` for every column and, for pattern tasks,
/// `column_<j>.pgm`.
pub fn export_heatmap(
    xb: &Crossbar,
    task: &TaskInfo,
    device: &MemristorParams,
    dir: &Path,
) -> Result<HeatmapFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let grid = match task {
        TaskInfo::Pattern { rows, cols } => Some((*rows, *cols)),
        TaskInfo::Features { .. } => None,
    };
    let mut files = HeatmapFiles::default();
    for j in 0..xb.cols() {
        let path = dir.join(format!("column_{j}.csv"));
        fs::write(&path, column_csv(xb, j, grid)).map_err(|e| Error::io(&path, e))?;
        files.csv.push(path);
        if let Some((rows, cols)) = grid {
            let path = dir.join(format!("column_{j}.pgm"));
            fs::write(&path, column_pgm(xb, j, rows, cols, device))
                .map_err(|e| Error::io(&path, e))?;
            files.pgm.push(path);
        }
    }
    if grid.is_none() {
        log::info!("no pixel grid for this task; PGM images skipped");
    }
    Ok(files)
}
