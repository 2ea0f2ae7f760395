//! CSV tables and SVG heatmaps.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::error::BenchError;

use super::ablation::{AblationCell, AblationResult};
use super::suite::BenchRow;

fn write_csv<T: Serialize>(items: &[T], dest: impl Write) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(dest);
    for item in items {
        w.serialize(item)?;
    }
    w.flush()?;
    Ok(())
}

/// One line per row, columns as in [`super::suite::ROW_COLUMNS`].
pub fn write_rows_csv(rows: &[BenchRow], dest: impl Write) -> Result<(), BenchError> {
    if rows.is_empty() {
        let mut w = csv::Writer::from_writer(dest);
        w.write_record(super::suite::ROW_COLUMNS)?;
        w.flush()?;
        return Ok(());
    }
    write_csv(rows, dest)
}

pub fn write_cells_csv(cells: &[AblationCell], dest: impl Write) -> Result<(), BenchError> {
    write_csv(cells, dest)
}

pub fn rows_csv_string(rows: &[BenchRow]) -> String {
    let mut buf = Vec::new();
    write_rows_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// A grid of optional values drawn on a linear white-to-blue scale over
/// `[lo, hi]`; each cell shows its value, empty cells show a dash.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub title: String,
    pub row_label: String,
    pub col_label: String,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    pub lo: f64,
    pub hi: f64,
    pub decimals: usize,
}

const CELL_W: f64 = 72.0;
const CELL_H: f64 = 40.0;
const LEFT: f64 = 110.0;
const TOP: f64 = 60.0;

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(247.0, 8.0), lerp(251.0, 69.0), lerp(255.0, 148.0))
}

impl Heatmap {
    pub fn to_svg(&self) -> String {
        let width = LEFT + CELL_W * self.cols.len() as f64 + 20.0;
        let height = TOP + CELL_H * self.rows.len() as f64 + 60.0;
        let mut s = String::new();
        writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="13">"#).unwrap();
        writeln!(s, r#"<text x="{}" y="22" font-size="15" text-anchor="middle">{}</text>"#, width / 2.0, escape(&self.title)).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + CELL_W * self.cols.len() as f64 / 2.0, height - 12.0, escape(&self.col_label)).unwrap();
        writeln!(s, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#, TOP + CELL_H * self.rows.len() as f64 / 2.0, TOP + CELL_H * self.rows.len() as f64 / 2.0, escape(&self.row_label)).unwrap();
        for (j, c) in self.cols.iter().enumerate() {
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + CELL_W * (j as f64 + 0.5), TOP + CELL_H * self.rows.len() as f64 + 18.0, escape(c)).unwrap();
        }
        let span = if self.hi > self.lo { self.hi - self.lo } else { 1.0 };
        for (i, r) in self.rows.iter().enumerate() {
            let y = TOP + CELL_H * i as f64;
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + CELL_H / 2.0 + 4.0, escape(r)).unwrap();
            for j in 0..self.cols.len() {
                let x = LEFT + CELL_W * j as f64;
                let v = self.values.get(i).and_then(|row| row.get(j)).copied().flatten();
                let (fill, label, t) = match v {
                    Some(v) => {
                        let t = (v - self.lo) / span;
                        (color(t), format!("{v:.*}", self.decimals), t)
                    }
                    None => ("#dddddd".to_string(), "-".to_string(), 0.0),
                };
                let ink = if t > 0.55 { "#ffffff" } else { "#000000" };
                writeln!(s, r##"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="{fill}" stroke="#ffffff"/>"##).unwrap();
                writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{label}</text>"#, x + CELL_W / 2.0, y + CELL_H / 2.0 + 4.0).unwrap();
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Success-rate and mean-action heatmaps, one per toggle. Rows are budgets,
/// columns buffer counts. Success is on a fixed 0..100 scale; actions share
/// one scale across toggles so the two maps compare directly.
pub fn ablation_heatmaps(result: &AblationResult) -> Vec<(String, Heatmap)> {
    let mut budgets: Vec<u64> = result.cells.iter().map(|c| c.budget_ms).collect();
    budgets.sort_unstable();
    budgets.dedup();
    let mut buffers: Vec<usize> = result.cells.iter().map(|c| c.buffers).collect();
    buffers.sort_unstable();
    buffers.dedup();
    let mut toggles: Vec<String> = Vec::new();
    for c in &result.cells {
        if !toggles.contains(&c.toggle) {
            toggles.push(c.toggle.clone());
        }
    }
    let actions: Vec<f64> = result.cells.iter().filter_map(|c| c.mean_actions).collect();
    let a_hi = actions.iter().copied().fold(0.0, f64::max);
    let rows: Vec<String> = budgets.iter().map(|b| format!("{:.0} s", *b as f64 / 1000.0)).collect();
    let cols: Vec<String> = buffers.iter().map(|b| b.to_string()).collect();
    let mut out = Vec::new();
    for t in &toggles {
        let grid = |f: &dyn Fn(&AblationCell) -> Option<f64>| -> Vec<Vec<Option<f64>>> {
            budgets
                .iter()
                .map(|&b| buffers.iter().map(|&k| result.cell(b, k, t).and_then(f)).collect())
                .collect()
        };
        out.push((
            format!("success_{t}.svg"),
            Heatmap {
                title: format!("success rate (%) {t}"),
                row_label: "budget".into(),
                col_label: "buffers".into(),
                rows: rows.clone(),
                cols: cols.clone(),
                values: grid(&|c| Some(100.0 * c.success_rate)),
                lo: 0.0,
                hi: 100.0,
                decimals: 0,
            },
        ));
        out.push((
            format!("actions_{t}.svg"),
            Heatmap {
                title: format!("mean actions {t}"),
                row_label: "budget".into(),
                col_label: "buffers".into(),
                rows: rows.clone(),
                cols: cols.clone(),
                values: grid(&|c| c.mean_actions),
                lo: 0.0,
                hi: a_hi,
                decimals: 1,
            },
        ));
    }
    out
}
