//! Per-SNP interval plots as standalone SVG.

use std::fmt::Write as _;
use std::path::Path;

use super::intervals::IntervalReport;
use crate::error::{Error, Result};

const SLOT: f64 = 28.0;
const LEFT: f64 = 64.0;
const TOP: f64 = 36.0;
const PLOT_H: f64 = 240.0;
const BOTTOM: f64 = 110.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// SVG of the intervals of one SNP across all phenotypes, in report column
/// order, with posterior means as dots and a dashed line at zero. Each
/// interval is a `<g>` of class `interval`, plus `selected` when it
/// excludes zero.
pub fn render_interval_plot(report: &IntervalReport, snp: usize) -> Result<String> {
    if snp >= report.d() {
        return Err(Error::Invalid(format!("SNP index {snp} out of range ({} SNPs)", report.d())));
    }
    let c = report.c();
    let lows = report.lower.row(snp);
    let highs = report.upper.row(snp);
    let mut lo = lows.iter().copied().fold(0.0f64, f64::min);
    let mut hi = highs.iter().copied().fold(0.0f64, f64::max);
    if hi - lo <= 0.0 {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let y_of = |v: f64| TOP + PLOT_H * (hi - v) / (hi - lo);
    let width = LEFT + SLOT * c as f64 + 20.0;
    let height = TOP + PLOT_H + BOTTOM;
    let right = LEFT + SLOT * c as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    s.push_str(
        "<style>.interval line{stroke:#444;stroke-width:2}.interval.selected line{stroke:#b2182b}\
         .estimate{fill:#000}.zero{stroke:#888;stroke-dasharray:4 3}.axis{stroke:#000}\
         text{font-family:sans-serif;font-size:11px}</style>\n",
    );
    let _ = writeln!(
        s,
        r#"<text x="{LEFT:.1}" y="20.0" font-size="13">{} ({:.0}% intervals)</text>"#,
        escape(&report.snp_names[snp]),
        report.level * 100.0
    );
    let _ = writeln!(s, r#"<line class="axis" x1="{LEFT:.1}" y1="{TOP:.1}" x2="{LEFT:.1}" y2="{:.1}"/>"#, TOP + PLOT_H);
    for v in [lo + pad, 0.0, hi - pad] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.3}</text>"#,
            LEFT - 6.0,
            y_of(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<line class="zero" x1="{LEFT:.1}" y1="{0:.1}" x2="{right:.1}" y2="{0:.1}"/>"#,
        y_of(0.0)
    );
    for j in 0..c {
        let x = LEFT + SLOT * (j as f64 + 0.5);
        let class = if report.excludes_zero(snp, j) { "interval selected" } else { "interval" };
        let _ = writeln!(
            s,
            r#"<g class="{class}" data-phenotype="{}"><line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}"/><circle class="estimate" cx="{x:.1}" cy="{:.1}" r="3"/></g>"#,
            escape(&report.phenotype_names[j]),
            y_of(highs[j]),
            y_of(lows[j]),
            y_of(report.mean[[snp, j]]),
        );
        let ty = TOP + PLOT_H + 12.0;
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{ty:.1}" transform="rotate(60 {x:.1} {ty:.1})">{}</text>"#,
            escape(&report.phenotype_names[j])
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_interval_plot(report: &IntervalReport, snp: &str, path: &Path) -> Result<()> {
    let i = report
        .snp_index(snp)
        .ok_or_else(|| Error::Invalid(format!("unknown SNP {snp:?}")))?;
    std::fs::write(path, render_interval_plot(report, i)?)?;
    Ok(())
}
