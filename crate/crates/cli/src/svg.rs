//! Minimal SVG line plots of a sensitivity table: one panel per parameter,
//! Re and Im against log frequency, one line per perturbation fraction.

use std::fmt::Write as _;

use eddyspec::sensitivity::{Param, SensitivityRow};

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 260.0;
const MARGIN: f64 = 50.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub fn sensitivity_svg(rows: &[SensitivityRow<f64>]) -> String {
    let params: Vec<Param> = Param::ALL.into_iter().filter(|p| rows.iter().any(|r| r.param == *p)).collect();
    let width = 2.0 * (PANEL_W + MARGIN) + MARGIN;
    let height = params.len() as f64 * (PANEL_H + MARGIN) + MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (row_idx, &param) in params.iter().enumerate() {
        let sub: Vec<&SensitivityRow<f64>> = rows.iter().filter(|r| r.param == param).collect();
        for (col_idx, (part, get)) in [("Re", (|r: &SensitivityRow<f64>| r.re) as fn(&_) -> f64), ("Im", |r| r.im)]
            .into_iter()
            .enumerate()
        {
            let x0 = MARGIN + col_idx as f64 * (PANEL_W + MARGIN);
            let y0 = MARGIN + row_idx as f64 * (PANEL_H + MARGIN);
            panel(&mut out, &sub, get, x0, y0, &format!("{part} dL/d{}", param.name()));
        }
    }
    out.push_str("</svg>\n");
    out
}

fn panel(out: &mut String, rows: &[&SensitivityRow<f64>], get: fn(&SensitivityRow<f64>) -> f64, x0: f64, y0: f64, title: &str) {
    let _ = writeln!(
        out,
        r##"<rect x="{x0}" y="{y0}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#444"/>"##
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}">{title}</text>"#, x0 + 4.0, y0 - 6.0);
    if rows.is_empty() {
        return;
    }
    let lf = |r: &SensitivityRow<f64>| r.freq.log10();
    let (fmin, fmax) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(lf(r)), b.max(lf(r))));
    let (vmin, vmax) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(get(r)), b.max(get(r))));
    let fspan = if fmax > fmin { fmax - fmin } else { 1.0 };
    let vspan = if vmax > vmin { vmax - vmin } else { vmax.abs().max(1.0) };
    let px = |f: f64| x0 + (f - fmin) / fspan * PANEL_W;
    let py = |v: f64| y0 + PANEL_H - (v - vmin) / vspan * PANEL_H;
    if vmin < 0.0 && vmax > 0.0 {
        let _ = writeln!(
            out,
            r##"<line x1="{x0}" x2="{}" y1="{y}" y2="{y}" stroke="#bbb" stroke-dasharray="4 3"/>"##,
            x0 + PANEL_W,
            y = py(0.0)
        );
    }
    let _ = writeln!(out, r#"<text x="{x0}" y="{}">{:.0e} Hz</text>"#, y0 + PANEL_H + 14.0, 10f64.powf(fmin));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{:.0e} Hz</text>"#,
        x0 + PANEL_W,
        y0 + PANEL_H + 14.0,
        10f64.powf(fmax)
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}">{vmax:.2e}</text>"#, x0 + 4.0, y0 + 14.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}">{vmin:.2e}</text>"#, x0 + 4.0, y0 + PANEL_H - 4.0);

    let mut fractions: Vec<f64> = rows.iter().map(|r| r.fraction).collect();
    fractions.sort_by(f64::total_cmp);
    fractions.dedup();
    for (k, frac) in fractions.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let points: Vec<String> = rows
            .iter()
            .filter(|r| r.fraction == *frac)
            .map(|r| format!("{:.2},{:.2}", px(lf(r)), py(get(r))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{colour}" text-anchor="end">{}%</text>"#,
            x0 + PANEL_W - 4.0,
            y0 + 14.0 + 14.0 * k as f64,
            frac * 100.0
        );
    }
}
