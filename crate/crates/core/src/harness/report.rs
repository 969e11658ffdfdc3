//! CSV and SVG renderings of run records.

use std::fmt::Write as _;

use super::experiments::{RunRecord, Table};
use crate::evolve::NormRecord;

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Trajectory CSV; the Λ-norm and `t^δ` columns appear only when recorded.
pub fn trajectory_csv(records: &[NormRecord]) -> String {
    let lam = records.iter().any(|r| r.lambda_norm.is_some());
    let td = records.iter().any(|r| r.tdelta_lq.is_some());
    let mut s = String::from("t,sup,l_qc,weak_qc_quasinorm,weak_qc_norm");
    if lam {
        s.push_str(",lambda_norm");
    }
    if td {
        s.push_str(",tdelta_lq");
    }
    s.push('\n');
    for r in records {
        let mut row = vec![num(r.t), num(r.sup), opt(r.l_qc), opt(r.weak_qc_quasinorm), opt(r.weak_qc_norm)];
        if lam {
            row.push(opt(r.lambda_norm));
        }
        if td {
            row.push(opt(r.tdelta_lq));
        }
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn table_csv(t: &Table) -> String {
    let mut s = t.columns.join(",");
    s.push('\n');
    for r in &t.rows {
        s.push_str(&r.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

/// `(file name, contents)` for every trajectory and table, plus metrics and checks.
pub fn emit_csv(rec: &RunRecord) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (name, traj) in &rec.trajectories {
        out.push((format!("traj_{}.csv", slug(name)), trajectory_csv(traj)));
    }
    for (name, t) in &rec.tables {
        out.push((format!("{}.csv", slug(name)), table_csv(t)));
    }
    let mut m = String::from("metric,value\n");
    for (k, v) in &rec.metrics {
        let _ = writeln!(m, "{k},{}", num(*v));
    }
    out.push(("metrics.csv".into(), m));
    let mut c = String::from("check,passed,value,threshold\n");
    for ch in &rec.checks {
        let _ = writeln!(c, "{},{},{},{}", ch.name, ch.passed, num(ch.value), num(ch.threshold));
    }
    out.push(("checks.csv".into(), c));
    out
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Self-contained line plot; log axes when every value on an axis is positive.
pub fn line_plot(title: &str, xlabel: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let pts = || series.iter().flat_map(|s| s.1.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let logx = pts().all(|p| p.0 > 0.0) && pts().next().is_some();
    let logy = pts().all(|p| p.1 > 0.0) && pts().next().is_some();
    let tx = |x: f64| if logx { x.log10() } else { x };
    let ty = |y: f64| if logy { y.log10() } else { y };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts() {
        x0 = x0.min(tx(p.0));
        x1 = x1.max(tx(p.0));
        y0 = y0.min(ty(p.1));
        y1 = y1.max(ty(p.1));
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (tx(x) - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (ty(y) - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let lx = if logx { format!("log10 {xlabel}") } else { xlabel.to_string() };
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 15.0, escape(&lx));
    for (v, anchor, x, y) in [
        (x0, "start", PAD, H - PAD + 16.0),
        (x1, "end", W - PAD, H - PAD + 16.0),
    ] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.3}</text>"#);
    }
    for (v, y) in [(y0, H - PAD), (y1, PAD)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{v:.3}</text>"#, PAD - 4.0);
    }
    if logy {
        let _ = writeln!(s, r#"<text x="12" y="{}" transform="rotate(-90 12 {0})">log10</text>"#, H / 2.0);
    }
    for (k, (name, data)) in series.iter().enumerate() {
        let col = COLORS[k % COLORS.len()];
        let path: Vec<String> = data
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite() && (!logx || p.0 > 0.0) && (!logy || p.1 > 0.0))
            .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1)))
            .collect();
        if !path.is_empty() {
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{col}" stroke-width="1.5"/>"#, path.join(" "));
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{col}">{}</text>"#,
            W - PAD + 4.0 - 120.0,
            PAD + 14.0 * k as f64,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// One SVG per trajectory (sup and available norms against t) and per table.
pub fn emit_svg(rec: &RunRecord) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (name, traj) in &rec.trajectories {
        let mut series = vec![("sup".to_string(), traj.iter().map(|r| (r.t, r.sup)).collect::<Vec<_>>())];
        let cols: [(&str, fn(&NormRecord) -> Option<f64>); 3] = [
            ("l_qc", |r| r.l_qc),
            ("weak_qc_norm", |r| r.weak_qc_norm),
            ("lambda_norm", |r| r.lambda_norm),
        ];
        for (label, get) in cols {
            let pts: Vec<(f64, f64)> = traj.iter().filter_map(|r| get(r).map(|v| (r.t, v))).collect();
            if !pts.is_empty() {
                series.push((label.to_string(), pts));
            }
        }
        out.push((format!("traj_{}.svg", slug(name)), line_plot(name, "t", &series)));
    }
    for (name, t) in &rec.tables {
        if t.columns.len() < 2 {
            continue;
        }
        let series: Vec<(String, Vec<(f64, f64)>)> = (1..t.columns.len())
            .map(|k| (t.columns[k].clone(), t.rows.iter().map(|r| (r[0], r[k])).collect()))
            .collect();
        out.push((format!("{}.svg", slug(name)), line_plot(name, &t.columns[0], &series)));
    }
    out
}
