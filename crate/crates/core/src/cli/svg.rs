//! Static SVG 1.1 line charts of a sweep: line flows, social costs and the
//! price of anarchy against demand.

use std::fmt::Write as _;

use super::sweep::SweepRow;

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 40.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct Series {
    label: String,
    color: &'static str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

struct Panel {
    title: &'static str,
    y_label: &'static str,
    series: Vec<Series>,
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi <= lo {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn draw_panel(out: &mut String, panel: &Panel, top: f64) {
    let left = MARGIN_LEFT;
    let right = WIDTH - MARGIN_RIGHT;
    let plot_top = top + MARGIN_TOP;
    let bottom = top + PANEL_HEIGHT - MARGIN_BOTTOM;

    let all = panel.series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return;
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let (y0, y1) = nice_range(y0, y1);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (right - left);
    let sy = |y: f64| bottom - (y - y0) / (y1 - y0) * (bottom - plot_top);

    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        top + 18.0,
        escape(panel.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{left:.1}" y="{plot_top:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - plot_top
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
            sx(fx),
            bottom + 14.0,
            fmt_tick(fx)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#,
            left - 4.0,
            sy(fy) + 3.0,
            fmt_tick(fy)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">demand x (passengers/h)</text>"#,
        (left + right) / 2.0,
        bottom + 30.0
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{0:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 14 {0:.1})">{1}</text>"#,
        (plot_top + bottom) / 2.0,
        escape(panel.y_label)
    );

    for (k, s) in panel.series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if s.dashed {
            r#" stroke-dasharray="6,3""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
            s.color,
            pts.join(" ")
        );
        let ly = plot_top + 12.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="1.5"{dash}/>"#,
            right + 10.0,
            right + 34.0,
            s.color
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            right + 40.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
}

/// Renders the flows, costs and price-of-anarchy panels as one SVG document.
pub fn render(rows: &[SweepRow], n: usize) -> String {
    let column =
        |f: &dyn Fn(&SweepRow) -> f64| rows.iter().map(|r| (r.x, f(r))).collect::<Vec<_>>();
    let mut flows = Vec::new();
    for i in 0..n {
        let color = COLORS[i % COLORS.len()];
        flows.push(Series {
            label: format!("line {} SO", i + 1),
            color,
            dashed: false,
            points: column(&|r| r.v_so[i]),
        });
        flows.push(Series {
            label: format!("line {} UE", i + 1),
            color,
            dashed: true,
            points: column(&|r| r.v_ue[i]),
        });
    }
    let panels = [
        Panel {
            title: "Line flows",
            y_label: "flow (passengers/h)",
            series: flows,
        },
        Panel {
            title: "Social cost",
            y_label: "passenger-hours",
            series: vec![
                Series {
                    label: "equilibrium".into(),
                    color: COLORS[1],
                    dashed: true,
                    points: column(&|r| r.wsc),
                },
                Series {
                    label: "optimum".into(),
                    color: COLORS[0],
                    dashed: false,
                    points: column(&|r| r.osc),
                },
            ],
        },
        Panel {
            title: "Price of anarchy",
            y_label: "WSC / OSC",
            series: vec![Series {
                label: "PoA".into(),
                color: COLORS[2],
                dashed: false,
                points: column(&|r| r.poa),
            }],
        },
    ];

    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    );
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, panel) in panels.iter().enumerate() {
        draw_panel(&mut out, panel, PANEL_HEIGHT * k as f64);
    }
    out.push_str("</svg>\n");
    out
}
