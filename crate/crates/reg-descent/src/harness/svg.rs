//! Self-contained SVG 1.1 plot generation: log-log trajectory plots with an
//! optional dashed theoretical guide line, and `(p, q)` heatmaps.  No
//! external tooling; output is a pure function of the inputs except for the
//! leading build-version comment.

use crate::analysis::SweepResult;
use std::fmt::Write as _;

pub const BUILD_VERSION: &str = env!("CARGO_PKG_VERSION");

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const ML: f64 = 70.0;
const MR: f64 = 24.0;
const MT: f64 = 42.0;
const MB: f64 = 54.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
}

/// Dashed reference line with slope `-exponent` in log-log coordinates,
/// anchored at the last point of the first series.
pub struct GuideLine {
    pub exponent: f64,
    pub label: String,
}

fn header(digest: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, "<!-- reg-descent {BUILD_VERSION} -->");
    let _ = writeln!(s, "<!-- config sha256:{digest} -->");
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    s
}

fn text(s: &mut String, x: f64, y: f64, size: f64, anchor: &str, body: &str, extra: &str) {
    let _ = writeln!(
        s,
        r#"<text x="{x:.2}" y="{y:.2}" font-family="monospace" font-size="{size}" text-anchor="{anchor}"{extra}>{body}</text>"#
    );
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Log-log polyline plot.  Points with a non-positive or non-finite
/// coordinate are dropped (they have no logarithm to plot).
pub fn log_log_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    guide: Option<&GuideLine>,
    digest: &str,
) -> String {
    let logs: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
                .map(|(x, y)| (x.log10(), y.log10()))
                .collect()
        })
        .collect();

    let mut s = header(digest);
    text(&mut s, WIDTH / 2.0, 24.0, 15.0, "middle", &escape(title), "");

    let all: Vec<(f64, f64)> = logs.iter().flatten().copied().collect();
    if all.is_empty() {
        text(
            &mut s,
            WIDTH / 2.0,
            HEIGHT / 2.0,
            13.0,
            "middle",
            "no positive data to plot",
            "",
        );
        s.push_str("</svg>\n");
        return s;
    }

    let (mut x0, mut x1) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (x, _)| {
            (a.min(*x), b.max(*x))
        });
    let (mut y0, mut y1) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, y)| {
            (a.min(*y), b.max(*y))
        });
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let xpad = 0.03 * (x1 - x0);
    let ypad = 0.06 * (y1 - y0);
    let (x0, x1, y0, y1) = (x0 - xpad, x1 + xpad, y0 - ypad, y1 + ypad);

    let pw = WIDTH - ML - MR;
    let ph = HEIGHT - MT - MB;
    let px = |lx: f64| ML + (lx - x0) / (x1 - x0) * pw;
    let py = |ly: f64| MT + (y1 - ly) / (y1 - y0) * ph;

    let _ = writeln!(
        s,
        r#"<clipPath id="plot"><rect x="{ML}" y="{MT}" width="{pw}" height="{ph}"/></clipPath>"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="#333" stroke-width="1"/>"##
    );

    // decade ticks and faint grid lines
    for e in (x0.ceil() as i64)..=(x1.floor() as i64) {
        let x = px(e as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{MT}" x2="{x:.2}" y2="{:.2}" stroke="#ddd" stroke-width="0.5"/>"##,
            MT + ph
        );
        text(&mut s, x, MT + ph + 16.0, 11.0, "middle", &format!("1e{e}"), "");
    }
    for e in (y0.ceil() as i64)..=(y1.floor() as i64) {
        let y = py(e as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{ML}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd" stroke-width="0.5"/>"##,
            ML + pw
        );
        text(&mut s, ML - 6.0, y + 4.0, 11.0, "end", &format!("1e{e}"), "");
    }
    text(
        &mut s,
        ML + pw / 2.0,
        HEIGHT - 14.0,
        12.0,
        "middle",
        &escape(x_label),
        "",
    );
    text(
        &mut s,
        18.0,
        MT + ph / 2.0,
        12.0,
        "middle",
        &escape(y_label),
        &format!(r#" transform="rotate(-90 18 {:.2})""#, MT + ph / 2.0),
    );

    for (i, pts) in logs.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        for (lx, ly) in pts {
            let _ = write!(path, "{:.2},{:.2} ", px(*lx), py(*ly));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" clip-path="url(#plot)" points="{}"/>"#,
            path.trim_end()
        );
    }

    if let Some(g) = guide {
        if let Some(anchor) = logs.iter().find(|v| !v.is_empty()).and_then(|v| v.last()) {
            let (ax, ay) = *anchor;
            let ly0 = ay + g.exponent * (ax - x0);
            let ly1 = ay - g.exponent * (x1 - ax);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1.2" stroke-dasharray="6,4" clip-path="url(#plot)"/>"#,
                px(x0),
                py(ly0),
                px(x1),
                py(ly1)
            );
        }
    }

    // legend
    let mut ly = MT + 16.0;
    for (i, sr) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let lx = ML + pw - 180.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"/>"#,
            ly - 4.0,
            lx + 22.0,
            ly - 4.0
        );
        text(&mut s, lx + 28.0, ly, 11.0, "start", &escape(sr.label), "");
        ly += 16.0;
    }
    if let Some(g) = guide {
        let lx = ML + pw - 180.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1.2" stroke-dasharray="6,4"/>"#,
            ly - 4.0,
            lx + 22.0,
            ly - 4.0
        );
        text(&mut s, lx + 28.0, ly, 11.0, "start", &escape(&g.label), "");
    }

    s.push_str("</svg>\n");
    s
}

/// Five-stop colormap from dark violet to yellow, `t` in [0, 1].
fn colormap(t: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [68.0, 1.0, 84.0]),
        (0.25, [59.0, 82.0, 139.0]),
        (0.5, [33.0, 145.0, 140.0]),
        (0.75, [94.0, 201.0, 98.0]),
        (1.0, [253.0, 231.0, 37.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    let mut rgb = STOPS[4].1;
    for w in STOPS.windows(2) {
        let (t0, c0) = w[0];
        let (t1, c1) = w[1];
        if t <= t1 {
            let f = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            rgb = [
                c0[0] + f * (c1[0] - c0[0]),
                c0[1] + f * (c1[1] - c0[1]),
                c0[2] + f * (c1[2] - c0[2]),
            ];
            break;
        }
    }
    format!(
        "#{:02x}{:02x}{:02x}",
        rgb[0].round() as u8,
        rgb[1].round() as u8,
        rgb[2].round() as u8
    )
}

/// Cell edges for a strictly ascending grid: midpoints between neighbours,
/// clamped to [0, 1].
fn edges(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut e = Vec::with_capacity(n + 1);
    let half = if n > 1 {
        (grid[1] - grid[0]) / 2.0
    } else {
        0.02
    };
    e.push((grid[0] - half).max(0.0));
    for w in grid.windows(2) {
        e.push((w[0] + w[1]) / 2.0);
    }
    let half_last = if n > 1 {
        (grid[n - 1] - grid[n - 2]) / 2.0
    } else {
        0.02
    };
    e.push((grid[n - 1] + half_last).min(1.0));
    e
}

/// Heatmap of a sweep: `p` on the horizontal axis, `q` on the vertical.
/// `use_empirical` plots fitted exponents (gray cells where invalid) instead
/// of theoretical values.
pub fn heatmap_svg(result: &SweepResult, use_empirical: bool, digest: &str) -> String {
    let mut s = header(digest);
    let what = if use_empirical {
        "empirical"
    } else {
        "theoretical"
    };
    let title = format!(
        "{} decay exponent of dist_sq to x_*, mode {}, xi={}",
        what,
        result.mode.name(),
        result.xi
    );
    text(&mut s, WIDTH / 2.0, 24.0, 14.0, "middle", &escape(&title), "");

    let pw = WIDTH - ML - MR;
    let ph = HEIGHT - MT - MB;
    let pe = edges(&result.p_grid);
    let qe = edges(&result.q_grid);
    let (p_lo, p_hi) = (pe[0], *pe.last().unwrap());
    let (q_lo, q_hi) = (qe[0], *qe.last().unwrap());
    let px = |p: f64| ML + (p - p_lo) / (p_hi - p_lo) * pw;
    let py = |q: f64| MT + (q_hi - q) / (q_hi - q_lo) * ph;

    let vmax = result
        .cells
        .iter()
        .filter_map(|c| {
            if use_empirical {
                c.empirical.filter(|_| c.valid)
            } else {
                Some(c.theoretical)
            }
        })
        .fold(0.0_f64, f64::max)
        .max(1e-12);

    for (ip, _) in result.p_grid.iter().enumerate() {
        for (iq, _) in result.q_grid.iter().enumerate() {
            let cell = result.cell(ip, iq);
            let fill = if use_empirical {
                match (cell.valid, cell.empirical) {
                    (true, Some(v)) => colormap(v.max(0.0) / vmax),
                    _ => "#b0b0b0".to_string(),
                }
            } else {
                colormap(cell.theoretical / vmax)
            };
            let x = px(pe[ip]);
            let w = px(pe[ip + 1]) - x;
            let y = py(qe[iq + 1]);
            let h = py(qe[iq]) - y;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"/>"#
            );
        }
    }

    if let Some((ip, iq)) = result.argmax {
        let x = px(pe[ip]);
        let w = px(pe[ip + 1]) - x;
        let y = py(qe[iq + 1]);
        let h = py(qe[iq]) - y;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="white" stroke-width="2"/>"#
        );
        let c = result.cell(ip, iq);
        text(
            &mut s,
            ML + pw / 2.0,
            HEIGHT - 14.0,
            12.0,
            "middle",
            &format!(
                "p (argmax p={}, q={}, value {:.6})",
                c.p, c.q, c.theoretical
            ),
            "",
        );
    } else {
        text(&mut s, ML + pw / 2.0, HEIGHT - 14.0, 12.0, "middle", "p", "");
    }
    text(
        &mut s,
        18.0,
        MT + ph / 2.0,
        12.0,
        "middle",
        "q",
        &format!(r#" transform="rotate(-90 18 {:.2})""#, MT + ph / 2.0),
    );
    for (v, at_x) in [(p_lo, px(p_lo)), (p_hi, px(p_hi))] {
        text(&mut s, at_x, MT + ph + 16.0, 11.0, "middle", &format!("{v:.2}"), "");
    }
    for (v, at_y) in [(q_lo, py(q_lo)), (q_hi, py(q_hi))] {
        text(&mut s, ML - 6.0, at_y + 4.0, 11.0, "end", &format!("{v:.2}"), "");
    }
    let _ = writeln!(
        s,
        r##"<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="#333" stroke-width="1"/>"##
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{grid_with_anchors, theoretical_heatmap, SweepMode};
    use crate::schedules::DEFAULT_BETA_OFFSET;

    fn demo_series() -> Vec<(f64, f64)> {
        (1..=100)
            .map(|k| (k as f64, 3.0 * (k as f64).powf(-0.5)))
            .collect()
    }

    #[test]
    fn plot_structure_and_provenance() {
        let pts = demo_series();
        let series = [Series {
            label: "mean f_gap",
            points: &pts,
        }];
        let guide = GuideLine {
            exponent: 0.5,
            label: "k^-0.5".into(),
        };
        let svg = log_log_plot("toy", "k", "f_gap", &series, Some(&guide), "abc123");
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<!-- config sha256:abc123 -->"));
        assert!(svg.contains(&format!("<!-- reg-descent {BUILD_VERSION} -->")));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("stroke-dasharray"));
        assert!(!svg.contains("NaN"));
        assert!(!svg.contains("inf"));
    }

    #[test]
    fn deterministic_output() {
        let pts = demo_series();
        let series = [Series {
            label: "a",
            points: &pts,
        }];
        let a = log_log_plot("t", "x", "y", &series, None, "d");
        let b = log_log_plot("t", "x", "y", &series, None, "d");
        assert_eq!(a, b);
    }

    #[test]
    fn nonpositive_points_are_dropped() {
        let pts = vec![(0.0, 1.0), (1.0, 0.0), (2.0, -1.0), (3.0, 0.5), (4.0, 0.25)];
        let series = [Series {
            label: "sparse",
            points: &pts,
        }];
        let svg = log_log_plot("t", "x", "y", &series, None, "d");
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(!svg.contains("NaN"));

        let empty = [Series {
            label: "none",
            points: &[(0.0, 0.0)],
        }];
        let svg = log_log_plot("t", "x", "y", &empty, None, "d");
        assert!(svg.contains("no positive data"));
    }

    #[test]
    fn heatmap_marks_argmax() {
        let p = grid_with_anchors(20, &[0.25]);
        let q = grid_with_anchors(20, &[0.625]);
        let hm = theoretical_heatmap(SweepMode::L2, 0.25, &p, &q, DEFAULT_BETA_OFFSET);
        let svg = heatmap_svg(&hm, false, "deadbeef");
        assert!(svg.contains("sha256:deadbeef"));
        assert!(svg.contains("argmax p=0.25, q=0.625"));
        assert!(svg.contains(r#"stroke="white""#));
        let n_cells = p.len() * q.len();
        assert!(svg.matches("<rect").count() >= n_cells);
    }

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colormap(0.0), "#440154");
        assert_eq!(colormap(1.0), "#fde725");
        assert_eq!(colormap(0.5), "#21918c");
    }
}
