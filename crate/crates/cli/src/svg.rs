//! Minimal hand-written SVG plots.

use std::fmt::Write;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, w: f64, h: f64, timestamp: Option<u64>) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#
    );
    if let Some(t) = timestamp {
        let _ = writeln!(out, "<!-- generated at unix time {t} -->");
    }
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

/// Confusion-matrix heatmap; cell shade is the row-normalized rate, the
/// label is the raw count.
pub fn confusion_heatmap(title: &str, classes: &[String], matrix: &[Vec<usize>], timestamp: Option<u64>) -> String {
    let k = classes.len();
    let cell = 70.0;
    let left = 110.0;
    let top = 60.0;
    let w = left + cell * k as f64 + 30.0;
    let h = top + cell * k as f64 + 70.0;
    let mut s = String::new();
    header(&mut s, w, h, timestamp);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    for (i, row) in matrix.iter().enumerate() {
        let total: usize = row.iter().sum();
        for (j, &n) in row.iter().enumerate() {
            let rate = if total == 0 { 0.0 } else { n as f64 / total as f64 };
            let shade = (255.0 * (1.0 - 0.8 * rate)).round() as u8;
            let x = left + cell * j as f64;
            let y = top + cell * i as f64;
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)" stroke="#444"/>"##
            );
            let ink = if rate > 0.6 { "white" } else { "black" };
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="14" text-anchor="middle" fill="{ink}">{n}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0 + 5.0
            );
        }
    }
    for (i, name) in classes.iter().enumerate() {
        let c = cell * i as f64 + cell / 2.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{}</text>"#,
            left - 8.0,
            top + c + 4.0,
            escape(name)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            left + c,
            top + cell * k as f64 + 18.0,
            escape(name)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">predicted</text>"#,
        left + cell * k as f64 / 2.0,
        top + cell * k as f64 + 42.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">true</text>"#,
        top + cell * k as f64 / 2.0,
        top + cell * k as f64 / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Horizontal bar chart, one bar per item in the given order.
pub fn bar_chart(title: &str, items: &[(String, f64)], timestamp: Option<u64>) -> String {
    let bar = 18.0;
    let gap = 6.0;
    let left = 300.0;
    let span = 360.0;
    let top = 50.0;
    let w = left + span + 70.0;
    let h = top + (bar + gap) * items.len() as f64 + 20.0;
    let max = items.iter().map(|(_, v)| *v).filter(|v| v.is_finite()).fold(0.0, f64::max);
    let mut s = String::new();
    header(&mut s, w, h, timestamp);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    for (i, (name, v)) in items.iter().enumerate() {
        let y = top + (bar + gap) * i as f64;
        let len = if max > 0.0 && v.is_finite() { span * v / max } else { 0.0 };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            left - 8.0,
            y + bar - 5.0,
            escape(name)
        );
        let _ = writeln!(
            s,
            r##"<rect x="{left}" y="{y}" width="{len:.2}" height="{bar}" fill="#4a78c2"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" font-size="11">{v:.4}</text>"#,
            left + len + 5.0,
            y + bar - 5.0
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamp_is_the_only_difference() {
        let classes = vec!["A<1>".to_string(), "B".to_string()];
        let m = vec![vec![3, 1], vec![0, 4]];
        let a = confusion_heatmap("t", &classes, &m, None);
        let b = confusion_heatmap("t", &classes, &m, Some(12345));
        assert!(a.contains("A&lt;1&gt;"));
        let stripped: String = b.lines().filter(|l| !l.starts_with("<!--")).map(|l| format!("{l}\n")).collect();
        assert_eq!(a, stripped);
        let bars = bar_chart("imp", &[("x".into(), 0.7), ("y".into(), 0.3)], None);
        assert_eq!(bars.matches("<rect").count(), 3);
    }
}
