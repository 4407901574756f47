use std::fmt::Write;

use super::AmbiguityMap;

const CELL: usize = 24;
const MARGIN: usize = 48;
const UNDEFINED_FILL: &str = "#808080";

/// Diverging scale: −1 red, 0 white, +1 blue, linear in between.
pub fn k_colour(k: Option<f64>) -> String {
    match k {
        None => UNDEFINED_FILL.to_string(),
        Some(k) => {
            let k = k.clamp(-1.0, 1.0);
            let fade = ((1.0 - k.abs()) * 255.0).round() as u8;
            if k < 0.0 {
                format!("#ff{fade:02x}{fade:02x}")
            } else {
                format!("#{fade:02x}{fade:02x}ff")
            }
        }
    }
}

/// Heatmap of `K(t_row, t_col)` with one `rect` per cell.
pub fn render_svg(map: &AmbiguityMap) -> String {
    let n = map.len();
    let size = MARGIN + n * CELL;
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    )
    .unwrap();
    writeln!(
        s,
        "<title>consistency K ({} source)</title>",
        map.source.name()
    )
    .unwrap();
    for (a, t) in map.temperatures.iter().enumerate() {
        let off = MARGIN + a * CELL + CELL / 2;
        writeln!(
            s,
            r#"<text x="{}" y="{off}" font-size="9" text-anchor="end" dominant-baseline="middle">{t}</text>"#,
            MARGIN - 4
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{off}" y="{}" font-size="9" text-anchor="middle">{t}</text>"#,
            MARGIN - 6
        )
        .unwrap();
    }
    for a in 0..n {
        for b in 0..n {
            let c = map.cell(a, b);
            let k = c.k.map(|k| k.to_string()).unwrap_or_default();
            writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{}" data-k="{k}"/>"#,
                MARGIN + b * CELL,
                MARGIN + a * CELL,
                k_colour(c.k)
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}
