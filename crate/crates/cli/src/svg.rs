use gffi_core::lattice::{delta_of, lozenge_indicator, LozengeType, ParticleConfiguration};
use std::fmt::Write;

const FILL: [(&str, LozengeType); 3] =
    [("#e4572e", LozengeType::I), ("#29335c", LozengeType::II), ("#f3a712", LozengeType::III)];

/// One rhombus per white triangle (x, ℓ), filled by lozenge type; odd and
/// even levels are offset by half a cell.
pub fn tiling(cfg: &ParticleConfiguration) -> String {
    let m = cfg.max_level();
    let width = cfg.levels().iter().flatten().copied().max().unwrap_or(0) + 3;
    let cell = 16.0;
    let (w, h) = ((width as f64 + 1.0) * 2.0 * cell, (m as f64 + 1.0) * cell * 1.6);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w:.1}" height="{h:.1}" fill="white"/>"#);
    for l in 1..=m {
        let cy = h - (l as f64) * cell * 1.6;
        for x in 0..width {
            let kind = if l == 1 {
                cfg.occupied(x, 1).then_some(LozengeType::I)
            } else {
                FILL.iter().map(|f| f.1).find(|&k| matches!(lozenge_indicator(cfg, x, l, k), Ok(1)))
            };
            let Some(kind) = kind else { continue };
            let fill = FILL.iter().find(|f| f.1 == kind).map(|f| f.0).unwrap_or("gray");
            let cx = cell * (2.0 * x as f64 + 1.0 + delta_of(l) as f64);
            let _ = writeln!(
                s,
                r#"<polygon points="{:.1},{cy:.1} {cx:.1},{:.1} {:.1},{cy:.1} {cx:.1},{:.1}" fill="{fill}" stroke="black" stroke-width="0.5"/>"#,
                cx - cell,
                cy - 0.8 * cell,
                cx + cell,
                cy + 0.8 * cell
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// q1 and q2 against η, one pair of curves per τ.
pub fn frozen_boundary(rows: &[(f64, f64, f64, f64)]) -> String {
    let (w, h, pad) = (480.0, 360.0, 40.0);
    let nu_max = rows.iter().map(|r| r.3).fold(0.0, f64::max).max(1e-9);
    let eta_max = rows.iter().map(|r| r.0).fold(0.0, f64::max).max(1e-9);
    let px = |nu: f64| pad + (w - 2.0 * pad) * nu / nu_max;
    let py = |eta: f64| h - pad - (h - 2.0 * pad) * eta / eta_max;
    let mut taus: Vec<f64> = rows.iter().map(|r| r.1).collect();
    taus.dedup();
    let colors = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e"];
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{pad},{pad} L{pad},{} L{},{}" fill="none" stroke="black"/>"#,
        h - pad,
        w - pad,
        h - pad
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">nu</text>"#, w - pad, h - pad / 3.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">eta</text>"#, pad / 4.0, pad - 8.0);
    for (i, tau) in taus.iter().enumerate() {
        let color = colors[i % colors.len()];
        for pick in [|r: &(f64, f64, f64, f64)| r.2, |r: &(f64, f64, f64, f64)| r.3] {
            let pts: Vec<String> =
                rows.iter().filter(|r| r.1 == *tau).map(|r| format!("{:.2},{:.2}", px(pick(r)), py(r.0))).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"><title>tau={tau}</title></polyline>"#,
                pts.join(" ")
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
