use std::fmt::Write;

use thiserror::Error;

use super::{BondOrder, Element, Layout2D, MolGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DepictError {
    #[error("layout has {found} coordinates but the molecule has {expected} atoms")]
    LayoutMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepictStyle {
    pub bond_length_px: f64,
    pub stroke_width: f64,
    pub font_size: f64,
    /// Gap between parallel lines of a multiple bond, in pixels.
    pub line_spacing: f64,
    /// Bond ends stop this far short of a drawn label, in pixels.
    pub label_clearance: f64,
    /// Radius of the dot drawn for an isolated unlabeled atom; 0 draws nothing.
    pub placeholder_radius: f64,
    pub stroke: String,
}

impl Default for DepictStyle {
    fn default() -> Self {
        Self {
            bond_length_px: 30.0,
            stroke_width: 1.5,
            font_size: 12.0,
            line_spacing: 4.0,
            label_clearance: 7.0,
            placeholder_radius: 3.0,
            stroke: "#000000".to_string(),
        }
    }
}

fn atom_color(e: Element) -> &'static str {
    match e {
        Element::N => "#3050f8",
        Element::O => "#ff0d0d",
        Element::S => "#b8a000",
        Element::F | Element::CL => "#1f9e1f",
        Element::BR => "#a62929",
        Element::I => "#940094",
        Element::P => "#ff8000",
        Element::B => "#d08070",
        _ => "#000000",
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn is_labeled(g: &MolGraph, i: usize) -> bool {
    let a = &g.atoms[i];
    a.element != Element::C || a.formal_charge != 0 || a.isotope.is_some()
}

fn charge_text(q: i32) -> String {
    let sign = if q > 0 { "+" } else { "\u{2212}" };
    match q.unsigned_abs() {
        0 => String::new(),
        1 => sign.to_string(),
        n => format!("{n}{sign}"),
    }
}

fn hydrogen_suffix(g: &MolGraph, i: usize) -> String {
    let a = &g.atoms[i];
    if a.element == Element::C {
        return String::new();
    }
    match a.total_h() {
        0 => String::new(),
        1 => "H".to_string(),
        n => format!("H<tspan baseline-shift=\"sub\" font-size=\"75%\">{n}</tspan>"),
    }
}

/// Renders a stick structure as a standalone SVG 1.1 document.
///
/// Each atom gets a `<g class="atom" id="atom-{i}">` translated to its pixel
/// position; only heteroatoms and charged or isotope-labelled carbons carry a
/// text label.
pub fn depict_svg(g: &MolGraph, l: &Layout2D, style: &DepictStyle) -> Result<String, DepictError> {
    if l.len() != g.atoms.len() {
        return Err(DepictError::LayoutMismatch {
            expected: g.atoms.len(),
            found: l.len(),
        });
    }
    let s = style.bond_length_px;
    // SVG y grows downwards.
    let px: Vec<[f64; 2]> = l.coords.iter().map(|p| [p[0] * s, -p[1] * s]).collect();

    let (mut x0, mut y0, mut x1, mut y1) = px.iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), p| (a.min(p[0]), b.min(p[1]), c.max(p[0]), d.max(p[1])),
    );
    if px.is_empty() {
        (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
    }
    for (lo, hi) in [(&mut x0, &mut x1), (&mut y0, &mut y1)] {
        if *hi - *lo < s {
            let mid = (*lo + *hi) / 2.0;
            *lo = mid - s / 2.0;
            *hi = mid + s / 2.0;
        }
    }
    let (mx, my) = ((x1 - x0) * 0.1, (y1 - y0) * 0.1);
    let (vx, vy, vw, vh) = (x0 - mx, y0 - my, (x1 - x0) + 2.0 * mx, (y1 - y0) + 2.0 * my);

    let mut out = String::new();
    let _ = writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\" width=\"{}\" height=\"{}\">",
        num(vx),
        num(vy),
        num(vw),
        num(vh),
        num(vw),
        num(vh)
    );
    let _ = writeln!(out, "<title>{}</title>", escape(&g.source));
    let _ = writeln!(
        out,
        "<g class=\"bonds\" stroke=\"{}\" stroke-width=\"{}\" stroke-linecap=\"round\">",
        escape(&style.stroke),
        num(style.stroke_width)
    );

    let ring_centers = ring_centers(g, &px);
    for bond in &g.bonds {
        let (mut a, mut b) = (px[bond.a], px[bond.b]);
        let d = [b[0] - a[0], b[1] - a[1]];
        let len = d[0].hypot(d[1]);
        if len < 1e-9 {
            continue;
        }
        let u = [d[0] / len, d[1] / len];
        let trim = style.label_clearance.min(len * 0.35);
        if is_labeled(g, bond.a) {
            a = [a[0] + u[0] * trim, a[1] + u[1] * trim];
        }
        if is_labeled(g, bond.b) {
            b = [b[0] - u[0] * trim, b[1] - u[1] * trim];
        }
        let n = [-u[1], u[0]];
        let off = |p: [f64; 2], k: f64| [p[0] + n[0] * k, p[1] + n[1] * k];
        let sp = style.line_spacing;
        match bond.order {
            BondOrder::Single => line(&mut out, a, b, None),
            BondOrder::Double => {
                line(&mut out, off(a, sp / 2.0), off(b, sp / 2.0), None);
                line(&mut out, off(a, -sp / 2.0), off(b, -sp / 2.0), None);
            }
            BondOrder::Triple => {
                line(&mut out, a, b, None);
                line(&mut out, off(a, sp), off(b, sp), None);
                line(&mut out, off(a, -sp), off(b, -sp), None);
            }
            BondOrder::Aromatic => {
                line(&mut out, a, b, None);
                let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
                let side = ring_centers
                    .iter()
                    .filter(|(ring, _)| ring.contains(&bond.a) && ring.contains(&bond.b))
                    .map(|(_, c)| (c[0] - mid[0]) * n[0] + (c[1] - mid[1]) * n[1])
                    .next()
                    .map_or(1.0, |dot| if dot >= 0.0 { 1.0 } else { -1.0 });
                // Inner line is shortened so it sits inside the ring.
                let inset = len * 0.15;
                let ia = [a[0] + u[0] * inset, a[1] + u[1] * inset];
                let ib = [b[0] - u[0] * inset, b[1] - u[1] * inset];
                line(&mut out, off(ia, side * sp), off(ib, side * sp), Some("3,2"));
            }
        }
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(
        out,
        "<g class=\"atoms\" font-family=\"sans-serif\" font-size=\"{}\" text-anchor=\"middle\" dominant-baseline=\"central\">",
        num(style.font_size)
    );
    for (i, atom) in g.atoms.iter().enumerate() {
        let p = px[i];
        let _ = write!(
            out,
            "<g class=\"atom\" id=\"atom-{i}\" transform=\"translate({},{})\">",
            num(p[0]),
            num(p[1])
        );
        if is_labeled(g, i) {
            let mut label = String::new();
            if let Some(iso) = atom.isotope {
                let _ = write!(label, "<tspan baseline-shift=\"super\" font-size=\"75%\">{iso}</tspan>");
            }
            label.push_str(atom.element.symbol());
            label.push_str(&hydrogen_suffix(g, i));
            if atom.formal_charge != 0 {
                let _ = write!(
                    label,
                    "<tspan baseline-shift=\"super\" font-size=\"75%\">{}</tspan>",
                    charge_text(atom.formal_charge)
                );
            }
            let _ = write!(
                out,
                "<text x=\"0\" y=\"0\" fill=\"{}\">{}</text>",
                atom_color(atom.element),
                label
            );
        } else if style.placeholder_radius > 0.0 && !g.bonds.iter().any(|b| b.touches(i)) {
            let _ = write!(
                out,
                "<circle class=\"placeholder\" cx=\"0\" cy=\"0\" r=\"{}\" fill=\"{}\"/>",
                num(style.placeholder_radius),
                escape(&style.stroke)
            );
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}

fn line(out: &mut String, a: [f64; 2], b: [f64; 2], dash: Option<&str>) {
    let _ = write!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"",
        num(a[0]),
        num(a[1]),
        num(b[0]),
        num(b[1])
    );
    if let Some(d) = dash {
        let _ = write!(out, " stroke-dasharray=\"{d}\"");
    }
    out.push_str("/>\n");
}

fn ring_centers(g: &MolGraph, px: &[[f64; 2]]) -> Vec<(Vec<usize>, [f64; 2])> {
    super::smallest_rings(g)
        .into_iter()
        .map(|ring| {
            let k = ring.len() as f64;
            let c = ring
                .iter()
                .fold([0.0, 0.0], |acc, &i| [acc[0] + px[i][0], acc[1] + px[i][1]]);
            let c = [c[0] / k, c[1] / k];
            (ring, c)
        })
        .collect()
}
