//! SVG drawings of circle patterns, center embeddings and related figures.

use std::fmt::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graphcore::{Color, CombMap};
use crate::io::PatternDocument;
use crate::miquel_dynamics::GridState;
use crate::resistor_networks::{Network, ReciprocalFigure, TemperleyPattern};
use crate::torus_spectral::{BlockPattern, FaceLift, TorusCenters};

#[derive(Clone, Debug, PartialEq)]
pub struct SvgOptions {
    /// Width of the image in pixels; the height follows the aspect ratio.
    pub width: f64,
    pub circles: bool,
    pub centers: bool,
    pub primal: bool,
    pub dual: bool,
    pub labels: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { width: 600.0, circles: true, centers: true, primal: true, dual: true, labels: false }
    }
}

/// Geometry to draw, in mathematical coordinates (y pointing up).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scene {
    pub circles: Vec<(Complex64, f64)>,
    pub primal_edges: Vec<[Complex64; 2]>,
    pub dual_edges: Vec<[Complex64; 2]>,
    pub vertices: Vec<(Complex64, Color)>,
    pub centers: Vec<Complex64>,
    pub labels: Vec<(Complex64, String)>,
}

/// Axis-aligned box `[xmin, ymin, xmax, ymax]` in drawing coordinates
/// (y pointing down).
fn bounds(items: impl Iterator<Item = (Complex64, f64)>) -> Option<[f64; 4]> {
    let mut b: Option<[f64; 4]> = None;
    for (z, r) in items {
        if !(z.re.is_finite() && z.im.is_finite() && r.is_finite()) {
            continue;
        }
        let (x, y) = (z.re, -z.im);
        let nb = [x - r, y - r, x + r, y + r];
        b = Some(match b {
            None => nb,
            Some(o) => [o[0].min(nb[0]), o[1].min(nb[1]), o[2].max(nb[2]), o[3].max(nb[3])],
        });
    }
    b
}

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

pub fn render_scene(scene: &Scene, opts: &SvgOptions) -> Result<String> {
    let circles: Vec<(Complex64, f64)> =
        scene.circles.iter().copied().filter(|&(_, r)| r > 0.0 && r.is_finite()).collect();
    let mut items: Vec<(Complex64, f64)> = scene.vertices.iter().map(|&(z, _)| (z, 0.0)).collect();
    items.extend(scene.centers.iter().map(|&z| (z, 0.0)));
    items.extend(scene.primal_edges.iter().chain(&scene.dual_edges).flatten().map(|&z| (z, 0.0)));
    if opts.circles {
        items.extend(circles.iter().copied());
    }
    if circles.is_empty() && scene.vertices.is_empty() && scene.primal_edges.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let b = bounds(items.into_iter()).ok_or(Error::EmptyDocument)?;
    let span = (b[2] - b[0]).max(b[3] - b[1]).max(1e-12);
    let m = 0.05 * span;
    let (x0, y0, w, h) = (b[0] - m, b[1] - m, b[2] - b[0] + 2.0 * m, b[3] - b[1] + 2.0 * m);
    let stroke = span / 400.0;
    let dot = span / 150.0;
    let height = opts.width * h / w;
    let p = |z: Complex64| (num(z.re), num(-z.im));
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="{} {} {} {}">"#,
        num(opts.width),
        num(height),
        num(x0),
        num(y0),
        num(w),
        num(h)
    )
    .unwrap();
    writeln!(s, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"#, num(x0), num(y0), num(w), num(h)).unwrap();
    if opts.circles && !circles.is_empty() {
        writeln!(s, r##"<g fill="none" stroke="#4a6fa5" stroke-width="{}">"##, num(stroke)).unwrap();
        for &(c, r) in &circles {
            let (cx, cy) = p(c);
            writeln!(s, r#"<circle class="pattern" cx="{cx}" cy="{cy}" r="{}"/>"#, num(r)).unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }
    let segments = |s: &mut String, color: &str, segs: &[[Complex64; 2]]| {
        writeln!(s, r#"<g stroke="{color}" stroke-width="{}">"#, num(stroke)).unwrap();
        for &[a, b] in segs {
            let ((x1, y1), (x2, y2)) = (p(a), p(b));
            writeln!(s, r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>"#).unwrap();
        }
        writeln!(s, "</g>").unwrap();
    };
    if opts.dual && !scene.dual_edges.is_empty() {
        segments(&mut s, "#c0392b", &scene.dual_edges);
    }
    if opts.primal && !scene.primal_edges.is_empty() {
        segments(&mut s, "#222222", &scene.primal_edges);
    }
    if opts.primal && !scene.vertices.is_empty() {
        writeln!(s, r##"<g stroke="#222222" stroke-width="{}">"##, num(stroke)).unwrap();
        for &(z, color) in &scene.vertices {
            let fill = if color == Color::White { "white" } else { "black" };
            let (cx, cy) = p(z);
            writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="{}" fill="{fill}"/>"#, num(dot)).unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }
    if opts.centers && !scene.centers.is_empty() {
        writeln!(s, r##"<g fill="#c0392b">"##).unwrap();
        for &z in &scene.centers {
            let (cx, cy) = p(z);
            writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="{}"/>"#, num(0.6 * dot)).unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }
    if opts.labels && !scene.labels.is_empty() {
        writeln!(s, r##"<g font-family="sans-serif" font-size="{}" fill="#555555">"##, num(4.0 * dot)).unwrap();
        for (z, text) in &scene.labels {
            let (x, y) = p(z + Complex64::new(dot, dot));
            writeln!(s, r#"<text x="{x}" y="{y}">{text}</text>"#).unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }
    writeln!(s, "</svg>").unwrap();
    Ok(s)
}

/// Planar pattern document: face circles, primal graph, centers and the
/// dual edges (boundary edges end at their corner point).
pub fn document_scene(doc: &PatternDocument, map: &CombMap) -> Scene {
    let mut scene = Scene::default();
    for f in 0..map.n_faces() {
        let c = if map.is_outer(f) { doc.outer_center } else { doc.centers.faces.get(f).copied().flatten() };
        if let (Some(c), Some(&r)) = (c, doc.radii.get(f)) {
            scene.circles.push((c, r));
        }
    }
    scene.centers = doc.centers.faces.iter().chain(&doc.centers.corners).flatten().copied().collect();
    for e in 0..map.n_edges() {
        let side = |h: usize| {
            let f = map.face(h);
            if map.is_outer(f) {
                doc.centers.corners.get(e).copied().flatten()
            } else {
                doc.centers.faces.get(f).copied().flatten()
            }
        };
        if let (Some(a), Some(b)) = (side(2 * e), side(2 * e + 1)) {
            scene.dual_edges.push([a, b]);
        }
    }
    if doc.vertices.len() == map.n_vertices() {
        scene.primal_edges = map.edges().iter().map(|&[a, b]| [doc.vertices[a], doc.vertices[b]]).collect();
        scene.vertices = doc.vertices.iter().enumerate().map(|(v, &z)| (z, map.color(v))).collect();
        scene.labels.extend(doc.vertices.iter().enumerate().map(|(v, &z)| (z, format!("v{v}"))));
    }
    for (f, z) in doc.centers.faces.iter().enumerate() {
        if let Some(z) = z {
            scene.labels.push((*z, format!("f{f}")));
        }
    }
    scene
}

pub fn render_svg(doc: &PatternDocument, map: &CombMap, opts: &SvgOptions) -> Result<String> {
    render_scene(&document_scene(doc, map), opts)
}

/// Block of a biperiodic pattern: the circles, the lifted primal graph and
/// the centers of every face translate in the block.
pub fn torus_scene(map: &CombMap, centers: &TorusCenters, pattern: &BlockPattern, block: [usize; 2]) -> Result<Scene> {
    let lift = FaceLift::new(map)?;
    let mut scene = Scene::default();
    let mut radii: Vec<_> = pattern.radii.iter().collect();
    radii.sort_by(|a, b| a.0.cmp(b.0));
    for (&(f, t), &r) in radii {
        scene.circles.push((centers.at(f, t), r));
    }
    let mut verts: Vec<_> = pattern.vertices.iter().collect();
    verts.sort_by(|a, b| a.0.cmp(b.0));
    for (&(v, q), &z) in &verts {
        scene.vertices.push((z, map.color(v)));
        if map.color(v) != Color::White {
            continue;
        }
        for h in map.outgoing(v) {
            let d = [q[0] + map.offset(h)[0], q[1] + map.offset(h)[1]];
            if let Some(&w) = pattern.vertices.get(&(map.dest(h), d)) {
                scene.primal_edges.push([z, w]);
                let left = centers.at(map.face(h), lift.face_at(h, q));
                let right = centers.at(map.face(h ^ 1), lift.face_at(h ^ 1, d));
                scene.dual_edges.push([left, right]);
            }
        }
    }
    for f in 0..map.n_faces() {
        for t0 in 0..block[0] as i32 {
            for t1 in 0..block[1] as i32 {
                scene.centers.push(centers.at(f, [t0, t1]));
            }
        }
    }
    Ok(scene)
}

/// Harmonic embedding of a network (primal) with its reciprocal figure
/// (dual) and, if given, the circles of the Temperley pattern.
pub fn network_scene(net: &Network, fig: &ReciprocalFigure, pattern: Option<&TemperleyPattern>) -> Scene {
    let mut scene = Scene::default();
    for e in 0..net.n_edges() {
        let [u, v] = net.edge(e);
        scene.primal_edges.push([fig.f[u], fig.f[v]]);
        let [l, r] = net.sides(e);
        scene.dual_edges.push([fig.g[l], fig.g[r]]);
    }
    scene.vertices = fig.f.iter().map(|&z| (z, Color::Black)).collect();
    scene.centers = fig.g.clone();
    scene.labels = fig.f.iter().enumerate().map(|(v, &z)| (z, format!("v{v}"))).collect();
    if let Some(p) = pattern {
        for (f, c) in p.centers.iter().enumerate() {
            let Some(c) = c else { continue };
            let h = p.graph.map.face_halves(f)[0];
            scene.circles.push((*c, (p.points[p.graph.map.origin(h)] - c).norm()));
        }
    }
    scene
}

/// Centers of a Miquel grid state over one fundamental domain, joined to
/// their right and upper neighbors; faces of the color mutated next are
/// drawn black.
pub fn grid_scene(state: &GridState) -> Scene {
    let mut scene = Scene::default();
    for j in 0..state.n as i64 {
        for i in 0..state.m as i64 {
            let z = state.center(i, j);
            let color = crate::miquel_dynamics::face_color(i, j);
            scene.vertices.push((z, if color == state.next { Color::Black } else { Color::White }));
            scene.primal_edges.push([z, state.center(i + 1, j)]);
            scene.primal_edges.push([z, state.center(i, j + 1)]);
        }
    }
    scene
}
