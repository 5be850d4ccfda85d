use circlepat::families;
use circlepat::graphcore::CombMap;
use circlepat::io::*;
use circlepat::planar_embed::{embed_planar, BoundaryQuad, SolveOptions};
use circlepat::svg::{render_svg, SvgOptions};
use circlepat::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cube_document() -> (CombMap, PatternDocument) {
    let map = families::cube();
    let mut xs = vec![1.0; map.n_faces()];
    xs[4] = 4.0 / 3.0;
    let sols = embed_planar(&map, &xs, &BoundaryQuad::unit_square(), &SolveOptions::default()).unwrap();
    let meta = Metadata { generator: "test".into(), seed: None, tolerance: 1e-9 };
    let doc = PatternDocument::from_solution(&map, &xs, &sols[0], meta);
    (map, doc)
}

#[test]
fn document_round_trip_is_exact() {
    let (_, doc) = cube_document();
    let text = doc.to_json();
    let back = PatternDocument::from_json(&text).unwrap();
    assert_eq!(back, doc);
    assert_eq!(back.to_json(), text);
    back.validate().unwrap();
}

#[test]
fn random_documents_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (_, mut doc) = cube_document();
    for _ in 0..50 {
        for z in doc.vertices.iter_mut() {
            *z = circlepat::Complex64::new(rng.gen_range(-1e3..1e3), rng.gen::<f64>() * 1e-7);
        }
        for r in doc.radii.iter_mut() {
            *r = rng.gen::<f64>() / 3.0;
        }
        doc.metadata.seed = Some(rng.gen());
        let back = PatternDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
    }
}

#[test]
fn recorded_residuals_match_geometry() {
    let (map, doc) = cube_document();
    let r = doc.recompute_residuals(&map);
    assert!((r.angle - doc.residuals.angle).abs() < 1e-12);
    assert!(doc.residuals.face_weight < 1e-8);
    assert!(doc.residuals.circle < 1e-9);
    let mut bad = doc.clone();
    bad.residuals.angle += 1e-6;
    assert!(matches!(bad.validate(), Err(Error::Schema { path, .. }) if path == "residuals.angle"));
}

#[test]
fn missing_field_is_named() {
    let (_, doc) = cube_document();
    let mut v: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
    v.as_object_mut().unwrap().remove("radii");
    let err = PatternDocument::from_json(&v.to_string()).unwrap_err();
    match err {
        Error::Schema { path, message } => {
            assert_eq!(path, "radii");
            assert!(message.contains("line"));
        }
        e => panic!("{e:?}"),
    }
}

#[test]
fn legacy_version_is_rejected() {
    let (_, doc) = cube_document();
    let mut v: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
    v["version"] = 0.into();
    assert_eq!(PatternDocument::from_json(&v.to_string()).unwrap_err(), Error::UnsupportedVersion(0));
    v.as_object_mut().unwrap().remove("version");
    assert!(matches!(PatternDocument::from_json(&v.to_string()), Err(Error::Schema { path, .. }) if path == "version"));
}

#[test]
fn cube_svg_has_six_circles() {
    let (map, doc) = cube_document();
    let svg = render_svg(&doc, &map, &SvgOptions::default()).unwrap();
    assert_eq!(svg.matches(r#"class="pattern""#).count(), 6);
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
    // the four boundary corners of the unit square are drawn as dual points
    for corner in [("0.000000", "0.000000"), ("1.000000", "0.000000"), ("1.000000", "-1.000000"), ("0.000000", "-1.000000")] {
        assert!(svg.contains(&format!(r#"cx="{}" cy="{}""#, corner.0, corner.1)), "{corner:?}");
    }
}

#[test]
fn svg_viewbox_has_five_percent_margin() {
    let (map, doc) = cube_document();
    let opts = SvgOptions { circles: false, ..SvgOptions::default() };
    let svg = render_svg(&doc, &map, &opts).unwrap();
    let vb = svg.split("viewBox=\"").nth(1).unwrap().split('"').next().unwrap();
    let n: Vec<f64> = vb.split(' ').map(|t| t.parse().unwrap()).collect();
    // the drawing without circles spans the unit square
    for (got, want) in n.iter().zip([-0.05, -1.05, 1.1, 1.1]) {
        assert!((got - want).abs() < 1e-6, "{vb}");
    }
}

#[test]
fn svg_is_deterministic() {
    let (map, doc) = cube_document();
    let opts = SvgOptions { labels: true, ..SvgOptions::default() };
    let a = render_svg(&doc, &map, &opts).unwrap();
    let again = PatternDocument::from_json(&doc.to_json()).unwrap();
    let b = render_svg(&again, &map, &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn empty_document_is_an_error() {
    let (map, mut doc) = cube_document();
    doc.vertices.clear();
    doc.radii = vec![0.0; doc.radii.len()];
    assert_eq!(render_svg(&doc, &map, &SvgOptions::default()).unwrap_err(), Error::EmptyDocument);
}

#[test]
fn scenes_render_for_every_figure() {
    use circlepat::miquel_dynamics::GridState;
    use circlepat::resistor_networks::{random_grid_network, regular_polygon, temperley_pattern, tutte_embed};
    use circlepat::svg::{grid_scene, network_scene, render_scene};

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = GridState::rectangle(4, 4, 1.0, 2.0).unwrap();
    let svg = render_scene(&grid_scene(&s), &SvgOptions::default()).unwrap();
    assert_eq!(svg.matches("<line").count(), 32);
    assert_eq!(svg.matches(r#"fill="black""#).count(), 8);

    let (net, _) = random_grid_network(3, 4, 0.5, 2.0, &mut rng).unwrap();
    let fig = tutte_embed(&net, &regular_polygon(net.boundary().len()), circlepat::Complex64::new(0.1, 0.2)).unwrap();
    let pattern = temperley_pattern(&net, &fig).unwrap();
    let scene = network_scene(&net, &fig, Some(&pattern));
    assert_eq!(scene.primal_edges.len(), net.n_edges());
    assert_eq!(scene.circles.len(), pattern.centers.iter().flatten().count());
    let svg = render_scene(&scene, &SvgOptions::default()).unwrap();
    assert_eq!(svg.matches(r#"class="pattern""#).count(), scene.circles.len());

    assert_eq!(render_scene(&Default::default(), &SvgOptions::default()).unwrap_err(), Error::EmptyDocument);
}

#[test]
fn torus_block_scene_draws_every_translate() {
    use circlepat::svg::{render_scene, torus_scene};
    use circlepat::torus_spectral::{block_pattern, embed_torus, FaceLift, ScanOptions};

    let map = families::hex_torus(1, 1);
    let e = embed_torus(&map, &vec![1.0; map.n_edges()], &ScanOptions::default()).unwrap();
    let lift = FaceLift::new(&map).unwrap();
    let dual = e.centers.dual_face(&map, &lift, 0);
    let z0 = dual.iter().sum::<circlepat::Complex64>() / dual.len() as f64;
    let pattern = block_pattern(&map, &e.centers, 0, z0, [2, 2]).unwrap();
    let scene = torus_scene(&map, &e.centers, &pattern, [2, 2]).unwrap();
    assert_eq!(scene.centers.len(), 4 * map.n_faces());
    assert_eq!(scene.circles.len(), pattern.radii.len());
    assert_eq!(scene.primal_edges.len(), scene.dual_edges.len());
    let a = render_scene(&scene, &SvgOptions::default()).unwrap();
    assert_eq!(a, render_scene(&torus_scene(&map, &e.centers, &pattern, [2, 2]).unwrap(), &SvgOptions::default()).unwrap());
}
