//! Browser demo: each export takes plain numbers or JSON and returns JSON
//! with an `svg` field ready to be inserted into the page.

use circlepat::miquel_dynamics::{angle_distance, GridState};
use circlepat::planar_embed::{embed_planar, BoundaryQuad, SolveOptions};
use circlepat::resistor_networks::{random_grid_network, regular_polygon, temperley_pattern, tutte_embed};
use circlepat::svg::{self, SvgOptions};
use circlepat::{families, io, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Circle pattern of the cube graph whose central face has weight `x`.
pub fn cube_pattern(x: f64, solution: usize) -> Result<String, String> {
    let map = families::cube();
    let mut xs = vec![1.0; map.n_faces()];
    xs[4] = x;
    let sols = embed_planar(&map, &xs, &BoundaryQuad::unit_square(), &SolveOptions::default()).map_err(err)?;
    if sols.is_empty() {
        return Err("no embedding found".into());
    }
    let k = solution % sols.len();
    let meta = io::Metadata { generator: "circlepat web".into(), seed: None, tolerance: 1e-9 };
    let doc = io::PatternDocument::from_solution(&map, &xs, &sols[k], meta);
    let svg = svg::render_svg(&doc, &map, &SvgOptions::default()).map_err(err)?;
    Ok(json!({
        "svg": svg,
        "solutions": sols.len(),
        "solution": k,
        "convex": sols[k].convex,
        "residuals": doc.residuals,
    })
    .to_string())
}

/// State of the Miquel dynamics demo, kept by the page between calls.
#[derive(Serialize, Deserialize)]
pub struct MiquelDemo {
    pub state: GridState,
    pub step: usize,
    pub start: Vec<f64>,
}

fn miquel_view(demo: &MiquelDemo) -> Result<String, String> {
    let inv = demo.state.zigzag_invariants();
    let drift = inv.iter().zip(&demo.start).map(|(a, b)| angle_distance(*a, *b)).fold(0.0, f64::max);
    let opts = SvgOptions { circles: false, ..SvgOptions::default() };
    let svg = svg::render_scene(&svg::grid_scene(&demo.state), &opts).map_err(err)?;
    Ok(json!({ "svg": svg, "step": demo.step, "invariants": inv, "drift": drift, "demo": demo }).to_string())
}

/// Random positive 4x4 grid state.
pub fn miquel_start(seed: u64, amplitude: f64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state = GridState::random_positive(4, 4, amplitude, &mut rng).map_err(err)?;
    let start = state.zigzag_invariants();
    miquel_view(&MiquelDemo { state, step: 0, start })
}

/// Advances the demo state returned by a previous call by `steps` steps.
pub fn miquel_advance(demo_json: &str, steps: usize) -> Result<String, String> {
    let mut demo: MiquelDemo = serde_json::from_str(demo_json).map_err(err)?;
    for _ in 0..steps {
        demo.state = demo.state.step().map_err(err)?;
        demo.step += 1;
    }
    miquel_view(&demo)
}

/// Temperley circle pattern of a random square-grid resistor network.
pub fn network_pattern(rows: usize, cols: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (net, _) = random_grid_network(rows, cols, 0.2, 5.0, &mut rng).map_err(err)?;
    let polygon = regular_polygon(net.boundary().len());
    let probe = tutte_embed(&net, &polygon, Complex64::new(0.0, 0.0)).map_err(err)?;
    let ring = net.face_vertices(0);
    let root = ring.iter().map(|&v| probe.f[v]).sum::<Complex64>() / ring.len() as f64;
    let fig = tutte_embed(&net, &polygon, root).map_err(err)?;
    let pattern = temperley_pattern(&net, &fig).map_err(err)?;
    let scene = svg::network_scene(&net, &fig, Some(&pattern));
    let svg = svg::render_scene(&scene, &SvgOptions::default()).map_err(err)?;
    Ok(json!({ "svg": svg, "figure": fig.residuals, "temperley": pattern.report }).to_string())
}

#[wasm_bindgen(js_name = cubePattern)]
pub fn cube_pattern_js(x: f64, solution: usize) -> Result<String, JsError> {
    cube_pattern(x, solution).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = miquelStart)]
pub fn miquel_start_js(seed: u32, amplitude: f64) -> Result<String, JsError> {
    miquel_start(seed as u64, amplitude).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = miquelAdvance)]
pub fn miquel_advance_js(demo_json: &str, steps: usize) -> Result<String, JsError> {
    miquel_advance(demo_json, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = networkPattern)]
pub fn network_pattern_js(rows: usize, cols: usize, seed: u32) -> Result<String, JsError> {
    network_pattern(rows, cols, seed as u64).map_err(|e| JsError::new(&e))
}
