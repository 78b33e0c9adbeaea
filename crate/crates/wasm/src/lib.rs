//! Browser bindings: three interactive views over the core crate, each
//! returning a JSON document the page plots. All views are one-dimensional.
//!
//! Build with `wasm-pack build crates/wasm --target web --out-dir www/pkg`.

use morrey::grid::{sample_catalog, CatalogSpec, CubePolicy, Grid, GridFunction};
use morrey::norms::morrey_norm;
use morrey::operators::{fractional_integral, generalized_maximal};
use morrey::weight::{classify_gq, integral_condition_z0, ProbeGrid, WeightFunction};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest grid the page may request.
pub const MAX_CELLS: usize = 4096;

/// Largest number of curve samples.
pub const MAX_POINTS: usize = 2000;

#[derive(Serialize)]
struct Curve {
    weight: String,
    t: Vec<f64>,
    phi: Vec<f64>,
    /// `t^{-n/q} φ(t)`, almost decreasing for class members.
    decay: Vec<f64>,
    gq_member: bool,
    doubling: f64,
    z0_sup: Option<f64>,
}

#[derive(Serialize)]
struct Profile {
    function: String,
    kernel: String,
    x: Vec<f64>,
    f: Vec<f64>,
    out: Vec<f64>,
    /// Hardy–Littlewood maximal function, for comparison.
    mf: Vec<f64>,
    norm_in: f64,
    norm_out: f64,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(err)
}

fn sample(spec: &str, half_width: f64, cells: usize) -> Result<(CatalogSpec, GridFunction), String> {
    if cells > MAX_CELLS {
        return Err(format!("at most {MAX_CELLS} cells, got {cells}"));
    }
    let grid = Grid::new(1, half_width, cells).map_err(err)?;
    let spec: CatalogSpec = spec.parse().map_err(err)?;
    let f = sample_catalog(&spec, &grid).map_err(err)?;
    Ok((spec, f))
}

fn centres(grid: &Grid) -> Vec<f64> {
    (0..grid.cells_per_axis()).map(|i| grid.coord(i)).collect()
}

/// `φ(t)` and `t^{-n/q}φ(t)` on `points` log-spaced radii in `[t_min, t_max]`,
/// with class membership and the integral-condition constant.
#[wasm_bindgen]
pub fn weight_curve(expr: &str, q: f64, n: usize, t_min: f64, t_max: f64, points: usize) -> Result<String, String> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must lie in 2..={MAX_POINTS}, got {points}"));
    }
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(format!("need 0 < t_min < t_max, got {t_min}, {t_max}"));
    }
    let w: WeightFunction = expr.parse().map_err(err)?;
    let probe = ProbeGrid::new(t_min, t_max, 8).map_err(err)?;
    let class = classify_gq(&w, q, n, &probe).map_err(err)?;
    let z0 = integral_condition_z0(&w, q, n, &probe, 64).map_err(err)?;
    let step = (t_max / t_min).ln() / (points - 1) as f64;
    let t: Vec<f64> = (0..points).map(|i| t_min * (step * i as f64).exp()).collect();
    let phi: Vec<f64> = t.iter().map(|&x| w.value(x)).collect();
    let e = n as f64 / q;
    let decay = t.iter().zip(&phi).map(|(&x, &v)| v * x.powf(-e)).collect();
    to_json(&Curve {
        weight: w.to_string(),
        t,
        phi,
        decay,
        gq_member: class.member,
        doubling: class.doubling_constant,
        z0_sup: z0.sup_constant,
    })
}

/// `f`, `M_ρ f` and `Mf` on a 1D grid, with Morrey norms of `f` and `M_ρ f`
/// under `(norm_weight, q)`. An empty `rho` means `ρ ≡ 1`.
#[wasm_bindgen]
pub fn maximal_profile(
    spec: &str,
    rho: &str,
    norm_weight: &str,
    q: f64,
    half_width: f64,
    cells: usize,
) -> Result<String, String> {
    let (spec, f) = sample(spec, half_width, cells)?;
    let rho: WeightFunction = if rho.trim().is_empty() {
        WeightFunction::constant(1.0)
    } else {
        rho.parse().map_err(err)?
    };
    let phi: WeightFunction = norm_weight.parse().map_err(err)?;
    let policy = CubePolicy::dyadic(f.grid());
    let out = generalized_maximal(&f, &rho, 1.0, &policy).map_err(err)?;
    let mf = generalized_maximal(&f, &WeightFunction::constant(1.0), 1.0, &policy).map_err(err)?;
    to_json(&Profile {
        function: spec.to_string(),
        kernel: rho.to_string(),
        x: centres(f.grid()),
        norm_in: morrey_norm(&f, &phi, q, &policy).map_err(err)?.value,
        norm_out: morrey_norm(&out, &phi, q, &policy).map_err(err)?.value,
        f: f.into_values(),
        out: out.into_values(),
        mf: mf.into_values(),
    })
}

/// `f`, `I_ρ f` and `Mf` on a 1D grid, with the Morrey norm of `f` under
/// `(norm_weight, q)` and of `I_ρ f` under `(target_weight, q)`.
#[wasm_bindgen]
pub fn fractional_profile(
    spec: &str,
    rho: &str,
    norm_weight: &str,
    target_weight: &str,
    q: f64,
    half_width: f64,
    cells: usize,
) -> Result<String, String> {
    let (spec, f) = sample(spec, half_width, cells)?;
    let rho: WeightFunction = rho.parse().map_err(err)?;
    let phi: WeightFunction = norm_weight.parse().map_err(err)?;
    let psi: WeightFunction = target_weight.parse().map_err(err)?;
    let policy = CubePolicy::dyadic(f.grid());
    let out = fractional_integral(&f, &rho).map_err(err)?;
    let mf = generalized_maximal(&f, &WeightFunction::constant(1.0), 1.0, &policy).map_err(err)?;
    to_json(&Profile {
        function: spec.to_string(),
        kernel: rho.to_string(),
        x: centres(f.grid()),
        norm_in: morrey_norm(&f, &phi, q, &policy).map_err(err)?.value,
        norm_out: morrey_norm(&out, &psi, q, &policy).map_err(err)?.value,
        f: f.into_values(),
        out: out.into_values(),
        mf: mf.into_values(),
    })
}
