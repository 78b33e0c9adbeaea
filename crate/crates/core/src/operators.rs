//! Discrete maximal operators, generalized fractional integrals and
//! truncated Riesz transforms.
//!
//! Maximal operators take the supremum over the policy's cubes that contain
//! the point (the uncentred form), all of them inside the grid box, and use
//! cubes in place of balls.
//!
//! Operator text forms (used by the CLI):
//!
//! ```text
//! maximal            maximal(<w>,eta)
//! frac(<w>)          riesz:j   riesz:j,eps
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{mean_root, CubePolicy, Grid, GridFunction, PrefixTable, MAX_DIM};
use crate::par;
use crate::weight::{dini_tilde, WeightFunction};

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// `M_ρ^{(η)} f = sup_{Q∋x} ρ(r_Q)·(avg_Q |f|^η)^{1/η}`
    Maximal { rho: WeightFunction, eta: f64 },
    /// `I_ρ f(x) = ∫ f(y) ρ(|x−y|)/|x−y|^n dy`
    FractionalIntegral { rho: WeightFunction },
    /// `R_j` truncated at `|x−y| > ε`; `None` means one cell width.
    Riesz { axis: usize, eps: Option<f64> },
}

impl OperatorSpec {
    /// The Hardy–Littlewood maximal operator.
    pub fn hardy_littlewood() -> Self {
        Self::Maximal {
            rho: WeightFunction::constant(1.0),
            eta: 1.0,
        }
    }

    pub fn apply(&self, f: &GridFunction, policy: &CubePolicy) -> Result<GridFunction> {
        match self {
            Self::Maximal { rho, eta } => generalized_maximal(f, rho, *eta, policy),
            Self::FractionalIntegral { rho } => fractional_integral(f, rho),
            Self::Riesz { axis, eps } => riesz_transform(f, *axis, eps.unwrap_or(f.grid().h())),
        }
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            _ if *self == Self::hardy_littlewood() => write!(f, "maximal"),
            Self::Maximal { rho, eta } => write!(f, "maximal({rho},{eta:?})"),
            Self::FractionalIntegral { rho } => write!(f, "frac({rho})"),
            Self::Riesz { axis, eps: None } => write!(f, "riesz:{axis}"),
            Self::Riesz { axis, eps: Some(e) } => write!(f, "riesz:{axis},{e:?}"),
        }
    }
}

impl FromStr for OperatorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use crate::grid::catalog::{bad, weight_then_args};
        let s = s.trim();
        if s == "maximal" {
            return Ok(Self::hardy_littlewood());
        }
        if let Some(inner) = s.strip_prefix("maximal(").and_then(|r| r.strip_suffix(')')) {
            let (rho, a) = weight_then_args(s, inner, 1)?;
            let eta = a[0].parse().map_err(|_| bad(s, "malformed eta"))?;
            return Ok(Self::Maximal { rho, eta });
        }
        if let Some(inner) = s.strip_prefix("frac(").and_then(|r| r.strip_suffix(')')) {
            return Ok(Self::FractionalIntegral { rho: inner.parse()? });
        }
        if let Some(body) = s.strip_prefix("riesz:") {
            let mut it = body.split(',').map(str::trim);
            let axis = it
                .next()
                .and_then(|a| a.parse().ok())
                .ok_or_else(|| bad(s, "axis must be a positive integer"))?;
            let eps = match it.next() {
                Some(e) => Some(e.parse().map_err(|_| bad(s, "malformed eps"))?),
                None => None,
            };
            if it.next().is_some() {
                return Err(bad(s, "riesz takes an axis and an optional eps"));
            }
            return Ok(Self::Riesz { axis, eps });
        }
        Err(bad(s, "unknown operator"))
    }
}

/// `M_ρ^{(η)} f(x) = max_{Q ∋ x} ρ(r_Q)·((1/|Q|)∫_Q |f|^η)^{1/η}` over the
/// policy's cubes. Cells covered by no cube of the policy get 0.
pub fn generalized_maximal(f: &GridFunction, rho: &WeightFunction, eta: f64, policy: &CubePolicy) -> Result<GridFunction> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::Domain(format!("maximal exponent η must be positive, got {eta}")));
    }
    let grid = *f.grid();
    policy.validate(&grid)?;
    let table = PrefixTable::new(f, eta)?;
    let n = grid.n();
    let cells = grid.cells_per_axis();
    let mut out = vec![0.0f64; grid.len()];
    for &s in &policy.sides {
        let w = rho.eval(0.5 * s as f64 * grid.h())?;
        let (k, sums) = table.window_sums(s, policy.stride);
        let vol = s.pow(n as u32) as f64;
        let avg: Vec<f64> = sums.iter().map(|&v| w * mean_root(v, vol, eta)).collect();
        let spread = containing_max(avg, n, k, cells, s, policy.stride);
        for (o, v) in out.iter_mut().zip(spread) {
            *o = o.max(v);
        }
    }
    GridFunction::new(grid, out)
}

/// For a `k^n` array of placement values, the max over placements containing
/// each of the `N^n` cells, one axis at a time.
fn containing_max(mut data: Vec<f64>, n: usize, k: usize, cells: usize, s: usize, stride: usize) -> Vec<f64> {
    // shape[d] is k for axes not yet expanded and N after
    let mut shape = [1usize; MAX_DIM];
    shape[..n].fill(k);
    for axis in 0..n {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..n].iter().product();
        let mut next = vec![f64::NEG_INFINITY; outer * cells * inner];
        let mut line = vec![0.0; k];
        let mut res = vec![0.0; cells];
        for o in 0..outer {
            for i in 0..inner {
                for a in 0..k {
                    line[a] = data[(o * k + a) * inner + i];
                }
                window_max(&line, cells, s, stride, &mut res);
                for x in 0..cells {
                    next[(o * cells + x) * inner + i] = res[x];
                }
            }
        }
        data = next;
        shape[axis] = cells;
    }
    data.into_iter().map(|v| v.max(0.0)).collect()
}

/// `res[x] = max{line[a] : a·stride ≤ x < a·stride + s}` with a monotone
/// deque; both window ends are nondecreasing in `x`.
fn window_max(line: &[f64], cells: usize, s: usize, stride: usize, res: &mut [f64]) {
    let k = line.len();
    let mut dq: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut next = 0;
    for (x, slot) in res.iter_mut().enumerate().take(cells) {
        let hi = (x / stride).min(k - 1);
        let lo = (x + 1).saturating_sub(s).div_ceil(stride);
        while next <= hi {
            while dq.back().is_some_and(|&b| line[b] <= line[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&a| a < lo) {
            dq.pop_front();
        }
        *slot = match dq.front() {
            Some(&a) if lo <= hi => line[a],
            _ => f64::NEG_INFINITY,
        };
    }
}

/// Nonzero cells of `f` in lexicographic order: (multi-index, value).
fn support(f: &GridFunction) -> Vec<([usize; MAX_DIM], f64)> {
    let g = f.grid();
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, &v)| (g.multi(i), v))
        .collect()
}

/// Volume of the unit ball in dimension `n ≤ 3`.
fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => 4.0 / 3.0 * std::f64::consts::PI,
    }
}

/// Surface measure `ω_{n−1}` of the unit sphere in dimension `n ≤ 3`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Radius of the ball with the volume of one cell.
pub fn equal_volume_radius(grid: &Grid) -> f64 {
    grid.h() * unit_ball_volume(grid.n()).powf(-1.0 / grid.n() as f64)
}

/// Table over nonnegative offsets `|d|` of `kernel(|d|·h)·h^n`, row-major
/// in `N^n`.
fn radial_table(grid: &Grid, kernel: impl Fn(&[usize], f64) -> f64 + Sync + Send) -> Vec<f64> {
    let n = grid.n();
    let h = grid.h();
    let vol = grid.cell_volume();
    par::map(grid.len(), |lin| {
        let d = grid.multi(lin);
        let r2: usize = d[..n].iter().map(|&v| v * v).sum();
        if r2 == 0 {
            0.0
        } else {
            kernel(&d[..n], (r2 as f64).sqrt() * h) * vol
        }
    })
}

fn offset_index(grid: &Grid, x: &[usize], y: &[usize]) -> usize {
    (0..grid.n()).fold(0, |acc, d| acc * grid.cells_per_axis() + x[d].abs_diff(y[d]))
}

/// `I_ρ f(x) = Σ_{y≠x} ρ(|x−y|)|x−y|^{-n} f(y) h^n + f(x)·ω_{n−1}·ρ̃(h_eq)`,
/// the singular cell replaced by the ball of equal volume.
pub fn fractional_integral(f: &GridFunction, rho: &WeightFunction) -> Result<GridFunction> {
    let grid = *f.grid();
    let n = grid.n();
    let self_term = unit_sphere_area(n) * dini_tilde(rho, equal_volume_radius(&grid))?;
    let table = radial_table(&grid, |_, r| rho.value(r) / r.powi(n as i32));
    let supp = support(f);
    let out = par::map(grid.len(), |lin| {
        let x = grid.multi(lin);
        let mut acc = 0.0;
        for (y, v) in &supp {
            acc += table[offset_index(&grid, &x, y)] * v;
        }
        acc + f.values()[lin] * self_term
    });
    GridFunction::new(grid, out)
}

fn check_riesz(grid: &Grid, axis: usize, eps: f64) -> Result<()> {
    if !(1..=grid.n()).contains(&axis) {
        return Err(Error::Domain(format!("Riesz axis {axis} outside 1..={}", grid.n())));
    }
    if !(eps.is_finite() && eps >= grid.h() * (1.0 - 1e-12)) {
        return Err(Error::Domain(format!("Riesz truncation ε = {eps} below the cell width {}", grid.h())));
    }
    Ok(())
}

/// `R_j f(x) = Σ_{|x−y|>ε} (x_j−y_j)|x−y|^{-n-1} f(y) h^n` at every cell;
/// `axis` counts from 1.
pub fn riesz_transform(f: &GridFunction, axis: usize, eps: f64) -> Result<GridFunction> {
    let grid = *f.grid();
    check_riesz(&grid, axis, eps)?;
    let n = grid.n();
    let h = grid.h();
    let cut2 = (eps / h).powi(2) * (1.0 + 1e-12);
    let j = axis - 1;
    let table = radial_table(&grid, |d, r| {
        let r2: usize = d.iter().map(|&v| v * v).sum();
        if (r2 as f64) > cut2 {
            d[j] as f64 * h / r.powi(n as i32 + 1)
        } else {
            0.0
        }
    });
    let supp = support(f);
    let out = par::map(grid.len(), |lin| {
        let x = grid.multi(lin);
        let mut acc = 0.0;
        for (y, v) in &supp {
            let k = table[offset_index(&grid, &x, y)];
            acc += if x[j] >= y[j] { k * v } else { -k * v };
        }
        acc
    });
    GridFunction::new(grid, out)
}

/// [`riesz_transform`] at an arbitrary point of the box.
pub fn riesz_at(f: &GridFunction, axis: usize, eps: f64, point: &[f64]) -> Result<f64> {
    let grid = f.grid();
    check_riesz(grid, axis, eps)?;
    let n = grid.n();
    if point.len() != n {
        return Err(Error::Domain(format!("point has {} coordinates, grid has {n}", point.len())));
    }
    let j = axis - 1;
    let mut acc = 0.0;
    for (lin, &v) in f.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let y = grid.center(lin);
        let r2: f64 = (0..n).map(|d| (point[d] - y[d]).powi(2)).sum();
        if r2 > eps * eps {
            acc += (point[j] - y[j]) * r2.sqrt().powi(-(n as i32) - 1) * v;
        }
    }
    Ok(acc * grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{enumerate_cubes, sample_catalog, CatalogSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fn(seed: u64, n: usize, cells: usize) -> GridFunction {
        let g = Grid::new(n, 1.0, cells).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GridFunction::new(g, (0..g.len()).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap()
    }

    /// All cubes of the policy containing each cell, direct sums.
    fn brute_maximal(f: &GridFunction, rho: &WeightFunction, eta: f64, p: &CubePolicy) -> Vec<f64> {
        let g = f.grid();
        let cubes = enumerate_cubes(g, p).unwrap();
        let t = PrefixTable::new(f, eta).unwrap();
        (0..g.len())
            .map(|i| {
                let m = g.multi(i);
                cubes
                    .iter()
                    .filter(|c| c.contains(&m))
                    .map(|c| rho.value(c.radius(g)) * mean_root(t.cube_sum(c), c.cell_count() as f64, eta))
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    #[test]
    fn maximal_of_cube_indicator_is_one_on_cube() {
        let g = Grid::new(2, 2.0, 32).unwrap();
        let f = sample_catalog(&CatalogSpec::IndicatorCube { center: 0.0, r: 0.5 }, &g).unwrap();
        let m = OperatorSpec::hardy_littlewood().apply(&f, &CubePolicy::dyadic(&g)).unwrap();
        for (i, &v) in f.values().iter().enumerate() {
            if v == 1.0 {
                assert_eq!(m.values()[i], 1.0);
            } else {
                assert!(m.values()[i] < 1.0);
            }
        }
    }

    #[test]
    fn maximal_matches_brute_force_1d() {
        let f = random_fn(9, 1, 64);
        let g = *f.grid();
        for p in [CubePolicy::dyadic(&g), CubePolicy::all(&g), CubePolicy { sides: vec![1, 3, 8], stride: 3 }] {
            let fast = generalized_maximal(&f, &WeightFunction::constant(1.0), 1.0, &p).unwrap();
            assert_eq!(fast.values(), brute_maximal(&f, &WeightFunction::constant(1.0), 1.0, &p).as_slice());
        }
    }

    #[test]
    fn fractional_integral_of_interval_at_origin() {
        let g = Grid::new(1, 2.0, 256).unwrap();
        let f = sample_catalog(&CatalogSpec::IndicatorBall { center: 0.0, radius: 1.0 }, &g).unwrap();
        let out = fractional_integral(&f, &WeightFunction::power(0.5)).unwrap();
        let v = out.values()[g.nearest(0.0)];
        assert!((v / 4.0 - 1.0).abs() < 0.05, "{v}");
    }

    #[test]
    fn fractional_integral_needs_dini() {
        let g = Grid::new(1, 1.0, 8).unwrap();
        let f = GridFunction::zeros(g);
        assert!(matches!(
            fractional_integral(&f, &WeightFunction::constant(1.0)),
            Err(Error::DiniViolation(_))
        ));
    }

    #[test]
    fn riesz_of_interval_matches_log() {
        let g = Grid::new(1, 4.0, 512).unwrap();
        let (a, b) = (-1.0, 1.0);
        let f = GridFunction::from_fn(g, |x| (x[0] > a && x[0] < b) as u8 as f64).unwrap();
        let out = riesz_transform(&f, 1, g.h()).unwrap();
        for x in [1.5, 2.0, 3.0] {
            let i = g.nearest(x);
            let xc = g.coord(i);
            let exact = ((xc - a) / (xc - b)).ln();
            assert!((out.values()[i] - exact).abs() < 2.0 * g.h() / (xc - b), "{x}");
        }
    }

    #[test]
    fn riesz_odd_kernel_cancels_for_even_input() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let f = sample_catalog(&CatalogSpec::IndicatorBall { center: 0.0, radius: 0.6 }, &g).unwrap();
        for axis in [1, 2] {
            assert!(riesz_at(&f, axis, g.h(), &[0.0, 0.0]).unwrap().abs() < 1e-12);
        }
        // and agrees with the lattice version at cell centres
        let out = riesz_transform(&f, 1, 1.5 * g.h()).unwrap();
        let i = 37;
        let x = g.center(i);
        let at = riesz_at(&f, 1, 1.5 * g.h(), &x[..2]).unwrap();
        assert!((at - out.values()[i]).abs() < 1e-12);
    }

    #[test]
    fn riesz_truncation_is_strict() {
        let g = Grid::new(1, 1.0, 8).unwrap();
        let mut v = vec![0.0; 8];
        v[4] = 1.0;
        let f = GridFunction::new(g, v).unwrap();
        let out = riesz_transform(&f, 1, g.h()).unwrap();
        assert_eq!(out.values()[5], 0.0);
        assert!(out.values()[6] > 0.0);
        assert!(riesz_transform(&f, 1, 0.5 * g.h()).is_err());
        assert!(riesz_transform(&f, 2, g.h()).is_err());
    }

    #[test]
    fn spec_text_roundtrip() {
        for s in ["maximal", "maximal(power:0.5,2.0)", "frac(trunc(power:0.5,1.0))", "riesz:1", "riesz:2,0.25"] {
            let op: OperatorSpec = s.parse().unwrap();
            assert_eq!(op.to_string().parse::<OperatorSpec>().unwrap(), op);
        }
        assert!("riesz:x".parse::<OperatorSpec>().is_err());
        assert!("laplace".parse::<OperatorSpec>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn maximal_matches_brute_force(seed in any::<u64>(), n in 1usize..=3, stride in 1usize..=3, ei in 0usize..3) {
            let eta: f64 = [0.5, 1.0, 2.0][ei];
            let f = random_fn(seed, n, 8);
            let g = *f.grid();
            let p = CubePolicy { sides: CubePolicy::all(&g).sides, stride };
            let rho = WeightFunction::power(0.3);
            let fast = generalized_maximal(&f, &rho, eta, &p).unwrap();
            let brute = brute_maximal(&f, &rho, eta, &p);
            prop_assert_eq!(fast.values(), brute.as_slice());
        }

        #[test]
        fn maximal_sublinear_and_monotone(a in any::<u64>(), b in any::<u64>()) {
            let f = random_fn(a, 1, 64);
            let h = random_fn(b, 1, 64);
            let p = CubePolicy::dyadic(f.grid());
            let op = OperatorSpec::hardy_littlewood();
            let mf = op.apply(&f, &p).unwrap();
            let mh = op.apply(&h, &p).unwrap();
            let ms = op.apply(&f.add(&h).unwrap(), &p).unwrap();
            let sum_abs = f.zip_with(&h, |x, y| x.abs() + y.abs()).unwrap();
            let mabs = op.apply(&sum_abs, &p).unwrap();
            for i in 0..64 {
                prop_assert!(ms.values()[i] <= mf.values()[i] + mh.values()[i] + 1e-9);
                prop_assert!(mf.values()[i] <= mabs.values()[i]);
            }
        }

        #[test]
        fn homogeneity_is_bit_exact(seed in any::<u64>(), e in -3i32..4, neg in any::<bool>()) {
            let c = if neg { -(e as f64).exp2() } else { (e as f64).exp2() };
            let f = random_fn(seed, 1, 32);
            let cf = f.scale(c).unwrap();
            let p = CubePolicy::dyadic(f.grid());
            for op in [
                OperatorSpec::hardy_littlewood(),
                OperatorSpec::FractionalIntegral { rho: WeightFunction::power(0.5) },
                OperatorSpec::Riesz { axis: 1, eps: None },
            ] {
                let a = op.apply(&cf, &p).unwrap();
                let b = op.apply(&f, &p).unwrap();
                let factor = if matches!(op, OperatorSpec::Maximal { .. }) { c.abs() } else { c };
                let scaled: Vec<f64> = b.values().iter().map(|v| v * factor).collect();
                prop_assert_eq!(a.values(), scaled.as_slice());
            }
        }

        #[test]
        fn fractional_integral_monotone(seed in any::<u64>()) {
            let f = random_fn(seed, 2, 8).map(f64::abs).unwrap();
            let g = f.map(|v| v + 0.5).unwrap();
            let rho = WeightFunction::exp_damped(0.5, 1.0);
            let a = fractional_integral(&f, &rho).unwrap();
            let b = fractional_integral(&g, &rho).unwrap();
            for i in 0..a.values().len() {
                prop_assert!(a.values()[i] <= b.values()[i]);
            }
        }
    }

}
